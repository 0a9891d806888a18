//! MSP v1 framing for drone commands and a simulated command channel.

mod channel;
mod codec;

pub use channel::{send, total_latency, ChannelModel, Delivery, LatencyBudget};
pub use codec::{
    checksum, command_frame, decode, decode_command, encode, encode_raw, expected_len, from_hex, to_hex, Decoder,
    Direction, MspFrame, MAX_PAYLOAD, MSP_SET_RAW_RC,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MspError {
    #[error("payload of {0} bytes exceeds 255")]
    PayloadTooLarge(usize),
    #[error("channel {channel} value {value} outside 1000..=2000")]
    ChannelOutOfRange { channel: usize, value: u16 },
    #[error("checksum mismatch: expected {expected:#04x}, found {found:#04x}")]
    ChecksumMismatch { expected: u8, found: u8 },
    #[error("skipped {skipped} bytes before a frame header")]
    BadHeader { skipped: usize },
    #[error("command {command_id} carries {expected} bytes, frame declares {found}")]
    LengthMismatch { command_id: u8, expected: usize, found: usize },
    #[error("input ended inside a frame with {pending} bytes pending")]
    Truncated { pending: usize },
    #[error("frame with id {0} is not a raw RC command")]
    NotACommand(u8),
    #[error("invalid hex byte {0:?}")]
    BadHex(String),
    #[error("latency components must be non-negative")]
    NegativeLatency,
    #[error("drop probability {0} outside [0, 1]")]
    InvalidDropProbability(f64),
}
