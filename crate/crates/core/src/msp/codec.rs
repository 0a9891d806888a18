use serde::{Deserialize, Serialize};

use super::MspError;
use crate::vehicle::{CommandMessage, PWM_MAX, PWM_MIN};

pub const MSP_SET_RAW_RC: u8 = 200;
pub const MAX_PAYLOAD: usize = 255;
const HEADER: [u8; 2] = [b'$', b'M'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    ToDrone,
    FromDrone,
}

impl Direction {
    pub fn byte(&self) -> u8 {
        match self {
            Direction::ToDrone => b'<',
            Direction::FromDrone => b'>',
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            b'<' => Some(Direction::ToDrone),
            b'>' => Some(Direction::FromDrone),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MspFrame {
    pub direction: Direction,
    pub command_id: u8,
    pub payload: Vec<u8>,
    pub checksum: u8,
}

pub fn checksum(command_id: u8, payload: &[u8]) -> u8 {
    payload.iter().fold((payload.len() as u8) ^ command_id, |acc, b| acc ^ b)
}

/// Payload length the codec insists on for commands it knows.
pub fn expected_len(direction: Direction, command_id: u8) -> Option<usize> {
    match (direction, command_id) {
        (Direction::ToDrone, MSP_SET_RAW_RC) => Some(16),
        _ => None,
    }
}

impl MspFrame {
    pub fn new(direction: Direction, command_id: u8, payload: Vec<u8>) -> Result<Self, MspError> {
        if payload.len() > MAX_PAYLOAD {
            return Err(MspError::PayloadTooLarge(payload.len()));
        }
        Ok(Self {
            direction,
            command_id,
            checksum: checksum(command_id, &payload),
            payload,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.payload.len() + 6);
        out.extend_from_slice(&HEADER);
        out.push(self.direction.byte());
        out.push(self.payload.len() as u8);
        out.push(self.command_id);
        out.extend_from_slice(&self.payload);
        out.push(self.checksum);
        out
    }
}

pub fn encode_raw(direction: Direction, command_id: u8, payload: &[u8]) -> Result<Vec<u8>, MspError> {
    Ok(MspFrame::new(direction, command_id, payload.to_vec())?.to_bytes())
}

/// The command message as a raw-RC frame; the drone index is routing
/// metadata and is not serialized.
pub fn command_frame(cmd: &CommandMessage) -> Result<MspFrame, MspError> {
    let mut payload = Vec::with_capacity(16);
    for (channel, value) in cmd.channels().into_iter().enumerate() {
        if !(PWM_MIN..=PWM_MAX).contains(&value) {
            return Err(MspError::ChannelOutOfRange { channel, value });
        }
        payload.extend_from_slice(&value.to_le_bytes());
    }
    MspFrame::new(Direction::ToDrone, MSP_SET_RAW_RC, payload)
}

pub fn encode(cmd: &CommandMessage) -> Result<Vec<u8>, MspError> {
    Ok(command_frame(cmd)?.to_bytes())
}

pub fn decode_command(frame: &MspFrame, drone_index: u8) -> Result<CommandMessage, MspError> {
    if frame.command_id != MSP_SET_RAW_RC || frame.payload.len() != 16 {
        return Err(MspError::NotACommand(frame.command_id));
    }
    let mut ch = [0u16; 8];
    for (i, pair) in frame.payload.chunks_exact(2).enumerate() {
        ch[i] = u16::from_le_bytes([pair[0], pair[1]]);
    }
    Ok(CommandMessage::from_channels(ch, drone_index))
}

/// Streaming MSP v1 decoder that tolerates garbage and partial input.
#[derive(Debug, Clone, Default)]
pub struct Decoder {
    buf: Vec<u8>,
    skipped: usize,
}

impl Decoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bytes held back waiting for the rest of a frame.
    pub fn pending(&self) -> usize {
        self.buf.len()
    }

    pub fn push(&mut self, bytes: &[u8]) -> Vec<Result<MspFrame, MspError>> {
        self.buf.extend_from_slice(bytes);
        let mut out = Vec::new();
        loop {
            if self.buf.is_empty() {
                break;
            }
            if self.buf[0] != b'$' {
                let n = self.buf.iter().position(|&b| b == b'$').unwrap_or(self.buf.len());
                self.discard(n);
                continue;
            }
            if self.buf.len() < 2 {
                break;
            }
            if self.buf[1] != b'M' {
                self.discard(1);
                continue;
            }
            if self.buf.len() < 3 {
                break;
            }
            let Some(direction) = Direction::from_byte(self.buf[2]) else {
                self.discard(1);
                continue;
            };
            if self.buf.len() < 5 {
                break;
            }
            let size = self.buf[3] as usize;
            let id = self.buf[4];
            if let Some(expected) = expected_len(direction, id).filter(|&e| e != size) {
                self.flush_skipped(&mut out);
                out.push(Err(MspError::LengthMismatch { command_id: id, expected, found: size }));
                self.buf.drain(..1);
                continue;
            }
            if self.buf.len() < 6 + size {
                break;
            }
            let payload = self.buf[5..5 + size].to_vec();
            let found = self.buf[5 + size];
            let expected = checksum(id, &payload);
            self.flush_skipped(&mut out);
            if found != expected {
                out.push(Err(MspError::ChecksumMismatch { expected, found }));
                self.buf.drain(..1);
                continue;
            }
            self.buf.drain(..6 + size);
            out.push(Ok(MspFrame {
                direction,
                command_id: id,
                payload,
                checksum: found,
            }));
        }
        out
    }

    /// End of input: report skipped bytes and any incomplete frame.
    pub fn finish(&mut self) -> Vec<Result<MspFrame, MspError>> {
        let mut out = Vec::new();
        self.flush_skipped(&mut out);
        if !self.buf.is_empty() {
            out.push(Err(MspError::Truncated { pending: self.buf.len() }));
            self.buf.clear();
        }
        out
    }

    fn discard(&mut self, n: usize) {
        self.buf.drain(..n);
        self.skipped += n;
    }

    fn flush_skipped(&mut self, out: &mut Vec<Result<MspFrame, MspError>>) {
        if self.skipped > 0 {
            out.push(Err(MspError::BadHeader { skipped: self.skipped }));
            self.skipped = 0;
        }
    }
}

/// Decode a complete byte sequence.
pub fn decode(bytes: &[u8]) -> Vec<Result<MspFrame, MspError>> {
    let mut dec = Decoder::new();
    let mut out = dec.push(bytes);
    out.extend(dec.finish());
    out
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect::<Vec<_>>().join(" ")
}

pub fn from_hex(text: &str) -> Result<Vec<u8>, MspError> {
    text.split_whitespace()
        .map(|t| u8::from_str_radix(t, 16).map_err(|_| MspError::BadHex(t.to_string())))
        .collect()
}
