//! Encode RC commands as MSP frames, decode a byte stream with noise in it
//! and show that a flipped bit is caught by the checksum.

use nanonav::msp::{decode, decode_command, encode, to_hex};
use nanonav::vehicle::CommandMessage;

fn main() {
    let mixed = CommandMessage {
        rc_roll: 1423,
        rc_pitch: 1618,
        rc_throttle: 1587,
        rc_aux4: 2000,
        ..CommandMessage::neutral(0)
    };
    for (name, cmd) in [("neutral", CommandMessage::neutral(0)), ("arm", CommandMessage::arm(0)), ("mixed", mixed)] {
        println!("{name:8} {}", to_hex(&encode(&cmd).unwrap()));
    }

    let mut stream = vec![0x00, 0x13, 0x37];
    stream.extend(encode(&mixed).unwrap());
    stream.extend(encode(&CommandMessage::arm(0)).unwrap());
    for item in decode(&stream) {
        match item {
            Ok(frame) => println!("frame: {:?}", decode_command(&frame, 0).map(|c| c.channels())),
            Err(e) => println!("error: {e}"),
        }
    }

    let mut bad = encode(&mixed).unwrap();
    bad[9] ^= 0x40;
    println!("after flipping one bit: {:?}", decode(&bad).first());
}
