use nanonav::msp::{decode, decode_command, encode, from_hex, to_hex, Direction, MspError, MspFrame};
use nanonav::vehicle::CommandMessage;

fn fixture(name: &str) -> Vec<u8> {
    let path = format!("{}/fixtures/msp/{name}.hex", env!("CARGO_MANIFEST_DIR"));
    from_hex(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn mixed() -> CommandMessage {
    CommandMessage {
        rc_roll: 1423,
        rc_pitch: 1618,
        rc_throttle: 1587,
        rc_aux4: 2000,
        ..CommandMessage::neutral(0)
    }
}

#[test]
fn rc_fixtures_match_encoder() {
    for (name, cmd) in [
        ("rc_neutral", CommandMessage::neutral(0)),
        ("rc_arm", CommandMessage::arm(0)),
        ("rc_disarm", CommandMessage::disarm(0)),
        ("rc_mixed", mixed()),
    ] {
        let bytes = fixture(name);
        assert_eq!(encode(&cmd).unwrap(), bytes, "{name}");
        let frames = decode(&bytes);
        let [Ok(frame)] = frames.as_slice() else {
            panic!("{name}: {frames:?}");
        };
        assert_eq!(decode_command(frame, 0).unwrap(), cmd, "{name}");
    }
}

#[test]
fn neutral_checksum_is_size_xor_id() {
    let bytes = fixture("rc_neutral");
    assert_eq!(bytes.len(), 22);
    assert_eq!(&bytes[..3], b"$M<");
    assert_eq!(bytes[21], 0x10 ^ 0xc8);
}

#[test]
fn empty_frames_in_both_directions() {
    let ident = decode(&fixture("ident_request"));
    assert_eq!(ident, vec![Ok(MspFrame::new(Direction::ToDrone, 1, Vec::new()).unwrap())]);
    let ack = decode(&fixture("rc_ack"));
    assert_eq!(ack, vec![Ok(MspFrame::new(Direction::FromDrone, 200, Vec::new()).unwrap())]);
}

#[test]
fn fixtures_survive_hex_roundtrip() {
    for name in ["ident_request", "rc_ack", "rc_arm", "rc_disarm", "rc_mixed", "rc_neutral"] {
        let bytes = fixture(name);
        assert_eq!(from_hex(&to_hex(&bytes)).unwrap(), bytes);
    }
}

#[test]
fn corrupted_fixture_is_rejected() {
    let mut bytes = fixture("rc_mixed");
    bytes[7] ^= 0x01;
    let frames = decode(&bytes);
    assert!(matches!(frames[0], Err(MspError::ChecksumMismatch { .. })), "{frames:?}");
    assert!(frames.iter().all(|f| f.is_err()));
}
