//! Minimal WAV reader: 16-bit mono PCM only.
//!
//! Validates the RIFF/WAVE header and fmt chunk, skips unknown chunks,
//! and normalizes samples to [−1, 1) by dividing by 32768.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::AudioRecording;

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn read_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

/// Parse a 16-bit mono PCM WAV from raw bytes.
pub fn parse_wav(bytes: &[u8]) -> Result<AudioRecording> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::input("not a RIFF/WAVE file"));
    }
    let mut pos = 12usize;
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        if body_start + size > bytes.len() {
            return Err(Error::input("WAV chunk extends past end of file"));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::input("WAV fmt chunk too short"));
                }
                fmt = Some((
                    read_u16(bytes, body_start),
                    read_u16(bytes, body_start + 2),
                    read_u32(bytes, body_start + 4),
                    read_u16(bytes, body_start + 14),
                ));
            }
            b"data" => data = Some(&bytes[body_start..body_start + size]),
            _ => {}
        }
        // Chunks are word-aligned.
        pos = body_start + size + (size & 1);
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| Error::input("WAV file has no fmt chunk"))?;
    if format != 1 {
        return Err(Error::input(format!("unsupported WAV format tag {format}, need PCM (1)")));
    }
    if channels != 1 {
        return Err(Error::input(format!("unsupported WAV channel count {channels}, need mono")));
    }
    if bits != 16 {
        return Err(Error::input(format!("unsupported WAV bit depth {bits}, need 16")));
    }
    let data = data.ok_or_else(|| Error::input("WAV file has no data chunk"))?;
    if data.len() % 2 != 0 {
        return Err(Error::input("WAV data chunk has odd byte length"));
    }
    let samples: Vec<f64> = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
        .collect();
    AudioRecording::new(rate, samples)
}

pub fn read_wav(path: &Path) -> Result<AudioRecording> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    parse_wav(&bytes)
}

/// Encode a recording as 16-bit mono PCM WAV bytes (samples clipped to
/// [−1, 1]); used by tests and the simulator round-trip checks.
pub fn encode_wav(audio: &AudioRecording) -> Vec<u8> {
    let n = audio.samples().len();
    let data_len = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&audio.sample_rate().to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate() * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in audio.samples() {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}
