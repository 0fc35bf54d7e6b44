//! Instance file format: one JSON object per line.
//!
//! Top-level keys: `participant_id`, `started_at` (RFC 3339), `label`,
//! and the optional test payloads `voice`, `balance`, `gait`,
//! `dexterity`, `reaction`. Acceleration payloads are parallel arrays
//! `{"t": [...], "x": [...], "y": [...], "z": [...]}`; audio is either
//! inline `{"sample_rate": ..., "samples": [...]}` or a string holding a
//! path to a 16-bit mono PCM WAV file, resolved relative to the input
//! file. A missing `label` reads as `unlabeled`.
//!
//! Parsing never aborts the file: bad lines are reported with their line
//! number and reason and the rest proceed.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    AccelSeries, ActiveTestInstance, AudioRecording, Label, ReactionSession, ReactionTrial,
    TapButton, TapEvent, TapSession, TestKind, TimedSample,
};
use crate::wav;

#[derive(Debug, Serialize, Deserialize)]
struct WireInstance {
    participant_id: String,
    started_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    voice: Option<WireAudio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    balance: Option<WireAccel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gait: Option<WireAccel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dexterity: Option<WireTaps>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reaction: Option<WireReaction>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum WireAudio {
    Inline { sample_rate: u32, samples: Vec<f64> },
    WavPath(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct WireAccel {
    t: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireTaps {
    events: Vec<WireTapEvent>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireTapEvent {
    press: f64,
    release: f64,
    button: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireReaction {
    trials: Vec<WireTrial>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireTrial {
    stimulus: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    press: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    release: Option<f64>,
}

/// A line that failed validation, with the 1-based line number.
#[derive(Debug, Clone, Serialize)]
pub struct LineRejection {
    pub line: usize,
    pub reason: String,
}

fn accel_from_wire(w: &WireAccel, kind: TestKind) -> Result<AccelSeries> {
    let n = w.t.len();
    if w.x.len() != n || w.y.len() != n || w.z.len() != n {
        return Err(Error::input("acceleration arrays t/x/y/z have unequal lengths"));
    }
    let samples = (0..n)
        .map(|i| TimedSample { t: w.t[i], x: w.x[i], y: w.y[i], z: w.z[i] })
        .collect();
    AccelSeries::new(samples, kind)
}

fn accel_to_wire(s: &AccelSeries) -> WireAccel {
    WireAccel {
        t: s.samples().iter().map(|p| p.t).collect(),
        x: s.samples().iter().map(|p| p.x).collect(),
        y: s.samples().iter().map(|p| p.y).collect(),
        z: s.samples().iter().map(|p| p.z).collect(),
    }
}

fn audio_from_wire(w: &WireAudio, base_dir: Option<&Path>) -> Result<AudioRecording> {
    match w {
        WireAudio::Inline { sample_rate, samples } => {
            AudioRecording::new(*sample_rate, samples.clone())
        }
        WireAudio::WavPath(rel) => {
            let base = base_dir.ok_or_else(|| {
                Error::input("voice references a WAV path but no base directory is known")
            })?;
            wav::read_wav(&base.join(rel))
        }
    }
}

fn taps_from_wire(w: &WireTaps) -> Result<TapSession> {
    let events = w
        .events
        .iter()
        .map(|e| {
            let button = match e.button.as_str() {
                "L" => TapButton::Left,
                "R" => TapButton::Right,
                other => return Err(Error::input(format!("unknown tap button '{other}'"))),
            };
            Ok(TapEvent { press_t: e.press, release_t: e.release, button })
        })
        .collect::<Result<Vec<_>>>()?;
    TapSession::new(events)
}

fn reaction_from_wire(w: &WireReaction) -> Result<ReactionSession> {
    let trials = w
        .trials
        .iter()
        .map(|t| match (t.press, t.release) {
            (Some(p), Some(r)) => Ok(ReactionTrial::responded(t.stimulus, p, r)),
            (None, None) => Ok(ReactionTrial::unresponded(t.stimulus)),
            _ => Err(Error::input("reaction trial needs both press and release or neither")),
        })
        .collect::<Result<Vec<_>>>()?;
    ReactionSession::new(trials)
}

fn instance_from_wire(w: &WireInstance, base_dir: Option<&Path>) -> Result<ActiveTestInstance> {
    let started_at = chrono::DateTime::parse_from_rfc3339(&w.started_at)
        .map_err(|e| Error::input(format!("started_at is not RFC 3339: {e}")))?;
    let label = match &w.label {
        Some(s) => Label::parse(s)?,
        None => Label::Unlabeled,
    };
    let instance = ActiveTestInstance {
        participant_id: w.participant_id.clone(),
        started_at,
        voice: w.voice.as_ref().map(|a| audio_from_wire(a, base_dir)).transpose()?,
        balance: w.balance.as_ref().map(|a| accel_from_wire(a, TestKind::Balance)).transpose()?,
        gait: w.gait.as_ref().map(|a| accel_from_wire(a, TestKind::Gait)).transpose()?,
        dexterity: w.dexterity.as_ref().map(taps_from_wire).transpose()?,
        reaction: w.reaction.as_ref().map(reaction_from_wire).transpose()?,
        label,
    };
    instance.validate()?;
    Ok(instance)
}

fn instance_to_wire(inst: &ActiveTestInstance) -> WireInstance {
    WireInstance {
        participant_id: inst.participant_id.clone(),
        started_at: inst.started_at.to_rfc3339(),
        label: Some(inst.label.as_str().to_string()),
        voice: inst.voice.as_ref().map(|a| WireAudio::Inline {
            sample_rate: a.sample_rate(),
            samples: a.samples().to_vec(),
        }),
        balance: inst.balance.as_ref().map(accel_to_wire),
        gait: inst.gait.as_ref().map(accel_to_wire),
        dexterity: inst.dexterity.as_ref().map(|t| WireTaps {
            events: t
                .events()
                .iter()
                .map(|e| WireTapEvent {
                    press: e.press_t,
                    release: e.release_t,
                    button: match e.button {
                        TapButton::Left => "L".to_string(),
                        TapButton::Right => "R".to_string(),
                    },
                })
                .collect(),
        }),
        reaction: inst.reaction.as_ref().map(|r| WireReaction {
            trials: r
                .trials()
                .iter()
                .map(|t| WireTrial {
                    stimulus: t.stimulus_t,
                    press: t.response.map(|(p, _)| p),
                    release: t.response.map(|(_, r)| r),
                })
                .collect(),
        }),
    }
}

/// Parse one JSONL line into an instance.
pub fn parse_line(line: &str, base_dir: Option<&Path>) -> Result<ActiveTestInstance> {
    let wire: WireInstance = serde_json::from_str(line)
        .map_err(|e| Error::input(format!("invalid JSON: {e}")))?;
    instance_from_wire(&wire, base_dir)
}

/// Serialize an instance to one JSON line (audio always inline).
pub fn to_line(inst: &ActiveTestInstance) -> String {
    serde_json::to_string(&instance_to_wire(inst)).expect("instance serialization cannot fail")
}

/// Read a JSONL reader, collecting valid instances and per-line
/// rejections. Blank lines are skipped.
pub fn read_instances<R: std::io::Read>(
    reader: R,
    base_dir: Option<&Path>,
) -> Result<(Vec<ActiveTestInstance>, Vec<LineRejection>)> {
    let mut instances = Vec::new();
    let mut rejections = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line, base_dir) {
            Ok(inst) => instances.push(inst),
            Err(e) => rejections.push(LineRejection { line: idx + 1, reason: e.to_string() }),
        }
    }
    Ok((instances, rejections))
}

/// Read instances from a JSONL file; WAV paths resolve relative to its
/// directory.
pub fn read_instances_file(path: &Path) -> Result<(Vec<ActiveTestInstance>, Vec<LineRejection>)> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::input(format!("cannot open {}: {e}", path.display())))?;
    read_instances(file, path.parent())
}

/// Write instances as JSONL.
pub fn write_instances_file(path: &Path, instances: &[ActiveTestInstance]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for inst in instances {
        writeln!(out, "{}", to_line(inst))?;
    }
    Ok(())
}
