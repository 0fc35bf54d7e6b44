//! Domain types for active-test recordings.
//!
//! All constructors validate their invariants; once built, values are
//! immutable and safe to share across threads. Timestamps inside a test
//! are seconds since test start; session timestamps are RFC 3339.

use chrono::{DateTime, FixedOffset};

use crate::error::{Error, Result};

/// One tri-axial accelerometer sample at an irregular timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedSample {
    /// Seconds since test start.
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    Balance,
    Gait,
}

impl TestKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestKind::Balance => "balance",
            TestKind::Gait => "gait",
        }
    }
}

/// An irregularly sampled tri-axial acceleration recording.
///
/// Construction requires at least two samples with strictly increasing,
/// non-negative timestamps and finite components. Feature extraction has
/// a stricter 16-sample minimum, enforced at extraction time.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelSeries {
    samples: Vec<TimedSample>,
    test_kind: TestKind,
}

impl AccelSeries {
    pub fn new(samples: Vec<TimedSample>, test_kind: TestKind) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::input("acceleration series needs at least 2 samples"));
        }
        if samples[0].t < 0.0 {
            return Err(Error::input("acceleration timestamps must be non-negative"));
        }
        for (i, s) in samples.iter().enumerate() {
            if ![s.t, s.x, s.y, s.z].iter().all(|v| v.is_finite()) {
                return Err(Error::input(format!("non-finite acceleration sample at index {i}")));
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(Error::input(format!(
                    "acceleration timestamps not strictly increasing at index {i}"
                )));
            }
        }
        Ok(AccelSeries { samples, test_kind })
    }

    pub fn samples(&self) -> &[TimedSample] {
        &self.samples
    }

    pub fn test_kind(&self) -> TestKind {
        self.test_kind
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Seconds between first and last sample.
    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].t - self.samples[0].t
    }

    /// Mean sampling rate in Hz.
    pub fn mean_rate(&self) -> f64 {
        (self.samples.len() - 1) as f64 / self.duration()
    }

    pub fn timestamps(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn axis(&self, axis: RawAxis) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| match axis {
                RawAxis::X => s.x,
                RawAxis::Y => s.y,
                RawAxis::Z => s.z,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawAxis {
    X,
    Y,
    Z,
}

/// One sample of the spherical view of a tri-axial series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalSample {
    pub t: f64,
    /// Radial distance, m/s².
    pub r: f64,
    /// Polar angle in [0, π]; 0 when r = 0.
    pub theta: f64,
    /// Azimuth angle in (−π, π]; 0 when x = y = 0.
    pub phi: f64,
}

/// Spherical transformation of an acceleration series; same length and
/// timestamps as its source.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSeries {
    samples: Vec<SphericalSample>,
}

impl SphericalSeries {
    pub fn samples(&self) -> &[SphericalSample] {
        &self.samples
    }

    pub fn axis(&self, axis: SphericalAxis) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| match axis {
                SphericalAxis::R => s.r,
                SphericalAxis::Theta => s.theta,
                SphericalAxis::Phi => s.phi,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphericalAxis {
    R,
    Theta,
    Phi,
}

/// Spherical transformation: r = |(x,y,z)|, theta = arccos(z/r),
/// phi = atan2(y, x), with theta = 0 when r = 0 and phi = 0 when
/// x = y = 0. Timestamps carry over unchanged.
pub fn to_spherical(series: &AccelSeries) -> SphericalSeries {
    let samples = series
        .samples()
        .iter()
        .map(|s| {
            let r = (s.x * s.x + s.y * s.y + s.z * s.z).sqrt();
            let theta = if r == 0.0 { 0.0 } else { (s.z / r).clamp(-1.0, 1.0).acos() };
            let phi = if s.x == 0.0 && s.y == 0.0 { 0.0 } else { s.y.atan2(s.x) };
            SphericalSample { t: s.t, r, theta, phi }
        })
        .collect();
    SphericalSeries { samples }
}

/// A voice recording: mono samples at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioRecording {
    sample_rate: u32,
    samples: Vec<f64>,
}

impl AudioRecording {
    pub fn new(sample_rate: u32, samples: Vec<f64>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::input("audio sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::input("audio recording has no samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite audio sample"));
        }
        Ok(AudioRecording { sample_rate, samples })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TapButton {
    Left,
    Right,
}

/// One press/release event in the dexterity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapEvent {
    pub press_t: f64,
    pub release_t: f64,
    pub button: TapButton,
}

/// A dexterity-test session: ordered, non-overlapping tap events.
#[derive(Debug, Clone, PartialEq)]
pub struct TapSession {
    events: Vec<TapEvent>,
}

impl TapSession {
    pub fn new(events: Vec<TapEvent>) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if !e.press_t.is_finite() || !e.release_t.is_finite() {
                return Err(Error::input(format!("non-finite tap event at index {i}")));
            }
            if e.press_t >= e.release_t {
                return Err(Error::input(format!(
                    "tap event {i}: press must precede release"
                )));
            }
            if i > 0 && e.press_t < events[i - 1].release_t {
                return Err(Error::input(format!("tap events overlap at index {i}")));
            }
        }
        Ok(TapSession { events })
    }

    pub fn events(&self) -> &[TapEvent] {
        &self.events
    }
}

/// One reaction trial. Unresponded trials carry no press/release.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionTrial {
    pub stimulus_t: f64,
    pub response: Option<(f64, f64)>,
}

impl ReactionTrial {
    pub fn responded(stimulus_t: f64, press_t: f64, release_t: f64) -> Self {
        ReactionTrial { stimulus_t, response: Some((press_t, release_t)) }
    }

    pub fn unresponded(stimulus_t: f64) -> Self {
        ReactionTrial { stimulus_t, response: None }
    }
}

/// A reaction-test session.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSession {
    trials: Vec<ReactionTrial>,
}

impl ReactionSession {
    pub fn new(trials: Vec<ReactionTrial>) -> Result<Self> {
        for (i, tr) in trials.iter().enumerate() {
            if !tr.stimulus_t.is_finite() {
                return Err(Error::input(format!("non-finite stimulus time at trial {i}")));
            }
            if let Some((press, release)) = tr.response {
                if !press.is_finite() || !release.is_finite() {
                    return Err(Error::input(format!("non-finite response time at trial {i}")));
                }
                if press < tr.stimulus_t {
                    return Err(Error::input(format!(
                        "trial {i}: press precedes stimulus"
                    )));
                }
                if press >= release {
                    return Err(Error::input(format!(
                        "trial {i}: press must precede release"
                    )));
                }
            }
        }
        Ok(ReactionSession { trials })
    }

    pub fn trials(&self) -> &[ReactionTrial] {
        &self.trials
    }

    pub fn responded_count(&self) -> usize {
        self.trials.iter().filter(|t| t.response.is_some()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Baseline,
    Treatment,
    Unlabeled,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Baseline => "baseline",
            Label::Treatment => "treatment",
            Label::Unlabeled => "unlabeled",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Label::Baseline),
            "treatment" => Ok(Label::Treatment),
            "unlabeled" => Ok(Label::Unlabeled),
            other => Err(Error::input(format!("unknown label '{other}'"))),
        }
    }
}

/// One session of active tests: up to five recordings plus identity,
/// start time, and label. At least one test must be present.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveTestInstance {
    pub participant_id: String,
    pub started_at: DateTime<FixedOffset>,
    pub voice: Option<AudioRecording>,
    pub balance: Option<AccelSeries>,
    pub gait: Option<AccelSeries>,
    pub dexterity: Option<TapSession>,
    pub reaction: Option<ReactionSession>,
    pub label: Label,
}

impl ActiveTestInstance {
    pub fn validate(&self) -> Result<()> {
        if self.participant_id.is_empty() {
            return Err(Error::input("participant_id must not be empty"));
        }
        if self.voice.is_none()
            && self.balance.is_none()
            && self.gait.is_none()
            && self.dexterity.is_none()
            && self.reaction.is_none()
        {
            return Err(Error::input("instance has none of the five tests"));
        }
        if let Some(b) = &self.balance {
            if b.test_kind() != TestKind::Balance {
                return Err(Error::internal("balance payload tagged with wrong test kind"));
            }
        }
        if let Some(g) = &self.gait {
            if g.test_kind() != TestKind::Gait {
                return Err(Error::internal("gait payload tagged with wrong test kind"));
            }
        }
        Ok(())
    }

    pub fn has_all_tests(&self) -> bool {
        self.voice.is_some()
            && self.balance.is_some()
            && self.gait.is_some()
            && self.dexterity.is_some()
            && self.reaction.is_some()
    }
}
