//! Synthetic cohort generation.
//!
//! Stands in for unavailable study data: emits paired baseline/treatment
//! instances whose medication effects point the way the study reported —
//! tapping dispersion shrinks, voice pitch rises, vertical gait
//! oscillation grows — with magnitudes left as knobs. Effect strength
//! per participant is a deterministic function of daily LED through the
//! configured response curve (default: unimodal bump peaking mid-dose,
//! near zero below 200 mg).
//!
//! All draws flow from seeded per-participant streams; generation is
//! parallel across participants and independent of thread count. Values
//! are quantized (timestamps to 1 µs, signals to ~1e-6) so emitted files
//! are compact and byte-stable.

use chrono::{DateTime, Duration, FixedOffset, TimeZone, Utc};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::led::{daily_led, LedRecord, LedTable, RegimenEntry};
use crate::rng::{domain, mix, stream_rng};
use crate::types::{
    AccelSeries, ActiveTestInstance, AudioRecording, Label, ReactionSession, ReactionTrial,
    TapButton, TapEvent, TapSession, TestKind, TimedSample,
};

/// Medication-effect knobs. Fractions are relative changes applied under
/// treatment after scaling by the participant's LED response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectProfile {
    /// Fractional reduction of STAY-interval dispersion.
    pub tap_rhythm_stabilization: f64,
    /// Fractional increase of voice pitch.
    pub f0_shift: f64,
    /// Fractional increase of vertical gait oscillation amplitude.
    pub gait_y_gain: f64,
    /// Scale on within-person noise; 1.0 is nominal.
    pub noise_level: f64,
}

impl EffectProfile {
    /// The default construction: tap dispersion −30%, pitch +10%,
    /// gait-y amplitude +20%.
    pub fn default_effect() -> Self {
        EffectProfile {
            tap_rhythm_stabilization: 0.30,
            f0_shift: 0.10,
            gait_y_gain: 0.20,
            noise_level: 1.0,
        }
    }

    /// No medication effect at all; baseline and treatment are draws
    /// from identical distributions.
    pub fn null_effect() -> Self {
        EffectProfile {
            tap_rhythm_stabilization: 0.0,
            f0_shift: 0.0,
            gait_y_gain: 0.0,
            noise_level: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fractions = [self.tap_rhythm_stabilization, self.f0_shift, self.gait_y_gain];
        if fractions.iter().any(|f| !f.is_finite()) || !self.noise_level.is_finite() {
            return Err(Error::contract("effect profile: non-finite field"));
        }
        if !(0.0..=1.0).contains(&self.tap_rhythm_stabilization) {
            return Err(Error::contract("tap_rhythm_stabilization must lie in [0, 1]"));
        }
        if self.noise_level <= 0.0 {
            return Err(Error::contract("noise_level must be positive"));
        }
        Ok(())
    }

    /// Scale the effect knobs by a response in [0, 1]; noise unchanged.
    pub fn scaled(&self, response: f64) -> EffectProfile {
        EffectProfile {
            tap_rhythm_stabilization: self.tap_rhythm_stabilization * response,
            f0_shift: self.f0_shift * response,
            gait_y_gain: self.gait_y_gain * response,
            noise_level: self.noise_level,
        }
    }
}

/// Effect magnitude as a function of daily LED.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseCurve {
    /// Zero response everywhere.
    Null,
    /// Constant response regardless of dose.
    Constant { value: f64 },
    /// Gaussian bump exp(−((led − center)/width)²).
    MidPeak { center_mg: f64, width_mg: f64 },
}

impl ResponseCurve {
    pub fn default_mid_peak() -> Self {
        ResponseCurve::MidPeak { center_mg: 1250.0, width_mg: 600.0 }
    }

    pub fn response(&self, led_mg: f64) -> f64 {
        match self {
            ResponseCurve::Null => 0.0,
            ResponseCurve::Constant { value } => value.clamp(0.0, 1.0),
            ResponseCurve::MidPeak { center_mg, width_mg } => {
                let z = (led_mg - center_mg) / width_mg;
                (-z * z).exp()
            }
        }
    }
}

/// Per-participant generative parameters after LED scaling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticipantModel {
    pub participant_id: String,
    pub daily_led: f64,
    pub response: f64,
    pub base_tap_stay_mean: f64,
    pub base_tap_stay_disp: f64,
    pub base_tap_move_mean: f64,
    pub base_tap_move_disp: f64,
    pub base_f0: f64,
    pub voice_amp: f64,
    pub gait_amp: [f64; 3],
    pub gait_freq: f64,
    pub balance_amp: [f64; 3],
    pub balance_freq: f64,
    pub reaction_scale: f64,
    /// Effect knobs already scaled by the LED response.
    pub effect: EffectProfile,
}

// Fixed generative constants; plumbing, not findings.
const ACCEL_RATE_HZ: f64 = 50.0;
const ACCEL_JITTER: f64 = 0.2;
const BALANCE_SECONDS: f64 = 10.0;
const GAIT_SECONDS: f64 = 10.0;
const GRAVITY_OFFSET: [f64; 3] = [0.4, -9.8, 1.1];
const ACCEL_NOISE: [f64; 3] = [0.5, 0.8, 0.5];
const VOICE_RATE_HZ: u32 = 2000;
const VOICE_SECONDS: f64 = 5.0;
const VOICE_SILENCE_FRAMES: usize = 5;
const VOICE_NOISE: f64 = 0.005;
/// Within-person voice variability: relative pitch jitter per instance,
/// vibrato depth, and maximum relative drift across the phonation.
const VOICE_F0_JITTER: f64 = 0.01;
const VOICE_VIBRATO: f64 = 0.005;
const VOICE_F0_DRIFT: f64 = 0.01;
const TAP_EVENTS: usize = 80;
const REACTION_TRIALS: usize = 12;
const REACTION_MISS_P: f64 = 0.05;
/// Reaction improvement rides on the same hand-motor response that
/// stabilizes tapping, so a null profile leaves reactions untouched.
const REACTION_COUPLING: f64 = 0.4;

const T_DECIMALS: usize = 6;
const V_DECIMALS: usize = 6;
const AUDIO_DECIMALS: usize = 5;

/// Round to a fixed number of decimals via the decimal string, so the
/// value serializes as exactly that many digits (no binary dust).
fn q(x: f64, decimals: usize) -> f64 {
    format!("{x:.decimals$}").parse().expect("fixed-point formatting is parseable")
}

/// Standard normal via Box-Muller (two uniform draws per call).
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn jittered_timestamps(rng: &mut ChaCha8Rng, rate_hz: f64, seconds: f64) -> Vec<f64> {
    let dt = 1.0 / rate_hz;
    let mut t = 0.0;
    let mut out = Vec::with_capacity((seconds * rate_hz) as usize + 1);
    while t < seconds {
        out.push(q(t, T_DECIMALS));
        t += dt * (1.0 + rng.gen_range(-ACCEL_JITTER..ACCEL_JITTER));
    }
    out
}

fn accel_test(
    rng: &mut ChaCha8Rng,
    kind: TestKind,
    amp: [f64; 3],
    freq: f64,
    noise_level: f64,
    seconds: f64,
) -> AccelSeries {
    let t = jittered_timestamps(rng, ACCEL_RATE_HZ, seconds);
    let phases: [f64; 3] = [
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..std::f64::consts::TAU),
    ];
    let samples: Vec<TimedSample> = t
        .iter()
        .map(|&ti| {
            let mut v = [0.0f64; 3];
            for a in 0..3 {
                let osc = amp[a] * (std::f64::consts::TAU * freq * ti + phases[a]).sin();
                let noise = ACCEL_NOISE[a] * noise_level * normal(rng);
                v[a] = q(GRAVITY_OFFSET[a] + osc + noise, V_DECIMALS);
            }
            TimedSample { t: ti, x: v[0], y: v[1], z: v[2] }
        })
        .collect();
    AccelSeries::new(samples, kind).expect("generated series is valid")
}

fn voice_test(rng: &mut ChaCha8Rng, f0: f64, amp: f64, noise_level: f64) -> AudioRecording {
    let n = (VOICE_RATE_HZ as f64 * VOICE_SECONDS) as usize;
    let frame_len = n / crate::voice::DEFAULT_FRAME_COUNT;
    let lead = VOICE_SILENCE_FRAMES * frame_len;
    let tail = n - lead;
    let phase0 = rng.gen_range(0.0..std::f64::consts::TAU);
    // Within-instance pitch texture: day-to-day jitter, slow vibrato,
    // and a slight drift across the phonation.
    let f0_instance = f0 * (1.0 + VOICE_F0_JITTER * normal(rng));
    let vibrato_phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let drift = rng.gen_range(-VOICE_F0_DRIFT..VOICE_F0_DRIFT);
    let mut phase = phase0;
    let dt = 1.0 / VOICE_RATE_HZ as f64;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / VOICE_RATE_HZ as f64;
            let tone = if i >= lead && i < tail {
                let am = 1.0 + 0.05 * (std::f64::consts::TAU * 0.3 * t).sin();
                let fm = 1.0
                    + VOICE_VIBRATO * (std::f64::consts::TAU * 0.35 * t + vibrato_phase).sin()
                    + drift * (t / VOICE_SECONDS);
                phase += std::f64::consts::TAU * f0_instance * fm * dt;
                amp * am * phase.sin()
            } else {
                0.0
            };
            q(tone + VOICE_NOISE * noise_level * normal(rng), AUDIO_DECIMALS)
        })
        .collect();
    AudioRecording::new(VOICE_RATE_HZ, samples).expect("generated audio is valid")
}

fn tap_test(rng: &mut ChaCha8Rng, model: &ParticipantModel, treatment: bool) -> TapSession {
    let disp = if treatment {
        model.base_tap_stay_disp * (1.0 - model.effect.tap_rhythm_stabilization)
    } else {
        model.base_tap_stay_disp
    };
    let mut t = rng.gen_range(0.3..0.8);
    let mut events = Vec::with_capacity(TAP_EVENTS);
    for k in 0..TAP_EVENTS {
        let stay = (model.base_tap_stay_mean + disp * normal(rng)).max(0.02);
        let mv = (model.base_tap_move_mean + model.base_tap_move_disp * normal(rng)).max(0.02);
        let press = q(t, T_DECIMALS);
        let release = q(t + stay, T_DECIMALS);
        events.push(TapEvent {
            press_t: press,
            release_t: release,
            button: if k % 2 == 0 { TapButton::Left } else { TapButton::Right },
        });
        t += stay + mv;
    }
    TapSession::new(events).expect("generated taps are valid")
}

fn reaction_test(rng: &mut ChaCha8Rng, model: &ParticipantModel, treatment: bool) -> ReactionSession {
    let scale = if treatment {
        1.0 - REACTION_COUPLING * model.effect.tap_rhythm_stabilization
    } else {
        1.0
    };
    let mut t = rng.gen_range(0.5..1.0);
    let trials = (0..REACTION_TRIALS)
        .map(|k| {
            let stimulus = q(t, T_DECIMALS);
            t += 1.5 + rng.gen_range(0.0..1.0);
            // Consume the lag draws before deciding responsiveness so the
            // stream stays aligned across miss patterns.
            let lognormal = (model.reaction_scale * normal(rng)).exp();
            let lag = 0.15 + 0.15 * lognormal * scale;
            let hold = 0.2 + rng.gen_range(0.0..0.3);
            let miss = rng.gen_range(0.0..1.0) < REACTION_MISS_P && k >= 2;
            if miss {
                ReactionTrial::unresponded(stimulus)
            } else {
                ReactionTrial::responded(stimulus, q(stimulus + lag, T_DECIMALS), q(stimulus + lag + hold, T_DECIMALS))
            }
        })
        .collect();
    ReactionSession::new(trials).expect("generated reaction session is valid")
}

/// Generate one full five-test instance for a participant under the
/// given condition.
pub fn generate_instance(
    model: &ParticipantModel,
    condition: Label,
    started_at: DateTime<FixedOffset>,
    seed: u64,
) -> ActiveTestInstance {
    let treatment = condition == Label::Treatment;
    let mut rng = stream_rng(seed, domain::INSTANCE, 0);

    let f0 = if treatment { model.base_f0 * (1.0 + model.effect.f0_shift) } else { model.base_f0 };
    let mut gait_amp = model.gait_amp;
    if treatment {
        gait_amp[1] *= 1.0 + model.effect.gait_y_gain;
    }
    let noise = model.effect.noise_level;

    ActiveTestInstance {
        participant_id: model.participant_id.clone(),
        started_at,
        voice: Some(voice_test(&mut rng, f0, model.voice_amp, noise)),
        balance: Some(accel_test(
            &mut rng,
            TestKind::Balance,
            model.balance_amp,
            model.balance_freq,
            noise,
            BALANCE_SECONDS,
        )),
        gait: Some(accel_test(&mut rng, TestKind::Gait, gait_amp, model.gait_freq, noise, GAIT_SECONDS)),
        dexterity: Some(tap_test(&mut rng, model, treatment)),
        reaction: Some(reaction_test(&mut rng, model, treatment)),
        label: condition,
    }
}

/// A generated cohort plus everything needed to reconstruct it.
#[derive(Debug, Clone)]
pub struct Cohort {
    pub instances: Vec<ActiveTestInstance>,
    pub led_records: Vec<LedRecord>,
    pub manifest: CohortManifest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortManifest {
    pub schema_version: u32,
    pub seed: u64,
    pub n_participants: usize,
    pub instances_per_participant: usize,
    pub led_range_mg: (f64, f64),
    pub profile: EffectProfile,
    pub response_curve: ResponseCurve,
    pub participants: Vec<ParticipantModel>,
}

fn draw_model(
    rng: &mut ChaCha8Rng,
    participant_id: String,
    led_range: (f64, f64),
    profile: &EffectProfile,
    curve: &ResponseCurve,
    table: &LedTable,
) -> (ParticipantModel, LedRecord) {
    let led_target = rng.gen_range(led_range.0..led_range.1);
    // Realize the target as a concrete regimen; the recorded LED is the
    // table-computed value so the record is consistent by construction.
    let levodopa_fraction = rng.gen_range(0.6..1.0);
    let levodopa_daily = led_target * levodopa_fraction;
    let mut regimen = vec![RegimenEntry {
        drug: "levodopa".to_string(),
        dose_mg: q(levodopa_daily / 3.0, 1),
        times_per_day: 3.0,
    }];
    let agonist_led = led_target - levodopa_daily;
    if agonist_led > 20.0 {
        // Pramipexole factor is 100.
        regimen.push(RegimenEntry {
            drug: "pramipexole".to_string(),
            dose_mg: q(agonist_led / 100.0 / 2.0, 3),
            times_per_day: 2.0,
        });
    }
    let led = daily_led(&regimen, table).expect("constructed regimen uses known drugs");
    let response = curve.response(led);

    let model = ParticipantModel {
        participant_id: participant_id.clone(),
        daily_led: led,
        response,
        base_tap_stay_mean: rng.gen_range(0.09..0.12),
        base_tap_stay_disp: rng.gen_range(0.050..0.060),
        base_tap_move_mean: rng.gen_range(0.35..0.45),
        base_tap_move_disp: rng.gen_range(0.05..0.07),
        base_f0: rng.gen_range(195.0..205.0),
        voice_amp: rng.gen_range(0.20..0.35),
        gait_amp: [rng.gen_range(0.50..0.60), rng.gen_range(1.00..1.20), rng.gen_range(0.60..0.70)],
        gait_freq: rng.gen_range(1.7..2.3),
        balance_amp: [rng.gen_range(0.05..0.15), rng.gen_range(0.05..0.15), rng.gen_range(0.05..0.15)],
        balance_freq: rng.gen_range(0.3..0.6),
        reaction_scale: rng.gen_range(0.3..0.5),
        effect: profile.scaled(response),
    };
    let record = LedRecord { participant_id, regimen, daily_led: led };
    (model, record)
}

/// Generate a cohort of participants with paired instances: per day, a
/// baseline in the morning and a treatment roughly an hour later.
pub fn generate_cohort(
    n_participants: usize,
    instances_per_participant: usize,
    led_range: (f64, f64),
    profile: &EffectProfile,
    curve: &ResponseCurve,
    seed: u64,
) -> Result<Cohort> {
    if n_participants < 2 {
        return Err(Error::contract("generate_cohort: need at least 2 participants"));
    }
    if instances_per_participant == 0 {
        return Err(Error::contract("generate_cohort: need at least 1 instance per participant"));
    }
    if !(led_range.0 >= 0.0 && led_range.0 < led_range.1) {
        return Err(Error::contract("generate_cohort: invalid LED range"));
    }
    profile.validate()?;

    let table = LedTable::default_table();
    let start_day = Utc.with_ymd_and_hms(2026, 1, 5, 0, 0, 0).unwrap().fixed_offset();

    let per_participant: Vec<(ParticipantModel, LedRecord, Vec<ActiveTestInstance>)> = (0
        ..n_participants)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream_rng(seed, domain::PARTICIPANT, p as u64);
            let pid = format!("synth{p:04}");
            let (model, record) = draw_model(&mut rng, pid, led_range, profile, curve, &table);

            let mut instances = Vec::with_capacity(instances_per_participant);
            let days = instances_per_participant.div_ceil(2);
            for d in 0..days {
                let morning_min = rng.gen_range(0.0..60.0);
                let gap_min = 60.0 + rng.gen_range(-10.0..10.0);
                let base_at = start_day
                    + Duration::days(d as i64)
                    + Duration::seconds((8.0 * 3600.0 + morning_min * 60.0) as i64);
                let seed_b = mix(seed, (p as u64) << 20 | d as u64, 0);
                instances.push(generate_instance(&model, Label::Baseline, base_at, seed_b));
                if instances.len() < instances_per_participant {
                    let treat_at = base_at + Duration::seconds((gap_min * 60.0) as i64);
                    let seed_t = mix(seed, (p as u64) << 20 | d as u64, 1);
                    instances.push(generate_instance(&model, Label::Treatment, treat_at, seed_t));
                }
            }
            (model, record, instances)
        })
        .collect();

    let mut instances = Vec::new();
    let mut led_records = Vec::new();
    let mut participants = Vec::new();
    for (model, record, insts) in per_participant {
        participants.push(model);
        led_records.push(record);
        instances.extend(insts);
    }

    Ok(Cohort {
        instances,
        led_records,
        manifest: CohortManifest {
            schema_version: 1,
            seed,
            n_participants,
            instances_per_participant,
            led_range_mg: led_range,
            profile: *profile,
            response_curve: *curve,
            participants,
        },
    })
}
