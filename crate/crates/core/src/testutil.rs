//! Hand-built fixtures shared by unit tests.

use chrono::{Duration, TimeZone, Utc};
use rand::Rng;

use crate::rng::stream_rng;
use crate::types::{
    AccelSeries, ActiveTestInstance, AudioRecording, Label, ReactionSession, ReactionTrial,
    TapButton, TapEvent, TapSession, TestKind, TimedSample,
};

/// A complete five-test instance with mild randomness; always valid and
/// long enough for every extractor.
pub fn complete_instance(seed: u64, label: Label) -> ActiveTestInstance {
    let mut rng = stream_rng(seed, 99, 0);

    let accel = |rng: &mut rand_chacha::ChaCha8Rng, kind: TestKind, freq: f64| {
        let mut t = 0.0;
        let samples: Vec<TimedSample> = (0..200)
            .map(|_| {
                t += 0.02 * (1.0 + rng.gen_range(-0.1..0.1));
                TimedSample {
                    t,
                    x: 0.3 + 0.2 * (std::f64::consts::TAU * freq * t).sin()
                        + rng.gen_range(-0.05..0.05),
                    y: -9.8 + 0.8 * (std::f64::consts::TAU * freq * t).cos()
                        + rng.gen_range(-0.05..0.05),
                    z: 1.0 + rng.gen_range(-0.05..0.05),
                }
            })
            .collect();
        AccelSeries::new(samples, kind).unwrap()
    };

    let voice = {
        let rate = 4000u32;
        let samples: Vec<f64> = (0..rate as usize * 4)
            .map(|i| {
                let t = i as f64 / rate as f64;
                0.3 * (std::f64::consts::TAU * 210.0 * t).sin() + rng.gen_range(-0.01..0.01)
            })
            .collect();
        AudioRecording::new(rate, samples).unwrap()
    };

    let taps = {
        let mut t = 0.5;
        let events: Vec<TapEvent> = (0..30)
            .map(|k| {
                let stay = 0.1 + rng.gen_range(-0.03..0.03);
                let mv = 0.35 + rng.gen_range(-0.05..0.05);
                let e = TapEvent {
                    press_t: t,
                    release_t: t + stay,
                    button: if k % 2 == 0 { TapButton::Left } else { TapButton::Right },
                };
                t += stay + mv;
                e
            })
            .collect();
        TapSession::new(events).unwrap()
    };

    let reaction = {
        let mut t = 1.0;
        let trials: Vec<ReactionTrial> = (0..8)
            .map(|_| {
                let stimulus = t;
                t += 2.0;
                let lag = 0.25 + rng.gen_range(0.0..0.2);
                ReactionTrial::responded(stimulus, stimulus + lag, stimulus + lag + 0.3)
            })
            .collect();
        ReactionSession::new(trials).unwrap()
    };

    ActiveTestInstance {
        participant_id: format!("t{seed:03}"),
        started_at: (Utc.with_ymd_and_hms(2026, 2, 2, 8, 0, 0).unwrap()
            + Duration::minutes(seed as i64))
        .fixed_offset(),
        voice: Some(voice),
        balance: Some(accel(&mut rng, TestKind::Balance, 0.4)),
        gait: Some(accel(&mut rng, TestKind::Gait, 2.0)),
        dexterity: Some(taps),
        reaction: Some(reaction),
        label,
    }
}
