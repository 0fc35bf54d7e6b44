//! Voice test processing: framing, voiced-frame tagging, and the
//! amplitude/pitch track summaries.
//!
//! The recording is split into 40 equal frames (trailing remainder
//! dropped). A frame is voiced when its RMS amplitude exceeds the first
//! quartile of all frame amplitudes; if the strict comparison marks
//! nothing (a perfectly steady recording), the comparison relaxes to ≥.
//! Analysis runs over the longest consecutive voiced run (earliest wins
//! ties). Per-frame pitch is the dominant periodogram frequency within
//! the 50–500 Hz phonation band, from a mean-subtracted, zero-padded
//! transform.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dfa;
use crate::error::{Error, Result};
use crate::fit::{linear_fit, polyfit};
use crate::registry::voice_ids;
use crate::stats::quantile;
use crate::types::AudioRecording;

/// Frame count fixed by the test protocol's 20 s / 0.5 s framing.
pub const DEFAULT_FRAME_COUNT: usize = 40;

pub const F0_BAND_LOW_HZ: f64 = 50.0;
pub const F0_BAND_HIGH_HZ: f64 = 500.0;

/// Equal-length frames over a recording, with per-frame RMS amplitude.
#[derive(Debug)]
pub struct FramedAudio<'a> {
    audio: &'a AudioRecording,
    frame_len: usize,
    rms: Vec<f64>,
}

impl<'a> FramedAudio<'a> {
    pub fn frame_count(&self) -> usize {
        self.rms.len()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn frame_duration(&self) -> f64 {
        self.frame_len as f64 / self.audio.sample_rate() as f64
    }

    pub fn rms(&self) -> &[f64] {
        &self.rms
    }

    pub fn frame_samples(&self, idx: usize) -> &[f64] {
        &self.audio.samples()[idx * self.frame_len..(idx + 1) * self.frame_len]
    }

    fn run_samples(&self, start: usize, len: usize) -> &[f64] {
        &self.audio.samples()[start * self.frame_len..(start + len) * self.frame_len]
    }
}

/// Split audio into `n_frames` contiguous equal frames.
pub fn frame_audio(audio: &AudioRecording, n_frames: usize) -> Result<FramedAudio<'_>> {
    if n_frames == 0 {
        return Err(Error::contract("frame_audio: n_frames must be positive"));
    }
    let frame_len = audio.samples().len() / n_frames;
    if frame_len == 0 {
        return Err(Error::contract(format!(
            "frame_audio: {} samples cannot fill {n_frames} frames",
            audio.samples().len()
        )));
    }
    let rms = (0..n_frames)
        .map(|i| {
            let seg = &audio.samples()[i * frame_len..(i + 1) * frame_len];
            (seg.iter().map(|&s| s * s).sum::<f64>() / frame_len as f64).sqrt()
        })
        .collect();
    Ok(FramedAudio { audio, frame_len, rms })
}

/// Voiced-frame analysis: per-frame (amplitude, pitch) and the longest
/// consecutive voiced run. Pitch is 0 for unvoiced frames.
#[derive(Debug, Clone)]
pub struct VoicedTrack {
    pub frame_duration: f64,
    pub frames: Vec<(f64, f64)>,
    pub voiced: Vec<bool>,
    /// (start_index, length) of the longest voiced run; length 0 when no
    /// frame is voiced.
    pub voiced_run: (usize, usize),
}

/// Dominant periodogram frequency of `samples` within [lo, hi] Hz.
/// Mean-subtracted, zero-padded to ≥ 4× length. Returns 0 when the band
/// is empty or carries no power.
pub fn dominant_frequency(samples: &[f64], sample_rate: u32, lo_hz: f64, hi_hz: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let nfft = (4 * samples.len()).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .map(|&s| Complex::new(s - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(nfft)
        .collect();
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);

    let bin_hz = sample_rate as f64 / nfft as f64;
    let k_lo = (lo_hz / bin_hz).ceil() as usize;
    let k_hi = ((hi_hz / bin_hz).floor() as usize).min(nfft / 2);
    if k_lo > k_hi {
        return 0.0;
    }
    let mut best_k = k_lo;
    let mut best_p = 0.0;
    for (k, c) in buf.iter().enumerate().take(k_hi + 1).skip(k_lo) {
        let p = c.norm_sqr();
        if p > best_p {
            best_p = p;
            best_k = k;
        }
    }
    if best_p == 0.0 {
        0.0
    } else {
        best_k as f64 * bin_hz
    }
}

/// Tag frames as voiced and locate the longest voiced run.
pub fn tag_voiced(framed: &FramedAudio<'_>) -> Result<VoicedTrack> {
    if framed.frame_count() < 4 {
        return Err(Error::contract("tag_voiced: need at least 4 frames"));
    }
    let q1 = quantile(framed.rms(), 0.25)?;
    let mut voiced: Vec<bool> = framed.rms().iter().map(|&a| a > q1).collect();
    if voiced.iter().all(|&v| !v) {
        voiced = framed.rms().iter().map(|&a| a >= q1).collect();
    }

    let mut best: (usize, usize) = (0, 0);
    let mut run_start = 0usize;
    let mut run_len = 0usize;
    for (i, &v) in voiced.iter().enumerate() {
        if v {
            if run_len == 0 {
                run_start = i;
            }
            run_len += 1;
            if run_len > best.1 {
                best = (run_start, run_len);
            }
        } else {
            run_len = 0;
        }
    }

    let rate = framed.audio.sample_rate();
    let frames = framed
        .rms()
        .iter()
        .enumerate()
        .map(|(i, &amp)| {
            let f0 = if voiced[i] {
                dominant_frequency(framed.frame_samples(i), rate, F0_BAND_LOW_HZ, F0_BAND_HIGH_HZ)
            } else {
                0.0
            };
            (amp, f0)
        })
        .collect();

    Ok(VoicedTrack {
        frame_duration: framed.frame_duration(),
        frames,
        voiced,
        voiced_run: best,
    })
}

/// Extracted voice features in `voice_ids()` order, plus quality flags.
#[derive(Debug, Clone)]
pub struct VoiceFeatures {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
    pub flags: Vec<String>,
}

/// mean, std, DFA, linear fit (2), quadratic fit (3) of a track over
/// frame index normalized to [0, 1]. Short tracks degrade to sentinel
/// values and report a flag.
fn track_stats(track: &[f64], name: &str, flags: &mut Vec<String>) -> [f64; 8] {
    let n = track.len();
    if n == 0 {
        flags.push(format!("voice_{name}:empty"));
        return [0.0; 8];
    }
    let mean = track.iter().sum::<f64>() / n as f64;
    let std = if n >= 2 {
        (track.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        flags.push(format!("voice_{name}:short"));
        0.0
    };
    let alpha = if n >= dfa::MIN_LEN {
        dfa::dfa(track).unwrap_or(0.0)
    } else {
        flags.push(format!("voice_{name}_DFA:short"));
        0.0
    };
    let x: Vec<f64> = (0..n).map(|i| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 }).collect();
    let (lin0, lin1) = if n >= 2 {
        let (slope, intercept) = linear_fit(&x, track).expect("n >= 2");
        (intercept, slope)
    } else {
        (mean, 0.0)
    };
    let (quad0, quad1, quad2) = if n >= 3 {
        match polyfit(&x, track, 2) {
            Ok(c) => (c[0], c[1], c[2]),
            Err(_) => (lin0, lin1, 0.0),
        }
    } else {
        (lin0, lin1, 0.0)
    };
    [mean, std, alpha, lin0, lin1, quad0, quad1, quad2]
}

/// Full voice feature block: duration, amplitude/pitch track summaries,
/// and the dominant frequency of the concatenated voiced run.
pub fn extract_voice_features(audio: &AudioRecording) -> Result<VoiceFeatures> {
    let framed = frame_audio(audio, DEFAULT_FRAME_COUNT)?;
    let track = tag_voiced(&framed)?;
    let ids = voice_ids();
    let mut flags = Vec::new();

    let (start, len) = track.voiced_run;
    if len == 0 {
        flags.push("voice:no_voiced_frames".to_string());
        return Ok(VoiceFeatures { values: vec![0.0; ids.len()], ids, flags });
    }

    let amp_track: Vec<f64> = track.frames[start..start + len].iter().map(|f| f.0).collect();
    let f0_track: Vec<f64> = track.frames[start..start + len].iter().map(|f| f.1).collect();

    let mut values = Vec::with_capacity(ids.len());
    values.push(len as f64 * track.frame_duration);
    values.extend(track_stats(&amp_track, "AMP", &mut flags));
    values.extend(track_stats(&f0_track, "F0", &mut flags));
    values.push(dominant_frequency(
        framed.run_samples(start, len),
        audio.sample_rate(),
        F0_BAND_LOW_HZ,
        F0_BAND_HIGH_HZ,
    ));

    debug_assert_eq!(values.len(), ids.len());
    Ok(VoiceFeatures { ids, values, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tone(freq: f64, amp: f64, rate: u32, seconds: f64) -> AudioRecording {
        let n = (rate as f64 * seconds) as usize;
        let samples: Vec<f64> = (0..n)
            .map(|i| amp * (std::f64::consts::TAU * freq * i as f64 / rate as f64).sin())
            .collect();
        AudioRecording::new(rate, samples).unwrap()
    }

    /// Silence, a (possibly swept) tone, silence — so the voiced run is
    /// well defined under the quartile rule.
    fn phonation(freq: impl Fn(f64) -> f64, amp: f64, rate: u32) -> AudioRecording {
        let total = 4.0;
        let silence = 0.5;
        let n = (rate as f64 * total) as usize;
        let mut phase = 0.0;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / rate as f64;
                if t < silence || t >= total - silence {
                    0.0
                } else {
                    phase += std::f64::consts::TAU * freq(t) / rate as f64;
                    amp * phase.sin()
                }
            })
            .collect();
        AudioRecording::new(rate, samples).unwrap()
    }

    /// Direct DFT argmax over the band at the same zero-padded grid;
    /// independent of the fft path.
    fn dft_band_argmax(samples: &[f64], rate: u32, lo: f64, hi: f64) -> f64 {
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let nfft = (4 * samples.len()).next_power_of_two();
        let bin = rate as f64 / nfft as f64;
        let k_lo = (lo / bin).ceil() as usize;
        let k_hi = (hi / bin).floor() as usize;
        let mut best = (0usize, 0.0f64);
        for k in k_lo..=k_hi {
            let w = std::f64::consts::TAU * k as f64 / nfft as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &s) in samples.iter().enumerate() {
                let a = w * i as f64;
                re += (s - mean) * a.cos();
                im -= (s - mean) * a.sin();
            }
            let p = re * re + im * im;
            if p > best.1 {
                best = (k, p);
            }
        }
        best.0 as f64 * bin
    }

    #[test]
    fn framing_splits_evenly_and_drops_remainder() {
        let audio = AudioRecording::new(44_100, vec![0.1; 882_000]).unwrap();
        let framed = frame_audio(&audio, 40).unwrap();
        assert_eq!(framed.frame_len(), 22_050);
        assert_relative_eq!(framed.frame_duration(), 0.5);

        let audio = AudioRecording::new(400, vec![0.1; 401]).unwrap();
        let framed = frame_audio(&audio, 40).unwrap();
        assert_eq!(framed.frame_len(), 10);
        assert_eq!(framed.frame_count(), 40);

        let tiny = AudioRecording::new(400, vec![0.1; 20]).unwrap();
        assert!(frame_audio(&tiny, 40).is_err());
    }

    #[test]
    fn silence_has_zero_rms() {
        let audio = AudioRecording::new(4000, vec![0.0; 4000]).unwrap();
        let framed = frame_audio(&audio, 40).unwrap();
        assert!(framed.rms().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn steady_signal_falls_back_to_full_run() {
        // Identical frames make every RMS bit-equal to Q1; the strict
        // comparison tags nothing and the fallback tags everything.
        let audio = AudioRecording::new(4000, vec![0.3; 16_000]).unwrap();
        let framed = frame_audio(&audio, 40).unwrap();
        let track = tag_voiced(&framed).unwrap();
        assert_eq!(track.voiced_run, (0, 40));
    }

    #[test]
    fn run_detection_matches_hand_enumeration() {
        // 7 frames of 16 samples with constant values: RMS = |value|.
        let mut samples = Vec::new();
        for v in [0.0, 0.0, 5.0, 5.0, 5.0, 0.0, 5.0] {
            samples.extend(std::iter::repeat_n(v, 16));
        }
        let audio = AudioRecording::new(400, samples).unwrap();
        let framed = frame_audio(&audio, 7).unwrap();
        let track = tag_voiced(&framed).unwrap();
        assert_eq!(
            track.voiced,
            vec![false, false, true, true, true, false, true]
        );
        assert_eq!(track.voiced_run, (2, 3));
    }

    #[test]
    fn per_frame_pitch_matches_dft_oracle() {
        let audio = tone(220.0, 0.4, 8000, 4.0);
        let framed = frame_audio(&audio, 40).unwrap();
        let track = tag_voiced(&framed).unwrap();
        let bin = 8000.0 / (4 * framed.frame_len()).next_power_of_two() as f64;
        for i in 0..framed.frame_count() {
            if track.voiced[i] {
                let oracle = dft_band_argmax(framed.frame_samples(i), 8000, 50.0, 500.0);
                assert_relative_eq!(track.frames[i].1, oracle, epsilon = 1e-9);
                assert!((track.frames[i].1 - 220.0).abs() <= bin);
            }
        }
    }

    #[test]
    fn steady_tone_features() {
        // 0.5 s silence each side of a 3 s 220 Hz tone: 5 unvoiced
        // frames, a 30-frame voiced run, Len = 3.0 s.
        let audio = phonation(|_| 220.0, 0.4, 8000);
        let feats = extract_voice_features(&audio).unwrap();
        let ids = &feats.ids;
        let get = |id: &str| feats.values[ids.iter().position(|x| x == id).unwrap()];

        let nfft_run = (4 * 30 * 800usize).next_power_of_two();
        let run_bin = 8000.0 / nfft_run as f64;
        assert!((get("voice_F0") - 220.0).abs() <= run_bin, "voice_F0 = {}", get("voice_F0"));
        assert!(get("voice_F0_std") < 2.0, "F0 std = {}", get("voice_F0_std"));
        assert!(get("voice_F0_lin1").abs() < 2.0);
        assert_relative_eq!(get("voice_Len"), 3.0, epsilon = 1e-9);
    }

    #[test]
    fn rising_pitch_gives_positive_slope() {
        // Chirp from 180 to 260 Hz across the phonation window.
        let audio = phonation(|t| 180.0 + 80.0 * (t - 0.5) / 3.0, 0.4, 8000);
        let feats = extract_voice_features(&audio).unwrap();
        let slope = feats.values[feats.ids.iter().position(|x| x == "voice_F0_lin1").unwrap()];
        assert!(slope > 20.0, "slope = {slope}");
    }

    #[test]
    fn amplitude_scaling_moves_amp_track_not_pitch() {
        let audio = tone(220.0, 0.2, 8000, 4.0);
        let scaled = AudioRecording::new(
            8000,
            audio.samples().iter().map(|&s| s * 2.0).collect(),
        )
        .unwrap();
        let a = extract_voice_features(&audio).unwrap();
        let b = extract_voice_features(&scaled).unwrap();
        let idx = |id: &str| a.ids.iter().position(|x| x == id).unwrap();
        assert_relative_eq!(
            b.values[idx("voice_AMP_mean")],
            2.0 * a.values[idx("voice_AMP_mean")],
            epsilon = 1e-9
        );
        assert_relative_eq!(b.values[idx("voice_F0")], a.values[idx("voice_F0")]);
    }

    #[test]
    fn quadratic_track_recovery() {
        let mut flags = Vec::new();
        let n = 32;
        let track: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                1.5 - 0.8 * x + 0.3 * x * x
            })
            .collect();
        let s = track_stats(&track, "AMP", &mut flags);
        assert_relative_eq!(s[5], 1.5, epsilon = 1e-6);
        assert_relative_eq!(s[6], -0.8, epsilon = 1e-6);
        assert_relative_eq!(s[7], 0.3, epsilon = 1e-6);
    }
}
