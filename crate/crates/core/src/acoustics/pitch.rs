//! Autocorrelation pitch tracking.
//!
//! Each frame is mean-removed and Hann-windowed, and its normalized
//! autocorrelation `r(τ)/r(0)` is divided by the normalized autocorrelation
//! of the window itself. That division removes the lag-dependent taper a
//! finite frame imposes, so the peak of a periodic signal sits at its true
//! period instead of being pulled towards shorter lags. Peaks in the lag
//! range of the pitch floor and ceiling are refined by parabolic
//! interpolation; among them the strongest wins, with a small per-octave
//! bonus for higher candidates to avoid locking onto sub-harmonics.
//!
//! The winner's strength is capped by the correlation at two and three times
//! its period, where those lags fit in the frame. A periodic signal
//! correlates as well several periods apart as one, while noise ringing
//! through a narrow resonance decays geometrically, so the cap keeps
//! whispered vowels unvoiced.

use super::{autocorrelation, AcousticConfig, AcousticError, PitchFrame};
use crate::audio::{self, AudioSignal, Window};
use std::f64::consts::PI;

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let d = (n - 1) as f64;
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / d).cos()).collect()
}

struct Peak {
    lag: f64,
    strength: f64,
}

/// Vertex of the parabola through `(−1, a)`, `(0, b)`, `(1, c)`.
fn parabolic(a: f64, b: f64, c: f64) -> (f64, f64) {
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (0.0, b);
    }
    let delta = 0.5 * (a - c) / denom;
    (delta, b - 0.25 * (a - c) * delta)
}

pub(super) fn track(cfg: &AcousticConfig, s: &AudioSignal) -> Result<Vec<PitchFrame>, AcousticError> {
    if s.is_empty() {
        return Err(AcousticError::EmptySignal);
    }
    let rate = s.sample_rate() as f64;
    let frames = audio::frame_signal(s, cfg.pitch_frame_ms, cfg.pitch_hop_ms, Window::Rectangular)?;
    let n = frames.frame_length;
    let min_lag = ((rate / cfg.pitch_ceiling_hz).floor() as usize).max(2);
    let max_lag = ((rate / cfg.pitch_floor_hz).ceil() as usize).min(n.saturating_sub(2));

    let window = hann(n);
    // The window correction amplifies noise at long lags, so the third
    // period is only checked within half the frame.
    let max_confirm = n.saturating_sub(2).max(max_lag);
    let confirm_limits = [(2.0, max_confirm), (3.0, n / 2)];
    let rw = autocorrelation(&window, max_confirm + 1);
    let rw: Vec<f64> = rw.iter().map(|v| v / rw[0]).collect();

    let rms: Vec<f64> = frames
        .frames
        .iter()
        .map(|f| (f.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt())
        .collect();
    let max_rms = rms.iter().cloned().fold(0.0, f64::max);

    let unvoiced = |time: f64, strength: f64| PitchFrame {
        time,
        f0: 0.0,
        voicing_strength: strength.clamp(0.0, 1.0),
    };

    let out = frames
        .frames
        .iter()
        .zip(&frames.frame_centers)
        .zip(&rms)
        .map(|((frame, &time), &frame_rms)| {
            if max_lag <= min_lag || frame_rms == 0.0 {
                return unvoiced(time, 0.0);
            }
            let mean = frame.iter().sum::<f64>() / n as f64;
            let y: Vec<f64> = frame.iter().zip(&window).map(|(x, w)| (x - mean) * w).collect();
            let r = autocorrelation(&y, max_confirm + 1);
            if !(r[0] > 0.0) {
                return unvoiced(time, 0.0);
            }
            let rho = |lag: usize| r[lag] / r[0] / rw[lag];

            let mut best: Option<(f64, Peak)> = None;
            for lag in min_lag..=max_lag {
                let (a, b, c) = (rho(lag - 1), rho(lag), rho(lag + 1));
                if !(b >= a && b > c) {
                    continue;
                }
                let (delta, strength) = parabolic(a, b, c);
                let period = lag as f64 + delta;
                let f0 = rate / period;
                if f0 < cfg.pitch_floor_hz || f0 > cfg.pitch_ceiling_hz {
                    continue;
                }
                let score = strength + cfg.octave_cost * (f0 / cfg.pitch_floor_hz).log2();
                if best.as_ref().is_none_or(|(s, _)| score > *s) {
                    best = Some((score, Peak { lag: period, strength }));
                }
            }
            let Some((_, mut peak)) = best else {
                return unvoiced(time, 0.0);
            };
            for (k, limit) in confirm_limits {
                let lag = (k * peak.lag).round() as usize;
                if lag < limit {
                    peak.strength = peak.strength.min(rho(lag - 1).max(rho(lag)).max(rho(lag + 1)));
                }
            }
            let loud = frame_rms >= cfg.silence_gate * max_rms;
            if peak.strength >= cfg.voicing_threshold && loud {
                PitchFrame {
                    time,
                    f0: rate / peak.lag,
                    voicing_strength: peak.strength.clamp(0.0, 1.0),
                }
            } else {
                unvoiced(time, peak.strength)
            }
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::pitch_track;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine(freq: f64, rate: u32, seconds: f64) -> AudioSignal {
        let n = (seconds * rate as f64) as usize;
        let samples = (0..n).map(|i| 0.3 * (2.0 * PI * freq * i as f64 / rate as f64).sin()).collect();
        AudioSignal::new(samples, rate).unwrap()
    }

    #[test]
    fn sine_200hz_is_tracked() {
        let track = pitch_track(&sine(200.0, 16000, 1.0)).unwrap();
        assert!(!track.is_empty());
        for f in &track {
            assert!(f.voiced(), "{f:?}");
            assert!((f.f0 - 200.0).abs() <= 1.0, "{f:?}");
        }
    }

    #[test]
    fn tones_within_one_percent() {
        for freq in [80.0, 90.0, 120.0, 180.0, 250.0, 400.0, 450.0] {
            for rate in [8000, 16000, 44100] {
                let track = pitch_track(&sine(freq, rate, 0.5)).unwrap();
                for f in &track[1..track.len() - 1] {
                    assert!(f.voiced() && (f.f0 / freq - 1.0).abs() < 0.01, "{freq} Hz @ {rate}: {f:?}");
                }
            }
        }
    }

    #[test]
    fn white_noise_is_unvoiced() {
        let mut unvoiced = 0;
        let mut total = 0;
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples = (0..16000).map(|_| rng.random_range(-0.3..0.3)).collect();
            let track = pitch_track(&AudioSignal::new(samples, 16000).unwrap()).unwrap();
            total += track.len();
            unvoiced += track.iter().filter(|f| !f.voiced()).count();
        }
        assert!(unvoiced as f64 >= 0.9 * total as f64, "{unvoiced}/{total}");
    }

    #[test]
    fn zeros_are_unvoiced() {
        let track = pitch_track(&AudioSignal::new(vec![0.0; 8000], 16000).unwrap()).unwrap();
        assert!(track.iter().all(|f| f.f0 == 0.0));
    }

    #[test]
    fn quiet_frames_are_gated() {
        let mut samples = sine(150.0, 16000, 0.5).samples().to_vec();
        for v in &mut samples[..4000] {
            *v *= 1e-3;
        }
        let track = pitch_track(&AudioSignal::new(samples, 16000).unwrap()).unwrap();
        assert!(!track[0].voiced());
        assert!(track[track.len() - 2].voiced());
    }
}
