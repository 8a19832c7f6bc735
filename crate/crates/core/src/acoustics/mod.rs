//! Raw acoustic measurements of a vowel segment: formant tracks F1–F3 by
//! linear prediction, an F0 track, per-frame log energy and mean intensity.
//!
//! Every threshold lives in [`AcousticConfig`]; the free functions use the
//! defaults.

mod lpc;
mod pitch;
mod roots;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{self, AudioError, AudioSignal, Window};

pub use lpc::{autocorrelation, levinson_durbin, Lpc};
pub use roots::{aberth, lpc_roots, MAX_ITERATIONS};

/// Floor added inside every logarithm so silence stays finite.
pub const LOG_FLOOR: f64 = 1e-12;

/// Reference pressure for intensity in dB.
pub const REFERENCE_PRESSURE: f64 = 2e-5;

#[derive(Debug, Error)]
pub enum AcousticError {
    #[error("signal is empty")]
    EmptySignal,
    #[error("frame has zero energy")]
    DegenerateFrame,
    #[error("root finder did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Audio(#[from] AudioError),
}

/// Analysis settings. Defaults: formants at 10 kHz with 50 Hz pre-emphasis,
/// 25/10 ms Hamming frames and LPC order 12; pitch over 40/10 ms frames in
/// 75–500 Hz with voicing threshold 0.45 and a 1% relative-RMS silence gate;
/// energy over 25/10 ms rectangular frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcousticConfig {
    pub formant_rate: u32,
    pub pre_emphasis_hz: f64,
    pub formant_frame_ms: f64,
    pub formant_hop_ms: f64,
    pub lpc_order: usize,
    pub formant_min_hz: f64,
    pub formant_max_hz: f64,
    pub max_bandwidth_hz: f64,
    pub pitch_frame_ms: f64,
    pub pitch_hop_ms: f64,
    pub pitch_floor_hz: f64,
    pub pitch_ceiling_hz: f64,
    pub voicing_threshold: f64,
    pub silence_gate: f64,
    pub octave_cost: f64,
    pub energy_frame_ms: f64,
    pub energy_hop_ms: f64,
}

impl Default for AcousticConfig {
    fn default() -> Self {
        AcousticConfig {
            formant_rate: 10_000,
            pre_emphasis_hz: 50.0,
            formant_frame_ms: 25.0,
            formant_hop_ms: 10.0,
            lpc_order: 12,
            formant_min_hz: 90.0,
            formant_max_hz: 4500.0,
            max_bandwidth_hz: 400.0,
            pitch_frame_ms: 40.0,
            pitch_hop_ms: 10.0,
            pitch_floor_hz: 75.0,
            pitch_ceiling_hz: 500.0,
            voicing_threshold: 0.45,
            silence_gate: 0.01,
            octave_cost: 0.01,
            energy_frame_ms: 25.0,
            energy_hop_ms: 10.0,
        }
    }
}

impl AcousticConfig {
    /// Checks the settings against the preconditions of the analyses.
    pub fn validate(&self) -> Result<(), AcousticError> {
        let bad = |m: &str| Err(AcousticError::InvalidArgument(m.to_string()));
        if !(audio::MIN_SAMPLE_RATE..=audio::MAX_SAMPLE_RATE).contains(&self.formant_rate) {
            return bad("formant_rate outside [8000, 48000]");
        }
        if !(self.pre_emphasis_hz > 0.0) {
            return bad("pre_emphasis_hz must be positive");
        }
        if self.lpc_order == 0 {
            return bad("lpc_order must be at least 1");
        }
        for (v, name, min) in [
            (self.formant_frame_ms, "formant_frame_ms", 5.0),
            (self.pitch_frame_ms, "pitch_frame_ms", 5.0),
            (self.energy_frame_ms, "energy_frame_ms", 5.0),
            (self.formant_hop_ms, "formant_hop_ms", 1.0),
            (self.pitch_hop_ms, "pitch_hop_ms", 1.0),
            (self.energy_hop_ms, "energy_hop_ms", 1.0),
        ] {
            if !(v >= min) {
                return Err(AcousticError::InvalidArgument(format!("{name} must be at least {min}")));
            }
        }
        if !(0.0 < self.formant_min_hz && self.formant_min_hz < self.formant_max_hz) {
            return bad("formant gates must satisfy 0 < min < max");
        }
        if !(self.max_bandwidth_hz > 0.0) {
            return bad("max_bandwidth_hz must be positive");
        }
        if !(0.0 < self.pitch_floor_hz && self.pitch_floor_hz < self.pitch_ceiling_hz) {
            return bad("pitch range must satisfy 0 < floor < ceiling");
        }
        if !(0.0..=1.0).contains(&self.voicing_threshold) || !(0.0..=1.0).contains(&self.silence_gate) {
            return bad("voicing_threshold and silence_gate must lie in [0, 1]");
        }
        if !(self.octave_cost >= 0.0) {
            return bad("octave_cost must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormantCandidate {
    pub frequency: f64,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormantFrame {
    pub time: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub bandwidths: [f64; 3],
    pub valid: bool,
}

impl FormantFrame {
    fn invalid(time: f64) -> Self {
        FormantFrame {
            time,
            f1: 0.0,
            f2: 0.0,
            f3: 0.0,
            bandwidths: [0.0; 3],
            valid: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchFrame {
    pub time: f64,
    /// Zero when the frame is unvoiced.
    pub f0: f64,
    pub voicing_strength: f64,
}

impl PitchFrame {
    pub fn voiced(&self) -> bool {
        self.f0 > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyFrame {
    pub time: f64,
    pub energy_db: f64,
}

/// Converts LPC roots to formant candidates: `F = rate·arg(r)/2π`,
/// `B = −rate·ln|r|/π`, keeping roots in the upper half plane with
/// `F ∈ [90, 4500]` Hz and `B < 400` Hz, sorted by frequency.
pub fn roots_to_formants(roots: &[Complex64], analysis_rate: f64) -> Vec<FormantCandidate> {
    AcousticConfig::default().roots_to_formants(roots, analysis_rate)
}

pub fn formant_track(s: &AudioSignal) -> Result<Vec<FormantFrame>, AcousticError> {
    AcousticConfig::default().formant_track(s)
}

pub fn pitch_track(s: &AudioSignal) -> Result<Vec<PitchFrame>, AcousticError> {
    AcousticConfig::default().pitch_track(s)
}

pub fn energy_track(s: &AudioSignal) -> Result<Vec<EnergyFrame>, AcousticError> {
    AcousticConfig::default().energy_track(s)
}

/// Mean intensity `10·log10((mean(x²) + ε)/p_ref²)`.
pub fn intensity_mean(s: &AudioSignal) -> Result<f64, AcousticError> {
    if s.is_empty() {
        return Err(AcousticError::EmptySignal);
    }
    let power = s.samples().iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
    Ok(10.0 * ((power + LOG_FLOOR) / (REFERENCE_PRESSURE * REFERENCE_PRESSURE)).log10())
}

impl AcousticConfig {
    pub fn roots_to_formants(&self, roots: &[Complex64], analysis_rate: f64) -> Vec<FormantCandidate> {
        let mut out: Vec<FormantCandidate> = roots
            .iter()
            .filter(|r| r.im > 0.0)
            .map(|r| FormantCandidate {
                frequency: analysis_rate / (2.0 * PI) * r.arg(),
                bandwidth: -analysis_rate / PI * r.norm().ln(),
            })
            .filter(|c| (self.formant_min_hz..=self.formant_max_hz).contains(&c.frequency) && c.bandwidth < self.max_bandwidth_hz)
            .collect();
        out.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        out
    }

    /// Resample, pre-emphasise, frame, then per frame take the three lowest
    /// surviving LPC candidates. Frames with fewer than three candidates, and
    /// silent frames, are marked invalid.
    pub fn formant_track(&self, s: &AudioSignal) -> Result<Vec<FormantFrame>, AcousticError> {
        if s.is_empty() {
            return Err(AcousticError::EmptySignal);
        }
        let resampled = audio::resample(s, self.formant_rate)?;
        let emphasized = audio::pre_emphasize(&resampled, self.pre_emphasis_hz);
        let frames = audio::frame_signal(&emphasized, self.formant_frame_ms, self.formant_hop_ms, Window::Hamming)?;
        let rate = self.formant_rate as f64;
        Ok(frames
            .frames
            .iter()
            .zip(&frames.frame_centers)
            .map(|(frame, &time)| self.analyse_formant_frame(frame, time, rate))
            .collect())
    }

    fn analyse_formant_frame(&self, frame: &[f64], time: f64, rate: f64) -> FormantFrame {
        let r = autocorrelation(frame, self.lpc_order);
        let Ok(lpc) = levinson_durbin(&r, self.lpc_order) else {
            return FormantFrame::invalid(time);
        };
        let Ok(roots) = lpc_roots(&lpc.coefficients) else {
            return FormantFrame::invalid(time);
        };
        let c = self.roots_to_formants(&roots, rate);
        if c.len() < 3 {
            return FormantFrame::invalid(time);
        }
        FormantFrame {
            time,
            f1: c[0].frequency,
            f2: c[1].frequency,
            f3: c[2].frequency,
            bandwidths: [c[0].bandwidth, c[1].bandwidth, c[2].bandwidth],
            valid: true,
        }
    }

    pub fn pitch_track(&self, s: &AudioSignal) -> Result<Vec<PitchFrame>, AcousticError> {
        pitch::track(self, s)
    }

    /// `10·log10(Σx²/N + ε)` over rectangular frames.
    pub fn energy_track(&self, s: &AudioSignal) -> Result<Vec<EnergyFrame>, AcousticError> {
        if s.is_empty() {
            return Err(AcousticError::EmptySignal);
        }
        let frames = audio::frame_signal(s, self.energy_frame_ms, self.energy_hop_ms, Window::Rectangular)?;
        let n = frames.frame_length as f64;
        Ok(frames
            .frames
            .iter()
            .zip(&frames.frame_centers)
            .map(|(f, &time)| EnergyFrame {
                time,
                energy_db: 10.0 * (f.iter().map(|x| x * x).sum::<f64>() / n + LOG_FLOOR).log10(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(v: f64, n: usize, rate: u32) -> AudioSignal {
        AudioSignal::new(vec![v; n], rate).unwrap()
    }

    fn sine(freq: f64, rate: u32, seconds: f64, amp: f64) -> AudioSignal {
        let n = (seconds * rate as f64) as usize;
        let samples = (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / rate as f64).sin()).collect();
        AudioSignal::new(samples, rate).unwrap()
    }

    #[test]
    fn candidate_conversion() {
        let root = Complex64::from_polar(0.98, 2.0 * PI * 700.0 / 10000.0);
        let c = roots_to_formants(&[root, root.conj()], 10000.0);
        assert_eq!(c.len(), 1);
        assert!((c[0].frequency - 700.0).abs() < 1e-9);
        let expected_bw = -(10000.0 / PI) * 0.98f64.ln();
        assert!((c[0].bandwidth - expected_bw).abs() < 1e-9);
        assert!((c[0].bandwidth - 64.3).abs() < 0.05);
    }

    #[test]
    fn real_roots_and_wide_bandwidths_are_dropped() {
        assert!(roots_to_formants(&[Complex64::new(0.9, 0.0)], 10000.0).is_empty());
        let wide = Complex64::from_polar(0.85, 2.0 * PI * 1000.0 / 10000.0);
        let bw = -(10000.0 / PI) * 0.85f64.ln();
        assert!((bw - 517.0).abs() < 1.0);
        assert!(roots_to_formants(&[wide], 10000.0).is_empty());
    }

    #[test]
    fn candidates_are_sorted() {
        let roots: Vec<Complex64> = [2500.0, 500.0, 1500.0]
            .iter()
            .map(|f| Complex64::from_polar(0.97, 2.0 * PI * f / 10000.0))
            .collect();
        let c = roots_to_formants(&roots, 10000.0);
        let f: Vec<f64> = c.iter().map(|c| c.frequency.round()).collect();
        assert_eq!(f, vec![500.0, 1500.0, 2500.0]);
    }

    #[test]
    fn silence_has_no_valid_formants() {
        let track = formant_track(&constant(0.0, 4000, 16000)).unwrap();
        assert!(!track.is_empty());
        assert!(track.iter().all(|f| !f.valid));
    }

    #[test]
    fn energy_values() {
        let zero = energy_track(&constant(0.0, 1000, 10000)).unwrap();
        assert!(zero.iter().all(|e| (e.energy_db + 120.0).abs() < 1e-9));
        let half = energy_track(&constant(0.5, 1000, 10000)).unwrap();
        assert!(half.iter().all(|e| (e.energy_db + 6.0206).abs() < 1e-4));
    }

    #[test]
    fn energy_scaling_adds_six_db() {
        let s = sine(300.0, 16000, 0.2, 0.1);
        let a = energy_track(&s).unwrap();
        let b = energy_track(&s.scaled(2.0)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((y.energy_db - x.energy_db - 20.0 * 2f64.log10()).abs() < 1e-6);
        }
    }

    #[test]
    fn intensity_values() {
        let s = sine(250.0, 16000, 1.0, 0.1 * 2f64.sqrt());
        let expected = 10.0 * (0.01f64 / 4e-10).log10();
        assert!((intensity_mean(&s).unwrap() - expected).abs() < 1e-3);
        assert!((expected - 73.98).abs() < 0.01);
        let floor = intensity_mean(&constant(0.0, 100, 16000)).unwrap();
        assert!((floor - 10.0 * (1e-12f64 / 4e-10).log10()).abs() < 1e-9);
        assert!((floor + 26.02).abs() < 0.01);
        let doubled = intensity_mean(&s.scaled(2.0)).unwrap();
        assert!((doubled - intensity_mean(&s).unwrap() - 6.0206).abs() < 1e-3);
    }

    #[test]
    fn empty_signals_are_rejected() {
        let empty = AudioSignal::new(vec![], 16000).unwrap();
        assert!(matches!(formant_track(&empty), Err(AcousticError::EmptySignal)));
        assert!(matches!(pitch_track(&empty), Err(AcousticError::EmptySignal)));
        assert!(matches!(energy_track(&empty), Err(AcousticError::EmptySignal)));
        assert!(matches!(intensity_mean(&empty), Err(AcousticError::EmptySignal)));
    }

    #[test]
    fn default_config_is_valid() {
        AcousticConfig::default().validate().unwrap();
        let bad = AcousticConfig {
            voicing_threshold: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
