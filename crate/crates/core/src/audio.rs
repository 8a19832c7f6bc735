//! Audio ingestion and the signal-conditioning primitives shared by every
//! acoustic analysis.

use std::f64::consts::PI;
use std::io::Cursor;

use thiserror::Error;

pub const MIN_SAMPLE_RATE: u32 = 8000;
pub const MAX_SAMPLE_RATE: u32 = 48000;

/// Length of the anti-aliasing FIR used by [`resample`].
pub const RESAMPLE_TAPS: usize = 101;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt WAV container: {0}")]
    CorruptContainer(String),
    #[error("slice [{t0}, {t1}] s lies outside a {duration} s signal")]
    OutOfRange { t0: f64, t1: f64, duration: f64 },
    #[error("signal is empty")]
    EmptySignal,
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("cannot write WAV: {0}")]
    Write(String),
}

/// Mono samples at an integer sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<AudioSignal, AudioError> {
        if !(MIN_SAMPLE_RATE..=MAX_SAMPLE_RATE).contains(&sample_rate) {
            return Err(AudioError::InvalidSignal(format!(
                "sample rate {sample_rate} Hz outside [{MIN_SAMPLE_RATE}, {MAX_SAMPLE_RATE}]"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(AudioError::InvalidSignal(format!("sample {i} is not finite")));
        }
        Ok(AudioSignal { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// The signal multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> AudioSignal {
        AudioSignal {
            samples: self.samples.iter().map(|x| x * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Decodes a 16-bit PCM RIFF/WAVE file. Samples are scaled by 1/32768 and
/// multi-channel audio is averaged to mono.
pub fn read_wav(raw: &[u8]) -> Result<AudioSignal, AudioError> {
    let reader = hound::WavReader::new(Cursor::new(raw)).map_err(|e| match e {
        hound::Error::Unsupported => AudioError::UnsupportedFormat("unsupported WAV encoding".into()),
        other => AudioError::CorruptContainer(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(AudioError::UnsupportedFormat("floating-point samples".into()));
    }
    if spec.bits_per_sample != 16 {
        return Err(AudioError::UnsupportedFormat(format!("{}-bit samples", spec.bits_per_sample)));
    }
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(AudioError::CorruptContainer("zero channels".into()));
    }
    let ints = reader
        .into_samples::<i16>()
        .collect::<Result<Vec<i16>, _>>()
        .map_err(|e| AudioError::CorruptContainer(e.to_string()))?;
    if ints.len() % channels != 0 {
        return Err(AudioError::CorruptContainer("truncated sample frame".into()));
    }
    let samples = ints
        .chunks_exact(channels)
        .map(|frame| frame.iter().map(|&s| s as f64 / 32768.0).sum::<f64>() / channels as f64)
        .collect();
    AudioSignal::new(samples, spec.sample_rate)
}

/// Encodes `s` as mono 16-bit PCM. Samples are scaled by 32768, rounded and
/// clamped to the i16 range.
pub fn write_wav(s: &AudioSignal) -> Result<Vec<u8>, AudioError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: s.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut buf = Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut buf, spec).map_err(|e| AudioError::Write(e.to_string()))?;
        for &x in &s.samples {
            let q = (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            w.write_sample(q).map_err(|e| AudioError::Write(e.to_string()))?;
        }
        w.finalize().map_err(|e| AudioError::Write(e.to_string()))?;
    }
    Ok(buf.into_inner())
}

/// Samples from `round(t0·rate)` inclusive to `round(t1·rate)` exclusive.
pub fn slice(s: &AudioSignal, t0: f64, t1: f64) -> Result<AudioSignal, AudioError> {
    let duration = s.duration();
    let out_of_range = || AudioError::OutOfRange { t0, t1, duration };
    if !(t0.is_finite() && t1.is_finite()) || t0 < 0.0 || t0 >= t1 {
        return Err(out_of_range());
    }
    let rate = s.sample_rate as f64;
    let a = (t0 * rate).round() as usize;
    let b = (t1 * rate).round() as usize;
    // Allow t1 to overshoot the end by less than half a sample.
    if b > s.samples.len() || a >= b {
        return Err(out_of_range());
    }
    Ok(AudioSignal {
        samples: s.samples[a..b].to_vec(),
        sample_rate: s.sample_rate,
    })
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Hamming-windowed sinc low-pass with unity DC gain; `cutoff` is a fraction
/// of the sample rate.
fn lowpass_kernel(taps: usize, cutoff: f64) -> Vec<f64> {
    let m = (taps - 1) as f64 / 2.0;
    let window = hamming(taps);
    let mut h: Vec<f64> = (0..taps)
        .map(|n| 2.0 * cutoff * sinc(2.0 * cutoff * (n as f64 - m)) * window[n])
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

/// Zero-padded convolution aligned so output sample `i` is centred on input
/// sample `i`.
fn filter_same(x: &[f64], h: &[f64]) -> Vec<f64> {
    let half = h.len() / 2;
    (0..x.len())
        .map(|i| {
            let lo = (i + half + 1).saturating_sub(h.len());
            let hi = (i + half).min(x.len() - 1);
            (lo..=hi).map(|j| x[j] * h[i + half - j]).sum()
        })
        .collect()
}

/// Anti-aliased sample-rate conversion.
///
/// The input is low-pass filtered at its own rate with a Hamming-windowed
/// sinc whose span covers [`RESAMPLE_TAPS`] samples of the lower of the two
/// rates, then read off the target grid by linear interpolation. The filter
/// stop band begins at 0.45 of the lower rate.
pub fn resample(s: &AudioSignal, target_rate: u32) -> Result<AudioSignal, AudioError> {
    if !(MIN_SAMPLE_RATE..=MAX_SAMPLE_RATE).contains(&target_rate) {
        return Err(AudioError::InvalidSignal(format!("target rate {target_rate} Hz out of range")));
    }
    if target_rate == s.sample_rate || s.samples.is_empty() {
        return Ok(AudioSignal {
            samples: s.samples.clone(),
            sample_rate: target_rate,
        });
    }
    let src = s.sample_rate as f64;
    let dst = target_rate as f64;
    let low = src.min(dst);
    let ratio = (src / low).ceil() as usize;
    let taps = (RESAMPLE_TAPS - 1) * ratio + 1;
    // A Hamming design reaches its stop band 1.65·rate/taps above the -6 dB
    // point; place that edge at 0.45 of the lower rate.
    let stop = 0.45 * low;
    let cutoff = (stop - 1.65 * src / taps as f64) / src;
    let filtered = filter_same(&s.samples, &lowpass_kernel(taps, cutoff));

    let out_len = (s.samples.len() as f64 * dst / src).round() as usize;
    let step = src / dst;
    let last = filtered.len() - 1;
    let samples = (0..out_len)
        .map(|k| {
            let pos = k as f64 * step;
            let i = pos.floor() as usize;
            if i >= last {
                return filtered[last];
            }
            let frac = pos - i as f64;
            filtered[i] * (1.0 - frac) + filtered[i + 1] * frac
        })
        .collect();
    AudioSignal::new(samples, target_rate)
}

/// First-order pre-emphasis `y[n] = x[n] − α·x[n−1]`, `α = exp(−2π·cutoff/rate)`.
pub fn pre_emphasize(s: &AudioSignal, cutoff: f64) -> AudioSignal {
    let alpha = pre_emphasis_coefficient(cutoff, s.sample_rate);
    let x = &s.samples;
    let samples = (0..x.len()).map(|n| if n == 0 { x[0] } else { x[n] - alpha * x[n - 1] }).collect();
    AudioSignal {
        samples,
        sample_rate: s.sample_rate,
    }
}

pub fn pre_emphasis_coefficient(cutoff: f64, sample_rate: u32) -> f64 {
    (-2.0 * PI * cutoff / sample_rate as f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hamming,
    Rectangular,
}

impl Window {
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Hamming => hamming(n),
            Window::Rectangular => vec![1.0; n],
        }
    }
}

/// `w[n] = 0.54 − 0.46·cos(2πn/(N−1))`, evaluated so the end points are
/// exactly 0.08.
pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let d = (n - 1) as f64;
    (0..n).map(|i| 0.08 + 0.46 * (1.0 - (2.0 * PI * i as f64 / d).cos())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    pub frames: Vec<Vec<f64>>,
    pub frame_length: usize,
    pub hop: usize,
    /// Centre of each frame, in seconds from the start of the signal.
    pub frame_centers: Vec<f64>,
}

impl FrameSet {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

pub fn ms_to_samples(ms: f64, sample_rate: u32) -> usize {
    ((ms * sample_rate as f64 / 1000.0).round() as usize).max(1)
}

/// Cuts `s` into windowed frames centred at `frame_ms/2 + k·hop_ms`.
///
/// A signal shorter than one frame yields a single zero-padded frame with the
/// signal in its middle.
pub fn frame_signal(s: &AudioSignal, frame_ms: f64, hop_ms: f64, window: Window) -> Result<FrameSet, AudioError> {
    if s.samples.is_empty() {
        return Err(AudioError::EmptySignal);
    }
    let rate = s.sample_rate as f64;
    let frame_length = ms_to_samples(frame_ms, s.sample_rate);
    let hop = ms_to_samples(hop_ms, s.sample_rate);
    let w = window.weights(frame_length);
    let x = &s.samples;

    if x.len() < frame_length {
        let offset = (frame_length - x.len()) / 2;
        let mut frame = vec![0.0; frame_length];
        for (i, v) in x.iter().enumerate() {
            frame[offset + i] = v * w[offset + i];
        }
        return Ok(FrameSet {
            frames: vec![frame],
            frame_length,
            hop,
            frame_centers: vec![x.len() as f64 / 2.0 / rate],
        });
    }

    let count = (x.len() - frame_length) / hop + 1;
    let frames = (0..count)
        .map(|k| {
            let start = k * hop;
            x[start..start + frame_length].iter().zip(&w).map(|(a, b)| a * b).collect()
        })
        .collect();
    let frame_centers = (0..count)
        .map(|k| (k * hop) as f64 / rate + frame_length as f64 / 2.0 / rate)
        .collect();
    Ok(FrameSet {
        frames,
        frame_length,
        hop,
        frame_centers,
    })
}
