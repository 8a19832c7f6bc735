//! Synthetic vowel corpora with known ground truth.
//!
//! A vowel is a source (impulse train or white noise) through three cascaded
//! two-pole resonators and a first-difference radiation filter. Pulses are
//! first given a glottal roll-off, and two fixed resonances above F3 stand in
//! for the higher formants of a real vocal tract. A corpus
//! draws per-vowel parameters from per-dialect normal distributions, with a
//! fixed offset per speaker, and embeds each vowel between two 100 ms pads of
//! silence. Every random draw comes from a stream keyed by
//! `(seed, dialect, speaker, sample)`, so output does not depend on thread
//! scheduling.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::acoustics::AcousticConfig;
use crate::audio::{self, AudioError, AudioSignal};
use crate::features::{self, BuildOutput, Dataset, FeatureError, Manifest, ManifestRow};
use crate::labels::{Dialect, Gender, LabelError, Vowel};
use crate::rng::{self, tag};
use crate::textgrid::{self, AliasTable, Interval, TextGrid, Tier};

pub const CORPUS_SAMPLE_RATE: u32 = 16000;
pub const PAD_SECONDS: f64 = 0.1;
pub const TIER_NAME: &str = "phoneme";
pub const CORPUS_RMS: f64 = 0.1;
pub const GROUND_TRUTH_HEADER: [&str; 6] = ["sample_id", "f0", "f1", "f2", "f3", "duration_ms"];

/// Bandwidth of the 0 Hz resonator that gives pulses a glottal −12 dB/octave
/// roll-off.
pub const GLOTTAL_BANDWIDTH_HZ: f64 = 100.0;

/// Fixed (frequency, bandwidth) resonances above F3. They give the spare
/// poles of an order-12 analysis a real resonance to model instead of the
/// harmonics around F1. Each one is skipped when it lies within
/// [`UPPER_FORMANT_GAP_HZ`] of F3 or above Nyquist.
pub const UPPER_FORMANTS: [(f64, f64); 2] = [(3500.0, 200.0), (4500.0, 250.0)];
pub const UPPER_FORMANT_GAP_HZ: f64 = 300.0;

/// Corpus bandwidths are wider than the [`VowelSpec`] default, which keeps
/// the F1 estimate from locking onto a single harmonic at female F0.
pub const CORPUS_BANDWIDTHS: [f64; 3] = [100.0, 120.0, 150.0];

/// Multipliers applied to a female speaker's F0 and formant means.
pub const FEMALE_F0_SCALE: f64 = 1.2;
pub const FEMALE_FORMANT_SCALE: f64 = 1.1;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid vowel spec: {0}")]
    SpecInvalid(String),
    #[error("invalid corpus request: {0}")]
    InvalidRequest(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Audio(#[from] AudioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Pulse,
    Noise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VowelSpec {
    pub f0: f64,
    pub formants: [f64; 3],
    pub bandwidths: [f64; 3],
    /// Seconds.
    pub duration: f64,
    pub amplitude_rms: f64,
    pub sample_rate: u32,
    pub source: Source,
}

impl VowelSpec {
    pub const DEFAULT_BANDWIDTHS: [f64; 3] = [60.0, 90.0, 120.0];

    pub fn pulse(f0: f64, formants: [f64; 3], duration: f64, sample_rate: u32) -> VowelSpec {
        VowelSpec {
            f0,
            formants,
            bandwidths: Self::DEFAULT_BANDWIDTHS,
            duration,
            amplitude_rms: CORPUS_RMS,
            sample_rate,
            source: Source::Pulse,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::SpecInvalid(m));
        let nyquist = self.sample_rate as f64 / 2.0;
        let [f1, f2, f3] = self.formants;
        if self.source == Source::Pulse && !(75.0..=500.0).contains(&self.f0) {
            return bad(format!("f0 {} outside 75–500 Hz", self.f0));
        }
        if !(f1 > 0.0 && f1 < f2 && f2 < f3 && f3 < nyquist) {
            return bad(format!("formants {:?} must increase and stay below {nyquist} Hz", self.formants));
        }
        if !self.bandwidths.iter().all(|b| b.is_finite() && *b > 0.0) {
            return bad("bandwidths must be positive".into());
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad("duration must be positive".into());
        }
        if !(self.amplitude_rms.is_finite() && self.amplitude_rms > 0.0 && self.amplitude_rms < 1.0) {
            return bad("amplitude_rms must be in (0, 1)".into());
        }
        if !(audio::MIN_SAMPLE_RATE..=audio::MAX_SAMPLE_RATE).contains(&self.sample_rate) {
            return bad(format!("sample rate {} unsupported", self.sample_rate));
        }
        Ok(())
    }

    /// Number of samples the synthesized vowel has.
    pub fn n_samples(&self) -> usize {
        ((self.duration * self.sample_rate as f64).round() as usize).max(1)
    }
}

/// Two-pole resonator with pole radius `e^(−πB/fs)` and angle `2πF/fs`,
/// scaled to unity gain at DC, applied in place.
fn resonate(x: &mut [f64], f: f64, b: f64, fs: f64) {
    let r = (-PI * b / fs).exp();
    let a1 = 2.0 * r * (2.0 * PI * f / fs).cos();
    let a2 = -r * r;
    let gain = 1.0 - a1 - a2;
    let (mut y1, mut y2) = (0.0, 0.0);
    for v in x {
        let y = gain * *v + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        *v = y;
    }
}

/// Synthesizes `spec`. A noise source uses a fixed internal stream; use
/// [`synthesize_vowel_with`] to supply one.
pub fn synthesize_vowel(spec: &VowelSpec) -> Result<AudioSignal, SynthError> {
    synthesize_vowel_with(spec, &mut rng::stream(0, &[tag::SAMPLE]))
}

pub fn synthesize_vowel_with<R: Rng + ?Sized>(spec: &VowelSpec, rng: &mut R) -> Result<AudioSignal, SynthError> {
    spec.validate()?;
    let n = spec.n_samples();
    let fs = spec.sample_rate as f64;
    let mut x = vec![0.0; n];
    match spec.source {
        Source::Pulse => {
            // Pulses at k·fs/f0 samples, each split linearly between the two
            // neighbouring samples so the period is not rounded.
            let period = fs / spec.f0;
            let mut t = 0.0;
            while t < n as f64 {
                let i = t.floor() as usize;
                let frac = t - i as f64;
                x[i] += 1.0 - frac;
                if i + 1 < n {
                    x[i + 1] += frac;
                }
                t += period;
            }
        }
        Source::Noise => {
            for v in &mut x {
                *v = StandardNormal.sample(rng);
            }
        }
    }
    if spec.source == Source::Pulse {
        resonate(&mut x, 0.0, GLOTTAL_BANDWIDTH_HZ, fs);
    }
    for (&f, &b) in spec.formants.iter().zip(&spec.bandwidths) {
        resonate(&mut x, f, b, fs);
    }
    for (f, b) in UPPER_FORMANTS {
        if f > spec.formants[2] + UPPER_FORMANT_GAP_HZ && f < fs / 2.0 {
            resonate(&mut x, f, b, fs);
        }
    }
    let mut prev = 0.0;
    for v in &mut x {
        let cur = *v;
        *v = cur - prev;
        prev = cur;
    }
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        let g = spec.amplitude_rms / rms;
        x.iter_mut().for_each(|v| *v *= g);
    }
    Ok(AudioSignal::new(x, spec.sample_rate)?)
}

/// The parameters drawn for one vowel token.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VoiceParams {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    /// Seconds.
    pub duration: f64,
}

impl VoiceParams {
    fn to_array(self) -> [f64; 5] {
        [self.f0, self.f1, self.f2, self.f3, self.duration]
    }

    fn from_array(a: [f64; 5]) -> VoiceParams {
        VoiceParams {
            f0: a[0],
            f1: a[1],
            f2: a[2],
            f3: a[3],
            duration: a[4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VowelStats {
    pub mean: VoiceParams,
    pub sd: VoiceParams,
}

/// Per-vowel parameter distributions of one dialect.
#[derive(Debug, Clone, PartialEq)]
pub struct DialectSpec {
    pub dialect: Dialect,
    /// Indexed by [`Vowel::index`].
    pub vowels: [VowelStats; 6],
    /// Probability of each vowel, indexed by [`Vowel::index`].
    pub mix: [f64; 6],
}

impl DialectSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let total: f64 = self.mix.iter().sum();
        if self.mix.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(SynthError::InvalidRequest(format!("{} vowel mix must sum to 1", self.dialect)));
        }
        for s in &self.vowels {
            if s.mean
                .to_array()
                .iter()
                .chain(&s.sd.to_array())
                .any(|v| !(v.is_finite() && *v >= 0.0))
            {
                return Err(SynthError::InvalidRequest(format!("{} has an invalid mean or SD", self.dialect)));
            }
        }
        Ok(())
    }
}

/// Spacing between neighbouring dialect means, in standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    Separated,
    Overlapped,
    Identical,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Separated, Profile::Overlapped, Profile::Identical];

    pub fn separation(self) -> f64 {
        match self {
            Profile::Separated => 3.0,
            Profile::Overlapped => 1.0,
            Profile::Identical => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Separated => "separated",
            Profile::Overlapped => "overlapped",
            Profile::Identical => "identical",
        }
    }

    /// Three dialect specs with every parameter mean shifted by
    /// `(d − 1)·separation·SD` for dialect index `d`, a uniform vowel mix, and
    /// shared standard deviations.
    pub fn dialect_specs(self) -> Vec<DialectSpec> {
        Dialect::ALL
            .iter()
            .map(|&dialect| {
                let k = (dialect.index() as f64 - 1.0) * self.separation();
                let vowels = Vowel::ALL.map(|v| {
                    let base = base_stats(v);
                    let m = base.mean.to_array();
                    let sd = base.sd.to_array();
                    VowelStats {
                        mean: VoiceParams::from_array(std::array::from_fn(|i| m[i] + k * sd[i])),
                        sd: base.sd,
                    }
                });
                DialectSpec {
                    dialect,
                    vowels,
                    mix: [1.0 / 6.0; 6],
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Profile {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LabelError {
                kind: "profile",
                value: s.to_string(),
            })
    }
}

/// Male reference values for each vowel.
fn base_stats(v: Vowel) -> VowelStats {
    let (f1, f2, f3) = match v {
        Vowel::Schwa => (500.0, 1500.0, 2500.0),
        Vowel::E => (450.0, 1950.0, 2650.0),
        Vowel::I => (320.0, 2150.0, 2850.0),
        Vowel::O => (480.0, 950.0, 2500.0),
        Vowel::U => (340.0, 900.0, 2400.0),
        Vowel::A => (720.0, 1250.0, 2550.0),
    };
    VowelStats {
        mean: VoiceParams {
            f0: 130.0,
            f1,
            f2,
            f3,
            duration: 0.12,
        },
        sd: VoiceParams {
            f0: 10.0,
            f1: 30.0,
            f2: 60.0,
            f3: 80.0,
            duration: 0.015,
        },
    }
}

/// Ground truth of one synthesized vowel.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub sample_id: String,
    pub vowel: Vowel,
    pub params: VoiceParams,
}

/// One synthesized recording with its annotation and metadata.
#[derive(Debug, Clone)]
pub struct Utterance {
    pub row: ManifestRow,
    pub signal: AudioSignal,
    pub grid: TextGrid,
    pub truth: GroundTruth,
}

pub fn speaker_gender(speaker: usize) -> Gender {
    if speaker.is_multiple_of(2) {
        Gender::Male
    } else {
        Gender::Female
    }
}

fn clamp_params(p: VoiceParams, nyquist: f64) -> VoiceParams {
    let f1 = p.f1.clamp(150.0, nyquist * 0.9 - 400.0);
    let f2 = p.f2.clamp(f1 + 200.0, nyquist * 0.9 - 200.0);
    let f3 = p.f3.clamp(f2 + 200.0, nyquist * 0.9);
    VoiceParams {
        f0: p.f0.clamp(80.0, 400.0),
        f1,
        f2,
        f3,
        duration: p.duration.max(0.04),
    }
}

fn draw_vowel<R: Rng + ?Sized>(mix: &[f64; 6], rng: &mut R) -> Vowel {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (v, p) in Vowel::ALL.iter().zip(mix) {
        acc += p;
        if u < acc {
            return *v;
        }
    }
    *Vowel::ALL
        .iter()
        .zip(mix)
        .rev()
        .find(|(_, p)| **p > 0.0)
        .map(|(v, _)| v)
        .unwrap_or(&Vowel::A)
}

/// 16-bit PCM grid, so WAV round trips reproduce the samples exactly.
fn quantize(s: &AudioSignal) -> Result<AudioSignal, AudioError> {
    let q = s
        .samples()
        .iter()
        .map(|v| (v * 32768.0).round().clamp(-32768.0, 32767.0) / 32768.0)
        .collect();
    AudioSignal::new(q, s.sample_rate())
}

fn utterance(spec: &DialectSpec, speaker: usize, index: usize, seed: u64) -> Result<Utterance, SynthError> {
    let d = spec.dialect.index() as u64;
    let nyquist = CORPUS_SAMPLE_RATE as f64 / 2.0;
    let gender = speaker_gender(speaker);

    let mut spk_rng = rng::stream(seed, &[tag::SPEAKER, d, speaker as u64]);
    let offsets: [f64; 5] = std::array::from_fn(|_| StandardNormal.sample(&mut spk_rng));

    let mut rng = rng::stream(seed, &[tag::SAMPLE, d, speaker as u64, index as u64]);
    let vowel = draw_vowel(&spec.mix, &mut rng);
    let stats = spec.vowels[vowel.index()];
    let mean = stats.mean.to_array();
    let sd = stats.sd.to_array();
    let mut p = [0.0; 5];
    for i in 0..5 {
        let centre = mean[i] + 0.5 * sd[i] * offsets[i];
        p[i] = Normal::new(centre, sd[i]).expect("finite SD").sample(&mut rng);
    }
    if gender == Gender::Female {
        p[0] *= FEMALE_F0_SCALE;
        for v in &mut p[1..4] {
            *v *= FEMALE_FORMANT_SCALE;
        }
    }
    let mut params = clamp_params(VoiceParams::from_array(p), nyquist);

    let rate = CORPUS_SAMPLE_RATE as f64;
    let vowel_spec = VowelSpec {
        bandwidths: CORPUS_BANDWIDTHS,
        ..VowelSpec::pulse(params.f0, [params.f1, params.f2, params.f3], params.duration, CORPUS_SAMPLE_RATE)
    };
    let voiced = synthesize_vowel(&vowel_spec)?;
    let n_vowel = voiced.len();
    params.duration = n_vowel as f64 / rate;
    let n_pad = (PAD_SECONDS * rate).round() as usize;
    let mut samples = vec![0.0; n_pad];
    samples.extend_from_slice(voiced.samples());
    samples.extend(std::iter::repeat_n(0.0, n_pad));
    let signal = quantize(&AudioSignal::new(samples, CORPUS_SAMPLE_RATE)?)?;

    let t1 = n_pad as f64 / rate;
    let t2 = (n_pad + n_vowel) as f64 / rate;
    let total = signal.len() as f64 / rate;
    let tier = Tier::interval_tier(
        TIER_NAME,
        0.0,
        total,
        vec![
            Interval::new(0.0, t1, ""),
            Interval::new(t1, t2, vowel.symbol()),
            Interval::new(t2, total, ""),
        ],
    )
    .expect("synthetic tier is well formed");
    let grid = TextGrid::new(0.0, total, vec![tier]).expect("single tier");

    let stem = format!("{}_s{:02}_v{:02}", spec.dialect.name().to_lowercase(), speaker, index);
    let row = ManifestRow {
        wav_path: PathBuf::from(format!("wav/{stem}.wav")),
        textgrid_path: PathBuf::from(format!("textgrid/{stem}.TextGrid")),
        speaker_id: format!("{}_s{:02}", spec.dialect.name().to_lowercase(), speaker),
        gender,
        dialect: spec.dialect,
    };
    let truth = GroundTruth {
        sample_id: features::sample_id(&row.wav_path, 0),
        vowel,
        params,
    };
    Ok(Utterance { row, signal, grid, truth })
}

/// All utterances of a corpus in manifest order: dialects as given, then
/// speakers, then vowel index. Speakers alternate male and female.
pub fn generate_utterances(
    specs: &[DialectSpec],
    speakers_per_dialect: usize,
    vowels_per_speaker: usize,
    seed: u64,
) -> Result<Vec<Utterance>, SynthError> {
    if speakers_per_dialect == 0 || vowels_per_speaker == 0 {
        return Err(SynthError::InvalidRequest("speaker and vowel counts must be at least 1".into()));
    }
    for s in specs {
        s.validate()?;
    }
    let jobs: Vec<(&DialectSpec, usize, usize)> = specs
        .iter()
        .flat_map(|s| (0..speakers_per_dialect).flat_map(move |spk| (0..vowels_per_speaker).map(move |i| (s, spk, i))))
        .collect();
    jobs.par_iter().map(|&(s, spk, i)| utterance(s, spk, i, seed)).collect()
}

pub fn ground_truth_csv(utterances: &[Utterance]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut write = || -> csv::Result<()> {
        w.write_record(GROUND_TRUTH_HEADER)?;
        for u in utterances {
            let p = u.truth.params;
            w.write_record([
                u.truth.sample_id.clone(),
                features::format_sig6(p.f0),
                features::format_sig6(p.f1),
                features::format_sig6(p.f2),
                features::format_sig6(p.f3),
                features::format_sig6(p.duration * 1000.0),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write().expect("writing CSV to memory cannot fail");
    w.into_inner().expect("in-memory writer")
}

/// Extracts features straight from generated utterances, without touching
/// the disk. Gives the same rows as `generate_corpus` followed by
/// `features::build_dataset`, apart from failure paths.
pub fn extract_utterances(utterances: &[Utterance], cfg: &AcousticConfig) -> Result<BuildOutput, FeatureError> {
    let aliases = AliasTable::default();
    let parts: Vec<_> = utterances
        .par_iter()
        .map(|u| features::extract_recording(&u.signal, &u.grid, TIER_NAME, &aliases, &u.row, cfg))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in parts {
        rows.extend(r);
        failures.extend(f);
    }
    Ok(BuildOutput {
        dataset: Dataset::new(rows)?,
        failures,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), SynthError> {
    fs::write(path, bytes).map_err(|source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `wav/`, `textgrid/`, `manifest.csv` and `ground_truth.csv` under
/// `out_dir` and returns the manifest. Paths in the manifest are relative to
/// `out_dir`.
pub fn generate_corpus(
    specs: &[DialectSpec],
    speakers_per_dialect: usize,
    vowels_per_speaker: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Manifest, SynthError> {
    let utterances = generate_utterances(specs, speakers_per_dialect, vowels_per_speaker, seed)?;
    for sub in ["wav", "textgrid"] {
        let dir = out_dir.join(sub);
        fs::create_dir_all(&dir).map_err(|source| SynthError::Io { path: dir, source })?;
    }
    utterances.par_iter().try_for_each(|u| {
        write_file(&out_dir.join(&u.row.wav_path), &audio::write_wav(&u.signal)?)?;
        write_file(&out_dir.join(&u.row.textgrid_path), &textgrid::serialize_textgrid(&u.grid))
    })?;
    let manifest = Manifest {
        base_dir: out_dir.to_path_buf(),
        rows: utterances.iter().map(|u| u.row.clone()).collect(),
    };
    write_file(&out_dir.join("manifest.csv"), &manifest.to_csv())?;
    write_file(&out_dir.join("ground_truth.csv"), &ground_truth_csv(&utterances))?;
    Ok(manifest)
}
