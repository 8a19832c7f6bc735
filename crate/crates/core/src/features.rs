//! The 33-value vowel feature vector and the datasets built from it.
//!
//! Layout (indices): 0–5 F1, 6–11 F2, 12–17 F3, 18–23 F0 (Hz), 24–29 energy
//! (dB), 30 duration (ms), 31 intensity (dB), 32 gender (0 male, 1 female).
//! Each of the first five measurements is sampled at the midpoints of six
//! equal sub-spans of the vowel.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::acoustics::{AcousticConfig, AcousticError};
use crate::audio::{self, AudioError, AudioSignal};
use crate::labels::{Dialect, Gender, LabelError, Vowel};
use crate::textgrid::{self, AliasTable, TextGridError};

pub const FEATURE_COUNT: usize = 33;
pub const SAMPLES_PER_TRACK: usize = 6;
pub const MIN_SEGMENT_SECONDS: f64 = 0.010;

pub const DURATION_INDEX: usize = 30;
pub const INTENSITY_INDEX: usize = 31;
pub const GENDER_INDEX: usize = 32;

pub const MANIFEST_HEADER: [&str; 5] = ["wav_path", "textgrid_path", "speaker_id", "gender", "dialect"];
const CSV_META: [&str; 5] = ["sample_id", "dialect", "speaker_id", "gender", "vowel"];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("track is empty")]
    EmptyTrack,
    #[error("segment of {0:.4} s is shorter than 10 ms")]
    SegmentTooShort(f64),
    #[error("no frame of the segment has three valid formants")]
    NoValidFormantFrames,
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("features CSV line {line}: {message}")]
    CsvFormat { line: usize, message: String },
    #[error("dataset is missing column {0:?}")]
    MissingColumn(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error(transparent)]
    Acoustic(#[from] AcousticError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    TextGrid(#[from] TextGridError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// The 33 column names in layout order.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_COUNT);
    for prefix in ["f1", "f2", "f3", "f0", "en"] {
        names.extend((1..=SAMPLES_PER_TRACK).map(|i| format!("{prefix}_{i}")));
    }
    names.extend(["duration_ms", "intensity_db", "gender"].map(String::from));
    names
}

/// Column subsets used by the three evaluation phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureGroup {
    /// F1–F3 samples, indices 0–17.
    Spectral,
    /// F0, energy, duration and intensity, indices 18–31.
    Prosodic,
    All,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 3] = [FeatureGroup::Spectral, FeatureGroup::Prosodic, FeatureGroup::All];

    pub fn indices(self) -> std::ops::Range<usize> {
        match self {
            FeatureGroup::Spectral => 0..18,
            FeatureGroup::Prosodic => 18..32,
            FeatureGroup::All => 0..FEATURE_COUNT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Spectral => "spectral",
            FeatureGroup::Prosodic => "prosodic",
            FeatureGroup::All => "all",
        }
    }
}

impl std::str::FromStr for FeatureGroup {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LabelError {
                kind: "feature group",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub sample_id: String,
    pub speaker_id: String,
    pub vowel: Vowel,
    pub gender: Gender,
    /// Set when no frame of the segment was voiced and the F0 samples are
    /// zero-filled.
    pub unvoiced: bool,
}

/// One dataset row. Full-layout rows have exactly [`FEATURE_COUNT`] values;
/// rows of a projected dataset carry only the selected columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub dialect: Dialect,
    pub meta: SampleMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    rows: Vec<FeatureVector>,
}

impl Dataset {
    /// A dataset in the full 33-column layout.
    pub fn new(rows: Vec<FeatureVector>) -> Result<Dataset, FeatureError> {
        Dataset::with_columns(feature_names(), rows)
    }

    pub fn with_columns(feature_names: Vec<String>, rows: Vec<FeatureVector>) -> Result<Dataset, FeatureError> {
        for (i, r) in rows.iter().enumerate() {
            if r.values.len() != feature_names.len() {
                return Err(FeatureError::InvalidDataset(format!(
                    "row {i} has {} values for {} columns",
                    r.values.len(),
                    feature_names.len()
                )));
            }
            if let Some(j) = r.values.iter().position(|v| !v.is_finite()) {
                return Err(FeatureError::InvalidDataset(format!("row {i} column {j} is not finite")));
            }
        }
        Ok(Dataset { feature_names, rows })
    }

    pub fn empty() -> Dataset {
        Dataset {
            feature_names: feature_names(),
            rows: Vec::new(),
        }
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> Vec<String> {
        Dialect::class_names()
    }

    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.dialect.index()).collect()
    }

    pub fn is_full_layout(&self) -> bool {
        self.feature_names == feature_names()
    }

    /// The rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    fn column(&self, name: &str) -> Result<usize, FeatureError> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| FeatureError::MissingColumn(name.to_string()))
    }
}

/// Values of `track` at the midpoints `t_start + (2i−1)/12·(t_end−t_start)`,
/// `i = 1..6`, each taken from the frame whose time is nearest (earlier frame
/// on ties). `track` holds `(time, value)` pairs in time order.
pub fn sample_six(track: &[(f64, f64)], t_start: f64, t_end: f64) -> Result<[f64; SAMPLES_PER_TRACK], FeatureError> {
    if track.is_empty() {
        return Err(FeatureError::EmptyTrack);
    }
    let span = t_end - t_start;
    let mut out = [0.0; SAMPLES_PER_TRACK];
    for (i, slot) in out.iter_mut().enumerate() {
        let t = t_start + (2 * i + 1) as f64 / 12.0 * span;
        let mut best = track[0];
        for &p in &track[1..] {
            if (p.0 - t).abs() < (best.0 - t).abs() {
                best = p;
            }
        }
        *slot = best.1;
    }
    Ok(out)
}

/// One annotated vowel occurrence with its audio.
#[derive(Debug, Clone)]
pub struct VowelSegment {
    pub audio: AudioSignal,
    pub vowel: Vowel,
    pub t_start: f64,
    pub t_end: f64,
    pub sample_id: String,
    pub speaker_id: String,
    pub gender: Gender,
    pub dialect: Dialect,
}

pub fn extract_vowel_features(seg: &VowelSegment) -> Result<FeatureVector, FeatureError> {
    extract_vowel_features_with(seg, &AcousticConfig::default())
}

/// Runs the four analyses on `seg.audio` and assembles the 33 values.
///
/// Formants are sampled over valid frames only and F0 over voiced frames
/// only. With no voiced frame the F0 samples are zero and `meta.unvoiced` is
/// set; with no valid formant frame the segment is rejected.
pub fn extract_vowel_features_with(seg: &VowelSegment, cfg: &AcousticConfig) -> Result<FeatureVector, FeatureError> {
    let span = seg.t_end - seg.t_start;
    if !(span >= MIN_SEGMENT_SECONDS) {
        return Err(FeatureError::SegmentTooShort(span));
    }
    let formants = cfg.formant_track(&seg.audio)?;
    let pitch = cfg.pitch_track(&seg.audio)?;
    let energy = cfg.energy_track(&seg.audio)?;
    let intensity = crate::acoustics::intensity_mean(&seg.audio)?;

    let valid: Vec<_> = formants.iter().filter(|f| f.valid).collect();
    if valid.is_empty() {
        return Err(FeatureError::NoValidFormantFrames);
    }
    let f1: Vec<(f64, f64)> = valid.iter().map(|f| (f.time, f.f1)).collect();
    let f2: Vec<(f64, f64)> = valid.iter().map(|f| (f.time, f.f2)).collect();
    let f3: Vec<(f64, f64)> = valid.iter().map(|f| (f.time, f.f3)).collect();
    let voiced: Vec<(f64, f64)> = pitch.iter().filter(|p| p.voiced()).map(|p| (p.time, p.f0)).collect();
    let en: Vec<(f64, f64)> = energy.iter().map(|e| (e.time, e.energy_db)).collect();

    let mut values = Vec::with_capacity(FEATURE_COUNT);
    for track in [&f1, &f2, &f3] {
        values.extend(sample_six(track, 0.0, span)?);
    }
    let unvoiced = voiced.is_empty();
    if unvoiced {
        values.extend([0.0; SAMPLES_PER_TRACK]);
    } else {
        values.extend(sample_six(&voiced, 0.0, span)?);
    }
    values.extend(sample_six(&en, 0.0, span)?);
    values.push(span * 1000.0);
    values.push(intensity);
    values.push(seg.gender.code());

    Ok(FeatureVector {
        values,
        dialect: seg.dialect,
        meta: SampleMeta {
            sample_id: seg.sample_id.clone(),
            speaker_id: seg.speaker_id.clone(),
            vowel: seg.vowel,
            gender: seg.gender,
            unvoiced,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub wav_path: PathBuf,
    pub textgrid_path: PathBuf,
    pub speaker_id: String,
    pub gender: Gender,
    pub dialect: Dialect,
}

/// Corpus manifest. Relative paths are resolved against `base_dir`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub base_dir: PathBuf,
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn parse(raw: &[u8], base_dir: impl Into<PathBuf>) -> Result<Manifest, FeatureError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(raw);
        let err = |line: usize, message: String| FeatureError::Manifest { line, message };
        let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
        if header.iter().map(str::trim).ne(MANIFEST_HEADER) {
            return Err(err(1, format!("expected header {}", MANIFEST_HEADER.join(","))));
        }
        let mut rows = Vec::new();
        for (k, rec) in reader.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| err(line, e.to_string()))?;
            let field = |i: usize| -> Result<&str, FeatureError> {
                match rec.get(i).map(str::trim) {
                    Some(v) if !v.is_empty() => Ok(v),
                    _ => Err(err(line, format!("missing {}", MANIFEST_HEADER[i]))),
                }
            };
            rows.push(ManifestRow {
                wav_path: PathBuf::from(field(0)?),
                textgrid_path: PathBuf::from(field(1)?),
                speaker_id: field(2)?.to_string(),
                gender: field(3)?.parse().map_err(|e: LabelError| err(line, e.to_string()))?,
                dialect: field(4)?.parse().map_err(|e: LabelError| err(line, e.to_string()))?,
            });
        }
        Ok(Manifest {
            base_dir: base_dir.into(),
            rows,
        })
    }

    pub fn read(path: &Path) -> Result<Manifest, FeatureError> {
        let raw = fs::read(path).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Manifest::parse(&raw, base)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut write = || -> csv::Result<()> {
            w.write_record(MANIFEST_HEADER)?;
            for r in &self.rows {
                w.write_record([
                    r.wav_path.to_string_lossy().as_ref(),
                    r.textgrid_path.to_string_lossy().as_ref(),
                    &r.speaker_id,
                    r.gender.name(),
                    r.dialect.name(),
                ])?;
            }
            w.flush()?;
            Ok(())
        };
        write().expect("writing CSV to memory cannot fail");
        w.into_inner().expect("in-memory writer")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// A manifest entry or vowel segment that could not be turned into a row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionFailure {
    pub path: PathBuf,
    pub sample_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub dataset: Dataset,
    pub failures: Vec<ExtractionFailure>,
}

/// Sample id of the `k`-th vowel interval (0-based) of a recording.
pub fn sample_id(wav_path: &Path, k: usize) -> String {
    let stem = wav_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{stem}#{k}")
}

/// A cut segment, or the sample id and reason it could not be cut.
pub type SegmentResult = Result<VowelSegment, (String, FeatureError)>;

/// Cuts every vowel interval of `tier_name` out of one recording.
pub fn vowel_segments(
    signal: &AudioSignal,
    grid: &textgrid::TextGrid,
    tier_name: &str,
    aliases: &AliasTable,
    row: &ManifestRow,
) -> Result<Vec<SegmentResult>, FeatureError> {
    let intervals = textgrid::vowel_intervals_with(grid, tier_name, aliases)?;
    Ok(intervals
        .into_iter()
        .enumerate()
        .map(|(k, vi)| {
            let id = sample_id(&row.wav_path, k);
            let iv = vi.interval;
            match audio::slice(signal, iv.t_start, iv.t_end) {
                Ok(audio) => Ok(VowelSegment {
                    audio,
                    vowel: vi.vowel,
                    t_start: iv.t_start,
                    t_end: iv.t_end,
                    sample_id: id,
                    speaker_id: row.speaker_id.clone(),
                    gender: row.gender,
                    dialect: row.dialect,
                }),
                Err(e) => Err((id, e.into())),
            }
        })
        .collect())
}

/// Features of every vowel interval of one loaded recording. Segments that
/// fail are reported against `row.wav_path`.
pub fn extract_recording(
    signal: &AudioSignal,
    grid: &textgrid::TextGrid,
    tier_name: &str,
    aliases: &AliasTable,
    row: &ManifestRow,
    cfg: &AcousticConfig,
) -> (Vec<FeatureVector>, Vec<ExtractionFailure>) {
    let fail = |sample_id: Option<String>, e: FeatureError| ExtractionFailure {
        path: row.wav_path.clone(),
        sample_id,
        message: e.to_string(),
    };
    let segments = match vowel_segments(signal, grid, tier_name, aliases, row) {
        Ok(s) => s,
        Err(e) => return (Vec::new(), vec![fail(None, e)]),
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for seg in segments {
        match seg.and_then(|s| extract_vowel_features_with(&s, cfg).map_err(|e| (s.sample_id.clone(), e))) {
            Ok(v) => rows.push(v),
            Err((id, e)) => failures.push(fail(Some(id), e)),
        }
    }
    (rows, failures)
}

fn process_row(
    manifest: &Manifest,
    row: &ManifestRow,
    tier_name: &str,
    aliases: &AliasTable,
    cfg: &AcousticConfig,
) -> (Vec<FeatureVector>, Vec<ExtractionFailure>) {
    let wav = manifest.resolve(&row.wav_path);
    let loaded = (|| -> Result<_, FeatureError> {
        let io = |path: PathBuf| move |source| FeatureError::Io { path, source };
        let signal = audio::read_wav(&fs::read(&wav).map_err(io(wav.clone()))?)?;
        let tg_path = manifest.resolve(&row.textgrid_path);
        let grid = textgrid::parse_textgrid(&fs::read(&tg_path).map_err(io(tg_path.clone()))?)?;
        Ok((signal, grid))
    })();
    match loaded {
        Ok((signal, grid)) => {
            let (rows, mut failures) = extract_recording(&signal, &grid, tier_name, aliases, row, cfg);
            for f in &mut failures {
                f.path = wav.clone();
            }
            (rows, failures)
        }
        Err(e) => (
            Vec::new(),
            vec![ExtractionFailure {
                path: wav,
                sample_id: None,
                message: e.to_string(),
            }],
        ),
    }
}

/// One row per vowel interval of every manifest entry, in manifest order.
/// Unreadable files and failing segments are collected, not fatal.
pub fn build_dataset(
    manifest: &Manifest,
    tier_name: &str,
    aliases: &AliasTable,
    cfg: &AcousticConfig,
) -> Result<BuildOutput, FeatureError> {
    let per_row: Vec<_> = manifest
        .rows
        .par_iter()
        .map(|row| process_row(manifest, row, tier_name, aliases, cfg))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_row {
        rows.extend(r);
        failures.extend(f);
    }
    Ok(BuildOutput {
        dataset: Dataset::new(rows)?,
        failures,
    })
}

/// `x` with six significant digits, in plain notation for exponents in
/// [-5, 6) and scientific notation otherwise.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let fixed = format!("{x:.*}", (5 - exp) as usize);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = CSV_META.iter().map(|s| s.to_string()).collect();
    h.extend(feature_names().into_iter().take(INTENSITY_INDEX + 1));
    h
}

/// Features file: metadata columns, then the 32 numeric columns (gender is
/// carried by the text column). Numbers have six significant digits.
pub fn write_features_csv(d: &Dataset) -> Result<Vec<u8>, FeatureError> {
    if !d.is_full_layout() {
        return Err(FeatureError::InvalidDataset("only full 33-column datasets can be written".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut write = || -> csv::Result<()> {
        w.write_record(csv_header())?;
        for r in d.rows() {
            let mut rec = vec![
                r.meta.sample_id.clone(),
                r.dialect.name().to_string(),
                r.meta.speaker_id.clone(),
                r.meta.gender.name().to_string(),
                r.meta.vowel.symbol().to_string(),
            ];
            rec.extend(r.values[..=INTENSITY_INDEX].iter().map(|&v| format_sig6(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    };
    write().expect("writing CSV to memory cannot fail");
    Ok(w.into_inner().expect("in-memory writer"))
}

pub fn read_features_csv(raw: &[u8]) -> Result<Dataset, FeatureError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(raw);
    let err = |line: usize, message: String| FeatureError::CsvFormat { line, message };
    let expected = csv_header();
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().map(str::trim).ne(expected.iter().map(String::as_str)) {
        return Err(err(1, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        if rec.len() != expected.len() {
            return Err(err(line, format!("expected {} columns, found {}", expected.len(), rec.len())));
        }
        let label = |e: LabelError| err(line, e.to_string());
        let dialect: Dialect = rec[1].parse().map_err(label)?;
        let gender: Gender = rec[3].parse().map_err(label)?;
        let vowel: Vowel = rec[4].parse().map_err(label)?;
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for (j, field) in rec.iter().enumerate().skip(CSV_META.len()) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| err(line, format!("column {} is not a number: {field:?}", expected[j])))?;
            if !v.is_finite() {
                return Err(err(line, format!("column {} is not finite", expected[j])));
            }
            values.push(v);
        }
        values.push(gender.code());
        let unvoiced = values[18..24].iter().all(|&v| v == 0.0);
        rows.push(FeatureVector {
            values,
            dialect,
            meta: SampleMeta {
                sample_id: rec[0].to_string(),
                speaker_id: rec[2].to_string(),
                vowel,
                gender,
                unvoiced,
            },
        });
    }
    Dataset::new(rows)
}

/// Projects `d` onto the columns of `g`; labels and metadata are unchanged.
pub fn select_group(d: &Dataset, g: FeatureGroup) -> Result<Dataset, FeatureError> {
    let all = feature_names();
    let wanted = &all[g.indices()];
    let cols = wanted.iter().map(|n| d.column(n)).collect::<Result<Vec<_>, _>>()?;
    let rows = d
        .rows
        .iter()
        .map(|r| FeatureVector {
            values: cols.iter().map(|&c| r.values[c]).collect(),
            dialect: r.dialect,
            meta: r.meta.clone(),
        })
        .collect();
    Ok(Dataset {
        feature_names: wanted.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VowelShare {
    pub dialect: Dialect,
    pub vowel: Vowel,
    pub count: usize,
    pub percent: f64,
}

/// Vowel counts per dialect, with percentages normalized within each dialect.
/// Only (dialect, vowel) pairs that occur are listed.
pub fn vowel_distribution(d: &Dataset) -> Vec<VowelShare> {
    let mut counts: BTreeMap<(Dialect, Vowel), usize> = BTreeMap::new();
    let mut totals: BTreeMap<Dialect, usize> = BTreeMap::new();
    for r in d.rows() {
        *counts.entry((r.dialect, r.meta.vowel)).or_default() += 1;
        *totals.entry(r.dialect).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((dialect, vowel), count)| VowelShare {
            dialect,
            vowel,
            count,
            percent: 100.0 * count as f64 / totals[&dialect] as f64,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VowelSpacePoint {
    pub dialect: Dialect,
    pub vowel: Vowel,
    pub mean_f2: f64,
    pub mean_f1: f64,
    pub count: usize,
}

/// Mean (F2, F1) per dialect and vowel, each row contributing the mean of
/// its six samples.
pub fn vowel_space(d: &Dataset) -> Result<Vec<VowelSpacePoint>, FeatureError> {
    let f1 = (1..=SAMPLES_PER_TRACK)
        .map(|i| d.column(&format!("f1_{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let f2 = (1..=SAMPLES_PER_TRACK)
        .map(|i| d.column(&format!("f2_{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let mut acc: BTreeMap<(Dialect, Vowel), (f64, f64, usize)> = BTreeMap::new();
    for r in d.rows() {
        let m1 = f1.iter().map(|&c| r.values[c]).sum::<f64>() / SAMPLES_PER_TRACK as f64;
        let m2 = f2.iter().map(|&c| r.values[c]).sum::<f64>() / SAMPLES_PER_TRACK as f64;
        let e = acc.entry((r.dialect, r.meta.vowel)).or_default();
        e.0 += m2;
        e.1 += m1;
        e.2 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|((dialect, vowel), (s2, s1, n))| VowelSpacePoint {
            dialect,
            vowel,
            mean_f2: s2 / n as f64,
            mean_f1: s1 / n as f64,
            count: n,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialectSummary {
    pub dialect: Dialect,
    pub rows: usize,
    pub speakers: usize,
    pub male_speakers: usize,
    pub female_speakers: usize,
}

/// Rows and distinct speakers per dialect, in class order.
pub fn dataset_summary(d: &Dataset) -> Vec<DialectSummary> {
    Dialect::ALL
        .iter()
        .map(|&dialect| {
            let rows: Vec<_> = d.rows().iter().filter(|r| r.dialect == dialect).collect();
            let speakers: BTreeSet<(&str, Gender)> = rows.iter().map(|r| (r.meta.speaker_id.as_str(), r.meta.gender)).collect();
            let male = speakers.iter().filter(|s| s.1 == Gender::Male).count();
            DialectSummary {
                dialect,
                rows: rows.len(),
                speakers: speakers.len(),
                male_speakers: male,
                female_speakers: speakers.len() - male,
            }
        })
        .collect()
}
