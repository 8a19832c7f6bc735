use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use dialect_id::eval::{self, EvaluationReport, SplitResult};
use dialect_id::features::{self, Dataset, FeatureGroup, Manifest};
use dialect_id::forest::{self, ForestParams, GridSpec};
use dialect_id::synth;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::{EvaluateArgs, ExtractArgs, ForestFlags, GridArgs, ImportanceArgs, ReportArgs, SynthArgs, TrainArgs};

/// Which rows of a features file a model was trained and tested on.
#[derive(Debug, Serialize, Deserialize)]
pub struct SplitRecord {
    pub format_version: String,
    pub features_rows: usize,
    pub group: String,
    pub seed: u64,
    pub test_fraction: f64,
    #[serde(flatten)]
    pub split: SplitResult,
}

/// `model.json` → `model.split.json`.
pub fn split_path(model: &Path) -> PathBuf {
    model.with_extension("split.json")
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_features(path: &Path) -> Result<Dataset> {
    features::read_features_csv(&read(path)?).with_context(|| format!("in features file {}", path.display()))
}

fn read_model(path: &Path) -> Result<forest::RandomForestModel> {
    forest::load_model(&read(path)?).with_context(|| format!("in model file {}", path.display()))
}

fn forest_params(cfg: &PipelineConfig, flags: &ForestFlags, seed: u64) -> Result<ForestParams> {
    let mut p = cfg.forest_params(seed);
    p.n_estimators = flags.n_estimators.unwrap_or(p.n_estimators);
    p.max_features = flags.max_features.unwrap_or(p.max_features);
    p.min_samples_split = flags.min_samples_split.unwrap_or(p.min_samples_split);
    p.max_depth = flags.max_depth.or(p.max_depth);
    p.bootstrap &= !flags.no_bootstrap;
    p.validate()?;
    Ok(p)
}

/// The stratified split of the full features file and the group projection.
fn split_dataset(d: &Dataset, group: FeatureGroup, test_fraction: f64, seed: u64) -> Result<(Dataset, SplitRecord)> {
    ensure!(!d.is_empty(), "the features file has no rows");
    let split = eval::stratified_split(d, test_fraction, seed)?;
    let projected = features::select_group(d, group)?;
    let record = SplitRecord {
        format_version: "1".into(),
        features_rows: d.len(),
        group: group.name().into(),
        seed,
        test_fraction,
        split,
    };
    Ok((projected, record))
}

fn train_and_save(projected: &Dataset, record: &SplitRecord, params: &ForestParams, out: &Path) -> Result<forest::RandomForestModel> {
    let model = forest::train_forest(&projected.subset(&record.split.train_indices), params)?;
    write(out, forest::save_model(&model))?;
    write(&split_path(out), serde_json::to_vec_pretty(record)?)?;
    Ok(model)
}

pub fn synth_corpus(cfg: &PipelineConfig, a: SynthArgs) -> Result<()> {
    let seed = a.seed.unwrap_or(cfg.seed);
    let manifest = synth::generate_corpus(&a.profile.dialect_specs(), a.speakers, a.vowels_per_speaker, seed, &a.out)?;
    println!("{} profile: {} recordings, seed {seed}", a.profile.name(), manifest.rows.len());
    println!("{}", a.out.join("manifest.csv").display());
    Ok(())
}

pub fn extract(cfg: &PipelineConfig, a: ExtractArgs) -> Result<()> {
    let manifest = Manifest::read(&a.manifest)?;
    let aliases = cfg.aliases(a.aliases.as_deref())?;
    let tier = a.tier.as_deref().unwrap_or(&cfg.tier);
    let out = features::build_dataset(&manifest, tier, &aliases, &cfg.acoustics)?;
    for f in &out.failures {
        match &f.sample_id {
            Some(id) => eprintln!("failed: {} [{id}]: {}", f.path.display(), f.message),
            None => eprintln!("failed: {}: {}", f.path.display(), f.message),
        }
    }
    println!(
        "extracted {} vowels from {} recordings, {} failures",
        out.dataset.len(),
        manifest.rows.len(),
        out.failures.len()
    );
    if out.dataset.is_empty() {
        bail!("no vowel could be extracted");
    }
    write(&a.out, features::write_features_csv(&out.dataset)?)
}

pub fn train(cfg: &PipelineConfig, a: TrainArgs) -> Result<()> {
    let seed = a.seed.unwrap_or(cfg.seed);
    let params = forest_params(cfg, &a.forest, seed)?;
    let d = read_features(&a.features)?;
    let (projected, record) = split_dataset(&d, a.group, a.test_fraction.unwrap_or(cfg.test_fraction), seed)?;
    let model = train_and_save(&projected, &record, &params, &a.out)?;
    println!(
        "trained {} trees on {} rows ({} group, {} features); {} rows held out",
        params.n_estimators,
        record.split.train_indices.len(),
        a.group.name(),
        model.n_features(),
        record.split.test_indices.len()
    );
    if let Some(oob) = model.oob_accuracy {
        println!("out-of-bag accuracy: {oob:.6}");
    }
    println!("{}", a.out.display());
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let d = read_features(&a.features)?;
    let split_file = a.split.unwrap_or_else(|| split_path(&a.model));
    let record: SplitRecord =
        serde_json::from_slice(&read(&split_file)?).with_context(|| format!("in split record {}", split_file.display()))?;
    ensure!(
        record.features_rows == d.len(),
        "split record covers {} rows but the features file has {}",
        record.features_rows,
        d.len()
    );
    let group: FeatureGroup = record.group.parse()?;
    let projected = features::select_group(&d, group)?;
    ensure!(
        projected.feature_names() == model.feature_names.as_slice(),
        "dimension mismatch: the model expects {} features, the {} group has {}",
        model.n_features(),
        group.name(),
        projected.n_features()
    );
    let test = projected.subset(&record.split.test_indices);
    let predicted = model.predict_dataset(&test)?;
    let report = EvaluationReport::from_predictions(&test.labels(), &predicted, &model.class_names)?;
    print!("{}", report.render_text());
    if let Some(out) = &a.out {
        write(out, report.to_csv(!a.counts))?;
    }
    Ok(())
}

pub fn grid_search(cfg: &PipelineConfig, a: GridArgs) -> Result<()> {
    let seed = a.seed.unwrap_or(cfg.seed);
    let d = read_features(&a.features)?;
    let (projected, record) = split_dataset(&d, a.group, a.test_fraction.unwrap_or(cfg.test_fraction), seed)?;
    let grid = GridSpec {
        n_estimators: a.n_estimators,
        max_features: a.max_features,
    };
    let base = cfg.forest_params(seed);
    let train = projected.subset(&record.split.train_indices);
    let result = forest::grid_search(&train, &grid, a.folds, seed, &base)?;
    let table = result.to_csv();
    print!("{table}");
    println!(
        "best: n_estimators {} max_features {} (mean accuracy {:.6})",
        result.best.n_estimators, result.best.max_features, result.table[result.best_index].mean_accuracy
    );
    if let Some(path) = &a.table {
        write(path, &table)?;
    }
    if let Some(out) = &a.out {
        train_and_save(&projected, &record, &result.best, out)?;
        println!("{}", out.display());
    }
    Ok(())
}

pub fn report(a: ReportArgs) -> Result<()> {
    let d = read_features(&a.features)?;
    ensure!(!d.is_empty(), "the features file has no rows");

    let mut dist = String::from("dialect,vowel,count,percent\n");
    for s in features::vowel_distribution(&d) {
        writeln!(dist, "{},{},{},{:.2}", s.dialect, s.vowel, s.count, s.percent)?;
    }
    let mut space = String::from("dialect,vowel,mean_f2,mean_f1\n");
    for p in features::vowel_space(&d)? {
        writeln!(space, "{},{},{:.2},{:.2}", p.dialect, p.vowel, p.mean_f2, p.mean_f1)?;
    }
    let mut summary = String::from("dialect,rows,speakers,male_speakers,female_speakers\n");
    for s in features::dataset_summary(&d) {
        writeln!(
            summary,
            "{},{},{},{},{}",
            s.dialect, s.rows, s.speakers, s.male_speakers, s.female_speakers
        )?;
    }

    println!("# vowel distribution\n{dist}\n# vowel space\n{space}\n# summary\n{summary}");
    if let Some(dir) = &a.out {
        write(&dir.join("vowel_distribution.csv"), &dist)?;
        write(&dir.join("vowel_space.csv"), &space)?;
        write(&dir.join("summary.csv"), &summary)?;
    }
    Ok(())
}

pub fn importance(a: ImportanceArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let imp = model.feature_importances();
    let mut order: Vec<usize> = (0..imp.len()).collect();
    order.sort_by(|&x, &y| imp[y].total_cmp(&imp[x]).then(x.cmp(&y)));
    let mut csv = String::from("feature,importance\n");
    for &i in &order {
        println!("{:<14} {:.6}", model.feature_names[i], imp[i]);
        writeln!(csv, "{},{:.9}", model.feature_names[i], imp[i])?;
    }
    println!("sum: {:.6}", imp.iter().sum::<f64>());
    if let Some(out) = &a.out {
        write(out, &csv)?;
    }
    Ok(())
}
