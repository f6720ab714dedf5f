//! Command implementations.
//!
//! Every artifact is assembled in memory first and written by a single
//! loop at the very end of a successful run, so a failure at any stage
//! leaves no partial output behind.

use std::fs;
use std::path::{Path, PathBuf};

use lagdep_core::basis::BasisSpec;
use lagdep_core::causality::pairwise_causality_map;
use lagdep_core::coeffs::{lag_sweep, pearson_sweep, CoeffTensor};
use lagdep_core::error::Error as CoreError;
use lagdep_core::normalize::{gauss_normalize, p_normalize, NormKind, NormalizedSeries};
use lagdep_core::pca::{contribution_grid, features_from_tensor, FeatureSet};
use lagdep_core::signal::{generate_synthetic, load_csv, write_csv, LoadOptions, Recording, SynthSpec};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::{
    config_parameters, input_summary, manifest, sha256_hex, to_json_bytes, SCHEMA_VERSION,
};
use crate::svg::{heatmap_svg, line_chart, matrix_heatmap_svg};

/// What a successful run wrote.
#[derive(Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
}

fn with_context(e: CoreError, context: &str) -> CliError {
    match CliError::from(e) {
        CliError::Config(m) => CliError::Config(format!("{context}: {m}")),
        CliError::Io(m) => CliError::Io(format!("{context}: {m}")),
        CliError::Analysis(m) => CliError::Analysis(format!("{context}: {m}")),
    }
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Analysis(format!("thread pool: {e}")))
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn pair_stem(index: usize, a: &str, b: &str) -> String {
    format!("pair_{index:02}_{}__{}", sanitize(a), sanitize(b))
}

/// Staged output files: relative name plus content, written all at once.
struct Staged {
    files: Vec<(String, Vec<u8>)>,
}

impl Staged {
    fn new() -> Self {
        Staged { files: Vec::new() }
    }

    fn add(&mut self, name: String, bytes: Vec<u8>) {
        self.files.push((name, bytes));
    }

    fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.files.iter().map(|(n, _)| n.clone()).collect();
        names.sort();
        names
    }

    /// Writes everything into `dir`, removing whatever was already written
    /// if any single write fails.
    fn write_all(self, dir: &Path) -> Result<Vec<String>> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            match fs::write(&path, bytes) {
                Ok(()) => written.push(path),
                Err(e) => {
                    for done in &written {
                        let _ = fs::remove_file(done);
                    }
                    return Err(CliError::Io(format!("writing {}: {e}", path.display())));
                }
            }
        }
        Ok(self.names())
    }
}

fn read_input(cfg: &RunConfig) -> Result<(Recording, String)> {
    let path = cfg.input.as_ref().expect("validated");
    let raw = fs::read(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let digest = sha256_hex(&raw);
    let opts = LoadOptions {
        id_column: cfg.id_column.clone(),
        channels: cfg.channels.clone(),
        sample_rate_hz: cfg.sample_rate_hz,
    };
    let rec = load_csv(path, &opts).map_err(|e| with_context(e, "loading input"))?;
    Ok((rec, digest))
}

fn normalize_channels(rec: &Recording, cfg: &RunConfig) -> Result<Vec<NormalizedSeries>> {
    let pnorm = cfg.pnorm();
    rec.channel_names()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let ctx = format!("normalizing channel '{name}'");
            match cfg.norm {
                NormKind::Basic => gauss_normalize(rec.channel(i)),
                NormKind::Predicted => p_normalize(rec.channel(i), &pnorm).map(|o| o.series),
            }
            .map_err(|e| with_context(e, &ctx))
        })
        .collect()
}

struct PairResult {
    first: String,
    second: String,
    autocorrelation: bool,
    stem: String,
    tensor: CoeffTensor,
    features: FeatureSet,
    pearson: Vec<f64>,
}

fn lag_seconds(lags: &[i64], rate: f64) -> Vec<f64> {
    lags.iter().map(|&l| l as f64 / rate).collect()
}

fn features_csv(pr: &PairResult, rate: f64) -> Vec<u8> {
    let mut text = String::from("lag_samples,lag_seconds");
    text.push_str(",pearson");
    for i in 1..=pr.features.curves.len() {
        text.push_str(&format!(",feature_{i}"));
    }
    text.push('\n');
    for (l, &lag) in pr.features.lags.iter().enumerate() {
        text.push_str(&format!("{lag},{}", lag as f64 / rate));
        text.push_str(&format!(",{}", pr.pearson[l]));
        for curve in &pr.features.curves {
            text.push_str(&format!(",{}", curve[l]));
        }
        text.push('\n');
    }
    text.into_bytes()
}

fn pair_report_entry(pr: &PairResult, rate: f64, files: &[String]) -> Value {
    json!({
        "first": pr.first,
        "second": pr.second,
        "autocorrelation": pr.autocorrelation,
        "lags_samples": pr.features.lags,
        "lags_seconds": lag_seconds(&pr.features.lags, rate),
        "pearson": pr.pearson,
        "features": pr.features,
        "files": files,
    })
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let out_dir = cfg.output_dir.clone().expect("validated");
    let (rec, digest) = read_input(cfg)?;
    let n = rec.num_channels();
    let cross_pairs = n * (n - 1) / 2;
    if cross_pairs > cfg.max_pairs {
        return Err(CliError::Config(format!(
            "{n} channels give {cross_pairs} pairs, above the limit of {}; \
             raise --max-pairs to opt in",
            cfg.max_pairs
        )));
    }
    let max_lag = cfg.max_lag_samples();
    if max_lag < 1 {
        return Err(CliError::Config(format!(
            "lag window of {}s at {} Hz spans no samples",
            cfg.max_lag_seconds, cfg.sample_rate_hz
        )));
    }

    let pool = build_pool(cfg.workers)?;
    let normalized = pool.install(|| normalize_channels(&rec, cfg))?;

    let names = rec.channel_names();
    let mut tasks: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            tasks.push((i, j));
        }
    }
    for i in 0..n {
        tasks.push((i, i));
    }

    let spec = BasisSpec { max_degree: cfg.degree };
    let rate = rec.sample_rate_hz();
    let results: Vec<PairResult> = pool.install(|| {
        tasks
            .par_iter()
            .enumerate()
            .map(|(task_index, &(i, j))| {
                let auto = i == j;
                let ctx = format!("pair {}/{}", names[i], names[j]);
                let range = if auto { 1..=max_lag } else { -max_lag..=max_lag };
                let tensor = lag_sweep(&normalized[i], &normalized[j], &spec, range)
                    .map_err(|e| with_context(e, &ctx))?
                    .with_meta((names[i].clone(), names[j].clone()), rate);
                let features = features_from_tensor(
                    &tensor,
                    cfg.pool,
                    cfg.marginal_removal,
                    cfg.center,
                    cfg.top_r,
                )
                .map_err(|e| with_context(e, &ctx))?;
                let pearson = pearson_sweep(&normalized[i], &normalized[j], &tensor.lags)
                    .map_err(|e| with_context(e, &ctx))?;
                Ok(PairResult {
                    first: names[i].clone(),
                    second: names[j].clone(),
                    autocorrelation: auto,
                    stem: pair_stem(task_index, &names[i], &names[j]),
                    tensor,
                    features,
                    pearson,
                })
            })
            .collect::<Result<_>>()
    })?;

    let mut staged = Staged::new();
    let mut pair_entries = Vec::new();
    for pr in &results {
        let mut files = Vec::new();
        if cfg.formats.csv {
            let name = format!("{}.features.csv", pr.stem);
            staged.add(name.clone(), features_csv(pr, rate));
            files.push(name);

            let name = format!("{}.coeffs.csv", pr.stem);
            let mut buf = Vec::new();
            pr.tensor
                .write_csv(&mut buf)
                .map_err(|e| with_context(e, "serializing coefficients"))?;
            staged.add(name.clone(), buf);
            files.push(name);
        }
        if cfg.formats.binary {
            let name = format!("{}.coeffs.bin", pr.stem);
            let mut buf = Vec::new();
            pr.tensor
                .write_binary(&mut buf)
                .map_err(|e| with_context(e, "serializing coefficients"))?;
            staged.add(name.clone(), buf);
            files.push(name);
        }
        for (fi, vector) in pr.features.vectors.iter().enumerate() {
            let grid = contribution_grid(vector, &pr.features.index_map, cfg.grid_resolution);
            if cfg.formats.csv {
                let name = format!("{}.contribution_{}.csv", pr.stem, fi + 1);
                let mut buf = Vec::new();
                grid.write_csv(&mut buf)
                    .map_err(|e| with_context(e, "serializing contribution grid"))?;
                staged.add(name.clone(), buf);
                files.push(name);
            }
            if cfg.formats.svg {
                let name = format!("{}.contribution_{}.svg", pr.stem, fi + 1);
                let title = format!(
                    "feature {} pattern: {} vs {}",
                    fi + 1,
                    pr.first,
                    pr.second
                );
                let svg = heatmap_svg(
                    &title,
                    &format!("{} (normalized)", pr.second),
                    &format!("{} (normalized)", pr.first),
                    &grid,
                )?;
                staged.add(name.clone(), svg.into_bytes());
                files.push(name);
            }
        }
        if cfg.formats.svg {
            let name = format!("{}.features.svg", pr.stem);
            let xs = lag_seconds(&pr.features.lags, rate);
            let mut series: Vec<(String, Vec<f64>)> = pr
                .features
                .curves
                .iter()
                .enumerate()
                .map(|(i, c)| (format!("feature {}", i + 1), c.clone()))
                .collect();
            series.push(("Pearson r".to_string(), pr.pearson.clone()));
            let title = format!("lag features: {} vs {}", pr.first, pr.second);
            let svg = line_chart(
                &title,
                "lag (s)",
                if cfg.normalize_curves { "projection (peak-normalized)" } else { "projection" },
                &xs,
                &series,
                cfg.normalize_curves,
            )?;
            staged.add(name.clone(), svg.into_bytes());
            files.push(name);
        }
        pair_entries.push(pair_report_entry(pr, rate, &files));
    }

    let input = input_summary(&rec, &digest);
    let parameters = config_parameters(cfg)?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "mode": "analyze",
        "software_version": crate::report::software_version(),
        "input": input,
        "parameters": parameters,
        "max_lag_samples": max_lag,
        "pairs": pair_entries,
    });
    staged.add("report.json".to_string(), to_json_bytes(&report));

    let outputs = staged.names();
    let mf = manifest("analyze", input, parameters, &outputs);
    staged.add("manifest.json".to_string(), to_json_bytes(&mf));

    let files = staged.write_all(&out_dir)?;
    Ok(RunSummary {
        output_dir: out_dir,
        files,
    })
}

pub fn cmd_causality(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    if cfg.delays.is_empty() {
        return Err(CliError::Config("causality needs at least one report delay".into()));
    }
    let out_dir = cfg.output_dir.clone().expect("validated");
    let (rec, digest) = read_input(cfg)?;
    let n = rec.num_channels();
    let ordered_pairs = n * n.saturating_sub(1);
    if ordered_pairs > cfg.max_pairs {
        return Err(CliError::Config(format!(
            "{n} channels give {ordered_pairs} directed pairs, above the limit of {}; \
             raise --max-pairs to opt in",
            cfg.max_pairs
        )));
    }
    let max_delay = cfg
        .max_delay
        .unwrap_or_else(|| *cfg.delays.iter().max().expect("nonempty"));

    let pool = build_pool(cfg.workers)?;
    let spec = BasisSpec { max_degree: cfg.degree };
    let analysis = pool
        .install(|| {
            pairwise_causality_map(&rec, &cfg.delays, max_delay, &spec, &cfg.pnorm(), cfg.top_r)
        })
        .map_err(|e| with_context(e, "pairwise screening"))?;

    let rate = rec.sample_rate_hz();
    let mut staged = Staged::new();
    let map = &analysis.map;

    for (slot, &d) in map.delays.iter().enumerate() {
        if cfg.formats.csv {
            let mut text = String::from("reason");
            for name in &map.channels {
                text.push_str(&format!(",{name}"));
            }
            text.push('\n');
            for (i, name) in map.channels.iter().enumerate() {
                text.push_str(name);
                for j in 0..map.channels.len() {
                    match map.scores[slot][i][j] {
                        Some(v) => text.push_str(&format!(",{v}")),
                        None => text.push(','),
                    }
                }
                text.push('\n');
            }
            staged.add(format!("causality_map_delay_{d:04}.csv", d = d), text.into_bytes());
        }
        if cfg.formats.svg {
            let title = format!("causality at delay {d} samples ({:.4} s)", d as f64 / rate);
            let svg = matrix_heatmap_svg(&title, &map.channels, &map.scores[slot])?;
            staged.add(format!("causality_map_delay_{d:04}.svg", d = d), svg.into_bytes());
        }
    }

    let mut pair_entries = Vec::new();
    for (idx, pc) in analysis.curves.iter().enumerate() {
        let stem = pair_stem(idx, &pc.reason, &pc.result);
        let mut files = Vec::new();
        let seconds = lag_seconds(&pc.curve.delays, rate);
        if cfg.formats.csv {
            let name = format!("{stem}.causality.csv");
            let mut text = String::from("delay_samples,delay_seconds,score\n");
            for (l, &d) in pc.curve.delays.iter().enumerate() {
                text.push_str(&format!("{d},{},{}\n", seconds[l], pc.curve.scores[l]));
            }
            staged.add(name.clone(), text.into_bytes());
            files.push(name);
        }
        if cfg.formats.svg {
            let name = format!("{stem}.causality.svg");
            let title = format!("causality: {} as reason of {}", pc.reason, pc.result);
            let series = vec![("score".to_string(), pc.curve.scores.clone())];
            let svg = line_chart(
                &title,
                "delay (s)",
                "dependency score",
                &seconds,
                &series,
                cfg.normalize_curves,
            )?;
            staged.add(name.clone(), svg.into_bytes());
            files.push(name);
        }
        pair_entries.push(json!({
            "reason": pc.reason,
            "result": pc.result,
            "delays_samples": pc.curve.delays,
            "delays_seconds": seconds,
            "scores": pc.curve.scores,
            "files": files,
        }));
    }

    let input = input_summary(&rec, &digest);
    let parameters = config_parameters(cfg)?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "mode": "causality",
        "software_version": crate::report::software_version(),
        "input": input,
        "parameters": parameters,
        "max_delay_samples": max_delay,
        "delays_seconds": lag_seconds(&map.delays, rate),
        "map": map,
        "models": analysis.models,
        "pairs": pair_entries,
    });
    staged.add("report.json".to_string(), to_json_bytes(&report));

    let outputs = staged.names();
    let mf = manifest("causality", input, parameters, &outputs);
    staged.add("manifest.json".to_string(), to_json_bytes(&mf));

    let files = staged.write_all(&out_dir)?;
    Ok(RunSummary {
        output_dir: out_dir,
        files,
    })
}

pub fn cmd_synth(spec_path: &Path, out_path: &Path) -> Result<RunSummary> {
    let raw = fs::read_to_string(spec_path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", spec_path.display())))?;
    let spec: SynthSpec = serde_json::from_str(&raw)
        .map_err(|e| CliError::Config(format!("bad synthesis spec {}: {e}", spec_path.display())))?;
    let rec = generate_synthetic(&spec).map_err(|e| with_context(e, "generating"))?;
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    write_csv(&rec, out_path).map_err(|e| with_context(e, "writing output"))?;
    let csv_bytes = fs::read(out_path)
        .map_err(|e| CliError::Io(format!("reading back {}: {e}", out_path.display())))?;

    let mut manifest_path = out_path.as_os_str().to_owned();
    manifest_path.push(".manifest.json");
    let manifest_path = PathBuf::from(manifest_path);
    let file_name = out_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mf = manifest(
        "synth",
        json!({
            "spec_digest_sha256": sha256_hex(raw.as_bytes()),
            "spec": spec,
        }),
        json!({ "output_digest_sha256": sha256_hex(&csv_bytes) }),
        &[file_name.clone()],
    );
    if let Err(e) = fs::write(&manifest_path, to_json_bytes(&mf)) {
        let _ = fs::remove_file(out_path);
        return Err(CliError::Io(format!(
            "writing {}: {e}",
            manifest_path.display()
        )));
    }

    Ok(RunSummary {
        output_dir: out_path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        files: vec![
            file_name,
            manifest_path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
        ],
    })
}
