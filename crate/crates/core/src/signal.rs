//! Multichannel recordings: CSV I/O, windowing, synthetic generation.
//!
//! The CSV dialect is deliberately narrow: comma separated, "." decimal
//! point, mandatory header row, every non-id cell a finite real. An id
//! column is either named explicitly or detected when the first column of
//! the first data row fails to parse as a number. Row numbers in errors are
//! 1-based file lines (the header is line 1).

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// An immutable set of equally long channels sampled at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    names: Vec<String>,
    data: Vec<Vec<f64>>,
    sample_rate_hz: f64,
}

impl Recording {
    /// Validates and assembles a recording: at least one channel, unique
    /// names, equal lengths of at least 2, finite samples, positive rate.
    pub fn new(names: Vec<String>, data: Vec<Vec<f64>>, sample_rate_hz: f64) -> Result<Self> {
        if names.is_empty() || names.len() != data.len() {
            return Err(Error::invalid(format!(
                "{} channel names for {} channels",
                names.len(),
                data.len()
            )));
        }
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::DuplicateChannel(name.clone()));
            }
        }
        let len = data[0].len();
        if len < 2 {
            return Err(Error::InsufficientData {
                context: "recording",
                required: 2,
                actual: len,
            });
        }
        for (name, ch) in names.iter().zip(&data) {
            if ch.len() != len {
                return Err(Error::invalid(format!(
                    "channel \"{name}\" has length {}, expected {len}",
                    ch.len()
                )));
            }
            if let Some(t) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "channel \"{name}\" has a non-finite sample at index {t}"
                )));
            }
        }
        Ok(Recording {
            names,
            data,
            sample_rate_hz,
        })
    }

    pub fn channel_names(&self) -> &[String] {
        &self.names
    }

    pub fn num_channels(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.data[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.data[index]
    }

    pub fn channel_by_name(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.data[i].as_slice())
            .ok_or_else(|| Error::MissingChannel(name.to_string()))
    }
}

/// Options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Name of the id column to skip; when `None` the first column is
    /// treated as an id if its first data value does not parse as a number.
    pub id_column: Option<String>,
    /// Restrict loading to these channels, in this order.
    pub channels: Option<Vec<String>>,
    pub sample_rate_hz: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            id_column: None,
            channels: None,
            sample_rate_hz: 500.0,
        }
    }
}

/// Loads a recording from CSV. See the module docs for the dialect.
pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Recording> {
    let file = fs::File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if headers.is_empty() {
        return Err(Error::Csv("empty header row".into()));
    }

    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec.map_err(|e| Error::Csv(e.to_string()))?);
    }
    if records.is_empty() {
        return Err(Error::InsufficientData {
            context: "load_csv",
            required: 2,
            actual: 0,
        });
    }

    let id_index = match &opts.id_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingChannel(name.clone()))?,
        ),
        None => {
            let first = records[0].get(0).unwrap_or("");
            if first.trim().parse::<f64>().is_err() {
                Some(0)
            } else {
                None
            }
        }
    };

    let value_columns: Vec<usize> = (0..headers.len())
        .filter(|i| Some(*i) != id_index)
        .collect();
    let selected: Vec<usize> = match &opts.channels {
        Some(wanted) => {
            let mut cols = Vec::with_capacity(wanted.len());
            for name in wanted {
                let col = value_columns
                    .iter()
                    .copied()
                    .find(|&c| headers[c] == *name)
                    .ok_or_else(|| Error::MissingChannel(name.clone()))?;
                cols.push(col);
            }
            cols
        }
        None => value_columns,
    };
    if selected.is_empty() {
        return Err(Error::Csv("no value columns in header".into()));
    }

    let mut data: Vec<Vec<f64>> = vec![Vec::with_capacity(records.len()); selected.len()];
    for (r, rec) in records.iter().enumerate() {
        let line = r + 2; // header is line 1
        if rec.len() != headers.len() {
            return Err(Error::RaggedRow {
                row: line,
                expected: headers.len(),
                found: rec.len(),
            });
        }
        for (slot, &col) in selected.iter().enumerate() {
            let raw = rec.get(col).unwrap().trim();
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row: line,
                column: headers[col].clone(),
                message: format!("cannot parse \"{raw}\" as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: line,
                    column: headers[col].clone(),
                });
            }
            data[slot].push(v);
        }
    }

    let names = selected.iter().map(|&c| headers[c].clone()).collect();
    Recording::new(names, data, opts.sample_rate_hz)
}

/// Writes a recording as CSV with a header row. Values use the shortest
/// representation that round-trips exactly, so load_csv(write_csv(r)) == r.
pub fn write_csv(rec: &Recording, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", rec.channel_names().join(","))?;
    let mut line = String::new();
    for t in 0..rec.len() {
        line.clear();
        for c in 0..rec.num_channels() {
            if c > 0 {
                line.push(',');
            }
            let _ = write!(line, "{}", rec.channel(c)[t]);
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Copies the half-open sample range [start, end) of every channel.
pub fn select_window(rec: &Recording, start: usize, end: usize) -> Result<Recording> {
    if start >= end || end > rec.len() {
        return Err(Error::invalid(format!(
            "window [{start}, {end}) out of range for length {}",
            rec.len()
        )));
    }
    let data = (0..rec.num_channels())
        .map(|c| rec.channel(c)[start..end].to_vec())
        .collect();
    Recording::new(rec.channel_names().to_vec(), data, rec.sample_rate_hz())
}

/// One generated channel of a [`SynthSpec`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Component {
    /// Channel name; defaults to ch0, ch1, ... by position.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: ComponentKind,
}

/// Generator kinds. `source` must name an earlier component, which rules
/// out circular references by construction.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ComponentKind {
    /// Independent N(0, sd^2) samples.
    IidGaussian {
        #[serde(default = "default_one")]
        sd: f64,
    },
    /// x_t = sum_i coefficients[i] * x_{t-1-i} + N(0, noise_sd^2).
    Ar {
        coefficients: Vec<f64>,
        #[serde(default = "default_one")]
        noise_sd: f64,
    },
    /// x_t = gain * source_{t-lag} + N(0, noise_sd^2); pure noise before
    /// the source history exists.
    LaggedCopy {
        source: String,
        lag: usize,
        gain: f64,
        #[serde(default)]
        noise_sd: f64,
    },
    /// Conditional-variance coupling: x_t = gain * |source_{t-lag}| * n_t
    /// with n_t iid N(0, 1). The conditional mean is identically zero, so
    /// the channel is uncorrelated with its source. Zero before the source
    /// history exists.
    VarianceCoupling { source: String, lag: usize, gain: f64 },
}

fn default_one() -> f64 {
    1.0
}

fn default_rate() -> f64 {
    500.0
}

/// Deterministic synthetic recording description.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthSpec {
    pub length: usize,
    pub seed: u64,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
    pub components: Vec<Component>,
}

/// Generates the recording described by `spec`. The same spec always
/// produces bit-identical output: a single seeded ChaCha8 stream drives the
/// components in declaration order.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Recording> {
    if spec.components.is_empty() {
        return Err(Error::invalid("synthetic spec has no components"));
    }
    if spec.length < 2 {
        return Err(Error::InsufficientData {
            context: "generate_synthetic",
            required: 2,
            actual: spec.length,
        });
    }
    let names: Vec<String> = spec
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| c.name.clone().unwrap_or_else(|| format!("ch{i}")))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data: Vec<Vec<f64>> = Vec::with_capacity(spec.components.len());
    for (i, comp) in spec.components.iter().enumerate() {
        let ch = generate_component(comp, &names[..i], &data, spec.length, &mut rng)
            .map_err(|e| match e {
                Error::InvalidArgument(msg) => {
                    Error::invalid(format!("component \"{}\": {msg}", names[i]))
                }
                other => other,
            })?;
        data.push(ch);
    }
    Recording::new(names, data, spec.sample_rate_hz)
}

fn generate_component(
    comp: &Component,
    earlier_names: &[String],
    earlier: &[Vec<f64>],
    length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let noise = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let resolve = |source: &str| -> Result<usize> {
        earlier_names
            .iter()
            .position(|n| n == source)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "source \"{source}\" must name an earlier component"
                ))
            })
    };
    let mut out = Vec::with_capacity(length);
    match &comp.kind {
        ComponentKind::IidGaussian { sd } => {
            if !(*sd > 0.0) {
                return Err(Error::invalid("sd must be positive"));
            }
            for _ in 0..length {
                out.push(sd * noise(rng));
            }
        }
        ComponentKind::Ar {
            coefficients,
            noise_sd,
        } => {
            if coefficients.is_empty() {
                return Err(Error::invalid("ar component needs coefficients"));
            }
            if !(*noise_sd > 0.0) {
                return Err(Error::invalid("noise_sd must be positive"));
            }
            for t in 0..length {
                let mut v = noise_sd * noise(rng);
                for (i, &c) in coefficients.iter().enumerate() {
                    if t > i {
                        v += c * out[t - 1 - i];
                    }
                }
                if !v.is_finite() {
                    return Err(Error::invalid(
                        "ar recursion diverged (unstable coefficients)",
                    ));
                }
                out.push(v);
            }
        }
        ComponentKind::LaggedCopy {
            source,
            lag,
            gain,
            noise_sd,
        } => {
            let src = &earlier[resolve(source)?];
            if *noise_sd < 0.0 {
                return Err(Error::invalid("noise_sd must be non-negative"));
            }
            for t in 0..length {
                let n = noise(rng); // always drawn, keeps the stream aligned
                let base = if t >= *lag { gain * src[t - lag] } else { 0.0 };
                out.push(base + noise_sd * n);
            }
        }
        ComponentKind::VarianceCoupling { source, lag, gain } => {
            let src = &earlier[resolve(source)?];
            if !(*gain > 0.0) {
                return Err(Error::invalid("gain must be positive"));
            }
            for t in 0..length {
                let n = noise(rng);
                let sd = if t >= *lag {
                    gain * src[t - lag].abs()
                } else {
                    0.0
                };
                out.push(sd * n);
            }
        }
    }
    Ok(out)
}
