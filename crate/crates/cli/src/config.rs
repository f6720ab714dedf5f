//! Run configuration: defaults, file form, flag overrides, validation.

use std::path::PathBuf;

use lagdep_core::normalize::{NormKind, PNormConfig};
use lagdep_core::pca::PoolMode;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Which artifact families a run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Formats {
    pub csv: bool,
    pub svg: bool,
    pub binary: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            csv: true,
            svg: true,
            binary: false,
        }
    }
}

/// Complete description of an analysis or causality run. The file form is
/// JSON with every field optional; missing fields take these defaults, and
/// a serialized config reloads to an equal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// Channel subset in the requested order; everything when absent.
    pub channels: Option<Vec<String>>,
    /// Name of a non-signal column to skip; autodetected when absent.
    pub id_column: Option<String>,
    pub sample_rate_hz: f64,
    pub max_lag_seconds: f64,
    /// Highest basis degree m.
    pub degree: usize,
    /// Number of leading features r.
    pub top_r: usize,
    pub pool: PoolMode,
    pub center: bool,
    pub marginal_removal: bool,
    /// Normalization used for both sides of correlation analysis.
    pub norm: NormKind,
    pub ar_order: usize,
    pub nu_grid: Vec<f64>,
    pub ema_grid: Vec<f64>,
    pub grid_resolution: usize,
    /// Guard on the number of analyzed pairs; large sweeps need explicit
    /// opt-in by raising it.
    pub max_pairs: usize,
    /// Worker threads; the rayon default when absent.
    pub workers: Option<usize>,
    pub seed: u64,
    /// Divide each curve by its own peak magnitude in plots.
    pub normalize_curves: bool,
    pub formats: Formats,
    /// Delays reported in the causality map, in samples.
    pub delays: Vec<i64>,
    /// Causality sweep bound in samples; max of `delays` when absent.
    pub max_delay: Option<i64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pnorm = PNormConfig::default();
        RunConfig {
            input: None,
            output_dir: None,
            channels: None,
            id_column: None,
            sample_rate_hz: 500.0,
            max_lag_seconds: 1.0,
            degree: 10,
            top_r: 3,
            pool: PoolMode::Interior,
            center: true,
            marginal_removal: true,
            norm: NormKind::Basic,
            ar_order: pnorm.ar_order,
            nu_grid: pnorm.nu_grid,
            ema_grid: pnorm.ema_grid,
            grid_resolution: 101,
            max_pairs: 16,
            workers: None,
            seed: 0,
            normalize_curves: false,
            formats: Formats::default(),
            delays: Vec::new(),
            max_delay: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &PathBuf) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.input.is_none() {
            return fail("no input file given".into());
        }
        if self.output_dir.is_none() {
            return fail("no output location given".into());
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return fail(format!("sample_rate_hz must be positive, got {}", self.sample_rate_hz));
        }
        if !(self.max_lag_seconds.is_finite() && self.max_lag_seconds > 0.0) {
            return fail(format!(
                "max_lag_seconds must be positive, got {}",
                self.max_lag_seconds
            ));
        }
        if self.degree < 1 || self.degree > 64 {
            return fail(format!("degree must be in 1..=64, got {}", self.degree));
        }
        if self.top_r < 1 {
            return fail("top_r must be at least 1".into());
        }
        if self.ar_order < 1 || self.ar_order > 100 {
            return fail(format!("ar_order must be in 1..=100, got {}", self.ar_order));
        }
        if self.nu_grid.is_empty() || self.nu_grid.iter().any(|&v| !(v.is_finite() && v > 2.0)) {
            return fail("nu_grid entries must be finite and above 2".into());
        }
        if self.ema_grid.is_empty()
            || self.ema_grid.iter().any(|&v| !(v.is_finite() && v > 0.0 && v < 1.0))
        {
            return fail("ema_grid entries must lie in (0, 1)".into());
        }
        if self.grid_resolution < 2 || self.grid_resolution > 2001 {
            return fail(format!(
                "grid_resolution must be in 2..=2001, got {}",
                self.grid_resolution
            ));
        }
        if self.max_pairs < 1 {
            return fail("max_pairs must be at least 1".into());
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        if self.delays.iter().any(|&d| d < 0) {
            return fail("delays must be nonnegative".into());
        }
        if let Some(md) = self.max_delay {
            if md < 0 {
                return fail("max_delay must be nonnegative".into());
            }
            if let Some(&top) = self.delays.iter().max() {
                if md < top {
                    return fail(format!("max_delay {md} below reported delay {top}"));
                }
            }
        }
        Ok(())
    }

    pub fn pnorm(&self) -> PNormConfig {
        PNormConfig {
            ar_order: self.ar_order,
            nu_grid: self.nu_grid.clone(),
            ema_grid: self.ema_grid.clone(),
        }
    }

    /// Lag bound in samples implied by the lag window and sampling rate.
    pub fn max_lag_samples(&self) -> i64 {
        (self.max_lag_seconds * self.sample_rate_hz).round() as i64
    }
}
