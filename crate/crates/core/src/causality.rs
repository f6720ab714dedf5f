//! Directed dependency screening between channel pairs.
//!
//! The direction convention: a reason channel is normalized by rank-free
//! marginal Gaussianization, while a candidate result channel goes through
//! the predictive normalization that strips its own autoregressive and
//! volatility structure. Whatever dependency survives at positive delay is
//! structure in the result that the reason explains beyond the result's
//! own past, read off as the joint-expansion features at that delay.

use crate::basis::BasisSpec;
use crate::coeffs::{lag_sweep, CoeffTensor};
use crate::error::{Error, Result};
use crate::normalize::{gauss_normalize, p_normalize, AdaptiveTModel, ArModel, ArchModel, PNormConfig};
use crate::pca::{features_from_tensor, FeatureSet, PoolMode};
use crate::signal::Recording;

/// Features kept when collapsing a delay sweep to one score per delay.
pub const DEFAULT_TOP_R: usize = 3;

/// Fitted predictive-normalization models for one channel.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChannelModels {
    pub channel: String,
    pub ar: ArModel,
    pub arch: ArchModel,
    pub t: AdaptiveTModel,
}

/// Coefficient sweep for one directed pair plus the result channel's models.
#[derive(Debug, Clone)]
pub struct CausalSweep {
    pub tensor: CoeffTensor,
    pub ar: ArModel,
    pub arch: ArchModel,
    pub t: AdaptiveTModel,
}

/// Sweeps delays 0..=max_delay for a directed pair given raw samples.
///
/// The reason series is Gaussian-normalized, the result series is
/// predictively normalized, and the tensor pairs (reason_t, result_{t+d})
/// so a peak at delay d means the result reacts d samples later.
pub fn causal_lag_sweep(
    reason: &[f64],
    result: &[f64],
    spec: &BasisSpec,
    pnorm: &PNormConfig,
    max_delay: i64,
) -> Result<CausalSweep> {
    if max_delay < 0 {
        return Err(Error::invalid("max_delay must be nonnegative"));
    }
    let reason_n = gauss_normalize(reason)?;
    let result_n = p_normalize(result, pnorm)?;
    let tensor = lag_sweep(&reason_n, &result_n.series, spec, 0..=max_delay)?;
    Ok(CausalSweep {
        tensor,
        ar: result_n.ar,
        arch: result_n.arch,
        t: result_n.t,
    })
}

/// Per-delay dependency strength for one directed pair.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CausalityCurve {
    pub delays: Vec<i64>,
    pub scores: Vec<f64>,
}

/// Collapses feature curves to one nonnegative score per delay, the
/// Euclidean length of the centered feature vector there.
pub fn causality_score(features: &FeatureSet) -> CausalityCurve {
    let scores = (0..features.lags.len())
        .map(|l| {
            features
                .curves
                .iter()
                .map(|c| c[l] * c[l])
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    CausalityCurve {
        delays: features.lags.clone(),
        scores,
    }
}

/// Extracts features from a delay sweep and collapses them to a score
/// curve. Pooling is the interior block with marginal removal, centered.
pub fn causality_curve(tensor: &CoeffTensor, top_r: usize) -> Result<CausalityCurve> {
    let features = features_from_tensor(tensor, PoolMode::Interior, true, true, top_r)?;
    Ok(causality_score(&features))
}

/// Score curve for one directed channel pair.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PairCurve {
    pub reason: String,
    pub result: String,
    pub curve: CausalityCurve,
}

/// Directed scores for every ordered channel pair at reported delays.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CausalityMap {
    pub channels: Vec<String>,
    pub delays: Vec<i64>,
    /// scores[d][i][j] is the score for reason channel i and result
    /// channel j at delays[d]; the diagonal carries no value.
    pub scores: Vec<Vec<Vec<Option<f64>>>>,
    /// Largest off-diagonal score at each reported delay.
    pub per_delay_max: Vec<f64>,
}

/// Full pairwise screening output.
#[derive(Debug, Clone)]
pub struct CausalityAnalysis {
    pub map: CausalityMap,
    pub curves: Vec<PairCurve>,
    pub models: Vec<ChannelModels>,
}

/// Screens every ordered channel pair of a recording.
///
/// Each channel is normalized once in each role (Gaussian as reason,
/// predictive as result) and the cached series are reused across pairs.
/// `report_delays` picks which delays enter the map; the curves keep every
/// delay up to `max_delay`.
pub fn pairwise_causality_map(
    rec: &Recording,
    report_delays: &[i64],
    max_delay: i64,
    spec: &BasisSpec,
    pnorm: &PNormConfig,
    top_r: usize,
) -> Result<CausalityAnalysis> {
    if rec.num_channels() < 2 {
        return Err(Error::invalid("pairwise screening needs at least two channels"));
    }
    if max_delay < 0 {
        return Err(Error::invalid("max_delay must be nonnegative"));
    }
    if report_delays.is_empty() {
        return Err(Error::invalid("no report delays given"));
    }
    for &d in report_delays {
        if d < 0 || d > max_delay {
            return Err(Error::invalid(format!(
                "report delay {d} outside 0..={max_delay}"
            )));
        }
    }

    let n = rec.num_channels();
    let names: Vec<String> = rec.channel_names().to_vec();
    let mut reasons = Vec::with_capacity(n);
    let mut results = Vec::with_capacity(n);
    let mut models = Vec::with_capacity(n);
    for i in 0..n {
        let raw = rec.channel(i);
        reasons.push(gauss_normalize(raw)?);
        let out = p_normalize(raw, pnorm)?;
        models.push(ChannelModels {
            channel: names[i].clone(),
            ar: out.ar.clone(),
            arch: out.arch.clone(),
            t: out.t.clone(),
        });
        results.push(out.series);
    }

    let mut curves = Vec::with_capacity(n * (n - 1));
    let mut scores = vec![vec![vec![None; n]; n]; report_delays.len()];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let tensor = lag_sweep(&reasons[i], &results[j], spec, 0..=max_delay)?
                .with_meta((names[i].clone(), names[j].clone()), rec.sample_rate_hz());
            let curve = causality_curve(&tensor, top_r)?;
            for (slot, &d) in report_delays.iter().enumerate() {
                let idx = curve.delays.iter().position(|&x| x == d).unwrap();
                scores[slot][i][j] = Some(curve.scores[idx]);
            }
            curves.push(PairCurve {
                reason: names[i].clone(),
                result: names[j].clone(),
                curve,
            });
        }
    }

    let per_delay_max = scores
        .iter()
        .map(|grid| {
            grid.iter()
                .flatten()
                .filter_map(|s| *s)
                .fold(0.0f64, f64::max)
        })
        .collect();

    Ok(CausalityAnalysis {
        map: CausalityMap {
            channels: names,
            delays: report_delays.to_vec(),
            scores,
            per_delay_max,
        },
        curves,
        models,
    })
}
