//! Normalization of raw channels to (0, 1).
//!
//! Two maps are provided. The basic map standardizes a series by its global
//! mean and population standard deviation and applies the standard normal
//! CDF; it preserves order and is what the symmetric correlation analysis
//! runs on. The predicted map (`p_normalize`) instead removes everything a
//! causal model of the channel's own past explains: an AR(10) regression for
//! the conditional mean, an ARCH(1) fit for the conditional variance, then
//! an adaptive Student-t CDF whose scale follows an exponential moving
//! average. Its output is close to i.i.d. uniform when the model family
//! captures the channel, which is the property the causality direction of
//! the analysis relies on.

use crate::accum::{mean, pairwise_sum, population_variance};
use crate::error::{Error, Result};
use crate::special::{erfc, ln_gamma, reg_inc_beta};

/// Values are kept strictly inside (0, 1) by this margin.
pub const UNIT_CLAMP: f64 = 1e-15;

/// Which normalization produced a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Basic,
    Predicted,
}

/// A channel mapped into (0, 1).
///
/// `burn_in` counts leading samples that estimators must skip: zero for the
/// basic map, AR order + EMA warm-up for the predicted map. The values at
/// those positions are present (so indexing stays aligned with the source)
/// but carry no information.
#[derive(Debug, Clone)]
pub struct NormalizedSeries {
    pub values: Vec<f64>,
    pub burn_in: usize,
    pub kind: NormKind,
}

impl NormalizedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn clamp_unit(p: f64) -> f64 {
    p.clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP)
}

/// Standard normal CDF, clamped into (0, 1) by [`UNIT_CLAMP`].
pub fn gaussian_cdf(x: f64) -> f64 {
    clamp_unit(0.5 * erfc(-x / std::f64::consts::SQRT_2))
}

/// CDF of the Student-t distribution with `nu` degrees of freedom, clamped
/// into (0, 1) by [`UNIT_CLAMP`].
pub fn student_t_cdf(x: f64, nu: f64) -> f64 {
    debug_assert!(nu > 0.0);
    let xb = nu / (nu + x * x);
    let p = 0.5 * reg_inc_beta(0.5 * nu, 0.5, xb);
    clamp_unit(if x >= 0.0 { 1.0 - p } else { p })
}

/// Basic normalization: y_t = Phi((x_t - mean) / sd) with the population
/// standard deviation.
pub fn gauss_normalize(x: &[f64]) -> Result<NormalizedSeries> {
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            context: "gauss_normalize",
            required: 2,
            actual: x.len(),
        });
    }
    let mu = mean(x);
    let var = population_variance(x, mu);
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::ZeroVariance {
            context: "gauss_normalize",
        });
    }
    let sd = var.sqrt();
    let values = x.iter().map(|&v| gaussian_cdf((v - mu) / sd)).collect();
    Ok(NormalizedSeries {
        values,
        burn_in: 0,
        kind: NormKind::Basic,
    })
}

/// Autoregressive model with intercept, fit by least squares.
///
/// `coefficients[i]` multiplies x_{t-1-i}.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArModel {
    pub order: usize,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub noise_variance: f64,
}

/// Ordinary least squares fit of an AR(order) model with intercept.
pub fn fit_ar(x: &[f64], order: usize) -> Result<ArModel> {
    if order == 0 {
        return Err(Error::invalid("AR order must be at least 1"));
    }
    if x.len() <= 10 * order {
        return Err(Error::InsufficientData {
            context: "fit_ar",
            required: 10 * order + 1,
            actual: x.len(),
        });
    }
    let p = order + 1; // intercept + lags
    let mut g = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    let mut row = vec![0.0; p];
    for t in order..x.len() {
        row[0] = 1.0;
        for i in 0..order {
            row[i + 1] = x[t - 1 - i];
        }
        let y = x[t];
        for i in 0..p {
            b[i] += row[i] * y;
            for j in i..p {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            g[i][j] = g[j][i];
        }
    }
    let beta = solve_symmetric(&mut g, &mut b)?;
    let model = ArModel {
        order,
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        noise_variance: 0.0,
    };
    let resid = ar_residuals(x, &model)?;
    let rss: f64 = pairwise_sum(&resid.iter().map(|&e| e * e).collect::<Vec<_>>());
    Ok(ArModel {
        noise_variance: rss / resid.len() as f64,
        ..model
    })
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
fn solve_symmetric(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .enumerate()
        .map(|(i, r)| r[i].abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-12 * scale {
            return Err(Error::invalid(
                "singular normal equations (constant or collinear input)",
            ));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col][c] * x[c];
        }
        x[col] = s / a[col][col];
    }
    Ok(x)
}

/// One-step-ahead prediction errors of an AR model; length is
/// `x.len() - order` (predictions need a full lag window).
pub fn ar_residuals(x: &[f64], model: &ArModel) -> Result<Vec<f64>> {
    if x.len() <= model.order {
        return Err(Error::InsufficientData {
            context: "ar_residuals",
            required: model.order + 1,
            actual: x.len(),
        });
    }
    let mut out = Vec::with_capacity(x.len() - model.order);
    for t in model.order..x.len() {
        let mut pred = model.intercept;
        for (i, &c) in model.coefficients.iter().enumerate() {
            pred += c * x[t - 1 - i];
        }
        out.push(x[t] - pred);
    }
    Ok(out)
}

/// ARCH(1) conditional variance model h_t = omega + alpha * e_{t-1}^2,
/// fit by Gaussian quasi-maximum-likelihood.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArchModel {
    pub omega: f64,
    pub alpha: f64,
    pub log_likelihood: f64,
}

const ARCH_OMEGA_MIN: f64 = 1e-12;
const ARCH_ALPHA_MAX: f64 = 0.999;

fn arch_log_likelihood(eps2: &[f64], omega: f64, alpha: f64) -> f64 {
    const LN_2PI: f64 = 1.837_877_066_409_345_4;
    let mut acc = 0.0;
    for t in 1..eps2.len() {
        let h = omega + alpha * eps2[t - 1];
        acc += h.ln() + eps2[t] / h;
    }
    -0.5 * (acc + LN_2PI * (eps2.len() - 1) as f64)
}

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Fits the ARCH(1) model by golden-section search over alpha with a nested
/// line search over omega (no closed form exists for either). The result is
/// never worse than the best constant-variance model (alpha = 0).
pub fn fit_arch(residuals: &[f64]) -> Result<ArchModel> {
    if residuals.len() < 100 {
        return Err(Error::InsufficientData {
            context: "fit_arch",
            required: 100,
            actual: residuals.len(),
        });
    }
    let eps2: Vec<f64> = residuals.iter().map(|&e| e * e).collect();
    let var = mean(&eps2);
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::ZeroVariance {
            context: "fit_arch",
        });
    }
    let omega_hi = 4.0 * var;
    let omega_tol = 1e-9 * var.max(1.0);
    let profile = |alpha: f64| -> (f64, f64) {
        golden_max(
            |w| arch_log_likelihood(&eps2, w, alpha),
            ARCH_OMEGA_MIN,
            omega_hi,
            omega_tol,
        )
    };

    // coarse bracket over alpha, then refine
    let mut best_i = 0;
    let mut best_ll = f64::NEG_INFINITY;
    let coarse: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
    for (i, &a) in coarse.iter().enumerate() {
        let (_, ll) = profile(a);
        if ll > best_ll {
            best_ll = ll;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { 0.0 } else { coarse[best_i - 1] };
    let hi = if best_i + 1 == coarse.len() {
        ARCH_ALPHA_MAX
    } else {
        coarse[best_i + 1]
    };
    let (alpha, _) = golden_max(|a| profile(a).1, lo, hi, 1e-9);
    let (omega, ll) = profile(alpha);

    // guarantee the fit dominates the constant-variance special case
    let (omega0, ll0) = profile(0.0);
    if ll0 >= ll {
        return Ok(ArchModel {
            omega: omega0,
            alpha: 0.0,
            log_likelihood: ll0,
        });
    }
    Ok(ArchModel {
        omega,
        alpha,
        log_likelihood: ll,
    })
}

impl ArchModel {
    /// Conditional standard deviations for a residual series; the first
    /// entry uses the model's stationary variance.
    pub fn conditional_sd(&self, residuals: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(residuals.len());
        let stationary = self.omega / (1.0 - self.alpha.min(ARCH_ALPHA_MAX));
        out.push(stationary.max(ARCH_OMEGA_MIN).sqrt());
        for t in 1..residuals.len() {
            let h = self.omega + self.alpha * residuals[t - 1] * residuals[t - 1];
            out.push(h.max(ARCH_OMEGA_MIN).sqrt());
        }
        out
    }
}

/// Adaptive Student-t stage: a fixed tail shape nu with an evolving scale
/// s_t^2 = (1 - eta) s_{t-1}^2 + eta u_{t-1}^2.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdaptiveTModel {
    pub nu: f64,
    pub ema_rate: f64,
    pub initial_scale: f64,
    pub log_likelihood: f64,
}

/// Grid-search configuration for the predicted normalization.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PNormConfig {
    pub ar_order: usize,
    pub nu_grid: Vec<f64>,
    pub ema_grid: Vec<f64>,
}

impl Default for PNormConfig {
    fn default() -> Self {
        PNormConfig {
            ar_order: 10,
            nu_grid: vec![4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 30.0],
            ema_grid: vec![0.002, 0.005, 0.01, 0.02, 0.05],
        }
    }
}

/// Predicted normalization output: the (0, 1) series plus every fitted model.
#[derive(Debug, Clone)]
pub struct PNormOutput {
    pub series: NormalizedSeries,
    pub ar: ArModel,
    pub arch: ArchModel,
    pub t: AdaptiveTModel,
}

/// Number of leading samples reserved for the EMA scale to settle.
const EMA_WARMUP: usize = 100;

fn t_log_likelihood(u: &[f64], s0_sq: f64, nu: f64, eta: f64) -> f64 {
    let ln_c = ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln();
    let half = 0.5 * (nu + 1.0);
    let mut s_sq = s0_sq;
    let mut acc = 0.0;
    for &ut in u {
        let x = ut * ut / s_sq;
        acc += ln_c - half * (1.0 + x / nu).ln() - 0.5 * s_sq.ln();
        s_sq = ((1.0 - eta) * s_sq + eta * ut * ut).max(1e-300);
    }
    acc
}

fn fit_adaptive_t(u: &[f64], cfg: &PNormConfig) -> Result<(AdaptiveTModel, Vec<f64>)> {
    let head = u.len().min(EMA_WARMUP);
    if head < 2 {
        return Err(Error::InsufficientData {
            context: "adaptive_t",
            required: 2,
            actual: head,
        });
    }
    let mu = mean(&u[..head]);
    let s0_sq = u[..head]
        .iter()
        .map(|&v| (v - mu) * (v - mu))
        .sum::<f64>()
        / (head - 1) as f64;
    if !(s0_sq > 0.0) || !s0_sq.is_finite() {
        return Err(Error::ZeroVariance {
            context: "adaptive_t",
        });
    }

    let mut best: Option<(f64, f64, f64)> = None; // (ll, nu, eta)
    for &nu in &cfg.nu_grid {
        for &eta in &cfg.ema_grid {
            let ll = t_log_likelihood(u, s0_sq, nu, eta);
            if best.map_or(true, |(b, _, _)| ll > b) {
                best = Some((ll, nu, eta));
            }
        }
    }
    let (ll, nu, eta) =
        best.ok_or_else(|| Error::invalid("empty nu or ema grid in p-normalization config"))?;

    let mut z = Vec::with_capacity(u.len());
    let mut s_sq = s0_sq;
    for &ut in u {
        z.push(student_t_cdf(ut / s_sq.sqrt(), nu));
        s_sq = ((1.0 - eta) * s_sq + eta * ut * ut).max(1e-300);
    }
    Ok((
        AdaptiveTModel {
            nu,
            ema_rate: eta,
            initial_scale: s0_sq.sqrt(),
            log_likelihood: ll,
        },
        z,
    ))
}

/// Predicted normalization: AR mean removal, ARCH(1) variance removal, then
/// the adaptive Student-t CDF. Output length equals the input length; the
/// first `ar_order` values are 0.5 placeholders and `burn_in` is
/// `ar_order + 100`.
pub fn p_normalize(x: &[f64], cfg: &PNormConfig) -> Result<PNormOutput> {
    if x.len() < 1000 {
        return Err(Error::InsufficientData {
            context: "p_normalize",
            required: 1000,
            actual: x.len(),
        });
    }
    let ar = fit_ar(x, cfg.ar_order).map_err(Error::stage("fit_ar"))?;
    let eps = ar_residuals(x, &ar).map_err(Error::stage("ar_residuals"))?;
    let arch = fit_arch(&eps).map_err(Error::stage("fit_arch"))?;
    let sd = arch.conditional_sd(&eps);
    let u: Vec<f64> = eps.iter().zip(&sd).map(|(&e, &s)| e / s).collect();
    let (t, z) = fit_adaptive_t(&u, cfg).map_err(Error::stage("adaptive_t"))?;

    let mut values = vec![0.5; cfg.ar_order];
    values.extend(z);
    debug_assert_eq!(values.len(), x.len());
    Ok(PNormOutput {
        series: NormalizedSeries {
            values,
            burn_in: cfg.ar_order + EMA_WARMUP,
            kind: NormKind::Predicted,
        },
        ar,
        arch,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn draw_normal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    }

    #[test]
    fn gaussian_cdf_basics() {
        assert_eq!(gaussian_cdf(0.0), 0.5);
        assert!((gaussian_cdf(1.959964) - 0.975).abs() < 1e-6);
        assert!((gaussian_cdf(-1.959964) - 0.025).abs() < 1e-6);
        assert_eq!(gaussian_cdf(40.0), 1.0 - UNIT_CLAMP);
        assert_eq!(gaussian_cdf(-40.0), UNIT_CLAMP);
        // symmetry
        for &x in &[0.3, 1.1, 2.7] {
            assert!((gaussian_cdf(x) + gaussian_cdf(-x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn student_t_cdf_anchors() {
        assert_eq!(student_t_cdf(0.0, 7.0), 0.5);
        // nu = 1 is Cauchy: F(1) = 3/4
        assert!((student_t_cdf(1.0, 1.0) - 0.75).abs() < 1e-10);
        assert!((student_t_cdf(-1.0, 1.0) - 0.25).abs() < 1e-10);
        // large nu approaches the normal CDF
        for &x in &[-2.0, -0.5, 0.7, 1.5] {
            assert!((student_t_cdf(x, 1000.0) - gaussian_cdf(x)).abs() < 1e-3);
        }
    }

    #[test]
    fn student_t_cdf_matches_density_quadrature() {
        // integrate the t density directly on [0, x]
        let nu = 7.0;
        let ln_c = ln_gamma(0.5 * (nu + 1.0))
            - ln_gamma(0.5 * nu)
            - 0.5 * (nu * std::f64::consts::PI).ln();
        let pdf = |t: f64| (ln_c - 0.5 * (nu + 1.0) * (1.0 + t * t / nu).ln()).exp();
        for &x in &[0.4, 1.3, 2.6] {
            let mut acc = 0.5;
            let steps = 200_000;
            let h = x / steps as f64;
            for i in 0..steps {
                let t0 = i as f64 * h;
                acc += 0.5 * h * (pdf(t0) + pdf(t0 + h));
            }
            assert!(
                (student_t_cdf(x, nu) - acc).abs() < 1e-8,
                "x = {x}: {} vs {acc}",
                student_t_cdf(x, nu)
            );
        }
    }

    #[test]
    fn gauss_normalize_spot_values() {
        let norm = gauss_normalize(&[-1.0, 0.0, 1.0]).unwrap();
        // population sd = sqrt(2/3); Phi(-sqrt(3/2)) ~ 0.1103
        assert!((norm.values[0] - 0.1103).abs() < 1e-4);
        assert_eq!(norm.values[1], 0.5);
        assert!((norm.values[0] + norm.values[2] - 1.0).abs() < 1e-12);
        assert_eq!(norm.burn_in, 0);
        assert_eq!(norm.kind, NormKind::Basic);
    }

    #[test]
    fn gauss_normalize_preserves_order_and_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = draw_normal(&mut rng, 5000);
        let norm = gauss_normalize(&x).unwrap();
        for (a, b) in x.iter().zip(&norm.values) {
            assert!(*b > 0.0 && *b < 1.0);
            let _ = a;
        }
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).unwrap());
        for w in idx.windows(2) {
            assert!(norm.values[w[0]] <= norm.values[w[1]]);
        }
    }

    #[test]
    fn gauss_normalize_rejects_degenerate_input() {
        assert!(matches!(
            gauss_normalize(&[1.0]),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            gauss_normalize(&[2.0; 50]),
            Err(Error::ZeroVariance { .. })
        ));
    }

    #[test]
    fn fit_ar_recovers_known_process() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let noise = draw_normal(&mut rng, 100_000);
        let mut x = vec![0.0; noise.len()];
        for t in 0..x.len() {
            let a = if t >= 1 { 0.55 * x[t - 1] } else { 0.0 };
            let b = if t >= 2 { -0.2 * x[t - 2] } else { 0.0 };
            x[t] = 1.0 + a + b + noise[t];
        }
        let model = fit_ar(&x, 2).unwrap();
        assert!((model.coefficients[0] - 0.55).abs() < 0.02);
        assert!((model.coefficients[1] + 0.2).abs() < 0.02);
        assert!((model.intercept - 1.0).abs() < 0.05);
        assert!((model.noise_variance - 1.0).abs() < 0.05);
    }

    #[test]
    fn fit_ar_on_white_noise_finds_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = draw_normal(&mut rng, 100_000);
        let model = fit_ar(&x, 10).unwrap();
        let bound = 4.0 / (x.len() as f64).sqrt();
        for (i, c) in model.coefficients.iter().enumerate() {
            assert!(c.abs() < bound, "lag {} coefficient {}", i + 1, c);
        }
        // the fit cannot beat the raw variance
        assert!(model.noise_variance <= population_variance(&x, mean(&x)));
    }

    #[test]
    fn fit_ar_input_checks() {
        assert!(matches!(
            fit_ar(&[1.0; 100], 10),
            Err(Error::InsufficientData { .. })
        ));
        let constant = vec![3.0; 500];
        assert!(fit_ar(&constant, 2).is_err());
    }

    #[test]
    fn residuals_recover_injected_noise_under_true_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = draw_normal(&mut rng, 5000);
        let mut x = vec![0.0; noise.len()];
        for t in 0..x.len() {
            let a = if t >= 1 { 0.7 * x[t - 1] } else { 0.0 };
            x[t] = 0.3 + a + noise[t];
        }
        let truth = ArModel {
            order: 1,
            intercept: 0.3,
            coefficients: vec![0.7],
            noise_variance: 1.0,
        };
        let resid = ar_residuals(&x, &truth).unwrap();
        assert_eq!(resid.len(), x.len() - 1);
        for (r, n) in resid.iter().zip(&noise[1..]) {
            assert!((r - n).abs() < 1e-9);
        }
    }

    #[test]
    fn residuals_of_zero_model_are_the_tail() {
        let x = [5.0, 6.0, 7.0, 8.0];
        let zero = ArModel {
            order: 2,
            intercept: 0.0,
            coefficients: vec![0.0, 0.0],
            noise_variance: 0.0,
        };
        assert_eq!(ar_residuals(&x, &zero).unwrap(), vec![7.0, 8.0]);
        assert!(ar_residuals(&x[..2], &zero).is_err());
    }

    #[test]
    fn fit_arch_recovers_known_process() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = draw_normal(&mut rng, 100_000);
        let mut eps = vec![0.0; noise.len()];
        let (omega, alpha) = (0.5, 0.3);
        let mut h: f64 = omega / (1.0 - alpha);
        for t in 0..eps.len() {
            if t > 0 {
                h = omega + alpha * eps[t - 1] * eps[t - 1];
            }
            eps[t] = h.sqrt() * noise[t];
        }
        let model = fit_arch(&eps).unwrap();
        assert!((model.omega - omega).abs() < 0.05, "omega {}", model.omega);
        assert!((model.alpha - alpha).abs() < 0.05, "alpha {}", model.alpha);
    }

    #[test]
    fn fit_arch_on_iid_residuals_is_nearly_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let eps = draw_normal(&mut rng, 100_000);
        let model = fit_arch(&eps).unwrap();
        assert!(model.alpha < 0.05, "alpha {}", model.alpha);
        assert!((model.omega - 1.0).abs() < 0.05, "omega {}", model.omega);
    }

    #[test]
    fn fit_arch_never_loses_to_alpha_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eps = draw_normal(&mut rng, 2000);
        let model = fit_arch(&eps).unwrap();
        let eps2: Vec<f64> = eps.iter().map(|&e| e * e).collect();
        // test-local line search for the best constant-variance likelihood
        let mut best0 = f64::NEG_INFINITY;
        for i in 1..4000 {
            let w = i as f64 * 1e-3;
            best0 = best0.max(arch_log_likelihood(&eps2, w, 0.0));
        }
        assert!(model.log_likelihood >= best0 - 1e-6);
    }

    #[test]
    fn fit_arch_input_checks() {
        assert!(matches!(
            fit_arch(&[1.0; 50]),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            fit_arch(&[0.0; 500]),
            Err(Error::ZeroVariance { .. })
        ));
    }

    #[test]
    fn p_normalize_shape_and_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = draw_normal(&mut rng, 4000);
        let out = p_normalize(&x, &PNormConfig::default()).unwrap();
        assert_eq!(out.series.len(), x.len());
        assert_eq!(out.series.burn_in, 110);
        assert_eq!(out.series.kind, NormKind::Predicted);
        for &v in &out.series.values {
            assert!(v > 0.0 && v < 1.0);
        }
        for &v in &out.series.values[..10] {
            assert_eq!(v, 0.5);
        }
    }

    #[test]
    fn p_normalize_gaussian_input_selects_lightest_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = draw_normal(&mut rng, 100_000);
        let cfg = PNormConfig::default();
        let out = p_normalize(&x, &cfg).unwrap();
        // for Gaussian data every t shape is wrong in the same direction, so
        // the grid search lands on its lightest tail
        assert_eq!(out.t.nu, *cfg.nu_grid.last().unwrap());
        let z = &out.series.values[out.series.burn_in..];
        assert!(ks_uniform(z) < 0.01, "KS {}", ks_uniform(z));
    }

    #[test]
    fn p_normalize_names_failing_stage() {
        let x = vec![1.0; 2000]; // constant: AR fit cannot proceed
        match p_normalize(&x, &PNormConfig::default()) {
            Err(Error::Pipeline { stage, .. }) => assert_eq!(stage, "fit_ar"),
            other => panic!("expected pipeline error, got {other:?}"),
        }
        assert!(matches!(
            p_normalize(&[0.5; 999], &PNormConfig::default()),
            Err(Error::InsufficientData { .. })
        ));
    }

    // Kolmogorov-Smirnov distance from U(0, 1).
    fn ks_uniform(z: &[f64]) -> f64 {
        let mut s: Vec<f64> = z.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = s.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &v) in s.iter().enumerate() {
            let hi = (i + 1) as f64 / n - v;
            let lo = v - i as f64 / n;
            d = d.max(hi.max(lo));
        }
        d
    }
}
