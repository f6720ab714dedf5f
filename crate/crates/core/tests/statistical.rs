//! Statistical behavior of the estimators on controlled inputs.

use lagdep_core::basis::BasisSpec;
use lagdep_core::causality::causality_curve;
use lagdep_core::coeffs::{estimate_coeffs, lag_sweep};
use lagdep_core::normalize::{gauss_normalize, p_normalize, PNormConfig};
use lagdep_core::{eval_basis_matrix, legendre};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[test]
fn estimator_agrees_with_naive_sum_at_scale() {
    let n = 10_000;
    let m = 10;
    let ya = gauss_normalize(&gaussian(40, n)).unwrap();
    let yb = gauss_normalize(&gaussian(41, n)).unwrap();
    let spec = BasisSpec { max_degree: m };
    let fa = eval_basis_matrix(&ya, &spec);
    let fb = eval_basis_matrix(&yb, &spec);
    for &offset in &[-123i64, 0, 777] {
        let fast = estimate_coeffs(&fa, &fb, offset).unwrap();
        for j in 0..=m {
            for k in 0..=m {
                let mut acc = 0.0;
                let mut count = 0usize;
                for t in 0..n {
                    let tz = t as i64 + offset;
                    if tz < 0 || tz >= n as i64 {
                        continue;
                    }
                    acc += legendre(j, ya.values[t]) * legendre(k, yb.values[tz as usize]);
                    count += 1;
                }
                let naive = acc / count as f64;
                assert!(
                    (fast.get(j, k) - naive).abs() < 1e-12,
                    "offset {offset} entry ({j},{k}): {} vs {naive}",
                    fast.get(j, k)
                );
                assert_eq!(fast.pair_count, count);
            }
        }
    }
}

/// Under the null the score curve is pure estimation noise, and every
/// entry of the pooled observation has variance ~1/n, so the high
/// quantile of the score must fall as 1/sqrt(n).
#[test]
fn null_scores_shrink_as_inverse_sqrt_sample_size() {
    let spec = BasisSpec { max_degree: 6 };
    let cfg = PNormConfig::default();
    let mut q99 = Vec::new();
    for (i, &n) in [10_000usize, 40_000, 160_000].iter().enumerate() {
        let reason = gauss_normalize(&gaussian(50 + i as u64, n)).unwrap();
        let result = p_normalize(&gaussian(60 + i as u64, n), &cfg).unwrap();
        let tensor = lag_sweep(&reason, &result.series, &spec, 0..=100).unwrap();
        let curve = causality_curve(&tensor, 3).unwrap();
        let mut scores = curve.scores.clone();
        scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(scores.iter().all(|s| s.is_finite() && *s >= 0.0));
        q99.push(scores[(0.99 * (scores.len() - 1) as f64).round() as usize]);
    }
    for w in q99.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (2.0 / 1.5..=2.0 * 1.5).contains(&ratio),
            "expected ratio near 2 for a 4x sample increase, got {ratio} ({q99:?})"
        );
    }
}
