//! Orthonormal polynomial basis on the unit interval.
//!
//! The basis is the shifted Legendre family rescaled to unit L2 norm:
//! f_0 = 1, f_1 = sqrt(3)(2x-1), f_2 = sqrt(5)(6x^2-6x+1), and so on, with
//! int_0^1 f_j f_k dx = delta_jk. Degree j is bounded by |f_j| <= sqrt(2j+1)
//! on [0, 1], attained at the endpoints.

use crate::error::{Error, Result};
use crate::normalize::NormalizedSeries;

/// Basis configuration: maximum polynomial degree m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BasisSpec {
    pub max_degree: usize,
}

impl BasisSpec {
    pub fn new(max_degree: usize) -> Result<Self> {
        if max_degree == 0 {
            return Err(Error::invalid("basis max_degree must be at least 1"));
        }
        if max_degree > 64 {
            return Err(Error::invalid(format!(
                "basis max_degree {max_degree} is unreasonably large (limit 64)"
            )));
        }
        Ok(BasisSpec { max_degree })
    }
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec { max_degree: 10 }
    }
}

/// Orthonormal shifted Legendre polynomial of the given degree at x in [0, 1].
///
/// Uses the standard three-term recurrence on u = 2x - 1 and applies the
/// sqrt(2j+1) normalization at the end; stable for all supported degrees.
pub fn legendre(degree: usize, x: f64) -> f64 {
    let u = 2.0 * x - 1.0;
    if degree == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = u;
    for n in 1..degree {
        let n = n as f64;
        let next = ((2.0 * n + 1.0) * u * cur - n * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    ((2 * degree + 1) as f64).sqrt() * cur
}

/// Basis evaluations for one normalized series: row j holds f_j(y_t) for
/// every sample t. Row 0 is identically one.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    rows: Vec<Vec<f64>>,
    burn_in: usize,
}

impl BasisMatrix {
    pub fn max_degree(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows[0].is_empty()
    }

    /// Leading samples that downstream estimators must skip.
    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn row(&self, degree: usize) -> &[f64] {
        &self.rows[degree]
    }
}

/// Evaluates all basis rows 0..=m for a normalized series in a single pass,
/// running the recurrence across degrees at each sample.
pub fn eval_basis_matrix(series: &NormalizedSeries, spec: &BasisSpec) -> BasisMatrix {
    let m = spec.max_degree;
    let n = series.values.len();
    let mut rows = vec![vec![0.0; n]; m + 1];
    let scale: Vec<f64> = (0..=m).map(|j| ((2 * j + 1) as f64).sqrt()).collect();
    for (t, &y) in series.values.iter().enumerate() {
        let u = 2.0 * y - 1.0;
        let mut prev = 1.0;
        let mut cur = u;
        rows[0][t] = 1.0;
        if m >= 1 {
            rows[1][t] = scale[1] * u;
        }
        for j in 2..=m {
            let nf = (j - 1) as f64;
            let next = ((2.0 * nf + 1.0) * u * cur - nf * prev) / (nf + 1.0);
            prev = cur;
            cur = next;
            rows[j][t] = scale[j] * cur;
        }
    }
    BasisMatrix {
        rows,
        burn_in: series.burn_in,
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
///
/// Nodes are the roots of the degree-n Legendre polynomial found by Newton
/// iteration; weights sum to one on the unit interval. Exact for polynomial
/// integrands up to degree 2n - 1, which makes n = 64 comfortably enough to
/// check orthonormality of the basis at m = 10.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th root
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        // map the symmetric pair from [-1, 1] to [0, 1]
        nodes[i] = 0.5 * (1.0 - z);
        nodes[n - 1 - i] = 0.5 * (1.0 + z);
        let w = 1.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
