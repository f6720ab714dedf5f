//! Principal components of coefficient matrices across offsets.
//!
//! Each offset contributes one observation vector: the flattened selection
//! of coefficient entries. The covariance of those vectors over all offsets
//! is decomposed symmetrically; the leading eigenvectors are the dependency
//! patterns that vary most with offset, and projecting each observation
//! onto them gives one feature curve per pattern.

use crate::accum::{mean, pairwise_sum};
use crate::basis::legendre;
use crate::coeffs::{remove_marginals, CoeffMatrix, CoeffTensor};
use crate::error::{Error, Result};

/// Which coefficient entries form the observation vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMode {
    /// Entries with both degrees >= 1, the shape of the dependency.
    Interior,
    /// All entries including the marginal row and column.
    Full,
}

/// Coefficient curves over offsets, one row per selected entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledCoeffs {
    /// rows[s][l] is entry s of the observation at lag index l.
    pub rows: Vec<Vec<f64>>,
    /// Degree pair (j, k) behind each row.
    pub index_map: Vec<(usize, usize)>,
    pub lags: Vec<i64>,
}

/// Flattens the tensor into per-entry curves over offsets.
///
/// With `marginal_removal` the interior entries have the product of
/// marginals subtracted first. [`PoolMode::Full`] always pools the raw
/// matrices: the marginal row and column are the quantities removal would
/// subtract, so removing and pooling them together would double-count.
pub fn pool_coefficients(
    tensor: &CoeffTensor,
    mode: PoolMode,
    marginal_removal: bool,
) -> PooledCoeffs {
    let side = tensor.m + 1;
    let index_map: Vec<(usize, usize)> = match mode {
        PoolMode::Interior => (1..side)
            .flat_map(|j| (1..side).map(move |k| (j, k)))
            .collect(),
        PoolMode::Full => (0..side)
            .flat_map(|j| (0..side).map(move |k| (j, k)))
            .collect(),
    };
    let remove = marginal_removal && mode == PoolMode::Interior;
    let mut rows = vec![Vec::with_capacity(tensor.num_lags()); index_map.len()];
    for mat in tensor.matrices() {
        let owned;
        let src: &CoeffMatrix = if remove {
            owned = remove_marginals(mat);
            &owned
        } else {
            mat
        };
        for (row, &(j, k)) in rows.iter_mut().zip(&index_map) {
            row.push(src.get(j, k));
        }
    }
    PooledCoeffs {
        rows,
        index_map,
        lags: tensor.lags.clone(),
    }
}

/// Population covariance of the observation vectors over offsets, with the
/// per-entry means. Without centering the raw second-moment matrix is
/// returned and the means are zero.
pub fn covariance_over_lags(pooled: &PooledCoeffs, center: bool) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = pooled.rows.len();
    let l = pooled.lags.len() as f64;
    let means: Vec<f64> = if center {
        pooled.rows.iter().map(|r| mean(r)).collect()
    } else {
        vec![0.0; d]
    };
    let centered: Vec<Vec<f64>> = pooled
        .rows
        .iter()
        .zip(&means)
        .map(|(r, &m)| r.iter().map(|v| v - m).collect())
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    let mut prod = Vec::with_capacity(pooled.lags.len());
    for p in 0..d {
        for q in p..d {
            prod.clear();
            prod.extend(centered[p].iter().zip(&centered[q]).map(|(a, b)| a * b));
            let c = pairwise_sum(&prod) / l;
            cov[p][q] = c;
            cov[q][p] = c;
        }
    }
    (cov, means)
}

/// One eigenvalue with its unit eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations,
/// returning the `top_r` pairs by descending eigenvalue (fewer if the
/// matrix is smaller). Each vector's largest-magnitude entry is made
/// positive, earliest index winning ties, so signs are reproducible.
pub fn sym_eigen(matrix: &[Vec<f64>], top_r: usize) -> Result<Vec<EigenPair>> {
    let d = matrix.len();
    if d == 0 || matrix.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("eigendecomposition needs a square matrix"));
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let total: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let off = |a: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for (p, row) in a.iter().enumerate() {
            for (q, &x) in row.iter().enumerate() {
                if p != q {
                    s += x * x;
                }
            }
        }
        s.sqrt()
    };

    let mut converged = total == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= JACOBI_REL_TOL * total {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..d {
                    let (aip, aiq) = (a[i][p], a[i][q]);
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for i in 0..d {
                    let (api, aqi) = (a[p][i], a[q][i]);
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for row in v.iter_mut() {
                    let (vip, viq) = (row[p], row[q]);
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }
    if !converged && off(&a) > JACOBI_REL_TOL * total {
        return Err(Error::NoConvergence {
            context: "jacobi eigendecomposition",
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let mut pairs = Vec::with_capacity(top_r.min(d));
    for &i in order.iter().take(top_r) {
        let mut vector: Vec<f64> = v.iter().map(|row| row[i]).collect();
        let mut lead = 0;
        for (idx, x) in vector.iter().enumerate() {
            if x.abs() > vector[lead].abs() {
                lead = idx;
            }
        }
        if vector[lead] < 0.0 {
            for x in vector.iter_mut() {
                *x = -*x;
            }
        }
        pairs.push(EigenPair {
            value: a[i][i],
            vector,
        });
    }
    Ok(pairs)
}

/// Leading dependency patterns of a pooled tensor with their feature
/// curves over offsets.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FeatureSet {
    pub eigenvalues: Vec<f64>,
    /// One unit vector per feature, in `index_map` order.
    pub vectors: Vec<Vec<f64>>,
    /// curves[i][l] projects the (centered) observation at lag index l
    /// onto vector i.
    pub curves: Vec<Vec<f64>>,
    pub lags: Vec<i64>,
    pub index_map: Vec<(usize, usize)>,
    /// Per-entry mean over offsets that was subtracted before projecting.
    pub mean: Vec<f64>,
}

/// Runs the decomposition on pooled curves.
pub fn extract_features(pooled: &PooledCoeffs, center: bool, top_r: usize) -> Result<FeatureSet> {
    if pooled.lags.is_empty() || pooled.rows.is_empty() {
        return Err(Error::invalid("nothing pooled to decompose"));
    }
    let (cov, mean) = covariance_over_lags(pooled, center);
    let pairs = sym_eigen(&cov, top_r)?;
    let curves: Vec<Vec<f64>> = pairs
        .iter()
        .map(|p| {
            (0..pooled.lags.len())
                .map(|l| {
                    let mut acc = 0.0;
                    for ((row, &m), &w) in pooled.rows.iter().zip(&mean).zip(&p.vector) {
                        acc += w * (row[l] - m);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(FeatureSet {
        eigenvalues: pairs.iter().map(|p| p.value).collect(),
        vectors: pairs.into_iter().map(|p| p.vector).collect(),
        curves,
        lags: pooled.lags.clone(),
        index_map: pooled.index_map.clone(),
        mean,
    })
}

/// Pools a tensor and extracts its leading features in one step.
pub fn features_from_tensor(
    tensor: &CoeffTensor,
    mode: PoolMode,
    marginal_removal: bool,
    center: bool,
    top_r: usize,
) -> Result<FeatureSet> {
    extract_features(&pool_coefficients(tensor, mode, marginal_removal), center, top_r)
}

/// Scalar field sampled on an inclusive square grid over the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub resolution: usize,
    /// values[iy * resolution + iz], axes sampled at i / (resolution - 1).
    pub values: Vec<f64>,
}

pub const DEFAULT_GRID_RESOLUTION: usize = 101;

impl DensityGrid {
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 / (self.resolution - 1) as f64
    }

    pub fn get(&self, iy: usize, iz: usize) -> f64 {
        self.values[iy * self.resolution + iz]
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "y,z,value")?;
        for iy in 0..self.resolution {
            for iz in 0..self.resolution {
                writeln!(w, "{},{},{}", self.coord(iy), self.coord(iz), self.get(iy, iz))?;
            }
        }
        Ok(())
    }
}

fn grid_from_weights(
    weights: impl Fn(usize, usize) -> f64,
    side: usize,
    resolution: usize,
) -> DensityGrid {
    assert!(resolution >= 2, "grid needs at least two samples per axis");
    let axis: Vec<Vec<f64>> = (0..resolution)
        .map(|i| {
            let x = i as f64 / (resolution - 1) as f64;
            (0..side).map(|j| legendre(j, x)).collect()
        })
        .collect();
    let mut values = vec![0.0; resolution * resolution];
    for iy in 0..resolution {
        for iz in 0..resolution {
            let mut acc = 0.0;
            for j in 0..side {
                let fj = axis[iy][j];
                if fj == 0.0 {
                    continue;
                }
                for k in 0..side {
                    let w = weights(j, k);
                    if w != 0.0 {
                        acc += w * fj * axis[iz][k];
                    }
                }
            }
            values[iy * resolution + iz] = acc;
        }
    }
    DensityGrid { resolution, values }
}

/// Samples the basis expansion weighted by an eigenvector: the dependency
/// pattern the feature adds to the joint density per unit of its curve.
pub fn contribution_grid(
    vector: &[f64],
    index_map: &[(usize, usize)],
    resolution: usize,
) -> DensityGrid {
    assert_eq!(vector.len(), index_map.len());
    let side = index_map
        .iter()
        .map(|&(j, k)| j.max(k))
        .max()
        .unwrap_or(0)
        + 1;
    let mut w = vec![0.0; side * side];
    for (&(j, k), &x) in index_map.iter().zip(vector) {
        w[j * side + k] = x;
    }
    grid_from_weights(|j, k| w[j * side + k], side, resolution)
}

/// Samples the modeled joint density of one coefficient matrix.
pub fn density_grid(c: &CoeffMatrix, resolution: usize) -> DensityGrid {
    grid_from_weights(|j, k| c.get(j, k), c.max_degree() + 1, resolution)
}
