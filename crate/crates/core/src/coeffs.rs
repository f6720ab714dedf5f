//! Joint-density expansion coefficients over time offsets.
//!
//! For normalized series y, z the joint density on the unit square is
//! modeled as rho(y, z) = sum_{j,k} a_jk f_j(y) f_k(z) with the orthonormal
//! basis from [`crate::basis`]. Orthonormality turns estimation into plain
//! averaging: a_jk at offset d is the mean of f_j(y_t) f_k(z_{t+d}) over all
//! aligned pairs. A positive offset therefore means the second series'
//! value occurs after the first's.
//!
//! The sweep evaluates each basis row once and reuses it for every offset,
//! so a full sweep costs one shifted dot product per (j, k, offset) over
//! contiguous memory. Block sums are combined pairwise to keep rounding at
//! the 1e-12 level the estimator contracts promise.

use std::io::{Read, Write};
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::accum::{dot, pairwise_sum};
use crate::basis::{eval_basis_matrix, legendre, BasisMatrix, BasisSpec};
use crate::error::{Error, Result};
use crate::normalize::{NormKind, NormalizedSeries};

/// Minimum number of aligned pairs a single estimate needs.
pub const MIN_OVERLAP: usize = 1000;

const BLOCK: usize = 1024;

/// Coefficient matrix for one offset; entry (j, k) weighs f_j(y) f_k(z).
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMatrix {
    m: usize,
    data: Vec<f64>,
    /// Offset of the z series relative to the y series, in samples.
    pub offset: i64,
    /// Number of aligned pairs behind each entry.
    pub pair_count: usize,
}

impl CoeffMatrix {
    pub fn max_degree(&self) -> usize {
        self.m
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * (self.m + 1) + k]
    }

    /// Row-major (j outer, k inner) view of all (m+1)^2 entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Transposed copy, swapping the roles of the two series.
    pub fn transposed(&self) -> CoeffMatrix {
        let side = self.m + 1;
        let mut data = vec![0.0; side * side];
        for j in 0..side {
            for k in 0..side {
                data[k * side + j] = self.data[j * side + k];
            }
        }
        CoeffMatrix {
            m: self.m,
            data,
            offset: -self.offset,
            pair_count: self.pair_count,
        }
    }
}

/// The aligned index range [lo, hi) for pairs (y_t, z_{t+offset}).
fn overlap(
    (ny, by): (usize, usize),
    (nz, bz): (usize, usize),
    offset: i64,
) -> Result<(usize, usize)> {
    let lo = (by as i64).max(bz as i64 - offset).max(0);
    let hi = (ny as i64).min(nz as i64 - offset);
    let n = hi - lo;
    if n < MIN_OVERLAP as i64 {
        return Err(Error::InsufficientOverlap {
            required: MIN_OVERLAP,
            actual: n.max(0) as usize,
        });
    }
    Ok((lo as usize, hi as usize))
}

/// Estimates the coefficient matrix at one offset by averaging basis
/// products over all aligned pairs. a[0][0] is exactly 1.
pub fn estimate_coeffs(fy: &BasisMatrix, fz: &BasisMatrix, offset: i64) -> Result<CoeffMatrix> {
    let m = fy.max_degree();
    if fz.max_degree() != m {
        return Err(Error::invalid(format!(
            "basis degree mismatch: {m} vs {}",
            fz.max_degree()
        )));
    }
    let (lo, hi) = overlap(
        (fy.len(), fy.burn_in()),
        (fz.len(), fz.burn_in()),
        offset,
    )?;
    let n = hi - lo;
    let side = m + 1;
    let n_blocks = n.div_ceil(BLOCK);
    let mut partials = vec![0.0f64; side * side * n_blocks];

    for b in 0..n_blocks {
        let t0 = lo + b * BLOCK;
        let t1 = (t0 + BLOCK).min(hi);
        let z0 = (t0 as i64 + offset) as usize;
        let z1 = (t1 as i64 + offset) as usize;
        for j in 0..side {
            let ay = &fy.row(j)[t0..t1];
            for k in 0..side {
                let az = &fz.row(k)[z0..z1];
                partials[(j * side + k) * n_blocks + b] = dot(ay, az);
            }
        }
    }

    let mut data = vec![0.0; side * side];
    for s in 0..side * side {
        data[s] = pairwise_sum(&partials[s * n_blocks..(s + 1) * n_blocks]) / n as f64;
    }
    Ok(CoeffMatrix {
        m,
        data,
        offset,
        pair_count: n,
    })
}

/// Removes the product of marginals from the interior block:
/// a'_jk = a_jk - a_j0 * a_0k for j, k >= 1. Row 0 and column 0 carry the
/// marginal information unchanged.
pub fn remove_marginals(c: &CoeffMatrix) -> CoeffMatrix {
    let side = c.m + 1;
    let mut data = c.data.clone();
    for j in 1..side {
        for k in 1..side {
            data[j * side + k] -= c.data[j * side] * c.data[k];
        }
    }
    CoeffMatrix {
        m: c.m,
        data,
        offset: c.offset,
        pair_count: c.pair_count,
    }
}

/// Evaluates the modeled joint density at a point of the unit square.
pub fn density_eval(c: &CoeffMatrix, y: f64, z: f64) -> f64 {
    let side = c.m + 1;
    let fy: Vec<f64> = (0..side).map(|j| legendre(j, y)).collect();
    let fz: Vec<f64> = (0..side).map(|k| legendre(k, z)).collect();
    let mut acc = 0.0;
    for j in 0..side {
        let row = &c.data[j * side..(j + 1) * side];
        let mut inner = 0.0;
        for k in 0..side {
            inner += row[k] * fz[k];
        }
        acc += fy[j] * inner;
    }
    acc
}

/// Identification of the two series a tensor was estimated from.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TensorMeta {
    pub pair: (String, String),
    pub kinds: (NormKind, NormKind),
    pub sample_rate_hz: f64,
}

impl Default for TensorMeta {
    fn default() -> Self {
        TensorMeta {
            pair: (String::new(), String::new()),
            kinds: (NormKind::Basic, NormKind::Basic),
            sample_rate_hz: 0.0,
        }
    }
}

/// Per-offset coefficient matrices for one series pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    pub m: usize,
    pub lags: Vec<i64>,
    mats: Vec<CoeffMatrix>,
    pub meta: TensorMeta,
}

impl CoeffTensor {
    pub fn matrices(&self) -> &[CoeffMatrix] {
        &self.mats
    }

    pub fn matrix(&self, i: usize) -> &CoeffMatrix {
        &self.mats[i]
    }

    pub fn num_lags(&self) -> usize {
        self.lags.len()
    }

    pub fn with_meta(mut self, pair: (String, String), sample_rate_hz: f64) -> Self {
        self.meta.pair = pair;
        self.meta.sample_rate_hz = sample_rate_hz;
        self
    }

    /// Flat CSV export with columns lag, j, k, value. Values use the
    /// shortest exact representation.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lag,j,k,value")?;
        let side = self.m + 1;
        for (lag, mat) in self.lags.iter().zip(&self.mats) {
            for j in 0..side {
                for k in 0..side {
                    writeln!(w, "{lag},{j},{k},{}", mat.get(j, k))?;
                }
            }
        }
        Ok(())
    }

    /// Compact binary export. Layout, all little-endian: magic "LGC1",
    /// u32 max degree, u32 lag count, u8+u8 normalization kinds (0 basic,
    /// 1 predicted), f64 sample rate, i64 lags, u64 pair counts, then per
    /// lag the (m+1)^2 coefficients row-major in j, k.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"LGC1")?;
        w.write_all(&(self.m as u32).to_le_bytes())?;
        w.write_all(&(self.lags.len() as u32).to_le_bytes())?;
        let kind_byte = |k: NormKind| -> u8 {
            match k {
                NormKind::Basic => 0,
                NormKind::Predicted => 1,
            }
        };
        w.write_all(&[kind_byte(self.meta.kinds.0), kind_byte(self.meta.kinds.1)])?;
        w.write_all(&self.meta.sample_rate_hz.to_le_bytes())?;
        for &lag in &self.lags {
            w.write_all(&lag.to_le_bytes())?;
        }
        for mat in &self.mats {
            w.write_all(&(mat.pair_count as u64).to_le_bytes())?;
        }
        for mat in &self.mats {
            for &v in mat.as_slice() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads the binary layout written by [`CoeffTensor::write_binary`].
    /// Pair names are not part of the format and come back empty.
    pub fn read_binary<R: Read>(mut r: R) -> Result<CoeffTensor> {
        fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf)?;
            Ok(buf)
        }
        let magic = take::<4>(&mut r)?;
        if &magic != b"LGC1" {
            return Err(Error::InvalidFormat("bad magic, not a coefficient tensor".into()));
        }
        let m = u32::from_le_bytes(take::<4>(&mut r)?) as usize;
        let n_lags = u32::from_le_bytes(take::<4>(&mut r)?) as usize;
        if m > 64 || n_lags > 1 << 24 {
            return Err(Error::InvalidFormat(format!(
                "implausible header: m = {m}, lags = {n_lags}"
            )));
        }
        let kind_of = |b: u8| -> Result<NormKind> {
            match b {
                0 => Ok(NormKind::Basic),
                1 => Ok(NormKind::Predicted),
                other => Err(Error::InvalidFormat(format!("bad kind byte {other}"))),
            }
        };
        let kinds_raw = take::<2>(&mut r)?;
        let kinds = (kind_of(kinds_raw[0])?, kind_of(kinds_raw[1])?);
        let sample_rate_hz = f64::from_le_bytes(take::<8>(&mut r)?);
        let mut lags = Vec::with_capacity(n_lags);
        for _ in 0..n_lags {
            lags.push(i64::from_le_bytes(take::<8>(&mut r)?));
        }
        let mut counts = Vec::with_capacity(n_lags);
        for _ in 0..n_lags {
            counts.push(u64::from_le_bytes(take::<8>(&mut r)?) as usize);
        }
        let side = m + 1;
        let mut mats = Vec::with_capacity(n_lags);
        for i in 0..n_lags {
            let mut data = Vec::with_capacity(side * side);
            for _ in 0..side * side {
                data.push(f64::from_le_bytes(take::<8>(&mut r)?));
            }
            mats.push(CoeffMatrix {
                m,
                data,
                offset: lags[i],
                pair_count: counts[i],
            });
        }
        Ok(CoeffTensor {
            m,
            lags,
            mats,
            meta: TensorMeta {
                pair: (String::new(), String::new()),
                kinds,
                sample_rate_hz,
            },
        })
    }
}

/// Estimates coefficient matrices for every offset in `lags`.
///
/// Basis rows are evaluated once per series. Offsets are independent and are
/// distributed over the rayon pool; the result is identical for any worker
/// count. For the autocorrelation of a single series pass the series twice
/// with a range that excludes offset zero.
pub fn lag_sweep(
    a: &NormalizedSeries,
    b: &NormalizedSeries,
    spec: &BasisSpec,
    lags: RangeInclusive<i64>,
) -> Result<CoeffTensor> {
    if lags.is_empty() {
        return Err(Error::invalid("empty lag range"));
    }
    let fy = eval_basis_matrix(a, spec);
    let fz = eval_basis_matrix(b, spec);
    let lag_list: Vec<i64> = lags.collect();
    let mats: Vec<CoeffMatrix> = lag_list
        .par_iter()
        .map(|&d| estimate_coeffs(&fy, &fz, d))
        .collect::<Result<_>>()?;
    Ok(CoeffTensor {
        m: spec.max_degree,
        lags: lag_list,
        mats,
        meta: TensorMeta {
            pair: (String::new(), String::new()),
            kinds: (a.kind, b.kind),
            sample_rate_hz: 0.0,
        },
    })
}

/// Pearson correlation of the aligned pairs at each offset; the linear
/// baseline the expansion coefficients are compared against.
pub fn pearson_sweep(
    a: &NormalizedSeries,
    b: &NormalizedSeries,
    lags: &[i64],
) -> Result<Vec<f64>> {
    let wy = (a.values.len(), a.burn_in);
    let wz = (b.values.len(), b.burn_in);
    let mut out = Vec::with_capacity(lags.len());
    for &d in lags {
        let (lo, hi) = overlap(wy, wz, d)?;
        let n = (hi - lo) as f64;
        let ys = &a.values[lo..hi];
        let zs = &b.values[(lo as i64 + d) as usize..(hi as i64 + d) as usize];
        let my = ys.iter().sum::<f64>() / n;
        let mz = zs.iter().sum::<f64>() / n;
        let mut syz = 0.0;
        let mut syy = 0.0;
        let mut szz = 0.0;
        for (y, z) in ys.iter().zip(zs) {
            syz += (y - my) * (z - mz);
            syy += (y - my) * (y - my);
            szz += (z - mz) * (z - mz);
        }
        let denom = (syy * szz).sqrt();
        out.push(if denom > 0.0 { syz / denom } else { 0.0 });
    }
    Ok(out)
}
