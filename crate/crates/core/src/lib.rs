//! Lag-dependent statistical dependencies between time series.
//!
//! The pipeline: load or synthesize multichannel recordings ([`signal`]),
//! map each channel to the unit interval by marginal or predictive
//! normalization ([`normalize`]), expand joint densities of lagged pairs in
//! an orthonormal polynomial basis ([`basis`], [`coeffs`]), reduce the
//! per-lag coefficient matrices to a few dominant dependency patterns
//! ([`pca`]), and screen directed channel pairs for dependencies that
//! survive predictive normalization of the receiving side ([`causality`]).
//!
//! Everything downstream of loading is deterministic: fixed seeds, fixed
//! summation orders, and a result independent of thread count.

mod accum;

pub mod basis;
pub mod causality;
pub mod coeffs;
pub mod error;
pub mod normalize;
pub mod pca;
pub mod signal;
pub mod special;

pub use basis::{eval_basis_matrix, legendre, BasisMatrix, BasisSpec};
pub use causality::{
    causal_lag_sweep, causality_curve, causality_score, pairwise_causality_map, CausalSweep,
    CausalityAnalysis, CausalityCurve, CausalityMap, ChannelModels, PairCurve, DEFAULT_TOP_R,
};
pub use coeffs::{
    density_eval, estimate_coeffs, lag_sweep, pearson_sweep, remove_marginals, CoeffMatrix,
    CoeffTensor, TensorMeta, MIN_OVERLAP,
};
pub use error::{Error, Result};
pub use normalize::{
    fit_ar, fit_arch, gauss_normalize, p_normalize, AdaptiveTModel, ArModel, ArchModel,
    NormKind, NormalizedSeries, PNormConfig, PNormOutput,
};
pub use pca::{
    contribution_grid, covariance_over_lags, density_grid, extract_features,
    features_from_tensor, pool_coefficients, sym_eigen, DensityGrid, EigenPair, FeatureSet,
    PoolMode, PooledCoeffs, DEFAULT_GRID_RESOLUTION,
};
pub use signal::{
    generate_synthetic, load_csv, select_window, write_csv, Component, ComponentKind,
    LoadOptions, Recording, SynthSpec,
};
