//! Numerical laboratory for curvature-dimension conditions on metric measure
//! spaces and their cones.
//!
//! The crate is `no_std` (with `alloc`). It covers:
//!
//! - [`metric_space`]: sampled base spaces (circles, spheres, intervals and
//!   their products) carried as distance matrices with quadrature weights.
//! - [`cones`]: Euclidean, spherical and `(κ, N)`-cones over a sampled base,
//!   with explicit zero-weight apex cells.
//! - [`transport`]: exact quadratic-cost optimal transport (network simplex),
//!   cyclic-monotonicity audits, midpoint-chain displacement interpolation.
//! - [`cd`]: distortion coefficients, Rényi entropies and the integral and
//!   pointwise forms of the `CD(K, N)` inequality, plus the wide-base
//!   counterexample on Euclidean cones.
//! - [`ricci`]: closed-form N-Ricci tensors of weighted manifolds and of
//!   their cones, checked against finite differences.
//! - [`spectral`]: kernel graph Laplacians and spectral gaps.
//!
//! Enable the `std` feature for `std::error::Error` impls and the `serde`
//! feature for (de)serialisable report types.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod cd;
pub mod cones;
mod error;
pub mod math;
pub mod metric_space;
pub mod ricci;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};

pub use cd::{
    cd_integral_check, cd_pointwise_check, counterexample_run, renyi_entropy, tau, CdReport,
    CounterexampleConfig, CounterexampleRecord, DistortionQuery, PointwiseViolation,
};
pub use cones::{
    build_cone, cone_distance, is_through_apex_pair, verify_apex_midpoint_antipodality,
    ApexCheck, BaseRef, ConeKind, ConeOptions, ConePoint, ConeSpace, Pole, RadialGrid,
};
pub use metric_space::{
    antipode_set, build_space, midpoint_index, validate_metric, DiscreteMeasure,
    FiniteMetricMeasureSpace, ManifoldDescriptor, PointLabel, ValidationReport, Violation,
};
pub use ricci::{
    euclid_cone_ricci, hess_v_cross_check, hess_w_fd_check, n_ricci, product_sphere_curvature_table,
    spherical_cone_ricci, BaseTerms, ConeTangent, LinearHeight, ModelManifold, Potential,
    RicciEvaluation, WeightedManifoldPoint,
};
pub use spectral::{
    build_laplacian, lichnerowicz_check, poincare_check, spectral_gap, PoincareReport, SpectralReport,
    WeightedGraphLaplacian,
};
pub use transport::{
    apex_mass, check_cyclic_monotonicity, interpolate, solve_ot, CycleViolation,
    DiscretePathEnsemble, PathChain, TransportPlan,
};
