//! Spectral-projection embeddings of flat tori and the round sphere, the critical
//! radius of the embedded manifold, and excursion probabilities of normalised
//! random waves drawn from the spherical ensemble.
//!
//! Module map:
//! - [`specfun`]: Bessel functions, the kernel profile `B_d`, the universal
//!   critical-radius limit and the large-deviation rate.
//! - [`manifolds`]: eigenbases, geodesic distances, kernel jets and local Weyl law
//!   diagnostics.
//! - [`embedding`]: the exact finite-lambda critical-radius ratio and its searches.
//! - [`tube`]: tube formula on spheres and exact excursion probabilities on tori.
//! - [`montecarlo`]: seeded, thread-count independent simulation of the same
//!   probabilities and of the expected Euler characteristic on the circle.

pub mod embedding;
pub mod error;
mod linalg;
pub mod manifolds;
pub mod montecarlo;
pub mod specfun;
pub mod tube;

pub use embedding::{
    critical_radius, local_ratio_inf, pullback_check, ratio_at, CriticalRadiusEstimate, LocalRatioInf, RatioSample,
    Regime, SearchConfig,
};
pub use error::{Error, Result};
pub use manifolds::{
    embedding_vector, enumerate_basis, geodesic_distance, kernel_jet, kernel_value, weyl_diagnostics, KernelJet,
    ManifoldSpec, Mode, Point, SpectralCutoff, WeylReport,
};
pub use montecarlo::{
    estimate_excursion, euler_char_circle, sample_coeffs, sup_normalized_field, EulerEstimate, MCConfig, MCEstimate,
};
pub use specfun::{
    b_profile, b_profile_deriv, bessel_j, crit_limit, excursion_rate, log_sphere_area, ratio_profile, BesselOrder,
    CritLimit, RatioProfilePoint,
};
pub use tube::{
    excursion_prob_exact, f_coeff, g_integral, ldp_curve, torus_lk, LdpPoint, LogProbability, LogValue, TubeQuery,
};
