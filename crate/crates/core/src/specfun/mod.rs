//! Special functions: Bessel functions, the kernel profile `B_d`, the critical
//! radius profile and its universal limit, and the large-deviation rate.

mod bessel;
mod limit;
mod profile;

pub use bessel::{bessel_j, BesselOrder};
pub use limit::{
    crit_limit, excursion_rate, log_sphere_area, universal_limit, CritLimit, DEFAULT_COARSE_STEP,
    DEFAULT_U_MAX,
};
pub use profile::{
    b_profile, b_profile_deriv, near_diagonal_limit, ratio_profile, RatioProfilePoint,
    FAR_FIELD_LIMIT,
};

pub(crate) use limit::golden_section;
pub(crate) use profile::b_unchecked;

/// Largest dimension for which the profile functions are defined.
pub const MAX_DIMENSION: usize = 25;

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    (half * std::f64::consts::PI.ln() - libm::lgamma(half + 1.0)).exp()
}

fn check_dimension(d: usize) -> crate::Result<()> {
    if d == 0 || d > MAX_DIMENSION {
        return crate::error::domain(format!("dimension {d} outside 1..={MAX_DIMENSION}"));
    }
    Ok(())
}
