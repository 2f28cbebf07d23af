//! Numerical tolerances.
//!
//! Defaults can be overridden field by field. The semi-algebraic equality
//! tolerance also honours the `MOMAP_TOL` environment variable.

use crate::linalg::RankPolicy;

pub const ENV_TOL: &str = "MOMAP_TOL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Equalities in semi-algebraic membership.
    pub equality: f64,
    /// Margin required for strict inequalities.
    pub strict_margin: f64,
    /// Subspace equality via the largest principal angle.
    pub principal_angle: f64,
    /// Structural identities evaluated on exact linear data.
    pub identity: f64,
    /// Residual below which a finite isotropy element counts as certified.
    pub certify: f64,
    pub rank: RankPolicy,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            equality: 1e-9,
            strict_margin: 1e-12,
            principal_angle: 1e-8,
            identity: 1e-10,
            certify: 1e-9,
            rank: RankPolicy::default(),
        }
    }
}

impl Tolerances {
    /// Defaults with `MOMAP_TOL` applied to the equality tolerance when set
    /// to a positive finite number.
    pub fn from_env() -> Self {
        let mut t = Tolerances::default();
        if let Some(v) = std::env::var(ENV_TOL)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v > 0.0)
        {
            t.equality = v;
        }
        t
    }
}
