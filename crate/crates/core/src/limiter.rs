//! The two-parameter SBM limiter family.
//!
//! `theta` bounds the limiter from above; `tau` selects dissipative
//! (`tau >= 0.5`), compressive (`0 <= tau < 0.5`) or overcompressive
//! (`tau < 0`) behaviour. `theta = 2, tau = 0.5` is the Minmod2 limiter.

use crate::error::{Error, Result};

pub const THETA_MIN: f64 = 1.0;
pub const THETA_MAX: f64 = 2.0;
pub const TAU_MIN: f64 = -0.25;
pub const TAU_MAX: f64 = 0.5;

/// Differences below this fraction of the local data magnitude count as zero.
pub const FLAT_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimiterParams {
    theta: f64,
    tau: f64,
}

impl LimiterParams {
    pub fn new(theta: f64, tau: f64) -> Result<Self> {
        if !(THETA_MIN..=THETA_MAX).contains(&theta) {
            return Err(Error::invalid_parameter(
                "theta",
                format!("must lie in [1, 2], got {theta}"),
            ));
        }
        if !(TAU_MIN..=TAU_MAX).contains(&tau) {
            return Err(Error::invalid_parameter(
                "tau",
                format!("must lie in [-0.25, 0.5], got {tau}"),
            ));
        }
        Ok(Self { theta, tau })
    }

    /// Minmod2: `theta = 2`, `tau = 0.5`.
    pub const MINMOD2: LimiterParams = LimiterParams {
        theta: 2.0,
        tau: 0.5,
    };

    /// Skips range validation; `tau` values come from the indicator maps,
    /// which only produce values inside the admissible range.
    #[inline]
    pub(crate) const fn new_unchecked(theta: f64, tau: f64) -> Self {
        Self { theta, tau }
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// `phi(r)`: zero for `r <= 0`, `min(theta r, 1 + tau (r - 1))` on `(0, 1]`
/// and `r phi(1/r)` above one.
///
/// The branches are evaluated in the expanded forms `(1 - tau) + tau r` and
/// `min(theta, tau + (1 - tau) r)`, which are algebraically identical and make
/// the Minmod2 member agree bitwise with `min(2r, (1 + r)/2, 2)`.
#[inline]
pub fn phi_sbm(r: f64, params: &LimiterParams) -> f64 {
    let LimiterParams { theta, tau } = *params;
    if r <= 0.0 || r.is_nan() {
        0.0
    } else if r <= 1.0 {
        (theta * r).min((1.0 - tau) + tau * r)
    } else {
        theta.min(tau + (1.0 - tau) * r)
    }
}

/// `phi(r) * (mid - prev)` with `r = (next - mid) / (mid - prev)`, the
/// limited one-cell increment. Flat backward differences give zero.
///
/// Evaluated without forming `r`: with `lo`, `hi` the smaller and larger of
/// `|mid - prev|`, `|next - mid|` the magnitude is
/// `min(theta lo, tau lo + (1 - tau) hi)`, which covers both `r <= 1` and
/// `r > 1` and keeps the hot path free of divisions and branches.
#[inline]
pub fn limited_increment(prev: f64, mid: f64, next: f64, params: &LimiterParams) -> f64 {
    let backward = mid - prev;
    let forward = next - mid;
    let (a, b) = (backward.abs(), forward.abs());
    let scale = fmax(fmax(prev.abs(), mid.abs()), fmax(next.abs(), 1.0));
    let LimiterParams { theta, tau } = *params;
    let (lo, hi) = (fmin(a, b), fmax(a, b));
    let mag = fmin(theta * lo, tau * lo + (1.0 - tau) * hi);
    // r <= 0 covers extrema and a flat forward difference.
    let active = backward * forward > 0.0 && a >= FLAT_THRESHOLD * scale;
    if active {
        mag.copysign(backward)
    } else {
        0.0
    }
}

/// NaN-oblivious min and max; inputs here are finite.
#[inline(always)]
fn fmin(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}

#[inline(always)]
fn fmax(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

/// Limited slope of the middle value of three consecutive values spaced `dx`.
#[inline]
pub fn slope_limited(prev: f64, mid: f64, next: f64, dx: f64, params: &LimiterParams) -> f64 {
    limited_increment(prev, mid, next, params) / dx
}

/// Componentwise [`slope_limited`] on 4-vectors.
pub fn slope_limited_vec(
    prev: &[f64; 4],
    mid: &[f64; 4],
    next: &[f64; 4],
    dx: f64,
    params: &LimiterParams,
) -> [f64; 4] {
    std::array::from_fn(|m| slope_limited(prev[m], mid[m], next[m], dx, params))
}
