//! Löhner-type smoothness indicator on the density and the maps from the
//! averaged indicator to the per-cell limiter parameter `tau`.
//!
//! Pipeline per cell: raw indicator `E` from a 3-point (1-D) or 5-point
//! (2-D) density stencil, local averaging to `Ē` with 1-4-1 (1-D) or
//! 1-4-1 x 1-4-1 (2-D) weights, then `tau = map(Ē, C)`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, GHOST};
use crate::limiter::{TAU_MAX, TAU_MIN};
use crate::state::Dimension;

pub const DEFAULT_EPSILON: f64 = 0.2;

/// `tau` slot value of a cell whose slopes the positivity fallback zeroed.
pub(crate) const FIRST_ORDER: f64 = f64::NAN;

/// How the limiter parameter is chosen per cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// Continuous tanh map of `Ē` around `C`.
    New,
    /// Discontinuous switch between -0.25 and 0.5 at `Ē = C`.
    Old,
    /// One `tau` everywhere; the indicator is not evaluated.
    Fixed(f64),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::New => f.write_str("new"),
            Strategy::Old => f.write_str("old"),
            Strategy::Fixed(t) => write!(f, "fixed:{t}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "new" => Ok(Strategy::New),
            "old" => Ok(Strategy::Old),
            other => {
                let tau = other
                    .strip_prefix("fixed:")
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::invalid_parameter(
                            "scheme",
                            format!("expected new | old | fixed:<tau>, got `{s}`"),
                        )
                    })?;
                if !(TAU_MIN..=TAU_MAX).contains(&tau) {
                    return Err(Error::invalid_parameter(
                        "scheme",
                        format!("fixed tau must lie in [-0.25, 0.5], got {tau}"),
                    ));
                }
                Ok(Strategy::Fixed(tau))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndicatorConfig {
    /// Noise filter in the indicator denominator.
    pub epsilon: f64,
    /// Adaption constant.
    pub c: f64,
    pub strategy: Strategy,
}

impl IndicatorConfig {
    pub fn new(strategy: Strategy, c: f64, epsilon: f64) -> Result<Self> {
        let config = Self {
            epsilon,
            c,
            strategy,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid_parameter(
                "epsilon",
                format!("must be > 0, got {}", self.epsilon),
            ));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid_parameter(
                "C",
                format!("must be > 0, got {}", self.c),
            ));
        }
        if let Strategy::Fixed(tau) = self.strategy {
            if !(TAU_MIN..=TAU_MAX).contains(&tau) {
                return Err(Error::invalid_parameter(
                    "tau",
                    format!("must lie in [-0.25, 0.5], got {tau}"),
                ));
            }
        }
        Ok(())
    }
}

/// `|r+ - 2r + r-| / (|r+ - r| + |r - r-| + eps (|r+| + 2|r| + |r-|))`,
/// zero when the denominator vanishes.
#[inline]
fn lohner_ratio(minus: f64, mid: f64, plus: f64, epsilon: f64) -> f64 {
    let num = (plus - 2.0 * mid + minus).abs();
    let den = filtered_variation(minus, mid, plus, epsilon);
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[inline]
fn filtered_variation(minus: f64, mid: f64, plus: f64, epsilon: f64) -> f64 {
    (plus - mid).abs()
        + (mid - minus).abs()
        + epsilon * (plus.abs() + 2.0 * mid.abs() + minus.abs())
}

/// Raw 1-D indicator. `out[m]` belongs to `rho[m + 1]`, so the result is two
/// entries shorter than the input.
pub fn si_raw_1d(rho: &[f64], epsilon: f64) -> Vec<f64> {
    rho.windows(3)
        .map(|w| lohner_ratio(w[0], w[1], w[2], epsilon))
        .collect()
}

/// 1-4-1 average. `out[m]` belongs to `e[m + 1]`.
pub fn si_smooth_1d(e: &[f64]) -> Vec<f64> {
    e.windows(3)
        .map(|w| (w[0] + 4.0 * w[1] + w[2]) / 6.0)
        .collect()
}

/// Raw 2-D indicator `sqrt(E1 / E2)` on an array indexed `[i, k]` (x first).
/// The result drops one layer on every side.
pub fn si_raw_2d(rho: ArrayView2<'_, f64>, epsilon: f64) -> Array2<f64> {
    let (n0, n1) = rho.dim();
    assert!(n0 >= 3 && n1 >= 3, "need at least a 3x3 stencil");
    Array2::from_shape_fn((n0 - 2, n1 - 2), |(a, b)| {
        let (i, k) = (a + 1, b + 1);
        let c = rho[[i, k]];
        let (xm, xp) = (rho[[i - 1, k]], rho[[i + 1, k]]);
        let (ym, yp) = (rho[[i, k - 1]], rho[[i, k + 1]]);
        let dxx = xp - 2.0 * c + xm;
        let dyy = yp - 2.0 * c + ym;
        let e1 = dxx * dxx + dyy * dyy;
        let vx = filtered_variation(xm, c, xp, epsilon);
        let vy = filtered_variation(ym, c, yp, epsilon);
        let e2 = vx * vx + vy * vy;
        if e2 > 0.0 {
            (e1 / e2).sqrt()
        } else {
            0.0
        }
    })
}

/// Nine-point average with weights (1 4 1; 4 16 4; 1 4 1) / 36.
pub fn si_smooth_2d(e: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n0, n1) = e.dim();
    assert!(n0 >= 3 && n1 >= 3, "need at least a 3x3 stencil");
    Array2::from_shape_fn((n0 - 2, n1 - 2), |(a, b)| {
        let (i, k) = (a + 1, b + 1);
        let corners = e[[i - 1, k - 1]] + e[[i - 1, k + 1]] + e[[i + 1, k - 1]] + e[[i + 1, k + 1]];
        let edges = e[[i - 1, k]] + e[[i, k - 1]] + e[[i, k + 1]] + e[[i + 1, k]];
        (corners + 4.0 * edges + 16.0 * e[[i, k]]) / 36.0
    })
}

/// Continuous map: about 0.5 where `Ē << C`, about -0.25 where `Ē >> C`, and
/// exactly 0.125 at `Ē = C`. The transition is steeper on the smooth side.
#[inline]
pub fn tau_new(e_bar: f64, c: f64) -> f64 {
    let gain = if e_bar < c { 2000.0 } else { 300.0 };
    0.125 * (1.0 + 3.0 * (gain * (c - e_bar)).tanh())
}

/// Discontinuous switch; equality goes to the dissipative branch.
#[inline]
pub fn tau_old(e_bar: f64, c: f64) -> f64 {
    if e_bar > c {
        TAU_MIN
    } else {
        TAU_MAX
    }
}

/// Per-cell indicator values and limiter parameters on the interior cells
/// plus one halo layer in every active direction.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorField {
    grid: Grid,
    e: Vec<f64>,
    e_bar: Vec<f64>,
    tau: Vec<f64>,
}

impl IndicatorField {
    /// Uniform `tau`; indicator values are NaN (not evaluated).
    pub fn uniform(grid: Grid, tau: f64) -> Self {
        let n = halo_len(&grid);
        Self {
            grid,
            e: vec![f64::NAN; n],
            e_bar: vec![f64::NAN; n],
            tau: vec![tau; n],
        }
    }

    #[inline]
    pub(crate) fn index(&self, i: isize, k: isize) -> usize {
        let hx = 1;
        let hy = halo_y(&self.grid);
        debug_assert!(i >= -hx && i <= self.grid.nx() as isize, "i = {i}");
        debug_assert!(k >= -hy && k < self.grid.ny() as isize + hy, "k = {k}");
        (k + hy) as usize * (self.grid.nx() + 2) + (i + hx) as usize
    }

    #[inline]
    pub fn tau(&self, i: isize, k: isize) -> f64 {
        self.tau[self.index(i, k)]
    }

    #[inline]
    pub fn e(&self, i: isize, k: isize) -> f64 {
        self.e[self.index(i, k)]
    }

    #[inline]
    pub fn e_bar(&self, i: isize, k: isize) -> f64 {
        self.e_bar[self.index(i, k)]
    }

    pub fn set_tau(&mut self, i: isize, k: isize, tau: f64) {
        let idx = self.index(i, k);
        self.tau[idx] = tau;
    }

    /// Forces zero slopes in cell `(i, k)` and its direct neighbours, as far
    /// as they are stored. Along a periodic axis every image of a cell is
    /// marked too, so both ends see the same interface flux. Newly marked
    /// interior cells are appended to `marked`.
    pub(crate) fn force_first_order_around(
        &mut self,
        i: isize,
        k: isize,
        periodic: (bool, bool),
        marked: &mut Vec<(isize, isize)>,
    ) {
        let (nx, ny) = (self.grid.nx() as isize, self.grid.ny() as isize);
        let hy = halo_y(&self.grid);
        let images = |c: isize, n: isize, wrap: bool| if wrap { [c - n, c, c + n] } else { [c; 3] };
        for dk in -hy..=hy {
            for di in -1..=1 {
                for b in images(k + dk, ny, periodic.1 && hy > 0) {
                    for a in images(i + di, nx, periodic.0) {
                        if a < -1 || a > nx || b < -hy || b >= ny + hy {
                            continue;
                        }
                        let idx = self.index(a, b);
                        if !self.tau[idx].is_nan() {
                            self.tau[idx] = FIRST_ORDER;
                            if (0..nx).contains(&a) && (0..ny).contains(&b) {
                                marked.push((a, b));
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Whether the indicator values were evaluated.
    pub fn has_indicator(&self) -> bool {
        self.e.first().is_some_and(|v| !v.is_nan())
    }

    /// `(i, k, E, Ē, tau)` over interior cells, storage order.
    pub fn interior(&self) -> impl Iterator<Item = (isize, isize, f64, f64, f64)> + '_ {
        let g = self.grid;
        (0..g.ny() as isize).flat_map(move |k| {
            (0..g.nx() as isize)
                .map(move |i| (i, k, self.e(i, k), self.e_bar(i, k), self.tau(i, k)))
        })
    }

    /// Every stored `tau`, halo included.
    pub fn tau_values(&self) -> &[f64] {
        &self.tau
    }
}

fn halo_y(grid: &Grid) -> isize {
    match grid.dim() {
        Dimension::One => 0,
        Dimension::Two => 1,
    }
}

fn halo_len(grid: &Grid) -> usize {
    (grid.nx() + 2) * (grid.ny() + 2 * halo_y(grid) as usize)
}

/// Limiter parameters for the current state. The field's ghost cells must be
/// filled. With [`Strategy::Fixed`] the indicator is skipped.
pub fn compute_tau_field(field: &Field, config: &IndicatorConfig) -> IndicatorField {
    match config.strategy {
        Strategy::Fixed(tau) => IndicatorField::uniform(*field.grid(), tau),
        _ => evaluate_indicator(field, config),
    }
}

/// Like [`compute_tau_field`] but always evaluates `E` and `Ē`, for output.
pub fn evaluate_indicator(field: &Field, config: &IndicatorConfig) -> IndicatorField {
    let grid = *field.grid();
    let (e, e_bar) = match grid.dim() {
        Dimension::One => indicator_1d(field, config.epsilon),
        Dimension::Two => indicator_2d(field, config.epsilon),
    };
    let tau = e_bar
        .iter()
        .map(|&eb| match config.strategy {
            Strategy::New => tau_new(eb, config.c),
            Strategy::Old => tau_old(eb, config.c),
            Strategy::Fixed(t) => t,
        })
        .collect();
    IndicatorField {
        grid,
        e,
        e_bar,
        tau,
    }
}

fn indicator_1d(field: &Field, epsilon: f64) -> (Vec<f64>, Vec<f64>) {
    let rho = field.density();
    debug_assert_eq!(rho.len(), field.grid().nx() + 2 * GHOST);
    // Padded density covers cells -3..nx+2, raw E covers -2..nx+1 and the
    // average covers -1..nx, which is the stored halo.
    let raw = si_raw_1d(&rho, epsilon);
    let e_bar = si_smooth_1d(&raw);
    let e = raw[1..raw.len() - 1].to_vec();
    (e, e_bar)
}

fn indicator_2d(field: &Field, epsilon: f64) -> (Vec<f64>, Vec<f64>) {
    let grid = field.grid();
    let g = GHOST as isize;
    let (pnx, pny) = (grid.padded_nx(), grid.padded_ny());
    let rho = Array2::from_shape_fn((pnx, pny), |(a, b)| {
        field.get(a as isize - g, b as isize - g).rho
    });
    let raw = si_raw_2d(rho.view(), epsilon);
    let e_bar = si_smooth_2d(raw.view());
    let (hx, hy) = e_bar.dim();
    // Flatten y-outer to match the halo layout.
    let mut e_flat = Vec::with_capacity(hx * hy);
    let mut eb_flat = Vec::with_capacity(hx * hy);
    for b in 0..hy {
        for a in 0..hx {
            e_flat.push(raw[[a + 1, b + 1]]);
            eb_flat.push(e_bar[[a, b]]);
        }
    }
    (e_flat, eb_flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn raw_1d_examples() {
        assert!(si_raw_1d(&[1.0; 6], 0.2).iter().all(|&e| e == 0.0));
        let linear: Vec<f64> = (0..8).map(|j| 2.0 + 3.0 * j as f64 * 0.25).collect();
        assert!(si_raw_1d(&linear, 0.2).iter().all(|&e| e == 0.0));
        // Denominator 1 + 0 + 0.2 * (2 + 2 + 1).
        let e = si_raw_1d(&[1.0, 1.0, 2.0], 0.2);
        assert!((e[0] - 0.5).abs() < 1e-15);
        assert_eq!(si_raw_1d(&[0.0, 0.0, 0.0], 0.2), vec![0.0]);
    }

    #[test]
    fn smooth_1d_examples() {
        assert_eq!(si_smooth_1d(&[0.0, 1.0, 0.0]), vec![4.0 / 6.0]);
        let c = si_smooth_1d(&[0.3; 5]);
        assert!(c.iter().all(|v| (v - 0.3).abs() < 1e-16));
    }

    #[test]
    fn raw_2d_examples() {
        let flat = Array2::from_elem((5, 4), 2.0);
        assert!(si_raw_2d(flat.view(), 0.2).iter().all(|&e| e == 0.0));
        let bilinear =
            Array2::from_shape_fn((6, 5), |(i, k)| 1.0 + 0.5 * i as f64 + 0.25 * k as f64);
        assert!(si_raw_2d(bilinear.view(), 0.2).iter().all(|&e| e == 0.0));

        // x-profile (1, 1, 2), constant in y.
        let rho = array![[1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]];
        let e = si_raw_2d(rho.view(), 0.2)[[0, 0]];
        // Hand evaluation: E1 = 1, E2 = (1 + 0.2*5)^2 + (0 + 0.2*4)^2.
        let expect = (1.0_f64 / (2.0 * 2.0 + 0.8 * 0.8)).sqrt();
        assert!((e - expect).abs() < 1e-15, "{e} vs {expect}");
    }

    #[test]
    fn smooth_2d_examples() {
        let mut e = Array2::zeros((3, 3));
        e[[1, 1]] = 1.0;
        assert_eq!(si_smooth_2d(e.view())[[0, 0]], 16.0 / 36.0);
        let c = si_smooth_2d(Array2::from_elem((4, 4), 0.7).view());
        assert!(c.iter().all(|v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn tau_maps() {
        assert_eq!(tau_new(0.01, 0.01), 0.125);
        assert!((tau_new(0.0, 0.01) - 0.5).abs() < 1e-12);
        assert!((tau_new(1.0, 0.01) + 0.25).abs() < 1e-12);
        assert_eq!(tau_old(0.02, 0.01), -0.25);
        assert_eq!(tau_old(0.01, 0.01), 0.5);
        assert_eq!(tau_old(0.0, 0.01), 0.5);
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("new".parse::<Strategy>().unwrap(), Strategy::New);
        assert_eq!("OLD".parse::<Strategy>().unwrap(), Strategy::Old);
        assert_eq!(
            "fixed:0.5".parse::<Strategy>().unwrap(),
            Strategy::Fixed(0.5)
        );
        assert!("fixed:0.9".parse::<Strategy>().is_err());
        assert!("weno".parse::<Strategy>().is_err());
        assert_eq!(Strategy::Fixed(-0.25).to_string(), "fixed:-0.25");
        assert!(IndicatorConfig::new(Strategy::New, 0.0, 0.2).is_err());
        assert!(IndicatorConfig::new(Strategy::New, 0.01, 0.0).is_err());
    }
}
