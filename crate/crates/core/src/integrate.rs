//! Semi-discrete right-hand sides, CFL step control and three-stage SSP
//! Runge-Kutta time stepping.
//!
//! A step is a fixed sequence of barriers: ghost fill, limiter parameters,
//! interface fluxes (parallel), cell update (parallel). Every cell value is a
//! pure function of a fixed-size stencil, so results do not depend on the
//! number of worker threads.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::boundary::{fill_ghosts, BoundaryConditions};
use crate::error::{Error, Result};
use crate::flux::{interface_flux, FluxKind};
use crate::grid::Field;
use crate::indicator::{
    compute_tau_field, IndicatorConfig, IndicatorField, Strategy, DEFAULT_EPSILON,
};
use crate::limiter::{THETA_MAX, THETA_MIN};
use crate::reconstruct::{reconstruct_stencil, ReconstructionMode, SweepParams};
use crate::state::{
    admissible_prim, cons_to_prim, ConservedState, Dimension, Direction, GasModel, PrimitiveState,
};

pub const DEFAULT_CFL: f64 = 0.4;
pub const DEFAULT_THETA: f64 = 2.0;

/// When the limiter parameters are recomputed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TauRefresh {
    /// Once per time step, before the first stage.
    #[default]
    PerStep,
    /// Before every Runge-Kutta stage.
    PerStage,
}

impl fmt::Display for TauRefresh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TauRefresh::PerStep => "step",
            TauRefresh::PerStage => "stage",
        })
    }
}

impl FromStr for TauRefresh {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "step" | "per-step" => Ok(TauRefresh::PerStep),
            "stage" | "per-stage" => Ok(TauRefresh::PerStage),
            other => Err(Error::invalid_parameter(
                "tau-refresh",
                format!("expected step | stage, got `{other}`"),
            )),
        }
    }
}

/// Pointwise source terms added to the flux divergence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SourceTerm {
    #[default]
    None,
    /// Unit gravity along +y: `(0, 0, rho, rho v)`.
    Gravity,
}

impl SourceTerm {
    #[inline]
    pub fn evaluate(&self, u: &ConservedState) -> ConservedState {
        match self {
            SourceTerm::None => ConservedState::ZERO,
            SourceTerm::Gravity => ConservedState::new(0.0, 0.0, u.rho, u.mom_y),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub indicator: IndicatorConfig,
    pub theta: f64,
    pub cfl: f64,
    pub gas: GasModel,
    pub flux: FluxKind,
    pub tau_refresh: TauRefresh,
    pub reconstruction: ReconstructionMode,
}

impl SchemeConfig {
    /// Defaults: `theta = 2`, CFL 0.4, `epsilon = 0.2`, central-upwind flux,
    /// limiter parameters refreshed once per step.
    pub fn new(strategy: Strategy, c: f64, gas: GasModel) -> Result<Self> {
        let config = Self {
            indicator: IndicatorConfig::new(strategy, c, DEFAULT_EPSILON)?,
            theta: DEFAULT_THETA,
            cfl: DEFAULT_CFL,
            gas,
            flux: FluxKind::Cu,
            tau_refresh: TauRefresh::PerStep,
            reconstruction: ReconstructionMode::Characteristic,
        };
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.indicator.validate()?;
        if !(THETA_MIN..=THETA_MAX).contains(&self.theta) {
            return Err(Error::invalid_parameter(
                "theta",
                format!("must lie in [1, 2], got {}", self.theta),
            ));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::invalid_parameter(
                "cfl",
                format!("must lie in (0, 1], got {}", self.cfl),
            ));
        }
        Ok(())
    }

    fn sweep(&self, dir: Direction) -> SweepParams {
        SweepParams {
            theta: self.theta,
            gas: self.gas,
            dir,
            mode: self.reconstruction,
        }
    }
}

/// Time derivative of the interior cell averages (storage order, y-outer)
/// and diagnostics gathered while computing it.
#[derive(Clone, Debug)]
pub struct Rhs {
    pub values: Vec<ConservedState>,
    /// One-sided interface values that needed the positivity fallback.
    pub fallbacks: u64,
    /// Interior cells that owned at least one of those values, possibly
    /// repeated.
    pub fallback_cells: Vec<(isize, isize)>,
    /// Largest `max(a+, -a-) / dx` over x-interfaces.
    pub max_rate_x: f64,
    /// Same over y-interfaces; zero in 1-D.
    pub max_rate_y: f64,
}

/// Primitive states of every padded cell into `out`. Ghosts must be filled.
fn primitives_into(u: &Field, gas: &GasModel, out: &mut Vec<PrimitiveState>) -> Result<()> {
    let grid = u.grid();
    let pnx = grid.padded_nx() as isize;
    let (gx, gy) = (crate::grid::GHOST as isize, grid.ghost_y() as isize);
    let cells = u.as_slice();
    out.clear();
    out.reserve(cells.len());
    for (idx, s) in cells.iter().enumerate() {
        match admissible_prim(s, gas) {
            Some(w) => out.push(w),
            None => {
                let idx = idx as isize;
                let e = cons_to_prim(s, gas).err().unwrap_or(Error::InvalidState {
                    cell: None,
                    rho: s.rho,
                    p: f64::NAN,
                });
                return Err(e.at_cell(idx % pnx - gx, idx / pnx - gy));
            }
        }
    }
    Ok(())
}

/// Buffers kept between right-hand-side evaluations, so that a run does
/// its large allocations once instead of several times per stage.
#[derive(Clone, Debug, Default)]
pub(crate) struct Scratch {
    prims: Vec<PrimitiveState>,
    fluxes: Vec<ConservedState>,
    values: Vec<ConservedState>,
    fields: Vec<Field>,
    fixed_tau: Option<IndicatorField>,
}

impl Scratch {
    /// A field on `u`'s grid with unspecified contents, reusing a recycled
    /// buffer when one fits.
    fn buffer_like(&mut self, u: &Field) -> Field {
        match self.fields.pop() {
            Some(f) if f.grid() == u.grid() => f,
            _ => u.clone(),
        }
    }

    fn recycle(&mut self, f: Field) {
        self.fields.push(f);
    }
}

struct LineFluxes {
    fluxes: Vec<ConservedState>,
    fallbacks: u64,
    fallback_cells: Vec<(isize, isize)>,
    max_speed: f64,
}

/// Fluxes at interfaces `m - 1/2` for `m` in `interfaces` along one grid
/// line. `pos(l)` maps a cell offset along the line (ghosts negative) to
/// its `(i, k)` position.
fn line_fluxes(
    u: &Field,
    prims: &[PrimitiveState],
    tau: &IndicatorField,
    interfaces: std::ops::Range<isize>,
    pos: impl Fn(isize) -> (isize, isize),
    params: &SweepParams,
    flux: FluxKind,
) -> Result<LineFluxes> {
    let grid = u.grid();
    let data = u.as_slice();
    let mut out = LineFluxes {
        fluxes: Vec::with_capacity(interfaces.len()),
        fallbacks: 0,
        fallback_cells: Vec::new(),
        max_speed: 0.0,
    };
    // Cells and tau values along a line are evenly strided in storage.
    let start = interfaces.start;
    let stride_of = |index: &dyn Fn(isize, isize) -> usize| {
        let (a, b) = (pos(start - 1), pos(start));
        let lo = index(a.0, a.1);
        (lo, index(b.0, b.1) - lo)
    };
    let (cell_base, cell_stride) = stride_of(&|i, k| grid.index(i, k));
    let (tau_base, tau_stride) = stride_of(&|i, k| tau.index(i, k));
    let taus = tau.tau_values();
    for (n, m) in interfaces.enumerate() {
        // Interface between cells m-1 and m; cell m-1 sits at `q`.
        let q = cell_base + n * cell_stride;
        let idx = [q - cell_stride, q, q + cell_stride, q + 2 * cell_stride];
        let cells = idx.map(|q| data[q]);
        let t = tau_base + n * tau_stride;
        let r = reconstruct_stencil(
            &cells,
            [&prims[idx[1]], &prims[idx[2]]],
            [taus[t], taus[t + tau_stride]],
            params,
        )
        .map_err(|e| {
            let (i, k) = pos(m - 1);
            e.at_cell(i, k)
        })?;
        let (f, speeds) = interface_flux(
            flux,
            &r.values.left,
            &r.w_left,
            &r.values.right,
            &r.w_right,
            &params.gas,
            params.dir,
        );
        out.fluxes.push(f);
        if r.fallback_sides != 0 {
            out.fallbacks += r.fallback_sides.count_ones() as u64;
            for (bit, l) in [(1, m - 1), (2, m)] {
                let (i, k) = pos(l);
                if r.fallback_sides & bit != 0 && grid.contains(i, k) {
                    out.fallback_cells.push((i, k));
                }
            }
        }
        out.max_speed = out.max_speed.max(speeds.max_abs());
    }
    Ok(out)
}

#[inline]
fn divergence(lo: &ConservedState, hi: &ConservedState, inv_h: f64) -> ConservedState {
    -((*hi - *lo) * inv_h)
}

/// `dU_j/dt = -(F_{j+1/2} - F_{j-1/2}) / dx + S(U_j)` on a 1-D field with
/// filled ghosts.
pub fn rhs_1d(
    u: &Field,
    tau: &IndicatorField,
    config: &SchemeConfig,
    source: SourceTerm,
) -> Result<Rhs> {
    rhs_1d_with(u, tau, config, source, &mut Scratch::default())
}

fn rhs_1d_with(
    u: &Field,
    tau: &IndicatorField,
    config: &SchemeConfig,
    source: SourceTerm,
    scratch: &mut Scratch,
) -> Result<Rhs> {
    let grid = *u.grid();
    if grid.dim() != Dimension::One {
        return Err(Error::invalid_parameter(
            "field",
            "rhs_1d needs a 1-D field",
        ));
    }
    primitives_into(u, &config.gas, &mut scratch.prims)?;
    let prims = &scratch.prims;
    let nx = grid.nx();
    let params = config.sweep(Direction::X);
    // Chunks of independent interfaces for the worker pool.
    const CHUNK: usize = 512;
    let n_if = nx + 1;
    let chunks: Vec<LineFluxes> = (0..n_if.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let range = (c * CHUNK) as isize..((c + 1) * CHUNK).min(n_if) as isize;
            line_fluxes(u, prims, tau, range, |l| (l, 0), &params, config.flux)
        })
        .collect::<Result<_>>()?;
    let fluxes = &mut scratch.fluxes;
    fluxes.clear();
    let mut fallbacks = 0;
    let mut fallback_cells = Vec::new();
    let mut max_speed: f64 = 0.0;
    for chunk in chunks {
        fluxes.extend(chunk.fluxes);
        fallbacks += chunk.fallbacks;
        fallback_cells.extend(chunk.fallback_cells);
        max_speed = max_speed.max(chunk.max_speed);
    }
    let inv_dx = 1.0 / grid.dx();
    let mut values = std::mem::take(&mut scratch.values);
    values.clear();
    values.extend((0..nx).map(|j| {
        let d = divergence(&fluxes[j], &fluxes[j + 1], inv_dx);
        match source {
            SourceTerm::None => d,
            s => d + s.evaluate(&u.get(j as isize, 0)),
        }
    }));
    Ok(Rhs {
        values,
        fallbacks,
        fallback_cells,
        max_rate_x: max_speed * inv_dx,
        max_rate_y: 0.0,
    })
}

/// Two-dimensional right-hand side with x- and y-flux differences.
pub fn rhs_2d(
    u: &Field,
    tau: &IndicatorField,
    config: &SchemeConfig,
    source: SourceTerm,
) -> Result<Rhs> {
    rhs_2d_with(u, tau, config, source, &mut Scratch::default())
}

fn rhs_2d_with(
    u: &Field,
    tau: &IndicatorField,
    config: &SchemeConfig,
    source: SourceTerm,
    scratch: &mut Scratch,
) -> Result<Rhs> {
    let grid = *u.grid();
    if grid.dim() != Dimension::Two {
        return Err(Error::invalid_parameter(
            "field",
            "rhs_2d needs a 2-D field",
        ));
    }
    primitives_into(u, &config.gas, &mut scratch.prims)?;
    let prims = &scratch.prims;
    let (nx, ny) = (grid.nx(), grid.ny());
    let px = config.sweep(Direction::X);
    let py = config.sweep(Direction::Y);

    let rows: Vec<LineFluxes> = (0..ny as isize)
        .into_par_iter()
        .map(|k| {
            line_fluxes(
                u,
                prims,
                tau,
                0..nx as isize + 1,
                |l| (l, k),
                &px,
                config.flux,
            )
        })
        .collect::<Result<_>>()?;
    let cols: Vec<LineFluxes> = (0..nx as isize)
        .into_par_iter()
        .map(|j| {
            line_fluxes(
                u,
                prims,
                tau,
                0..ny as isize + 1,
                |l| (j, l),
                &py,
                config.flux,
            )
        })
        .collect::<Result<_>>()?;

    let (inv_dx, inv_dy) = (1.0 / grid.dx(), 1.0 / grid.dy());
    let mut values = std::mem::take(&mut scratch.values);
    values.clear();
    values.reserve(nx * ny);
    for k in 0..ny {
        for j in 0..nx {
            let fx = &rows[k].fluxes;
            let gy = &cols[j].fluxes;
            let d = divergence(&fx[j], &fx[j + 1], inv_dx) - (gy[k + 1] - gy[k]) * inv_dy;
            values.push(match source {
                SourceTerm::None => d,
                s => d + s.evaluate(&u.get(j as isize, k as isize)),
            });
        }
    }
    let fallbacks = rows.iter().chain(&cols).map(|l| l.fallbacks).sum();
    let fallback_cells = rows
        .iter()
        .chain(&cols)
        .flat_map(|l| l.fallback_cells.iter().copied())
        .collect();
    let sx = rows.iter().fold(0.0_f64, |m, l| m.max(l.max_speed));
    let sy = cols.iter().fold(0.0_f64, |m, l| m.max(l.max_speed));
    Ok(Rhs {
        values,
        fallbacks,
        fallback_cells,
        max_rate_x: sx * inv_dx,
        max_rate_y: sy * inv_dy,
    })
}

pub fn rhs(
    u: &Field,
    tau: &IndicatorField,
    config: &SchemeConfig,
    source: SourceTerm,
) -> Result<Rhs> {
    rhs_with(u, tau, config, source, &mut Scratch::default())
}

fn rhs_with(
    u: &Field,
    tau: &IndicatorField,
    config: &SchemeConfig,
    source: SourceTerm,
    scratch: &mut Scratch,
) -> Result<Rhs> {
    match u.grid().dim() {
        Dimension::One => rhs_1d_with(u, tau, config, source, scratch),
        Dimension::Two => rhs_2d_with(u, tau, config, source, scratch),
    }
}

/// CFL-limited step from cell averages (ghosts filled). The signal speed of
/// an interface between two cells is `max(|u| + c)` over both, so the scan
/// runs over interior cells and the first ghost layer.
pub fn compute_dt(u: &Field, cfl: f64, gas: &GasModel) -> Result<f64> {
    let grid = *u.grid();
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let speed = |i: isize, k: isize, dir: Direction| -> Result<f64> {
        let w = cons_to_prim(&u.get(i, k), gas).map_err(|e| e.at_cell(i, k))?;
        Ok(w.normal_velocity(dir).abs() + gas.sound_speed(w.rho, w.p))
    };
    match grid.dim() {
        Dimension::One => {
            let mut s: f64 = 0.0;
            for i in -1..=nx {
                s = s.max(speed(i, 0, Direction::X)?);
            }
            Ok(if s > 0.0 {
                cfl * grid.dx() / s
            } else {
                cfl * grid.dx()
            })
        }
        Dimension::Two => {
            let (mut sx, mut sy): (f64, f64) = (0.0, 0.0);
            for k in -1..=ny {
                for i in -1..=nx {
                    let inside_x = (0..ny).contains(&k);
                    let inside_y = (0..nx).contains(&i);
                    if inside_x {
                        sx = sx.max(speed(i, k, Direction::X)?);
                    }
                    if inside_y {
                        sy = sy.max(speed(i, k, Direction::Y)?);
                    }
                }
            }
            let rate = sx / grid.dx() + sy / grid.dy();
            Ok(if rate > 0.0 {
                cfl / rate
            } else {
                cfl * grid.dx().min(grid.dy())
            })
        }
    }
}

/// One SSP-RK3 step:
/// `U1 = U + dt L(U)`, `U2 = 3/4 U + 1/4 (U1 + dt L(U1))`,
/// `U^{n+1} = 1/3 U + 2/3 (U2 + dt L(U2))`.
///
/// `operator` receives each stage field and must fill its ghosts before
/// evaluating. It returns interior derivatives in storage order.
pub fn ssprk3_step(
    u: &Field,
    dt: f64,
    mut operator: impl FnMut(&mut Field, usize) -> Result<Vec<ConservedState>>,
) -> Result<Field> {
    let mut stage = u.clone();
    for s in 0..SSP_WEIGHTS.len() {
        let l = operator(&mut stage, s)?;
        let mut next = u.clone();
        ssp_stage(u, &stage, &l, dt, s, &mut next, None);
        stage = next;
    }
    Ok(stage)
}

/// `(a, b)` of stage `a U^n + b (U_s + dt L(U_s))`.
const SSP_WEIGHTS: [(f64, f64); 3] = [(0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0)];

/// Interior of `out` set to stage `s` of the scheme. Ghosts of `out` are
/// left as they were. Returns the interior cells left inadmissible for
/// `gas`, in storage order; none are checked without a gas model.
fn ssp_stage(
    u: &Field,
    stage: &Field,
    l: &[ConservedState],
    dt: f64,
    s: usize,
    out: &mut Field,
    gas: Option<&GasModel>,
) -> Vec<(isize, isize)> {
    let (a, b) = SSP_WEIGHTS[s];
    let grid = *u.grid();
    let (nx, pnx) = (grid.nx(), grid.padded_nx());
    let g = crate::grid::GHOST;
    let gy = grid.ghost_y();
    let (u_data, stage_data) = (u.as_slice(), stage.as_slice());
    let rows = out
        .as_mut_slice()
        .par_chunks_mut(pnx)
        .enumerate()
        .skip(gy)
        .take(grid.ny());
    let mut bad = rows
        .map(|(row, cells)| {
            let k = row - gy;
            let mut bad = Vec::new();
            for j in 0..nx {
                let q = row * pnx + g + j;
                let v = u_data[q] * a + (stage_data[q] + l[k * nx + j] * dt) * b;
                if gas.is_some_and(|gas| admissible_prim(&v, gas).is_none()) {
                    bad.push((j as isize, k as isize));
                }
                cells[g + j] = v;
            }
            bad
        })
        .reduce(Vec::new, |mut x, y| {
            x.extend(y);
            x
        });
    bad.sort_unstable_by_key(|&(i, k)| (k, i));
    bad
}

/// Per-step record; `Display` gives the `step=.. t=.. dt=.. fallbacks=..`
/// log line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats {
    pub step: u64,
    /// Time after the step.
    pub t: f64,
    pub dt: f64,
    /// Largest `|a+-| / dx` (or `/ dy`) seen during the step.
    pub max_rate: f64,
    /// Fallback events: one-sided interface values that needed it plus cells
    /// forced to first order after an invalid stage, summed over stages.
    pub fallbacks: u64,
    /// Distinct interior cells involved in any fallback during the step.
    pub fallback_cells: u64,
    pub wall_time: Duration,
}

impl fmt::Display for StepStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step={} t={:.9e} dt={:.9e} fallbacks={}",
            self.step, self.t, self.dt, self.fallbacks
        )
    }
}

/// Outcome of a step attempt that kept every stage valid.
#[derive(Debug)]
struct Accepted {
    field: Field,
    fallbacks: u64,
    cells: Vec<(isize, isize)>,
    max_rate: f64,
}

/// Time-marching driver holding the evolving field.
#[derive(Clone, Debug)]
pub struct Solver {
    field: Field,
    bc: BoundaryConditions,
    source: SourceTerm,
    config: SchemeConfig,
    time: f64,
    steps: u64,
    history: Vec<StepStats>,
    scratch: Scratch,
}

impl Solver {
    pub fn new(
        field: Field,
        bc: BoundaryConditions,
        source: SourceTerm,
        config: SchemeConfig,
    ) -> Result<Self> {
        config.validate()?;
        bc.validate()?;
        let mut solver = Self {
            field,
            bc,
            source,
            config,
            time: 0.0,
            steps: 0,
            history: Vec::new(),
            scratch: Scratch::default(),
        };
        fill_ghosts(&mut solver.field, &solver.bc);
        primitives_into(&solver.field, &config.gas, &mut solver.scratch.prims)?;
        Ok(solver)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }
    pub fn boundary(&self) -> &BoundaryConditions {
        &self.bc
    }
    pub fn source(&self) -> SourceTerm {
        self.source
    }
    pub fn time(&self) -> f64 {
        self.time
    }
    pub fn steps(&self) -> u64 {
        self.steps
    }
    pub fn history(&self) -> &[StepStats] {
        &self.history
    }
    pub fn total_fallbacks(&self) -> u64 {
        self.history.iter().map(|s| s.fallbacks).sum()
    }
    /// Number of (cell, step) pairs that used a fallback.
    pub fn total_fallback_cell_steps(&self) -> u64 {
        self.history.iter().map(|s| s.fallback_cells).sum()
    }

    /// Limiter parameters of the current state.
    pub fn tau_field(&self) -> IndicatorField {
        compute_tau_field(&self.field, &self.config.indicator)
    }

    pub fn stable_dt(&self) -> Result<f64> {
        compute_dt(&self.field, self.config.cfl, &self.config.gas)
    }

    /// Advances by exactly `dt`.
    ///
    /// A stage that leaves a cell with `rho <= 0` or `p <= 0` is recomputed
    /// once with zero slopes in that cell and its neighbours; each forced
    /// cell counts as a fallback. If the stage is still invalid, the whole
    /// step is redone once with those cells first order in every stage,
    /// since an earlier stage may have left a valid state the fixed `dt`
    /// cannot carry. After that the step aborts.
    pub fn step(&mut self, dt: f64) -> Result<StepStats> {
        let started = Instant::now();
        // A fixed tau never changes, so its field is built once per run.
        let fixed = matches!(self.config.indicator.strategy, Strategy::Fixed(_));
        let frozen = match (self.scratch.fixed_tau.take(), self.config.tau_refresh) {
            (Some(t), _) => Some(t),
            (None, TauRefresh::PerStep) => {
                Some(compute_tau_field(&self.field, &self.config.indicator))
            }
            (None, TauRefresh::PerStage) if fixed => {
                Some(compute_tau_field(&self.field, &self.config.indicator))
            }
            (None, TauRefresh::PerStage) => None,
        };
        let accepted = match self.attempt(dt, frozen.as_ref(), &[])? {
            Ok(a) => a,
            Err((_, troubled)) => {
                log::debug!(
                    "step at t={:e}: redoing with {} troubled cell(s) first order",
                    self.time,
                    troubled.len()
                );
                self.attempt(dt, frozen.as_ref(), &troubled)?
                    .map_err(|(reason, _)| self.abort(reason))?
            }
        };

        let old = std::mem::replace(&mut self.field, accepted.field);
        self.scratch.recycle(old);
        if fixed {
            self.scratch.fixed_tau = frozen;
        }
        fill_ghosts(&mut self.field, &self.bc);
        self.time += dt;
        self.steps += 1;
        let stats = StepStats {
            step: self.steps,
            t: self.time,
            dt,
            max_rate: accepted.max_rate,
            fallbacks: accepted.fallbacks,
            fallback_cells: accepted.cells.len() as u64,
            wall_time: started.elapsed(),
        };
        self.history.push(stats);
        Ok(stats)
    }

    /// One SSP-RK3 pass from the current field, with the cells in `forced`
    /// first order in every stage. An inner `Err` carries the reason and
    /// every cell found invalid along the way.
    #[allow(clippy::type_complexity)]
    fn attempt(
        &mut self,
        dt: f64,
        frozen: Option<&IndicatorField>,
        forced: &[(isize, isize)],
    ) -> Result<std::result::Result<Accepted, (String, Vec<(isize, isize)>)>> {
        let Self {
            field,
            bc,
            source,
            config,
            time,
            steps,
            scratch,
            ..
        } = self;
        let abort = |reason: String| Error::Aborted {
            t: *time,
            step: *steps,
            reason,
        };
        let periodic = bc.periodic_axes();
        let mut fallbacks = 0;
        let mut cells = Vec::new();
        let mut troubled = forced.to_vec();
        let mut max_rate: f64 = 0.0;
        // `None` while the stage state is the current field itself.
        let mut stage: Option<Field> = None;
        for s in 0..SSP_WEIGHTS.len() {
            let current: &Field = match &mut stage {
                Some(st) => {
                    fill_ghosts(st, bc);
                    st
                }
                None => field,
            };
            let mut tau = match frozen {
                Some(t) => Cow::Borrowed(t),
                None => Cow::Owned(compute_tau_field(current, &config.indicator)),
            };
            let before = cells.len();
            for &(i, k) in forced {
                tau.to_mut()
                    .force_first_order_around(i, k, periodic, &mut cells);
            }
            let mut r = rhs_with(current, &tau, config, *source, scratch)
                .map_err(|e| abort(e.to_string()))?;
            let mut next = scratch.buffer_like(field);
            let bad = ssp_stage(
                field,
                current,
                &r.values,
                dt,
                s,
                &mut next,
                Some(&config.gas),
            );
            if !bad.is_empty() {
                let t = tau.to_mut();
                for &(i, k) in &bad {
                    t.force_first_order_around(i, k, periodic, &mut cells);
                }
                log::debug!(
                    "stage {s} at t={:e}: {} invalid cell(s), retrying first order",
                    *time,
                    bad.len()
                );
                troubled.extend(bad);
                scratch.values = std::mem::take(&mut r.values);
                r = rhs_with(current, &tau, config, *source, scratch)
                    .map_err(|e| abort(e.to_string()))?;
                let bad = ssp_stage(
                    field,
                    current,
                    &r.values,
                    dt,
                    s,
                    &mut next,
                    Some(&config.gas),
                );
                if let Some(&(i, k)) = bad.first() {
                    let reason = format!(
                        "invalid state at cell ({i}, {k}) after stage {s}: {:?}",
                        next.get(i, k)
                    );
                    troubled.extend(bad);
                    troubled.sort_unstable();
                    troubled.dedup();
                    scratch.values = r.values;
                    scratch.recycle(next);
                    scratch.fields.extend(stage);
                    return Ok(Err((reason, troubled)));
                }
            }
            fallbacks += (cells.len() - before) as u64 + r.fallbacks;
            cells.extend(r.fallback_cells);
            max_rate = max_rate.max(r.max_rate_x).max(r.max_rate_y);
            scratch.values = r.values;
            scratch.fields.extend(stage.replace(next));
        }
        cells.sort_unstable();
        cells.dedup();
        Ok(Ok(Accepted {
            field: stage.expect("at least one stage"),
            fallbacks,
            cells,
            max_rate,
        }))
    }

    fn abort(&self, reason: String) -> Error {
        Error::Aborted {
            t: self.time,
            step: self.steps,
            reason,
        }
    }

    /// Marches to `t_target`, clipping the last step to land on it exactly.
    pub fn advance_to(&mut self, t_target: f64, mut on_step: impl FnMut(&StepStats)) -> Result<()> {
        if !(t_target > 0.0 && t_target.is_finite()) {
            return Err(Error::invalid_parameter(
                "t_end",
                format!("must be positive, got {t_target}"),
            ));
        }
        while self.time < t_target {
            let mut dt = self.stable_dt().map_err(|e| self.abort(e.to_string()))?;
            let last = self.time + dt >= t_target;
            if last {
                dt = t_target - self.time;
            }
            if dt.is_nan() || dt < 1e-13 * t_target {
                return Err(self.abort(format!("time step underflow: dt={dt:e}")));
            }
            let mut stats = self.step(dt)?;
            if last {
                self.time = t_target;
                stats.t = t_target;
                if let Some(h) = self.history.last_mut() {
                    h.t = t_target;
                }
            }
            on_step(&stats);
        }
        Ok(())
    }

    /// Marches to `t_end`, calling `on_snapshot` at each requested time
    /// (sorted, clipped to `(0, t_end]`) and at `t_end`.
    pub fn run_to(
        &mut self,
        t_end: f64,
        snapshots: &[f64],
        mut on_step: impl FnMut(&StepStats),
        mut on_snapshot: impl FnMut(&Solver) -> Result<()>,
    ) -> Result<()> {
        let mut stops: Vec<f64> = snapshots
            .iter()
            .copied()
            .filter(|&t| t > self.time && t < t_end)
            .collect();
        stops.sort_by(f64::total_cmp);
        stops.dedup();
        stops.push(t_end);
        for stop in stops {
            self.advance_to(stop, &mut on_step)?;
            on_snapshot(self)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::state::prim_to_cons;

    fn air() -> GasModel {
        GasModel::new(1.4).unwrap()
    }

    fn fixed(tau: f64) -> SchemeConfig {
        SchemeConfig::new(Strategy::Fixed(tau), 1.0, air()).unwrap()
    }

    #[test]
    fn constant_state_has_zero_rhs() {
        let gas = air();
        let u = prim_to_cons(&PrimitiveState::new_1d(1.0, 0.3, 2.0), &gas).unwrap();
        let mut f = Field::uniform(Grid::new_1d(10, 0.0, 1.0).unwrap(), u);
        fill_ghosts(&mut f, &BoundaryConditions::free());
        let tau = IndicatorField::uniform(*f.grid(), -0.25);
        let r = rhs_1d(&f, &tau, &fixed(0.5), SourceTerm::None).unwrap();
        assert!(r.values.iter().all(|d| d.max_abs() < 1e-14));

        let grid = Grid::new_2d(6, 5, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let u = prim_to_cons(&PrimitiveState::new(1.0, 0.3, -0.4, 2.0), &gas).unwrap();
        let mut f = Field::uniform(grid, u);
        fill_ghosts(&mut f, &BoundaryConditions::free());
        let tau = IndicatorField::uniform(grid, 0.5);
        let r = rhs_2d(&f, &tau, &fixed(0.5), SourceTerm::None).unwrap();
        assert!(r.values.iter().all(|d| d.max_abs() < 1e-14));
    }

    #[test]
    fn gravity_source() {
        let gas = GasModel::new(5.0 / 3.0).unwrap();
        let u = prim_to_cons(&PrimitiveState::new(2.0, 0.0, -0.1, 1.0), &gas).unwrap();
        let s = SourceTerm::Gravity.evaluate(&u);
        assert_eq!(s, ConservedState::new(0.0, 0.0, 2.0, -0.2));
        assert_eq!(SourceTerm::None.evaluate(&u), ConservedState::ZERO);
    }

    #[test]
    fn dt_examples() {
        let gas = air();
        let u = prim_to_cons(&PrimitiveState::new_1d(1.0, 0.0, 1.0), &gas).unwrap();
        let mut f = Field::uniform(Grid::new_1d(100, 0.0, 1.0).unwrap(), u);
        fill_ghosts(&mut f, &BoundaryConditions::free());
        let dt = compute_dt(&f, 0.4, &gas).unwrap();
        assert!((dt - 0.4 * 0.01 / 1.4_f64.sqrt()).abs() < 1e-17);

        // Four times the pressure doubles the sound speed.
        let u4 = prim_to_cons(&PrimitiveState::new_1d(1.0, 0.0, 4.0), &gas).unwrap();
        let mut f4 = Field::uniform(Grid::new_1d(100, 0.0, 1.0).unwrap(), u4);
        fill_ghosts(&mut f4, &BoundaryConditions::free());
        assert!((compute_dt(&f4, 0.4, &gas).unwrap() - dt / 2.0).abs() < 1e-17);
    }

    #[test]
    fn dt_2d_combines_directions() {
        let gas = air();
        let u = prim_to_cons(&PrimitiveState::new(1.0, 0.5, 0.0, 1.0), &gas).unwrap();
        let grid = Grid::new_2d(10, 20, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let mut f = Field::uniform(grid, u);
        fill_ghosts(&mut f, &BoundaryConditions::free());
        let c = 1.4_f64.sqrt();
        let expect = 0.4 / ((0.5 + c) / 0.1 + c / 0.05);
        assert!((compute_dt(&f, 0.4, &gas).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn rk3_matches_scalar_ode_taylor_polynomial() {
        // y' = -y as a field whose density carries y.
        let grid = Grid::new_1d(4, 0.0, 1.0).unwrap();
        let y0 = Field::uniform(grid, ConservedState::new(1.0, 0.0, 0.0, 0.0));
        let next = ssprk3_step(&y0, 0.1, |f, _| {
            Ok(f.interior().map(|(_, _, u)| -u).collect())
        })
        .unwrap();
        let y = next.get(2, 0).rho;
        let taylor = 1.0 - 0.1 + 0.005 - 0.1_f64.powi(3) / 6.0;
        assert!((y - taylor).abs() < 1e-15, "{y} vs {taylor}");
        assert!((y - (-0.1_f64).exp()).abs() < 0.1_f64.powi(4));
    }

    #[test]
    fn rk3_with_zero_operator_is_identity() {
        let grid = Grid::new_1d(6, 0.0, 1.0).unwrap();
        let f = Field::from_fn(grid, |i, _| {
            ConservedState::new(1.0 + i as f64, 0.1, 0.0, 3.0)
        });
        let next = ssprk3_step(&f, 0.3, |f, _| {
            Ok(vec![ConservedState::ZERO; f.grid().interior_cells()])
        })
        .unwrap();
        assert_eq!(next, f);
    }

    #[test]
    fn rk3_upwind_creates_no_new_extrema() {
        // First-order upwind advection at CFL 0.4 is a convex combination.
        let grid = Grid::new_1d(40, 0.0, 1.0).unwrap();
        let f = Field::from_fn(grid, |i, _| {
            ConservedState::new(if i < 20 { 2.0 } else { 1.0 }, 0.0, 0.0, 0.0)
        });
        let dx = grid.dx();
        let dt = 0.4 * dx;
        let next = ssprk3_step(&f, dt, |s, _| {
            let n = s.grid().nx() as isize;
            s.set(-1, 0, s.get(0, 0));
            Ok((0..n)
                .map(|i| (s.get(i - 1, 0) - s.get(i, 0)) * (1.0 / dx))
                .collect())
        })
        .unwrap();
        for (_, _, u) in next.interior() {
            assert!(u.rho >= 1.0 && u.rho <= 2.0);
        }
    }

    #[test]
    fn solver_lands_exactly_on_target() {
        let gas = air();
        let grid = Grid::new_1d(32, 0.0, 1.0).unwrap();
        let f = Field::from_fn(grid, |i, _| {
            let x = grid.x_center(i);
            prim_to_cons(
                &PrimitiveState::new_1d(1.0 + 0.2 * (6.0 * x).sin(), 0.5, 1.0),
                &gas,
            )
            .unwrap()
        });
        let mut solver = Solver::new(
            f,
            BoundaryConditions::periodic(),
            SourceTerm::None,
            fixed(0.5),
        )
        .unwrap();
        let dt = solver.stable_dt().unwrap();
        solver.advance_to(dt, |_| {}).unwrap();
        assert_eq!(solver.steps(), 1);
        let target = 0.123;
        let mut snaps = Vec::new();
        solver
            .run_to(
                target,
                &[0.05],
                |_| {},
                |s| {
                    snaps.push(s.time());
                    Ok(())
                },
            )
            .unwrap();
        assert_eq!(snaps, vec![0.05, target]);
        assert_eq!(solver.time(), target);
        assert_eq!(solver.history().last().unwrap().t, target);
        let line = solver.history()[0].to_string();
        assert!(
            line.starts_with("step=1 t=") && line.contains(" dt=") && line.ends_with("fallbacks=0"),
            "{line}"
        );
    }

    #[test]
    fn scheme_config_validation() {
        let mut c = fixed(0.5);
        c.theta = 2.5;
        assert!(c.validate().is_err());
        let mut c = fixed(0.5);
        c.cfl = 0.0;
        assert!(c.validate().is_err());
        assert_eq!("stage".parse::<TauRefresh>().unwrap(), TauRefresh::PerStage);
        assert!("never".parse::<TauRefresh>().is_err());
    }
}
