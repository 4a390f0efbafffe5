//! Benchmark catalog: initial data, domains, boundary conditions, final
//! times and default adaption constants.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::boundary::{BoundaryConditions, BoundaryKind};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::indicator::Strategy;
use crate::integrate::{SchemeConfig, Solver, SourceTerm};
use crate::state::{prim_to_cons, ConservedState, Dimension, GasModel, PrimitiveState};

/// How initial cell averages are formed from the point-wise initial data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Initialization {
    /// Value at the cell center.
    #[default]
    Midpoint,
    /// Four-point Gauss-Legendre average (tensor product in 2-D) of the
    /// conserved variables.
    Gauss4,
}

impl fmt::Display for Initialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Initialization::Midpoint => "midpoint",
            Initialization::Gauss4 => "gauss4",
        })
    }
}

impl FromStr for Initialization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "midpoint" => Ok(Initialization::Midpoint),
            "gauss4" => Ok(Initialization::Gauss4),
            other => Err(Error::invalid_parameter(
                "init",
                format!("expected midpoint | gauss4, got `{other}`"),
            )),
        }
    }
}

/// Boundary rule in primitive form; Dirichlet states are converted once the
/// gas is known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Side {
    Free,
    Wall,
    Periodic,
    Dirichlet(PrimitiveState),
}

impl Side {
    fn resolve(self, gas: &GasModel) -> Result<BoundaryKind> {
        Ok(match self {
            Side::Free => BoundaryKind::Free,
            Side::Wall => BoundaryKind::Wall,
            Side::Periodic => BoundaryKind::Periodic,
            Side::Dirichlet(w) => BoundaryKind::dirichlet(w, gas)?,
        })
    }
}

/// Immutable description of one benchmark.
#[derive(Clone, Copy, Debug)]
pub struct ProblemSpec {
    pub id: &'static str,
    pub title: &'static str,
    pub dim: Dimension,
    pub x_bounds: (f64, f64),
    /// Unused in 1-D.
    pub y_bounds: (f64, f64),
    /// Default interior cells `(nx, ny)`; `ny = 1` in 1-D.
    pub mesh: (usize, usize),
    /// Fine mesh used for reference solutions, 1-D only.
    pub reference_nx: Option<usize>,
    pub gamma: f64,
    pub t_end: f64,
    /// Output times before `t_end`.
    pub snapshots: &'static [f64],
    /// `[x_lo, x_hi, y_lo, y_hi]`.
    pub sides: [Side; 4],
    pub source: SourceTerm,
    pub c_old: f64,
    pub c_new: f64,
    /// Point-wise initial data `(x, y)`; `y` is ignored in 1-D.
    pub initial: fn(f64, f64) -> PrimitiveState,
    /// Exact solution `(x, t)` where one is known.
    pub exact: Option<fn(f64, f64) -> PrimitiveState>,
}

impl ProblemSpec {
    pub fn gas(&self) -> GasModel {
        GasModel::new(self.gamma).expect("catalog gamma is valid")
    }

    pub fn boundary(&self) -> Result<BoundaryConditions> {
        let gas = self.gas();
        let [a, b, c, d] = self.sides.map(|s| s.resolve(&gas));
        BoundaryConditions::new(a?, b?, c?, d?)
    }

    /// Grid with the given interior size, or the default one.
    pub fn grid(&self, mesh: Option<(usize, usize)>) -> Result<Grid> {
        let (nx, ny) = mesh.unwrap_or(self.mesh);
        match self.dim {
            Dimension::One => Grid::new_1d(nx, self.x_bounds.0, self.x_bounds.1),
            Dimension::Two => Grid::new_2d(nx, ny, self.x_bounds, self.y_bounds),
        }
    }

    /// Default adaption constant for a strategy. `Fixed` ignores it.
    pub fn default_c(&self, strategy: Strategy) -> f64 {
        match strategy {
            Strategy::Old => self.c_old,
            Strategy::New | Strategy::Fixed(_) => self.c_new,
        }
    }

    pub fn scheme(&self, strategy: Strategy) -> Result<SchemeConfig> {
        SchemeConfig::new(strategy, self.default_c(strategy), self.gas())
    }

    pub fn initial_field(&self, grid: &Grid, init: Initialization) -> Result<Field> {
        let gas = self.gas();
        let cons = |x: f64, y: f64| -> Result<ConservedState> {
            prim_to_cons(&(self.initial)(x, y), &gas)
        };
        let mut field = Field::new(*grid);
        for k in 0..grid.ny() as isize {
            for i in 0..grid.nx() as isize {
                let (xc, yc) = (
                    grid.x_center(i),
                    if self.dim == Dimension::Two {
                        grid.y_center(k)
                    } else {
                        0.0
                    },
                );
                let u = match init {
                    Initialization::Midpoint => cons(xc, yc).map_err(|e| e.at_cell(i, k))?,
                    Initialization::Gauss4 => {
                        let hx = 0.5 * grid.dx();
                        let mut acc = ConservedState::ZERO;
                        if self.dim == Dimension::One {
                            for (a, wa) in GAUSS4 {
                                acc += cons(xc + hx * a, 0.0).map_err(|e| e.at_cell(i, k))?
                                    * (0.5 * wa);
                            }
                        } else {
                            let hy = 0.5 * grid.dy();
                            for (a, wa) in GAUSS4 {
                                for (b, wb) in GAUSS4 {
                                    acc += cons(xc + hx * a, yc + hy * b)
                                        .map_err(|e| e.at_cell(i, k))?
                                        * (0.25 * wa * wb);
                                }
                            }
                        }
                        acc
                    }
                };
                field.set(i, k, u);
            }
        }
        Ok(field)
    }

    /// Solver at `t = 0` with the problem's boundary conditions and source.
    pub fn solver(
        &self,
        mesh: Option<(usize, usize)>,
        config: SchemeConfig,
        init: Initialization,
    ) -> Result<Solver> {
        let grid = self.grid(mesh)?;
        let field = self.initial_field(&grid, init)?;
        Solver::new(field, self.boundary()?, self.source, config)
    }

    /// Exact cell averages of the density at time `t` (Gauss4 in each cell).
    pub fn exact_density(&self, grid: &Grid, t: f64) -> Option<Vec<f64>> {
        let exact = self.exact?;
        let hx = 0.5 * grid.dx();
        Some(
            (0..grid.nx() as isize)
                .map(|i| {
                    let xc = grid.x_center(i);
                    GAUSS4
                        .iter()
                        .map(|(a, w)| 0.5 * w * exact(xc + hx * a, t).rho)
                        .sum()
                })
                .collect(),
        )
    }
}

/// Problems are identified by id.
impl PartialEq for ProblemSpec {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

/// Nodes and weights on `[-1, 1]`.
const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

fn quadrants(x: f64, y: f64, split: (f64, f64), states: [PrimitiveState; 4]) -> PrimitiveState {
    // Order: (x > a, y > b), (x < a, y > b), (x < a, y < b), (x > a, y < b).
    let right = x > split.0;
    let top = y > split.1;
    match (right, top) {
        (true, true) => states[0],
        (false, true) => states[1],
        (false, false) => states[2],
        (true, false) => states[3],
    }
}

fn ex1_initial(x: f64, _: f64) -> PrimitiveState {
    if x < -4.0 {
        PrimitiveState::new_1d(27.0 / 7.0, 4.0 * 35.0_f64.sqrt() / 9.0, 31.0 / 3.0)
    } else {
        PrimitiveState::new_1d(1.0 + 0.2 * (5.0 * x).sin(), 0.0, 1.0)
    }
}

fn ex2_initial(x: f64, _: f64) -> PrimitiveState {
    if x < -4.5 {
        PrimitiveState::new_1d(1.51695, 0.523346, 1.805)
    } else {
        PrimitiveState::new_1d(1.0 + 0.1 * (20.0 * x).sin(), 0.0, 1.0)
    }
}

fn ex3_initial(x: f64, _: f64) -> PrimitiveState {
    let p = if x < 0.1 {
        1000.0
    } else if x <= 0.9 {
        0.01
    } else {
        100.0
    };
    PrimitiveState::new_1d(1.0, 0.0, p)
}

fn ex4_initial(x: f64, y: f64) -> PrimitiveState {
    quadrants(
        x,
        y,
        (1.0, 1.0),
        [
            PrimitiveState::new(1.5, 0.0, 0.0, 1.5),
            PrimitiveState::new(0.5323, 1.206, 0.0, 0.3),
            PrimitiveState::new(0.138, 1.206, 1.206, 0.029),
            PrimitiveState::new(0.5323, 0.0, 1.206, 0.3),
        ],
    )
}

fn ex5_initial(x: f64, y: f64) -> PrimitiveState {
    quadrants(
        x,
        y,
        (0.5, 0.5),
        [
            PrimitiveState::new(1.0, 0.75, -0.5, 1.0),
            PrimitiveState::new(2.0, 0.75, 0.5, 1.0),
            PrimitiveState::new(1.0, -0.75, 0.5, 1.0),
            PrimitiveState::new(3.0, -0.75, -0.5, 1.0),
        ],
    )
}

fn ex6_initial(x: f64, y: f64) -> PrimitiveState {
    quadrants(
        x,
        y,
        (0.5, 0.5),
        [
            PrimitiveState::new(0.5313, 0.0, 0.0, 0.4),
            PrimitiveState::new(1.0, 0.7276, 0.0, 1.0),
            PrimitiveState::new(0.8, 0.0, 0.0, 1.0),
            PrimitiveState::new(1.0, 0.0, 0.7276, 1.0),
        ],
    )
}

const RT_GAMMA: f64 = 5.0 / 3.0;

fn ex7_initial(x: f64, y: f64) -> PrimitiveState {
    let (rho, p) = if y < 0.5 {
        (2.0, 2.0 * y + 1.0)
    } else {
        (1.0, y + 1.5)
    };
    let c = (RT_GAMMA * p / rho).sqrt();
    PrimitiveState::new(rho, 0.0, -0.025 * c * (8.0 * PI * x).cos(), p)
}

fn smooth_initial(x: f64, _: f64) -> PrimitiveState {
    PrimitiveState::new_1d(1.0 + 0.5 * x.sin(), 1.0, 1.0)
}

fn smooth_exact(x: f64, t: f64) -> PrimitiveState {
    smooth_initial(x - t, 0.0)
}

const FREE: [Side; 4] = [Side::Free; 4];
const WALLS: [Side; 4] = [Side::Wall; 4];

const CATALOG: [ProblemSpec; 7] = [
    ProblemSpec {
        id: "ex1",
        title: "Shock-density wave interaction",
        dim: Dimension::One,
        x_bounds: (-5.0, 15.0),
        y_bounds: (0.0, 1.0),
        mesh: (800, 1),
        reference_nx: Some(8000),
        gamma: 1.4,
        t_end: 5.0,
        snapshots: &[],
        sides: FREE,
        source: SourceTerm::None,
        c_old: 0.01,
        c_new: 0.005,
        initial: ex1_initial,
        exact: None,
    },
    ProblemSpec {
        id: "ex2",
        title: "Titarev-Toro shock-entropy wave interaction",
        dim: Dimension::One,
        x_bounds: (-5.0, 5.0),
        y_bounds: (0.0, 1.0),
        mesh: (800, 1),
        reference_nx: Some(16000),
        gamma: 1.4,
        t_end: 5.0,
        snapshots: &[],
        sides: FREE,
        source: SourceTerm::None,
        c_old: 0.01,
        c_new: 0.002,
        initial: ex2_initial,
        exact: None,
    },
    ProblemSpec {
        id: "ex3",
        title: "Interacting blast waves",
        dim: Dimension::One,
        x_bounds: (0.0, 1.0),
        y_bounds: (0.0, 1.0),
        mesh: (400, 1),
        reference_nx: Some(8000),
        gamma: 1.4,
        t_end: 0.038,
        snapshots: &[],
        sides: WALLS,
        source: SourceTerm::None,
        c_old: 0.01,
        c_new: 0.005,
        initial: ex3_initial,
        exact: None,
    },
    ProblemSpec {
        id: "ex4",
        title: "2-D Riemann problem, configuration 3",
        dim: Dimension::Two,
        x_bounds: (0.0, 1.2),
        y_bounds: (0.0, 1.2),
        mesh: (1000, 1000),
        reference_nx: None,
        gamma: 1.4,
        t_end: 1.0,
        snapshots: &[],
        sides: FREE,
        source: SourceTerm::None,
        c_old: 0.08,
        c_new: 0.06,
        initial: ex4_initial,
        exact: None,
    },
    ProblemSpec {
        id: "ex5",
        title: "2-D Riemann problem, configuration 6",
        dim: Dimension::Two,
        x_bounds: (0.0, 1.0),
        y_bounds: (0.0, 1.0),
        mesh: (600, 600),
        reference_nx: None,
        gamma: 1.4,
        t_end: 1.0,
        snapshots: &[],
        sides: FREE,
        source: SourceTerm::None,
        c_old: 0.1,
        c_new: 0.075,
        initial: ex5_initial,
        exact: None,
    },
    ProblemSpec {
        id: "ex6",
        title: "2-D Riemann problem, configuration 12",
        dim: Dimension::Two,
        x_bounds: (0.0, 0.6),
        y_bounds: (0.0, 0.6),
        mesh: (600, 600),
        reference_nx: None,
        gamma: 1.4,
        t_end: 0.5,
        snapshots: &[],
        sides: FREE,
        source: SourceTerm::None,
        c_old: 0.03,
        c_new: 0.025,
        initial: ex6_initial,
        exact: None,
    },
    ProblemSpec {
        id: "ex7",
        title: "Rayleigh-Taylor instability",
        dim: Dimension::Two,
        x_bounds: (0.0, 0.25),
        y_bounds: (0.0, 1.0),
        mesh: (256, 1024),
        reference_nx: None,
        gamma: RT_GAMMA,
        t_end: 2.95,
        snapshots: &[1.95],
        sides: [
            Side::Wall,
            Side::Wall,
            Side::Dirichlet(PrimitiveState {
                rho: 2.0,
                u: 0.0,
                v: 0.0,
                p: 1.0,
            }),
            Side::Dirichlet(PrimitiveState {
                rho: 1.0,
                u: 0.0,
                v: 0.0,
                p: 2.5,
            }),
        ],
        source: SourceTerm::Gravity,
        c_old: 0.08,
        c_new: 0.06,
        initial: ex7_initial,
        exact: None,
    },
];

const SMOOTH: ProblemSpec = ProblemSpec {
    id: "smooth1d",
    title: "Periodic density wave (order check)",
    dim: Dimension::One,
    x_bounds: (0.0, 2.0 * PI),
    y_bounds: (0.0, 1.0),
    mesh: (128, 1),
    reference_nx: None,
    gamma: 1.4,
    t_end: 0.1,
    snapshots: &[],
    sides: [Side::Periodic; 4],
    source: SourceTerm::None,
    // Large enough that every cell counts as smooth.
    c_old: 1.0,
    c_new: 1.0,
    initial: smooth_initial,
    exact: Some(smooth_exact),
};

/// The seven benchmarks, in order.
pub fn catalog() -> &'static [ProblemSpec] {
    &CATALOG
}

/// Smooth periodic advection with a known exact solution.
pub fn smooth_convergence_problem() -> ProblemSpec {
    SMOOTH
}

/// Every problem id accepted by [`problem`].
pub fn all_problems() -> impl Iterator<Item = &'static ProblemSpec> {
    CATALOG.iter().chain(std::iter::once(&SMOOTH))
}

pub fn problem(id: &str) -> Result<ProblemSpec> {
    all_problems()
        .find(|p| p.id == id)
        .copied()
        .ok_or_else(|| Error::UnknownProblem(id.to_string()))
}
