//! Finite-volume central-upwind solver for the compressible Euler equations
//! with a smoothness-adaptive SBM limiter.

pub mod boundary;
pub mod commands;
pub mod compare;
pub mod error;
pub mod flux;
pub mod grid;
pub mod indicator;
pub mod integrate;
pub mod io;
pub mod limiter;
pub mod problems;
pub mod reconstruct;
pub mod state;

pub use boundary::{fill_ghosts, BoundaryConditions, BoundaryKind};
pub use error::{CellIndex, Error, Result};
pub use flux::{AntiDiffusion, FluxKind, LocalSpeeds, NumericalFlux};
pub use grid::{Field, Grid, GHOST};
pub use indicator::{
    compute_tau_field, evaluate_indicator, IndicatorConfig, IndicatorField, Strategy,
};
pub use integrate::{SchemeConfig, Solver, SourceTerm, StepStats, TauRefresh};
pub use limiter::{phi_sbm, LimiterParams};
pub use problems::{catalog, problem, smooth_convergence_problem, Initialization, ProblemSpec};
pub use reconstruct::ReconstructionMode;
pub use state::{ConservedState, Dimension, Direction, GasModel, PrimitiveState};
