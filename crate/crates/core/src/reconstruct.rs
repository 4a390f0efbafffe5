//! Piecewise-linear reconstruction of one-sided interface values in local
//! characteristic variables.
//!
//! For the interface between cells `j` and `j+1` the four cell averages
//! `j-1..=j+2` are projected with the left eigenvectors of the flux Jacobian
//! at the averaged primitive state. Cell `j` is limited with its own `tau`
//! to give the left value, cell `j+1` with its own `tau` for the right value.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::indicator::IndicatorField;
use crate::limiter::{limited_increment, LimiterParams, TAU_MAX};
use crate::state::{
    admissible_prim, cons_to_prim, interface_average, CharBasis, ConservedState, Dimension,
    Direction, GasModel, PrimitiveState,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceValues {
    /// Value at the interface from the left cell.
    pub left: ConservedState,
    /// Value at the interface from the right cell.
    pub right: ConservedState,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReconstructionMode {
    #[default]
    Characteristic,
    /// Zero slopes everywhere. Debug and convergence-check aid only.
    FirstOrder,
}

/// Reconstruction of one interface together with the primitive forms of the
/// two one-sided values and which sides needed the positivity fallback.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Reconstructed {
    pub values: InterfaceValues,
    pub w_left: PrimitiveState,
    pub w_right: PrimitiveState,
    /// Bit 0: the value from cell `j`; bit 1: the value from cell `j+1`.
    pub fallback_sides: u8,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SweepParams {
    pub theta: f64,
    pub gas: GasModel,
    pub dir: Direction,
    pub mode: ReconstructionMode,
}

/// Core kernel. `cells` are the averages `j-1..=j+2`; `w_mid` the primitive
/// states of cells `j` and `j+1`.
#[inline(always)]
pub(crate) fn reconstruct_stencil(
    cells: &[ConservedState; 4],
    w_mid: [&PrimitiveState; 2],
    tau: [f64; 2],
    params: &SweepParams,
) -> Result<Reconstructed> {
    if params.mode == ReconstructionMode::FirstOrder {
        return Ok(Reconstructed {
            values: InterfaceValues {
                left: cells[1],
                right: cells[2],
            },
            w_left: *w_mid[0],
            w_right: *w_mid[1],
            fallback_sides: 0,
        });
    }
    let w_hat = interface_average(w_mid[0], w_mid[1]);
    let basis = CharBasis::new(&w_hat, &params.gas, params.dir)?;
    let gamma = [
        basis.project(&cells[0]),
        basis.project(&cells[1]),
        basis.project(&cells[2]),
        basis.project(&cells[3]),
    ];

    let left = side_value(&basis, &gamma, 0, &cells[1], tau[0], params.theta);
    let right = side_value(&basis, &gamma, 1, &cells[2], tau[1], params.theta);
    if let (Some(w_left), Some(w_right)) = (
        admissible_prim(&left, &params.gas),
        admissible_prim(&right, &params.gas),
    ) {
        return Ok(Reconstructed {
            values: InterfaceValues { left, right },
            w_left,
            w_right,
            fallback_sides: 0,
        });
    }
    Ok(with_fallback(&basis, &gamma, cells, w_mid, tau, params))
}

/// Value at the shared interface from cell `owner` (0 for `j`, 1 for `j+1`).
/// The result is `U_owner + R * (+-1/2 limited increment)`, which equals
/// `R * Gamma^{+-}` and returns `U_owner` exactly when the slope vanishes.
#[inline(always)]
fn side_value(
    basis: &CharBasis,
    gamma: &[[f64; 4]; 4],
    owner: usize,
    average: &ConservedState,
    tau: f64,
    theta: f64,
) -> ConservedState {
    // Left value moves half a cell right from cell j; right value moves
    // half a cell left from cell j+1.
    let half = if owner == 0 { 0.5 } else { -0.5 };
    // NaN marks a cell forced to first order; theta = 0 zeroes its slope.
    let (theta, tau) = if tau.is_nan() {
        (0.0, TAU_MAX)
    } else {
        (theta, tau)
    };
    let (prev, mid, next) = (&gamma[owner], &gamma[owner + 1], &gamma[owner + 2]);
    let limiter = LimiterParams::new_unchecked(theta, tau);
    let inc = |m: usize| half * limited_increment(prev[m], mid[m], next[m], &limiter);
    let delta = [inc(0), inc(1), inc(2), inc(3)];
    *average + basis.lift(&delta)
}

/// Slow path once either side left the admissible set: retry that side with
/// the most dissipative `tau`, then fall back to the cell average.
#[cold]
#[inline(never)]
fn with_fallback(
    basis: &CharBasis,
    gamma: &[[f64; 4]; 4],
    cells: &[ConservedState; 4],
    w_mid: [&PrimitiveState; 2],
    tau: [f64; 2],
    params: &SweepParams,
) -> Reconstructed {
    let mut fallback_sides = 0;
    let mut side = |owner: usize| {
        let average = &cells[owner + 1];
        let value = side_value(basis, gamma, owner, average, tau[owner], params.theta);
        if let Some(w) = admissible_prim(&value, &params.gas) {
            return (value, w);
        }
        fallback_sides |= 1 << owner;
        if tau[owner] != TAU_MAX {
            let value = side_value(basis, gamma, owner, average, TAU_MAX, params.theta);
            if let Some(w) = admissible_prim(&value, &params.gas) {
                return (value, w);
            }
        }
        (*average, *w_mid[owner])
    };
    let (left, w_left) = side(0);
    let (right, w_right) = side(1);
    Reconstructed {
        values: InterfaceValues { left, right },
        w_left,
        w_right,
        fallback_sides,
    }
}

fn stencil_prims(
    cells: &[ConservedState; 4],
    gas: &GasModel,
    at: impl Fn(usize) -> (isize, isize),
) -> Result<[PrimitiveState; 2]> {
    let w = |l: usize| {
        cons_to_prim(&cells[l], gas).map_err(|e| {
            let (i, k) = at(l);
            e.at_cell(i, k)
        })
    };
    Ok([w(1)?, w(2)?])
}

fn reconstruct_line(
    cells: [ConservedState; 4],
    tau: [f64; 2],
    at: impl Fn(usize) -> (isize, isize),
    params: SweepParams,
) -> Result<InterfaceValues> {
    let w = stencil_prims(&cells, &params.gas, &at)?;
    let (i, k) = at(1);
    reconstruct_stencil(&cells, [&w[0], &w[1]], tau, &params)
        .map(|r| r.values)
        .map_err(|e| e.at_cell(i, k))
}

/// One-sided values at `x_{j+1/2}` of a 1-D field with filled ghosts.
pub fn reconstruct_interface_1d(
    field: &Field,
    tau: &IndicatorField,
    theta: f64,
    gas: &GasModel,
    j: isize,
) -> Result<InterfaceValues> {
    check_dim(field, Dimension::One)?;
    let cells = std::array::from_fn(|l| field.get(j - 1 + l as isize, 0));
    let params = SweepParams {
        theta,
        gas: *gas,
        dir: Direction::X,
        mode: ReconstructionMode::Characteristic,
    };
    reconstruct_line(
        cells,
        [tau.tau(j, 0), tau.tau(j + 1, 0)],
        |l| (j - 1 + l as isize, 0),
        params,
    )
}

/// One-sided values at `(x_{j+1/2}, y_k)` of a 2-D field.
pub fn reconstruct_interface_2d_x(
    field: &Field,
    tau: &IndicatorField,
    theta: f64,
    gas: &GasModel,
    j: isize,
    k: isize,
) -> Result<InterfaceValues> {
    check_dim(field, Dimension::Two)?;
    let cells = std::array::from_fn(|l| field.get(j - 1 + l as isize, k));
    let params = SweepParams {
        theta,
        gas: *gas,
        dir: Direction::X,
        mode: ReconstructionMode::Characteristic,
    };
    reconstruct_line(
        cells,
        [tau.tau(j, k), tau.tau(j + 1, k)],
        |l| (j - 1 + l as isize, k),
        params,
    )
}

/// One-sided values at `(x_j, y_{k+1/2})` of a 2-D field.
pub fn reconstruct_interface_2d_y(
    field: &Field,
    tau: &IndicatorField,
    theta: f64,
    gas: &GasModel,
    j: isize,
    k: isize,
) -> Result<InterfaceValues> {
    check_dim(field, Dimension::Two)?;
    let cells = std::array::from_fn(|l| field.get(j, k - 1 + l as isize));
    let params = SweepParams {
        theta,
        gas: *gas,
        dir: Direction::Y,
        mode: ReconstructionMode::Characteristic,
    };
    reconstruct_line(
        cells,
        [tau.tau(j, k), tau.tau(j, k + 1)],
        |l| (j, k - 1 + l as isize),
        params,
    )
}

fn check_dim(field: &Field, expected: Dimension) -> Result<()> {
    if field.grid().dim() != expected {
        return Err(Error::invalid_parameter(
            "field",
            format!("expected a {expected:?}-dimensional field"),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{fill_ghosts, BoundaryConditions};
    use crate::grid::Grid;
    use crate::state::{eigensystem, prim_to_cons};

    fn air() -> GasModel {
        GasModel::new(1.4).unwrap()
    }

    fn field_1d(nx: usize, f: impl Fn(f64) -> PrimitiveState) -> Field {
        let gas = air();
        let grid = Grid::new_1d(nx, 0.0, 1.0).unwrap();
        let mut field = Field::from_fn(grid, |i, _| {
            prim_to_cons(&f(grid.x_center(i)), &gas).unwrap()
        });
        fill_ghosts(&mut field, &BoundaryConditions::free());
        field
    }

    #[test]
    fn constant_field_is_reproduced_exactly() {
        let field = field_1d(8, |_| PrimitiveState::new_1d(1.3, 0.4, 2.0));
        let tau = IndicatorField::uniform(*field.grid(), -0.25);
        for j in -1..8 {
            let iv = reconstruct_interface_1d(&field, &tau, 2.0, &air(), j).unwrap();
            assert_eq!(iv.left, field.get(0, 0));
            assert_eq!(iv.right, field.get(0, 0));
        }
    }

    #[test]
    fn forced_cells_reconstruct_their_average() {
        let field = field_1d(12, |x| PrimitiveState::new_1d(1.0 + x * x, 0.2, 1.0 + x));
        let mut tau = IndicatorField::uniform(*field.grid(), -0.25);
        let mut marked = Vec::new();
        tau.force_first_order_around(6, 0, (false, false), &mut marked);
        assert_eq!(marked, [(5, 0), (6, 0), (7, 0)]);
        for j in 4..8 {
            let iv = reconstruct_interface_1d(&field, &tau, 2.0, &air(), j).unwrap();
            if (5..=7).contains(&j) {
                assert_eq!(iv.left, field.get(j, 0));
            }
            if (5..=7).contains(&(j + 1)) {
                assert_eq!(iv.right, field.get(j + 1, 0));
            }
        }
        // Marking again adds nothing.
        tau.force_first_order_around(6, 0, (false, false), &mut marked);
        assert_eq!(marked.len(), 3);
    }

    #[test]
    fn forcing_wraps_across_periodic_ends() {
        let field = field_1d(10, |x| PrimitiveState::new_1d(1.0 + x, 0.0, 1.0));
        let mut tau = IndicatorField::uniform(*field.grid(), 0.5);
        let mut marked = Vec::new();
        tau.force_first_order_around(0, 0, (true, false), &mut marked);
        marked.sort_unstable();
        assert_eq!(marked, [(0, 0), (1, 0), (9, 0)]);
        for i in [-1, 0, 1, 9, 10] {
            assert!(tau.tau(i, 0).is_nan(), "cell {i}");
        }
        assert_eq!(tau.tau(8, 0), 0.5);
    }

    #[test]
    fn linear_density_is_reproduced() {
        // Linear rho with constant u and p: the conserved variables are
        // linear, so interface values equal the point values.
        let gas = air();
        let field = field_1d(16, |x| PrimitiveState::new_1d(1.0 + 0.5 * x, 0.3, 1.0));
        let tau = IndicatorField::uniform(*field.grid(), 0.5);
        // Free ghosts flatten the slopes of the two boundary cells.
        for j in 1..14 {
            let iv = reconstruct_interface_1d(&field, &tau, 2.0, &gas, j).unwrap();
            let x = (j + 1) as f64 / 16.0;
            let exact =
                prim_to_cons(&PrimitiveState::new_1d(1.0 + 0.5 * x, 0.3, 1.0), &gas).unwrap();
            for (a, b) in [(iv.left, exact), (iv.right, exact)] {
                assert!((a - b).max_abs() < 1e-12, "j={j}: {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn characteristic_round_trip() {
        let gas = air();
        let field = field_1d(8, |x| {
            PrimitiveState::new_1d(1.0 + x, 0.5 - x, 1.0 + 2.0 * x)
        });
        let w = interface_average(
            &cons_to_prim(&field.get(3, 0), &gas).unwrap(),
            &cons_to_prim(&field.get(4, 0), &gas).unwrap(),
        );
        let eig = eigensystem(&w, &gas, Direction::X, Dimension::One).unwrap();
        for j in 2..6 {
            let u = field.get(j, 0);
            let back = eig.from_characteristic(&eig.to_characteristic(&u));
            assert!((back - u).max_abs() < 1e-12);
        }
    }

    #[test]
    fn fallback_replaces_negative_pressure() {
        // Strong density and pressure contrasts: the overcompressive
        // extrapolation leaves the admissible set on at least one side.
        let gas = air();
        let w = [
            PrimitiveState::new_1d(0.027435597570881525, -4.692294081645243, 20.594154000183067),
            PrimitiveState::new_1d(22.026710240121098, -3.4873787656237916, 0.23058623773359818),
            PrimitiveState::new_1d(14.97868682580817, -2.170122498673437, 7.781729687491797),
            PrimitiveState::new_1d(0.05658145915882297, 9.799902655997773, 79.13026653642868),
        ];
        let cells = w.map(|w| prim_to_cons(&w, &gas).unwrap());
        let w1 = cons_to_prim(&cells[1], &gas).unwrap();
        let w2 = cons_to_prim(&cells[2], &gas).unwrap();
        let params = SweepParams {
            theta: 2.0,
            gas,
            dir: Direction::X,
            mode: ReconstructionMode::Characteristic,
        };
        let r = reconstruct_stencil(&cells, [&w1, &w2], [-0.25, -0.25], &params).unwrap();
        assert!(r.w_left.is_valid() && r.w_right.is_valid());
        assert!(r.fallback_sides != 0);
    }

    #[test]
    fn first_order_mode_returns_cell_averages() {
        let gas = air();
        let field = field_1d(8, |x| PrimitiveState::new_1d(1.0 + x, 0.2, 1.0));
        let cells = std::array::from_fn(|l| field.get(2 + l as isize, 0));
        let w1 = cons_to_prim(&cells[1], &gas).unwrap();
        let w2 = cons_to_prim(&cells[2], &gas).unwrap();
        let params = SweepParams {
            theta: 2.0,
            gas,
            dir: Direction::X,
            mode: ReconstructionMode::FirstOrder,
        };
        let r = reconstruct_stencil(&cells, [&w1, &w2], [0.5, 0.5], &params).unwrap();
        assert_eq!(r.values.left, cells[1]);
        assert_eq!(r.values.right, cells[2]);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let field = field_1d(8, |_| PrimitiveState::new_1d(1.0, 0.0, 1.0));
        let tau = IndicatorField::uniform(*field.grid(), 0.5);
        assert!(reconstruct_interface_2d_x(&field, &tau, 2.0, &air(), 0, 0).is_err());
    }
}
