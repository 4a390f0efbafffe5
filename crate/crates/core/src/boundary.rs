//! Ghost-cell boundary conditions.

use crate::error::{Error, Result};
use crate::grid::{Field, GHOST};
use crate::state::{prim_to_cons, ConservedState, Dimension, GasModel, PrimitiveState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryKind {
    /// Zeroth-order extrapolation of the nearest interior cell.
    Free,
    /// Reflecting solid wall: mirror with the normal momentum negated.
    Wall,
    /// Ghost cells hold a prescribed state.
    Dirichlet(ConservedState),
    /// Must be set on both opposing sides.
    Periodic,
}

impl BoundaryKind {
    pub fn dirichlet(w: PrimitiveState, gas: &GasModel) -> Result<Self> {
        Ok(BoundaryKind::Dirichlet(prim_to_cons(&w, gas)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryKind::Free => "free",
            BoundaryKind::Wall => "wall",
            BoundaryKind::Dirichlet(_) => "dirichlet",
            BoundaryKind::Periodic => "periodic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryConditions {
    pub x_lo: BoundaryKind,
    pub x_hi: BoundaryKind,
    /// Ignored in 1-D.
    pub y_lo: BoundaryKind,
    pub y_hi: BoundaryKind,
}

impl BoundaryConditions {
    pub fn new(
        x_lo: BoundaryKind,
        x_hi: BoundaryKind,
        y_lo: BoundaryKind,
        y_hi: BoundaryKind,
    ) -> Result<Self> {
        let bc = Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        };
        bc.validate()?;
        Ok(bc)
    }

    pub fn all(kind: BoundaryKind) -> Self {
        Self {
            x_lo: kind,
            x_hi: kind,
            y_lo: kind,
            y_hi: kind,
        }
    }

    pub fn free() -> Self {
        Self::all(BoundaryKind::Free)
    }

    pub fn periodic() -> Self {
        Self::all(BoundaryKind::Periodic)
    }

    /// Whether the x and y axes wrap around.
    pub fn periodic_axes(&self) -> (bool, bool) {
        (
            self.x_lo == BoundaryKind::Periodic,
            self.y_lo == BoundaryKind::Periodic,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let periodic = |k: &BoundaryKind| matches!(k, BoundaryKind::Periodic);
        if periodic(&self.x_lo) != periodic(&self.x_hi)
            || periodic(&self.y_lo) != periodic(&self.y_hi)
        {
            return Err(Error::invalid_parameter(
                "bc",
                "periodic boundaries must be set on both opposing sides",
            ));
        }
        Ok(())
    }
}

/// Fills every ghost cell, corners included in 2-D (x first on interior
/// rows, then y over full padded rows).
pub fn fill_ghosts(field: &mut Field, bc: &BoundaryConditions) {
    let grid = *field.grid();
    let nx = grid.nx() as isize;
    let g = GHOST as isize;
    for k in 0..grid.ny() as isize {
        for m in 0..g {
            let lo = ghost_value(field, bc.x_lo, (m, k), (nx - 1 - m, k), (0, k), Axis::X);
            field.set(-1 - m, k, lo);
            let hi = ghost_value(
                field,
                bc.x_hi,
                (nx - 1 - m, k),
                (m, k),
                (nx - 1, k),
                Axis::X,
            );
            field.set(nx + m, k, hi);
        }
    }
    if grid.dim() == Dimension::One {
        return;
    }
    let ny = grid.ny() as isize;
    for i in -g..nx + g {
        for m in 0..g {
            let lo = ghost_value(field, bc.y_lo, (i, m), (i, ny - 1 - m), (i, 0), Axis::Y);
            field.set(i, -1 - m, lo);
            let hi = ghost_value(
                field,
                bc.y_hi,
                (i, ny - 1 - m),
                (i, m),
                (i, ny - 1),
                Axis::Y,
            );
            field.set(i, ny + m, hi);
        }
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// `mirror`, `wrap` and `nearest` are the interior sources for the wall,
/// periodic and free rules respectively.
#[inline]
fn ghost_value(
    field: &Field,
    kind: BoundaryKind,
    mirror: (isize, isize),
    wrap: (isize, isize),
    nearest: (isize, isize),
    axis: Axis,
) -> ConservedState {
    match kind {
        BoundaryKind::Free => field.get(nearest.0, nearest.1),
        BoundaryKind::Periodic => field.get(wrap.0, wrap.1),
        BoundaryKind::Dirichlet(state) => state,
        BoundaryKind::Wall => {
            let mut u = field.get(mirror.0, mirror.1);
            match axis {
                Axis::X => u.mom_x = -u.mom_x,
                Axis::Y => u.mom_y = -u.mom_y,
            }
            u
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::state::cons_to_prim;

    fn air() -> GasModel {
        GasModel::new(1.4).unwrap()
    }

    fn ramp_1d(nx: usize) -> Field {
        let grid = Grid::new_1d(nx, 0.0, 1.0).unwrap();
        Field::from_fn(grid, |i, _| {
            ConservedState::new(1.0 + i as f64, 0.5, 0.0, 10.0 + i as f64)
        })
    }

    #[test]
    fn free_copies_nearest() {
        let mut f = ramp_1d(6);
        fill_ghosts(&mut f, &BoundaryConditions::free());
        for m in 1..=3 {
            assert_eq!(f.get(-m, 0), f.get(0, 0));
            assert_eq!(f.get(5 + m, 0), f.get(5, 0));
        }
        let grid = Grid::new_1d(6, 0.0, 1.0).unwrap();
        let c = ConservedState::new(1.0, 0.2, 0.0, 3.0);
        let mut f = Field::from_fn(grid, |_, _| c);
        fill_ghosts(&mut f, &BoundaryConditions::free());
        assert!(f.as_slice().iter().all(|u| *u == c));
    }

    #[test]
    fn wall_mirrors_and_flips_normal_momentum() {
        let gas = air();
        let grid = Grid::new_1d(6, 0.0, 1.0).unwrap();
        let u = prim_to_cons(&PrimitiveState::new_1d(1.0, 0.5, 1.0), &gas).unwrap();
        let mut f = Field::from_fn(grid, |_, _| u);
        fill_ghosts(&mut f, &BoundaryConditions::all(BoundaryKind::Wall));
        let w = cons_to_prim(&f.get(-1, 0), &gas).unwrap();
        assert_eq!(
            (w.rho, w.u, w.p),
            (1.0, -0.5, cons_to_prim(&u, &gas).unwrap().p)
        );

        let mut f = ramp_1d(6);
        fill_ghosts(&mut f, &BoundaryConditions::all(BoundaryKind::Wall));
        assert_eq!(f.get(-3, 0).rho, f.get(2, 0).rho);
        assert_eq!(f.get(8, 0).rho, f.get(3, 0).rho);
        assert_eq!(f.get(8, 0).mom_x, -0.5);
    }

    #[test]
    fn periodic_wraps() {
        let mut f = ramp_1d(6);
        fill_ghosts(&mut f, &BoundaryConditions::periodic());
        assert_eq!(f.get(-1, 0), f.get(5, 0));
        assert_eq!(f.get(-3, 0), f.get(3, 0));
        assert_eq!(f.get(6, 0), f.get(0, 0));
    }

    #[test]
    fn periodic_must_pair() {
        assert!(BoundaryConditions::new(
            BoundaryKind::Periodic,
            BoundaryKind::Free,
            BoundaryKind::Free,
            BoundaryKind::Free
        )
        .is_err());
        assert!(BoundaryConditions::new(
            BoundaryKind::Free,
            BoundaryKind::Free,
            BoundaryKind::Periodic,
            BoundaryKind::Periodic
        )
        .is_ok());
    }

    #[test]
    fn two_d_walls_and_dirichlet_corners() {
        let gas = air();
        let grid = Grid::new_2d(4, 5, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let mut f = Field::from_fn(grid, |i, k| {
            ConservedState::new(1.0 + i as f64, 0.3, -0.2, 5.0 + k as f64)
        });
        let top = BoundaryKind::dirichlet(PrimitiveState::new(1.0, 0.0, 0.0, 2.5), &gas).unwrap();
        let bottom =
            BoundaryKind::dirichlet(PrimitiveState::new(2.0, 0.0, 0.0, 1.0), &gas).unwrap();
        let bc =
            BoundaryConditions::new(BoundaryKind::Wall, BoundaryKind::Wall, bottom, top).unwrap();
        fill_ghosts(&mut f, &bc);
        let left = f.get(-2, 3);
        assert_eq!(left.rho, f.get(1, 3).rho);
        assert_eq!(left.mom_x, -0.3);
        assert_eq!(left.mom_y, -0.2);
        let BoundaryKind::Dirichlet(b) = bottom else {
            unreachable!()
        };
        assert_eq!(f.get(-3, -3), b);
        assert_eq!(f.get(2, -1), b);
        let BoundaryKind::Dirichlet(t) = top else {
            unreachable!()
        };
        assert_eq!(f.get(6, 7), t);
    }
}
