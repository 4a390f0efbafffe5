//! Uniform Cartesian grids and cell-average fields with ghost layers.

use crate::error::{Error, Result};
use crate::state::{ConservedState, Dimension};

/// Ghost layers per side in every active direction. Interface
/// reconstruction reaches two cells out and the smoothness indicator plus
/// its averaging reach three, so one fill serves both.
pub const GHOST: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: Dimension,
    nx: usize,
    ny: usize,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    dx: f64,
    dy: f64,
}

impl Grid {
    pub fn new_1d(nx: usize, x_min: f64, x_max: f64) -> Result<Self> {
        check_axis("nx", nx, x_min, x_max)?;
        Ok(Self {
            dim: Dimension::One,
            nx,
            ny: 1,
            x_min,
            x_max,
            y_min: 0.0,
            y_max: 0.0,
            dx: (x_max - x_min) / nx as f64,
            dy: 0.0,
        })
    }

    pub fn new_2d(
        nx: usize,
        ny: usize,
        (x_min, x_max): (f64, f64),
        (y_min, y_max): (f64, f64),
    ) -> Result<Self> {
        check_axis("nx", nx, x_min, x_max)?;
        check_axis("ny", ny, y_min, y_max)?;
        Ok(Self {
            dim: Dimension::Two,
            nx,
            ny,
            x_min,
            x_max,
            y_min,
            y_max,
            dx: (x_max - x_min) / nx as f64,
            dy: (y_max - y_min) / ny as f64,
        })
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.dim
    }
    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }
    /// Interior rows; 1 in 1-D.
    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }
    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }
    /// Zero in 1-D.
    #[inline]
    pub fn dy(&self) -> f64 {
        self.dy
    }
    pub fn x_bounds(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }
    pub fn y_bounds(&self) -> (f64, f64) {
        (self.y_min, self.y_max)
    }

    pub fn interior_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Ghost layers in y: [`GHOST`] in 2-D, none in 1-D.
    #[inline]
    pub fn ghost_y(&self) -> usize {
        match self.dim {
            Dimension::One => 0,
            Dimension::Two => GHOST,
        }
    }

    #[inline]
    pub fn padded_nx(&self) -> usize {
        self.nx + 2 * GHOST
    }

    #[inline]
    pub fn padded_ny(&self) -> usize {
        self.ny + 2 * self.ghost_y()
    }

    pub fn padded_len(&self) -> usize {
        self.padded_nx() * self.padded_ny()
    }

    /// Whether `(i, k)` is an interior cell.
    #[inline]
    pub fn contains(&self, i: isize, k: isize) -> bool {
        (0..self.nx as isize).contains(&i) && (0..self.ny as isize).contains(&k)
    }

    /// Flat index of cell `(i, k)`; interior cells are `0..nx` x `0..ny`,
    /// ghosts extend the range by [`GHOST`] on each side. Rows are stored
    /// y-outer. In 1-D `k` must be 0.
    #[inline]
    pub fn index(&self, i: isize, k: isize) -> usize {
        let gx = GHOST as isize;
        let gy = self.ghost_y() as isize;
        debug_assert!(
            i >= -gx && i < self.nx as isize + gx,
            "i = {i} out of range"
        );
        debug_assert!(
            k >= -gy && k < self.ny as isize + gy,
            "k = {k} out of range"
        );
        (k + gy) as usize * self.padded_nx() + (i + gx) as usize
    }

    #[inline]
    pub fn x_center(&self, i: isize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    #[inline]
    pub fn y_center(&self, k: isize) -> f64 {
        match self.dim {
            Dimension::One => 0.0,
            Dimension::Two => self.y_min + (k as f64 + 0.5) * self.dy,
        }
    }

    /// Same dimensionality, bounds and mesh.
    pub fn same_mesh(&self, other: &Grid) -> bool {
        self == other
    }
}

fn check_axis(name: &'static str, n: usize, lo: f64, hi: f64) -> Result<()> {
    if n < 4 {
        return Err(Error::invalid_parameter(
            name,
            format!("need at least 4 cells, got {n}"),
        ));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::invalid_parameter(
            name,
            format!("invalid bounds [{lo}, {hi}]"),
        ));
    }
    Ok(())
}

/// Cell averages on a padded grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    data: Vec<ConservedState>,
}

impl Field {
    pub fn new(grid: Grid) -> Self {
        Self {
            data: vec![ConservedState::ZERO; grid.padded_len()],
            grid,
        }
    }

    pub fn uniform(grid: Grid, state: ConservedState) -> Self {
        Self {
            data: vec![state; grid.padded_len()],
            grid,
        }
    }

    /// Interior cells set from `f(i, k)`; ghosts left zero until filled.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(isize, isize) -> ConservedState) -> Self {
        let mut field = Self::new(grid);
        for k in 0..grid.ny() as isize {
            for i in 0..grid.nx() as isize {
                let idx = grid.index(i, k);
                field.data[idx] = f(i, k);
            }
        }
        field
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn get(&self, i: isize, k: isize) -> ConservedState {
        self.data[self.grid.index(i, k)]
    }

    #[inline]
    pub fn set(&mut self, i: isize, k: isize, u: ConservedState) {
        let idx = self.grid.index(i, k);
        self.data[idx] = u;
    }

    #[inline]
    pub fn as_slice(&self) -> &[ConservedState] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [ConservedState] {
        &mut self.data
    }

    /// Density over the whole padded array.
    pub fn density(&self) -> Vec<f64> {
        self.data.iter().map(|u| u.rho).collect()
    }

    /// Interior cells in storage order (y-outer).
    pub fn interior(&self) -> impl Iterator<Item = (isize, isize, ConservedState)> + '_ {
        let g = self.grid;
        (0..g.ny() as isize)
            .flat_map(move |k| (0..g.nx() as isize).map(move |i| (i, k, self.get(i, k))))
    }

    /// Sum of `cell volume * U` over interior cells.
    pub fn total(&self) -> ConservedState {
        let vol = match self.grid.dim() {
            Dimension::One => self.grid.dx(),
            Dimension::Two => self.grid.dx() * self.grid.dy(),
        };
        self.interior()
            .fold(ConservedState::ZERO, |acc, (_, _, u)| acc + u * vol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_centers() {
        let g = Grid::new_1d(800, -5.0, 15.0).unwrap();
        assert_eq!(g.dx(), 20.0 / 800.0);
        assert_eq!(g.x_center(0), -5.0 + 0.5 / 40.0);
        assert_eq!(g.padded_len(), 806);
        assert_eq!(g.index(-3, 0), 0);
        assert_eq!(g.index(802, 0), 805);

        let g = Grid::new_2d(4, 5, (0.0, 1.0), (0.0, 2.0)).unwrap();
        assert_eq!(g.padded_nx(), 10);
        assert_eq!(g.padded_ny(), 11);
        assert_eq!(g.index(0, 0), 3 * 10 + 3);
        assert_eq!(g.y_center(4), 1.8);
    }

    #[test]
    fn rejects_tiny_or_inverted_grids() {
        assert!(Grid::new_1d(3, 0.0, 1.0).is_err());
        assert!(Grid::new_1d(10, 1.0, 0.0).is_err());
        assert!(Grid::new_2d(10, 2, (0.0, 1.0), (0.0, 1.0)).is_err());
    }
}
