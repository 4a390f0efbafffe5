//! Conserved and primitive states of the ideal-gas Euler equations, the
//! physical fluxes, and the eigensystem of the flux Jacobian used for local
//! characteristic decomposition.
//!
//! One state layout `(rho, rho*u, rho*v, E)` serves both 1-D and 2-D runs.
//! In 1-D the y-momentum is identically zero and the eigensystem embeds the
//! 3x3 system with a passive identity row, so every 1-D kernel is exactly the
//! 2-D x-direction kernel evaluated at `v = 0`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Ideal-gas equation of state `p = (gamma - 1) (E - rho |u|^2 / 2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel {
    gamma: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::invalid_parameter(
                "gamma",
                format!("must be > 1, got {gamma}"),
            ));
        }
        Ok(Self { gamma })
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    /// Number of conserved components carried by the system.
    pub fn components(self) -> usize {
        match self {
            Dimension::One => 3,
            Dimension::Two => 4,
        }
    }
}

/// Sweep direction; selects the normal velocity and momentum component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

/// Cell average (or point value) of the conserved variables. Also used for
/// flux vectors and right-hand sides, which share the layout.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub mom_x: f64,
    pub mom_y: f64,
    pub energy: f64,
}

impl ConservedState {
    pub const ZERO: ConservedState = ConservedState {
        rho: 0.0,
        mom_x: 0.0,
        mom_y: 0.0,
        energy: 0.0,
    };

    pub const fn new(rho: f64, mom_x: f64, mom_y: f64, energy: f64) -> Self {
        Self {
            rho,
            mom_x,
            mom_y,
            energy,
        }
    }

    #[inline]
    pub fn to_array(self) -> [f64; 4] {
        [self.rho, self.mom_x, self.mom_y, self.energy]
    }

    #[inline]
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.rho.is_finite()
            && self.mom_x.is_finite()
            && self.mom_y.is_finite()
            && self.energy.is_finite()
    }

    /// Momentum normal to the sweep direction.
    #[inline]
    pub fn normal_momentum(&self, dir: Direction) -> f64 {
        match dir {
            Direction::X => self.mom_x,
            Direction::Y => self.mom_y,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Add for ConservedState {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(
            self.rho + o.rho,
            self.mom_x + o.mom_x,
            self.mom_y + o.mom_y,
            self.energy + o.energy,
        )
    }
}

impl AddAssign for ConservedState {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ConservedState {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.rho - o.rho,
            self.mom_x - o.mom_x,
            self.mom_y - o.mom_y,
            self.energy - o.energy,
        )
    }
}

impl Mul<f64> for ConservedState {
    type Output = Self;
    #[inline]
    fn mul(self, a: f64) -> Self {
        Self::new(
            self.rho * a,
            self.mom_x * a,
            self.mom_y * a,
            self.energy * a,
        )
    }
}

impl Mul<ConservedState> for f64 {
    type Output = ConservedState;
    #[inline]
    fn mul(self, u: ConservedState) -> ConservedState {
        u * self
    }
}

impl Neg for ConservedState {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.rho, -self.mom_x, -self.mom_y, -self.energy)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
}

impl PrimitiveState {
    pub const fn new(rho: f64, u: f64, v: f64, p: f64) -> Self {
        Self { rho, u, v, p }
    }

    /// 1-D state with zero transverse velocity.
    pub const fn new_1d(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, v: 0.0, p }
    }

    #[inline]
    pub fn is_valid(&self) -> bool {
        self.rho > 0.0
            && self.p > 0.0
            && self.u.is_finite()
            && self.v.is_finite()
            && self.p.is_finite()
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidState {
                cell: None,
                rho: self.rho,
                p: self.p,
            })
        }
    }

    #[inline]
    pub fn normal_velocity(&self, dir: Direction) -> f64 {
        match dir {
            Direction::X => self.u,
            Direction::Y => self.v,
        }
    }
}

/// `cons_to_prim` without the error payload, for hot paths that only need
/// to know whether the state is admissible.
#[inline(always)]
pub(crate) fn admissible_prim(u: &ConservedState, gas: &GasModel) -> Option<PrimitiveState> {
    let rho = u.rho;
    // Comparisons against infinity also reject NaN.
    if !(rho > 0.0 && rho < f64::INFINITY) {
        return None;
    }
    let inv = 1.0 / rho;
    let (vx, vy) = (u.mom_x * inv, u.mom_y * inv);
    let p = (gas.gamma - 1.0) * (u.energy - 0.5 * (u.mom_x * vx + u.mom_y * vy));
    (p > 0.0 && p < f64::INFINITY).then_some(PrimitiveState {
        rho,
        u: vx,
        v: vy,
        p,
    })
}

/// Recovers `(rho, u, v, p)` through the ideal-gas EOS.
#[inline]
pub fn cons_to_prim(u: &ConservedState, gas: &GasModel) -> Result<PrimitiveState> {
    let rho = u.rho;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidState {
            cell: None,
            rho,
            p: f64::NAN,
        });
    }
    let vx = u.mom_x / rho;
    let vy = u.mom_y / rho;
    let kinetic = 0.5 * (u.mom_x * vx + u.mom_y * vy);
    let p = (gas.gamma - 1.0) * (u.energy - kinetic);
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidState { cell: None, rho, p });
    }
    Ok(PrimitiveState {
        rho,
        u: vx,
        v: vy,
        p,
    })
}

pub fn prim_to_cons(w: &PrimitiveState, gas: &GasModel) -> Result<ConservedState> {
    w.validate()?;
    Ok(prim_to_cons_unchecked(w, gas))
}

#[inline]
pub(crate) fn prim_to_cons_unchecked(w: &PrimitiveState, gas: &GasModel) -> ConservedState {
    let mom_x = w.rho * w.u;
    let mom_y = w.rho * w.v;
    let energy = w.p / (gas.gamma - 1.0) + 0.5 * (mom_x * w.u + mom_y * w.v);
    ConservedState {
        rho: w.rho,
        mom_x,
        mom_y,
        energy,
    }
}

#[inline]
pub(crate) fn flux_from_prim(
    u: &ConservedState,
    w: &PrimitiveState,
    dir: Direction,
) -> ConservedState {
    match dir {
        Direction::X => ConservedState {
            rho: u.mom_x,
            mom_x: u.mom_x * w.u + w.p,
            mom_y: u.mom_y * w.u,
            energy: w.u * (u.energy + w.p),
        },
        Direction::Y => ConservedState {
            rho: u.mom_y,
            mom_x: u.mom_x * w.v,
            mom_y: u.mom_y * w.v + w.p,
            energy: w.v * (u.energy + w.p),
        },
    }
}

/// `F(U) = (rho u, rho u^2 + p, rho u v, u (E + p))`.
pub fn physical_flux_x(u: &ConservedState, gas: &GasModel) -> Result<ConservedState> {
    physical_flux(u, gas, Direction::X)
}

/// `G(U) = (rho v, rho u v, rho v^2 + p, v (E + p))`.
pub fn physical_flux_y(u: &ConservedState, gas: &GasModel) -> Result<ConservedState> {
    physical_flux(u, gas, Direction::Y)
}

pub fn physical_flux(u: &ConservedState, gas: &GasModel, dir: Direction) -> Result<ConservedState> {
    let w = cons_to_prim(u, gas)?;
    Ok(flux_from_prim(u, &w, dir))
}

/// Arithmetic mean of the primitive variables of two neighbouring cells.
#[inline]
pub fn interface_average(left: &PrimitiveState, right: &PrimitiveState) -> PrimitiveState {
    PrimitiveState {
        rho: 0.5 * (left.rho + right.rho),
        u: 0.5 * (left.u + right.u),
        v: 0.5 * (left.v + right.v),
        p: 0.5 * (left.p + right.p),
    }
}

pub type Matrix4 = [[f64; 4]; 4];

/// Right eigenvectors `r` (as columns), left eigenvectors `rinv` (as rows),
/// and the eigenvalues of the flux Jacobian in one direction.
///
/// Component order follows [`ConservedState`]: `(rho, mom_x, mom_y, E)`.
/// Eigenvalue order is ascending: acoustic `-`, entropy, shear, acoustic `+`.
/// In 1-D the shear family is a passive identity on the (zero) y-momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSystem {
    pub r: Matrix4,
    pub rinv: Matrix4,
    values: [f64; 4],
    dim: Dimension,
}

impl EigenSystem {
    /// Eigenvalues sorted ascending: `(u-c, u, u+c)` in 1-D and
    /// `(u-c, u, u, u+c)` in 2-D, with `u` the normal velocity.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.dim {
            Dimension::One => vec![self.values[0], self.values[1], self.values[3]],
            Dimension::Two => self.values.to_vec(),
        }
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    /// Characteristic variables `R^{-1} U`.
    #[inline]
    pub fn to_characteristic(&self, u: &ConservedState) -> [f64; 4] {
        mat_vec(&self.rinv, &u.to_array())
    }

    /// Conserved variables `R Gamma`.
    #[inline]
    pub fn from_characteristic(&self, g: &[f64; 4]) -> ConservedState {
        ConservedState::from_array(mat_vec(&self.r, g))
    }
}

#[inline]
pub(crate) fn mat_vec(m: &Matrix4, x: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3];
    }
    out
}

pub fn eigensystem_x(
    w_hat: &PrimitiveState,
    gas: &GasModel,
    dim: Dimension,
) -> Result<EigenSystem> {
    eigensystem(w_hat, gas, Direction::X, dim)
}

pub fn eigensystem_y(w_hat: &PrimitiveState, gas: &GasModel) -> Result<EigenSystem> {
    eigensystem(w_hat, gas, Direction::Y, Dimension::Two)
}

/// Closed-form eigensystem of the ideal-gas flux Jacobian at `w_hat`.
pub fn eigensystem(
    w_hat: &PrimitiveState,
    gas: &GasModel,
    dir: Direction,
    dim: Dimension,
) -> Result<EigenSystem> {
    if !w_hat.is_valid() {
        return Err(Error::Decomposition {
            cell: None,
            rho: w_hat.rho,
            p: w_hat.p,
        });
    }
    // Normal (un) and tangential (ut) velocities; the y-system is the
    // x-system with u and v swapped and momentum components 1 and 2 exchanged.
    let (un, ut) = match (dir, dim) {
        (_, Dimension::One) => (w_hat.u, 0.0),
        (Direction::X, Dimension::Two) => (w_hat.u, w_hat.v),
        (Direction::Y, Dimension::Two) => (w_hat.v, w_hat.u),
    };
    let gm1 = gas.gamma - 1.0;
    let c2 = gas.gamma * w_hat.p / w_hat.rho;
    let c = c2.sqrt();
    let q2 = un * un + ut * ut;
    let h = c2 / gm1 + 0.5 * q2;
    let b1 = gm1 / c2;
    let b2 = 0.5 * b1 * q2;
    let inv_c = 1.0 / c;

    // Columns: acoustic -, entropy, shear, acoustic +. Rows: rho, m_n, m_t, E.
    let r: Matrix4 = [
        [1.0, 1.0, 0.0, 1.0],
        [un - c, un, 0.0, un + c],
        [ut, ut, 1.0, ut],
        [h - un * c, 0.5 * q2, ut, h + un * c],
    ];
    let rinv: Matrix4 = [
        [
            0.5 * (b2 + un * inv_c),
            -0.5 * (b1 * un + inv_c),
            -0.5 * b1 * ut,
            0.5 * b1,
        ],
        [1.0 - b2, b1 * un, b1 * ut, -b1],
        [-ut, 0.0, 1.0, 0.0],
        [
            0.5 * (b2 - un * inv_c),
            -0.5 * (b1 * un - inv_c),
            -0.5 * b1 * ut,
            0.5 * b1,
        ],
    ];
    let values = [un - c, un, un, un + c];

    let (r, rinv) = match dir {
        Direction::X => (r, rinv),
        Direction::Y => (swap_momentum_rows(&r), swap_momentum_cols(&rinv)),
    };
    Ok(EigenSystem {
        r,
        rinv,
        values,
        dim,
    })
}

/// The eigensystem of [`eigensystem`] applied through its closed-form
/// structure instead of dense 4x4 products. Hot path of the reconstruction.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CharBasis {
    dir: Direction,
    un: f64,
    ut: f64,
    c: f64,
    inv_c: f64,
    b1: f64,
    b2: f64,
    h: f64,
    half_q2: f64,
}

impl CharBasis {
    #[inline]
    pub fn new(w_hat: &PrimitiveState, gas: &GasModel, dir: Direction) -> Result<Self> {
        if !w_hat.is_valid() {
            return Err(Error::Decomposition {
                cell: None,
                rho: w_hat.rho,
                p: w_hat.p,
            });
        }
        let (un, ut) = match dir {
            Direction::X => (w_hat.u, w_hat.v),
            Direction::Y => (w_hat.v, w_hat.u),
        };
        let gm1 = gas.gamma - 1.0;
        let c2 = gas.gamma * w_hat.p / w_hat.rho;
        let c = c2.sqrt();
        let half_q2 = 0.5 * (un * un + ut * ut);
        let b1 = gm1 / c2;
        Ok(Self {
            dir,
            un,
            ut,
            c,
            inv_c: 1.0 / c,
            b1,
            b2: b1 * half_q2,
            h: c2 / gm1 + half_q2,
            half_q2,
        })
    }

    /// `(rho, normal momentum, tangential momentum, E)`.
    #[inline]
    fn oriented(&self, u: &ConservedState) -> [f64; 4] {
        match self.dir {
            Direction::X => [u.rho, u.mom_x, u.mom_y, u.energy],
            Direction::Y => [u.rho, u.mom_y, u.mom_x, u.energy],
        }
    }

    /// `R^{-1} U`.
    #[inline]
    pub fn project(&self, u: &ConservedState) -> [f64; 4] {
        let [rho, mn, mt, e] = self.oriented(u);
        let x = self.b2 * rho + self.b1 * (e - self.un * mn - self.ut * mt);
        let y = (self.un * rho - mn) * self.inv_c;
        [0.5 * (x + y), rho - x, mt - self.ut * rho, 0.5 * (x - y)]
    }

    /// `R g`.
    #[inline]
    pub fn lift(&self, g: &[f64; 4]) -> ConservedState {
        let rho = g[0] + g[1] + g[3];
        let split = self.c * (g[3] - g[0]);
        let mn = self.un * rho + split;
        let mt = self.ut * rho + g[2];
        let e = self.h * (g[0] + g[3]) + self.un * split + self.half_q2 * g[1] + self.ut * g[2];
        match self.dir {
            Direction::X => ConservedState::new(rho, mn, mt, e),
            Direction::Y => ConservedState::new(rho, mt, mn, e),
        }
    }
}

fn swap_momentum_rows(m: &Matrix4) -> Matrix4 {
    [m[0], m[2], m[1], m[3]]
}

fn swap_momentum_cols(m: &Matrix4) -> Matrix4 {
    let mut out = *m;
    for row in out.iter_mut() {
        row.swap(1, 2);
    }
    out
}
