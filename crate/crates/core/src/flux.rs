//! Numerical interface fluxes built from one-sided local speeds.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::state::{
    cons_to_prim, flux_from_prim, ConservedState, Direction, GasModel, PrimitiveState,
};

/// One-sided bounds of the local wave fan at an interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalSpeeds {
    pub a_plus: f64,
    pub a_minus: f64,
}

impl LocalSpeeds {
    /// Largest signal speed magnitude, `max(a+, -a-)`.
    #[inline]
    pub fn max_abs(&self) -> f64 {
        self.a_plus.max(-self.a_minus)
    }
}

pub fn local_speeds(
    left: &ConservedState,
    right: &ConservedState,
    gas: &GasModel,
    dir: Direction,
) -> Result<LocalSpeeds> {
    let wl = cons_to_prim(left, gas)?;
    let wr = cons_to_prim(right, gas)?;
    Ok(speeds_from_prims(&wl, &wr, gas, dir))
}

#[inline]
pub(crate) fn speeds_from_prims(
    wl: &PrimitiveState,
    wr: &PrimitiveState,
    gas: &GasModel,
    dir: Direction,
) -> LocalSpeeds {
    let (ul, ur) = (wl.normal_velocity(dir), wr.normal_velocity(dir));
    let (cl, cr) = (gas.sound_speed(wl.rho, wl.p), gas.sound_speed(wr.rho, wr.p));
    LocalSpeeds {
        a_plus: (ul + cl).max(ur + cr).max(0.0),
        a_minus: (ul - cl).min(ur - cr).min(0.0),
    }
}

/// Anti-diffusion correction applied on top of the central-upwind flux.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AntiDiffusion {
    /// Plain central-upwind flux.
    None,
    /// Minmod-limited built-in anti-diffusion: subtracts
    /// `a+ a- / (a+ - a-) * minmod(U+ - U*, U* - U-)` where `U*` is the
    /// intermediate state of the HLL fan.
    #[default]
    Minmod,
}

/// Flux selection by name: `cu` or `ldcu`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FluxKind {
    #[default]
    Cu,
    Ldcu(AntiDiffusion),
}

impl FluxKind {
    pub fn name(&self) -> &'static str {
        match self {
            FluxKind::Cu => "cu",
            FluxKind::Ldcu(_) => "ldcu",
        }
    }

    pub fn build(&self) -> Box<dyn NumericalFlux> {
        match *self {
            FluxKind::Cu => Box::new(CentralUpwind),
            FluxKind::Ldcu(anti_diffusion) => {
                Box::new(LowDissipationCentralUpwind { anti_diffusion })
            }
        }
    }
}

impl fmt::Display for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FluxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cu" => Ok(FluxKind::Cu),
            "ldcu" => Ok(FluxKind::Ldcu(AntiDiffusion::default())),
            other => Err(Error::invalid_parameter(
                "flux",
                format!("expected cu | ldcu, got `{other}`"),
            )),
        }
    }
}

/// Interface flux contract. Implementations must be consistent:
/// `evaluate(U, U) == F(U)`.
pub trait NumericalFlux: Send + Sync {
    fn name(&self) -> &'static str;

    fn evaluate(
        &self,
        left: &ConservedState,
        right: &ConservedState,
        gas: &GasModel,
        dir: Direction,
    ) -> Result<ConservedState>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CentralUpwind;

impl NumericalFlux for CentralUpwind {
    fn name(&self) -> &'static str {
        "cu"
    }

    fn evaluate(
        &self,
        left: &ConservedState,
        right: &ConservedState,
        gas: &GasModel,
        dir: Direction,
    ) -> Result<ConservedState> {
        cu_flux(left, right, gas, dir)
    }
}

/// Low-dissipation seam: the central-upwind flux plus a pluggable
/// anti-diffusion term. With [`AntiDiffusion::None`] it is the CU flux.
#[derive(Clone, Copy, Debug, Default)]
pub struct LowDissipationCentralUpwind {
    pub anti_diffusion: AntiDiffusion,
}

impl NumericalFlux for LowDissipationCentralUpwind {
    fn name(&self) -> &'static str {
        "ldcu"
    }

    fn evaluate(
        &self,
        left: &ConservedState,
        right: &ConservedState,
        gas: &GasModel,
        dir: Direction,
    ) -> Result<ConservedState> {
        let wl = cons_to_prim(left, gas)?;
        let wr = cons_to_prim(right, gas)?;
        Ok(interface_flux(
            FluxKind::Ldcu(self.anti_diffusion),
            left,
            &wl,
            right,
            &wr,
            gas,
            dir,
        )
        .0)
    }
}

/// Every flux selectable by name.
pub fn registry() -> Vec<Box<dyn NumericalFlux>> {
    vec![
        FluxKind::Cu.build(),
        FluxKind::Ldcu(AntiDiffusion::default()).build(),
    ]
}

pub fn cu_flux(
    left: &ConservedState,
    right: &ConservedState,
    gas: &GasModel,
    dir: Direction,
) -> Result<ConservedState> {
    let wl = cons_to_prim(left, gas)?;
    let wr = cons_to_prim(right, gas)?;
    Ok(interface_flux(FluxKind::Cu, left, &wl, right, &wr, gas, dir).0)
}

pub fn ldcu_flux(
    left: &ConservedState,
    right: &ConservedState,
    gas: &GasModel,
    dir: Direction,
) -> Result<ConservedState> {
    LowDissipationCentralUpwind::default().evaluate(left, right, gas, dir)
}

/// Flux and local speeds from states whose primitives are already known.
#[inline(always)]
pub(crate) fn interface_flux(
    kind: FluxKind,
    left: &ConservedState,
    wl: &PrimitiveState,
    right: &ConservedState,
    wr: &PrimitiveState,
    gas: &GasModel,
    dir: Direction,
) -> (ConservedState, LocalSpeeds) {
    let speeds = speeds_from_prims(wl, wr, gas, dir);
    let LocalSpeeds { a_plus, a_minus } = speeds;
    let fl = flux_from_prim(left, wl, dir);
    let fr = flux_from_prim(right, wr, dir);
    let width = a_plus - a_minus;
    let eta = 1e-10 * a_plus.abs().max(a_minus.abs()).max(1.0);
    if width <= eta {
        return ((fl + fr) * 0.5, speeds);
    }
    // (a+ F- - a- F+)/(a+ - a-) + a+ a-/(a+ - a-) (U+ - U-), rearranged as
    // F- - a-/(a+ - a-) [(F+ - F-) - a+ (U+ - U-)] so that equal states and
    // a- = 0 return F- exactly.
    let du = *right - *left;
    let df = fr - fl;
    let cu = fl - (df - du * a_plus) * (a_minus / width);
    let flux = match kind {
        FluxKind::Cu | FluxKind::Ldcu(AntiDiffusion::None) => cu,
        FluxKind::Ldcu(AntiDiffusion::Minmod) => {
            let mid = (*right * a_plus - *left * a_minus - df) * (1.0 / width);
            let q = minmod_vec(&(*right - mid), &(mid - *left));
            cu - q * (a_plus * a_minus / width)
        }
    };
    (flux, speeds)
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

fn minmod_vec(a: &ConservedState, b: &ConservedState) -> ConservedState {
    ConservedState::new(
        minmod(a.rho, b.rho),
        minmod(a.mom_x, b.mom_x),
        minmod(a.mom_y, b.mom_y),
        minmod(a.energy, b.energy),
    )
}
