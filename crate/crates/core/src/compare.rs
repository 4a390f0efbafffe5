//! Discrete error norms between solutions on nested meshes.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::FieldFile;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Norm {
    #[default]
    L1,
    L2,
    Linf,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "L1",
            Norm::L2 => "L2",
            Norm::Linf => "Linf",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "inf" | "max" => Ok(Norm::Linf),
            other => Err(Error::invalid_parameter(
                "norm",
                format!("expected L1 | L2 | Linf, got `{other}`"),
            )),
        }
    }
}

/// Cell-average restriction of a row-major `(nx_f, ny_f)` array onto
/// `(nx_c, ny_c)`. Each coarse count must divide the fine one.
pub fn restrict(
    fine: &[f64],
    (nx_f, ny_f): (usize, usize),
    (nx_c, ny_c): (usize, usize),
) -> Result<Vec<f64>> {
    if nx_c == 0 || ny_c == 0 || nx_f % nx_c != 0 || ny_f % ny_c != 0 {
        return Err(Error::IncompatibleMesh(format!(
            "{nx_c}x{ny_c} does not divide {nx_f}x{ny_f}"
        )));
    }
    if fine.len() != nx_f * ny_f {
        return Err(Error::IncompatibleMesh(format!(
            "{} values for a {nx_f}x{ny_f} mesh",
            fine.len()
        )));
    }
    let (fx, fy) = (nx_f / nx_c, ny_f / ny_c);
    let scale = 1.0 / (fx * fy) as f64;
    let mut out = vec![0.0; nx_c * ny_c];
    for k in 0..ny_c {
        for j in 0..nx_c {
            let mut s = 0.0;
            for b in 0..fy {
                let row = (k * fy + b) * nx_f;
                s += fine[row + j * fx..row + (j + 1) * fx].iter().sum::<f64>();
            }
            out[k * nx_c + j] = s * scale;
        }
    }
    Ok(out)
}

/// Norm of `a - b` on a row-major mesh with cell volume `volume`. Cells whose
/// x-center lies outside `window` are skipped.
pub fn norm_of_difference(
    a: &[f64],
    b: &[f64],
    x_centers: &[f64],
    volume: f64,
    norm: Norm,
    window: Option<(f64, f64)>,
) -> f64 {
    let inside = |x: f64| window.is_none_or(|(lo, hi)| x >= lo && x <= hi);
    let diffs = a
        .iter()
        .zip(b)
        .zip(x_centers)
        .filter(|(_, &x)| inside(x))
        .map(|((p, q), _)| (p - q).abs());
    match norm {
        Norm::L1 => diffs.sum::<f64>() * volume,
        Norm::L2 => (diffs.map(|d| d * d).sum::<f64>() * volume).sqrt(),
        Norm::Linf => diffs.fold(0.0, f64::max),
    }
}

/// Density difference between two field files, restricting the finer one
/// onto the coarser mesh.
pub fn density_error(
    a: &FieldFile,
    b: &FieldFile,
    norm: Norm,
    window: Option<(f64, f64)>,
) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::IncompatibleMesh("1-D and 2-D files".into()));
    }
    let same = |p: (f64, f64), q: (f64, f64)| {
        (p.0 - q.0).abs() <= 1e-12 * (1.0 + p.0.abs())
            && (p.1 - q.1).abs() <= 1e-12 * (1.0 + p.1.abs())
    };
    if !same(a.x_bounds, b.x_bounds) || !same(a.y_bounds, b.y_bounds) {
        return Err(Error::IncompatibleMesh("different domains".into()));
    }
    let (coarse, fine) = if a.nx * a.ny <= b.nx * b.ny {
        (a, b)
    } else {
        (b, a)
    };
    let rho = |f: &FieldFile| {
        f.column("rho")
            .ok_or_else(|| Error::IncompatibleMesh("missing `rho` column".into()))
    };
    let restricted = restrict(&rho(fine)?, (fine.nx, fine.ny), (coarse.nx, coarse.ny))?;
    let x = coarse
        .column("x")
        .ok_or_else(|| Error::IncompatibleMesh("missing `x` column".into()))?;
    let volume = match coarse.dim {
        crate::state::Dimension::One => coarse.dx(),
        crate::state::Dimension::Two => coarse.dx() * coarse.dy(),
    };
    Ok(norm_of_difference(
        &rho(coarse)?,
        &restricted,
        &x,
        volume,
        norm,
        window,
    ))
}

/// Observed orders `log2(e_{2h} / e_h)` for errors on successively halved
/// meshes.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
