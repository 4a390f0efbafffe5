//! Plain-text output files.
//!
//! Field files are comma-separated with `#`-prefixed `key = value` header
//! lines followed by one column-name line. Floats use Rust's shortest
//! round-trip exponent form, so reading a file back gives identical values.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::indicator::IndicatorField;
use crate::integrate::StepStats;
use crate::state::{cons_to_prim, Dimension, GasModel};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const COLUMNS_1D: [&str; 7] = ["x", "rho", "u", "p", "E", "tau", "Ebar"];
pub const COLUMNS_2D: [&str; 9] = ["x", "y", "rho", "u", "v", "p", "E", "tau", "Ebar"];

/// Run description written into every field file header.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMeta {
    pub problem: String,
    pub t: f64,
    pub scheme: String,
    pub c: f64,
    pub gamma: f64,
    pub flux: String,
}

fn mesh_string(grid: &Grid) -> String {
    match grid.dim() {
        Dimension::One => grid.nx().to_string(),
        Dimension::Two => format!("{}x{}", grid.nx(), grid.ny()),
    }
}

fn domain_string(grid: &Grid) -> String {
    let (x0, x1) = grid.x_bounds();
    match grid.dim() {
        Dimension::One => format!("{x0:e},{x1:e}"),
        Dimension::Two => {
            let (y0, y1) = grid.y_bounds();
            format!("{x0:e},{x1:e},{y0:e},{y1:e}")
        }
    }
}

fn header(out: &mut String, meta: &FieldMeta, grid: &Grid) {
    let lines = [
        ("problem", meta.problem.clone()),
        ("t", format!("{:e}", meta.t)),
        ("mesh", mesh_string(grid)),
        ("domain", domain_string(grid)),
        ("scheme", meta.scheme.clone()),
        ("C", format!("{:e}", meta.c)),
        ("gamma", format!("{:e}", meta.gamma)),
        ("flux", meta.flux.clone()),
        ("version", VERSION.to_string()),
    ];
    for (k, v) in lines {
        let _ = writeln!(out, "# {k} = {v}");
    }
}

/// Renders a field file. `indicator` supplies the `tau` and `Ebar` columns.
pub fn format_field(
    meta: &FieldMeta,
    field: &Field,
    indicator: &IndicatorField,
    gas: &GasModel,
) -> Result<String> {
    let grid = field.grid();
    if !grid.same_mesh(indicator.grid()) {
        return Err(Error::IncompatibleMesh(
            "indicator and field grids differ".into(),
        ));
    }
    let mut out = String::with_capacity(grid.interior_cells() * 120);
    header(&mut out, meta, grid);
    let two_d = grid.dim() == Dimension::Two;
    out.push_str(&if two_d {
        COLUMNS_2D.join(",")
    } else {
        COLUMNS_1D.join(",")
    });
    out.push('\n');
    for ((i, k, u), (_, _, _, e_bar, tau)) in field.interior().zip(indicator.interior()) {
        let w = cons_to_prim(&u, gas).map_err(|e| e.at_cell(i, k))?;
        let x = grid.x_center(i);
        if two_d {
            let y = grid.y_center(k);
            let _ = writeln!(
                out,
                "{x:e},{y:e},{:e},{:e},{:e},{:e},{:e},{tau:e},{e_bar:e}",
                w.rho, w.u, w.v, w.p, u.energy
            );
        } else {
            let _ = writeln!(
                out,
                "{x:e},{:e},{:e},{:e},{:e},{tau:e},{e_bar:e}",
                w.rho, w.u, w.p, u.energy
            );
        }
    }
    Ok(out)
}

pub fn write_field(
    path: &Path,
    meta: &FieldMeta,
    field: &Field,
    indicator: &IndicatorField,
    gas: &GasModel,
) -> Result<()> {
    let text = format_field(meta, field, indicator, gas)?;
    fs::write(path, text)?;
    Ok(())
}

/// A parsed field or indicator file.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    /// Row-major values, `rows.len() == nx * ny`.
    pub rows: Vec<Vec<f64>>,
    pub dim: Dimension,
    pub nx: usize,
    pub ny: usize,
    pub x_bounds: (f64, f64),
    pub y_bounds: (f64, f64),
}

impl FieldFile {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    pub fn time(&self) -> Option<f64> {
        self.meta("t")?.parse().ok()
    }

    pub fn dx(&self) -> f64 {
        (self.x_bounds.1 - self.x_bounds.0) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_bounds.1 - self.y_bounds.0) / self.ny as f64
    }
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    let text = fs::read_to_string(path)?;
    parse_field(&text, &path.display().to_string())
}

/// Parses a field file. Rejects rows whose column count differs from the
/// header and row counts that disagree with the declared mesh.
pub fn parse_field(text: &str, origin: &str) -> Result<FieldFile> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut meta = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| err(lineno, "header line without `=`".into()))?;
            meta.push((k.trim().to_string(), v.trim().to_string()));
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(|c| c.trim().to_string()).collect()),
            Some(cols) => {
                let row: Vec<f64> = line
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| err(lineno, format!("bad number `{v}`: {e}")))
                    })
                    .collect::<Result<_>>()?;
                if row.len() != cols.len() {
                    return Err(err(
                        lineno,
                        format!("{} values for {} columns", row.len(), cols.len()),
                    ));
                }
                rows.push(row);
            }
        }
    }
    let columns = columns.ok_or_else(|| err(0, "missing column header".into()))?;
    let get = |key: &str| {
        meta.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v): &(String, String)| v.clone())
    };
    let mesh = get("mesh").ok_or_else(|| err(0, "missing `mesh` header".into()))?;
    let domain = get("domain").ok_or_else(|| err(0, "missing `domain` header".into()))?;
    let dims: Vec<usize> = mesh
        .split('x')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| err(0, format!("bad mesh `{mesh}`")))
        })
        .collect::<Result<_>>()?;
    let bounds: Vec<f64> = domain
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| err(0, format!("bad domain `{domain}`")))
        })
        .collect::<Result<_>>()?;
    let (dim, nx, ny, x_bounds, y_bounds) = match (dims.as_slice(), bounds.as_slice()) {
        ([nx], [x0, x1]) => (Dimension::One, *nx, 1, (*x0, *x1), (0.0, 1.0)),
        ([nx, ny], [x0, x1, y0, y1]) => (Dimension::Two, *nx, *ny, (*x0, *x1), (*y0, *y1)),
        _ => {
            return Err(err(
                0,
                format!("mesh `{mesh}` and domain `{domain}` disagree"),
            ))
        }
    };
    if rows.len() != nx * ny {
        return Err(err(
            0,
            format!("{} data rows for a {mesh} mesh", rows.len()),
        ));
    }
    Ok(FieldFile {
        meta,
        columns,
        rows,
        dim,
        nx,
        ny,
        x_bounds,
        y_bounds,
    })
}

/// `ln(Ē)` per cell, for tuning the adaption constant. Columns
/// `x[,y],Ebar,lnEbar`.
pub fn format_indicator_dump(meta: &FieldMeta, indicator: &IndicatorField) -> String {
    let grid = indicator.grid();
    let mut out = String::new();
    header(&mut out, meta, grid);
    let _ = writeln!(out, "# lnC = {:e}", meta.c.ln());
    let two_d = grid.dim() == Dimension::Two;
    out.push_str(if two_d {
        "x,y,Ebar,lnEbar\n"
    } else {
        "x,Ebar,lnEbar\n"
    });
    for (i, k, _, e_bar, _) in indicator.interior() {
        let x = grid.x_center(i);
        if two_d {
            let _ = writeln!(
                out,
                "{x:e},{:e},{e_bar:e},{:e}",
                grid.y_center(k),
                e_bar.ln()
            );
        } else {
            let _ = writeln!(out, "{x:e},{e_bar:e},{:e}", e_bar.ln());
        }
    }
    out
}

/// Flat `key = value` lines.
pub fn write_metadata(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    parse_metadata(&text, &path.display().to_string())
}

pub fn parse_metadata(text: &str, origin: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.to_string(),
            line: n + 1,
            message: "expected `key = value`".into(),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// One `step=.. t=.. dt=.. fallbacks=..` line per step.
pub fn write_steps(path: &Path, steps: &[StepStats]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for s in steps {
        writeln!(w, "{s}")?;
    }
    w.flush()?;
    Ok(())
}
