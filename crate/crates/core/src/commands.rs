//! Library side of the command-line front end: configuration resolution and
//! the `run`, `reference`, `error` and `convergence` commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::compare::{density_error, norm_of_difference, observed_orders, restrict, Norm};
use crate::error::{Error, Result};
use crate::flux::FluxKind;
use crate::indicator::{evaluate_indicator, Strategy};
use crate::integrate::{SchemeConfig, Solver, TauRefresh};
use crate::io::{self, FieldMeta};
use crate::problems::{all_problems, problem, Initialization, ProblemSpec};
use crate::reconstruct::ReconstructionMode;
use crate::state::Dimension;

/// Partially specified run settings. Each source (command line, config
/// file) yields one of these; [`RunConfig::resolve`] layers them over the
/// catalog defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOverrides {
    pub problem: Option<String>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub strategy: Option<Strategy>,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub theta: Option<f64>,
    pub cfl: Option<f64>,
    pub flux: Option<FluxKind>,
    pub tau_refresh: Option<TauRefresh>,
    pub first_order: Option<bool>,
    pub init: Option<Initialization>,
    pub t_end: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub dump_indicator: Option<bool>,
    pub out_dir: Option<PathBuf>,
}

/// Keys written to the metadata file that carry results rather than
/// settings; they are accepted and ignored when the file is used as a
/// config.
const RESULT_KEYS: [&str; 11] = [
    "status",
    "steps",
    "fallbacks",
    "fallback_cell_steps",
    "t_final",
    "wall_time_s",
    "error",
    "version",
    "gamma",
    "dim",
    "kind",
];

fn parse_value<T: std::str::FromStr>(key: &'static str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::invalid_parameter(key, format!("cannot parse `{v}`")))
}

fn parse_bool(key: &'static str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::invalid_parameter(
            key,
            format!("expected true | false, got `{v}`"),
        )),
    }
}

/// Comma-separated times; an empty string is the empty list.
pub fn parse_times(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value("snapshots", s))
        .collect()
}

impl RunOverrides {
    /// From `key = value` pairs as produced by a metadata file.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut o = RunOverrides::default();
        for (k, v) in pairs {
            let v = v.as_str();
            match k.as_str() {
                "problem" => o.problem = Some(v.to_string()),
                "nx" => o.nx = Some(parse_value("nx", v)?),
                "ny" => o.ny = Some(parse_value("ny", v)?),
                "scheme" => o.strategy = Some(v.parse()?),
                "C" => o.c = Some(parse_value("C", v)?),
                "epsilon" => o.epsilon = Some(parse_value("epsilon", v)?),
                "theta" => o.theta = Some(parse_value("theta", v)?),
                "cfl" => o.cfl = Some(parse_value("cfl", v)?),
                "flux" => o.flux = Some(v.parse()?),
                "tau_refresh" => o.tau_refresh = Some(v.parse()?),
                "first_order" => o.first_order = Some(parse_bool("first_order", v)?),
                "init" => o.init = Some(v.parse()?),
                "t_end" => o.t_end = Some(parse_value("t_end", v)?),
                "snapshots" => o.snapshots = Some(parse_times(v)?),
                "dump_indicator" => o.dump_indicator = Some(parse_bool("dump_indicator", v)?),
                "out_dir" => o.out_dir = Some(PathBuf::from(v)),
                other if RESULT_KEYS.contains(&other) => {}
                other => {
                    return Err(Error::invalid_parameter(
                        "config",
                        format!("unknown key `{other}`"),
                    ))
                }
            }
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_pairs(&io::read_metadata(path)?)
    }

    /// Fields set in `self` win over those in `lower`.
    pub fn or(self, lower: RunOverrides) -> RunOverrides {
        RunOverrides {
            problem: self.problem.or(lower.problem),
            nx: self.nx.or(lower.nx),
            ny: self.ny.or(lower.ny),
            strategy: self.strategy.or(lower.strategy),
            c: self.c.or(lower.c),
            epsilon: self.epsilon.or(lower.epsilon),
            theta: self.theta.or(lower.theta),
            cfl: self.cfl.or(lower.cfl),
            flux: self.flux.or(lower.flux),
            tau_refresh: self.tau_refresh.or(lower.tau_refresh),
            first_order: self.first_order.or(lower.first_order),
            init: self.init.or(lower.init),
            t_end: self.t_end.or(lower.t_end),
            snapshots: self.snapshots.or(lower.snapshots),
            dump_indicator: self.dump_indicator.or(lower.dump_indicator),
            out_dir: self.out_dir.or(lower.out_dir),
        }
    }
}

/// Fully resolved run settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub mesh: (usize, usize),
    pub scheme: SchemeConfig,
    pub init: Initialization,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub dump_indicator: bool,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Layers `overrides` over the catalog defaults of the chosen problem.
    pub fn resolve(overrides: RunOverrides) -> Result<Self> {
        let id = overrides
            .problem
            .ok_or_else(|| Error::invalid_parameter("problem", "no problem given"))?;
        let spec = problem(&id)?;
        let strategy = overrides.strategy.unwrap_or(Strategy::New);
        let mut scheme = spec.scheme(strategy)?;
        if let Some(c) = overrides.c {
            scheme.indicator.c = c;
        }
        if let Some(e) = overrides.epsilon {
            scheme.indicator.epsilon = e;
        }
        if let Some(t) = overrides.theta {
            scheme.theta = t;
        }
        if let Some(c) = overrides.cfl {
            scheme.cfl = c;
        }
        if let Some(f) = overrides.flux {
            scheme.flux = f;
        }
        if let Some(t) = overrides.tau_refresh {
            scheme.tau_refresh = t;
        }
        if overrides.first_order == Some(true) {
            scheme.reconstruction = ReconstructionMode::FirstOrder;
        }
        scheme.validate()?;
        let nx = overrides.nx.unwrap_or(spec.mesh.0);
        let ny = match spec.dim {
            Dimension::One => 1,
            Dimension::Two => overrides.ny.unwrap_or(if overrides.nx.is_some() {
                // Keep the default aspect ratio when only nx is given.
                (nx * spec.mesh.1).div_ceil(spec.mesh.0)
            } else {
                spec.mesh.1
            }),
        };
        spec.grid(Some((nx, ny)))?;
        let t_end = overrides.t_end.unwrap_or(spec.t_end);
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::invalid_parameter(
                "t_end",
                format!("must be positive, got {t_end}"),
            ));
        }
        let snapshots = overrides.snapshots.unwrap_or_else(|| {
            spec.snapshots
                .iter()
                .copied()
                .filter(|&t| t < t_end)
                .collect()
        });
        if let Some(bad) = snapshots.iter().find(|&&t| !(t > 0.0 && t <= t_end)) {
            return Err(Error::invalid_parameter(
                "snapshots",
                format!("{bad} outside (0, t_end]"),
            ));
        }
        Ok(Self {
            problem: spec,
            mesh: (nx, ny),
            scheme,
            init: overrides.init.unwrap_or_default(),
            t_end,
            snapshots,
            dump_indicator: overrides.dump_indicator.unwrap_or(false),
            out_dir: overrides.out_dir.unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    /// The effective settings as `key = value` pairs; reading them back with
    /// [`RunOverrides::from_pairs`] reproduces this config.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let s = &self.scheme;
        let times: Vec<String> = self.snapshots.iter().map(|t| format!("{t:e}")).collect();
        let mut out = vec![
            ("problem", self.problem.id.to_string()),
            (
                "dim",
                if self.problem.dim == Dimension::One {
                    "1"
                } else {
                    "2"
                }
                .to_string(),
            ),
            ("nx", self.mesh.0.to_string()),
            ("ny", self.mesh.1.to_string()),
            ("scheme", s.indicator.strategy.to_string()),
            ("C", format!("{:e}", s.indicator.c)),
            ("epsilon", format!("{:e}", s.indicator.epsilon)),
            ("theta", format!("{:e}", s.theta)),
            ("cfl", format!("{:e}", s.cfl)),
            ("gamma", format!("{:e}", s.gas.gamma())),
            ("flux", s.flux.to_string()),
            ("tau_refresh", s.tau_refresh.to_string()),
            (
                "first_order",
                (s.reconstruction == ReconstructionMode::FirstOrder).to_string(),
            ),
            ("init", self.init.to_string()),
            ("t_end", format!("{:e}", self.t_end)),
            ("snapshots", times.join(",")),
            ("dump_indicator", self.dump_indicator.to_string()),
        ];
        out.push(("version", io::VERSION.to_string()));
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    fn field_meta(&self, t: f64) -> FieldMeta {
        FieldMeta {
            problem: self.problem.id.to_string(),
            t,
            scheme: self.scheme.indicator.strategy.to_string(),
            c: self.scheme.indicator.c,
            gamma: self.scheme.gas.gamma(),
            flux: self.scheme.flux.to_string(),
        }
    }

    pub fn build_solver(&self) -> Result<Solver> {
        self.problem.solver(Some(self.mesh), self.scheme, self.init)
    }
}

/// Files written by a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutputs {
    pub fields: Vec<PathBuf>,
    pub indicator: Option<PathBuf>,
    pub metadata: PathBuf,
    pub steps: PathBuf,
}

/// File name of a snapshot, e.g. `field_t1.95.csv`.
pub fn snapshot_name(prefix: &str, t: f64) -> String {
    format!("{prefix}_t{t}.csv")
}

/// Runs a configuration, writing snapshots, metadata and the step log into
/// `config.out_dir`. On a solver abort the partial outputs stay on disk and
/// the metadata status is `ABORTED`.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutputs> {
    execute(config, "field")
}

/// Fine-mesh run with the fixed dissipative limiter (`tau = 0.5`).
/// `nx` defaults to the problem's reference mesh, or ten times its default.
pub fn cmd_reference(config: &RunConfig, nx: Option<usize>) -> Result<RunOutputs> {
    let spec = &config.problem;
    let mut cfg = config.clone();
    let nx = nx.or(spec.reference_nx).unwrap_or(10 * spec.mesh.0);
    cfg.mesh = match spec.dim {
        Dimension::One => (nx, 1),
        Dimension::Two => (nx, nx * spec.mesh.1 / spec.mesh.0),
    };
    cfg.scheme.indicator.strategy = Strategy::Fixed(0.5);
    cfg.dump_indicator = false;
    execute(&cfg, "reference")
}

fn execute(config: &RunConfig, prefix: &str) -> Result<RunOutputs> {
    fs::create_dir_all(&config.out_dir)?;
    let dir = &config.out_dir;
    let mut outputs = RunOutputs {
        metadata: dir.join(format!("{prefix}.meta")),
        steps: dir.join(format!("{prefix}_steps.log")),
        ..Default::default()
    };
    let started = Instant::now();
    let mut solver = config.build_solver()?;
    log::info!(
        "{} {}: mesh {}x{}, scheme {}, C {:e}, t_end {}",
        prefix,
        config.problem.id,
        config.mesh.0,
        config.mesh.1,
        config.scheme.indicator.strategy,
        config.scheme.indicator.c,
        config.t_end
    );
    let result = solver.run_to(
        config.t_end,
        &config.snapshots,
        |s| log::debug!("{s}"),
        |s| {
            let t = s.time();
            let indicator = evaluate_indicator(s.field(), &s.config().indicator);
            let path = dir.join(snapshot_name(prefix, t));
            io::write_field(
                &path,
                &config.field_meta(t),
                s.field(),
                &indicator,
                &s.config().gas,
            )?;
            outputs.fields.push(path);
            if config.dump_indicator && t == config.t_end {
                let path = dir.join(format!("indicator_t{t}.csv"));
                fs::write(
                    &path,
                    io::format_indicator_dump(&config.field_meta(t), &indicator),
                )?;
                outputs.indicator = Some(path);
            }
            Ok(())
        },
    );

    let mut meta = config.to_pairs();
    meta.insert(0, ("kind".into(), prefix.into()));
    let status = if result.is_ok() {
        "COMPLETED"
    } else {
        "ABORTED"
    };
    meta.push(("status".into(), status.into()));
    meta.push(("steps".into(), solver.steps().to_string()));
    meta.push(("fallbacks".into(), solver.total_fallbacks().to_string()));
    meta.push((
        "fallback_cell_steps".into(),
        solver.total_fallback_cell_steps().to_string(),
    ));
    meta.push(("t_final".into(), format!("{:e}", solver.time())));
    meta.push((
        "wall_time_s".into(),
        format!("{:.3}", started.elapsed().as_secs_f64()),
    ));
    if let Err(e) = &result {
        meta.push(("error".into(), e.to_string()));
    }
    io::write_metadata(&outputs.metadata, &meta)?;
    io::write_steps(&outputs.steps, solver.history())?;
    result?;
    log::info!(
        "{} steps, {} fallbacks, {:.2} s",
        solver.steps(),
        solver.total_fallbacks(),
        started.elapsed().as_secs_f64()
    );
    Ok(outputs)
}

/// Density difference between two field files.
pub fn cmd_error(a: &Path, b: &Path, norm: Norm, window: Option<(f64, f64)>) -> Result<f64> {
    let fa = io::read_field(a)?;
    let fb = io::read_field(b)?;
    density_error(&fa, &fb, norm, window)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub error: f64,
    /// Against the next coarser mesh; `None` for the first row.
    pub order: Option<f64>,
}

/// Runs `config` on each mesh (1-D problems only) and reports density errors
/// and observed orders. Errors are taken against the exact solution where
/// the problem has one, otherwise against the finest mesh.
pub fn cmd_convergence(
    config: &RunConfig,
    meshes: &[usize],
    norm: Norm,
) -> Result<Vec<ConvergenceRow>> {
    let spec = &config.problem;
    if spec.dim != Dimension::One {
        return Err(Error::invalid_parameter(
            "problem",
            "convergence studies are 1-D only",
        ));
    }
    let mut meshes = meshes.to_vec();
    meshes.sort_unstable();
    let n_given = meshes.len();
    meshes.dedup();
    if meshes.len() != n_given {
        return Err(Error::invalid_parameter(
            "meshes",
            "mesh sizes must be distinct",
        ));
    }
    if meshes.len() < 3 {
        return Err(Error::invalid_parameter(
            "meshes",
            "need at least three meshes",
        ));
    }
    let mut runs = Vec::with_capacity(meshes.len());
    for &nx in &meshes {
        let mut cfg = config.clone();
        cfg.mesh = (nx, 1);
        let mut solver = cfg.build_solver()?;
        solver.advance_to(cfg.t_end, |_| {})?;
        let rho: Vec<f64> = solver.field().interior().map(|(_, _, u)| u.rho).collect();
        runs.push((solver.field().grid().to_owned(), rho));
    }
    let errors: Vec<f64> = match spec.exact {
        Some(_) => runs
            .iter()
            .map(|(grid, rho)| {
                let exact = spec
                    .exact_density(grid, config.t_end)
                    .expect("exact solution present");
                let x: Vec<f64> = (0..grid.nx() as isize).map(|i| grid.x_center(i)).collect();
                norm_of_difference(rho, &exact, &x, grid.dx(), norm, None)
            })
            .collect(),
        None => {
            let (fine_grid, fine) = runs.pop().expect("at least three runs");
            meshes.pop();
            runs.iter()
                .map(|(grid, rho)| {
                    let r = restrict(&fine, (fine_grid.nx(), 1), (grid.nx(), 1))?;
                    let x: Vec<f64> = (0..grid.nx() as isize).map(|i| grid.x_center(i)).collect();
                    Ok(norm_of_difference(rho, &r, &x, grid.dx(), norm, None))
                })
                .collect::<Result<_>>()?
        }
    };
    let orders = observed_orders(&errors);
    Ok(meshes
        .iter()
        .zip(&errors)
        .enumerate()
        .map(|(n, (&nx, &error))| {
            // Orders assume successive meshes differ by a factor of two; for
            // other ratios rescale by log2 of the actual ratio.
            let order = (n > 0).then(|| orders[n - 1] / (nx as f64 / meshes[n - 1] as f64).log2());
            ConvergenceRow { nx, error, order }
        })
        .collect())
}

/// One line per catalog entry.
pub fn list_problems() -> Vec<String> {
    all_problems()
        .map(|p| {
            let mesh = match p.dim {
                Dimension::One => format!("{}", p.mesh.0),
                Dimension::Two => format!("{}x{}", p.mesh.0, p.mesh.1),
            };
            format!(
                "{:<9} {:<44} mesh {:<9} t_end {:<5} gamma {:.4} C_old {} C_new {}",
                p.id, p.title, mesh, p.t_end, p.gamma, p.c_old, p.c_new
            )
        })
        .collect()
}
