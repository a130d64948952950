//! Problem files, field and report exports, and the command-line front end.
//!
//! Problem files are TOML with a `version` tag. The domain is an axis-aligned
//! box sampled by a uniform grid; node tables are flat row-major arrays
//! (`y` outer, `x` inner) with a declared `shape = [ny, nx]`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cone::{calibrate_a, CalibrationResult};
use crate::error::{Error, Result};
use crate::geometry::{assemble_point, phase_f, sigma_for, validate_delta, OperatorParams};
use crate::grid::{fd_gradient, fd_hessian, Grid2D, GridField};
use crate::harness::{
    comparison_check, cone_suites, convergence_runs, manufactured_profile, ComparisonReport,
    ConvergenceStudy, ManufacturedProblem, RadialProfile, SuiteReport,
};
use crate::linearize::{linearization_suite, LinearizationReport};
use crate::solver::{
    continuity_solve_reporting, residual_field_unchecked, Problem, SolveReport, SolverConfig,
};

pub const PROBLEM_VERSION: &str = "lagcurv-problem/1";
pub const REPORT_VERSION: &str = "lagcurv-report/1";
pub const FIELD_HEADER: &str = "x,y,u,ux,uy,kappa1,kappa2,F,residual";

/// Band of acceptable observed convergence orders.
pub const ORDER_BAND: (f64, f64) = (1.7, 2.3);

/// A positive number or the keyword `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AutoRepr", into = "AutoRepr")]
pub enum AutoOr {
    Auto,
    Value(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AutoRepr {
    Number(f64),
    Keyword(String),
}

impl TryFrom<AutoRepr> for AutoOr {
    type Error = String;

    fn try_from(r: AutoRepr) -> std::result::Result<Self, String> {
        match r {
            AutoRepr::Number(v) => Ok(Self::Value(v)),
            AutoRepr::Keyword(k) if k == "auto" => Ok(Self::Auto),
            AutoRepr::Keyword(k) => Err(format!("expected a number or \"auto\", got \"{k}\"")),
        }
    }
}

impl From<AutoOr> for AutoRepr {
    fn from(a: AutoOr) -> Self {
        match a {
            AutoOr::Auto => Self::Keyword("auto".into()),
            AutoOr::Value(v) => Self::Number(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeTable {
    /// `[ny, nx]`.
    pub shape: [usize; 2],
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Quadratic,
    Exponential,
}

impl ProfileKind {
    pub fn with_c(self, c: f64) -> RadialProfile {
        match self {
            Self::Quadratic => RadialProfile::Quadratic { c },
            Self::Exponential => RadialProfile::Exponential { c },
        }
    }
}

fn default_profile() -> ProfileKind {
    ProfileKind::Quadratic
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum HSource {
    /// Radial manufactured solution centered at the origin.
    Manufactured {
        c: f64,
        #[serde(default = "default_profile")]
        profile: ProfileKind,
    },
    /// Right-hand side given node-wise.
    Table(NodeTable),
    /// Right-hand side computed from a given exact solution through the
    /// discrete curvature pipeline. Only one oracle backs such a problem.
    SolutionTable(NodeTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    /// Trace of the exact solution (manufactured or solution table).
    Manufactured,
    Constant {
        value: f64,
    },
    Table(NodeTable),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_newton: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub armijo_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub armijo_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_initial_increment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_shrink: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min_increment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safeguard_margin: Option<f64>,
}

impl SolverOverrides {
    pub fn apply(&self, base: &SolverConfig) -> SolverConfig {
        SolverConfig {
            tol_residual: self.tol_residual.unwrap_or(base.tol_residual),
            max_newton: self.max_newton.unwrap_or(base.max_newton),
            armijo_factor: self.armijo_factor.unwrap_or(base.armijo_factor),
            armijo_slope: self.armijo_slope.unwrap_or(base.armijo_slope),
            min_step: self.min_step.unwrap_or(base.min_step),
            t_initial_increment: self.t_initial_increment.unwrap_or(base.t_initial_increment),
            t_shrink: self.t_shrink.unwrap_or(base.t_shrink),
            t_min_increment: self.t_min_increment.unwrap_or(base.t_min_increment),
            safeguard_margin: self.safeguard_margin.unwrap_or(base.safeguard_margin),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub version: String,
    pub n: usize,
    pub delta: AutoOr,
    pub a_param: AutoOr,
    pub seed: u64,
    pub domain: DomainSpec,
    pub h: HSource,
    pub phi: FieldSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsolution: Option<FieldSource>,
    #[serde(default, skip_serializing_if = "is_default_overrides")]
    pub solver: SolverOverrides,
}

fn is_default_overrides(o: &SolverOverrides) -> bool {
    *o == SolverOverrides::default()
}

impl ProblemSpec {
    /// Radial manufactured problem on `[−1, 1]²` with `δ` and `A` automatic.
    pub fn manufactured(nodes: usize, c: f64, profile: ProfileKind, seed: u64) -> Self {
        Self {
            version: PROBLEM_VERSION.into(),
            n: 2,
            delta: AutoOr::Auto,
            a_param: AutoOr::Auto,
            seed,
            domain: DomainSpec {
                xmin: -1.0,
                xmax: 1.0,
                ymin: -1.0,
                ymax: 1.0,
                nx: nodes,
                ny: nodes,
            },
            h: HSource::Manufactured { c, profile },
            phi: FieldSource::Manufactured,
            subsolution: Some(FieldSource::Manufactured),
            solver: SolverOverrides::default(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(format!("cannot serialize problem: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks that do not need any field to be computed.
    pub fn validate(&self) -> Result<()> {
        if self.version != PROBLEM_VERSION {
            return Err(Error::Validation(format!(
                "version: unrecognized tag \"{}\", expected \"{PROBLEM_VERSION}\"",
                self.version
            )));
        }
        if self.n != 2 {
            return Err(Error::Validation(format!(
                "n: grid problems are two-dimensional, got {}",
                self.n
            )));
        }
        if let AutoOr::Value(d) = self.delta {
            validate_delta(d).map_err(|_| {
                Error::Validation(format!(
                    "delta: must lie in (0, π/2) for the cone properties to hold, got {d}"
                ))
            })?;
        }
        if let AutoOr::Value(a) = self.a_param {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Validation(format!(
                    "a_param: must be positive, got {a}"
                )));
            }
        }
        let d = &self.domain;
        Grid2D::new(d.xmin, d.xmax, d.ymin, d.ymax, d.nx, d.ny)
            .map_err(|e| Error::Validation(format!("domain: {e}")))?;
        let shape = [d.ny, d.nx];
        let check = |name: &str, t: &NodeTable| -> Result<()> {
            if t.shape != shape {
                return Err(Error::Validation(format!(
                    "{name}: table shape {:?} does not match grid [{}, {}]",
                    t.shape, d.ny, d.nx
                )));
            }
            if t.values.len() != d.nx * d.ny {
                return Err(Error::Validation(format!(
                    "{name}: table has {} values, shape needs {}",
                    t.values.len(),
                    d.nx * d.ny
                )));
            }
            if let Some(k) = t.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name}: non-finite value at index {k}"
                )));
            }
            Ok(())
        };
        match &self.h {
            HSource::Manufactured { c, .. } if !(*c > 0.0 && c.is_finite()) => {
                return Err(Error::Validation(format!("h.c: must be positive, got {c}")));
            }
            HSource::Table(t) => check("h", t)?,
            HSource::SolutionTable(t) => check("h", t)?,
            _ => {}
        }
        for (name, src) in [
            ("phi", Some(&self.phi)),
            ("subsolution", self.subsolution.as_ref()),
        ] {
            match src {
                Some(FieldSource::Table(t)) => check(name, t)?,
                Some(FieldSource::Manufactured) if matches!(self.h, HSource::Table(_)) => {
                    return Err(Error::Validation(format!(
                        "{name}: source \"manufactured\" needs h from a manufactured profile or solution table"
                    )));
                }
                Some(FieldSource::Constant { value }) if !value.is_finite() => {
                    return Err(Error::Validation(format!(
                        "{name}: constant must be finite"
                    )));
                }
                _ => {}
            }
        }
        let overrides = self.solver.apply(&SolverConfig::default());
        overrides
            .validate()
            .map_err(|e| Error::Validation(format!("solver: {e}")))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D> {
        let d = &self.domain;
        Grid2D::new(d.xmin, d.xmax, d.ymin, d.ymax, d.nx, d.ny)
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver.apply(&SolverConfig::default())
    }
}

/// Reads and validates a problem file.
pub fn parse_problem(path: &Path) -> Result<ProblemSpec> {
    let text = fs::read_to_string(path)?;
    ProblemSpec::from_toml(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// A problem with every field computed and parameters fixed.
#[derive(Clone, Debug)]
pub struct ResolvedProblem {
    pub problem: Problem,
    pub config: SolverConfig,
    /// Exact solution, when the problem file provides one.
    pub exact: Option<GridField>,
    pub manufactured: Option<ManufacturedProblem>,
    pub calibration: Option<CalibrationResult>,
    /// True when the right-hand side comes from the discrete pipeline only.
    pub single_oracle: bool,
}

fn table_field(grid: Grid2D, t: &NodeTable) -> Result<GridField> {
    GridField::from_values(grid, t.values.clone())
}

/// Right-hand side of a given solution through the discrete curvature
/// pipeline; boundary nodes copy their nearest interior neighbour.
fn h_from_solution(u: &GridField) -> Result<GridField> {
    let grid = u.grid;
    let mut h = GridField::zeros(grid);
    for (i, j) in grid.interior() {
        let g = fd_gradient(u, i, j)?;
        let geom = assemble_point(&g, &fd_hessian(u, i, j)?)?;
        h.set(i, j, phase_f(&geom.kappa));
    }
    for (i, j) in grid.nodes().filter(|&(i, j)| grid.is_boundary(i, j)) {
        let ci = i.clamp(1, grid.nx - 2);
        let cj = j.clamp(1, grid.ny - 2);
        h.set(i, j, h.at(ci, cj));
    }
    Ok(h)
}

pub fn resolve(spec: &ProblemSpec) -> Result<ResolvedProblem> {
    spec.validate()?;
    let grid = spec.grid()?;
    let config = spec.solver_config();
    let (h, exact, manufactured, single_oracle) = match &spec.h {
        HSource::Manufactured { c, profile } => {
            let m = manufactured_profile(grid, profile.with_c(*c))
                .map_err(|e| Error::Validation(format!("h: {e}")))?;
            (m.h_field.clone(), Some(m.u_star.clone()), Some(m), false)
        }
        HSource::Table(t) => (table_field(grid, t)?, None, None, false),
        HSource::SolutionTable(t) => {
            let u = table_field(grid, t)?;
            (h_from_solution(&u)?, Some(u), None, true)
        }
    };
    let floor = sigma_for(spec.n, 0.0);
    let delta = match spec.delta {
        AutoOr::Value(d) => d,
        AutoOr::Auto => {
            // A table minimum usually sits at an interior node, where the
            // exact solution would then have zero margin; keep half of it.
            let share = if manufactured.is_some() { 1.0 } else { 0.5 };
            let d = share
                * h.values
                    .iter()
                    .fold(f64::INFINITY, |m, &v| m.min(v - floor));
            validate_delta(d).map_err(|_| {
                Error::Validation(format!(
                    "delta: automatic margin {d} of h over (n−2)π/2 is not in (0, π/2)"
                ))
            })?;
            d
        }
    };
    let calibration = match spec.a_param {
        AutoOr::Auto => Some(calibrate_a(spec.n, delta, 1000, spec.seed)?),
        AutoOr::Value(_) => None,
    };
    let a_param = match spec.a_param {
        AutoOr::Value(a) => a,
        AutoOr::Auto => calibration.as_ref().map_or(1.0, |c| c.a_param),
    };
    let params = OperatorParams::new(spec.n, delta, a_param)
        .map_err(|e| Error::Validation(e.to_string()))?;
    let field = |name: &str, src: &FieldSource| -> Result<GridField> {
        match src {
            FieldSource::Manufactured => exact.clone().ok_or_else(|| {
                Error::Validation(format!("{name}: no exact solution to take the trace of"))
            }),
            FieldSource::Constant { value } => Ok(GridField::constant(grid, *value)),
            FieldSource::Table(t) => table_field(grid, t),
        }
    };
    let phi = field("phi", &spec.phi)?;
    let sub = spec
        .subsolution
        .as_ref()
        .map(|s| field("subsolution", s))
        .transpose()?;
    let problem = Problem::new(params, h, phi, sub).map_err(|e| match e {
        Error::Validation(m) => {
            Error::Validation(format!("h: {m} (required range [(n−2)π/2 + δ, nπ/2))"))
        }
        other => other,
    })?;
    Ok(ResolvedProblem {
        problem,
        config,
        exact,
        manufactured,
        calibration,
        single_oracle,
    })
}

/// One exported row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldRow {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub ux: f64,
    pub uy: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub f: f64,
    pub residual: f64,
}

/// Rows at interior nodes in row-major order, with curvature and residual
/// of the full equation.
pub fn field_rows(u: &GridField, problem: &Problem) -> Result<Vec<FieldRow>> {
    let residual = residual_field_unchecked(u, problem, 1.0)?;
    let grid = u.grid;
    grid.interior()
        .map(|(i, j)| {
            let g = fd_gradient(u, i, j)?;
            let geom = assemble_point(&g, &fd_hessian(u, i, j)?)?;
            Ok(FieldRow {
                x: grid.x(i),
                y: grid.y(j),
                u: u.at(i, j),
                ux: g[0],
                uy: g[1],
                kappa1: geom.kappa[0],
                kappa2: geom.kappa[1],
                f: geom.phase(),
                residual: residual.at(i, j),
            })
        })
        .collect()
}

pub fn fields_csv(u: &GridField, problem: &Problem) -> Result<String> {
    let rows = field_rows(u, problem)?;
    let mut out = String::with_capacity(rows.len() * 220);
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for r in rows {
        let vals = [
            r.x, r.y, r.u, r.ux, r.uy, r.kappa1, r.kappa2, r.f, r.residual,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field export"));
        }
        for (k, v) in vals.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn export_fields(u: &GridField, problem: &Problem, path: &Path) -> Result<()> {
    fs::write(path, fields_csv(u, problem)?)?;
    Ok(())
}

pub fn read_fields(text: &str) -> Result<Vec<FieldRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(FIELD_HEADER) {
        return Err(Error::Parse("field file: unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("field file line {}: {e}", k + 2)))?;
            if v.len() != 9 {
                return Err(Error::Parse(format!(
                    "field file line {}: expected 9 columns",
                    k + 2
                )));
            }
            Ok(FieldRow {
                x: v[0],
                y: v[1],
                u: v[2],
                ux: v[3],
                uy: v[4],
                kappa1: v[5],
                kappa2: v[6],
                f: v[7],
                residual: v[8],
            })
        })
        .collect()
}

/// Everything `solve` writes as its report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub version: String,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    pub delta: f64,
    pub a_param: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrated_max_quotient: Option<f64>,
    pub single_oracle: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_error_vs_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
    pub report: SolveReport,
}

pub fn to_report_text<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Parse(format!("cannot serialize report: {e}")))
}

/// Solves a resolved problem and collects the report.
pub fn solve_resolved(r: &ResolvedProblem) -> Result<(Option<GridField>, SolveOutput)> {
    let (result, report) = continuity_solve_reporting(&r.problem, &r.config);
    let u = match result {
        Ok(u) => Some(u),
        Err(e @ (Error::Validation(_) | Error::Dimension(_))) => return Err(e),
        Err(_) => None,
    };
    let comparison = u
        .as_ref()
        .map(|u| comparison_check(u, &r.problem.phi, r.problem.subsolution.as_ref()))
        .transpose()?;
    let out = SolveOutput {
        version: REPORT_VERSION.into(),
        accepted: report.accepted,
        failure_reason: report.failure_reason.clone(),
        delta: r.problem.params.delta,
        a_param: r.problem.params.a_param,
        calibrated_max_quotient: r.calibration.as_ref().map(|c| c.max_hess_eigenvalue),
        single_oracle: r.single_oracle,
        max_error_vs_exact: u.as_ref().zip(r.exact.as_ref()).map(|(u, e)| u.max_diff(e)),
        comparison,
        report,
    };
    Ok((u, out))
}

#[derive(Parser, Debug)]
#[command(
    name = "lagcurv",
    version,
    about = "Special Lagrangian curvature potential solver and checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a problem file; writes the report to stdout and fields to --out.
    Solve {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Mass-test the cone properties, convexity and concavity calibration.
    VerifyCone {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1])]
        delta: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest exponent A making the transformed operator concave on samples.
    #[command(name = "calibrate-A", alias = "calibrate-a")]
    CalibrateA {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytic and finite-difference derivatives of the operator.
    CheckLinearization {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Number of random admissible points.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the radial manufactured problem on a sequence of grids.
    ConvergenceStudy {
        #[arg(long, value_delimiter = ',', default_values_t = vec![17, 33, 65])]
        grids: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_enum, default_value_t = ProfileKind::Quadratic)]
        profile: ProfileKind,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve and check the sandwich against the harmonic extension and subsolution.
    ComparePrinciple {
        problem: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Outcome of a command before it is turned into an exit code.
enum Outcome {
    Pass,
    Fail(String),
}

#[derive(Serialize)]
struct CalibrationOutput {
    version: String,
    n: usize,
    delta: f64,
    a_param: f64,
    samples_tested: usize,
    max_quotient: f64,
}

#[derive(Serialize)]
struct LinearizationOutput {
    version: String,
    n: usize,
    delta: f64,
    a_param: f64,
    #[serde(flatten)]
    report: LinearizationReport,
}

#[derive(Serialize)]
struct StudyOutput {
    version: String,
    #[serde(flatten)]
    study: ConvergenceStudy,
}

#[derive(Serialize)]
struct SuiteOutput {
    version: String,
    #[serde(flatten)]
    suite: SuiteReport,
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut String) -> Result<()> {
    if let Some(p) = out {
        fs::write(p, text)?;
    }
    stdout.push_str(text);
    Ok(())
}

fn load(problem: &Path, seed: Option<u64>, tol: Option<f64>) -> Result<ResolvedProblem> {
    let mut spec = parse_problem(problem)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(t) = tol {
        spec.solver.tol_residual = Some(t);
    }
    resolve(&spec)
}

fn execute(cmd: Command, stdout: &mut String) -> Result<Outcome> {
    match cmd {
        Command::Solve {
            problem,
            out,
            report,
            seed,
            tol,
        } => {
            let r = load(&problem, seed, tol)?;
            let (u, output) = solve_resolved(&r)?;
            emit(&to_report_text(&output)?, report.as_deref(), stdout)?;
            match u {
                Some(u) => {
                    if let Some(p) = out {
                        export_fields(&u, &r.problem, &p)?;
                    }
                    Ok(Outcome::Pass)
                }
                None => Ok(Outcome::Fail(output.failure_reason.unwrap_or_default())),
            }
        }
        Command::VerifyCone {
            n,
            delta,
            samples,
            seed,
            out,
        } => {
            let suite = cone_suites(n, &delta, samples, seed)?;
            let pass = suite.passed();
            emit(
                &to_report_text(&SuiteOutput {
                    version: REPORT_VERSION.into(),
                    suite,
                })?,
                out.as_deref(),
                stdout,
            )?;
            Ok(if pass {
                Outcome::Pass
            } else {
                Outcome::Fail("cone property violations found".into())
            })
        }
        Command::CalibrateA {
            n,
            delta,
            samples,
            seed,
            out,
        } => {
            validate_delta(delta)?;
            match calibrate_a(n, delta, samples, seed) {
                Ok(c) => {
                    let text = to_report_text(&CalibrationOutput {
                        version: REPORT_VERSION.into(),
                        n,
                        delta,
                        a_param: c.a_param,
                        samples_tested: c.samples_tested,
                        max_quotient: c.max_hess_eigenvalue,
                    })?;
                    emit(&text, out.as_deref(), stdout)?;
                    Ok(Outcome::Pass)
                }
                Err(e @ Error::CalibrationFailed { .. }) => Ok(Outcome::Fail(e.to_string())),
                Err(e) => Err(e),
            }
        }
        Command::CheckLinearization {
            n,
            delta,
            samples,
            a,
            seed,
            out,
        } => {
            let params = OperatorParams::new(n, delta, a)?;
            let report = linearization_suite(&params, samples, 10, seed)?;
            let pass = report.worst_fd_error <= 1e-5 && report.worst_trace_error <= 1e-10;
            emit(
                &to_report_text(&LinearizationOutput {
                    version: REPORT_VERSION.into(),
                    n,
                    delta,
                    a_param: a,
                    report,
                })?,
                out.as_deref(),
                stdout,
            )?;
            Ok(if pass {
                Outcome::Pass
            } else {
                Outcome::Fail("linearization error above tolerance".into())
            })
        }
        Command::ConvergenceStudy {
            grids,
            c,
            profile,
            delta,
            a,
            tol,
            seed,
            out,
        } => {
            let mut config = SolverConfig::default();
            if let Some(t) = tol {
                config.tol_residual = t;
            }
            config.validate()?;
            let study = match convergence_runs(profile.with_c(c), &grids, &config, delta, a, seed) {
                Ok((s, _)) => s,
                Err(
                    e @ (Error::HomotopyStalled { .. }
                    | Error::NotConverged { .. }
                    | Error::LineSearchFailed { .. }),
                ) => return Ok(Outcome::Fail(e.to_string())),
                Err(e) => return Err(e),
            };
            let in_band = study
                .orders
                .iter()
                .all(|p| (ORDER_BAND.0..=ORDER_BAND.1).contains(p));
            let decreasing = study
                .rows
                .windows(2)
                .all(|w| w[1].max_error < w[0].max_error);
            emit(
                &to_report_text(&StudyOutput {
                    version: REPORT_VERSION.into(),
                    study,
                })?,
                out.as_deref(),
                stdout,
            )?;
            Ok(if in_band && decreasing {
                Outcome::Pass
            } else {
                Outcome::Fail(format!(
                    "observed orders outside [{}, {}] or errors not decreasing",
                    ORDER_BAND.0, ORDER_BAND.1
                ))
            })
        }
        Command::ComparePrinciple {
            problem,
            seed,
            tol,
            out,
        } => {
            let r = load(&problem, seed, tol)?;
            let (u, output) = solve_resolved(&r)?;
            emit(&to_report_text(&output)?, out.as_deref(), stdout)?;
            Ok(match (u, output.comparison) {
                (Some(_), Some(c)) if c.passed() => Outcome::Pass,
                (Some(_), _) => Outcome::Fail("comparison sandwich violated".into()),
                (None, _) => Outcome::Fail(output.failure_reason.unwrap_or_default()),
            })
        }
    }
}

/// Runs the command line; returns the process exit code. Output goes to
/// `stdout`, diagnostics to `stderr`.
pub fn run_cli_with<I, T>(
    argv: I,
    stdout: &mut impl std::io::Write,
    stderr: &mut impl std::io::Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let mut text = String::new();
    let outcome = execute(cli.command, &mut text);
    let _ = stdout.write_all(text.as_bytes());
    match outcome {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail(why)) => {
            let _ = writeln!(stderr, "check failed: {why}");
            1
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_cli_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
