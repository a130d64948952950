use thiserror::Error;

use crate::grid::GridField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(
        "arrow matrix not in the asymptotic regime: a = {a} but 2·max(|d|, |offdiag|) = {bound}"
    )]
    DegenerateArrow { a: f64, bound: f64 },

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("phase value {h} outside [{lower}, {upper})")]
    PhaseOutOfRange { h: f64, lower: f64, upper: f64 },

    #[error("curvatures must be sorted in descending order")]
    NotSorted,

    #[error("admissible sampler stalled: {accepted} accepted out of {draws} draws")]
    SamplerStalled { accepted: usize, draws: usize },

    #[error("perturbed matrix left the admissible cone (margin {margin:e})")]
    LeftCone { margin: f64 },

    #[error("concavity calibration failed: A = {a_max} still gives quotient {quotient:e}")]
    CalibrationFailed { a_max: f64, quotient: f64 },

    #[error("point too close to the cone boundary (margin {margin:e})")]
    ConeBoundary { margin: f64 },

    #[error("node ({i}, {j}) is not an interior node")]
    BoundaryNode { i: usize, j: usize },

    #[error("iterate inadmissible at {} node(s), first at {:?}", nodes.len(), nodes.first())]
    InadmissibleIterate { nodes: Vec<(usize, usize)> },

    #[error("line search failed: step {alpha:e} below minimum")]
    LineSearchFailed { alpha: f64 },

    #[error("Newton iteration did not converge at t = {t} (best residual {residual:e})")]
    NotConverged {
        t: f64,
        residual: f64,
        best: Box<GridField>,
    },

    #[error("homotopy stalled at t = {t} (increment {increment:e} below floor)")]
    HomotopyStalled { t: f64, increment: f64 },

    #[error("manufactured margin {margin} does not exceed {floor}")]
    MarginTooSmall { margin: f64, floor: f64 },

    #[error("discrete maximum principle violated: {0}")]
    MaximumPrinciple(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
