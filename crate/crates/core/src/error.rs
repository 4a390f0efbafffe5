use std::fmt;

/// Location of a cell in the padded grid. Ghost cells carry negative
/// indices or indices past the interior extent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellIndex {
    pub i: isize,
    pub k: isize,
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.k)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid state{}: rho={rho:e}, p={p:e}", fmt_cell(.cell))]
    InvalidState {
        cell: Option<CellIndex>,
        rho: f64,
        p: f64,
    },

    #[error("characteristic decomposition failed{}: rho={rho:e}, p={p:e}", fmt_cell(.cell))]
    Decomposition {
        cell: Option<CellIndex>,
        rho: f64,
        p: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("solver aborted at t={t:e} (step {step}): {reason}")]
    Aborted { t: f64, step: u64, reason: String },

    #[error("incompatible meshes: {0}")]
    IncompatibleMesh(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_cell(cell: &Option<CellIndex>) -> String {
    match cell {
        Some(c) => format!(" at cell {c}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid_parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Attaches a cell location to state errors that were raised by pure
    /// state functions without knowledge of the grid.
    pub fn at_cell(self, i: isize, k: isize) -> Self {
        let here = Some(CellIndex { i, k });
        match self {
            Error::InvalidState { cell: None, rho, p } => {
                Error::InvalidState { cell: here, rho, p }
            }
            Error::Decomposition { cell: None, rho, p } => {
                Error::Decomposition { cell: here, rho, p }
            }
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
