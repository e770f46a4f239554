use thiserror::Error;

pub type Result<T> = std::result::Result<T, GofError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GofError {
    /// No windowed estimation point strictly on one side of `x` and none at `x`.
    #[error("no estimation point within the bandwidth on the {side} of x = {x} (missing buffer observations?)")]
    EmptySide { x: f64, side: &'static str },

    #[error("no estimation point within bandwidth {h} of x = {x}")]
    EmptyWindow { x: f64, h: f64 },

    #[error("at abscissa {x}: {source}")]
    AtAbscissa {
        x: f64,
        #[source]
        source: Box<GofError>,
    },

    #[error("top residual order statistics coincide (k = {k}); tail scale cannot be estimated")]
    ZeroDenominator { k: usize },

    #[error("tail depth k = {k} must satisfy 1 <= k < {m}")]
    BadK { k: usize, m: usize },

    #[error("design abscissae have zero spread")]
    DegenerateDesign,

    #[error("design is empty")]
    EmptyDesign,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<GofError>,
    },

    #[error("at least {min} replicates required, got {got}")]
    TooFewReps { got: usize, min: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("{failed} of {reps} draws had an empty frontier side; depth {depth} is too shallow")]
    DepthTooShallow { failed: usize, reps: usize, depth: f64 },

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("only {got} usable rows, need at least {min}")]
    TooFewRows { got: usize, min: usize },

    #[error("io: {0}")]
    Io(String),
}

impl GofError {
    pub(crate) fn at(self, x: f64) -> Self {
        GofError::AtAbscissa {
            x,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        GofError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Strips stage/abscissa annotations.
    pub fn root(&self) -> &GofError {
        match self {
            GofError::AtAbscissa { source, .. } | GofError::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for GofError {
    fn from(e: std::io::Error) -> Self {
        GofError::Io(e.to_string())
    }
}
