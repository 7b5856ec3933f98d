use std::path::PathBuf;

/// Which coefficient of `y'' + b y' + c y = 0` failed to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    B,
    C,
    BPrime,
    Potential,
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Term::B => "b",
            Term::C => "c",
            Term::BPrime => "b'",
            Term::Potential => "V",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("coefficient {term} is not finite at x = {x}")]
    Evaluation { term: Term, x: f64 },

    #[error("singular point at x = {x}")]
    Singular { x: f64 },

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("x = {x} lies outside the trace range [{lo}, {hi}]")]
    Range { x: f64, lo: f64, hi: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("invalid boundary condition: {0}")]
    Boundary(String),

    #[error("invalid integrator configuration: {0}")]
    Config(String),

    /// Bad command-line flag or config-file entry.
    #[error("{0}")]
    Usage(String),

    #[error("trace does not watch level {0}")]
    MissingWatchLevel(f64),

    #[error("need at least 2 extrema, trace has {0}")]
    InsufficientExtrema(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
