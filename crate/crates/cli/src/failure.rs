use std::fmt;

/// Command failure with its exit code: 2 configuration, 3 missing input,
/// 1 anything else.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Missing(String),
    Other(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Missing(_) => 3,
            Failure::Other(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Missing(m) => write!(f, "missing input: {m}"),
            Failure::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<wehrl_core::Error> for Failure {
    fn from(e: wehrl_core::Error) -> Self {
        use wehrl_core::Error as E;
        match e {
            E::Io(io) if io.kind() == std::io::ErrorKind::NotFound => Failure::Missing(io.to_string()),
            E::InvalidInput(_)
            | E::Schema(_)
            | E::ShapeMismatch { .. }
            | E::ComplexityLimit { .. }
            | E::InsufficientData { .. }
            | E::Json(_) => Failure::Config(e.to_string()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        wehrl_core::Error::from(e).into()
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Other(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

pub fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

pub fn missing(msg: impl Into<String>) -> Failure {
    Failure::Missing(msg.into())
}
