use thiserror::Error;

/// Library-wide error type.
///
/// The CLI maps variants onto process exit codes: `Io`/`Parse` are 2,
/// `Validation`/`Domain` are 3, and the numerical failures
/// (`Localization`/`Construction`/`Computation`) are 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file (bad JSON, wrong schema version, missing field).
    #[error("parse: {0}")]
    Parse(String),

    /// Structurally invalid input: mismatched lengths, bad parameter ranges,
    /// inconsistent configuration.
    #[error("validation: {0}")]
    Validation(String),

    /// Evaluation requested at a point where the chosen representation is
    /// not defined (for example a product ratio at one of its poles).
    #[error("domain: {0}")]
    Domain(String),

    /// Zero counting or refinement inside a disk failed; the message says
    /// which disk and what to adjust.
    #[error("localization: {0}")]
    Localization(String),

    /// A construction invariant failed (sign alternation, half-plane
    /// constraint, no admissible threshold).
    #[error("construction: {0}")]
    Construction(String),

    /// A numerical procedure could not certify its result (divergent tail,
    /// non-finite intermediate, singular linear system).
    #[error("computation: {0}")]
    Computation(String),
}

impl Error {
    /// Process exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse(_) => 2,
            Error::Validation(_) | Error::Domain(_) => 3,
            Error::Localization(_) | Error::Construction(_) | Error::Computation(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_partition_variants() {
        assert_eq!(Error::Parse("x".into()).exit_code(), 2);
        assert_eq!(Error::Validation("x".into()).exit_code(), 3);
        assert_eq!(Error::Domain("x".into()).exit_code(), 3);
        assert_eq!(Error::Localization("x".into()).exit_code(), 4);
        assert_eq!(Error::Construction("x".into()).exit_code(), 4);
        assert_eq!(Error::Computation("x".into()).exit_code(), 4);
    }
}
