//! Exit-code classification: 2 for usage and configuration problems, 3 for
//! numerical failures.

use std::fmt;

use propopt::Error;

/// Marks an error as caused by the invocation rather than the numerics.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub type CliResult<T> = anyhow::Result<T>;

pub fn usage(msg: impl fmt::Display) -> anyhow::Error {
    UsageError(msg.to_string()).into()
}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<std::io::Error>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidInput(_)
                | Error::InvalidParameter(_)
                | Error::Format(_)
                | Error::UnsupportedVersion { .. }
                | Error::Io { .. } => EXIT_USAGE,
                _ => EXIT_NUMERICAL,
            };
        }
    }
    EXIT_NUMERICAL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert_eq!(exit_code(&usage("bad flag")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Format("x".into()).into()), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::SingularSystem("x".into()).into()),
            EXIT_NUMERICAL
        );
        let wrapped = anyhow::Error::from(Error::InvalidStart("nan".into())).context("optimize");
        assert_eq!(exit_code(&wrapped), EXIT_NUMERICAL);
    }
}
