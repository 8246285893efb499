use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Failures that originate in the command-line layer itself.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid configuration {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("output directory {0} exists and is not empty; pass --force to replace it")]
    OutputExists(PathBuf),

    #[error("runs are not comparable: {0}")]
    MismatchedSplit(String),

    #[error("cannot convert {path}: {reason}")]
    Convert { path: PathBuf, reason: String },
}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(CliError::Usage(msg.into()).into())
}

/// Process exit code for an error: 1 for usage problems, 3 for numerical
/// failures, 2 for everything else (unreadable or inconsistent data).
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<hsikit::Error>() {
            return if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_DATA
            };
        }
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Usage(_) | CliError::Config { .. } | CliError::OutputExists(_) => {
                    EXIT_USAGE
                }
                CliError::MismatchedSplit(_) | CliError::Convert { .. } => EXIT_DATA,
            };
        }
    }
    EXIT_DATA
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn codes_follow_the_root_cause() {
        let numerical: anyhow::Error = hsikit::Error::Convergence("x".into()).into();
        assert_eq!(
            exit_code(&numerical.context("stage: train")),
            EXIT_NUMERICAL
        );
        let data: anyhow::Error = hsikit::Error::Dimension("x".into()).into();
        assert_eq!(exit_code(&data), EXIT_DATA);
        let usage_err = usage::<()>("bad").unwrap_err();
        assert_eq!(exit_code(&usage_err), EXIT_USAGE);
        let io = std::fs::read("/definitely/not/here")
            .context("reading")
            .unwrap_err();
        assert_eq!(exit_code(&io), EXIT_DATA);
        let split: anyhow::Error = CliError::MismatchedSplit("seed".into()).into();
        assert_eq!(exit_code(&split), EXIT_DATA);
    }
}
