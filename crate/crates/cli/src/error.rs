use std::fmt;

/// Failure reported as `error[<code>]: <message>` on a single line.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
            exit_code: 1,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            exit_code: 2,
            ..Self::new("usage", message)
        }
    }

    /// The single output line, without a trailing newline.
    pub fn line(&self) -> String {
        let msg: String = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error[{}]: {}", self.code, msg)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

impl std::error::Error for CliError {}

impl From<blemodel::Error> for CliError {
    fn from(e: blemodel::Error) -> Self {
        use blemodel::Error::*;
        let code = match &e {
            Io { .. } => "io",
            Parse(_) => "parse",
            InvalidProfile { .. } => "invalid_profile",
            UnknownTxPower { .. } => "unknown_tx_power",
            OutOfRange { .. } => "out_of_range",
            Precondition(_) => "precondition",
            NoVariationData { .. } => "no_variation_data",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        let code = match e.kind() {
            std::io::ErrorKind::BrokenPipe => "broken_pipe",
            _ => "io",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        let message = e.to_string();
        match e.into_kind() {
            csv::ErrorKind::Io(io) => io.into(),
            _ => CliError::new("io", message),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
