use serde::Serialize;

/// Exit code for validation failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for runtime and numerical failures.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message,
            code: EXIT_VALIDATION,
        }
    }

    pub fn numerical(message: String) -> Self {
        Self {
            kind: ErrorKind::Numerical,
            message,
            code: EXIT_RUNTIME,
        }
    }

    pub fn io(message: String) -> Self {
        Self {
            kind: ErrorKind::Io,
            message,
            code: EXIT_RUNTIME,
        }
    }

    /// `{"error": {"kind", "message", "code"}}`
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<bvpmmo::Error> for CliError {
    fn from(e: bvpmmo::Error) -> Self {
        use bvpmmo::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::InvalidTimeSpan { .. }
            | E::TransformUndefined(_)
            | E::Domain { .. } => Self::validation(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::io(e.to_string())
    }
}
