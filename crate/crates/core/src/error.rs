use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter lies outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: String, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A jump or flow was requested outside its set (C, D1i or D2i).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integration diverged at t = {t}, j = {j}")]
    IntegrationDiverged { t: f64, j: u64 },

    #[error("zeno guard tripped on network {network} at t = {t}: consecutive samplings {gap:e} apart")]
    Zeno { network: usize, t: f64, gap: f64 },

    #[error("infeasible design: {0}")]
    Infeasible(String),

    /// Field-level configuration failure; `field` is a dotted path.
    #[error("config error at `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("monitor requires state snapshots at jumps; run with snapshots enabled")]
    MissingSnapshots,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Param {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numerics rather than the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegrationDiverged { .. } | Error::Zeno { .. } | Error::Precondition(_)
        )
    }
}
