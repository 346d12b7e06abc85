use thiserror::Error;

pub type Result<T> = std::result::Result<T, QbnfError>;

/// Every failure the toolkit can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QbnfError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("resonant frequency: <k, omega> = 0 at k = {}", fmt_mode(.k))]
    Resonant { k: Vec<i64> },

    #[error(
        "small divisor violation at order {order}, k = {}: |<omega,k>| = {divisor:e} < kappa/Delta(|k|) = {threshold:e}",
        fmt_mode(.k)
    )]
    SmallDivisor {
        order: usize,
        k: Vec<i64>,
        divisor: f64,
        threshold: f64,
    },

    #[error("validity error: {0}")]
    Validity(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("sequencing error: {0}")]
    Sequencing(String),

    #[error("selection error: {0}")]
    Selection(String),

    #[error("io error: {0}")]
    Io(String),
}

impl QbnfError {
    /// Short stable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            QbnfError::Domain(_) => "domain",
            QbnfError::Input(_) => "input",
            QbnfError::Configuration(_) => "configuration",
            QbnfError::Shape(_) => "shape",
            QbnfError::Size(_) => "size",
            QbnfError::Resonant { .. } => "resonant",
            QbnfError::SmallDivisor { .. } => "small_divisor",
            QbnfError::Validity(_) => "validity",
            QbnfError::Numeric(_) => "numeric",
            QbnfError::Fit(_) => "fit",
            QbnfError::Sequencing(_) => "sequencing",
            QbnfError::Selection(_) => "selection",
            QbnfError::Io(_) => "io",
        }
    }
}

pub(crate) fn fmt_mode(k: &[i64]) -> String {
    let parts: Vec<String> = k.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

impl From<std::io::Error> for QbnfError {
    fn from(e: std::io::Error) -> Self {
        QbnfError::Io(e.to_string())
    }
}
