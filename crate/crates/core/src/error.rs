use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("truncation at n_max = {n_max} leaves tail weight {tail:e} (budget {budget:e})")]
    Truncation {
        n_max: usize,
        tail: f64,
        budget: f64,
    },

    #[error("no boot-up within t_max = {t_max} (peak saturated fraction {peak_fraction:.3})")]
    NoBootup { t_max: u64, peak_fraction: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}
