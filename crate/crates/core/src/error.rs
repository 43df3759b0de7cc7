use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("exponent overflow: argument {argument:.3} exceeds the {limit} guard")]
    ExponentOverflow { argument: f64, limit: f64 },

    #[error("capacitance singularity: V_d = {v_d} V reaches the built-in voltage {v_0} V")]
    Singularity { v_d: f64, v_0: f64 },

    #[error("solver did not converge after {iterations} iterations (bracket [{lo:e}, {hi:e}], residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        lo: f64,
        hi: f64,
        residual: f64,
    },

    #[error("singular network matrix at omega = {omega:e} rad/s")]
    SingularMatrix { omega: f64 },

    #[error("frequency {freq:e} Hz outside the spectrum grid [{lo:e}, {hi:e}]")]
    OutOfGrid { freq: f64, lo: f64, hi: f64 },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(cond: bool, field: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            reason: reason.into(),
        })
    }
}
