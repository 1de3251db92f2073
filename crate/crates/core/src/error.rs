use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Bessel series of order {order} at r = {arg} did not converge within {max_terms} terms")]
    BesselNonConvergence {
        order: u32,
        arg: f64,
        max_terms: usize,
    },

    #[error("Bessel functions require a nonnegative argument, got {0}")]
    NegativeArgument(f64),

    #[error("cyclic index {l} out of range for modulus {modulus}")]
    IndexOutOfRange { l: usize, modulus: usize },

    #[error("series truncation exhausted: no trustworthy orders left to differentiate")]
    TruncationExhausted,

    #[error("w = {w} outside the declared series domain |w| <= {radius}")]
    SeriesDomain { w: f64, radius: f64 },

    #[error("point (t = {t}, x = {x}) lies outside the support |x| <= v t")]
    OutsideSupport { t: f64, x: f64 },

    #[error("no closed-form density is assembled for m = {m}; use the Monte Carlo estimator instead")]
    UnsupportedShape { m: u32 },

    #[error("table has no entry u^{l}_{k}")]
    MissingEntry { l: usize, k: usize },

    #[error("relation needs entry u^{l}_{k} beyond the generated table")]
    RelationOutOfTable { l: usize, k: usize },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (partial value {partial}, error estimate {err_est})"
    )]
    QuadratureNonConvergence {
        subdivisions: usize,
        partial: f64,
        err_est: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
