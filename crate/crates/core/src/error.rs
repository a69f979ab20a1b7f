use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {value:e}, error {error:e} after {evaluations} evaluations")]
    Quadrature {
        value: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },

    #[error("derivative-undefined at r = {r}")]
    DerivativeUndefined { r: f64 },

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("invalid problem configuration: {0}")]
    Config(String),

    #[error("no-turning: A(R) = 0 at R = {r}")]
    NoTurning { r: f64 },

    #[error("fan-broken: trajectory from R = {r} has an event at t = {t_c} before the slice time")]
    FanBroken { r: f64, t_c: f64 },

    #[error("X-zero at t_c = {t_c}")]
    XZero { t_c: f64 },

    #[error("integration failed: {0}")]
    Integrator(String),
}

pub type Result<T> = std::result::Result<T, Error>;
