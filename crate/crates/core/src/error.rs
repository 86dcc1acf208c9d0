use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter combination outside the physical domain of the model.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// The adaptive integrator could not take a step larger than the
    /// representable floor at time `t`.
    #[error("step size underflow at t = {t:e} (h = {h:e}); system is too stiff for the explicit integrator")]
    Stiffness { t: f64, h: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
