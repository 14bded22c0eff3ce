use thiserror::Error;

/// Failures raised by the physics library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("temperature must be strictly positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("momentum {0} outside [0, pi]")]
    MomentumOutOfRange(f64),

    #[error("{name} = {value} is outside its domain ({domain})")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("Boltzmann occupation {value:e} exceeds cap {cap:e}; not a Boltzmann regime")]
    BoltzmannOverflow { value: f64, cap: f64 },

    #[error("equilibrium (t -> infinity) limit requested with lambda = 0; closed evolution never settles")]
    UndampedEquilibrium,

    #[error("quadrature exceeded {max_panels} panels; achieved error {achieved:e} > target {target:e}")]
    QuadratureBudget {
        max_panels: usize,
        achieved: f64,
        target: f64,
    },

    #[error("series did not converge within {terms} terms; tail bound {bound:e}")]
    SeriesBudget { terms: usize, bound: f64 },

    #[error("special function argument outside validated range: {0}")]
    SpecialRange(String),

    #[error("integrator step failure: {0}")]
    StepFailure(String),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("exchange probability vanishes for direction {0}")]
    ZeroProbability(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_domain(name: &'static str, value: f64, domain: &'static str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { name, value, domain })
    }
}
