//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the kinetic-theory kernels.
///
/// Variants carry enough context to name the violated invariant; the CLI maps
/// them onto exit codes (configuration vs. numerical vs. I/O).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor argument left its documented domain.
    #[error("{0}")]
    Domain(String),

    /// An inverse trigonometric argument left [-1, 1] by more than the
    /// round-off budget, so the collisional-constraint branch is invalid.
    #[error("{func} argument {arg} outside [-1, 1] beyond round-off at (p0, p2) = ({p0}, {p2})")]
    BranchDomain {
        func: &'static str,
        arg: f64,
        p0: f64,
        p2: f64,
    },

    /// A Wigner function stopped being strictly positive.
    #[error("Wigner function not strictly positive: min {min} at grid index {index}")]
    NonPositiveWigner { min: f64, index: usize },

    /// A quadrature failed to reach its tolerance.
    #[error("quadrature did not converge: estimated error {error:.3e} above tolerance {tol:.3e} ({context})")]
    Quadrature {
        error: f64,
        tol: f64,
        context: String,
    },

    /// The adaptive integrator drove the step size below the representable
    /// resolution while a positivity or accuracy guard kept rejecting steps.
    #[error("time step underflow at t = {t}: step {dt} rejected ({reason})")]
    StepUnderflow { t: f64, dt: f64, reason: &'static str },

    /// Requested invariants (density, energy) admit no equilibrium state.
    #[error("no equilibrium matches invariants: {0}")]
    InfeasibleInvariants(String),

    /// A right-hand side overlapped the conserved null space beyond tolerance.
    #[error("null-space leakage {leak:.3e} above tolerance {tol:.3e}: {context}")]
    NullSpaceLeak { leak: f64, tol: f64, context: &'static str },

    /// Assembled Galerkin matrix failed a structural diagnostic.
    #[error("Galerkin assembly diagnostic failed: {0}")]
    Assembly(String),

    /// A three-phonon query was made for a dispersion outside the
    /// nearest-neighbour family the vanishing theorem covers.
    #[error("dispersion is not of nearest-neighbour type; run the zero-set scan instead ({0})")]
    NonNearestNeighbour(String),

    /// Ensemble sampling diagnostics left their accepted window.
    #[error("sampling diagnostic out of range: {0}")]
    Sampling(String),
}

impl Error {
    /// Convenience constructor for domain violations.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
