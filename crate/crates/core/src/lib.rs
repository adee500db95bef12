//! Kinetic theory of phonons in weakly anharmonic one-dimensional chains.
//!
//! The library covers the full pipeline from the microscopic chain to the
//! phonon Boltzmann description and its transport predictions:
//!
//! * [`dispersion`]: nearest-neighbour dispersion ω(k) = ω̄(1 − 2δ cos 2πk)^{1/2}
//!   and the lattice ↔ phonon-mode change of variables a(k,σ).
//! * [`constraints`]: collisional constraints Ω_n = Σ σ_ℓ ω(k_ℓ), the exact
//!   non-perturbative solution branches h(p₀,p₂) for four-phonon processes,
//!   and the kernel functions F_± they induce.
//! * [`collision`]: resolved four-phonon collision operators for the FPU and
//!   onsite chains, plus the vanishing three-phonon operator with its
//!   justification record.
//! * [`kinetics`]: entropy, entropy production (H-theorem), adaptive
//!   relaxation of Wigner functions, and steady states from the conserved
//!   invariants.
//! * [`linop`]: linearized collision operators around thermal equilibrium,
//!   Galerkin assembly, semigroup and resolvent quadratic forms.
//! * [`transport`]: Green-Kubo thermal conductivity, the pinned κ(T) with its
//!   variational lower bound, and the anomalous t^{-3/5} decay of the FPU
//!   current correlator.
//! * [`chainsim`]: microscopic reference simulator with velocity-Verlet
//!   dynamics, Gibbs sampling, energy density, and the harmonic current
//!   correlator.
//!
//! All numerical kernels are generic over the scalar type through [`Real`]
//! (f32 or f64); the `*64` aliases at the crate root fix the default f64
//! precision used by the command-line tools and the test suite.

pub mod chainsim;
pub mod collision;
pub mod constraints;
pub mod dispersion;
pub mod error;
pub mod interp;
pub mod kinetics;
pub mod linop;
pub mod quadrature;
pub mod scalar;
pub mod torus;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default-precision dispersion relation.
pub type Dispersion64 = dispersion::DispersionRelation<f64>;
/// Default-precision phonon field a(k,σ) on an N-site lattice.
pub type PhononField64 = dispersion::PhononField<f64>;
/// Default-precision Wigner function on a periodic k-grid.
pub type Wigner64 = collision::WignerFunction<f64>;
/// Default-precision collision model.
pub type CollisionModel64 = collision::CollisionModel<f64>;
/// Default-precision equilibrium state W = 1/(β(ω − μ)).
pub type Equilibrium64 = kinetics::EquilibriumState<f64>;
/// Default-precision Galerkin basis.
pub type GalerkinBasis64 = linop::GalerkinBasis<f64>;
/// Default-precision linearized collision operator.
pub type LinearizedOperator64 = linop::LinearizedOperator<f64>;
/// Default-precision chain state.
pub type ChainState64 = chainsim::ChainState<f64>;
/// Default-precision chain potential.
pub type ChainPotential64 = chainsim::ChainPotential<f64>;
/// Default-precision pinned conductivity result.
pub type ConductivityResult64 = transport::ConductivityResult<f64>;
/// Default-precision Green-Kubo decay curve.
pub type GkDecayCurve64 = transport::GkDecayCurve<f64>;
