//! Quantum walks on periodically curved photonic waveguide lattices:
//! lattice geometry, Bessel-renormalized couplings, unitary and driven
//! evolution, transport variances, photon-correlation statistics and
//! camera-frame reduction.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod coupled_mode;
pub mod coupling;
pub mod error;
pub mod evolution;
pub mod frame;
pub mod lattice;
pub mod photon;
pub mod profile;
pub mod quadrature;
pub mod transport;

pub use bessel::{bessel_j0, j0, j0_first_zero, J0_FIRST_ZERO};
pub use coupled_mode::{integrate_coupled_mode, integrate_coupled_mode_sampled, CoupledModeRun};
pub use coupling::{
    bessel_argument, bond_coupling, effective_coupling_general, effective_coupling_sinusoidal,
    localizing_amplitude, normalized_frequency, CouplingModel, EffectiveCoupling,
};
pub use error::{Error, Result};
pub use evolution::{
    build_hamiltonian, build_hamiltonian_with_beta, evolve_piecewise, evolve_piecewise_trace,
    evolve_static, probability_distribution, HamiltonianMatrix, ProbabilityField,
    SpectralPropagator, StateVector,
};
pub use frame::{
    estimate_background, extract_probabilities, load_frame, variance_with_errorbars,
    BackgroundStrategy, Corner, Frame, Mask, Roi, SpotRenderer, VarianceReport,
};
pub use lattice::{
    build_lattice_1d, build_lattice_triangular, Bond, Dimension, DirectionClass, Lattice,
    PhysicalParams, Site, SpacingClass,
};
pub use photon::{
    cauchy_schwarz_violation, g2, CauchySchwarz, CountRecord, G2Value, SyntheticSource,
};
pub use profile::{CurvatureProfile, SampledProfile, UM_PER_CM};
pub use transport::{
    ballistic_fit, path_coupling_factor, uv_integrals, variance, variance_analytic_1d, Axis,
    BallisticFit, Path, UvIntegrals, VarianceCurve, VariancePoint,
};
