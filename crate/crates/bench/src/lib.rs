//! Shared fixtures for the benchmarks.

use dynloc_core::{CurvatureProfile, PhysicalParams};

/// Waveguide arrays with 15 µm pitch probed at 780 nm.
pub fn params() -> PhysicalParams {
    PhysicalParams::new(1.503, 0.78, 15.0).expect("valid parameters")
}

pub fn curved() -> CurvatureProfile {
    CurvatureProfile::sinusoidal(14.4, 2.0).expect("valid profile")
}
