//! Waveguide bending profiles x_d(z).
//!
//! Transverse displacement is in µm, propagation distance in cm. The slope
//! returned by [`CurvatureProfile::slope`] is dimensionless (µm per µm) and
//! the curvature is the z-derivative of that slope, in cm⁻¹.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Micrometres per centimetre.
pub const UM_PER_CM: f64 = 1e4;

/// Relative tolerance for the periodicity check on sampled profiles.
const PERIODIC_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureProfile {
    Straight,
    /// x_d(z) = A sin(2πz/L).
    Sinusoidal {
        amplitude_um: f64,
        period_cm: f64,
    },
    Sampled(SampledProfile),
}

#[derive(Serialize, Deserialize)]
struct SampledRepr {
    period_cm: f64,
    samples_um: Vec<f64>,
}

/// One period of x_d sampled on a uniform grid z_k = kL/N, k = 0..=N.
///
/// The last sample closes the period and must equal the first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledRepr", into = "SampledRepr")]
pub struct SampledProfile {
    period_cm: f64,
    samples_um: Vec<f64>,
    // slope on each interval, located at the interval midpoint
    mid_slopes: Vec<f64>,
}

impl TryFrom<SampledRepr> for SampledProfile {
    type Error = Error;
    fn try_from(r: SampledRepr) -> Result<Self> {
        SampledProfile::new(r.period_cm, r.samples_um)
    }
}

impl From<SampledProfile> for SampledRepr {
    fn from(p: SampledProfile) -> Self {
        SampledRepr {
            period_cm: p.period_cm,
            samples_um: p.samples_um,
        }
    }
}

impl SampledProfile {
    pub fn new(period_cm: f64, samples_um: Vec<f64>) -> Result<Self> {
        if !(period_cm > 0.0) || !period_cm.is_finite() {
            return Err(domain(format!("period must be > 0, got {period_cm}")));
        }
        if samples_um.len() < 4 {
            return Err(domain("a sampled profile needs at least 4 samples"));
        }
        if samples_um.iter().any(|x| !x.is_finite()) {
            return Err(domain("sampled profile contains non-finite values"));
        }
        let scale = samples_um.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let (first, last) = (samples_um[0], samples_um[samples_um.len() - 1]);
        if (first - last).abs() > PERIODIC_TOL * scale {
            return Err(domain(format!(
                "sampled profile is not periodic: x(0) = {first}, x(L) = {last}"
            )));
        }
        let n = samples_um.len() - 1;
        let h_um = period_cm / n as f64 * UM_PER_CM;
        let mid_slopes = samples_um
            .windows(2)
            .map(|w| (w[1] - w[0]) / h_um)
            .collect();
        Ok(Self {
            period_cm,
            samples_um,
            mid_slopes,
        })
    }

    /// Sample `f(z)` (µm, z in cm) on `intervals` uniform intervals of one period.
    pub fn from_fn(period_cm: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = period_cm / intervals as f64;
        let mut samples: Vec<f64> = (0..=intervals).map(|k| f(k as f64 * h)).collect();
        // close the period exactly
        samples[intervals] = samples[0];
        Self::new(period_cm, samples)
    }

    pub fn period_cm(&self) -> f64 {
        self.period_cm
    }

    pub fn samples_um(&self) -> &[f64] {
        &self.samples_um
    }

    /// Interval count N and interval length (cm).
    pub fn grid(&self) -> (usize, f64) {
        let n = self.mid_slopes.len();
        (n, self.period_cm / n as f64)
    }

    /// Slope on each sampling interval (dimensionless).
    pub fn interval_slopes(&self) -> &[f64] {
        &self.mid_slopes
    }

    fn displacement(&self, z: f64) -> f64 {
        let (n, h) = self.grid();
        let t = z.rem_euclid(self.period_cm) / h;
        let k = (t.floor() as usize).min(n - 1);
        let frac = t - k as f64;
        self.samples_um[k] * (1.0 - frac) + self.samples_um[k + 1] * frac
    }

    /// Periodic linear interpolation of the midpoint slopes.
    fn slope(&self, z: f64) -> f64 {
        let (n, h) = self.grid();
        let t = z.rem_euclid(self.period_cm) / h - 0.5;
        let k = t.floor();
        let frac = t - k;
        let lo = (k as i64).rem_euclid(n as i64) as usize;
        let hi = (lo + 1) % n;
        self.mid_slopes[lo] * (1.0 - frac) + self.mid_slopes[hi] * frac
    }

    /// Centred second difference, constant between interval midpoints.
    fn curvature(&self, z: f64) -> f64 {
        let (n, h) = self.grid();
        let t = z.rem_euclid(self.period_cm) / h - 0.5;
        let lo = (t.floor() as i64).rem_euclid(n as i64) as usize;
        let hi = (lo + 1) % n;
        (self.mid_slopes[hi] - self.mid_slopes[lo]) / h
    }
}

impl CurvatureProfile {
    pub fn sinusoidal(amplitude_um: f64, period_cm: f64) -> Result<Self> {
        let p = CurvatureProfile::Sinusoidal {
            amplitude_um,
            period_cm,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CurvatureProfile::Straight => Ok(()),
            CurvatureProfile::Sinusoidal {
                amplitude_um,
                period_cm,
            } => {
                if !(*amplitude_um >= 0.0) || !amplitude_um.is_finite() {
                    return Err(domain(format!(
                        "amplitude must be >= 0, got {amplitude_um}"
                    )));
                }
                if !(*period_cm > 0.0) || !period_cm.is_finite() {
                    return Err(domain(format!("period must be > 0, got {period_cm}")));
                }
                Ok(())
            }
            CurvatureProfile::Sampled(_) => Ok(()),
        }
    }

    /// True when the waveguides carry no bending at all.
    pub fn is_straight(&self) -> bool {
        match self {
            CurvatureProfile::Straight => true,
            CurvatureProfile::Sinusoidal { amplitude_um, .. } => *amplitude_um == 0.0,
            CurvatureProfile::Sampled(s) => s.mid_slopes.iter().all(|&m| m == 0.0),
        }
    }

    pub fn period_cm(&self) -> Option<f64> {
        match self {
            CurvatureProfile::Straight => None,
            CurvatureProfile::Sinusoidal { period_cm, .. } => Some(*period_cm),
            CurvatureProfile::Sampled(s) => Some(s.period_cm),
        }
    }

    /// x_d(z) in µm.
    pub fn displacement_um(&self, z_cm: f64) -> f64 {
        match self {
            CurvatureProfile::Straight => 0.0,
            CurvatureProfile::Sinusoidal {
                amplitude_um,
                period_cm,
            } => amplitude_um * (2.0 * PI * z_cm / period_cm).sin(),
            CurvatureProfile::Sampled(s) => s.displacement(z_cm),
        }
    }

    /// dx_d/dz, dimensionless.
    pub fn slope(&self, z_cm: f64) -> f64 {
        match self {
            CurvatureProfile::Straight => 0.0,
            CurvatureProfile::Sinusoidal {
                amplitude_um,
                period_cm,
            } => {
                let k = 2.0 * PI / period_cm;
                amplitude_um / UM_PER_CM * k * (k * z_cm).cos()
            }
            CurvatureProfile::Sampled(s) => s.slope(z_cm),
        }
    }

    /// d²x_d/dz² in cm⁻¹.
    pub fn curvature(&self, z_cm: f64) -> f64 {
        match self {
            CurvatureProfile::Straight => 0.0,
            CurvatureProfile::Sinusoidal {
                amplitude_um,
                period_cm,
            } => {
                let k = 2.0 * PI / period_cm;
                -amplitude_um / UM_PER_CM * k * k * (k * z_cm).sin()
            }
            CurvatureProfile::Sampled(s) => s.curvature(z_cm),
        }
    }

    /// Slope drop ẋ_d(0) − ẋ_d(z). Multiplied by ω this is the phase the
    /// drive imprints on a nearest-neighbour hop; for the sinusoid it equals
    /// (2πA/L)·η(z) with η(z) = 1 − cos(2πz/L).
    pub fn slope_drop(&self, z_cm: f64) -> f64 {
        self.slope(0.0) - self.slope(z_cm)
    }
}
