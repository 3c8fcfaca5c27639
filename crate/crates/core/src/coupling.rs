//! Effective couplings of curved waveguide pairs.
//!
//! A bent pair hops with the period average of cos(ω·ẋ_d), which for a
//! sinusoid collapses to C0·J0(2πωA/L). Cross-section lengths are µm,
//! propagation lengths cm; the Bessel argument is formed only after both
//! are expressed in µm.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::{j0, J0_FIRST_ZERO};
use crate::error::{domain, Error, Result};
use crate::lattice::{DirectionClass, PhysicalParams, SpacingClass};
use crate::profile::{CurvatureProfile, UM_PER_CM};
use crate::quadrature;

/// Bare coupling as a function of waveguide separation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    rename_all = "snake_case",
    try_from = "CouplingRepr",
    into = "CouplingRepr"
)]
pub enum CouplingModel {
    /// Explicit C0 (cm⁻¹) per spacing class.
    Couplings(BTreeMap<SpacingClass, f64>),
    /// C0(s) = c_ref · exp(−decay · (s − s_ref)), s in µm.
    ExpLaw { c_ref: f64, s_ref: f64, decay: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum CouplingRepr {
    Couplings(BTreeMap<SpacingClass, f64>),
    ExpLaw { c_ref: f64, s_ref: f64, decay: f64 },
}

impl TryFrom<CouplingRepr> for CouplingModel {
    type Error = Error;
    fn try_from(r: CouplingRepr) -> Result<Self> {
        let m = match r {
            CouplingRepr::Couplings(t) => CouplingModel::Couplings(t),
            CouplingRepr::ExpLaw {
                c_ref,
                s_ref,
                decay,
            } => CouplingModel::ExpLaw {
                c_ref,
                s_ref,
                decay,
            },
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<CouplingModel> for CouplingRepr {
    fn from(m: CouplingModel) -> Self {
        match m {
            CouplingModel::Couplings(t) => CouplingRepr::Couplings(t),
            CouplingModel::ExpLaw {
                c_ref,
                s_ref,
                decay,
            } => CouplingRepr::ExpLaw {
                c_ref,
                s_ref,
                decay,
            },
        }
    }
}

impl Default for CouplingModel {
    /// 0.15 cm⁻¹ at 13 µm, falling by e every 1/0.15 µm.
    fn default() -> Self {
        CouplingModel::ExpLaw {
            c_ref: 0.15,
            s_ref: 13.0,
            decay: 0.15,
        }
    }
}

impl CouplingModel {
    /// Same C0 for every spacing class.
    pub fn uniform(c0: f64) -> Self {
        CouplingModel::Couplings(SpacingClass::ALL.into_iter().map(|s| (s, c0)).collect())
    }

    pub fn table(entries: &[(SpacingClass, f64)]) -> Result<Self> {
        let m = CouplingModel::Couplings(entries.iter().copied().collect());
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CouplingModel::Couplings(t) => {
                if t.is_empty() {
                    return Err(Error::Config("coupling table is empty".into()));
                }
                for (s, c) in t {
                    if !(*c > 0.0) || !c.is_finite() {
                        return Err(Error::Config(format!(
                            "coupling for {s} must be > 0, got {c}"
                        )));
                    }
                }
            }
            CouplingModel::ExpLaw {
                c_ref,
                s_ref,
                decay,
            } => {
                if !(*c_ref > 0.0) || !(*s_ref > 0.0) {
                    return Err(Error::Config(
                        "exp_law needs c_ref > 0 and s_ref > 0".into(),
                    ));
                }
                if !(*decay > 0.0) || !decay.is_finite() {
                    return Err(Error::Config(format!(
                        "exp_law decay must be > 0, got {decay}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Bare coupling C0 (cm⁻¹) for a bond of the given class.
    pub fn base(&self, spacing: SpacingClass, d_um: f64) -> Result<f64> {
        match self {
            CouplingModel::Couplings(t) => t.get(&spacing).copied().ok_or_else(|| {
                Error::Config(format!("coupling model has no entry for spacing {spacing}"))
            }),
            CouplingModel::ExpLaw {
                c_ref,
                s_ref,
                decay,
            } => Ok(c_ref * (-decay * (spacing.length_um(d_um) - s_ref)).exp()),
        }
    }
}

/// A bond's coupling after period averaging.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoupling {
    /// cm⁻¹
    pub value: f64,
    pub modulation_factor: f64,
    pub direction: Option<DirectionClass>,
    pub spacing: Option<SpacingClass>,
}

impl EffectiveCoupling {
    fn new(c0: f64, factor: f64) -> Self {
        Self {
            value: c0 * factor,
            modulation_factor: factor,
            direction: None,
            spacing: None,
        }
    }
}

/// ω = 2π n0 s / λ for a waveguide separation `spacing_um`.
pub fn normalized_frequency(params: &PhysicalParams, spacing_um: f64) -> Result<f64> {
    if !(spacing_um > 0.0) || !(params.lambda_um > 0.0) || !(params.n0 > 0.0) {
        return Err(domain(format!(
            "normalized frequency needs positive spacing, wavelength and index (s = {spacing_um}, λ = {})",
            params.lambda_um
        )));
    }
    Ok(2.0 * PI * params.n0 * spacing_um / params.lambda_um)
}

/// Amplitude projected onto a bond direction, A cos θ.
pub fn effective_amplitude(amplitude_um: f64, direction: DirectionClass) -> Result<f64> {
    if !(amplitude_um >= 0.0) {
        return Err(domain(format!(
            "amplitude must be >= 0, got {amplitude_um}"
        )));
    }
    Ok(amplitude_um * direction.cos_angle())
}

/// Dimensionless J0 argument 2πωA/L with A in µm and L in cm.
pub fn bessel_argument(omega: f64, amplitude_um: f64, period_cm: f64) -> f64 {
    2.0 * PI * omega * amplitude_um / (period_cm * UM_PER_CM)
}

/// C_eff = C0·J0(2πωA/L).
pub fn effective_coupling_sinusoidal(
    c0: f64,
    omega: f64,
    amplitude_um: f64,
    period_cm: f64,
) -> Result<EffectiveCoupling> {
    if !(c0 > 0.0) {
        return Err(domain(format!("C0 must be > 0, got {c0}")));
    }
    if !(period_cm > 0.0) {
        return Err(domain(format!("period must be > 0, got {period_cm}")));
    }
    if !(amplitude_um >= 0.0) {
        return Err(domain(format!(
            "amplitude must be >= 0, got {amplitude_um}"
        )));
    }
    Ok(EffectiveCoupling::new(
        c0,
        j0(bessel_argument(omega, amplitude_um, period_cm)),
    ))
}

/// C_eff = (C0/L)∫₀ᴸ cos(ω ẋ_d) dz for any periodic profile.
pub fn effective_coupling_general(
    c0: f64,
    profile: &CurvatureProfile,
    omega: f64,
) -> Result<EffectiveCoupling> {
    if !(c0 > 0.0) {
        return Err(domain(format!("C0 must be > 0, got {c0}")));
    }
    Ok(EffectiveCoupling::new(
        c0,
        averaged_modulation(profile, omega)?,
    ))
}

/// Period average of cos(ω ẋ_d). Sampled profiles are integrated interval
/// by interval using the slope of each interval.
pub(crate) fn averaged_modulation(profile: &CurvatureProfile, omega: f64) -> Result<f64> {
    profile.validate()?;
    match profile {
        CurvatureProfile::Straight => Ok(1.0),
        CurvatureProfile::Sinusoidal { period_cm, .. } => {
            let l = *period_cm;
            let integral = quadrature::integrate(
                |z| (omega * profile.slope(z)).cos(),
                0.0,
                l,
                1e-12,
                1e-14 * l,
            )?;
            Ok(integral / l)
        }
        CurvatureProfile::Sampled(s) => {
            let slopes = s.interval_slopes();
            let sum: f64 = slopes.iter().map(|m| (omega * m).cos()).sum();
            Ok(sum / slopes.len() as f64)
        }
    }
}

/// Amplitude at which C_eff first vanishes: A* = j₀,₁·L/(2πω), in µm.
pub fn localizing_amplitude(omega: f64, period_cm: f64) -> Result<f64> {
    if !(omega > 0.0) || !(period_cm > 0.0) {
        return Err(domain("localizing amplitude needs omega > 0 and L > 0"));
    }
    Ok(J0_FIRST_ZERO * period_cm * UM_PER_CM / (2.0 * PI * omega))
}

/// Effective coupling of one lattice bond under the given bending.
///
/// ω is taken from the bond's own length, and the bending is projected onto
/// the bond direction (A_m = A cos θ).
pub fn bond_coupling(
    model: &CouplingModel,
    params: &PhysicalParams,
    profile: &CurvatureProfile,
    spacing: SpacingClass,
    direction: DirectionClass,
) -> Result<EffectiveCoupling> {
    let c0 = model.base(spacing, params.d_um)?;
    let omega = normalized_frequency(params, spacing.length_um(params.d_um))?;
    let mut eff = match profile {
        CurvatureProfile::Straight => EffectiveCoupling::new(c0, 1.0),
        CurvatureProfile::Sinusoidal {
            amplitude_um,
            period_cm,
        } => {
            let am = effective_amplitude(*amplitude_um, direction)?;
            effective_coupling_sinusoidal(c0, omega, am, *period_cm)?
        }
        CurvatureProfile::Sampled(_) => {
            effective_coupling_general(c0, profile, omega * direction.cos_angle())?
        }
    };
    eff.spacing = Some(spacing);
    eff.direction = Some(direction);
    Ok(eff)
}
