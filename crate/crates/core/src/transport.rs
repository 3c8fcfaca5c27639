//! Transport measures: spatial variance of a distribution, the analytic
//! one-dimensional dynamic-localization variance, the u/v integrals it comes
//! from, directional path factors on the triangular lattice, and ballistic
//! fits of σ against z.
//!
//! Distances are measured from the injection site in units of the nearest
//! spacing d along every axis.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bessel::j0;
use crate::coupling::{bessel_argument, normalized_frequency, CouplingModel};
use crate::error::{domain, Result};
use crate::evolution::ProbabilityField;
use crate::lattice::{Dimension, DirectionClass, Lattice, PhysicalParams, SpacingClass};
use crate::profile::CurvatureProfile;
use crate::quadrature::{integrate, integrate_periodic_pieces};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "1d")]
    Chain,
    #[serde(rename = "horizontal")]
    Horizontal,
    #[serde(rename = "vertical")]
    Vertical,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Chain => "1d",
            Axis::Horizontal => "horizontal",
            Axis::Vertical => "vertical",
        }
    }
}

/// σ² = Σ (Δl_i)² p_i / Σ p_i with Δl_i the offset of site i from `origin`
/// along `axis`, in units of d.
pub fn variance(p: &ProbabilityField, lattice: &Lattice, axis: Axis, origin: usize) -> Result<f64> {
    if p.len() != lattice.len() {
        return Err(domain(format!(
            "distribution has {} sites, lattice has {}",
            p.len(),
            lattice.len()
        )));
    }
    if origin >= lattice.len() {
        return Err(domain(format!("origin {origin} outside lattice")));
    }
    let coord: fn(&crate::lattice::Site) -> f64 = match (lattice.dimension(), axis) {
        (Dimension::OneD, Axis::Chain) => |s| s.x,
        (Dimension::TwoD, Axis::Horizontal) => |s| s.x,
        (Dimension::TwoD, Axis::Vertical) => |s| s.y,
        (Dimension::OneD, a) => {
            return Err(domain(format!(
                "axis {} is not defined on a 1D lattice",
                a.as_str()
            )))
        }
        (Dimension::TwoD, Axis::Chain) => {
            return Err(domain("chain axis is not defined on a 2D lattice"))
        }
    };
    let d = lattice.d_um();
    let o = coord(&lattice.sites()[origin]);
    let (mut num, mut den) = (0.0, 0.0);
    for (s, &pi) in lattice.sites().iter().zip(p.values()) {
        let dl = (coord(s) - o) / d;
        num += dl * dl * pi;
        den += pi;
    }
    Ok(num / den)
}

/// σ² = 2C²z²·J0²(2πωA/L).
pub fn variance_analytic_1d(
    coupling: f64,
    z_cm: f64,
    omega: f64,
    amplitude_um: f64,
    period_cm: f64,
) -> Result<f64> {
    if !(coupling > 0.0) || !(z_cm >= 0.0) || !(period_cm > 0.0) {
        return Err(domain("analytic variance needs C > 0, z >= 0 and L > 0"));
    }
    let j = j0(bessel_argument(omega, amplitude_um, period_cm));
    Ok(2.0 * coupling * coupling * z_cm * z_cm * j * j)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UvIntegrals {
    pub u: f64,
    pub v: f64,
    pub sigma2: f64,
}

/// u = ∫₀ᶻ cos φ, v = ∫₀ᶻ sin φ with φ(z') = ω (ẋ_d(0) − ẋ_d(z')), and
/// σ² = 2C²(u² + v²). For the sinusoid φ = (2πωA/L)(1 − cos(2πz'/L)).
pub fn uv_integrals(
    profile: &CurvatureProfile,
    omega: f64,
    coupling: f64,
    z_cm: f64,
) -> Result<UvIntegrals> {
    if !(z_cm >= 0.0) || !z_cm.is_finite() {
        return Err(domain(format!("z must be >= 0, got {z_cm}")));
    }
    profile.validate()?;
    let phase = |z: f64| omega * profile.slope_drop(z);
    let (u, v) = match profile.period_cm() {
        None => (z_cm, 0.0),
        Some(l) => (
            integrate_periodic_pieces(|z| phase(z).cos(), 0.0, z_cm, l, 1e-11)?,
            integrate_periodic_pieces(|z| phase(z).sin(), 0.0, z_cm, l, 1e-11)?,
        ),
    };
    Ok(UvIntegrals {
        u,
        v,
        sigma2: 2.0 * coupling * coupling * (u * u + v * v),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Path {
    /// Straight horizontal hops at √3d.
    I,
    /// Nearest-neighbour hops along ±30°.
    II,
    /// Zig-zag through vertical and ±30° hops at d.
    III,
}

/// ∫₀ᶻ cos(ω_bond · cosθ · (ẋ_d(0) − ẋ_d(z'))) dz'.
fn directed_u(
    profile: &CurvatureProfile,
    omega_bond: f64,
    direction: DirectionClass,
    z_cm: f64,
) -> Result<f64> {
    let w = omega_bond * direction.cos_angle();
    match profile.period_cm() {
        None => Ok(z_cm),
        Some(l) => {
            integrate_periodic_pieces(|z| (w * profile.slope_drop(z)).cos(), 0.0, z_cm, l, 1e-11)
        }
    }
}

/// C·u(z) accumulated along one of the three horizontal transport routes of
/// the triangular lattice. Path III needs the four segment lengths
/// Δz₁..Δz₄ and uses the product form (C_{d,v} + C_{d,h30})/2 · (Δz₁ + Δz₄)
/// · ∫₀^{Δz₂+Δz₃} cos(…A cos30°…); the vertical legs are unmodulated.
pub fn path_coupling_factor(
    path: Path,
    model: &CouplingModel,
    params: &PhysicalParams,
    profile: &CurvatureProfile,
    z_cm: f64,
    segment_lengths: Option<[f64; 4]>,
) -> Result<f64> {
    let d = params.d_um;
    let omega_d = normalized_frequency(params, d)?;
    match path {
        Path::I => {
            let c = model.base(SpacingClass::Sqrt3D, d)?;
            let omega = normalized_frequency(params, SpacingClass::Sqrt3D.length_um(d))?;
            Ok(c * directed_u(profile, omega, DirectionClass::H, z_cm)?)
        }
        Path::II => {
            let c = model.base(SpacingClass::D, d)?;
            Ok(c * directed_u(profile, omega_d, DirectionClass::H30, z_cm)?)
        }
        Path::III => {
            let [dz1, dz2, dz3, dz4] =
                segment_lengths.ok_or_else(|| domain("path III needs the four segment lengths"))?;
            if [dz1, dz2, dz3, dz4].iter().any(|x| !(*x >= 0.0)) {
                return Err(domain("segment lengths must be >= 0"));
            }
            // C_{d-v} and C_{d-h30} share the bare spacing-d coupling.
            let c = model.base(SpacingClass::D, d)?;
            let vertical = dz1 + dz4;
            let diagonal = directed_u(profile, omega_d, DirectionClass::H30, dz2 + dz3)?;
            Ok(0.5 * (c + c) * vertical * diagonal)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub z_cm: f64,
    pub sigma2: f64,
    pub error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub axis: Axis,
    points: Vec<VariancePoint>,
}

impl VarianceCurve {
    pub fn new(axis: Axis, points: Vec<VariancePoint>) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].z_cm > w[0].z_cm) {
                return Err(domain(
                    "variance curve z values must be strictly increasing",
                ));
            }
        }
        if points.iter().any(|p| !(p.sigma2 >= 0.0)) {
            return Err(domain("variance must be >= 0"));
        }
        Ok(Self { axis, points })
    }

    pub fn points(&self) -> &[VariancePoint] {
        &self.points
    }

    /// CSV with header `z,sigma2,error,axis`; a missing error is left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z", "sigma2", "error", "axis"])?;
        for p in &self.points {
            w.write_record([
                p.z_cm.to_string(),
                p.sigma2.to_string(),
                p.error.map(|e| e.to_string()).unwrap_or_default(),
                self.axis.as_str().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Least-squares line σ = slope·z through the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallisticFit {
    /// cm⁻¹
    pub slope: f64,
    pub r_squared: f64,
}

/// Fit √σ² against z through the origin. R² is computed against the mean of
/// σ and clamped to [0, 1]; a curve with no spread in σ reports R² = 0.
pub fn ballistic_fit(curve: &VarianceCurve) -> Result<BallisticFit> {
    let pts = curve.points();
    if pts.len() < 3 {
        return Err(domain(format!(
            "ballistic fit needs at least 3 points, got {}",
            pts.len()
        )));
    }
    let sig: Vec<f64> = pts.iter().map(|p| p.sigma2.sqrt()).collect();
    let szz: f64 = pts.iter().map(|p| p.z_cm * p.z_cm).sum();
    if szz == 0.0 {
        return Err(domain("ballistic fit needs some z > 0"));
    }
    let szs: f64 = pts.iter().zip(&sig).map(|(p, s)| p.z_cm * s).sum();
    let slope = szs / szz;
    let mean = sig.iter().sum::<f64>() / sig.len() as f64;
    let ss_tot: f64 = sig.iter().map(|s| (s - mean).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .zip(&sig)
        .map(|(p, s)| (s - slope * p.z_cm).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(BallisticFit { slope, r_squared })
}

/// Plain ∫₀ᶻ cos(a·(1 − cos(2πz'/L))) dz' for the sinusoid, used by tests and
/// reports that want the closed-form η.
pub fn sinusoidal_u(a: f64, period_cm: f64, z_cm: f64) -> Result<f64> {
    let k = 2.0 * std::f64::consts::PI / period_cm;
    integrate(
        |z| (a * (1.0 - (k * z).cos())).cos(),
        0.0,
        z_cm,
        1e-12,
        1e-15,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice_1d, build_lattice_triangular};

    #[test]
    fn delta_and_symmetric_pair() {
        let l = build_lattice_1d(5, 15.0).unwrap();
        let delta = ProbabilityField::from_weights(vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(variance(&delta, &l, Axis::Chain, 2).unwrap(), 0.0);
        let pair = ProbabilityField::from_weights(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        assert!((variance(&pair, &l, Axis::Chain, 2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn axis_must_match_dimension() {
        let l = build_lattice_1d(3, 15.0).unwrap();
        let p = ProbabilityField::from_weights(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(variance(&p, &l, Axis::Horizontal, 1).is_err());
        assert!(variance(&p, &l, Axis::Vertical, 1).is_err());
        let t = build_lattice_triangular(1, 15.0).unwrap();
        let q = ProbabilityField::from_weights(vec![1.0; t.len()]).unwrap();
        assert!(variance(&q, &t, Axis::Chain, 0).is_err());
        assert!(variance(&q, &t, Axis::Vertical, t.center_site()).is_ok());
    }

    #[test]
    fn analytic_variance_limits() {
        assert!(
            (variance_analytic_1d(0.5, 3.0, 181.606, 0.0, 2.0).unwrap() - 2.0 * 0.25 * 9.0).abs()
                < 1e-12
        );
        let a_star = crate::coupling::localizing_amplitude(181.606, 2.0).unwrap();
        assert!(variance_analytic_1d(0.5, 3.0, 181.606, a_star, 2.0).unwrap() < 1e-25);
        let r = variance_analytic_1d(1.0, 2.0, 181.606, 14.4, 2.0).unwrap()
            / variance_analytic_1d(1.0, 2.0, 181.606, 0.0, 2.0).unwrap();
        assert!((r - 0.702_652_5).abs() < 1e-6, "{r}");
    }

    #[test]
    fn uv_straight_limit() {
        let r = uv_integrals(&CurvatureProfile::Straight, 181.606, 0.4, 2.5).unwrap();
        assert_eq!((r.u, r.v), (2.5, 0.0));
        assert!((r.sigma2 - 2.0 * 0.16 * 6.25).abs() < 1e-12);
        let zero_amp = CurvatureProfile::sinusoidal(0.0, 2.0).unwrap();
        let r = uv_integrals(&zero_amp, 181.606, 0.4, 2.5).unwrap();
        assert!((r.u - 2.5).abs() < 1e-12 && r.v.abs() < 1e-14);
    }

    #[test]
    fn uv_matches_closed_form_eta() {
        let p = CurvatureProfile::sinusoidal(14.4, 2.0).unwrap();
        let omega = 181.606;
        let a = bessel_argument(omega, 14.4, 2.0);
        for &z in &[0.3, 1.0, 2.7] {
            let r = uv_integrals(&p, omega, 1.0, z).unwrap();
            let u = sinusoidal_u(a, 2.0, z).unwrap();
            assert!((r.u - u).abs() < 1e-10, "z = {z}");
        }
    }

    #[test]
    fn uv_half_period_small_amplitude() {
        // σ²/(2C²z²) = 1 − O(a²) for small a.
        let p = CurvatureProfile::sinusoidal(0.5, 2.0).unwrap();
        let a = bessel_argument(181.606, 0.5, 2.0);
        let r = uv_integrals(&p, 181.606, 1.0, 1.0).unwrap();
        let ratio = r.sigma2 / 2.0;
        assert!((1.0 - ratio).abs() < a * a, "ratio {ratio}, a {a}");
        assert!((1.0 - ratio).abs() > 0.0);
    }

    #[test]
    fn uv_long_z_tends_to_bessel_limit() {
        let p = CurvatureProfile::sinusoidal(14.4, 2.0).unwrap();
        let j = j0(bessel_argument(181.606, 14.4, 2.0));
        let z = 50.0 * 2.0;
        let r = uv_integrals(&p, 181.606, 1.0, z).unwrap();
        let ratio = r.sigma2 / (2.0 * z * z);
        assert!((ratio / (j * j) - 1.0).abs() < 0.02);
    }

    #[test]
    fn path_factors() {
        let params = PhysicalParams::new(1.503, 0.78, 15.0).unwrap();
        let model = CouplingModel::table(&[
            (SpacingClass::D, 1.0),
            (SpacingClass::Sqrt3D, 0.3),
            (SpacingClass::TwoD, 0.1),
        ])
        .unwrap();
        let straight = CurvatureProfile::Straight;
        let p1 = path_coupling_factor(Path::I, &model, &params, &straight, 1.7, None).unwrap();
        assert!((p1 - 0.3 * 1.7).abs() < 1e-14);
        let curved = CurvatureProfile::sinusoidal(14.4, 2.0).unwrap();
        assert!(path_coupling_factor(Path::III, &model, &params, &curved, 2.0, None).is_err());
        let p3 = path_coupling_factor(
            Path::III,
            &model,
            &params,
            &curved,
            2.0,
            Some([0.5, 0.5, 0.5, 0.5]),
        )
        .unwrap();
        let p2_at_1 = path_coupling_factor(Path::II, &model, &params, &curved, 1.0, None).unwrap();
        assert!((p3 - 1.0 * p2_at_1).abs() < 1e-10);
    }

    #[test]
    fn path_two_is_path_one_with_projected_amplitude() {
        let params = PhysicalParams::new(1.503, 0.78, 15.0).unwrap();
        let model = CouplingModel::uniform(1.0);
        let curved = CurvatureProfile::sinusoidal(14.4, 2.0).unwrap();
        let p2 = path_coupling_factor(Path::II, &model, &params, &curved, 2.0, None).unwrap();
        let omega_d = normalized_frequency(&params, 15.0).unwrap();
        let a = bessel_argument(omega_d, 14.4 * 3f64.sqrt() / 2.0, 2.0);
        assert!((p2 - sinusoidal_u(a, 2.0, 2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn ballistic_fit_examples() {
        let c: f64 = 0.7;
        let pts = (1..=5)
            .map(|k| {
                let z = k as f64 * 0.5;
                VariancePoint {
                    z_cm: z,
                    sigma2: 2.0 * c * c * z * z,
                    error: None,
                }
            })
            .collect();
        let f = ballistic_fit(&VarianceCurve::new(Axis::Chain, pts).unwrap()).unwrap();
        assert!((f.slope - 2f64.sqrt() * c).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);

        let flat = (1..=4)
            .map(|k| VariancePoint {
                z_cm: k as f64,
                sigma2: 3.0,
                error: None,
            })
            .collect();
        let f = ballistic_fit(&VarianceCurve::new(Axis::Chain, flat).unwrap()).unwrap();
        assert_eq!(f.r_squared, 0.0);

        let two = (1..=2)
            .map(|k| VariancePoint {
                z_cm: k as f64,
                sigma2: 1.0,
                error: None,
            })
            .collect();
        assert!(ballistic_fit(&VarianceCurve::new(Axis::Chain, two).unwrap()).is_err());
    }

    #[test]
    fn curve_invariants_and_csv() {
        let bad = vec![
            VariancePoint {
                z_cm: 1.0,
                sigma2: 1.0,
                error: None,
            },
            VariancePoint {
                z_cm: 1.0,
                sigma2: 2.0,
                error: None,
            },
        ];
        assert!(VarianceCurve::new(Axis::Chain, bad).is_err());
        let neg = vec![VariancePoint {
            z_cm: 1.0,
            sigma2: -1.0,
            error: None,
        }];
        assert!(VarianceCurve::new(Axis::Chain, neg).is_err());
        let ok = VarianceCurve::new(
            Axis::Vertical,
            vec![
                VariancePoint {
                    z_cm: 1.0,
                    sigma2: 0.5,
                    error: Some(0.1),
                },
                VariancePoint {
                    z_cm: 2.0,
                    sigma2: 2.0,
                    error: None,
                },
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        ok.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "z,sigma2,error,axis\n1,0.5,0.1,vertical\n2,2,,vertical\n"
        );
    }
}
