//! Tight-binding Hamiltonians and unitary propagation |ψ(z)⟩ = e^{−iHz}|ψ(0)⟩.
//!
//! Propagation uses the Hermitian eigendecomposition of H, so one
//! decomposition serves every propagation length in a scan. A Taylor
//! scaling-and-squaring exponential is kept alongside as a cross-check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::{bond_coupling, CouplingModel};
use crate::error::{domain, Error, Result};
use crate::lattice::{Bond, Lattice, PhysicalParams};
use crate::profile::CurvatureProfile;

/// Dense Hermitian coupling matrix over lattice sites, in cm⁻¹.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix {
    entries: DMatrix<Complex64>,
    lattice_key: Option<u64>,
}

impl HamiltonianMatrix {
    /// Wrap an arbitrary matrix after checking it is Hermitian.
    pub fn from_hermitian(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(domain("Hamiltonian must be a non-empty square matrix"));
        }
        let scale = entries.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let n = entries.nrows();
        for i in 0..n {
            for j in i..n {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(domain(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            entries,
            lattice_key: None,
        })
    }

    /// Build H = Σ β_i |i⟩⟨i| + Σ_bonds C_ij (|i⟩⟨j| + |j⟩⟨i|) with a
    /// caller-supplied coupling per bond.
    pub fn from_bonds(
        lattice: &Lattice,
        beta: &[f64],
        mut coupling: impl FnMut(&Bond) -> Result<f64>,
    ) -> Result<Self> {
        let n = lattice.len();
        if beta.len() != n {
            return Err(domain(format!(
                "beta has {} entries for {n} sites",
                beta.len()
            )));
        }
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for (i, b) in beta.iter().enumerate() {
            h[(i, i)] = Complex64::new(*b, 0.0);
        }
        for bond in lattice.bonds() {
            let c = Complex64::new(coupling(bond)?, 0.0);
            h[(bond.i, bond.j)] = c;
            h[(bond.j, bond.i)] = c;
        }
        Ok(Self {
            entries: h,
            lattice_key: Some(lattice.fingerprint()),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn beta(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn lattice_key(&self) -> Option<u64> {
        self.lattice_key
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// H + shift·I.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim() {
            out.entries[(i, i)] += Complex64::new(shift, 0.0);
        }
        out
    }

    /// max |H_ij − H_ji*|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn same_lattice(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && match (self.lattice_key, other.lattice_key) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            }
    }
}

/// Hamiltonian of a lattice whose bonds carry effective couplings for the
/// given bending profile; β = 0 on every site.
pub fn build_hamiltonian(
    lattice: &Lattice,
    model: &CouplingModel,
    profile: &CurvatureProfile,
    params: &PhysicalParams,
) -> Result<HamiltonianMatrix> {
    build_hamiltonian_with_beta(lattice, model, profile, params, &vec![0.0; lattice.len()])
}

pub fn build_hamiltonian_with_beta(
    lattice: &Lattice,
    model: &CouplingModel,
    profile: &CurvatureProfile,
    params: &PhysicalParams,
    beta: &[f64],
) -> Result<HamiltonianMatrix> {
    if lattice.is_empty() {
        return Err(domain("lattice is empty"));
    }
    params.validate()?;
    profile.validate()?;
    if (params.d_um - lattice.d_um()).abs() > 1e-9 * lattice.d_um() {
        return Err(Error::Config(format!(
            "physical spacing d = {} µm disagrees with lattice spacing {} µm",
            params.d_um,
            lattice.d_um()
        )));
    }
    // Six (spacing, direction) scenarios at most; evaluate each once.
    let mut cache = std::collections::HashMap::new();
    HamiltonianMatrix::from_bonds(lattice, beta, |b| {
        let key = (b.spacing, b.direction);
        if let Some(v) = cache.get(&key) {
            return Ok(*v);
        }
        let v = bond_coupling(model, params, profile, b.spacing, b.direction)?.value;
        cache.insert(key, v);
        Ok(v)
    })
}

/// Complex amplitudes per site at propagation length `z_cm`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amplitudes: DVector<Complex64>,
    pub z_cm: f64,
}

impl StateVector {
    /// All amplitude on `site`.
    pub fn localized(n: usize, site: usize) -> Result<Self> {
        if site >= n {
            return Err(domain(format!(
                "injection site {site} outside lattice of {n} sites"
            )));
        }
        let mut a = DVector::zeros(n);
        a[site] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes: a,
            z_cm: 0.0,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        Self {
            amplitudes: DVector::from_vec(amplitudes),
            z_cm: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Site occupation probabilities, normalised to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityField {
    p: Vec<f64>,
}

impl ProbabilityField {
    /// Normalise non-negative weights into a distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(domain(
                "probability weights must be finite and non-negative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(domain("probability weights sum to zero"));
        }
        Ok(Self {
            p: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// ½ Σ |p_i − q_i|.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(domain("distributions have different lengths"));
        }
        Ok(0.5
            * self
                .p
                .iter()
                .zip(&other.p)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

/// p_i = |ψ_i|², renormalised.
pub fn probability_distribution(psi: &StateVector) -> Result<ProbabilityField> {
    ProbabilityField::from_weights(psi.amplitudes.iter().map(|a| a.norm_sqr()).collect())
        .map_err(|_| domain("cannot form a distribution from a zero state"))
}

enum Basis {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// Eigendecomposition of a Hamiltonian, reusable for any propagation length.
pub struct SpectralPropagator {
    eigenvalues: DVector<f64>,
    basis: Basis,
}

impl SpectralPropagator {
    pub fn new(h: &HamiltonianMatrix) -> Self {
        let (eigenvalues, basis) = if h.is_real() {
            let re = h.entries.map(|z| z.re);
            let eig = re.symmetric_eigen();
            (eig.eigenvalues, Basis::Real(eig.eigenvectors))
        } else {
            let eig = h.entries.clone().symmetric_eigen();
            (eig.eigenvalues, Basis::Complex(eig.eigenvectors))
        };
        Self { eigenvalues, basis }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// e^{−iHz} ψ.
    pub fn propagate(&self, psi: &StateVector, z_cm: f64) -> Result<StateVector> {
        check_length(z_cm)?;
        if psi.len() != self.dim() {
            return Err(domain(format!(
                "state has {} sites, Hamiltonian has {}",
                psi.len(),
                self.dim()
            )));
        }
        let phase = |k: usize| Complex64::from_polar(1.0, -self.eigenvalues[k] * z_cm);
        let amplitudes = match &self.basis {
            Basis::Real(v) => {
                let re = psi.amplitudes.map(|a| a.re);
                let im = psi.amplitudes.map(|a| a.im);
                let c_re = v.tr_mul(&re);
                let c_im = v.tr_mul(&im);
                let mut r = DVector::zeros(self.dim());
                let mut i = DVector::zeros(self.dim());
                for k in 0..self.dim() {
                    let c = Complex64::new(c_re[k], c_im[k]) * phase(k);
                    r[k] = c.re;
                    i[k] = c.im;
                }
                let out_re = v * r;
                let out_im = v * i;
                DVector::from_iterator(
                    self.dim(),
                    out_re
                        .iter()
                        .zip(out_im.iter())
                        .map(|(a, b)| Complex64::new(*a, *b)),
                )
            }
            Basis::Complex(v) => {
                let mut c = v.ad_mul(&psi.amplitudes);
                for k in 0..self.dim() {
                    c[k] *= phase(k);
                }
                v * c
            }
        };
        Ok(StateVector {
            amplitudes,
            z_cm: psi.z_cm + z_cm,
        })
    }

    /// Dense e^{−iHz}.
    pub fn unitary(&self, z_cm: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        let v = match &self.basis {
            Basis::Real(v) => v.map(|x| Complex64::new(x, 0.0)),
            Basis::Complex(v) => v.clone(),
        };
        let mut scaled = v.clone();
        for k in 0..n {
            let ph = Complex64::from_polar(1.0, -self.eigenvalues[k] * z_cm);
            for i in 0..n {
                scaled[(i, k)] *= ph;
            }
        }
        scaled * v.adjoint()
    }
}

fn check_length(z_cm: f64) -> Result<()> {
    if !(z_cm >= 0.0) || !z_cm.is_finite() {
        return Err(domain(format!(
            "propagation length must be finite and >= 0, got {z_cm}"
        )));
    }
    Ok(())
}

/// ψ(z) = e^{−iHz} ψ0.
pub fn evolve_static(h: &HamiltonianMatrix, psi0: &StateVector, z_cm: f64) -> Result<StateVector> {
    if psi0.len() != h.dim() {
        return Err(domain(format!(
            "state has {} sites, Hamiltonian has {}",
            psi0.len(),
            h.dim()
        )));
    }
    SpectralPropagator::new(h).propagate(psi0, z_cm)
}

/// Apply e^{−iH_k z_k} ··· e^{−iH_1 z_1} to ψ0, returning the state after
/// every segment (the last entry is the output).
pub fn evolve_piecewise_trace(
    segments: &[(HamiltonianMatrix, f64)],
    psi0: &StateVector,
) -> Result<Vec<StateVector>> {
    let first = segments
        .first()
        .ok_or_else(|| domain("piecewise evolution needs at least one segment"))?;
    for (h, len) in segments {
        if !first.0.same_lattice(h) {
            return Err(domain("piecewise segments act on different lattices"));
        }
        if !(*len > 0.0) || !len.is_finite() {
            return Err(domain(format!("segment length must be > 0, got {len}")));
        }
    }
    let mut psi = psi0.clone();
    let mut out = Vec::with_capacity(segments.len());
    for (h, len) in segments {
        psi = evolve_static(h, &psi, *len)?;
        out.push(psi.clone());
    }
    Ok(out)
}

pub fn evolve_piecewise(
    segments: &[(HamiltonianMatrix, f64)],
    psi0: &StateVector,
) -> Result<StateVector> {
    Ok(evolve_piecewise_trace(segments, psi0)?
        .pop()
        .expect("at least one segment"))
}

/// e^{−iHz} by Taylor expansion of the scaled exponent followed by repeated
/// squaring. Independent of the eigendecomposition route.
pub fn unitary_scaling_squaring(h: &HamiltonianMatrix, z_cm: f64) -> DMatrix<Complex64> {
    let a = h.entries.map(|x| x * Complex64::new(0.0, -z_cm));
    expm(&a)
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor core.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    while norm1 / 2f64.powi(squarings as i32) > 0.5 {
        squarings += 1;
    }
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice_1d;
    use std::f64::consts::PI;

    fn two_site(c: f64) -> HamiltonianMatrix {
        let l = build_lattice_1d(2, 15.0).unwrap();
        HamiltonianMatrix::from_bonds(&l, &[0.0, 0.0], |_| Ok(c)).unwrap()
    }

    #[test]
    fn zero_length_is_identity() {
        let h = two_site(0.7);
        let psi = StateVector::localized(2, 0).unwrap();
        let out = evolve_static(&h, &psi, 0.0).unwrap();
        assert!((out.amplitudes[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn two_site_rabi() {
        let c = 0.8;
        let h = two_site(c);
        let psi = StateVector::localized(2, 0).unwrap();
        for &z in &[0.1, 0.5, 1.3, 2.0] {
            let p = probability_distribution(&evolve_static(&h, &psi, z).unwrap()).unwrap();
            assert!((p.values()[0] - (c * z).cos().powi(2)).abs() < 1e-12);
            assert!((p.values()[1] - (c * z).sin().powi(2)).abs() < 1e-12);
        }
        let half =
            probability_distribution(&evolve_static(&h, &psi, PI / 4.0 / c).unwrap()).unwrap();
        assert!((half.values()[0] - 0.5).abs() < 1e-12);
        let full =
            probability_distribution(&evolve_static(&h, &psi, PI / 2.0 / c).unwrap()).unwrap();
        assert!(full.values()[0] < 1e-24 + 1e-14 && (full.values()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let h = two_site(1.0);
        let psi = StateVector::localized(3, 0).unwrap();
        assert!(matches!(
            evolve_static(&h, &psi, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(evolve_static(&h, &StateVector::localized(2, 0).unwrap(), -1.0).is_err());
    }

    #[test]
    fn probability_examples() {
        let e2 = StateVector::localized(4, 2).unwrap();
        assert_eq!(
            probability_distribution(&e2).unwrap().values(),
            &[0.0, 0.0, 1.0, 0.0]
        );
        let s = 1.0 / 2f64.sqrt();
        let sup =
            StateVector::from_amplitudes(vec![Complex64::new(s, 0.0), Complex64::new(0.0, s)]);
        let p = probability_distribution(&sup).unwrap();
        assert!((p.values()[0] - 0.5).abs() < 1e-15);
        let zero = StateVector::from_amplitudes(vec![Complex64::new(0.0, 0.0); 3]);
        assert!(probability_distribution(&zero).is_err());
    }

    #[test]
    fn piecewise_rejects_foreign_lattice() {
        let a = two_site(1.0);
        let l3 = build_lattice_1d(3, 15.0).unwrap();
        let b = HamiltonianMatrix::from_bonds(&l3, &[0.0; 3], |_| Ok(1.0)).unwrap();
        let psi = StateVector::localized(2, 0).unwrap();
        assert!(evolve_piecewise(&[(a.clone(), 1.0), (b, 1.0)], &psi).is_err());
        assert!(evolve_piecewise(&[], &psi).is_err());
        assert!(evolve_piecewise(&[(a, 0.0)], &psi).is_err());
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(HamiltonianMatrix::from_hermitian(m).is_err());
    }

    #[test]
    fn expm_of_diagonal() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(1, 1)] = Complex64::new(0.0, 3.0);
        let e = expm(&m);
        assert!((e[(0, 0)] - Complex64::new(1f64.exp(), 0.0)).norm() < 1e-13);
        assert!((e[(1, 1)] - Complex64::from_polar(1.0, 3.0)).norm() < 1e-13);
    }
}
