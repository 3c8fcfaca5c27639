//! Waveguide lattice cross-sections and the physical constants of the array.
//!
//! Site coordinates are in µm. Bonds are stored once per unordered pair and
//! tagged with a spacing class (d, √3d, 2d) and a direction class folded onto
//! the angle to the horizontal bending axis (0°, 30°, 60°, 90°).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative tolerance used when classifying bond lengths and angles.
pub const CLASS_TOL: f64 = 1e-9;

/// Substrate index, photon wavelength and nearest waveguide spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub n0: f64,
    pub lambda_um: f64,
    pub d_um: f64,
}

impl PhysicalParams {
    pub fn new(n0: f64, lambda_um: f64, d_um: f64) -> Result<Self> {
        let p = Self {
            n0,
            lambda_um,
            d_um,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n0 >= 1.0) {
            return Err(domain(format!("n0 must be >= 1, got {}", self.n0)));
        }
        if !(self.lambda_um > 0.0) || !self.lambda_um.is_finite() {
            return Err(domain(format!(
                "lambda must be > 0, got {}",
                self.lambda_um
            )));
        }
        if !(self.d_um > 0.0) || !self.d_um.is_finite() {
            return Err(domain(format!("d must be > 0, got {}", self.d_um)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpacingClass {
    #[serde(rename = "d")]
    D,
    #[serde(rename = "sqrt3d")]
    Sqrt3D,
    #[serde(rename = "2d")]
    TwoD,
}

impl SpacingClass {
    pub const ALL: [SpacingClass; 3] = [SpacingClass::D, SpacingClass::Sqrt3D, SpacingClass::TwoD];

    /// Bond length in units of the nearest spacing d.
    pub fn multiple(self) -> f64 {
        match self {
            SpacingClass::D => 1.0,
            SpacingClass::Sqrt3D => 3f64.sqrt(),
            SpacingClass::TwoD => 2.0,
        }
    }

    pub fn length_um(self, d_um: f64) -> f64 {
        self.multiple() * d_um
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpacingClass::D => "d",
            SpacingClass::Sqrt3D => "sqrt3d",
            SpacingClass::TwoD => "2d",
        }
    }
}

impl fmt::Display for SpacingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DirectionClass {
    #[serde(rename = "h")]
    H,
    #[serde(rename = "h30")]
    H30,
    #[serde(rename = "h60")]
    H60,
    #[serde(rename = "v")]
    V,
}

impl DirectionClass {
    pub const ALL: [DirectionClass; 4] = [
        DirectionClass::H,
        DirectionClass::H30,
        DirectionClass::H60,
        DirectionClass::V,
    ];

    pub fn angle_deg(self) -> f64 {
        match self {
            DirectionClass::H => 0.0,
            DirectionClass::H30 => 30.0,
            DirectionClass::H60 => 60.0,
            DirectionClass::V => 90.0,
        }
    }

    /// |cos θ| with the exact values for the four classes.
    pub fn cos_angle(self) -> f64 {
        match self {
            DirectionClass::H => 1.0,
            DirectionClass::H30 => 3f64.sqrt() / 2.0,
            DirectionClass::H60 => 0.5,
            DirectionClass::V => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DirectionClass::H => "h",
            DirectionClass::H30 => "h30",
            DirectionClass::H60 => "h60",
            DirectionClass::V => "v",
        }
    }
}

impl fmt::Display for DirectionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub spacing: SpacingClass,
    pub direction: DirectionClass,
}

/// Classify a displacement between two sites.
///
/// Angles are folded so that ±θ and θ+180° land in the same class, since only
/// the projection onto the horizontal bending axis matters.
pub fn classify_bond(dx: f64, dy: f64, d_um: f64) -> Result<(SpacingClass, DirectionClass)> {
    let ratio = dx.hypot(dy) / d_um;
    let spacing = SpacingClass::ALL
        .into_iter()
        .find(|s| (ratio - s.multiple()).abs() <= CLASS_TOL * s.multiple())
        .ok_or_else(|| {
            Error::InvalidLattice(format!("bond length {ratio} d is not d, sqrt3 d or 2d"))
        })?;
    let angle = dy.abs().atan2(dx.abs()).to_degrees();
    let direction = DirectionClass::ALL
        .into_iter()
        .find(|c| (angle - c.angle_deg()).abs() <= CLASS_TOL * 90.0)
        .ok_or_else(|| {
            Error::InvalidLattice(format!("bond angle {angle} deg is not 0, 30, 60 or 90"))
        })?;
    Ok((spacing, direction))
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    d: f64,
    dimension: Dimension,
    sites: Vec<Site>,
    bonds: Vec<Bond>,
}

/// An immutable lattice of waveguide sites and their classified bonds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeRepr", into = "LatticeRepr")]
pub struct Lattice {
    d_um: f64,
    dimension: Dimension,
    sites: Vec<Site>,
    bonds: Vec<Bond>,
}

impl TryFrom<LatticeRepr> for Lattice {
    type Error = Error;

    fn try_from(r: LatticeRepr) -> Result<Self> {
        Lattice::from_parts(r.d, r.dimension, r.sites, r.bonds)
    }
}

impl From<Lattice> for LatticeRepr {
    fn from(l: Lattice) -> Self {
        LatticeRepr {
            d: l.d_um,
            dimension: l.dimension,
            sites: l.sites,
            bonds: l.bonds,
        }
    }
}

impl Lattice {
    /// Assemble a lattice from explicit parts, checking every bond against
    /// its stated classes.
    pub fn from_parts(
        d_um: f64,
        dimension: Dimension,
        sites: Vec<Site>,
        bonds: Vec<Bond>,
    ) -> Result<Self> {
        if !(d_um > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "spacing d must be > 0, got {d_um}"
            )));
        }
        if sites.is_empty() {
            return Err(Error::InvalidLattice("lattice has no sites".into()));
        }
        for (k, s) in sites.iter().enumerate() {
            if s.id != k {
                return Err(Error::InvalidLattice(format!(
                    "site ids must be 0..n in order, found {} at {k}",
                    s.id
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for b in &bonds {
            if b.i >= sites.len() || b.j >= sites.len() || b.i == b.j {
                return Err(Error::InvalidLattice(format!(
                    "bond ({}, {}) is out of range",
                    b.i, b.j
                )));
            }
            if !seen.insert((b.i.min(b.j), b.i.max(b.j))) {
                return Err(Error::InvalidLattice(format!(
                    "bond ({}, {}) stored twice",
                    b.i, b.j
                )));
            }
            let (si, sj) = (sites[b.i], sites[b.j]);
            let class = classify_bond(sj.x - si.x, sj.y - si.y, d_um)?;
            if class != (b.spacing, b.direction) {
                return Err(Error::InvalidLattice(format!(
                    "bond ({}, {}) tagged {}/{} but geometry says {}/{}",
                    b.i, b.j, b.spacing, b.direction, class.0, class.1
                )));
            }
        }
        Ok(Self {
            d_um,
            dimension,
            sites,
            bonds,
        })
    }

    pub fn d_um(&self) -> f64 {
        self.d_um
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Site nearest the coordinate origin; ties go to the lowest id.
    pub fn center_site(&self) -> usize {
        let mut best = 0;
        let mut best_r = f64::INFINITY;
        for s in &self.sites {
            let r = s.x.hypot(s.y);
            if r < best_r - 1e-12 {
                best = s.id;
                best_r = r;
            }
        }
        best
    }

    /// Number of bonds touching each site.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.sites.len()];
        for b in &self.bonds {
            deg[b.i] += 1;
            deg[b.j] += 1;
        }
        deg
    }

    /// Key identifying the geometry, used to check that piecewise
    /// segments act on the same lattice.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.d_um.to_bits().hash(&mut h);
        for s in &self.sites {
            s.x.to_bits().hash(&mut h);
            s.y.to_bits().hash(&mut h);
        }
        for b in &self.bonds {
            (b.i, b.j, b.spacing, b.direction).hash(&mut h);
        }
        h.finish()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Horizontal chain of `n_sites` waveguides at spacing `d_um`, centred on x = 0.
pub fn build_lattice_1d(n_sites: usize, d_um: f64) -> Result<Lattice> {
    if n_sites < 2 {
        return Err(Error::InvalidLattice(format!(
            "a chain needs at least 2 sites, got {n_sites}"
        )));
    }
    let offset = (n_sites - 1) as f64 / 2.0;
    let sites = (0..n_sites)
        .map(|k| Site {
            id: k,
            x: (k as f64 - offset) * d_um,
            y: 0.0,
        })
        .collect();
    let bonds = (0..n_sites - 1)
        .map(|k| Bond {
            i: k,
            j: k + 1,
            spacing: SpacingClass::D,
            direction: DirectionClass::H,
        })
        .collect();
    Lattice::from_parts(d_um, Dimension::OneD, sites, bonds)
}

/// Triangular lattice with one nearest-neighbour axis vertical, cut to a
/// hexagonal patch of `radius_shells` shells around the origin.
///
/// Basis vectors are (0, d) and (√3d/2, d/2); bonds are enumerated out to 2d.
pub fn build_lattice_triangular(radius_shells: usize, d_um: f64) -> Result<Lattice> {
    if radius_shells < 1 {
        return Err(Error::InvalidLattice(
            "triangular patch needs at least one shell".into(),
        ));
    }
    let r = radius_shells as i64;
    let half_sqrt3 = 3f64.sqrt() / 2.0;
    let position = |i: i64, j: i64| -> (f64, f64) {
        (
            j as f64 * half_sqrt3 * d_um,
            (i as f64 + 0.5 * j as f64) * d_um,
        )
    };

    let mut index = HashMap::new();
    let mut sites = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            if i.abs().max(j.abs()).max((i + j).abs()) > r {
                continue;
            }
            let (x, y) = position(i, j);
            index.insert((i, j), sites.len());
            sites.push(Site {
                id: sites.len(),
                x,
                y,
            });
        }
    }

    // Integer offsets whose length is d, √3d or 2d.
    let mut offsets = Vec::new();
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            let (x, y) = position(a, b);
            let len = x.hypot(y) / d_um;
            if (a, b) != (0, 0) && len <= 2.0 + CLASS_TOL {
                offsets.push((a, b));
            }
        }
    }

    let mut bonds = Vec::new();
    let mut keys: Vec<_> = index.iter().map(|(k, v)| (*v, *k)).collect();
    keys.sort_unstable();
    for (id, (i, j)) in keys {
        for &(a, b) in &offsets {
            if let Some(&other) = index.get(&(i + a, j + b)) {
                if other > id {
                    let (s, t) = (sites[id], sites[other]);
                    let (spacing, direction) = classify_bond(t.x - s.x, t.y - s.y, d_um)?;
                    bonds.push(Bond {
                        i: id,
                        j: other,
                        spacing,
                        direction,
                    });
                }
            }
        }
    }
    Lattice::from_parts(d_um, Dimension::TwoD, sites, bonds)
}

/// Number of sites in a hexagonal patch with the given shell count.
pub fn triangular_site_count(radius_shells: usize) -> usize {
    3 * radius_shells * (radius_shells + 1) + 1
}
