//! JSON run configuration. Relative paths resolve against the config file's
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use dynloc_core::{
    build_lattice_1d, build_lattice_triangular, BackgroundStrategy, CouplingModel,
    CurvatureProfile, Dimension, Lattice, PhysicalParams, SpacingClass, SyntheticSource,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub params: PhysicalParams,
    pub lattice: LatticeSpec,
    #[serde(default = "straight")]
    pub profile: CurvatureProfile,
    /// Falls back to the exponential law when absent.
    #[serde(default)]
    pub coupling: Option<CouplingModel>,
    #[serde(default)]
    pub scan: Option<ScanSpec>,
    /// Defaults to the lattice centre.
    #[serde(default)]
    pub injection: Option<usize>,
    #[serde(default)]
    pub evolver: Evolver,
    /// Coupled-mode step; defaults to the integrator's own choice.
    #[serde(default)]
    pub dz_cm: Option<f64>,
    #[serde(default)]
    pub localization: Option<LocalizationSpec>,
    #[serde(default)]
    pub segments: Option<Vec<SegmentSpec>>,
    #[serde(default)]
    pub gstats: Option<GstatsSpec>,
    #[serde(default)]
    pub ingest: Option<IngestSpec>,
}

fn straight() -> CurvatureProfile {
    CurvatureProfile::Straight
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatticeSpec {
    Chain { sites: usize },
    Triangular { shells: usize },
    File { path: PathBuf },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanSpec {
    ZCm(Vec<f64>),
    /// `steps` evenly spaced points from `start` to `stop` inclusive.
    Range {
        start: f64,
        stop: f64,
        steps: usize,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evolver {
    #[default]
    Static,
    CoupledMode,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizationSpec {
    pub amplitudes_um: Vec<f64>,
    pub period_cm: f64,
    pub z_cm: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub profile: CurvatureProfile,
    pub length_cm: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GstatsSpec {
    /// Raw coincidence counts, CSV `label,n_x,n_y,n_xy,T,tau`.
    Counts {
        path: PathBuf,
        #[serde(default)]
        labels: Option<TestLabels>,
    },
    /// Quoted values, CSV `label,g,stddev`.
    GValues {
        path: PathBuf,
        #[serde(default)]
        labels: Option<TestLabels>,
    },
    /// Seeded simulation of `trials` independent runs.
    Synthetic {
        source: SyntheticSource,
        total_time_s: f64,
        window_s: f64,
        trials: usize,
    },
}

/// Record labels feeding the Cauchy-Schwarz test.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestLabels {
    pub ec: String,
    pub ee: String,
    pub cc: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSpec {
    pub frames: Vec<PathBuf>,
    pub mask: PathBuf,
    #[serde(default)]
    pub strategies: Option<Vec<BackgroundStrategy>>,
}

/// A parsed config together with the directory its relative paths hang off.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: RunConfig,
    pub base: PathBuf,
}

impl Loaded {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = parse(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, base })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn lattice(&self) -> CliResult<Lattice> {
        let d = self.config.params.d_um;
        let built = match &self.config.lattice {
            LatticeSpec::Chain { sites } => build_lattice_1d(*sites, d),
            LatticeSpec::Triangular { shells } => build_lattice_triangular(*shells, d),
            LatticeSpec::File { path } => {
                let path = self.resolve(path);
                let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                let lattice = Lattice::from_json(&text).map_err(|source| CliError::Input {
                    path: path.clone(),
                    source,
                })?;
                if (lattice.d_um() - d).abs() > 1e-9 * d {
                    return Err(CliError::config(
                        "lattice.path",
                        format!(
                            "lattice file spacing {} µm disagrees with params.d_um {d}",
                            lattice.d_um()
                        ),
                    ));
                }
                return Ok(lattice);
            }
        };
        built.map_err(|e| CliError::config("lattice", e.to_string()))
    }
}

/// Deserialize with field paths in error messages, then check invariants.
pub fn parse(text: &str) -> CliResult<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(
            if path == "." { "<root>".into() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn coupling_model(&self) -> CouplingModel {
        self.coupling.clone().unwrap_or_default()
    }

    /// Nearest-neighbour coupling of the model, the C0 of a chain.
    pub fn c0(&self) -> CliResult<f64> {
        self.coupling_model()
            .base(SpacingClass::D, self.params.d_um)
            .map_err(|e| CliError::config("coupling", e.to_string()))
    }

    pub fn validate(&self) -> CliResult<()> {
        self.params
            .validate()
            .map_err(|e| CliError::config("params", e.to_string()))?;
        self.profile
            .validate()
            .map_err(|e| CliError::config("profile", e.to_string()))?;
        if let Some(m) = &self.coupling {
            m.validate()
                .map_err(|e| CliError::config("coupling", e.to_string()))?;
        }
        if let Some(dz) = self.dz_cm {
            if !(dz > 0.0) || !dz.is_finite() {
                return Err(CliError::config("dz_cm", format!("must be > 0, got {dz}")));
            }
        }
        if let Some(scan) = &self.scan {
            scan.values()?;
        }
        if let Some(loc) = &self.localization {
            loc.validate()?;
        }
        if let Some(segments) = &self.segments {
            if segments.is_empty() {
                return Err(CliError::config("segments", "needs at least one segment"));
            }
            for (k, s) in segments.iter().enumerate() {
                s.profile.validate().map_err(|e| {
                    CliError::config(format!("segments[{k}].profile"), e.to_string())
                })?;
                if !(s.length_cm > 0.0) || !s.length_cm.is_finite() {
                    return Err(CliError::config(
                        format!("segments[{k}].length_cm"),
                        format!("must be > 0, got {}", s.length_cm),
                    ));
                }
            }
        }
        if let Some(GstatsSpec::Synthetic {
            source,
            total_time_s,
            window_s,
            trials,
        }) = &self.gstats
        {
            if *trials == 0 {
                return Err(CliError::config("gstats.trials", "must be >= 1"));
            }
            if !(*window_s > 0.0) || !(*total_time_s >= *window_s) {
                return Err(CliError::config(
                    "gstats",
                    "need 0 < window_s <= total_time_s",
                ));
            }
            if !(source.rate_x_hz >= 0.0)
                || !(source.rate_y_hz >= 0.0)
                || !(0.0..=1.0).contains(&source.pair_prob)
            {
                return Err(CliError::config(
                    "gstats.source",
                    "rates must be >= 0 and pair_prob in [0, 1]",
                ));
            }
        }
        if let Some(ingest) = &self.ingest {
            if ingest.frames.is_empty() {
                return Err(CliError::config(
                    "ingest.frames",
                    "needs at least one frame",
                ));
            }
            if let Some(s) = &ingest.strategies {
                if s.len() < 2 {
                    return Err(CliError::config(
                        "ingest.strategies",
                        "needs at least two strategies for error bars",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn require_scan(&self) -> CliResult<Vec<f64>> {
        self.scan
            .as_ref()
            .ok_or_else(|| CliError::config("scan", "missing"))?
            .values()
    }

    /// Injection site checked against the lattice.
    pub fn injection_site(&self, lattice: &Lattice) -> CliResult<usize> {
        match self.injection {
            None => Ok(lattice.center_site()),
            Some(s) if s < lattice.len() => Ok(s),
            Some(s) => Err(CliError::config(
                "injection",
                format!("site {s} outside lattice of {} sites", lattice.len()),
            )),
        }
    }

    /// The coupled-mode integrator only handles uniform chains.
    pub fn check_evolver(&self, lattice: &Lattice) -> CliResult<()> {
        if self.evolver == Evolver::CoupledMode && lattice.dimension() != Dimension::OneD {
            return Err(CliError::config(
                "evolver",
                "coupled_mode needs a chain lattice",
            ));
        }
        Ok(())
    }
}

impl ScanSpec {
    /// Non-empty, positive, strictly increasing lengths.
    pub fn values(&self) -> CliResult<Vec<f64>> {
        let (values, field) = match self {
            ScanSpec::ZCm(v) => (v.clone(), "scan.z_cm"),
            ScanSpec::Range { start, stop, steps } => {
                if *steps == 0 {
                    return Err(CliError::config("scan.range.steps", "must be >= 1"));
                }
                if *steps == 1 {
                    (vec![*start], "scan.range")
                } else {
                    let h = (stop - start) / (*steps - 1) as f64;
                    (
                        (0..*steps)
                            .map(|k| {
                                if k + 1 == *steps {
                                    *stop
                                } else {
                                    start + h * k as f64
                                }
                            })
                            .collect(),
                        "scan.range",
                    )
                }
            }
        };
        if values.is_empty() {
            return Err(CliError::config(field, "z list is empty"));
        }
        for (k, z) in values.iter().enumerate() {
            if !(*z > 0.0) || !z.is_finite() {
                return Err(CliError::config(
                    format!("{field}[{k}]"),
                    format!("must be > 0, got {z}"),
                ));
            }
            if k > 0 && !(*z > values[k - 1]) {
                return Err(CliError::config(
                    format!("{field}[{k}]"),
                    "z values must be strictly increasing",
                ));
            }
        }
        Ok(values)
    }
}

impl LocalizationSpec {
    fn validate(&self) -> CliResult<()> {
        if self.amplitudes_um.is_empty() {
            return Err(CliError::config("localization.amplitudes_um", "is empty"));
        }
        for (k, a) in self.amplitudes_um.iter().enumerate() {
            if !(*a >= 0.0) || !a.is_finite() {
                return Err(CliError::config(
                    format!("localization.amplitudes_um[{k}]"),
                    format!("must be >= 0, got {a}"),
                ));
            }
        }
        if !(self.period_cm > 0.0) || !self.period_cm.is_finite() {
            return Err(CliError::config("localization.period_cm", "must be > 0"));
        }
        if !(self.z_cm > 0.0) || !self.z_cm.is_finite() {
            return Err(CliError::config("localization.z_cm", "must be > 0"));
        }
        Ok(())
    }
}
