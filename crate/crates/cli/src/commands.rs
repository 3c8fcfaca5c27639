//! Subcommand drivers. Every output is a pure function of the config and the
//! seed: grid points run in parallel but results are collected in grid order
//! and written from one thread.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dynloc_core::coupled_mode::default_step;
use dynloc_core::frame::write_probability_csv;
use dynloc_core::photon::{read_g2_values, LabelledG2};
use dynloc_core::{
    ballistic_fit, build_hamiltonian, cauchy_schwarz_violation, effective_coupling_general,
    effective_coupling_sinusoidal, estimate_background, evolve_piecewise_trace,
    extract_probabilities, g2, integrate_coupled_mode_sampled, load_frame, localizing_amplitude,
    normalized_frequency, probability_distribution, variance, variance_with_errorbars, Axis,
    BackgroundStrategy, BallisticFit, CountRecord, CurvatureProfile, Dimension, Error, G2Value,
    Lattice, Mask, ProbabilityField, SpectralPropagator, StateVector, VarianceCurve, VariancePoint,
    VarianceReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Evolver, GstatsSpec, Loaded, RunConfig, TestLabels};
use crate::error::{CliError, CliResult};

/// Largest tolerated |‖ψ‖ − 1| for a spectral evolution.
const NORM_TOL: f64 = 1e-9;

pub struct Run {
    pub loaded: Loaded,
    pub out: PathBuf,
    pub seed: u64,
}

impl Run {
    fn config(&self) -> &RunConfig {
        &self.loaded.config
    }

    fn write(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.out.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn write_rows<T: Serialize>(&self, name: &str, rows: &[T]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(Error::from)?;
        }
        self.write(
            name,
            &w.into_inner()
                .map_err(|e| CliError::io(&self.out.join(name), e.into_error()))?,
        )
    }

    fn write_field(&self, name: &str, lattice: &Lattice, p: &ProbabilityField) -> CliResult<()> {
        let rows: Vec<SiteRow> = lattice
            .sites()
            .iter()
            .zip(p.values())
            .map(|(s, &probability)| SiteRow {
                site_id: s.id,
                x: s.x,
                y: s.y,
                probability,
            })
            .collect();
        self.write_rows(name, &rows)
    }

    /// States at each length in `zs` for the configured evolver.
    fn evolve(
        &self,
        lattice: &Lattice,
        profile: &CurvatureProfile,
        psi0: &StateVector,
        zs: &[f64],
    ) -> CliResult<Vec<StateVector>> {
        let c = self.config();
        match c.evolver {
            Evolver::Static => {
                let h = build_hamiltonian(lattice, &c.coupling_model(), profile, &c.params)?;
                let prop = SpectralPropagator::new(&h);
                let states = zs
                    .par_iter()
                    .map(|&z| prop.propagate(psi0, z))
                    .collect::<Result<Vec<_>, _>>()?;
                for (z, psi) in zs.iter().zip(&states) {
                    check_norm(psi, *z)?;
                }
                Ok(states)
            }
            Evolver::CoupledMode => {
                let c0 = c.c0()?;
                let dz = c.dz_cm.unwrap_or_else(|| default_step(profile, c0));
                Ok(integrate_coupled_mode_sampled(c0, profile, &c.params, psi0, zs, dz)?.states)
            }
        }
    }

    fn prepare(&self) -> CliResult<(Lattice, usize, StateVector)> {
        let lattice = self.loaded.lattice()?;
        self.config().check_evolver(&lattice)?;
        let site = self.config().injection_site(&lattice)?;
        let psi0 = StateVector::localized(lattice.len(), site)?;
        Ok((lattice, site, psi0))
    }
}

fn check_norm(psi: &StateVector, z: f64) -> CliResult<()> {
    let defect = (psi.norm() - 1.0).abs();
    if defect > NORM_TOL {
        return Err(Error::Accuracy(format!("norm defect {defect:e} at z = {z} cm")).into());
    }
    Ok(())
}

fn axes(lattice: &Lattice) -> Vec<Axis> {
    match lattice.dimension() {
        Dimension::OneD => vec![Axis::Chain],
        Dimension::TwoD => vec![Axis::Horizontal, Axis::Vertical],
    }
}

fn variances(
    p: &ProbabilityField,
    lattice: &Lattice,
    origin: usize,
) -> CliResult<BTreeMap<&'static str, f64>> {
    axes(lattice)
        .into_iter()
        .map(|a| Ok((a.as_str(), variance(p, lattice, a, origin)?)))
        .collect()
}

fn profile_kind(p: &CurvatureProfile) -> &'static str {
    match p {
        CurvatureProfile::Straight => "straight",
        CurvatureProfile::Sinusoidal { .. } => "sinusoidal",
        CurvatureProfile::Sampled(_) => "sampled",
    }
}

#[derive(Serialize)]
struct SiteRow {
    site_id: usize,
    x: f64,
    y: f64,
    probability: f64,
}

#[derive(Serialize)]
struct LatticeSummary {
    dimension: Dimension,
    sites: usize,
    bonds: usize,
    fingerprint: String,
}

impl LatticeSummary {
    fn of(l: &Lattice) -> Self {
        Self {
            dimension: l.dimension(),
            sites: l.len(),
            bonds: l.bonds().len(),
            fingerprint: format!("{:016x}", l.fingerprint()),
        }
    }
}

#[derive(Serialize)]
struct SimulateOutput {
    z_cm: f64,
    file: String,
    norm: f64,
    sigma2: BTreeMap<&'static str, f64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    name: Option<&'a str>,
    seed: u64,
    lattice: LatticeSummary,
    params: &'a dynloc_core::PhysicalParams,
    profile: &'a CurvatureProfile,
    coupling: dynloc_core::CouplingModel,
    evolver: Evolver,
    injection: usize,
    outputs: Vec<SimulateOutput>,
}

/// Probability CSV per scan length plus `manifest.json`.
pub fn simulate(run: &Run) -> CliResult<()> {
    let c = run.config();
    let zs = c.require_scan()?;
    let (lattice, site, psi0) = run.prepare()?;
    let states = run.evolve(&lattice, &c.profile, &psi0, &zs)?;
    let mut outputs = Vec::with_capacity(zs.len());
    for (k, (z, psi)) in zs.iter().zip(&states).enumerate() {
        let p = probability_distribution(psi)?;
        let file = format!("probability_{k:03}.csv");
        run.write_field(&file, &lattice, &p)?;
        outputs.push(SimulateOutput {
            z_cm: *z,
            file,
            norm: psi.norm(),
            sigma2: variances(&p, &lattice, site)?,
        });
    }
    run.write_json(
        "manifest.json",
        &Manifest {
            command: "simulate",
            name: c.name.as_deref(),
            seed: run.seed,
            lattice: LatticeSummary::of(&lattice),
            params: &c.params,
            profile: &c.profile,
            coupling: c.coupling_model(),
            evolver: c.evolver,
            injection: site,
            outputs,
        },
    )
}

#[derive(Serialize)]
struct VarianceRow {
    z: f64,
    sigma2: f64,
    sigma2_straight: f64,
    ratio: Option<f64>,
    sigma2_analytic: Option<f64>,
    axis: &'static str,
}

#[derive(Serialize)]
struct AxisFit {
    axis: &'static str,
    file: String,
    curved: Option<BallisticFit>,
    straight: Option<BallisticFit>,
}

fn fit(axis: Axis, zs: &[f64], sigma2: &[f64]) -> CliResult<Option<BallisticFit>> {
    if zs.len() < 3 {
        return Ok(None);
    }
    let pts = zs
        .iter()
        .zip(sigma2)
        .map(|(&z_cm, &s)| VariancePoint {
            z_cm,
            sigma2: s,
            error: None,
        })
        .collect();
    Ok(Some(ballistic_fit(&VarianceCurve::new(axis, pts)?)?))
}

/// Variance against z for the configured profile and a straight reference,
/// one CSV per axis, plus ballistic fits. Chains also get σ² = 2C_eff²z².
pub fn variance_scan(run: &Run) -> CliResult<()> {
    let c = run.config();
    let zs = c.require_scan()?;
    let (lattice, site, psi0) = run.prepare()?;
    let curved = run.evolve(&lattice, &c.profile, &psi0, &zs)?;
    let straight = if c.profile.is_straight() {
        curved.clone()
    } else {
        run.evolve(&lattice, &CurvatureProfile::Straight, &psi0, &zs)?
    };
    let c_eff = match lattice.dimension() {
        Dimension::OneD => {
            let omega = normalized_frequency(&c.params, c.params.d_um)?;
            Some(effective_coupling_general(c.c0()?, &c.profile, omega)?.value)
        }
        Dimension::TwoD => None,
    };
    let mut fits = Vec::new();
    for axis in axes(&lattice) {
        let sig = |states: &[StateVector]| -> CliResult<Vec<f64>> {
            states
                .iter()
                .map(|psi| {
                    Ok(variance(
                        &probability_distribution(psi)?,
                        &lattice,
                        axis,
                        site,
                    )?)
                })
                .collect()
        };
        let (sc, ss) = (sig(&curved)?, sig(&straight)?);
        let rows: Vec<VarianceRow> = (0..zs.len())
            .map(|k| VarianceRow {
                z: zs[k],
                sigma2: sc[k],
                sigma2_straight: ss[k],
                ratio: (ss[k] > 0.0).then(|| sc[k] / ss[k]),
                sigma2_analytic: c_eff.map(|ce| 2.0 * ce * ce * zs[k] * zs[k]),
                axis: axis.as_str(),
            })
            .collect();
        let file = format!("variance_{}.csv", axis.as_str());
        run.write_rows(&file, &rows)?;
        fits.push(AxisFit {
            axis: axis.as_str(),
            file,
            curved: fit(axis, &zs, &sc)?,
            straight: fit(axis, &zs, &ss)?,
        });
    }
    run.write_json("fits.json", &fits)
}

#[derive(Serialize)]
struct LocalizationRow {
    #[serde(rename = "A_um")]
    a_um: f64,
    factor: f64,
    c_eff: f64,
    return_probability: f64,
}

#[derive(Serialize)]
struct LocalizationSummary {
    omega: f64,
    period_cm: f64,
    z_cm: f64,
    localizing_amplitude_um: f64,
    /// Grid amplitude with the smallest |factor|.
    min_factor_amplitude_um: f64,
    min_factor: f64,
}

/// Effective coupling and return probability across an amplitude grid.
/// The factor is that of a bond at spacing d along the bending direction.
pub fn localization_scan(run: &Run) -> CliResult<()> {
    let c = run.config();
    let spec = c
        .localization
        .as_ref()
        .ok_or_else(|| CliError::config("localization", "missing"))?;
    let (lattice, site, psi0) = run.prepare()?;
    let omega = normalized_frequency(&c.params, c.params.d_um)?;
    let c0 = c.c0()?;
    let rows = spec
        .amplitudes_um
        .par_iter()
        .map(|&a| {
            let e = effective_coupling_sinusoidal(c0, omega, a, spec.period_cm)?;
            let profile = CurvatureProfile::sinusoidal(a, spec.period_cm)?;
            let psi = run
                .evolve(&lattice, &profile, &psi0, &[spec.z_cm])?
                .pop()
                .expect("one length requested");
            let p = probability_distribution(&psi)?;
            Ok(LocalizationRow {
                a_um: a,
                factor: e.modulation_factor,
                c_eff: e.value,
                return_probability: p.values()[site],
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    run.write_rows("localization.csv", &rows)?;
    let best = rows
        .iter()
        .min_by(|x, y| x.factor.abs().total_cmp(&y.factor.abs()))
        .expect("non-empty grid");
    run.write_json(
        "localization.json",
        &LocalizationSummary {
            omega,
            period_cm: spec.period_cm,
            z_cm: spec.z_cm,
            localizing_amplitude_um: localizing_amplitude(omega, spec.period_cm)?,
            min_factor_amplitude_um: best.a_um,
            min_factor: best.factor,
        },
    )
}

#[derive(Serialize)]
struct SegmentOutput {
    index: usize,
    kind: &'static str,
    length_cm: f64,
    z_end_cm: f64,
    file: String,
    sigma2: BTreeMap<&'static str, f64>,
}

#[derive(Serialize)]
struct MemoryReport {
    segments: Vec<SegmentOutput>,
    /// Total length of the straight segments.
    reference_length_cm: f64,
    reference_sigma2: BTreeMap<&'static str, f64>,
    /// (final − reference) / reference per axis.
    relative_difference: BTreeMap<&'static str, Option<f64>>,
    /// Distance between the output and the distribution entering the last segment.
    last_segment_tv: f64,
}

/// Piecewise array: distributions at every segment boundary and the final
/// variance against a straight array as long as the straight segments.
pub fn memory(run: &Run) -> CliResult<()> {
    let c = run.config();
    let segments = c
        .segments
        .as_ref()
        .ok_or_else(|| CliError::config("segments", "missing"))?;
    if c.evolver != Evolver::Static {
        return Err(CliError::config(
            "evolver",
            "composite arrays use the static evolver",
        ));
    }
    let (lattice, site, psi0) = run.prepare()?;
    let model = c.coupling_model();
    let parts = segments
        .iter()
        .map(|s| {
            Ok((
                build_hamiltonian(&lattice, &model, &s.profile, &c.params)?,
                s.length_cm,
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let trace = evolve_piecewise_trace(&parts, &psi0)?;
    let mut z = 0.0;
    let mut outputs = Vec::with_capacity(segments.len());
    let mut fields = Vec::with_capacity(segments.len());
    for (k, (s, psi)) in segments.iter().zip(&trace).enumerate() {
        z += s.length_cm;
        check_norm(psi, z)?;
        let p = probability_distribution(psi)?;
        let file = format!("boundary_{k:02}.csv");
        run.write_field(&file, &lattice, &p)?;
        outputs.push(SegmentOutput {
            index: k,
            kind: profile_kind(&s.profile),
            length_cm: s.length_cm,
            z_end_cm: z,
            file,
            sigma2: variances(&p, &lattice, site)?,
        });
        fields.push(p);
    }
    let reference_length_cm: f64 = segments
        .iter()
        .filter(|s| s.profile.is_straight())
        .map(|s| s.length_cm)
        .sum();
    let reference = if reference_length_cm > 0.0 {
        let h = build_hamiltonian(&lattice, &model, &CurvatureProfile::Straight, &c.params)?;
        SpectralPropagator::new(&h).propagate(&psi0, reference_length_cm)?
    } else {
        psi0.clone()
    };
    let reference_sigma2 = variances(&probability_distribution(&reference)?, &lattice, site)?;
    let last = &outputs.last().expect("at least one segment").sigma2;
    let relative_difference = reference_sigma2
        .iter()
        .map(|(axis, r)| (*axis, (*r > 0.0).then(|| (last[axis] - r) / r)))
        .collect();
    let before_last = if fields.len() > 1 {
        fields[fields.len() - 2].clone()
    } else {
        probability_distribution(&psi0)?
    };
    let last_segment_tv = fields
        .last()
        .expect("at least one segment")
        .total_variation(&before_last)?;
    run.write_json(
        "memory.json",
        &MemoryReport {
            segments: outputs,
            reference_length_cm,
            reference_sigma2,
            relative_difference,
            last_segment_tv,
        },
    )
}

#[derive(Serialize)]
struct G2Row {
    label: Option<String>,
    g: f64,
    stddev: Option<f64>,
}

#[derive(Serialize)]
struct ViolationReport {
    ec: String,
    ee: String,
    cc: String,
    statistic: f64,
    delta_total: f64,
    n_sigma: f64,
}

#[derive(Serialize)]
struct GstatsReport {
    records: Vec<G2Row>,
    cauchy_schwarz: Option<ViolationReport>,
}

#[derive(Serialize)]
struct SyntheticReport {
    seed: u64,
    trials: usize,
    g: Vec<G2Row>,
    mean: f64,
    /// Standard error of the mean.
    standard_error: f64,
    /// Trials whose g lies within 3 of its own stddev of 1.
    within_three_sigma: usize,
}

fn violation(rows: &[G2Row], labels: Option<&TestLabels>) -> CliResult<Option<ViolationReport>> {
    let default = TestLabels {
        ec: "ec".into(),
        ee: "ee".into(),
        cc: "cc".into(),
    };
    let find = |l: &str| rows.iter().find(|r| r.label.as_deref() == Some(l));
    let explicit = labels.is_some();
    let labels = labels.unwrap_or(&default);
    let (ec, ee, cc) = match (find(&labels.ec), find(&labels.ee), find(&labels.cc)) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ if explicit => {
            return Err(CliError::config(
                "gstats.labels",
                "a labelled record is missing from the input",
            ))
        }
        _ => return Ok(None),
    };
    let g = |r: &G2Row| G2Value {
        value: r.g,
        stddev: r.stddev,
    };
    let cs = cauchy_schwarz_violation(g(ec), g(ee), g(cc))?;
    Ok(Some(ViolationReport {
        ec: labels.ec.clone(),
        ee: labels.ee.clone(),
        cc: labels.cc.clone(),
        statistic: cs.statistic,
        delta_total: cs.delta_total,
        n_sigma: cs.n_sigma,
    }))
}

fn read_input<T>(
    path: &Path,
    parse: impl FnOnce(fs::File) -> dynloc_core::Result<T>,
) -> CliResult<T> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse(file).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

/// g⁽²⁾ per record and, when the three labels are present, the
/// Cauchy-Schwarz significance. Synthetic runs are seeded per trial.
pub fn gstats(run: &Run) -> CliResult<()> {
    let spec = run
        .config()
        .gstats
        .as_ref()
        .ok_or_else(|| CliError::config("gstats", "missing"))?;
    match spec {
        GstatsSpec::Counts { path, labels } => {
            let records: Vec<CountRecord> = read_input(
                &run.loaded.resolve(path),
                dynloc_core::photon::read_count_records,
            )?;
            let rows = records
                .iter()
                .map(|r| {
                    let g = g2(r)?;
                    Ok(G2Row {
                        label: r.label.clone(),
                        g: g.value,
                        stddev: g.stddev,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            let cauchy_schwarz = violation(&rows, labels.as_ref())?;
            run.write_json(
                "gstats.json",
                &GstatsReport {
                    records: rows,
                    cauchy_schwarz,
                },
            )
        }
        GstatsSpec::GValues { path, labels } => {
            let values: Vec<LabelledG2> = read_input(&run.loaded.resolve(path), read_g2_values)?;
            let rows: Vec<G2Row> = values
                .into_iter()
                .map(|v| G2Row {
                    label: Some(v.label),
                    g: v.g,
                    stddev: Some(v.stddev),
                })
                .collect();
            let cauchy_schwarz = violation(&rows, labels.as_ref())?;
            run.write_json(
                "gstats.json",
                &GstatsReport {
                    records: rows,
                    cauchy_schwarz,
                },
            )
        }
        GstatsSpec::Synthetic {
            source,
            total_time_s,
            window_s,
            trials,
        } => {
            let g = (0..*trials as u64)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(run.seed.wrapping_add(k));
                    let v = g2(&source.sample(*total_time_s, *window_s, &mut rng)?)?;
                    Ok(G2Row {
                        label: Some(format!("trial-{k}")),
                        g: v.value,
                        stddev: v.stddev,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            let n = g.len() as f64;
            let mean = g.iter().map(|r| r.g).sum::<f64>() / n;
            let var = if g.len() > 1 {
                g.iter().map(|r| (r.g - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let within_three_sigma = g
                .iter()
                .filter(|r| r.stddev.is_some_and(|s| (r.g - 1.0).abs() <= 3.0 * s))
                .count();
            run.write_json(
                "gstats.json",
                &SyntheticReport {
                    seed: run.seed,
                    trials: *trials,
                    g,
                    mean,
                    standard_error: (var / n).sqrt(),
                    within_three_sigma,
                },
            )
        }
    }
}

#[derive(Serialize)]
struct FrameReport {
    frame: String,
    probabilities: String,
    /// Mean of the strategy estimates; used for the written distribution.
    background: f64,
    variance: BTreeMap<&'static str, VarianceReport>,
}

/// Per-frame probability CSVs and variance reports with error bars from the
/// spread across background strategies.
pub fn ingest(run: &Run) -> CliResult<()> {
    let spec = run
        .config()
        .ingest
        .as_ref()
        .ok_or_else(|| CliError::config("ingest", "missing"))?;
    let lattice = run.loaded.lattice()?;
    let site = run.config().injection_site(&lattice)?;
    let mask_path = run.loaded.resolve(&spec.mask);
    let text = fs::read_to_string(&mask_path).map_err(|e| CliError::io(&mask_path, e))?;
    let mask = Mask::from_json(&text).map_err(|source| CliError::Input {
        path: mask_path.clone(),
        source,
    })?;
    mask.check_lattice(&lattice)
        .map_err(|e| CliError::config("ingest.mask", e.to_string()))?;
    let strategies = spec
        .strategies
        .clone()
        .unwrap_or_else(|| match lattice.dimension() {
            Dimension::OneD => BackgroundStrategy::default_1d(),
            Dimension::TwoD => BackgroundStrategy::default_2d(),
        });
    let results = spec
        .frames
        .par_iter()
        .map(|rel| {
            let path = run.loaded.resolve(rel);
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let input = |source| CliError::Input {
                path: path.clone(),
                source,
            };
            let frame = load_frame(&text).map_err(input)?;
            mask.check_frame(&frame).map_err(input)?;
            let background = strategies
                .iter()
                .map(|s| estimate_background(&frame, s))
                .sum::<dynloc_core::Result<f64>>()
                .map_err(input)?
                / strategies.len() as f64;
            let p = extract_probabilities(&frame, &mask, background)?;
            let variance = axes(&lattice)
                .into_iter()
                .map(|a| {
                    Ok((
                        a.as_str(),
                        variance_with_errorbars(&frame, &mask, &lattice, &strategies, a, site)?,
                    ))
                })
                .collect::<CliResult<BTreeMap<_, _>>>()?;
            Ok((rel.display().to_string(), p, background, variance))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut reports = Vec::with_capacity(results.len());
    for (k, (frame, p, background, variance)) in results.into_iter().enumerate() {
        let file = format!("frame_{k:03}_probability.csv");
        let mut buf = Vec::new();
        write_probability_csv(&p, &mut buf)?;
        run.write(&file, &buf)?;
        reports.push(FrameReport {
            frame,
            probabilities: file,
            background,
            variance,
        });
    }
    run.write_json("ingest.json", &reports)
}
