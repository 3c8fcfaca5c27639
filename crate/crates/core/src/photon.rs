//! Second-order correlations from coincidence counts and the
//! Cauchy–Schwarz test for non-classical light.

use std::io::Read;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Detection counts on two channels over a run of length `total_time_s`,
/// with coincidences taken in windows of `window_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub n_x: u64,
    pub n_y: u64,
    pub n_xy: u64,
    #[serde(rename = "T")]
    pub total_time_s: f64,
    #[serde(rename = "tau")]
    pub window_s: f64,
}

impl CountRecord {
    pub fn new(n_x: u64, n_y: u64, n_xy: u64, total_time_s: f64, window_s: f64) -> Result<Self> {
        let rec = Self {
            label: None,
            n_x,
            n_y,
            n_xy,
            total_time_s,
            window_s,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_s > 0.0) || !self.window_s.is_finite() {
            return Err(domain(format!("window must be > 0, got {}", self.window_s)));
        }
        if !(self.total_time_s >= self.window_s) || !self.total_time_s.is_finite() {
            return Err(domain(format!(
                "total time {} s is shorter than the window",
                self.total_time_s
            )));
        }
        if self.n_xy > self.n_x.min(self.n_y) {
            return Err(domain(format!(
                "coincidences ({}) exceed single-channel counts ({}, {})",
                self.n_xy, self.n_x, self.n_y
            )));
        }
        Ok(())
    }
}

/// g⁽²⁾ with its counting uncertainty. `stddev` is `None` when there were no
/// coincidences, where the relative error is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Value {
    pub value: f64,
    pub stddev: Option<f64>,
}

impl G2Value {
    pub fn new(value: f64, stddev: f64) -> Result<Self> {
        if !(value >= 0.0) || !(stddev >= 0.0) {
            return Err(domain("g2 value and stddev must be >= 0"));
        }
        Ok(Self {
            value,
            stddev: Some(stddev),
        })
    }
}

/// g = N_xy T / (N_x N_y τ), δg = g √(1/N_x + 1/N_y + 1/N_xy).
pub fn g2(rec: &CountRecord) -> Result<G2Value> {
    rec.validate()?;
    if rec.n_x == 0 || rec.n_y == 0 {
        return Err(domain("g2 is undefined with zero single-channel counts"));
    }
    let (nx, ny, nxy) = (rec.n_x as f64, rec.n_y as f64, rec.n_xy as f64);
    let value = nxy * rec.total_time_s / (nx * ny * rec.window_s);
    let stddev = (rec.n_xy > 0).then(|| value * (1.0 / nx + 1.0 / ny + 1.0 / nxy).sqrt());
    Ok(G2Value { value, stddev })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchySchwarz {
    /// g_ec² − g_ee g_cc; positive values violate the classical bound.
    pub statistic: f64,
    pub delta_total: f64,
    pub n_sigma: f64,
}

pub fn cauchy_schwarz_violation(
    g_ec: G2Value,
    g_ee: G2Value,
    g_cc: G2Value,
) -> Result<CauchySchwarz> {
    let sd = |g: G2Value, name: &str| {
        g.stddev
            .ok_or_else(|| domain(format!("{name} has no uncertainty (zero coincidences)")))
    };
    let (s_ec, s_ee, s_cc) = (sd(g_ec, "g_ec")?, sd(g_ee, "g_ee")?, sd(g_cc, "g_cc")?);
    let statistic = g_ec.value * g_ec.value - g_ee.value * g_cc.value;
    let delta_total = ((2.0 * g_ec.value * s_ec).powi(2)
        + (g_ee.value * s_ee).powi(2)
        + (g_cc.value * s_cc).powi(2))
    .sqrt();
    if delta_total == 0.0 {
        return Err(Error::DegenerateUncertainty(
            "combined uncertainty is zero".into(),
        ));
    }
    Ok(CauchySchwarz {
        statistic,
        delta_total,
        n_sigma: statistic / delta_total,
    })
}

/// Read count records from CSV with header `n_x,n_y,n_xy,T,tau` and an
/// optional leading `label` column.
pub fn read_count_records<R: Read>(input: R) -> Result<Vec<CountRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<CountRecord>().enumerate() {
        let line = i + 2;
        let rec = row.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        rec.validate().map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// A quoted g⁽²⁾ value with uncertainty, as read from `label,g,stddev` CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelledG2 {
    pub label: String,
    pub g: f64,
    pub stddev: f64,
}

pub fn read_g2_values<R: Read>(input: R) -> Result<Vec<LabelledG2>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<LabelledG2>().enumerate() {
        let line = i + 2;
        let v = row.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if !(v.g >= 0.0) || !(v.stddev >= 0.0) {
            return Err(Error::Parse {
                line,
                message: "g and stddev must be >= 0".into(),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// Window-level model of a two-channel photon source. In each τ window a
/// correlated pair is emitted with probability `pair_prob` and clicks both
/// channels; independently each channel clicks on background with
/// probability `1 − exp(−rate τ)`. A channel counts at most one click per
/// window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSource {
    pub rate_x_hz: f64,
    pub rate_y_hz: f64,
    pub pair_prob: f64,
}

impl SyntheticSource {
    pub fn uncorrelated(rate_x_hz: f64, rate_y_hz: f64) -> Self {
        Self {
            rate_x_hz,
            rate_y_hz,
            pair_prob: 0.0,
        }
    }

    /// Simulate `T/τ` consecutive non-overlapping windows.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        total_time_s: f64,
        window_s: f64,
        rng: &mut R,
    ) -> Result<CountRecord> {
        if !(self.rate_x_hz >= 0.0)
            || !(self.rate_y_hz >= 0.0)
            || !(0.0..=1.0).contains(&self.pair_prob)
        {
            return Err(domain("rates must be >= 0 and pair probability in [0, 1]"));
        }
        if !(window_s > 0.0) || !(total_time_s >= window_s) {
            return Err(domain("need 0 < tau <= T"));
        }
        let windows = (total_time_s / window_s).floor() as u64;
        let px = -(-self.rate_x_hz * window_s).exp_m1();
        let py = -(-self.rate_y_hz * window_s).exp_m1();
        let (mut nx, mut ny, mut nxy) = (0u64, 0u64, 0u64);
        for _ in 0..windows {
            let pair = self.pair_prob > 0.0 && rng.random_bool(self.pair_prob);
            let x = pair | rng.random_bool(px);
            let y = pair | rng.random_bool(py);
            nx += x as u64;
            ny += y as u64;
            nxy += (x && y) as u64;
        }
        CountRecord::new(nx, ny, nxy, windows as f64 * window_s, window_s)
    }
}
