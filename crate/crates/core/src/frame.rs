//! Camera-frame reduction: ASCII pixel matrices, circular waveguide masks,
//! corner-patch background estimates, and per-site probabilities with
//! background-spread error bars.
//!
//! Pixel (col, row) has its centre at (x, y) = (col, row); row 0 is the top
//! of the frame.

use std::fmt::Write as _;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::evolution::ProbabilityField;
use crate::lattice::Lattice;
use crate::transport::{variance, Axis};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    counts: Vec<u64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, counts: Vec<u64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(domain("frame dimensions must be > 0"));
        }
        if counts.len() != width * height {
            return Err(domain(format!(
                "{} counts for a {width}x{height} frame",
                counts.len()
            )));
        }
        Ok(Self {
            width,
            height,
            counts,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, col: usize, row: usize) -> u64 {
        self.counts[row * self.width + col]
    }

    /// Rows of single-space separated integers, each ended by a newline.
    pub fn dump(&self) -> String {
        let mut s = String::with_capacity(self.counts.len() * 7);
        for row in self.counts.chunks(self.width) {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                write!(s, "{c}").expect("writing to a String cannot fail");
            }
            s.push('\n');
        }
        s
    }
}

/// Parse whitespace-separated non-negative integers, one image row per line.
/// Blank lines are ignored; line numbers in errors are 1-based.
pub fn load_frame(text: &str) -> Result<Frame> {
    let mut width = 0;
    let mut counts = Vec::new();
    let mut height = 0;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let start = counts.len();
        for tok in line.split_ascii_whitespace() {
            let v: u64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("expected a non-negative integer, found {tok:?}"),
            })?;
            counts.push(v);
        }
        let n = counts.len() - start;
        if n == 0 {
            continue;
        }
        if height == 0 {
            width = n;
        } else if n != width {
            return Err(Error::Parse {
                line: line_no,
                message: format!("row has {n} values, expected {width}"),
            });
        }
        height += 1;
    }
    if height == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "frame is empty".into(),
        });
    }
    Frame::new(width, height, counts)
}

/// One circular region of interest, in pixel units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Roi {
    pub site_id: usize,
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

/// ROIs whose site ids are exactly 0..n, so probabilities come out in site
/// order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Roi>", into = "Vec<Roi>")]
pub struct Mask {
    rois: Vec<Roi>,
}

impl TryFrom<Vec<Roi>> for Mask {
    type Error = Error;

    fn try_from(rois: Vec<Roi>) -> Result<Self> {
        Mask::new(rois)
    }
}

impl From<Mask> for Vec<Roi> {
    fn from(m: Mask) -> Self {
        m.rois
    }
}

impl Mask {
    pub fn new(mut rois: Vec<Roi>) -> Result<Self> {
        if rois.is_empty() {
            return Err(domain("mask has no regions"));
        }
        for roi in &rois {
            if !(roi.r > 0.0) || !roi.cx.is_finite() || !roi.cy.is_finite() || !roi.r.is_finite() {
                return Err(domain(format!(
                    "region for site {} needs a finite centre and r > 0",
                    roi.site_id
                )));
            }
        }
        rois.sort_by_key(|r| r.site_id);
        for (k, roi) in rois.iter().enumerate() {
            if roi.site_id != k {
                return Err(domain(format!(
                    "mask site ids must be 0..{} without gaps or repeats",
                    rois.len()
                )));
            }
        }
        Ok(Self { rois })
    }

    pub fn rois(&self) -> &[Roi] {
        &self.rois
    }

    pub fn len(&self) -> usize {
        self.rois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rois.is_empty()
    }

    pub fn check_frame(&self, frame: &Frame) -> Result<()> {
        let (w, h) = (frame.width as f64, frame.height as f64);
        for roi in &self.rois {
            if roi.cx - roi.r < 0.0
                || roi.cy - roi.r < 0.0
                || roi.cx + roi.r > w - 1.0
                || roi.cy + roi.r > h - 1.0
            {
                return Err(domain(format!(
                    "region for site {} leaves the {}x{} frame",
                    roi.site_id, frame.width, frame.height
                )));
            }
        }
        Ok(())
    }

    pub fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if self.len() != lattice.len() {
            return Err(domain(format!(
                "mask has {} regions, lattice has {} sites",
                self.len(),
                lattice.len()
            )));
        }
        Ok(())
    }

    /// Place one ROI per lattice site, mapping µm coordinates to pixels with
    /// the lattice origin at (`cx`, `cy`) and y pointing up on the sample.
    pub fn for_lattice(
        lattice: &Lattice,
        px_per_um: f64,
        cx: f64,
        cy: f64,
        r: f64,
    ) -> Result<Self> {
        Mask::new(
            lattice
                .sites()
                .iter()
                .map(|s| Roi {
                    site_id: s.id,
                    cx: cx + s.x * px_per_um,
                    cy: cy - s.y * px_per_um,
                    r,
                })
                .collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Corner {
    UpLeft,
    UpRight,
    DownLeft,
    DownRight,
}

impl Corner {
    pub const ALL: [Corner; 4] = [
        Corner::UpLeft,
        Corner::UpRight,
        Corner::DownLeft,
        Corner::DownRight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Corner::UpLeft => "up-left",
            Corner::UpRight => "up-right",
            Corner::DownLeft => "down-left",
            Corner::DownRight => "down-right",
        }
    }
}

/// Background estimate: the mean of the patch means over `corners`, each
/// patch `patch_w` × `patch_h` pixels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackgroundStrategy {
    pub corners: Vec<Corner>,
    pub patch_w: usize,
    pub patch_h: usize,
}

impl BackgroundStrategy {
    pub fn corner(corner: Corner, patch_w: usize, patch_h: usize) -> Self {
        Self {
            corners: vec![corner],
            patch_w,
            patch_h,
        }
    }

    pub fn mean_of(corners: &[Corner], patch_w: usize, patch_h: usize) -> Self {
        Self {
            corners: corners.to_vec(),
            patch_w,
            patch_h,
        }
    }

    /// Four 90×90 corners and their mean.
    pub fn default_2d() -> Vec<Self> {
        let mut v: Vec<_> = Corner::ALL
            .iter()
            .map(|&c| Self::corner(c, 90, 90))
            .collect();
        v.push(Self::mean_of(&Corner::ALL, 90, 90));
        v
    }

    /// Left and right 60×30 patches along the top edge and their mean.
    pub fn default_1d() -> Vec<Self> {
        let pair = [Corner::UpLeft, Corner::UpRight];
        vec![
            Self::corner(pair[0], 60, 30),
            Self::corner(pair[1], 60, 30),
            Self::mean_of(&pair, 60, 30),
        ]
    }

    pub fn label(&self) -> String {
        match self.corners.as_slice() {
            [c] => c.as_str().to_string(),
            cs if cs.len() == 4 => "four-corner-mean".to_string(),
            cs => format!(
                "mean({})",
                cs.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

/// Mean count per pixel in the strategy's corner patches.
pub fn estimate_background(frame: &Frame, strategy: &BackgroundStrategy) -> Result<f64> {
    let (pw, ph) = (strategy.patch_w, strategy.patch_h);
    if strategy.corners.is_empty() {
        return Err(domain("background strategy has no corners"));
    }
    if pw == 0 || ph == 0 || pw > frame.width || ph > frame.height {
        return Err(domain(format!(
            "{pw}x{ph} patch does not fit a {}x{} frame",
            frame.width, frame.height
        )));
    }
    let mut total = 0.0;
    for &c in &strategy.corners {
        let col0 = match c {
            Corner::UpLeft | Corner::DownLeft => 0,
            Corner::UpRight | Corner::DownRight => frame.width - pw,
        };
        let row0 = match c {
            Corner::UpLeft | Corner::UpRight => 0,
            Corner::DownLeft | Corner::DownRight => frame.height - ph,
        };
        let mut sum = 0u128;
        for row in row0..row0 + ph {
            let start = row * frame.width + col0;
            sum += frame.counts[start..start + pw]
                .iter()
                .map(|&v| v as u128)
                .sum::<u128>();
        }
        total += sum as f64 / (pw * ph) as f64;
    }
    Ok(total / strategy.corners.len() as f64)
}

/// Per-ROI sums of max(count − background, 0) over pixels whose centre lies
/// inside the circle, normalised over ROIs. Entry k belongs to site k.
pub fn extract_probabilities(
    frame: &Frame,
    mask: &Mask,
    background: f64,
) -> Result<ProbabilityField> {
    mask.check_frame(frame)?;
    let weights: Vec<f64> = mask
        .rois()
        .iter()
        .map(|roi| {
            let r2 = roi.r * roi.r;
            let (c0, c1) = (
                (roi.cx - roi.r).ceil() as usize,
                (roi.cx + roi.r).floor() as usize,
            );
            let (r0, r1) = (
                (roi.cy - roi.r).ceil() as usize,
                (roi.cy + roi.r).floor() as usize,
            );
            let mut sum = 0.0;
            for row in r0..=r1 {
                let dy = row as f64 - roi.cy;
                for col in c0..=c1 {
                    let dx = col as f64 - roi.cx;
                    if dx * dx + dy * dy <= r2 {
                        sum += (frame.get(col, row) as f64 - background).max(0.0);
                    }
                }
            }
            sum
        })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::EmptySignal(format!(
            "all {} regions are at or below background {background}",
            weights.len()
        )));
    }
    ProbabilityField::from_weights(weights)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyVariance {
    pub strategy: String,
    pub background: f64,
    pub sigma2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub mean: f64,
    /// Population standard deviation of the per-strategy variances.
    pub error: f64,
    pub strategies: Vec<StrategyVariance>,
}

/// Variance about `origin` under each background strategy; the spread across
/// strategies is the error bar.
pub fn variance_with_errorbars(
    frame: &Frame,
    mask: &Mask,
    lattice: &Lattice,
    strategies: &[BackgroundStrategy],
    axis: Axis,
    origin: usize,
) -> Result<VarianceReport> {
    if strategies.len() < 2 {
        return Err(domain("error bars need at least two background strategies"));
    }
    mask.check_lattice(lattice)?;
    let mut rows = Vec::with_capacity(strategies.len());
    for s in strategies {
        let background = estimate_background(frame, s)?;
        let p = extract_probabilities(frame, mask, background)?;
        rows.push(StrategyVariance {
            strategy: s.label(),
            background,
            sigma2: variance(&p, lattice, axis, origin)?,
        });
    }
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.sigma2).sum::<f64>() / n;
    let error = (rows.iter().map(|r| (r.sigma2 - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(VarianceReport {
        mean,
        error,
        strategies: rows,
    })
}

/// CSV `site_id,probability`.
pub fn write_probability_csv<W: Write>(p: &ProbabilityField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["site_id", "probability"])?;
    for (i, v) in p.values().iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Synthetic camera: Gaussian spots of a common width on a constant offset
/// with a linear tilt, optionally Poisson-sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpotRenderer {
    pub width: usize,
    pub height: usize,
    pub spot_sigma_px: f64,
    /// Total integrated counts shared among the spots.
    pub total_signal: f64,
    pub offset: f64,
    /// Background gradient per pixel along columns and rows.
    pub tilt: (f64, f64),
}

impl SpotRenderer {
    /// Render spot k at the centre of ROI k with weight p_k. Without `rng`
    /// pixel values are rounded expectations.
    pub fn render<R: Rng + ?Sized>(
        &self,
        mask: &Mask,
        p: &ProbabilityField,
        rng: Option<&mut R>,
    ) -> Result<Frame> {
        if p.len() != mask.len() {
            return Err(domain("one weight per region is required"));
        }
        if self.width == 0
            || self.height == 0
            || !(self.spot_sigma_px > 0.0)
            || !(self.total_signal >= 0.0)
        {
            return Err(domain(
                "renderer needs a non-empty frame, sigma > 0 and signal >= 0",
            ));
        }
        let mut img = vec![0.0f64; self.width * self.height];
        for (row, line) in img.chunks_mut(self.width).enumerate() {
            for (col, v) in line.iter_mut().enumerate() {
                *v = self.offset + self.tilt.0 * col as f64 + self.tilt.1 * row as f64;
            }
        }
        let s2 = self.spot_sigma_px * self.spot_sigma_px;
        let norm = self.total_signal / (2.0 * std::f64::consts::PI * s2);
        let reach = 6.0 * self.spot_sigma_px;
        for (roi, &pk) in mask.rois().iter().zip(p.values()) {
            if pk == 0.0 {
                continue;
            }
            let c0 = (roi.cx - reach).floor().max(0.0) as usize;
            let c1 = ((roi.cx + reach).ceil() as usize).min(self.width - 1);
            let r0 = (roi.cy - reach).floor().max(0.0) as usize;
            let r1 = ((roi.cy + reach).ceil() as usize).min(self.height - 1);
            for row in r0..=r1 {
                let dy = row as f64 - roi.cy;
                for col in c0..=c1 {
                    let dx = col as f64 - roi.cx;
                    img[row * self.width + col] +=
                        pk * norm * (-(dx * dx + dy * dy) / (2.0 * s2)).exp();
                }
            }
        }
        let counts = match rng {
            None => img.iter().map(|&v| v.max(0.0).round() as u64).collect(),
            Some(rng) => img
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        Poisson::new(v)
                            .map(|d| d.sample(&mut *rng) as u64)
                            .map_err(|e| domain(e.to_string()))
                    } else {
                        Ok(0)
                    }
                })
                .collect::<Result<Vec<u64>>>()?,
        };
        Frame::new(self.width, self.height, counts)
    }
}
