//! Counting-rate distributions and the metrics used to compare them.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_real, Grid1D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    Raw,
    /// Maximum equals one.
    Peak1,
    /// Quadrature area over the grid equals one.
    Area1,
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw",
            Normalization::Peak1 => "peak1",
            Normalization::Area1 => "area1",
        })
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "peak1" => Ok(Self::Peak1),
            "area1" => Ok(Self::Area1),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization {other:?}"
            ))),
        }
    }
}

/// Nonnegative counting rate sampled over detector positions (m).
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

impl Distribution {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.count
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "negative counting rate {v}"
            )));
        }
        Ok(Self {
            grid,
            values,
            normalization: Normalization::Raw,
        })
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Position of the (first) maximum.
    pub fn peak_position(&self) -> f64 {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        self.grid.position(i)
    }

    pub fn area(&self) -> f64 {
        integrate_real(&self.grid, &self.values).expect("validated at construction")
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.values[self.grid.nearest_index(x)]
    }

    pub fn normalize(&self, mode: Normalization) -> Result<Self> {
        let scale = match mode {
            Normalization::Raw => {
                return Err(Error::InvalidParameter("cannot normalize to raw".into()))
            }
            Normalization::Peak1 => self.peak(),
            Normalization::Area1 => self.area(),
        };
        if !(scale > 0.0) {
            return Err(Error::Degenerate(match mode {
                Normalization::Area1 => "area",
                _ => "maximum",
            }));
        }
        let mut values: Vec<f64> = self.values.iter().map(|v| v / scale).collect();
        if mode == Normalization::Peak1 {
            // exact 1 at the maximum regardless of rounding
            if let Some(i) = self.values.iter().position(|&v| v == scale) {
                values[i] = 1.0;
            }
        }
        Ok(Self {
            grid: self.grid,
            values,
            normalization: mode,
        })
    }

    /// Full width at half maximum, linearly interpolating the crossings.
    pub fn fwhm(&self) -> Result<f64> {
        fwhm(self)
    }
}

pub fn fwhm(dist: &Distribution) -> Result<f64> {
    let peak = dist.peak();
    if !(peak > 0.0) {
        return Err(Error::Degenerate("maximum"));
    }
    let half = peak / 2.0;
    let v = &dist.values;
    let above: Vec<usize> = (0..v.len()).filter(|&i| v[i] >= half).collect();
    let (first, last) = (above[0], *above.last().expect("peak is above half"));
    if last - first + 1 != above.len() {
        let gaps = above.windows(2).filter(|w| w[1] != w[0] + 1).count();
        return Err(Error::NotUnimodal(format!(
            "{} separate regions at or above half maximum",
            gaps + 1
        )));
    }
    if first == 0 || last == v.len() - 1 {
        return Err(Error::NotUnimodal(
            "half-maximum crossing lies outside the grid".into(),
        ));
    }
    let g = &dist.grid;
    let cross = |lo: usize, hi: usize| {
        let (a, b) = (v[lo], v[hi]);
        let t = (half - a) / (b - a);
        g.position(lo) + t * (g.position(hi) - g.position(lo))
    };
    Ok(cross(last, last + 1) - cross(first - 1, first))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `max |a - b|` over the larger of the two peaks, after unit-area scaling.
    pub max_abs_diff: f64,
    /// `‖a - b‖₂` over the larger of `‖a‖₂`, `‖b‖₂`, after unit-area scaling.
    pub rel_l2: f64,
    pub fwhm_a: Option<f64>,
    pub fwhm_b: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub notes: String,
}

impl ComparisonReport {
    pub fn fwhm_ratio(&self) -> Option<f64> {
        Some(self.fwhm_a? / self.fwhm_b?)
    }

    /// Flat `key = value` block.
    pub fn to_kv_block(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.9e}"));
        let mut s = String::new();
        writeln!(s, "max_abs_diff = {:.9e}", self.max_abs_diff).unwrap();
        writeln!(s, "rel_l2 = {:.9e}", self.rel_l2).unwrap();
        writeln!(s, "fwhm_a = {}", fmt_opt(self.fwhm_a)).unwrap();
        writeln!(s, "fwhm_b = {}", fmt_opt(self.fwhm_b)).unwrap();
        writeln!(s, "tolerance = {:.3e}", self.tolerance).unwrap();
        writeln!(s, "pass = {}", self.pass).unwrap();
        writeln!(s, "notes = {:?}", self.notes).unwrap();
        s
    }
}

/// Compares two distributions on the same grid after scaling both to unit area.
pub fn compare(a: &Distribution, b: &Distribution, tolerance: f64) -> Result<ComparisonReport> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let a_n = a.normalize(Normalization::Area1)?;
    let b_n = b.normalize(Normalization::Area1)?;
    let peak = a_n.peak().max(b_n.peak());
    let max_abs_diff = a_n
        .values
        .iter()
        .zip(&b_n.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / peak;
    let sq = |v: Vec<f64>| integrate_real(&a.grid, &v).expect("finite").max(0.0).sqrt();
    let diff = sq(a_n
        .values
        .iter()
        .zip(&b_n.values)
        .map(|(x, y)| (x - y).powi(2))
        .collect());
    let norm_a = sq(a_n.values.iter().map(|x| x * x).collect());
    let norm_b = sq(b_n.values.iter().map(|x| x * x).collect());
    let rel_l2 = diff / norm_a.max(norm_b);

    let mut notes = Vec::new();
    let fwhm_a = a
        .fwhm()
        .map_err(|e| notes.push(format!("fwhm_a: {e}")))
        .ok();
    let fwhm_b = b
        .fwhm()
        .map_err(|e| notes.push(format!("fwhm_b: {e}")))
        .ok();
    Ok(ComparisonReport {
        max_abs_diff,
        rel_l2,
        fwhm_a,
        fwhm_b,
        tolerance,
        pass: max_abs_diff < tolerance && rel_l2 < tolerance,
        notes: notes.join("; "),
    })
}
