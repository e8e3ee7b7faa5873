//! Uniform grids and composite quadrature for chirped, Gaussian-windowed
//! oscillatory integrands.
//!
//! Every sampled integral in the crate honours one sampling contract: the
//! fastest local phase of the integrand advances by less than π/4 per step.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest phase advance permitted between neighbouring samples.
pub const MAX_PHASE_PER_STEP: f64 = PI / 4.0;

/// Floor on the sample count of any recommended grid.
pub const MIN_GRID_COUNT: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Grid1D {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if !start.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "start must be finite, got {start}"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples, got {count}"
            )));
        }
        Ok(Self { start, step, count })
    }

    /// `count` points spanning `[lo, hi]` inclusive.
    pub fn spanning(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(Error::InvalidGrid(format!(
                "cannot span [{lo}, {hi}] with {count} points"
            )));
        }
        Self::new(lo, (hi - lo) / (count - 1) as f64, count)
    }

    /// `count` points spanning `[-halfwidth, halfwidth]`.
    pub fn centered(halfwidth: f64, count: usize) -> Result<Self> {
        Self::spanning(-halfwidth, halfwidth, count)
    }

    pub fn position(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.position(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.positions().collect()
    }

    pub fn end(&self) -> f64 {
        self.position(self.count - 1)
    }

    pub fn extent(&self) -> f64 {
        (self.count - 1) as f64 * self.step
    }

    /// Largest `|x|` on the grid.
    pub fn max_abs(&self) -> f64 {
        self.start.abs().max(self.end().abs())
    }

    /// Index of the sample nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.start) / self.step).round();
        i.clamp(0.0, (self.count - 1) as f64) as usize
    }

    /// Composite quadrature weights: Simpson for odd counts, Simpson plus a
    /// closing 3/8 panel for even counts, trapezoid for two points.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.count;
        let h = self.step;
        let mut w = vec![0.0; n];
        if n == 2 {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
            return w;
        }
        if n == 4 {
            for (wi, c) in w.iter_mut().zip([1.0, 3.0, 3.0, 1.0]) {
                *wi = 3.0 * h / 8.0 * c;
            }
            return w;
        }
        // Simpson over the first `m` points (m odd), 3/8 over the last four if needed.
        let m = if n % 2 == 1 { n } else { n - 3 };
        for (i, wi) in w.iter_mut().enumerate().take(m) {
            let c = if i == 0 || i == m - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            *wi = h / 3.0 * c;
        }
        if m < n {
            for (j, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
                w[m - 1 + j] += 3.0 * h / 8.0 * c;
            }
        }
        w
    }
}

/// Complex samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.count
            )));
        }
        if let Some(index) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.positions().map(f).collect();
        Self::new(grid, values)
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `∫|ψ|² dx` on the field's own grid.
    pub fn norm_sqr(&self) -> f64 {
        integrate_real(&self.grid, &self.intensities()).expect("finite by construction")
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// Composite quadrature of `∫ values dx` over the field's grid.
pub fn integrate_sampled(field: &ComplexField) -> Result<Complex64> {
    if let Some(index) = field
        .values
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::NonFinite { index });
    }
    Ok(field
        .grid
        .weights()
        .iter()
        .zip(&field.values)
        .map(|(w, v)| v * w)
        .sum())
}

pub fn integrate_real(grid: &Grid1D, values: &[f64]) -> Result<f64> {
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
    Ok(grid.weights().iter().zip(values).map(|(w, v)| w * v).sum())
}

/// Closed form of `∫ exp(-x²/(2a²)) exp(iβx²) exp(-ikx) dx` over the real line:
/// `sqrt(π/γ) exp(-k²/(4γ))` with `γ = 1/(2a²) - iβ`.
pub fn gaussian_chirp_integral(a: f64, beta: f64, k: f64) -> Complex64 {
    let gamma = Complex64::new(1.0 / (2.0 * a * a), -beta);
    (Complex64::from(PI) / gamma).sqrt() * (-(k * k) / (4.0 * gamma)).exp()
}

/// Number of samples needed over `extent` so that a phase advancing at
/// `phase_rate` rad/m moves less than π/4 per step. Always odd, never below
/// `min_count`.
pub fn resolving_count(extent: f64, phase_rate: f64, min_count: usize) -> usize {
    let max_step = MAX_PHASE_PER_STEP / phase_rate.abs().max(f64::MIN_POSITIVE);
    // strict inequality: one extra interval when the ratio lands on an integer
    let intervals = (extent / max_step).floor() as usize + 1;
    let n = (intervals + 1).max(min_count).max(3);
    n | 1
}

/// The Gaussian envelope is charged as an extra phase rate of
/// `ENVELOPE_RATE_PER_SIGMA / a`. Without it a slowly oscillating integrand
/// gets about two samples per `a`, and the aliasing error of the coarse
/// half of Simpson's rule, `exp(-(π/h - k)² a² / 2)`, reaches 1e-5.
pub const ENVELOPE_RATE_PER_SIGMA: f64 = 2.0;

/// Grid centred on zero covering `±halfwidth_sigmas·a`, fine enough that the
/// phase of `exp(iβx²) exp(-ikx)` advances less than π/4 per step for all
/// `|β| ≤ beta_max`, `|k| ≤ k_max`, with the envelope counted as above.
pub fn recommend_grid(a: f64, beta_max: f64, k_max: f64, halfwidth_sigmas: f64) -> Grid1D {
    let extent = 2.0 * halfwidth_sigmas * a;
    let rate = beta_max.abs() * extent + k_max.abs() + ENVELOPE_RATE_PER_SIGMA / a;
    let count = resolving_count(extent, rate, MIN_GRID_COUNT);
    Grid1D::centered(extent / 2.0, count).expect("a > 0 and count >= 33")
}

/// Precomputed `Σ_j w_j v_j exp(-ik x_j)` for fixed samples `v_j`: the
/// quadrature of a fixed integrand against a variable plane wave.
#[derive(Debug, Clone)]
pub struct SampledTransform {
    grid: Grid1D,
    weighted: Vec<Complex64>,
}

impl SampledTransform {
    pub fn new(field: &ComplexField) -> Result<Self> {
        let weights = field.grid.weights();
        if let Some(index) = field
            .values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid: field.grid,
            weighted: field
                .values
                .iter()
                .zip(&weights)
                .map(|(v, w)| v * w)
                .collect(),
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Evaluates the sum at spatial frequency `k` (rad/m).
    pub fn at(&self, k: f64) -> Complex64 {
        // Phasor recurrence, re-seeded every block to bound drift.
        const BLOCK: usize = 512;
        let step = Complex64::from_polar(1.0, -k * self.grid.step);
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, chunk) in self.weighted.chunks(BLOCK).enumerate() {
            let x = self.grid.position(b * BLOCK);
            let mut phasor = Complex64::from_polar(1.0, -k * x);
            for v in chunk {
                acc += v * phasor;
                phasor *= step;
            }
        }
        acc
    }
}
