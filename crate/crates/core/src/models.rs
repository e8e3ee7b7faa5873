//! Signal counting rates under the three evolution models.
//!
//! * Heisenberg: field operators propagate to both detectors and the
//!   correlated rate integrates `|f|²` (slit) or `|g|²` (collector focus) over
//!   the idler detector.
//! * Pure collapse: the idler detection leaves one coherent signal amplitude,
//!   the slit integral of `f`.
//! * Mixed collapse: the idler detection leaves an incoherent ensemble of
//!   point-spread states, one per idler position, weighted by the probability
//!   of that idler detection.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::analysis::{compare, ComparisonReport, Distribution};
use crate::error::{Error, Result};
use crate::kernels::{IdlerDetector, KernelContext, KernelTable, PlaneSelector, SignalPlane};
use crate::quadrature::{integrate_real, ComplexField, Grid1D, MAX_PHASE_PER_STEP};

/// Fraction of the collector-focus pattern energy the xD1 range must capture.
pub const MIN_CAPTURED_ENERGY: f64 = 0.999;

/// Single-slit lobes always included in the collector-focus range.
pub const COLLECTOR_LOBES: f64 = 6.0;

/// Collector-focus range in units of the Gaussian coherence width `M fc a_p / d2`.
pub const COLLECTOR_COHERENCE_WIDTHS: f64 = 3.5;

/// The slit edges give the collector pattern a `1/xD1²` tail holding a
/// fraction `lobe / (π² X)` of the energy beyond `±X`; the range is widened
/// by this factor past the bare requirement.
pub const COLLECTOR_TAIL_MARGIN: f64 = 1.1;

/// Samples per single-slit lobe on the collector-focus grid.
pub const COLLECTOR_SAMPLES_PER_LOBE: f64 = 16.0;

/// Auto-sized signal grids span this many expected FWHMs on each side.
pub const AUTO_HALFWIDTH_FWHMS: f64 = 3.0;

/// Samples per narrowest expected feature on auto-sized signal grids.
pub const AUTO_SAMPLES_PER_FEATURE: f64 = 16.0;

/// Boundary intensity, relative to peak, below which propagation is leak-free.
pub const MAX_BOUNDARY_INTENSITY: f64 = 1e-8;

fn odd(n: usize) -> usize {
    n | 1
}

/// FWHM of the ghost-plane point-spread function.
pub fn expected_psf_fwhm(ctx: &KernelContext) -> f64 {
    let g = ctx.geometry();
    2f64.ln().sqrt() * g.lambda * g.d2 / (PI * g.a_p)
}

/// Rough Heisenberg FWHM on a plane, used only to size grids.
pub fn expected_fwhm(ctx: &KernelContext, plane: SignalPlane) -> f64 {
    let g = ctx.geometry();
    match plane {
        SignalPlane::Ghost => g.magnification() * g.w + expected_psf_fwhm(ctx),
        SignalPlane::Diffraction => {
            let gamma = Complex64::new(1.0 / (2.0 * g.a_p * g.a_p), -ctx.chirp_rate(plane));
            let k_e = (2.0 / (1.0 / gamma).re).sqrt();
            2.0 * 2f64.ln().sqrt() * k_e * g.lambda * g.d3 / (2.0 * PI)
        }
    }
}

/// Narrowest feature any model produces on a plane.
fn narrowest_feature(ctx: &KernelContext, plane: SignalPlane) -> f64 {
    let g = ctx.geometry();
    match plane {
        SignalPlane::Ghost => expected_psf_fwhm(ctx),
        SignalPlane::Diffraction => {
            (g.lambda * g.d3 / (g.magnification() * g.w)).min(expected_fwhm(ctx, plane))
        }
    }
}

/// Signal grid spanning ±3 expected FWHMs with 16 samples per narrowest feature.
pub fn auto_signal_grid(ctx: &KernelContext, plane: SignalPlane) -> Grid1D {
    let half = AUTO_HALFWIDTH_FWHMS * expected_fwhm(ctx, plane);
    let step = narrowest_feature(ctx, plane) / AUTO_SAMPLES_PER_FEATURE;
    let count = odd((2.0 * half / step).ceil() as usize + 1);
    Grid1D::centered(half, count).expect("positive extent")
}

/// Collector-focus grid: the widest of six single-slit lobes, 3.5 Gaussian
/// coherence widths and the range leaving at most `1 - MIN_CAPTURED_ENERGY`
/// in the edge tail, sampled at 16 points per lobe.
pub fn collector_grid(ctx: &KernelContext) -> Grid1D {
    let g = ctx.geometry();
    let lobe = g.lambda * g.fc / g.w;
    let coherence = g.magnification() * g.fc * g.a_p / g.d2;
    let tail = COLLECTOR_TAIL_MARGIN * lobe / (PI * PI * (1.0 - MIN_CAPTURED_ENERGY));
    let half = (COLLECTOR_LOBES * lobe)
        .max(COLLECTOR_COHERENCE_WIDTHS * coherence)
        .max(tail);
    let step = lobe / COLLECTOR_SAMPLES_PER_LOBE;
    let count = odd((2.0 * half / step).ceil() as usize + 1);
    Grid1D::centered(half, count).expect("positive extent")
}

fn slit_table(
    ctx: &KernelContext,
    plane: SignalPlane,
    signal: &Grid1D,
    xd1_max: f64,
) -> KernelTable {
    let slit = ctx.slit_grid(plane, signal.max_abs(), xd1_max);
    ctx.kernel_f_table(&slit, plane, signal)
}

/// Σ_rows w_row |table_row|²
fn incoherent_sum(table: &KernelTable) -> Vec<f64> {
    let weights = table.idler.weights();
    let mut out = vec![0.0; table.signal.count];
    for (w, row) in weights.iter().zip(table.rows()) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += w * v.norm_sqr();
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct HeisenbergResult {
    pub distribution: Distribution,
    /// Fraction of the collector-focus pattern energy inside the xD1 range,
    /// measured against the Plancherel total. `None` for the slit detector.
    pub captured_energy: Option<f64>,
}

/// Correlated counting rate with full detail.
pub fn heisenberg_ccr_detailed(
    sel: PlaneSelector,
    signal: &Grid1D,
    ctx: &KernelContext,
) -> Result<HeisenbergResult> {
    let plane = sel.signal_plane;
    match sel.idler_detector {
        IdlerDetector::Slit => {
            let f = slit_table(ctx, plane, signal, 0.0);
            Ok(HeisenbergResult {
                distribution: Distribution::new(*signal, incoherent_sum(&f))?,
                captured_energy: None,
            })
        }
        IdlerDetector::CollectorFocus => {
            let xd1 = collector_grid(ctx);
            let f = slit_table(ctx, plane, signal, xd1.max_abs());
            let g = ctx.kernel_g_table(&f, &xd1);
            let values = incoherent_sum(&g);
            let geom = ctx.geometry();
            let total: Vec<f64> = incoherent_sum(&f)
                .iter()
                .map(|v| v * geom.lambda * geom.fc)
                .collect();
            let captured = integrate_real(signal, &values)? / integrate_real(signal, &total)?;
            if captured < MIN_CAPTURED_ENERGY {
                warn!(
                    "collector-focus range ±{:.3e} m captures only {:.4}% of the pattern energy",
                    xd1.max_abs(),
                    100.0 * captured
                );
            }
            Ok(HeisenbergResult {
                distribution: Distribution::new(*signal, values)?,
                captured_energy: Some(captured),
            })
        }
    }
}

/// Non-collapse correlated counting rate over the signal grid.
pub fn heisenberg_ccr(
    sel: PlaneSelector,
    signal: &Grid1D,
    ctx: &KernelContext,
) -> Result<Distribution> {
    Ok(heisenberg_ccr_detailed(sel, signal, ctx)?.distribution)
}

/// Collapsed signal amplitude for a slit-integrating idler detection.
pub fn pure_collapse_state(
    plane: SignalPlane,
    signal: &Grid1D,
    ctx: &KernelContext,
) -> Result<ComplexField> {
    let f = slit_table(ctx, plane, signal, 0.0);
    let weights = f.idler.weights();
    let mut values = vec![Complex64::new(0.0, 0.0); signal.count];
    for (w, row) in weights.iter().zip(f.rows()) {
        for (o, v) in values.iter_mut().zip(row) {
            *o += v * *w;
        }
    }
    ComplexField::new(*signal, values)
}

/// `|ψ|²` of the pure collapsed state.
pub fn pure_collapse_cr(
    plane: SignalPlane,
    signal: &Grid1D,
    ctx: &KernelContext,
) -> Result<Distribution> {
    Distribution::new(
        *signal,
        pure_collapse_state(plane, signal, ctx)?.intensities(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationDiagnostics {
    /// Largest boundary intensity of the input over its peak.
    pub boundary_ratio: f64,
    /// Largest phase advance per source step of the Fresnel kernel.
    pub kernel_phase_per_step: f64,
}

impl PropagationDiagnostics {
    pub fn leak_free(&self) -> bool {
        self.boundary_ratio < MAX_BOUNDARY_INTENSITY
    }

    pub fn resolved(&self) -> bool {
        self.kernel_phase_per_step < MAX_PHASE_PER_STEP
    }
}

pub fn propagation_diagnostics(
    state: &ComplexField,
    ctx: &KernelContext,
    target: &Grid1D,
) -> PropagationDiagnostics {
    let g = ctx.geometry();
    let dz = g.d3 - g.d2;
    let intensities = state.intensities();
    let peak = intensities.iter().copied().fold(0.0, f64::max);
    let edge = intensities[0].max(*intensities.last().expect("grid has >= 2 points"));
    let reach = (target.start - state.grid.end())
        .abs()
        .max((target.end() - state.grid.start).abs());
    PropagationDiagnostics {
        boundary_ratio: if peak > 0.0 { edge / peak } else { 0.0 },
        kernel_phase_per_step: 2.0 * PI * reach / (g.lambda * dz) * state.grid.step,
    }
}

/// Free-space propagation of a ghost-plane state to the diffraction plane,
/// sampled on `target`. The unitary Fresnel prefactor `1/sqrt(iλΔz)` is kept
/// so that `∫|ψ|²` is conserved.
pub fn propagate_state(
    state: &ComplexField,
    ctx: &KernelContext,
    target: &Grid1D,
) -> Result<ComplexField> {
    let diag = propagation_diagnostics(state, ctx, target);
    if !diag.leak_free() {
        warn!(
            "input state reaches {:.3e} of peak at the grid boundary; propagation will leak",
            diag.boundary_ratio
        );
    }
    if !diag.resolved() {
        warn!(
            "Fresnel kernel advances {:.3} rad per source step (limit {:.3})",
            diag.kernel_phase_per_step, MAX_PHASE_PER_STEP
        );
    }
    let g = ctx.geometry();
    let dz = g.d3 - g.d2;
    let prefactor = 1.0 / (Complex64::new(0.0, g.lambda * dz)).sqrt();
    let weights = state.grid.weights();
    let sources: Vec<(f64, Complex64)> = state
        .grid
        .positions()
        .zip(state.values.iter().zip(&weights))
        .map(|(x, (v, w))| (x, v * w))
        .collect();
    let xs = target.to_vec();
    let values: Vec<Complex64> = xs
        .par_iter()
        .map(|&x3| {
            let sum: Complex64 = sources
                .iter()
                .map(|&(x2, v)| {
                    v * Complex64::from_polar(1.0, PI * (x3 - x2).powi(2) / (g.lambda * dz))
                })
                .sum();
            prefactor * sum
        })
        .collect();
    ComplexField::new(*target, values)
}

/// Mixed state left by the idler detection: one point-spread basis state per
/// idler detector position, with detection probabilities.
#[derive(Debug, Clone)]
pub struct CollapseEnsemble {
    pub idler_detector: IdlerDetector,
    pub plane: SignalPlane,
    /// `x1i` over the slit, or `xD1` over the collector focal plane.
    pub idler_positions: Grid1D,
    /// Quadrature weights over the idler positions (`Δx` generalised).
    pub idler_weights: Vec<f64>,
    /// Unnormalized basis amplitudes (`f` or `g` rows) on the signal grid.
    pub basis_fields: Vec<ComplexField>,
    /// Per-basis normalizer: `K² ∫|basis|² dx = 1` on the signal grid.
    pub norms: Vec<f64>,
    /// Detection probability density, normalized so `Σ w P = 1`.
    pub probabilities: Vec<f64>,
    /// Global normalizer applied to the raw ghost-plane probabilities.
    pub k2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleCheck {
    /// `max_n |∫|K_n basis_n|² dx - 1|`
    pub max_basis_norm_error: f64,
    /// `Σ_n w_n P_n`
    pub total_probability: f64,
    pub min_probability: f64,
}

impl EnsembleCheck {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.max_basis_norm_error < tolerance
            && (self.total_probability - 1.0).abs() < tolerance
            && self.min_probability >= 0.0
    }
}

impl CollapseEnsemble {
    pub fn len(&self) -> usize {
        self.basis_fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis_fields.is_empty()
    }

    pub fn signal_grid(&self) -> Grid1D {
        self.basis_fields[0].grid
    }

    pub fn normalized_basis(&self, n: usize) -> ComplexField {
        self.basis_fields[n].scaled(self.norms[n])
    }

    /// Counting rate of a single basis state.
    pub fn basis_distribution(&self, n: usize) -> Result<Distribution> {
        Distribution::new(self.signal_grid(), self.normalized_basis(n).intensities())
    }

    /// Basis index whose idler position is nearest to `position`.
    pub fn index_at(&self, position: f64) -> Result<usize> {
        let g = &self.idler_positions;
        if position < g.start - g.step / 2.0 || position > g.end() + g.step / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "idler position {position:e} outside ensemble range [{:e}, {:e}]",
                g.start,
                g.end()
            )));
        }
        Ok(g.nearest_index(position))
    }

    /// Basis counting rate weighted by its detection probability.
    pub fn weighted_basis_distribution(&self, n: usize) -> Result<Distribution> {
        let p = self.probabilities[n];
        Distribution::new(
            self.signal_grid(),
            self.normalized_basis(n)
                .intensities()
                .into_iter()
                .map(|v| v * p)
                .collect(),
        )
    }

    /// Probabilities as a distribution over idler positions.
    pub fn probability_distribution(&self) -> Result<Distribution> {
        Distribution::new(self.idler_positions, self.probabilities.clone())
    }

    pub fn check(&self) -> EnsembleCheck {
        let max_basis_norm_error = (0..self.len())
            .map(|n| (self.normalized_basis(n).norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max);
        EnsembleCheck {
            max_basis_norm_error,
            total_probability: self
                .idler_weights
                .iter()
                .zip(&self.probabilities)
                .map(|(w, p)| w * p)
                .sum(),
            min_probability: self
                .probabilities
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Unit-norm counting rate of the basis state for one idler detection at
/// `position` (`x1i` in the slit or `xD1` in the collector focal plane),
/// evaluated directly rather than through an ensemble.
pub fn basis_state_cr(
    idler: IdlerDetector,
    position: f64,
    plane: SignalPlane,
    signal: &Grid1D,
    ctx: &KernelContext,
) -> Result<Distribution> {
    let limit = match idler {
        IdlerDetector::Slit => ctx.geometry().w / 2.0,
        IdlerDetector::CollectorFocus => collector_grid(ctx).max_abs(),
    };
    if !(position.abs() <= limit) {
        return Err(Error::InvalidParameter(format!(
            "{idler} position {position:e} outside [-{limit:e}, {limit:e}]"
        )));
    }
    let xs = signal.to_vec();
    let amplitudes: Vec<Complex64> = xs
        .par_iter()
        .map(|&x| match idler {
            IdlerDetector::Slit => ctx.kernel_f(position, plane, x),
            IdlerDetector::CollectorFocus => ctx.kernel_g(position, plane, x),
        })
        .collect();
    let field = ComplexField::new(*signal, amplitudes)?;
    let norm = field.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm { index: 0 });
    }
    Distribution::new(*signal, field.scaled(1.0 / norm.sqrt()).intensities())
}

fn row_norms(table: &KernelTable) -> Result<Vec<f64>> {
    let weights = table.signal.weights();
    table
        .rows()
        .map(|row| {
            row.iter()
                .zip(&weights)
                .map(|(v, w)| w * v.norm_sqr())
                .sum::<f64>()
        })
        .map(Ok)
        .collect()
}

/// Idler-position table (`f` over the slit or `g` over the collector focus)
/// for one signal plane.
fn idler_table(
    idler: IdlerDetector,
    plane: SignalPlane,
    signal: &Grid1D,
    ctx: &KernelContext,
) -> KernelTable {
    match idler {
        IdlerDetector::Slit => slit_table(ctx, plane, signal, 0.0),
        IdlerDetector::CollectorFocus => {
            let xd1 = collector_grid(ctx);
            let f = slit_table(ctx, plane, signal, xd1.max_abs());
            ctx.kernel_g_table(&f, &xd1)
        }
    }
}

/// Builds the mixed-state ensemble for an idler detector and signal plane.
/// Detection probabilities always come from the ghost plane, where the
/// collapse happens.
pub fn build_ensemble(
    idler: IdlerDetector,
    plane: SignalPlane,
    signal: &Grid1D,
    ctx: &KernelContext,
) -> Result<CollapseEnsemble> {
    let table = idler_table(idler, plane, signal, ctx);
    let basis_norms = row_norms(&table)?;
    if let Some(index) = basis_norms.iter().position(|n| !(*n > 0.0)) {
        return Err(Error::ZeroNorm { index });
    }

    let raw_probabilities = if plane == SignalPlane::Ghost {
        basis_norms.clone()
    } else {
        let ghost = auto_signal_grid(ctx, SignalPlane::Ghost);
        let ghost_table = match idler {
            // same x1i samples as the basis states
            IdlerDetector::Slit => ctx.kernel_f_table(&table.idler, SignalPlane::Ghost, &ghost),
            IdlerDetector::CollectorFocus => idler_table(idler, SignalPlane::Ghost, &ghost, ctx),
        };
        debug_assert_eq!(ghost_table.idler, table.idler);
        row_norms(&ghost_table)?
    };
    let idler_weights = table.idler.weights();
    let total: f64 = idler_weights
        .iter()
        .zip(&raw_probabilities)
        .map(|(w, p)| w * p)
        .sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("detection probability"));
    }
    let k2 = 1.0 / total;

    Ok(CollapseEnsemble {
        idler_detector: idler,
        plane,
        idler_positions: table.idler,
        idler_weights,
        basis_fields: (0..table.idler.count).map(|i| table.row_field(i)).collect(),
        norms: basis_norms.iter().map(|n| 1.0 / n.sqrt()).collect(),
        probabilities: raw_probabilities.iter().map(|p| p * k2).collect(),
        k2,
    })
}

/// Probability-weighted incoherent sum of the basis-state counting rates.
pub fn mixed_collapse_cr(ensemble: &CollapseEnsemble) -> Result<Distribution> {
    if ensemble.is_empty() {
        return Err(Error::Degenerate("basis state"));
    }
    let grid = ensemble.signal_grid();
    let mut values = vec![0.0; grid.count];
    for n in 0..ensemble.len() {
        let scale =
            ensemble.idler_weights[n] * ensemble.probabilities[n] * ensemble.norms[n].powi(2);
        for (o, v) in values.iter_mut().zip(&ensemble.basis_fields[n].values) {
            *o += scale * v.norm_sqr();
        }
    }
    Distribution::new(grid, values)
}

/// Mixed-collapse and Heisenberg rates computed independently and compared
/// after unit-area normalization.
pub fn equivalence_check(
    ctx: &KernelContext,
    sel: PlaneSelector,
    signal: &Grid1D,
    tolerance: f64,
) -> Result<ComparisonReport> {
    let ensemble = build_ensemble(sel.idler_detector, sel.signal_plane, signal, ctx)?;
    let mixed = mixed_collapse_cr(&ensemble)?;
    let heisenberg = heisenberg_ccr(sel, signal, ctx)?;
    let mut report = compare(&mixed, &heisenberg, tolerance)?;
    let tag = format!("mixed vs heisenberg, {sel}");
    report.notes = if report.notes.is_empty() {
        tag
    } else {
        format!("{tag}; {}", report.notes)
    };
    Ok(report)
}
