//! Propagation kernels for the signal and idler arms.
//!
//! The lens-plane integrals are reduced by stationary phase, leaving two
//! detector kernels:
//!
//! * `f(x1i, x_m)` — signal amplitude at `x_m` conditioned on a point idler
//!   detection at `x1i` in the slit plane. It is a Gaussian pump transform,
//!   chirped in the diffraction plane.
//! * `g(xD1, x_m)` — the slit-integrated transform of `f` seen by a point
//!   idler detector in the collector-lens focal plane.
//!
//! Constant prefactors are dropped throughout; callers normalize.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::GhostGeometry;
use crate::quadrature::{
    gaussian_chirp_integral, recommend_grid, resolving_count, ComplexField, Grid1D,
    SampledTransform,
};

/// Pump window half-width in units of `a_p`.
pub const PUMP_HALFWIDTH_SIGMAS: f64 = 8.0;

/// Minimum number of idler samples across the slit.
pub const MIN_SLIT_SAMPLES: usize = 257;

/// Sinc zero at which the phase-mismatch κ integral is truncated.
pub const MISMATCH_SINC_ZEROS: f64 = 6.0;

/// Samples per sinc lobe in the phase-mismatch κ integral.
pub const MISMATCH_SAMPLES_PER_LOBE: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalPlane {
    /// `z = d2`, conjugate to the slit.
    Ghost,
    /// `z = d3`.
    Diffraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdlerDetector {
    /// Integrating detector directly behind the slit.
    Slit,
    /// Detector in the back focal plane of the collector lens.
    CollectorFocus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlaneSelector {
    pub idler_detector: IdlerDetector,
    pub signal_plane: SignalPlane,
}

impl PlaneSelector {
    pub const ALL: [PlaneSelector; 4] = [
        PlaneSelector::new(IdlerDetector::Slit, SignalPlane::Ghost),
        PlaneSelector::new(IdlerDetector::Slit, SignalPlane::Diffraction),
        PlaneSelector::new(IdlerDetector::CollectorFocus, SignalPlane::Ghost),
        PlaneSelector::new(IdlerDetector::CollectorFocus, SignalPlane::Diffraction),
    ];

    pub const fn new(idler_detector: IdlerDetector, signal_plane: SignalPlane) -> Self {
        Self {
            idler_detector,
            signal_plane,
        }
    }
}

impl std::fmt::Display for SignalPlane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SignalPlane::Ghost => "ghost",
            SignalPlane::Diffraction => "diffraction",
        })
    }
}

impl std::fmt::Display for IdlerDetector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IdlerDetector::Slit => "slit",
            IdlerDetector::CollectorFocus => "focus",
        })
    }
}

impl std::fmt::Display for PlaneSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.idler_detector, self.signal_plane)
    }
}

/// How the pump integral inside `f` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMethod {
    /// Closed-form Gaussian-chirp transform.
    #[default]
    ClosedForm,
    /// Composite quadrature over the pump window.
    Quadrature,
}

/// Free-space impulse response between transverse points on two planes.
pub fn fresnel_kernel(x2: f64, z2: f64, x0: f64, z0: f64, lambda: f64) -> Result<Complex64> {
    let dz = z2 - z0;
    if dz == 0.0 {
        return Err(Error::CoincidentPlanes(z0));
    }
    let dx = x2 - x0;
    Ok(Complex64::from_polar(1.0, PI * dx * dx / (lambda * dz)))
}

/// Stationary-phase reduction of a lens-plane integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPhase {
    /// `exp(iφ)` at the stationary point.
    pub phase: Complex64,
    /// Lens-plane coordinate of the stationary point.
    pub stationary_point: f64,
}

/// Idler path crystal → imaging lens → slit, reduced at the lens.
pub fn imaging_lens_phase(x1i: f64, x0i: f64, g: &GhostGeometry) -> StationaryPhase {
    let m = g.magnification();
    let lambda = g.lambda;
    let phi = (PI * x1i * x1i / (lambda * g.s0)) * (g.d2 - m * g.d1) / g.d2
        - PI * x0i * x0i / (lambda * g.d2)
        - 2.0 * PI * m * x1i * x0i / (lambda * g.d2);
    StationaryPhase {
        phase: Complex64::from_polar(1.0, phi),
        stationary_point: g.d1 * (g.d1 + g.d2) / g.d2 * (x1i / g.s0 + x0i / g.d1),
    }
}

/// Slit → collector lens → focal plane, reduced at the collector lens.
pub fn collector_lens_phase(x1i: f64, xd1: f64, fc: f64, lambda: f64) -> Result<StationaryPhase> {
    if !(fc > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "collector focal length must be positive, got {fc}"
        )));
    }
    Ok(StationaryPhase {
        phase: Complex64::from_polar(1.0, -2.0 * PI * x1i * xd1 / (lambda * fc)),
        stationary_point: x1i + xd1,
    })
}

/// `f` sampled on an idler × signal grid, row-major by idler position.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub idler: Grid1D,
    pub signal: Grid1D,
    pub values: Vec<Complex64>,
}

impl KernelTable {
    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.signal.count;
        &self.values[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks(self.signal.count)
    }

    pub fn row_field(&self, i: usize) -> ComplexField {
        ComplexField {
            grid: self.signal,
            values: self.row(i).to_vec(),
        }
    }
}

/// Validated geometry plus the evaluation policy for the kernels.
#[derive(Debug, Clone)]
pub struct KernelContext {
    geometry: GhostGeometry,
    pub method: KernelMethod,
}

impl KernelContext {
    pub fn new(geometry: GhostGeometry) -> Result<Self> {
        Ok(Self {
            geometry: geometry.validated()?,
            method: KernelMethod::default(),
        })
    }

    pub fn with_method(mut self, method: KernelMethod) -> Self {
        self.method = method;
        self
    }

    pub fn geometry(&self) -> &GhostGeometry {
        &self.geometry
    }

    pub fn plane_distance(&self, plane: SignalPlane) -> f64 {
        match plane {
            SignalPlane::Ghost => self.geometry.d2,
            SignalPlane::Diffraction => self.geometry.d3,
        }
    }

    /// Quadratic pump-plane phase coefficient β (rad/m²) for a signal plane.
    pub fn chirp_rate(&self, plane: SignalPlane) -> f64 {
        let g = &self.geometry;
        let z = self.plane_distance(plane);
        if plane == SignalPlane::Ghost {
            0.0
        } else {
            PI * (g.d2 - z) / (g.lambda * g.d2 * z)
        }
    }

    /// Linear pump-plane phase rate `k` (rad/m) for an idler/signal pair.
    pub fn spatial_frequency(&self, x1i: f64, plane: SignalPlane, x_m: f64) -> f64 {
        let g = &self.geometry;
        let z = self.plane_distance(plane);
        2.0 * PI * (g.magnification() * x1i + x_m * g.d2 / z) / (g.lambda * g.d2)
    }

    fn leading_phase(&self, plane: SignalPlane, x_m: f64) -> Complex64 {
        let z = self.plane_distance(plane);
        Complex64::from_polar(1.0, PI * x_m * x_m / (self.geometry.lambda * z))
    }

    fn pump_field(&self, plane: SignalPlane, k_max: f64) -> ComplexField {
        let a = self.geometry.a_p;
        let beta = self.chirp_rate(plane);
        let grid = recommend_grid(a, beta.abs(), k_max, PUMP_HALFWIDTH_SIGMAS);
        ComplexField::from_fn(grid, |x| {
            Complex64::from_polar((-x * x / (2.0 * a * a)).exp(), beta * x * x)
        })
        .expect("gaussian window is finite")
    }

    /// Signal amplitude at `x_m` on `plane` for a point idler detection at `x1i`.
    pub fn kernel_f(&self, x1i: f64, plane: SignalPlane, x_m: f64) -> Complex64 {
        let k = self.spatial_frequency(x1i, plane, x_m);
        let integral = match self.method {
            KernelMethod::ClosedForm => {
                gaussian_chirp_integral(self.geometry.a_p, self.chirp_rate(plane), k)
            }
            KernelMethod::Quadrature => SampledTransform::new(&self.pump_field(plane, k.abs()))
                .expect("finite")
                .at(k),
        };
        self.leading_phase(plane, x_m) * integral
    }

    /// `f` on every (idler, signal) pair of two grids.
    pub fn kernel_f_table(
        &self,
        idler: &Grid1D,
        plane: SignalPlane,
        signal: &Grid1D,
    ) -> KernelTable {
        let lead: Vec<Complex64> = signal
            .positions()
            .map(|x| self.leading_phase(plane, x))
            .collect();
        let a = self.geometry.a_p;
        let beta = self.chirp_rate(plane);
        let transform = match self.method {
            KernelMethod::ClosedForm => None,
            KernelMethod::Quadrature => {
                let k_max = self
                    .spatial_frequency(idler.max_abs(), plane, signal.max_abs())
                    .abs();
                Some(SampledTransform::new(&self.pump_field(plane, k_max)).expect("finite"))
            }
        };
        let mut values = vec![Complex64::new(0.0, 0.0); idler.count * signal.count];
        values
            .par_chunks_mut(signal.count)
            .enumerate()
            .for_each(|(i, row)| {
                let x1i = idler.position(i);
                for (m, out) in row.iter_mut().enumerate() {
                    let k = self.spatial_frequency(x1i, plane, signal.position(m));
                    let integral = match &transform {
                        Some(t) => t.at(k),
                        None => gaussian_chirp_integral(a, beta, k),
                    };
                    *out = lead[m] * integral;
                }
            });
        KernelTable {
            idler: *idler,
            signal: *signal,
            values,
        }
    }

    /// Amplitude width (σ) of the ghost-plane point-spread function in the
    /// slit coordinate.
    pub fn psf_sigma_in_slit(&self) -> f64 {
        let g = &self.geometry;
        g.lambda * g.d2 / (2.0 * PI * g.a_p * g.magnification())
    }

    /// Slit sampling for `f` and `g`: resolves the PSF envelope, the chirp of
    /// `f` in `x1i` for signal positions up to `signal_max_abs`, and the
    /// collector phase for `|xD1| ≤ xd1_max_abs`.
    pub fn slit_grid(&self, plane: SignalPlane, signal_max_abs: f64, xd1_max_abs: f64) -> Grid1D {
        let g = &self.geometry;
        let dk_dx1i = 2.0 * PI * g.magnification() / (g.lambda * g.d2);
        let k_max = self
            .spatial_frequency(g.w / 2.0, plane, signal_max_abs)
            .abs();
        let gamma = Complex64::new(1.0 / (2.0 * g.a_p * g.a_p), -self.chirp_rate(plane));
        let chirp_rate = 2.0 * (1.0 / (4.0 * gamma)).im.abs() * k_max * dk_dx1i;
        let envelope_rate = PI / self.psf_sigma_in_slit();
        let collector_rate = 2.0 * PI * xd1_max_abs / (g.lambda * g.fc);
        let count = resolving_count(
            g.w,
            chirp_rate + envelope_rate + collector_rate,
            MIN_SLIT_SAMPLES,
        );
        Grid1D::centered(g.w / 2.0, count).expect("w > 0")
    }

    /// Collector-focus amplitude at `x_m` for a point idler detection at `xd1`.
    pub fn kernel_g(&self, xd1: f64, plane: SignalPlane, x_m: f64) -> Complex64 {
        let slit = self.slit_grid(plane, x_m.abs(), xd1.abs());
        let g = &self.geometry;
        let field = ComplexField::from_fn(slit, |x1i| {
            let c = collector_lens_phase(x1i, xd1, g.fc, g.lambda).expect("fc validated");
            c.phase * self.kernel_f(x1i, plane, x_m)
        })
        .expect("finite");
        crate::quadrature::integrate_sampled(&field).expect("finite")
    }

    /// `g` on every (xD1, signal) pair, from a precomputed `f` table over the slit.
    pub fn kernel_g_table(&self, f_table: &KernelTable, xd1: &Grid1D) -> KernelTable {
        let g = &self.geometry;
        let weights = f_table.idler.weights();
        let ns = f_table.signal.count;
        let mut values = vec![Complex64::new(0.0, 0.0); xd1.count * ns];
        values.par_chunks_mut(ns).enumerate().for_each(|(d, row)| {
            let xd = xd1.position(d);
            for (i, f_row) in f_table.rows().enumerate() {
                let x1i = f_table.idler.position(i);
                let c = collector_lens_phase(x1i, xd, g.fc, g.lambda)
                    .expect("fc validated")
                    .phase
                    * weights[i];
                for (out, f) in row.iter_mut().zip(f_row) {
                    *out += c * f;
                }
            }
        });
        KernelTable {
            idler: *xd1,
            signal: f_table.signal,
            values,
        }
    }

    /// Ghost-plane point-spread intensity for a point idler detector at the
    /// slit centre, including longitudinal phase mismatch over a crystal of
    /// length `crystal_length`. `L = 0` uses the matched kernel directly.
    pub fn psf_with_mismatch(&self, signal: &Grid1D, crystal_length: f64) -> Result<Vec<f64>> {
        if !(crystal_length >= 0.0 && crystal_length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "crystal length must be nonnegative, got {crystal_length}"
            )));
        }
        if crystal_length == 0.0 {
            return Ok(signal
                .positions()
                .map(|x| self.kernel_f(0.0, SignalPlane::Ghost, x).norm_sqr())
                .collect());
        }
        let g = &self.geometry;
        let (lambda, d2, a) = (g.lambda, g.d2, g.a_p);
        let k_i = g.idler_wavenumber();
        let mismatch = crystal_length / (2.0 * k_i);
        let chirp = lambda * d2 / (4.0 * PI) + mismatch;
        let window = PUMP_HALFWIDTH_SIGMAS * a;

        // κ range: up to the chosen sinc zero, but no further than the
        // stationary point of the outermost pump sample.
        let kappa_zero = (2.0 * MISMATCH_SINC_ZEROS * PI * k_i / crystal_length).sqrt();
        let kappa_stationary = 1.25 * window / (2.0 * chirp);
        let kappa_max = kappa_zero.min(kappa_stationary);
        let lobe_width = PI * k_i / (crystal_length * kappa_max);
        let kappa_rate = (2.0 * chirp * kappa_max + window)
            .max(crate::quadrature::MAX_PHASE_PER_STEP * MISMATCH_SAMPLES_PER_LOBE / lobe_width);
        let kappa_grid =
            Grid1D::centered(kappa_max, resolving_count(2.0 * kappa_max, kappa_rate, 33))?;
        let spectrum = ComplexField::from_fn(kappa_grid, |kappa| {
            let arg = kappa * kappa * mismatch;
            let sinc = if arg == 0.0 { 1.0 } else { arg.sin() / arg };
            Complex64::from_polar(sinc, kappa * kappa * chirp)
        })?;
        let inner = SampledTransform::new(&spectrum)?;

        let pump_rate = 2.0 * PI * (window + signal.max_abs()) / (lambda * d2) + kappa_max;
        let pump_grid = Grid1D::centered(window, resolving_count(2.0 * window, pump_rate, 33))?;
        let positions = pump_grid.to_vec();
        let inner_values: Vec<Complex64> = positions.par_iter().map(|&x0| inner.at(x0)).collect();
        let pump = ComplexField::new(
            pump_grid,
            positions
                .iter()
                .zip(&inner_values)
                .map(|(&x0, i)| {
                    Complex64::from_polar(
                        (-x0 * x0 / (2.0 * a * a)).exp(),
                        PI * x0 * x0 / (lambda * d2),
                    ) * i
                })
                .collect(),
        )?;
        let outer = SampledTransform::new(&pump)?;
        let xs = signal.to_vec();
        Ok(xs
            .par_iter()
            .map(|&x2s| outer.at(2.0 * PI * x2s / (lambda * d2)).norm_sqr())
            .collect())
    }
}
