//! Optical layout of the ghost-imaging arms.
//!
//! ```text
//!            d1            S0       fc      fc
//!  crystal ------ lens f ------ slit ---- Lc ---- D1 (collector focus)
//!     |
//!     +---- d2 ----> ghost image plane ---- (d3 - d2) ----> diffraction plane
//! ```
//!
//! All lengths are in meters. The idler arm images the slit back onto the
//! signal arm's ghost plane, so `1/S0 + 1/(d1 + d2) = 1/f` must hold.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance on the thin-lens imaging condition.
pub const IMAGING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhostGeometry {
    /// Imaging lens to slit.
    #[serde(rename = "S0")]
    pub s0: f64,
    /// Crystal to imaging lens (idler arm).
    pub d1: f64,
    /// Crystal to ghost image plane (signal arm).
    pub d2: f64,
    /// Crystal to diffraction plane (signal arm).
    pub d3: f64,
    /// Imaging lens focal length.
    pub f: f64,
    /// Collector lens focal length.
    pub fc: f64,
    /// Slit width.
    pub w: f64,
    /// Pump radius, intensity `exp(-x^2 / a_p^2)`.
    pub a_p: f64,
    /// Degenerate signal/idler wavelength.
    pub lambda: f64,
    /// Crystal length; only the phase-mismatch PSF uses it.
    #[serde(rename = "L", default = "default_crystal_length")]
    pub crystal_length: f64,
    /// Index used for the idler wavenumber inside the crystal.
    #[serde(default = "default_n_crystal")]
    pub n_crystal: f64,
}

fn default_crystal_length() -> f64 {
    3e-3
}

fn default_n_crystal() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `|1/S0 + 1/(d1+d2) - 1/f| * f`
    pub residual: f64,
    pub problems: Vec<String>,
    pub pass: bool,
}

impl GhostGeometry {
    /// Layout used for all published distributions (M = 2, degenerate 702.2 nm).
    pub fn paper2015() -> Self {
        Self {
            s0: 1.5,
            d1: 2.851,
            d2: 0.149,
            d3: 2.149,
            f: 1.0,
            fc: 0.05,
            w: 160e-6,
            a_p: 1.5e-3,
            lambda: 0.7022e-6,
            crystal_length: default_crystal_length(),
            n_crystal: default_n_crystal(),
        }
    }

    /// Names accepted by [`GhostGeometry::preset`].
    pub const PRESETS: [&'static str; 2] = ["paper2015", "paper2015-pointslit"];

    /// Looks up a named preset. `paper2015-pointslit` shrinks the slit to
    /// 1 nm, where every collapse model reduces to a single basis state.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "paper2015" => Some(Self::paper2015()),
            "paper2015-pointslit" => Some(Self {
                w: 1e-9,
                ..Self::paper2015()
            }),
            _ => None,
        }
    }

    pub fn imaging_residual(&self) -> f64 {
        (1.0 / self.s0 + 1.0 / (self.d1 + self.d2) - 1.0 / self.f).abs() * self.f
    }

    pub fn validate(&self) -> ValidationReport {
        let mut problems = Vec::new();
        let lengths = [
            ("S0", self.s0),
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("f", self.f),
            ("fc", self.fc),
            ("w", self.w),
            ("a_p", self.a_p),
            ("lambda", self.lambda),
        ];
        for (name, v) in lengths {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("{name} must be a positive length, got {v}"));
            }
        }
        if !(self.crystal_length.is_finite() && self.crystal_length >= 0.0) {
            problems.push(format!(
                "L must be nonnegative, got {}",
                self.crystal_length
            ));
        }
        if !(self.n_crystal.is_finite() && self.n_crystal > 0.0) {
            problems.push(format!(
                "n_crystal must be positive, got {}",
                self.n_crystal
            ));
        }
        if self.d3 <= self.d2 {
            problems.push(format!(
                "diffraction plane must lie beyond the ghost plane (d3 = {} <= d2 = {})",
                self.d3, self.d2
            ));
        }
        let residual = self.imaging_residual();
        if !(residual < IMAGING_TOLERANCE) {
            problems.push(format!(
                "imaging condition violated: relative residual {residual:.3e}"
            ));
        }
        ValidationReport {
            residual,
            pass: problems.is_empty(),
            problems,
        }
    }

    /// Validated copy, or the first problem found.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.pass {
            Ok(self)
        } else {
            Err(Error::Geometry(report.problems.join("; ")))
        }
    }

    /// Ghost-image magnification `(d1 + d2) / S0`.
    pub fn magnification(&self) -> f64 {
        (self.d1 + self.d2) / self.s0
    }

    /// Delay between a ghost-plane and a diffraction-plane detection.
    pub fn correlation_delay(&self) -> Result<f64> {
        let dt = (self.d3 - self.d2) / SPEED_OF_LIGHT;
        if dt < 0.0 {
            return Err(Error::Geometry(format!(
                "negative correlation delay {dt:.3e} s (d3 < d2)"
            )));
        }
        Ok(dt)
    }

    /// Axial displacement of the ghost plane for a signal wavelength
    /// phase matched off axis; `lambda_ratio` is `lambda_s0 / lambda_s'`.
    pub fn nondegenerate_plane_shift(&self, lambda_ratio: f64) -> Result<f64> {
        if !(lambda_ratio > 0.0 && lambda_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "wavelength ratio must be positive, got {lambda_ratio}"
            )));
        }
        Ok((1.0 - lambda_ratio) * self.d2)
    }

    /// Idler wavenumber inside the crystal.
    pub fn idler_wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.n_crystal / self.lambda
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))
    }

    pub fn to_kv_string(&self) -> String {
        toml::to_string(self).expect("flat struct of floats always serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_kv_str(&text)
    }
}
