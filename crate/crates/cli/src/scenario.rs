//! Named scenarios and the evaluation of a single run.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use ghostsim::models::{
    auto_signal_grid, basis_state_cr, build_ensemble, expected_psf_fwhm, heisenberg_ccr_detailed,
    mixed_collapse_cr, pure_collapse_cr, AUTO_HALFWIDTH_FWHMS, AUTO_SAMPLES_PER_FEATURE,
};
use ghostsim::{
    Distribution, GhostGeometry, Grid1D, IdlerDetector, KernelContext, PlaneSelector, SignalPlane,
};

const UM: f64 = 1e-6;
const MM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Model {
    Heisenberg,
    Pure,
    Mixed,
    MixedBasis,
    /// One basis state scaled by its detection probability.
    WeightedBasis,
    /// Idler detection probability over the slit or collector focal plane.
    Probability,
    PsfMismatch,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use clap::ValueEnum;
        f.write_str(
            self.to_possible_value()
                .expect("no skipped variants")
                .get_name(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Idler {
    Slit,
    Focus,
}

impl From<Idler> for IdlerDetector {
    fn from(i: Idler) -> Self {
        match i {
            Idler::Slit => IdlerDetector::Slit,
            Idler::Focus => IdlerDetector::CollectorFocus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Plane {
    Ghost,
    Diffraction,
}

impl From<Plane> for SignalPlane {
    fn from(p: Plane) -> Self {
        match p {
            Plane::Ghost => SignalPlane::Ghost,
            Plane::Diffraction => SignalPlane::Diffraction,
        }
    }
}

/// Where the geometry comes from; recorded in the CSV header.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySource {
    Preset(String),
    File(std::path::PathBuf),
}

impl GeometrySource {
    pub fn load(&self) -> Result<GhostGeometry> {
        match self {
            GeometrySource::Preset(name) => GhostGeometry::preset(name).with_context(|| {
                format!(
                    "unknown preset '{name}' (known: {})",
                    GhostGeometry::PRESETS.join(", ")
                )
            }),
            GeometrySource::File(path) => Ok(GhostGeometry::load(path)?),
        }
    }
}

impl fmt::Display for GeometrySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometrySource::Preset(name) => write!(f, "preset: {name}"),
            GeometrySource::File(path) => write!(f, "geometry: {}", path.display()),
        }
    }
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub geometry: GeometrySource,
    pub model: Model,
    pub idler: Idler,
    pub plane: Plane,
    pub grid_points: Option<usize>,
    pub grid_halfwidth: Option<f64>,
    pub crystal_length: Option<f64>,
    pub basis_at: Option<f64>,
}

impl RunSpec {
    pub fn selector(&self) -> PlaneSelector {
        PlaneSelector::new(self.idler.into(), self.plane.into())
    }

    /// Header lines describing the run, without the leading `#`.
    pub fn metadata(&self, grid: &Grid1D) -> Vec<String> {
        let mut lines = vec![self.geometry.to_string(), format!("model: {}", self.model)];
        match self.model {
            Model::PsfMismatch => {}
            Model::Probability => lines.push(format!("idler: {}", IdlerDetector::from(self.idler))),
            _ => lines.push(format!("selector: {}", self.selector())),
        }
        if let Some(x) = self.basis_at {
            if matches!(self.model, Model::MixedBasis | Model::WeightedBasis) {
                lines.push(format!("basis_at_m: {x:e}"));
            }
        }
        if let (Model::PsfMismatch, Some(l)) = (self.model, self.crystal_length) {
            lines.push(format!("L_m: {l:e}"));
        }
        lines.push(format!(
            "grid: start={:e} step={:e} count={}",
            grid.start, grid.step, grid.count
        ));
        lines
    }
}

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub model: Model,
    pub idler: Idler,
    pub plane: Plane,
    pub basis_at: Option<f64>,
}

const fn scenario(
    name: &'static str,
    description: &'static str,
    model: Model,
    idler: Idler,
    plane: Plane,
    basis_at: Option<f64>,
) -> Scenario {
    Scenario {
        name,
        description,
        model,
        idler,
        plane,
        basis_at,
    }
}

use Idler::{Focus, Slit};
use Model::*;
use Plane::{Diffraction, Ghost};

#[rustfmt::skip]
pub const SCENARIOS: [Scenario; 21] = [
    scenario("heisenberg-slit-ghost", "non-collapse rate, slit detector, ghost plane", Heisenberg, Slit, Ghost, None),
    scenario("heisenberg-slit-diffraction", "non-collapse rate, slit detector, diffraction plane", Heisenberg, Slit, Diffraction, None),
    scenario("pure-ghost", "pure collapsed state, ghost plane", Pure, Slit, Ghost, None),
    scenario("pure-diffraction", "pure collapsed state, diffraction plane", Pure, Slit, Diffraction, None),
    scenario("basis-slit-ghost-center", "basis state for x1i = 0, ghost plane", MixedBasis, Slit, Ghost, Some(0.0)),
    scenario("basis-slit-diffraction-center", "basis state for x1i = 0, diffraction plane", MixedBasis, Slit, Diffraction, Some(0.0)),
    scenario("basis-slit-ghost-offset", "basis state for x1i = 42 um, ghost plane", MixedBasis, Slit, Ghost, Some(42.0 * UM)),
    scenario("basis-slit-diffraction-offset", "basis state for x1i = 42 um, diffraction plane", MixedBasis, Slit, Diffraction, Some(42.0 * UM)),
    scenario("probability-slit", "idler detection probability across the slit", Probability, Slit, Ghost, None),
    scenario("mixed-slit-ghost", "mixed collapsed state, slit detector, ghost plane", Mixed, Slit, Ghost, None),
    scenario("mixed-slit-diffraction", "mixed collapsed state, slit detector, diffraction plane", Mixed, Slit, Diffraction, None),
    scenario("heisenberg-focus-ghost", "non-collapse rate, collector-focus detector, ghost plane", Heisenberg, Focus, Ghost, None),
    scenario("heisenberg-focus-diffraction", "non-collapse rate, collector-focus detector, diffraction plane", Heisenberg, Focus, Diffraction, None),
    scenario("basis-focus-ghost-center", "basis state for xD1 = 0, ghost plane", MixedBasis, Focus, Ghost, Some(0.0)),
    scenario("basis-focus-diffraction-center", "basis state for xD1 = 0, diffraction plane", MixedBasis, Focus, Diffraction, Some(0.0)),
    scenario("basis-focus-ghost-offset", "basis state for xD1 = 0.25 mm, ghost plane", MixedBasis, Focus, Ghost, Some(0.25 * MM)),
    scenario("basis-focus-diffraction-offset", "basis state for xD1 = 0.25 mm, diffraction plane", MixedBasis, Focus, Diffraction, Some(0.25 * MM)),
    scenario("probability-focus", "idler detection probability across the collector focal plane", Probability, Focus, Ghost, None),
    scenario("weighted-basis-focus-diffraction", "probability-weighted basis state for xD1 = 0.25 mm, diffraction plane", WeightedBasis, Focus, Diffraction, Some(0.25 * MM)),
    scenario("mixed-focus-diffraction", "mixed collapsed state, collector-focus detector, diffraction plane", Mixed, Focus, Diffraction, None),
    scenario("psf-mismatch", "point-spread function with longitudinal phase mismatch", PsfMismatch, Slit, Ghost, None),
];

pub fn find(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

impl FromStr for Model {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Model as clap::ValueEnum>::from_str(s, false)
    }
}

/// Signal grid: auto-sized unless overridden. With only a point count the
/// auto extent is kept; with only a half-width the auto spacing is kept.
pub fn signal_grid(spec: &RunSpec, ctx: &KernelContext) -> Result<Grid1D> {
    let auto = match spec.model {
        Model::PsfMismatch => {
            let psf = expected_psf_fwhm(ctx);
            let half = AUTO_HALFWIDTH_FWHMS * psf;
            let count = (2.0 * half / (psf / AUTO_SAMPLES_PER_FEATURE)).ceil() as usize + 1;
            Grid1D::centered(half, count | 1)?
        }
        _ => auto_signal_grid(ctx, spec.plane.into()),
    };
    let grid = match (spec.grid_points, spec.grid_halfwidth) {
        (None, None) => auto,
        (Some(n), None) => Grid1D::centered(auto.max_abs(), n)?,
        (None, Some(h)) => {
            let count = (2.0 * h / auto.step).ceil() as usize + 1;
            Grid1D::centered(h, count | 1)?
        }
        (Some(n), Some(h)) => Grid1D::centered(h, n)?,
    };
    Ok(grid)
}

/// Evaluates the run into a raw (unnormalized) distribution.
pub fn evaluate(spec: &RunSpec, ctx: &KernelContext) -> Result<Distribution> {
    let grid = signal_grid(spec, ctx)?;
    let plane = SignalPlane::from(spec.plane);
    let idler = IdlerDetector::from(spec.idler);
    let dist = match spec.model {
        Model::Heisenberg => {
            let r = heisenberg_ccr_detailed(spec.selector(), &grid, ctx)?;
            if let Some(e) = r.captured_energy {
                log::info!(
                    "collector range captures {:.4}% of the pattern energy",
                    100.0 * e
                );
            }
            r.distribution
        }
        Model::Pure => {
            if spec.idler != Idler::Slit {
                bail!("the pure collapsed state is defined for the slit detector only");
            }
            pure_collapse_cr(plane, &grid, ctx)?
        }
        Model::Mixed => mixed_collapse_cr(&build_ensemble(idler, plane, &grid, ctx)?)?,
        Model::MixedBasis => {
            basis_state_cr(idler, spec.basis_at.unwrap_or(0.0), plane, &grid, ctx)?
        }
        Model::WeightedBasis => {
            let e = build_ensemble(idler, plane, &grid, ctx)?;
            e.weighted_basis_distribution(e.index_at(spec.basis_at.unwrap_or(0.0))?)?
        }
        Model::Probability => {
            build_ensemble(idler, SignalPlane::Ghost, &grid, ctx)?.probability_distribution()?
        }
        Model::PsfMismatch => {
            let l = spec.crystal_length.unwrap_or(ctx.geometry().crystal_length);
            Distribution::new(grid, ctx.psf_with_mismatch(&grid, l)?)?
        }
    };
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_are_unique() {
        let mut names: Vec<_> = SCENARIOS.iter().map(|s| s.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), SCENARIOS.len());
    }

    #[test]
    fn model_names_round_trip() {
        for m in [
            Heisenberg,
            Pure,
            Mixed,
            MixedBasis,
            WeightedBasis,
            Probability,
            PsfMismatch,
        ] {
            assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
        }
        assert_eq!(MixedBasis.to_string(), "mixed_basis");
    }

    #[test]
    fn grid_overrides() {
        let ctx = KernelContext::new(GhostGeometry::paper2015()).unwrap();
        let mut spec = RunSpec {
            geometry: GeometrySource::Preset("paper2015".into()),
            model: Heisenberg,
            idler: Slit,
            plane: Ghost,
            grid_points: None,
            grid_halfwidth: None,
            crystal_length: None,
            basis_at: None,
        };
        let auto = signal_grid(&spec, &ctx).unwrap();
        spec.grid_points = Some(101);
        let g = signal_grid(&spec, &ctx).unwrap();
        assert_eq!((g.count, g.max_abs()), (101, auto.max_abs()));
        spec.grid_halfwidth = Some(0.5 * MM);
        let g = signal_grid(&spec, &ctx).unwrap();
        assert_eq!((g.count, g.start), (101, -0.5 * MM));
        spec.grid_points = None;
        let g = signal_grid(&spec, &ctx).unwrap();
        assert!(g.step <= auto.step && g.count % 2 == 1);
    }
}
