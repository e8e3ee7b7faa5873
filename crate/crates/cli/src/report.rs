//! Model-comparison suite: mixed collapse against the non-collapse rate for
//! every detector/plane pairing, plus the pure-collapse contrast.

use std::fmt::Write;

use anyhow::Result;
use ghostsim::models::{
    auto_signal_grid, build_ensemble, heisenberg_ccr, mixed_collapse_cr, pure_collapse_cr,
};
use ghostsim::{
    compare, ComparisonReport, IdlerDetector, KernelContext, PlaneSelector, SignalPlane,
};

/// Pure-collapse FWHM over Heisenberg FWHM in the diffraction plane below
/// which the two models are considered distinguished.
pub const CONTRAST_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contrast {
    Detected,
    NotDetected,
    /// Pure and mixed collapse coincide, so there is nothing to detect.
    Degenerate,
}

impl Contrast {
    fn as_str(self) -> &'static str {
        match self {
            Contrast::Detected => "detected",
            Contrast::NotDetected => "not detected",
            Contrast::Degenerate => "degenerate",
        }
    }
}

pub struct EquivalenceReport {
    pub checks: Vec<(String, ComparisonReport)>,
    pub contrast: Contrast,
    pub contrast_report: ComparisonReport,
    /// Informational comparisons that do not affect the outcome.
    pub extra: Vec<(String, ComparisonReport)>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, r)| r.pass) && self.contrast == Contrast::Detected
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (name, r) in &self.checks {
            writeln!(s, "[{name}]\n{}", r.to_kv_block()).unwrap();
        }
        writeln!(s, "[pure vs heisenberg, slit/diffraction]").unwrap();
        s.push_str(&self.contrast_report.to_kv_block());
        let ratio = self.contrast_report.fwhm_ratio();
        writeln!(
            s,
            "fwhm_ratio = {}",
            ratio.map_or("nan".into(), |r| format!("{r:.6}"))
        )
        .unwrap();
        writeln!(s, "contrast = {}\n", self.contrast.as_str()).unwrap();
        for (name, r) in &self.extra {
            writeln!(s, "[{name}]\n{}", r.to_kv_block()).unwrap();
        }
        let failed = self.checks.iter().filter(|(_, r)| !r.pass).count();
        writeln!(
            s,
            "summary: {}/{} mixed checks passed, contrast {}",
            self.checks.len() - failed,
            self.checks.len(),
            self.contrast.as_str()
        )
        .unwrap();
        s
    }
}

pub fn report_equivalence(ctx: &KernelContext, tolerance: f64) -> Result<EquivalenceReport> {
    let mut checks = Vec::new();
    let mut extra = Vec::new();
    let mut mixed_focus_diffraction = None;
    for sel in PlaneSelector::ALL {
        let grid = auto_signal_grid(ctx, sel.signal_plane);
        log::info!("comparing mixed and heisenberg for {sel}");
        let ensemble = build_ensemble(sel.idler_detector, sel.signal_plane, &grid, ctx)?;
        let mixed = mixed_collapse_cr(&ensemble)?;
        let heisenberg = heisenberg_ccr(sel, &grid, ctx)?;
        checks.push((
            format!("mixed vs heisenberg, {sel}"),
            compare(&mixed, &heisenberg, tolerance)?,
        ));
        if sel == PlaneSelector::new(IdlerDetector::CollectorFocus, SignalPlane::Diffraction) {
            mixed_focus_diffraction = Some(mixed);
        }
    }

    let slit = |plane| PlaneSelector::new(IdlerDetector::Slit, plane);
    let diffraction = auto_signal_grid(ctx, SignalPlane::Diffraction);
    let pure = pure_collapse_cr(SignalPlane::Diffraction, &diffraction, ctx)?;
    let heisenberg_slit = heisenberg_ccr(slit(SignalPlane::Diffraction), &diffraction, ctx)?;
    let mixed_slit = mixed_collapse_cr(&build_ensemble(
        IdlerDetector::Slit,
        SignalPlane::Diffraction,
        &diffraction,
        ctx,
    )?)?;
    let contrast_report = compare(&pure, &heisenberg_slit, tolerance)?;
    let contrast = if compare(&pure, &mixed_slit, tolerance)?.pass {
        Contrast::Degenerate
    } else if contrast_report
        .fwhm_ratio()
        .is_some_and(|r| r < CONTRAST_RATIO)
    {
        Contrast::Detected
    } else {
        Contrast::NotDetected
    };

    let ghost = auto_signal_grid(ctx, SignalPlane::Ghost);
    extra.push((
        "pure vs heisenberg, slit/ghost".to_string(),
        compare(
            &pure_collapse_cr(SignalPlane::Ghost, &ghost, ctx)?,
            &heisenberg_ccr(slit(SignalPlane::Ghost), &ghost, ctx)?,
            tolerance,
        )?,
    ));
    if let Some(mixed) = mixed_focus_diffraction {
        extra.push((
            "mixed focus/diffraction vs heisenberg slit/diffraction".to_string(),
            compare(&mixed, &heisenberg_slit, tolerance)?,
        ));
    }

    Ok(EquivalenceReport {
        checks,
        contrast,
        contrast_report,
        extra,
    })
}
