//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::OnceLock;

use ghostsim::analysis::Normalization;
use ghostsim::kernels::{IdlerDetector, KernelMethod, PlaneSelector, SignalPlane};
use ghostsim::models::{
    auto_signal_grid, build_ensemble, expected_fwhm, expected_psf_fwhm, heisenberg_ccr,
    mixed_collapse_cr, propagate_state, pure_collapse_cr, pure_collapse_state, EnsembleCheck,
};
use ghostsim::quadrature::gaussian_chirp_integral;
use ghostsim::{compare, ComparisonReport, Distribution, GhostGeometry, Grid1D, KernelContext};
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};

const UM: f64 = 1e-6;
const MM: f64 = 1e-3;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ctx() -> KernelContext {
    KernelContext::new(GhostGeometry::paper2015()).unwrap()
}

/// Exact value of a float's shortest decimal representation.
fn exact(x: f64) -> Ratio<i128> {
    let s = format!("{x}");
    let (int, frac) = s.split_once('.').unwrap_or((&s, ""));
    let num: i128 = format!("{int}{frac}").parse().unwrap();
    Ratio::new(num, 10i128.pow(frac.len() as u32))
}

fn geometry_preset() -> Outcome {
    let g = GhostGeometry::paper2015();
    let one = Ratio::from_integer(1);
    let rational = one / exact(g.s0) + one / (exact(g.d1) + exact(g.d2)) - one / exact(g.f);
    let float = g.imaging_residual();
    let m = g.magnification();
    outcome(
        rational == Ratio::from_integer(0) && float < 1e-12 && m == 2.0,
        format!("rational residual {rational}, float residual {float:.2e}, M = {m}"),
    )
}

fn kernel_oracle() -> Outcome {
    let c = ctx().with_method(KernelMethod::Quadrature);
    let g = GhostGeometry::paper2015();
    let m = g.magnification();
    let mut rng = rand::rngs::StdRng::seed_from_u64(2015);
    let mut worst: f64 = 0.0;
    for n in 0..100 {
        let plane = if n % 2 == 0 {
            SignalPlane::Ghost
        } else {
            SignalPlane::Diffraction
        };
        let z = if plane == SignalPlane::Ghost {
            g.d2
        } else {
            g.d3
        };
        let x1i = rng.gen_range(-g.w / 2.0..=g.w / 2.0);
        let x_m = match plane {
            // within a few PSF widths of the image point, where f is not negligible
            SignalPlane::Ghost => -m * x1i + rng.gen_range(-3.0..=3.0) * expected_psf_fwhm(&c),
            SignalPlane::Diffraction => rng.gen_range(-3.0..=3.0) * expected_fwhm(&c, plane),
        };
        let beta = PI * (g.d2 - z) / (g.lambda * g.d2 * z);
        let k = 2.0 * PI * (m * x1i + x_m * g.d2 / z) / (g.lambda * g.d2);
        let oracle = Complex64::from_polar(1.0, PI * x_m * x_m / (g.lambda * z))
            * gaussian_chirp_integral(g.a_p, beta, k);
        let got = c.kernel_f(x1i, plane, x_m);
        worst = worst.max((got - oracle).norm() / oracle.norm());
    }
    outcome(
        worst < 1e-6,
        format!("max relative deviation {worst:.2e} over 100 positions"),
    )
}

struct EnsembleRun {
    sel: PlaneSelector,
    report: ComparisonReport,
    check: EnsembleCheck,
    probabilities: Distribution,
}

fn ensemble_runs() -> &'static [EnsembleRun] {
    static RUNS: OnceLock<Vec<EnsembleRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let c = ctx();
        PlaneSelector::ALL
            .iter()
            .map(|&sel| {
                let grid = auto_signal_grid(&c, sel.signal_plane);
                let e = build_ensemble(sel.idler_detector, sel.signal_plane, &grid, &c).unwrap();
                let mixed = mixed_collapse_cr(&e).unwrap();
                let heisenberg = heisenberg_ccr(sel, &grid, &c).unwrap();
                EnsembleRun {
                    sel,
                    report: compare(&mixed, &heisenberg, 1e-3).unwrap(),
                    check: e.check(),
                    probabilities: e.probability_distribution().unwrap(),
                }
            })
            .collect()
    })
}

fn run_for(sel: PlaneSelector) -> &'static EnsembleRun {
    ensemble_runs().iter().find(|r| r.sel == sel).unwrap()
}

fn mixed_equals_heisenberg() -> Outcome {
    let runs = ensemble_runs();
    let pass = runs.iter().all(|r| r.report.max_abs_diff < 1e-3);
    let detail = runs
        .iter()
        .map(|r| format!("{} {:.1e}", r.sel, r.report.max_abs_diff))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, format!("max pointwise deviation: {detail}"))
}

fn pure_collapse_contrast() -> Outcome {
    let c = ctx();
    let sel = |p| PlaneSelector::new(IdlerDetector::Slit, p);
    let diff = auto_signal_grid(&c, SignalPlane::Diffraction);
    let ratio = pure_collapse_cr(SignalPlane::Diffraction, &diff, &c)
        .unwrap()
        .fwhm()
        .unwrap()
        / heisenberg_ccr(sel(SignalPlane::Diffraction), &diff, &c)
            .unwrap()
            .fwhm()
            .unwrap();
    let ghost = auto_signal_grid(&c, SignalPlane::Ghost);
    let l2 = compare(
        &pure_collapse_cr(SignalPlane::Ghost, &ghost, &c).unwrap(),
        &heisenberg_ccr(sel(SignalPlane::Ghost), &ghost, &c).unwrap(),
        1.0,
    )
    .unwrap()
    .rel_l2;
    outcome(
        ratio < 0.5 && l2 < 0.05,
        format!(
            "diffraction FWHM ratio {ratio:.4} (< 0.5), ghost-plane L2 distance {l2:.4} (< 0.05)"
        ),
    )
}

fn ghost_image_fidelity() -> Outcome {
    let c = ctx();
    let grid = auto_signal_grid(&c, SignalPlane::Ghost);
    let w = heisenberg_ccr(
        PlaneSelector::new(IdlerDetector::Slit, SignalPlane::Ghost),
        &grid,
        &c,
    )
    .unwrap()
    .fwhm()
    .unwrap();
    let psf = expected_psf_fwhm(&c);
    let dev = w / 320e-6 - 1.0;
    outcome(
        dev.abs() < 0.06 && (psf / (18.5 * UM) - 1.0).abs() < 0.01,
        format!(
            "FWHM {:.2} um ({:+.2}%), PSF FWHM {:.2} um",
            w / UM,
            100.0 * dev,
            psf / UM
        ),
    )
}

fn flat_slit_probability() -> Outcome {
    let p = &run_for(PlaneSelector::new(IdlerDetector::Slit, SignalPlane::Ghost)).probabilities;
    let max = p.values.iter().copied().fold(f64::MIN, f64::max);
    let min = p.values.iter().copied().fold(f64::MAX, f64::min);
    let variation = (max - min) / max;
    outcome(
        variation < 1e-6,
        format!(
            "max relative variation {variation:.2e} over {} points",
            p.values.len()
        ),
    )
}

fn collector_focus_zeros() -> Outcome {
    let g = GhostGeometry::paper2015();
    let expected = g.lambda * g.fc / g.w;
    let p = &run_for(PlaneSelector::new(
        IdlerDetector::CollectorFocus,
        SignalPlane::Ghost,
    ))
    .probabilities;
    let peak = p.peak();
    let centre = p.grid.nearest_index(0.0);
    // first local minimum walking outward on each side
    let first_min = |step: isize| {
        let mut i = centre as isize;
        loop {
            let next = i + step;
            if next < 0 || next as usize >= p.values.len() {
                return None;
            }
            if p.values[next as usize] >= p.values[i as usize] {
                return Some(i as usize);
            }
            i = next;
        }
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for (side, step) in [("+", 1isize), ("-", -1)] {
        match first_min(step) {
            Some(i) => {
                let x = p.grid.position(i);
                let ok = (x.abs() - expected).abs() <= p.grid.step && p.values[i] < 1e-2 * peak;
                pass &= ok;
                detail.push(format!(
                    "{side}: minimum at {:.4} mm, P/Pmax {:.2e}",
                    x / MM,
                    p.values[i] / peak
                ));
            }
            None => {
                pass = false;
                let at = p.value_at(if step > 0 { expected } else { -expected }) / peak;
                detail.push(format!(
                    "{side}: no zero, monotone to the grid edge (P/Pmax = {at:.3} at {:.4} mm)",
                    expected / MM
                ));
            }
        }
    }
    outcome(
        pass,
        format!("expected ±{:.4} mm; {}", expected / MM, detail.join("; ")),
    )
}

fn route_equivalence() -> Outcome {
    let c = ctx();
    let ghost = auto_signal_grid(&c, SignalPlane::Ghost);
    let diff = auto_signal_grid(&c, SignalPlane::Diffraction);
    let at_ghost = pure_collapse_state(SignalPlane::Ghost, &ghost, &c).unwrap();
    let propagated = propagate_state(&at_ghost, &c, &diff).unwrap();
    let direct = pure_collapse_state(SignalPlane::Diffraction, &diff, &c).unwrap();
    let peak1 = |v: Vec<f64>| {
        Distribution::new(diff, v)
            .unwrap()
            .normalize(Normalization::Peak1)
            .unwrap()
    };
    let (a, b) = (peak1(propagated.intensities()), peak1(direct.intensities()));
    let dev = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let ratio = propagated.norm_sqr() / at_ghost.norm_sqr();
    outcome(
        dev < 1e-3 && (ratio - 1.0).abs() < 0.005,
        format!("max deviation {dev:.2e}, norm ratio {ratio:.6}"),
    )
}

fn phase_mismatch() -> Outcome {
    let c = ctx();
    let reference = ctx().with_method(KernelMethod::Quadrature);
    let psf = expected_psf_fwhm(&c);
    let grid = Grid1D::centered(4.0 * psf, 513).unwrap();
    let peak1 = |v: Vec<f64>| {
        Distribution::new(grid, v)
            .unwrap()
            .normalize(Normalization::Peak1)
            .unwrap()
    };
    let matched = peak1(
        grid.positions()
            .map(|x| reference.kernel_f(0.0, SignalPlane::Ghost, x).norm_sqr())
            .collect(),
    );
    let at_zero = peak1(c.psf_with_mismatch(&grid, 0.0).unwrap());
    let near_zero = peak1(c.psf_with_mismatch(&grid, 1e-9).unwrap());
    let l = c.geometry().crystal_length;
    let mismatched = peak1(c.psf_with_mismatch(&grid, l).unwrap());

    let max_dev = |d: &Distribution| {
        d.values
            .iter()
            .zip(&matched.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let (dev0, dev_tiny) = (max_dev(&at_zero), max_dev(&near_zero));
    let (w0, wl) = (matched.fwhm().unwrap(), mismatched.fwhm().unwrap());
    let tails: Vec<(f64, f64)> = [3.0 * w0, -3.0 * w0]
        .iter()
        .map(|&x| (matched.value_at(x), mismatched.value_at(x)))
        .collect();
    let tails_up = tails.iter().all(|(m, l)| l > m);
    outcome(
        dev0 < 1e-4 && dev_tiny < 1e-4 && wl >= w0 && tails_up,
        format!(
            "L = {:.1} mm: FWHM {:.2} -> {:.2} um, tail at 3 FWHM {:.2e} -> {:.2e}; L = 0 deviation {dev0:.1e}, L = 1 nm deviation {dev_tiny:.1e}",
            l / MM,
            w0 / UM,
            wl / UM,
            tails[0].0,
            tails[0].1
        ),
    )
}

fn ensemble_sanity() -> Outcome {
    let runs = ensemble_runs();
    let pass = runs.iter().all(|r| r.check.holds(1e-6));
    let detail = runs
        .iter()
        .map(|r| {
            format!(
                "{} sum {:.1e} basis {:.1e}",
                r.sel,
                (r.check.total_probability - 1.0).abs(),
                r.check.max_basis_norm_error
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, detail)
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let scenarios = [
        "heisenberg-slit-ghost",
        "pure-diffraction",
        "mixed-slit-diffraction",
        "basis-focus-ghost-offset",
        "probability-focus",
        "psf-mismatch",
    ];
    let mut mismatched = Vec::new();
    for name in scenarios {
        let outputs: Vec<Vec<u8>> = ["1", "3"]
            .iter()
            .map(|threads| {
                let path = dir.path().join(format!("{name}-{threads}.csv"));
                let status = Command::new(env!("CARGO_BIN_EXE_ghostsim"))
                    .args(["run", "--scenario", name, "--out"])
                    .arg(&path)
                    .env("RAYON_NUM_THREADS", threads)
                    .output()
                    .unwrap()
                    .status;
                assert!(status.success(), "{name} exited with {status}");
                std::fs::read(&path).unwrap()
            })
            .collect();
        if outputs[0] != outputs[1] {
            mismatched.push(name);
        }
    }
    outcome(
        mismatched.is_empty(),
        format!(
            "{} scenarios run twice with different thread counts, differing: {mismatched:?}",
            scenarios.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("geometry preset", geometry_preset),
        ("kernel oracle", kernel_oracle),
        ("mixed equals heisenberg", mixed_equals_heisenberg),
        ("pure-collapse contrast", pure_collapse_contrast),
        ("ghost-image fidelity", ghost_image_fidelity),
        ("flat slit-plane probability", flat_slit_probability),
        ("collector-focus probability zeros", collector_focus_zeros),
        ("route equivalence", route_equivalence),
        ("phase mismatch", phase_mismatch),
        ("ensemble sanity", ensemble_sanity),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "acceptance {:>2} {} {name}: {} ({:.1} s)",
            n + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
