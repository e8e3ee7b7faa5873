use ghostsim::models::{
    auto_signal_grid, build_ensemble, equivalence_check, heisenberg_ccr, pure_collapse_cr,
};
use ghostsim::{compare, GhostGeometry, IdlerDetector, KernelContext, PlaneSelector, SignalPlane};

fn ctx() -> KernelContext {
    KernelContext::new(GhostGeometry::paper2015()).unwrap()
}

#[test]
fn mixed_ensemble_reproduces_heisenberg_everywhere() {
    let c = ctx();
    for sel in PlaneSelector::ALL {
        let grid = auto_signal_grid(&c, sel.signal_plane);
        let started = std::time::Instant::now();
        let report = equivalence_check(&c, sel, &grid, 1e-3).unwrap();
        eprintln!(
            "{sel}: {:.3e} in {:?}",
            report.max_abs_diff,
            started.elapsed()
        );
        assert!(report.pass, "{}", report.to_kv_block());
    }
}

#[test]
fn ensembles_are_normalized() {
    let c = ctx();
    for sel in PlaneSelector::ALL {
        let grid = auto_signal_grid(&c, sel.signal_plane);
        let e = build_ensemble(sel.idler_detector, sel.signal_plane, &grid, &c).unwrap();
        let check = e.check();
        assert!(check.holds(1e-6), "{sel}: {check:?}");
    }
}

#[test]
fn pure_collapse_differs_from_heisenberg_only_downstream() {
    let c = ctx();
    let sel = |p| PlaneSelector::new(IdlerDetector::Slit, p);

    let ghost = auto_signal_grid(&c, SignalPlane::Ghost);
    let pure = pure_collapse_cr(SignalPlane::Ghost, &ghost, &c).unwrap();
    let heis = heisenberg_ccr(sel(SignalPlane::Ghost), &ghost, &c).unwrap();
    let r = compare(&pure, &heis, 1.0).unwrap();
    assert!(r.fwhm_ratio().unwrap() > 0.9, "{r:?}");

    let diff = auto_signal_grid(&c, SignalPlane::Diffraction);
    let pure = pure_collapse_cr(SignalPlane::Diffraction, &diff, &c).unwrap();
    let heis = heisenberg_ccr(sel(SignalPlane::Diffraction), &diff, &c).unwrap();
    let r = compare(&pure, &heis, 1.0).unwrap();
    assert!(r.fwhm_ratio().unwrap() < 0.5, "{r:?}");
}
