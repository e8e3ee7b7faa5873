use ghostsim::models::expected_psf_fwhm;
use ghostsim::{Distribution, GhostGeometry, Grid1D, KernelContext, Normalization};

const UM: f64 = 1e-6;
const MM: f64 = 1e-3;

fn psf(ctx: &KernelContext, grid: &Grid1D, l: f64) -> Distribution {
    let values = ctx.psf_with_mismatch(grid, l).unwrap();
    Distribution::new(*grid, values)
        .unwrap()
        .normalize(Normalization::Peak1)
        .unwrap()
}

fn setup() -> (KernelContext, Grid1D) {
    let ctx = KernelContext::new(GhostGeometry::paper2015()).unwrap();
    let grid = Grid1D::centered(6.0 * expected_psf_fwhm(&ctx), 481).unwrap();
    (ctx, grid)
}

#[test]
fn vanishing_crystal_length_matches_matched_psf() {
    let (ctx, grid) = setup();
    let matched = psf(&ctx, &grid, 0.0);
    let tiny = psf(&ctx, &grid, 1e-9);
    let worst = matched
        .values
        .iter()
        .zip(&tiny.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
    assert!((matched.fwhm().unwrap() - 18.49 * UM).abs() < 0.05 * UM);
}

#[test]
fn mismatch_broadens_core_and_tails() {
    let (ctx, grid) = setup();
    let matched = psf(&ctx, &grid, 0.0);
    let mismatched = psf(&ctx, &grid, 3.0 * MM);
    let w0 = matched.fwhm().unwrap();
    assert!(mismatched.fwhm().unwrap() >= w0);
    for x in [3.0 * w0, -3.0 * w0] {
        let i = grid.nearest_index(x);
        assert!(mismatched.values[i] > matched.values[i], "x={x}");
    }
}

#[test]
fn width_grows_with_crystal_length() {
    let (ctx, grid) = setup();
    let widths: Vec<f64> = [0.0, 1.0 * MM, 3.0 * MM, 10.0 * MM]
        .iter()
        .map(|&l| psf(&ctx, &grid, l).fwhm().unwrap())
        .collect();
    for pair in widths.windows(2) {
        assert!(pair[1] >= pair[0], "{widths:?}");
    }
}

#[test]
fn mismatched_psf_is_symmetric() {
    let (ctx, grid) = setup();
    let d = psf(&ctx, &grid, 3.0 * MM);
    for (a, b) in d.values.iter().zip(d.values.iter().rev()) {
        assert!((a - b).abs() < 1e-9);
    }
    assert!(d.peak_position().abs() <= grid.step);
}
