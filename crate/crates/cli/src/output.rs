use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use ghostsim::Distribution;
use plotters::prelude::*;

/// CSV text: `#` metadata lines, then `x_m,value`.
pub fn csv_text(metadata: &[String], dist: &Distribution) -> String {
    let mut out = String::new();
    for line in metadata {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("x_m,value\n");
    for (x, v) in dist.grid.positions().zip(&dist.values) {
        out.push_str(&format!("{x:.12e},{v:.12e}\n"));
    }
    out
}

/// Writes next to the destination, then renames over it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn svg_text(title: &str, dist: &Distribution) -> Result<String> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (800, 500)).into_drawing_area();
        root.fill(&WHITE)?;
        let (lo, hi) = (dist.grid.start, dist.grid.end());
        let top = dist.peak().max(f64::MIN_POSITIVE) * 1.05;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(70)
            .build_cartesian_2d(lo..hi, 0.0..top)?;
        chart
            .configure_mesh()
            .x_desc("x (m)")
            .y_desc("value")
            .x_label_formatter(&|x| format!("{x:.2e}"))
            .y_label_formatter(&|y| format!("{y:.2e}"))
            .draw()?;
        chart.draw_series(LineSeries::new(
            dist.grid.positions().zip(dist.values.iter().copied()),
            &RED,
        ))?;
        root.present()?;
    }
    Ok(svg)
}
