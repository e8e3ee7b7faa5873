use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ghostsim::{KernelContext, Normalization};

mod output;
mod report;
mod scenario;

use scenario::{GeometrySource, Idler, Model, Plane, RunSpec, SCENARIOS};

#[derive(Parser)]
#[command(
    name = "ghostsim",
    version,
    about = "Ghost-imaging counting-rate distributions under collapse and non-collapse models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one distribution and write it as CSV.
    Run(RunArgs),
    /// List the named scenarios.
    Scenarios,
    /// Run every named scenario into a directory.
    Batch(BatchArgs),
    /// Compare mixed collapse with the non-collapse model on all detector/plane pairs.
    Report(ReportArgs),
}

#[derive(Args)]
#[group(multiple = false)]
struct GeometryArgs {
    /// Named geometry preset.
    #[arg(long)]
    preset: Option<String>,
    /// Geometry key-value file.
    #[arg(long)]
    geometry: Option<PathBuf>,
}

impl GeometryArgs {
    fn source(&self) -> GeometrySource {
        match (&self.preset, &self.geometry) {
            (_, Some(path)) => GeometrySource::File(path.clone()),
            (Some(name), None) => GeometrySource::Preset(name.clone()),
            (None, None) => GeometrySource::Preset("paper2015".into()),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Start from a named scenario; other flags override it.
    #[arg(long)]
    scenario: Option<String>,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long, value_enum)]
    idler: Option<Idler>,
    #[arg(long, value_enum)]
    plane: Option<Plane>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Signal grid half-width (m).
    #[arg(long)]
    grid_halfwidth: Option<f64>,
    #[arg(long, default_value = "peak1", value_parser = parse_normalization)]
    normalize: Normalization,
    /// Crystal length for the phase-mismatch PSF (m).
    #[arg(long = "L")]
    crystal_length: Option<f64>,
    /// Idler position of the basis state (m).
    #[arg(long, allow_hyphen_values = true)]
    basis_at: Option<f64>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot here.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = "peak1", value_parser = parse_normalization)]
    normalize: Normalization,
    /// Write an SVG next to every CSV.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    match s.parse::<Normalization>() {
        Ok(Normalization::Raw) | Err(_) => Err(format!("expected peak1 or area1, got '{s}'")),
        Ok(n) => Ok(n),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run(args).map(|_| ExitCode::SUCCESS),
        Command::Scenarios => {
            let listing: String = SCENARIOS
                .iter()
                .map(|s| format!("{:34} {}\n", s.name, s.description))
                .collect();
            stdout(&listing).map(|_| ExitCode::SUCCESS)
        }
        Command::Batch(args) => batch(args).map(|_| ExitCode::SUCCESS),
        Command::Report(args) => report(args),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}

/// Writes to standard output; a closed pipe is not an error.
fn stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn resolve(args: &RunArgs) -> Result<RunSpec> {
    let base = match &args.scenario {
        Some(name) => {
            Some(scenario::find(name).with_context(|| format!("unknown scenario '{name}'"))?)
        }
        None => None,
    };
    Ok(RunSpec {
        geometry: args.geometry.source(),
        model: args
            .model
            .or(base.map(|s| s.model))
            .unwrap_or(Model::Heisenberg),
        idler: args.idler.or(base.map(|s| s.idler)).unwrap_or(Idler::Slit),
        plane: args.plane.or(base.map(|s| s.plane)).unwrap_or(Plane::Ghost),
        grid_points: args.grid_points,
        grid_halfwidth: args.grid_halfwidth,
        crystal_length: args.crystal_length,
        basis_at: args.basis_at.or(base.and_then(|s| s.basis_at)),
    })
}

fn run(args: RunArgs) -> Result<()> {
    let spec = resolve(&args)?;
    let (csv, summary, svg) = execute(&spec, args.normalize, args.plot.is_some())?;
    match &args.out {
        Some(path) => output::write_atomic(path, csv.as_bytes())?,
        None => stdout(&csv)?,
    }
    if let (Some(path), Some(svg)) = (&args.plot, svg) {
        output::write_atomic(path, svg.as_bytes())?;
    }
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

/// CSV text, one-line summary and optional SVG for a resolved run.
fn execute(
    spec: &RunSpec,
    normalize: Normalization,
    plot: bool,
) -> Result<(String, String, Option<String>)> {
    let ctx = KernelContext::new(spec.geometry.load()?)?;
    let dist = scenario::evaluate(spec, &ctx)?.normalize(normalize)?;
    let mut metadata = spec.metadata(&dist.grid);
    metadata.push(format!("normalization: {normalize}"));
    let csv = output::csv_text(&metadata, &dist);
    let width = match dist.fwhm() {
        Ok(w) => format!("{w:.4e} m"),
        Err(e) => format!("n/a ({e})"),
    };
    let summary = format!("peak at {:.4e} m, FWHM {width}", dist.peak_position());
    let svg = if plot {
        Some(output::svg_text(
            &format!("{} {}", spec.model, spec.selector()),
            &dist,
        )?)
    } else {
        None
    };
    Ok((csv, summary, svg))
}

fn batch(args: BatchArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    for s in &SCENARIOS {
        let spec = RunSpec {
            geometry: args.geometry.source(),
            model: s.model,
            idler: s.idler,
            plane: s.plane,
            grid_points: None,
            grid_halfwidth: None,
            crystal_length: None,
            basis_at: s.basis_at,
        };
        let (csv, summary, svg) = execute(&spec, args.normalize, args.plot)?;
        let path = |ext: &str| Path::new(&args.out_dir).join(format!("{}.{ext}", s.name));
        output::write_atomic(&path("csv"), csv.as_bytes())?;
        if let Some(svg) = svg {
            output::write_atomic(&path("svg"), svg.as_bytes())?;
        }
        println!("{}: {summary}", s.name);
    }
    Ok(())
}

fn report(args: ReportArgs) -> Result<ExitCode> {
    let ctx = KernelContext::new(args.geometry.source().load()?)?;
    let r = report::report_equivalence(&ctx, args.tolerance)?;
    print!("{}", r.render());
    Ok(if r.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
