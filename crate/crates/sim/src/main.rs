use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlint_sim::presets::{self, CRYSTALS, SAMPLES};
use nlint_sim::{parse_scenario, run_scenario, Format, SimError, THREADS_ENV};

#[derive(Parser)]
#[command(name = "nlint-sim", version, about = "Induced-coherence simulator for pulsed nonlinear interferometers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        scenario: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Joint-spectrum nodes per axis (overrides `grid.points`).
        #[arg(long)]
        grid_points: Option<usize>,
        /// Series format (overrides `output.format`).
        #[arg(long, value_parser = |s: &str| s.parse::<Format>())]
        format: Option<Format>,
    },
    /// List built-in presets, or print one as a scenario file.
    Presets {
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
    },
}

fn configure_threads() -> Result<(), SimError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize =
        value.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            SimError::Validation(format!("{THREADS_ENV}: expected a positive integer, got `{value}`"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| SimError::Validation(format!("{THREADS_ENV}: {e}")))
}

fn run(
    scenario: PathBuf,
    out: Option<PathBuf>,
    grid_points: Option<usize>,
    format: Option<Format>,
) -> Result<(), SimError> {
    configure_threads()?;
    let text =
        std::fs::read_to_string(&scenario).map_err(|e| SimError::Validation(format!("{}: {e}", scenario.display())))?;
    let mut parsed = parse_scenario(&text).map_err(|e| match e {
        SimError::Validation(m) => SimError::Validation(format!("{}: {m}", scenario.display())),
        other => other,
    })?;
    if let Some(n) = grid_points {
        parsed.grid.points = Some(n);
    }
    if let Some(f) = format {
        parsed.output.format = f;
    }
    let dir = out.or_else(|| parsed.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    let manifest = run_scenario(&parsed, &dir)?;
    for t in &manifest.tasks {
        let files: Vec<&str> = t.files.iter().map(|f| f.path.as_str()).collect();
        let mark = if t.convergence.flagged { "  [not converged]" } else { "" };
        println!(
            "{:<15} {:>8.2} s  delta {:.2e}  {}{}",
            t.task.name(),
            t.elapsed_s,
            t.convergence.delta,
            files.join(" "),
            mark
        );
    }
    println!("wrote {}", dir.join("manifest.json").display());
    if manifest.flagged {
        return Err(SimError::Numerical(format!(
            "grid refinement changed a result by more than {:.0e}; see manifest",
            nlint_sim::run::CONVERGENCE_TOLERANCE
        )));
    }
    Ok(())
}

fn list_presets(show: Option<String>) -> Result<(), SimError> {
    if let Some(name) = show {
        let p = presets::find(&name).ok_or_else(|| SimError::Validation(format!("no preset named `{name}`")))?;
        print!("{}", p.scenario.render());
        return Ok(());
    }
    println!("scenarios:");
    for p in presets::presets() {
        println!("  {:<10} {}", p.name, p.summary);
    }
    println!("crystals (crystal.preset):");
    for (name, what) in CRYSTALS {
        println!("  {name:<10} {what}");
    }
    println!("samples (sample.kind):");
    for (name, what) in SAMPLES {
        println!("  {name:<10} {what}");
    }
    Ok(())
}

fn main() -> ExitCode {
    // usage errors are validation errors, not clap's default exit code 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.exit_code() == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let result = match cli.command {
        Command::Run { scenario, out, grid_points, format } => run(scenario, out, grid_points, format),
        Command::Presets { show } => list_presets(show),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nlint-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
