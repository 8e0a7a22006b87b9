//! Batch front-end: resolves a scenario (file and/or flags), runs one
//! operation, prints the JSON report (or CSV for sweeps), and exits 0 on
//! pass, 1 on a failed verdict, 2 on error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gnatural::scenario::{run_scenario, Report, Scenario};
use gnatural::Result;

/// Environment variable holding the default worker thread count.
const THREADS_ENV: &str = "GNATURAL_THREADS";

#[derive(Parser)]
#[command(
    name = "gnatural",
    version,
    about = "g-natural bundle metrics: tension, energy and harmonicity checks"
)]
struct Cli {
    /// Scenario file (JSON); flags override its fields.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Manifold spec, e.g. `torus:2`, `sphere:3`, `sphere:2:1.5`.
    #[arg(long, global = true)]
    manifold: Option<String>,

    /// Sextet spec, e.g. `sasaki`, `cg`, `example_a:lambda=1,mu=2,k=1,eps=0.5`.
    #[arg(long, global = true)]
    sextet: Option<String>,

    /// Field spec, e.g. `parallel:1,0`, `rotation:0.5`, `hopf`.
    #[arg(long, global = true)]
    field: Option<String>,

    /// Contact structure spec, e.g. `hopf:1`.
    #[arg(long, global = true)]
    structure: Option<String>,

    /// RNG seed for sample points.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of sample points.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Pass/fail tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Report (or CSV) output path; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (default: GNATURAL_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Riemannian inequalities of a sextet over a t-grid.
    CheckMetric {
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Base dimension entering the bracket.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Tension field of V: (M, g) -> (TM, G) and the harmonic-map verdict.
    Tension,
    /// Total energy by quadrature, optionally against an expected value.
    Energy {
        /// Quadrature resolution (0 = per-manifold default).
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        expected: Option<f64>,
    },
    /// Constant-length classification and rigidity family of a sextet.
    Classify {
        /// Squared field length.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Contact axioms, Reeb identities and the Reeb harmonic-map conditions.
    Contact,
    /// Closed-form bundle connection against the FD oracle on TM.
    Oracle,
    /// CSV sweep of a scalar quantity over a t-grid.
    Sweep {
        /// One of: riemannian|cond-riem, bracket-prime, classify, kcontact.
        #[arg(long)]
        quantity: Option<String>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Condensed deterministic self-check battery.
    Accept,
}

impl Command {
    fn operation(&self) -> &'static str {
        match self {
            Command::CheckMetric { .. } => "check-metric",
            Command::Tension => "tension",
            Command::Energy { .. } => "energy",
            Command::Classify { .. } => "classify",
            Command::Contact => "contact",
            Command::Oracle => "oracle",
            Command::Sweep { .. } => "sweep",
            Command::Accept => "accept",
        }
    }
}

fn build_scenario(cli: &Cli) -> Result<Scenario> {
    let mut s = match &cli.scenario {
        Some(path) => Scenario::from_json(&fs::read_to_string(path)?)?,
        None => Scenario::default(),
    };
    s.operation = cli.command.operation().to_string();
    let over = |dst: &mut Option<String>, src: &Option<String>| {
        if src.is_some() {
            *dst = src.clone();
        }
    };
    over(&mut s.manifold, &cli.manifold);
    over(&mut s.sextet, &cli.sextet);
    over(&mut s.field, &cli.field);
    over(&mut s.structure, &cli.structure);
    if let Some(v) = cli.seed {
        s.parameters.seed = v;
    }
    if let Some(v) = cli.samples {
        s.parameters.samples = v;
    }
    if let Some(v) = cli.tolerance {
        s.parameters.tolerance = v;
    }
    if let Some(path) = &cli.output {
        s.output = Some(path.display().to_string());
    }
    match &cli.command {
        Command::CheckMetric { t_min, t_max, steps, dim }
        | Command::Sweep { t_min, t_max, steps, dim, quantity: _ } => {
            if let Some(v) = t_min {
                s.parameters.t_min = *v;
            }
            if let Some(v) = t_max {
                s.parameters.t_max = *v;
            }
            if let Some(v) = steps {
                s.parameters.steps = *v;
            }
            if dim.is_some() {
                s.parameters.dim = *dim;
            }
        }
        Command::Energy { resolution, expected } => {
            if let Some(v) = resolution {
                s.parameters.resolution = *v;
            }
            if expected.is_some() {
                s.parameters.expected = *expected;
            }
        }
        Command::Classify { rho, dim } => {
            if let Some(v) = rho {
                s.parameters.rho = *v;
            }
            if dim.is_some() {
                s.parameters.dim = *dim;
            }
        }
        _ => {}
    }
    if let Command::Sweep { quantity, .. } = &cli.command {
        if quantity.is_some() {
            s.parameters.quantity = quantity.clone();
        }
    }
    Ok(s)
}

fn emit(s: &Scenario, rep: &Report) -> Result<()> {
    // sweeps emit their CSV payload; everything else emits the JSON report
    let text = match rep.diagnostics.get("csv").and_then(|v| v.as_str()) {
        Some(csv) if rep.operation == "sweep" => csv.to_string(),
        _ => rep.to_json(),
    };
    match &s.output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    eprintln!(
        "gnatural: {} {} in {:.1} ms",
        rep.operation,
        if rep.pass { "passed" } else { "FAILED" },
        rep.runtime.as_secs_f64() * 1e3
    );
    Ok(())
}

fn thread_count(cli: &Cli) -> Option<usize> {
    cli.threads.or_else(|| std::env::var(THREADS_ENV).ok()?.parse().ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = thread_count(&cli) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("gnatural: thread pool setup failed: {e}");
            return ExitCode::from(2);
        }
    }
    let scenario = match build_scenario(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("gnatural: {e}");
            return ExitCode::from(2);
        }
    };
    match run_scenario(&scenario) {
        Ok(rep) => {
            if let Err(e) = emit(&scenario, &rep) {
                eprintln!("gnatural: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if rep.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("gnatural: {e}");
            ExitCode::from(2)
        }
    }
}
