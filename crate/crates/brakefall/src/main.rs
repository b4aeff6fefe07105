use std::path::PathBuf;
use std::process::ExitCode;

use brakefall::error::{io_err, Error, Result};
use brakefall::ingest::{congruence_ratio, ingest_orbit_table, run_table, table_csv, IngestOptions};
use brakefall::output::{emit_outputs, shape_csv, summary_json};
use brakefall::run::run_scenario;
use brakefall::scenario::{builtin, load_spec, to_json, ForceSpec, ScenarioSpec, TriangleSpec, BUILTIN};
use brakefall_core::central::{central_residual, euler_ratio, find_collinear_cc, homothetic_collapse_time};
use brakefall_core::MassSystem;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Brake orbits of the planar three-body problem.
#[derive(Parser)]
#[command(name = "brakefall", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drop a triangle from rest and write trajectory, events and summary.
    Drop(ScenarioArgs),
    /// Drop, then extract the brake pair, verify the period and fit the symmetry.
    Analyze(ScenarioArgs),
    /// Run every row of an initial-condition table.
    Ingest(IngestArgs),
    /// Collinear central configuration for three masses.
    Cc(CcArgs),
    /// Shape-sphere projection of a drop (CSV on stdout unless --out is given).
    Shape(ScenarioArgs),
    /// List the built-in scenarios.
    ListScenarios {
        /// Print each scenario as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Force {
    Newtonian,
    Hooke,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario to start from.
    #[arg(long, short)]
    scenario: Option<String>,
    /// Scenario file (JSON or TOML by extension); overrides every other flag.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    /// Comma-separated masses.
    #[arg(long, value_delimiter = ',')]
    masses: Option<Vec<f64>>,
    /// Comma-separated positions x1,y1,x2,y2,...
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "equilateral")]
    positions: Option<Vec<f64>>,
    /// Equilateral triangle with this side.
    #[arg(long)]
    equilateral: Option<f64>,
    #[arg(long, value_enum)]
    force: Option<Force>,
    /// Gravitational constant or uniform spring constant.
    #[arg(long)]
    strength: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
    /// Step tolerance (also settable through BRAKEFALL_TOL).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    no_svg: bool,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    /// CSV table: name,m1,m2,m3,x1,y1,x2,y2,x3,y3[,expected_period].
    table: PathBuf,
    #[arg(long, value_enum, default_value = "newtonian")]
    force: Force,
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    #[arg(long, default_value_t = 1e-14)]
    tol: f64,
    /// Span for rows without an expected period.
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
    /// Directory for summary.csv; stdout otherwise.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CcArgs {
    /// Three comma-separated masses.
    #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
    masses: Vec<f64>,
    /// One-based labels along the line, middle body second.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    ordering: Vec<usize>,
}

fn force_spec(force: Force, strength: f64) -> ForceSpec {
    match force {
        Force::Newtonian => ForceSpec::Newtonian { g: strength },
        Force::Hooke => ForceSpec::Hooke { k: strength, springs: None },
    }
}

impl ScenarioArgs {
    fn spec(&self) -> Result<ScenarioSpec> {
        let mut spec = match &self.config {
            Some(path) => load_spec(path)?,
            None => self.flags_spec()?,
        };
        if spec.output.dir.is_none() {
            spec.output.dir = self.out.clone();
        }
        spec.apply_env_overrides()?;
        Ok(spec)
    }

    fn flags_spec(&self) -> Result<ScenarioSpec> {
        let mut spec = match &self.scenario {
            Some(name) => builtin(name)?,
            None => builtin("lagrange")?,
        };
        if let Some(name) = &self.name {
            spec.name = name.clone();
        }
        if let Some(m) = &self.masses {
            spec.masses = m.clone();
        }
        if let Some(p) = &self.positions {
            if p.len() % 2 != 0 {
                return Err(Error::Invalid { name: spec.name, message: "--positions needs x,y pairs".into() });
            }
            let positions = p.chunks(2).map(|c| [c[0], c[1]]).collect();
            spec.triangle = TriangleSpec::Explicit { positions };
        }
        if let Some(side) = self.equilateral {
            spec.triangle = TriangleSpec::Equilateral { side };
        }
        match (self.force, self.strength) {
            (Some(f), s) => spec.force = force_spec(f, s.unwrap_or(1.0)),
            (None, Some(s)) => match &mut spec.force {
                ForceSpec::Newtonian { g } => *g = s,
                ForceSpec::Hooke { k, .. } => *k = s,
            },
            (None, None) => {}
        }
        if let Some(o) = self.order {
            spec.integrator.order = o;
        }
        if let Some(t) = self.tol {
            spec.integrator.tol = t;
        }
        if let Some(t) = self.t_max {
            spec.integrator.t_max = t;
        }
        if let Some(s) = self.samples {
            spec.output.samples = s;
        }
        if self.no_svg {
            spec.output.svg = false;
        }
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Drop(args) => {
            let mut spec = args.spec()?;
            if args.config.is_none() {
                spec.analyses.symmetry = false;
            }
            execute(spec)
        }
        Command::Analyze(args) => {
            let mut spec = args.spec()?;
            spec.analyses.symmetry = true;
            spec.analyses.central = true;
            execute(spec)
        }
        Command::Shape(args) => {
            let mut spec = args.spec()?;
            spec.analyses.shape = true;
            spec.analyses.symmetry = false;
            let to_stdout = spec.output.dir.is_none();
            if to_stdout {
                let bundle = run_scenario(&spec)?;
                print!("{}", shape_csv(&bundle).unwrap_or_default());
                Ok(bundle.exit_code() as u8)
            } else {
                execute(spec)
            }
        }
        Command::Ingest(args) => {
            let options = IngestOptions {
                force: force_spec(args.force, args.strength),
                tol: args.tol,
                t_max: args.t_max,
                ..IngestOptions::default()
            };
            let specs = ingest_orbit_table(&args.table, &options)?;
            log::info!("{} rows from {}", specs.len(), args.table.display());
            let rows = run_table(&specs);
            let table = table_csv(&rows);
            match &args.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
                    let path = dir.join("summary.csv");
                    std::fs::write(&path, table).map_err(io_err(&path))?;
                    println!("{}", path.display());
                }
                None => print!("{table}"),
            }
            let (k, n) = congruence_ratio(&rows);
            eprintln!("{k} of {n} periodic orbits have congruent brake triangles");
            Ok(0)
        }
        Command::Cc(args) => {
            if args.masses.len() != 3 || args.ordering.len() != 3 {
                return Err(Error::Invalid {
                    name: "cc".into(),
                    message: "need three masses and a three-label ordering".into(),
                });
            }
            let ordering = [args.ordering[0], args.ordering[1], args.ordering[2]];
            if ordering.iter().any(|&i| i == 0 || i > 3) {
                return Err(Error::Invalid { name: "cc".into(), message: "labels are 1, 2, 3".into() });
            }
            let zero_based = ordering.map(|i| i - 1);
            let config = find_collinear_cc(&args.masses, zero_based)?;
            let sys = MassSystem::gravitational(args.masses.clone())?;
            let c = central_residual(&config, &sys)?;
            let report = serde_json::json!({
                "masses": args.masses,
                "ordering": ordering,
                "ratio": euler_ratio(&args.masses, zero_based)?,
                "positions": config.positions.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
                "lambda": c.lambda,
                "residual": c.residual,
                "certified": c.is_certified(),
                "collapse_time": homothetic_collapse_time(&config, &sys)?,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("json"));
            Ok(0)
        }
        Command::ListScenarios { json } => {
            for name in BUILTIN {
                if json {
                    println!("{}", to_json(&builtin(name)?));
                } else {
                    println!("{name}");
                }
            }
            Ok(0)
        }
    }
}

fn execute(spec: ScenarioSpec) -> Result<u8> {
    let bundle = run_scenario(&spec)?;
    match &spec.output.dir {
        Some(dir) => {
            for path in emit_outputs(&bundle, dir)? {
                println!("{}", path.display());
            }
        }
        None => print!("{}", summary_json(&bundle)),
    }
    Ok(bundle.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
