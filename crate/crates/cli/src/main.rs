use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tunnel_cli::commands::{asymptotics, fit_csv, format_laws, format_poles, poles};
use tunnel_cli::config::{parse_precision, ModelConfig};
use tunnel_cli::verify::run_criteria;
use tunnel_cli::{parse_window, run, to_sorted_json, write_csv, Failure, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "tunnel",
    version,
    about = "Many-particle tunneling decay from a leaking 1D trap"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Box width.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Barrier position (defaults to a).
    #[arg(long)]
    d: Option<f64>,
    /// Barrier strength.
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario and write its CSV and JSON report.
    Run {
        /// Scenario file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Print the report as JSON on stdout.
        #[arg(long)]
        json: bool,
        /// Fit window MIN:MAX.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
        /// Override the working precision (standard or extended).
        #[arg(long)]
        precision: Option<String>,
    },
    /// Tabulate resonance poles.
    Poles {
        /// Take the model from a scenario file instead of the flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        /// Number of poles.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Closed-form and series-derived long-time laws side by side.
    Asymptotics {
        /// Take the model from a scenario file instead of the flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        /// Particle number.
        #[arg(short = 'n', long = "particles", default_value_t = 2)]
        n: usize,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Multiply every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Only these criteria (comma separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        /// Print JSON instead of one line per criterion.
        #[arg(long)]
        json: bool,
    },
    /// Fit power laws to the curves of a run CSV.
    Fit {
        /// CSV written by `tunnel run`.
        csv: PathBuf,
        /// Fit window MIN:MAX.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn model_from(config: &Option<PathBuf>, args: &ModelArgs) -> Result<tunnel_core::model::ModelParams, Failure> {
    match config {
        Some(path) => ScenarioConfig::load(path)?.model.params(),
        None => ModelConfig {
            a: args.a,
            d: args.d,
            eta: args.eta,
            region: "barrier".into(),
        }
        .params(),
    }
}

fn io_at(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Create `path`, making its parent directories as needed.
fn create(path: &Path) -> Result<File, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_at(dir, e))?;
    }
    File::create(path).map_err(|e| io_at(path, e))
}

fn execute(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Run {
            config,
            json,
            window,
            precision,
        } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(p) = precision {
                parse_precision(&p)?;
                cfg.precision = p;
            }
            let scenario = cfg.validate()?;
            let out = run(&cfg, &scenario, window)?;
            if let Some(path) = &scenario.output.csv_path {
                let file = create(path)?;
                write_csv(BufWriter::new(file), &out.curves, &scenario)?;
            }
            let report = to_sorted_json(&out.report);
            if let Some(path) = &scenario.output.report_path {
                create(path)?;
                std::fs::write(path, &report).map_err(|e| io_at(path, e))?;
            }
            if json {
                println!("{report}");
            } else {
                for o in &out.report.observables {
                    let fit = match (&o.fit, &o.fit_refused) {
                        (Some(f), _) => format!("fit tau^{:.4} x {:.6e}", f.exponent, f.coefficient),
                        (None, Some(r)) => format!("fit refused: {r}"),
                        (None, None) => "no fit".into(),
                    };
                    let law = o.closed_form.as_ref().map_or(String::new(), |l| {
                        format!(
                            "; law tau^{} x {}",
                            l.exponent,
                            l.coefficient.map_or("—".into(), |c| format!("{c:.6e}"))
                        )
                    });
                    println!(
                        "{:<11} {} samples, {} flagged: {fit}{law}",
                        o.observable, o.samples, o.flagged
                    );
                }
            }
            Ok(out.report.exit_code)
        }
        Command::Poles {
            config,
            model,
            count,
            json,
        } => {
            let rows = poles(&model_from(&config, &model)?, count)?;
            if json {
                println!("{}", to_sorted_json(&rows));
            } else {
                print!("{}", format_poles(&rows));
            }
            Ok(0)
        }
        Command::Asymptotics { config, model, n, json } => {
            let n = match &config {
                Some(path) => ScenarioConfig::load(path)?.particles.n,
                None => n,
            };
            let rows = asymptotics(&model_from(&config, &model)?, n)?;
            if json {
                println!("{}", to_sorted_json(&rows));
            } else {
                print!("{}", format_laws(&rows));
            }
            Ok(if rows.iter().any(|r| r.error.is_some()) { 3 } else { 0 })
        }
        Command::Verify {
            tolerance_scale,
            only,
            json,
        } => {
            if !(tolerance_scale > 0.0) {
                return Err(Failure::config("tolerance scale must be positive"));
            }
            let reports = run_criteria(&only, tolerance_scale);
            if json {
                println!("{}", to_sorted_json(&reports));
            } else {
                for r in &reports {
                    println!("{r}");
                }
                let passed = reports.iter().filter(|r| r.passed).count();
                println!("{passed}/{} criteria passed", reports.len());
            }
            Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
        }
        Command::Fit { csv, window, json } => {
            let fits = fit_csv(&csv, window)?;
            if json {
                println!("{}", to_sorted_json(&fits));
            } else {
                for f in &fits {
                    let what = match (&f.fit, &f.refused) {
                        (Some(x), _) => format!(
                            "tau^{:.6} x {:.6e} (r^2 {:.8}, {} samples)",
                            x.exponent, x.coefficient, x.r_squared, x.samples
                        ),
                        (None, Some(r)) => format!("refused: {r}"),
                        (None, None) => String::new(),
                    };
                    println!("{} {} N={} {}: {what}", f.observable, f.statistics, f.n, f.method);
                }
            }
            Ok(if fits.iter().any(|f| f.refused.is_some()) { 3 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("tunnel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
