//! `trenchfield` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 regression or validation failure.

mod plot;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use trenchfield::config::{load_config, Config};
use trenchfield::geometry::{build_cross_section, mesh_panels};
use trenchfield::pipeline::Settings;
use trenchfield::report::{self, ToleranceProfile};
use trenchfield::sweep::{self, SweepSpec};
use trenchfield::Error;

#[derive(Parser)]
#[command(name = "trenchfield", version, about = "2D BEM analysis of linear RF ion-trap cross-sections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse the trap described by a config file.
    Analyze(ConfigArgs),
    /// Run the `[sweep]` section of a config file.
    Sweep {
        #[command(flatten)]
        common: ConfigArgs,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Also write depth and multipole charts as SVG (needs --out).
        #[arg(long)]
        plot: bool,
    },
    /// Compare the eight representative traps against the reference table.
    #[command(name = "regress-table1")]
    RegressTable1 {
        #[arg(long, value_enum, default_value_t = Profile::Paper)]
        tolerance_profile: Profile,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the solver against closed forms and under refinement.
    Validate {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write the panel mesh of a config's trap as CSV.
    #[command(name = "mesh-dump")]
    MeshDump {
        #[arg(long)]
        config: PathBuf,
        /// Directory for `mesh.csv`; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Directory for machine-readable output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::ReportDoc)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    ReportDoc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Paper,
    Strict,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Regression,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let text = format!("{}: {e}", e.stage());
        if e.is_input_error() {
            Failure::Usage(text)
        } else {
            Failure::Numerical(text)
        }
    }
}

/// Writes `contents` to `dir/name` through a temporary file, so an
/// interrupted run leaves no truncated output.
fn write_output(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, Failure> {
    let io = |e: std::io::Error| Failure::from(Error::Io(format!("{}: {e}", dir.display())));
    fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, &path).map_err(io)?;
    Ok(path)
}

fn emit(out: &Option<PathBuf>, name: &str, contents: &[u8]) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            let path = write_output(dir, name, contents)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            std::io::stdout()
                .write_all(contents)
                .map_err(|e| Failure::from(Error::from(e)))?;
        }
    }
    Ok(())
}

fn analyze(args: &ConfigArgs) -> Result<(), Failure> {
    let config: Config = load_config(&args.config)?;
    let report = report::analyze(&config.params, &config.settings)?;
    print!("{report}");
    let doc = match args.output.format {
        Format::ReportDoc => (report.to_json() + "\n").into_bytes(),
        Format::Csv => {
            let mut buf = Vec::new();
            sweep::write_report_csv(&report, &mut buf)?;
            buf
        }
    };
    if args.output.out.is_some() {
        let name = match args.output.format {
            Format::ReportDoc => "report.json",
            Format::Csv => "report.csv",
        };
        emit(&args.output.out, name, &doc)?;
    }
    let failed = report.failed_fields();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("failed quantities: {}", failed.join(", "))))
    }
}

fn run_sweep(args: &ConfigArgs, jobs: usize, plot: bool) -> Result<(), Failure> {
    let config = load_config(&args.config)?;
    let spec = SweepSpec::from_config(&config)?;
    if plot && args.output.out.is_none() {
        return Err(Failure::Usage("--plot needs --out".into()));
    }
    let rows = sweep::run_sweep(&spec, jobs)?;
    for row in &rows {
        eprintln!("{} = {}: {}", spec.swept, row.w, row.status());
    }
    match args.output.format {
        Format::Csv => emit(&args.output.out, "sweep.csv", sweep::csv_string(&spec, &rows).as_bytes())?,
        Format::ReportDoc => {
            let doc = serde_json::json!({
                "schema": sweep::SWEEP_SCHEMA,
                "parameter": spec.swept,
                "rows": rows
                    .iter()
                    .map(|r| serde_json::json!({ "w": r.w, "result": r.report }))
                    .collect::<Vec<_>>(),
            });
            let text = serde_json::to_string_pretty(&doc).expect("sweep serialises") + "\n";
            emit(&args.output.out, "sweep.json", text.as_bytes())?;
        }
    }
    if plot {
        let dir = args.output.out.as_ref().expect("checked above");
        let svg = plot::sweep_svg(&spec, &rows).map_err(Failure::Numerical)?;
        let path = write_output(dir, "sweep.svg", svg.as_bytes())?;
        eprintln!("wrote {}", path.display());
    }
    if rows.iter().all(|r| r.report.is_err()) {
        return Err(Failure::Numerical("every sweep row failed".into()));
    }
    Ok(())
}

fn regress(profile: Profile, output: &OutputArgs) -> Result<(), Failure> {
    let profile = match profile {
        Profile::Paper => ToleranceProfile::Paper,
        Profile::Strict => ToleranceProfile::Strict,
    };
    if output.format == Format::Csv {
        return Err(Failure::Usage("regress-table1 writes report-doc only".into()));
    }
    let r = report::regress_table1(profile, &Settings::default());
    print!("{r}");
    if output.out.is_some() {
        emit(&output.out, "regression.json", (r.to_json() + "\n").as_bytes())?;
    }
    if r.pass() {
        Ok(())
    } else {
        Err(Failure::Regression)
    }
}

fn validate(output: &OutputArgs) -> Result<(), Failure> {
    if output.format == Format::Csv {
        return Err(Failure::Usage("validate writes report-doc only".into()));
    }
    let r = report::validate_solver(&Settings::default());
    print!("{r}");
    if output.out.is_some() {
        emit(&output.out, "validation.json", (r.to_json() + "\n").as_bytes())?;
    }
    if r.pass() {
        Ok(())
    } else {
        Err(Failure::Regression)
    }
}

fn mesh_dump(config: &Path, out: &Option<PathBuf>) -> Result<(), Failure> {
    let config = load_config(config)?;
    let cs = build_cross_section(&config.params, &config.settings.build)?;
    let mesh = mesh_panels(&cs, &config.settings.mesh)?;
    let mut buf = Vec::new();
    report::write_mesh_csv(&mesh, &mut buf)?;
    eprintln!("{} panels", mesh.len());
    emit(out, "mesh.csv", &buf)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Sweep { common, jobs, plot } => run_sweep(common, *jobs, *plot),
        Command::RegressTable1 {
            tolerance_profile,
            output,
        } => regress(*tolerance_profile, output),
        Command::Validate { output } => validate(output),
        Command::MeshDump { config, out } => mesh_dump(config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Regression) => ExitCode::from(3),
    }
}
