use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use frobenius_cli::{run, CliError, JobSpec};
use log::{error, info};

/// Exact Hilbert–Kunz, F-signature and tame-curve computations in characteristic p.
#[derive(Debug, Parser)]
#[command(name = "frobenius-lab", version)]
struct Args {
    /// Job file.
    #[arg(long)]
    input: PathBuf,
    /// Largest Frobenius exponent; overrides `emax` in the job.
    #[arg(long)]
    emax: Option<u32>,
    /// Write the run record here instead of standard output.
    #[arg(long)]
    json: Option<PathBuf>,
    /// CSV table for tabular commands.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Critical pairs per Gröbner basis.
    #[arg(long)]
    budget_pairs: Option<u64>,
    /// Starting T-adic precision for discriminants.
    #[arg(long)]
    precision: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(args: &Args) -> Result<JobSpec, CliError> {
    let text = std::fs::read_to_string(&args.input).map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let mut job: JobSpec = text.parse()?;
    if args.emax.is_some() {
        job.emax = args.emax;
    }
    if args.budget_pairs.is_some() {
        job.budget_pairs = args.budget_pairs;
    }
    if args.precision.is_some() {
        job.precision = args.precision;
    }
    if args.json.is_some() {
        job.json = args.json.clone();
    }
    if args.csv.is_some() {
        job.csv = args.csv.clone();
    }
    Ok(job)
}

fn execute(args: &Args) -> Result<(), (CliError, Option<PathBuf>)> {
    let job = load(args).map_err(|e| (e, args.json.clone()))?;
    let json_path = job.json.clone();
    let record = run(&job).map_err(|e| (e, json_path.clone()))?;
    match &json_path {
        Some(path) => {
            record.write_json(path).map_err(|e| (e, None))?;
            info!("wrote {}", path.display());
        }
        None => println!("{}", serde_json::to_string_pretty(&record.to_json()).expect("json value prints")),
    }
    if let Some(path) = &job.csv {
        record.write_csv(path).map_err(|e| (e, None))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            error!("thread pool: {e}");
        }
    }
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err((err, path)) => {
            error!("{err}");
            let doc = serde_json::to_string_pretty(&err.to_json()).expect("json value prints");
            match path {
                Some(p) if std::fs::write(&p, doc.clone() + "\n").is_ok() => {}
                _ => println!("{doc}"),
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
