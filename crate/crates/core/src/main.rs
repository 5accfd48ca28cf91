use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdklab::report::{run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "pdklab", version, about = "Numerical checks for positive definite kernels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Random Gram matrices, certified PSD or falsified with a witness
    PsdCheck(Flags),
    /// Pointwise properties: nonnegative diagonal, Hermitian symmetry, Cauchy-Schwarz
    Props(Flags),
    /// Finite-increment inequalities and the block inequality
    Ineq(Flags),
    /// Increment identities, smoothness probe and β decay
    Findiff(Flags),
    /// Sesquiholomorphy on the diagonal band and away from it
    Holo(Flags),
    /// Lift checks: Ω + Ω*, PD function test, continuity and regularity
    Lift(Flags),
    /// Everything applicable, with a claim-to-result map
    ReportAll(Flags),
}

#[derive(Args)]
struct Flags {
    /// Kernel spec (JSON)
    #[arg(long)]
    kernel: PathBuf,
    /// Where to write the JSON report
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[arg(long, default_value_t = pdklab::psd::DEFAULT_TOL_E)]
    tol_e: f64,
    #[arg(long, default_value_t = pdklab::psd::DEFAULT_TOL_H)]
    tol_h: f64,
    /// First step; fixes the increments of `ineq`
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value_t = 9)]
    steps: usize,
    /// Half-width of the diagonal band
    #[arg(long, default_value_t = 0.05)]
    band: f64,
}

impl Cmd {
    fn into_config(self) -> RunConfig {
        let (command, f) = match self {
            Cmd::PsdCheck(f) => (Command::PsdCheck, f),
            Cmd::Props(f) => (Command::Props, f),
            Cmd::Ineq(f) => (Command::Ineq, f),
            Cmd::Findiff(f) => (Command::Findiff, f),
            Cmd::Holo(f) => (Command::Holo, f),
            Cmd::Lift(f) => (Command::Lift, f),
            Cmd::ReportAll(f) => (Command::ReportAll, f),
        };
        RunConfig {
            tol_e: f.tol_e,
            tol_h: f.tol_h,
            seed: f.seed,
            trials: f.trials,
            n_max: f.n_max,
            output_path: f.out,
            step_h0: f.h0,
            step_ratio: f.ratio,
            step_count: f.steps,
            band: f.band,
            ..RunConfig::new(command, f.kernel)
        }
    }
}

fn set_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("PDKLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("PDKLAB_THREADS: expected a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = set_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let config = cli.command.into_config();
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for line in report.summary_lines() {
        println!("{line}");
    }
    if let Some(path) = &config.output_path {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
