//! Command-line front end: sweeps, figure datasets, Monte Carlo runs, density
//! tables and self-checks.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 numerical failure
//! or failed check suite.

pub mod figure;
pub mod output;
pub mod sweep;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::capacity::Method;
use crate::channel::{cdf_sorted, pdf, Parameterization};
use crate::montecarlo::McConfig;
use crate::special::AccuracyPolicy;
use figure::{figure_dataset, FigureId};
use output::{fmt_sig, render, OutputFormat};
use sweep::{parse_grid, parse_methods, parse_mode, run_sweep, SweepSpec};
use validate::{run_suite, Suite};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) | CliError::ChecksFailed(_) => 2,
        }
    }

    pub(crate) fn from_lib(e: crate::Error, context: &str) -> Self {
        if e.is_numerical() {
            CliError::Numerical(format!("{context}: {e}"))
        } else {
            CliError::Usage(format!("{context}: {e}"))
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "corrcap",
    version,
    about = "Ergodic capacity of correlated backscatter links"
)]
pub struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate methods over an SNR grid and a list of correlations.
    Sweep(SweepArgs),
    /// Regenerate the dataset behind one of the capacity figures.
    Figure(FigureArgs),
    /// Monte Carlo capacity estimates over a grid.
    Mc(McArgs),
    /// Tabulate the SNR density and distribution function.
    Pdf(PdfArgs),
    /// Run the self-check suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// fixed_receiver_snr or fixed_power_budget
    #[arg(long)]
    pub mode: Option<String>,
    /// Comma list or start:stop:step, in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Comma list of correlations in [0, 1].
    #[arg(long)]
    pub rho: Option<String>,
}

#[derive(Debug, Args)]
pub struct McArgsCommon {
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub batches: Option<u32>,
}

impl McArgsCommon {
    fn apply(&self, base: McConfig) -> McConfig {
        McConfig {
            n_samples: self.samples.unwrap_or(base.n_samples),
            seed: self.seed.unwrap_or(base.seed),
            n_batches: self.batches.unwrap_or(base.n_batches),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Relative accuracy target for the numerical methods.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<OutputFormat>,
}

impl OutputArgs {
    fn policy(&self) -> Result<AccuracyPolicy, CliError> {
        match self.tol {
            Some(t) => Ok(AccuracyPolicy::with_rel_tol(t)?),
            None => Ok(AccuracyPolicy::default()),
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON file with sweep fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Comma list of quadrature, series, asymptotic_high, asymptotic_low, mc, awgn, rayleigh.
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub mc: McArgsCommon,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// 1: fixed receiver SNR, 2: fixed power budget, 3: AWGN-normalised.
    #[arg(long)]
    pub figure: u32,
    #[command(flatten)]
    pub mc: McArgsCommon,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub mc: McArgsCommon,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PdfArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Linear SNR values: comma list or start:stop:step.
    #[arg(long, default_value = "0.05:5:0.05")]
    pub gamma: String,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value = "fast")]
    pub suite: Suite,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Figure(a) => cmd_figure(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Pdf(a) => cmd_pdf(a),
        Command::Validate(a) => cmd_validate(a),
    })
}

fn parse_rhos(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad rho value '{t}'")))
        })
        .collect()
}

fn load_config(path: &Path) -> Result<SweepSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn build_spec(a: &SweepArgs) -> Result<SweepSpec, CliError> {
    let mut spec = match &a.config {
        Some(p) => load_config(p)?,
        None => SweepSpec {
            mode: crate::channel::Mode::FixedReceiverSnr,
            snr_db_grid: Vec::new(),
            rho_list: vec![0.0],
            methods: vec![Method::Quadrature],
            mc: None,
            output_path: None,
            output_format: OutputFormat::Csv,
        },
    };
    if let Some(m) = &a.grid.mode {
        spec.mode = parse_mode(m)?;
    }
    if let Some(s) = &a.grid.snr_db {
        spec.snr_db_grid = parse_grid(s)?;
    } else if a.config.is_none() {
        return Err(CliError::Usage(
            "--snr-db is required without --config".into(),
        ));
    }
    if let Some(r) = &a.grid.rho {
        spec.rho_list = parse_rhos(r)?;
    }
    if let Some(m) = &a.method {
        spec.methods = parse_methods(m)?;
    }
    if a.mc.samples.is_some() || a.mc.seed.is_some() || a.mc.batches.is_some() {
        spec.mc = Some(a.mc.apply(spec.mc_config()));
    }
    if let Some(o) = &a.output.out {
        spec.output_path = Some(o.clone());
    }
    if let Some(f) = a.output.format {
        spec.output_format = f;
    }
    Ok(spec)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
        }
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<(), CliError> {
    let spec = build_spec(&a)?;
    let rows = run_sweep(&spec, &a.output.policy()?)?;
    emit(
        &render(&rows, spec.output_format),
        spec.output_path.as_deref(),
    )
}

fn cmd_figure(a: FigureArgs) -> Result<(), CliError> {
    let fig = FigureId::from_number(a.figure).ok_or_else(|| {
        CliError::Usage(format!("unknown figure {}, expected 1, 2 or 3", a.figure))
    })?;
    let mc = a.mc.apply(FigureId::default_mc());
    let rows = figure_dataset(fig, &a.output.policy()?, &mc)?;
    emit(
        &render(&rows, a.output.format.unwrap_or_default()),
        a.output.out.as_deref(),
    )
}

fn cmd_mc(a: McArgs) -> Result<(), CliError> {
    let spec = SweepSpec {
        mode: a
            .grid
            .mode
            .as_deref()
            .map(parse_mode)
            .transpose()?
            .unwrap_or(crate::channel::Mode::FixedReceiverSnr),
        snr_db_grid: parse_grid(
            a.grid
                .snr_db
                .as_deref()
                .ok_or_else(|| CliError::Usage("--snr-db is required".into()))?,
        )?,
        rho_list: parse_rhos(a.grid.rho.as_deref().unwrap_or("0"))?,
        methods: vec![Method::MonteCarlo],
        mc: Some(a.mc.apply(McConfig::default())),
        output_path: a.output.out.clone(),
        output_format: a.output.format.unwrap_or_default(),
    };
    let rows = run_sweep(&spec, &a.output.policy()?)?;
    emit(
        &render(&rows, spec.output_format),
        spec.output_path.as_deref(),
    )
}

fn cmd_pdf(a: PdfArgs) -> Result<(), CliError> {
    let mode = a
        .grid
        .mode
        .as_deref()
        .map(parse_mode)
        .transpose()?
        .unwrap_or(crate::channel::Mode::FixedReceiverSnr);
    let snrs = parse_grid(a.grid.snr_db.as_deref().unwrap_or("0"))?;
    let rhos = parse_rhos(a.grid.rho.as_deref().unwrap_or("0"))?;
    let gammas = parse_grid(&a.gamma)?;
    if gammas.is_empty() || gammas.windows(2).any(|w| w[1] <= w[0]) || gammas[0] <= 0.0 {
        return Err(CliError::Usage(
            "--gamma must be positive and strictly increasing".into(),
        ));
    }
    let policy = match a.tol {
        Some(t) => AccuracyPolicy::with_rel_tol(t)?,
        None => AccuracyPolicy::default(),
    };
    let mut out = String::from("mode,rho,snr_db,gamma_bar_linear,gamma,pdf,cdf\n");
    for &rho in &rhos {
        for &snr_db in &snrs {
            let ctx = format!("rho = {rho}, snr_db = {snr_db}");
            let param = Parameterization::from_db(mode, snr_db, rho)
                .map_err(|e| CliError::from_lib(e, &ctx))?;
            let ch = param.channel().map_err(|e| CliError::from_lib(e, &ctx))?;
            if !ch.is_analytic() {
                return Err(CliError::Usage(format!("{ctx}: the density needs rho < 1")));
            }
            let cdfs =
                cdf_sorted(&ch, &gammas, &policy).map_err(|e| CliError::from_lib(e, &ctx))?;
            for (&g, c) in gammas.iter().zip(cdfs) {
                let d = pdf(&ch, g).map_err(|e| CliError::from_lib(e, &ctx))?;
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    mode.as_str(),
                    fmt_sig(rho),
                    fmt_sig(snr_db),
                    fmt_sig(param.snr()),
                    fmt_sig(g),
                    fmt_sig(d),
                    fmt_sig(c)
                ));
            }
        }
    }
    emit(&out, a.out.as_deref())
}

fn cmd_validate(a: ValidateArgs) -> Result<(), CliError> {
    let policy = match a.tol {
        Some(t) => AccuracyPolicy::with_rel_tol(t)?,
        None => AccuracyPolicy::default(),
    };
    let checks = run_suite(
        a.suite,
        &policy,
        a.seed.unwrap_or(crate::montecarlo::DEFAULT_SEED),
    );
    for c in &checks {
        println!("{c}");
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("corrcap").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("corrcap-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("spec.json");
        std::fs::write(
            &path,
            r#"{"mode":"fixed_power_budget","snr_db_grid":[0,10],"rho_list":[0.5],"methods":["quadrature"]}"#,
        )
        .unwrap();
        let cli = parse(&[
            "sweep",
            "--config",
            path.to_str().unwrap(),
            "--rho",
            "0,1",
            "--method",
            "mc",
            "--seed",
            "9",
        ]);
        let Command::Sweep(a) = cli.command else {
            panic!()
        };
        let spec = build_spec(&a).unwrap();
        assert_eq!(spec.mode, crate::channel::Mode::FixedPowerBudget);
        assert_eq!(spec.snr_db_grid, vec![0.0, 10.0]);
        assert_eq!(spec.rho_list, vec![0.0, 1.0]);
        assert_eq!(spec.methods, vec![Method::MonteCarlo]);
        assert_eq!(spec.mc_config().seed, 9);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            main_with([
                "corrcap",
                "sweep",
                "--snr-db",
                "0",
                "--rho",
                "1",
                "--method",
                "quadrature"
            ]),
            1
        );
        assert_eq!(main_with(["corrcap", "sweep", "--bogus"]), 1);
        assert_eq!(main_with(["corrcap", "figure", "--figure", "7"]), 1);
        let out = std::env::temp_dir().join(format!("corrcap-exit-{}.csv", std::process::id()));
        let out_s = out.to_str().unwrap();
        assert_eq!(
            main_with([
                "corrcap", "sweep", "--snr-db", "-10:0:5", "--method", "awgn", "--out", out_s
            ]),
            0
        );
        assert!(std::fs::read_to_string(&out)
            .unwrap()
            .starts_with(output::CSV_HEADER));
        std::fs::remove_file(out).unwrap();
        assert_eq!(CliError::Numerical("x".into()).exit_code(), 2);
    }

    #[test]
    fn negative_grid_values_parse() {
        let cli = parse(&["sweep", "--snr-db", "-10,-5"]);
        let Command::Sweep(a) = cli.command else {
            panic!()
        };
        assert_eq!(build_spec(&a).unwrap().snr_db_grid, vec![-10.0, -5.0]);
    }
}
