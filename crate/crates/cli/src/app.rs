use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use teichkit_core::domains::CoefficientSpec;

use crate::config::{ConfigFile, ExperimentConfig, FunctionSpec, GridConfig, PList};
use crate::error::{config, CliError, Result};
use crate::result::ExperimentResult;

#[derive(Debug, Parser)]
#[command(
    name = "teichkit",
    version,
    about = "Numerical experiments in the p-integrable universal Teichmüller space"
)]
pub struct Args {
    /// Subcommand; taken from the config file when omitted.
    pub command: Option<String>,
    /// JSON file holding one experiment or `{"experiments": [...]}`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where to write the JSON result; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Experiments run concurrently from a batch.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Comma separated exponents.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Tolerance override, `name=value`; repeatable.
    #[arg(long = "tol")]
    pub tol: Vec<String>,
    /// Coefficient as JSON, e.g. `{"kind":"constant_disk","k":0.3,"r":0.5}`.
    #[arg(long)]
    pub mu: Option<String>,
    /// Holomorphic function as JSON, e.g. `{"kind":"monomial","n":2}`.
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub kernel: Option<String>,
    /// Comma separated criterion ids for `verify-all`.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<u8>>,
}

/// Applies command-line flags on top of a config.
fn merge(args: &Args, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
    if let Some(c) = &args.command {
        cfg.command = c.clone();
    }
    if args.grid_n.is_some() || args.half_width.is_some() {
        let n = args
            .grid_n
            .or(cfg.grid.map(|g| g.n))
            .ok_or_else(|| config("--half-width needs --grid-n"))?;
        let half_width = args.half_width.or(cfg.grid.and_then(|g| g.half_width));
        cfg.grid = Some(GridConfig { n, half_width });
    }
    if let Some(p) = &args.p {
        cfg.p = Some(PList::Many(p.clone()));
    }
    for t in &args.tol {
        let (name, v) = t
            .split_once('=')
            .ok_or_else(|| config(format!("--tol expects name=value, got {t:?}")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| config(format!("bad tolerance value {v:?}")))?;
        cfg.tolerances.insert(name.to_string(), v);
    }
    if let Some(m) = &args.mu {
        let spec: CoefficientSpec =
            serde_json::from_str(m).map_err(|e| config(format!("--mu: {e}")))?;
        cfg.mu = Some(spec);
    }
    if let Some(f) = &args.phi {
        let spec: FunctionSpec =
            serde_json::from_str(f).map_err(|e| config(format!("--phi: {e}")))?;
        cfg.phi = Some(spec);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.delta.is_some() {
        cfg.delta = args.delta;
    }
    if args.kernel.is_some() {
        cfg.kernel = args.kernel.clone();
    }
    if args.criteria.is_some() {
        cfg.criteria = args.criteria.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configs(args: &Args) -> Result<Vec<ExperimentConfig>> {
    let base = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => {
            let cmd = args
                .command
                .as_deref()
                .ok_or_else(|| config("no command given"))?;
            vec![ExperimentConfig::new(cmd)]
        }
    };
    base.into_iter().map(|c| merge(args, c)).collect()
}

fn run_batch(cfgs: &[ExperimentConfig], jobs: usize) -> Vec<Result<ExperimentResult>> {
    if jobs <= 1 || cfgs.len() <= 1 {
        return cfgs.iter().map(crate::run).collect();
    }
    let mut out: Vec<Option<Result<ExperimentResult>>> = (0..cfgs.len()).map(|_| None).collect();
    for (chunk_cfgs, chunk_out) in cfgs.chunks(jobs).zip(out.chunks_mut(jobs)) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk_cfgs
                .iter()
                .map(|c| s.spawn(move || crate::run(c)))
                .collect();
            for (h, slot) in handles.into_iter().zip(chunk_out.iter_mut()) {
                *slot = Some(h.join().expect("experiment thread panicked"));
            }
        });
    }
    out.into_iter().map(|r| r.expect("filled")).collect()
}

/// Output file for experiment `i` of `total`. Batches write `<stem>.<i>.json`.
fn out_path(args: &Args, cfg: &ExperimentConfig, i: usize, total: usize) -> Option<PathBuf> {
    if let Some(p) = cfg.output_path.as_ref() {
        return Some(PathBuf::from(p));
    }
    let out = args.out.as_ref()?;
    if total == 1 {
        return Some(out.clone());
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned());
    Some(out.with_file_name(format!(
        "{}.{i}.json",
        stem.unwrap_or_else(|| "result".into())
    )))
}

fn report_failures(r: &ExperimentResult) {
    if let Some(e) = &r.error {
        eprintln!(
            "{}: stage {} failed: {}",
            r.command.command, e.stage, e.message
        );
    }
    for (name, ok) in &r.verdicts {
        if !ok {
            eprintln!("{}: check {name} failed", r.command.command);
        }
    }
}

fn print_table(r: &ExperimentResult) {
    if let Some(t) = r.tables.get("criteria") {
        let mut stdout = std::io::stdout().lock();
        for row in &t.rows {
            let tag = if row[2] == "true" { "PASS" } else { "FAIL" };
            let _ = writeln!(stdout, "[{tag}] {} {}: {}", row[0], row[1], row[3]);
        }
    }
}

fn execute(args: &Args) -> Result<bool> {
    let cfgs = configs(args)?;
    let results = run_batch(&cfgs, args.jobs);
    let total = cfgs.len();
    let mut all_passed = true;
    for (i, (cfg, r)) in cfgs.iter().zip(results).enumerate() {
        let r = r?;
        if cfg.command == "verify-all" {
            print_table(&r);
        }
        match out_path(args, cfg, i, total) {
            Some(path) => {
                r.write(&path)?;
            }
            None if cfg.command != "verify-all" => print!("{}", r.to_json()?),
            None => {}
        }
        if !r.passed() {
            report_failures(&r);
            all_passed = false;
        }
    }
    Ok(all_passed)
}

/// Runs the command line and returns the process exit code: 0 when every
/// check passed, 1 when a check or stage failed, 2 on a usage error.
pub fn main_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&args) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e @ (CliError::Config(_) | CliError::UnknownCommand(_))) => {
            eprintln!("teichkit: {e}");
            2
        }
        Err(e) => {
            eprintln!("teichkit: {e}");
            1
        }
    }
}
