use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};
use qcaed::sim::{parse_grid, RunConfig, Simulator};
use qcaed::symbreak::equivariant_shifts;
use qcaed::{load_standard_code, write_csv, BinaryMatrix, BreakMethod, QcCode, StandardCode};

#[derive(Parser)]
#[command(name = "qcaed", version, about = "Automorphism ensemble decoding of QC-LDPC codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo Eb/N0 sweep and write CSV
    Simulate(SimulateArgs),
    /// Inspect or transform parity-check matrices
    #[command(subcommand)]
    Matrix(MatrixCommand),
}

#[derive(Args)]
struct SimulateArgs {
    /// key=value run configuration; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_code)]
    code: Option<StandardCode>,
    /// bp, layered, aed or sbp
    #[arg(long)]
    decoder: Option<String>,
    /// none, row-add, overcomplete or undercomplete
    #[arg(long = "break", value_parser = ["none", "row-add", "overcomplete", "undercomplete"])]
    break_method: Option<String>,
    /// e.g. idx=0, src=0,dst=1 or checks=51,53,58,71
    #[arg(long)]
    break_params: Option<String>,
    /// Number of QC automorphisms for AED
    #[arg(long)]
    ensemble: Option<usize>,
    /// Number of saturated positions for SBP
    #[arg(long = "ensemble-S")]
    ensemble_s: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// flooding or layered
    #[arg(long)]
    schedule: Option<String>,
    /// start:step:stop, a comma-separated list or one value (dB)
    #[arg(long)]
    ebno: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    min_errors: Option<usize>,
    #[arg(long)]
    max_frames: Option<usize>,
    /// all_zero or random_encoded
    #[arg(long)]
    payload: Option<String>,
    /// SBP: stop launching branches after this many converged
    #[arg(long)]
    stop_after: Option<usize>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MatrixCommand {
    /// Print N, K, Z and rank
    Info(MatrixArgs),
    /// Print the GF(2) rank
    Rank(MatrixArgs),
    /// Write the modified decoding matrix as alist
    Break(MatrixArgs),
    /// List the shifts d for which the matrix is equivariant
    Equivariance(MatrixArgs),
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long, value_parser = parse_code, required_unless_present = "alist")]
    code: Option<StandardCode>,
    /// Read the matrix from an alist file instead of a standard code
    #[arg(long, conflicts_with = "code")]
    alist: Option<PathBuf>,
    /// Lifting factor for --alist input
    #[arg(long, requires = "alist")]
    z: Option<usize>,
    #[arg(long, alias = "break", default_value = "none",
          value_parser = ["none", "row-add", "overcomplete", "undercomplete"])]
    method: String,
    #[arg(long, alias = "break-params")]
    params: Option<String>,
    #[arg(long)]
    idx: Option<usize>,
    #[arg(long)]
    src: Option<usize>,
    #[arg(long)]
    dst: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    checks: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_code(s: &str) -> Result<StandardCode, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = StandardCode::ALL.iter().map(|c| c.name()).collect();
        format!("unknown code (expected one of {})", names.join(", "))
    })
}

fn usage_error(msg: &str) -> ! {
    let mut cli = Cli::command();
    let sub = cli.find_subcommand_mut("simulate").expect("simulate subcommand");
    sub.set_bin_name("qcaed simulate");
    sub.error(clap::error::ErrorKind::MissingRequiredArgument, msg).exit()
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let base = args.code.zip(args.decoder.as_deref()).map(|(c, d)| -> Result<RunConfig> {
                Ok(RunConfig::new(c, d.parse()?))
            });
            RunConfig::parse(&text, base.transpose()?).with_context(|| format!("in {}", path.display()))?
        }
        None => {
            let Some(code) = args.code else { usage_error("--code is required") };
            let Some(decoder) = &args.decoder else { usage_error("--decoder is required") };
            RunConfig::new(code, decoder.parse()?)
        }
    };
    if let Some(c) = args.code {
        cfg.code = c;
    }
    if let Some(d) = &args.decoder {
        cfg.decoder = d.parse()?;
    }
    if let Some(b) = &args.break_method {
        cfg.break_method = b.clone();
        if args.break_params.is_none() {
            cfg.break_params.clear();
        }
    }
    if let Some(p) = &args.break_params {
        cfg.break_params = p.clone();
    }
    if args.ensemble.is_some() && args.ensemble_s.is_some() {
        usage_error("--ensemble and --ensemble-S are mutually exclusive");
    }
    if let Some(l) = args.ensemble.or(args.ensemble_s) {
        cfg.ensemble = Some(l);
    }
    if let Some(i) = args.iters {
        cfg.max_iter = i;
    }
    if let Some(s) = &args.schedule {
        cfg.schedule = s.parse()?;
    }
    if let Some(e) = &args.ebno {
        cfg.ebno = parse_grid(e)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = args.min_errors {
        cfg.min_block_errors = m;
    }
    if let Some(m) = args.max_frames {
        cfg.max_frames = m;
    }
    if let Some(p) = &args.payload {
        cfg.payload = p.parse()?;
    }
    if let Some(k) = args.stop_after {
        cfg.sbp_stop_after = Some(k);
    }
    if cfg.ebno.is_empty() {
        usage_error("an Eb/N0 grid is required (--ebno or `ebno=` in --config)");
    }
    if args.workers == Some(0) {
        bail!("--workers must be positive");
    }

    let results = Simulator::new(cfg)?.run_sweep(args.workers)?;
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&results, io::BufWriter::new(file))?;
        }
        None => write_csv(&results, io::stdout().lock())?,
    }
    Ok(())
}

struct Loaded {
    h: BinaryMatrix,
    code: Option<QcCode>,
    z: Option<usize>,
}

fn load_matrix(args: &MatrixArgs) -> Result<Loaded> {
    if let Some(path) = &args.alist {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let h = BinaryMatrix::from_alist(&text).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(Loaded { h, code: None, z: args.z });
    }
    let code = load_standard_code(args.code.expect("clap enforces --code or --alist"))?;
    Ok(Loaded {
        h: code.h().clone(),
        z: Some(code.z()),
        code: Some(code),
    })
}

fn break_method(args: &MatrixArgs, loaded: &Loaded) -> Result<BreakMethod> {
    let mut params = Vec::new();
    if let Some(p) = &args.params {
        params.push(p.clone());
    }
    if let Some(i) = args.idx {
        params.push(format!("idx={i}"));
    }
    if let Some(s) = args.src {
        params.push(format!("src={s}"));
    }
    if let Some(d) = args.dst {
        params.push(format!("dst={d}"));
    }
    if !args.checks.is_empty() {
        let list: Vec<String> = args.checks.iter().map(usize::to_string).collect();
        params.push(format!("checks={}", list.join(",")));
    }
    if !params.is_empty() {
        return Ok(BreakMethod::parse(&args.method, &params.join(","))?);
    }
    match &loaded.code {
        Some(code) => {
            let kind = args.code.expect("standard code");
            Ok(BreakMethod::default_for(&args.method, kind, code.h())?)
        }
        None if args.method == "none" => Ok(BreakMethod::None),
        None => bail!("--{} parameters are required for alist input", args.method),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn matrix(cmd: MatrixCommand) -> Result<()> {
    match cmd {
        MatrixCommand::Info(args) => {
            let loaded = load_matrix(&args)?;
            let h = &loaded.h;
            let line = match &loaded.code {
                Some(c) if !c.punctured().is_empty() => format!(
                    "N={} K={} Z={} rank={} lifted_N={} punctured={}\n",
                    c.transmitted_len(),
                    c.k(),
                    c.z(),
                    c.rank(),
                    c.n(),
                    c.punctured().len()
                ),
                Some(c) => format!("N={} K={} Z={} rank={}\n", c.n(), c.k(), c.z(), c.rank()),
                None => {
                    let rank = h.rank();
                    let z = loaded.z.map(|z| format!(" Z={z}")).unwrap_or_default();
                    format!("N={} K={}{z} rank={rank} M={}\n", h.n_cols(), h.n_cols() - rank, h.n_rows())
                }
            };
            emit(args.out.as_deref(), &line)
        }
        MatrixCommand::Rank(args) => {
            let loaded = load_matrix(&args)?;
            let h = break_method(&args, &loaded)?.apply(&loaded.h)?;
            emit(args.out.as_deref(), &format!("{}\n", h.rank()))
        }
        MatrixCommand::Break(args) => {
            let loaded = load_matrix(&args)?;
            let method = break_method(&args, &loaded)?;
            let h = method.apply(&loaded.h)?;
            if args.out.is_some() {
                eprintln!("{method}: {} x {} rank {}", h.n_rows(), h.n_cols(), h.rank());
            }
            emit(args.out.as_deref(), &h.to_alist())
        }
        MatrixCommand::Equivariance(args) => {
            let loaded = load_matrix(&args)?;
            let Some(z) = loaded.z else { bail!("--z is required for alist input") };
            let method = break_method(&args, &loaded)?;
            let h = method.apply(&loaded.h)?;
            let shifts = equivariant_shifts(&h, z)?;
            let list: Vec<String> = shifts.iter().map(usize::to_string).collect();
            emit(
                args.out.as_deref(),
                &format!("{method}: {} of {z} shifts equivariant: {}\n", shifts.len(), list.join(" ")),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Matrix(cmd) => matrix(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
