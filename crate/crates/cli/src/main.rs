//! `girthforge` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a construction or verification fails,
//! 2 on invalid input.

use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use girthforge::io::{self as gio, ParseError};
use girthforge::optimizer::{
    construct, min_lifting, select_spreading, Algorithm, ConstructError, ConstructParams,
};
use girthforge::oracle::verify_construction;
use girthforge::simulate::{run_ber, StopRule, Transmit};
use girthforge::spreading::default_batches;
use girthforge::{Protomatrix, ScCode, SpreadingSpec};

#[derive(Parser, Debug)]
#[command(name = "girthforge", version, about = "High-girth QC and SC LDPC code construction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct one code and verify it on the binary graph.
    Construct(ConstructArgs),
    /// Minimum-lifting search over coupling widths; one CSV row per width.
    Sweep(SweepArgs),
    /// Check the girth of a code in poly format.
    Verify(VerifyArgs),
    /// Write the binary expansion of a poly file.
    Export(ExportArgs),
    /// Monte-Carlo BER/FER of a poly file over BPSK-AWGN.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
struct EnsembleArgs {
    /// Variable degree of an all-ones protograph.
    #[arg(long, requires = "dc")]
    dv: Option<usize>,
    /// Check degree of an all-ones protograph.
    #[arg(long, requires = "dv")]
    dc: Option<usize>,
    /// Protograph file: `M N`, then M rows of N integers.
    #[arg(long, conflicts_with = "dv")]
    proto: Option<PathBuf>,
    /// Spreading file: w component protographs separated by blank lines.
    #[arg(long)]
    spread: Option<PathBuf>,
    /// Random spreadings scored when no spreading file is given.
    #[arg(long, default_value_t = 64)]
    candidates: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Alist,
    Poly,
    Csv,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    alg: u8,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Coupling width (ignored by --alg 1).
    #[arg(long, default_value_t = 2)]
    w: usize,
    #[arg(long, required_unless_present = "sx_range", conflicts_with = "sx_range")]
    sx: Option<u32>,
    /// Search the smallest working Sx in A:B.
    #[arg(long, value_name = "A:B")]
    sx_range: Option<String>,
    #[arg(long, default_value_t = 1)]
    sy: u32,
    #[arg(long)]
    girth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Greedy descents (random restarts) per lifting factor.
    #[arg(long, default_value_t = ConstructParams::DEFAULT_BUDGET)]
    budget: usize,
    /// Replications for verification (default: enough for the target girth).
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Poly)]
    format: Format,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    alg: u8,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Coupling widths: `W`, `A:B` or a comma list.
    #[arg(long, default_value = "2")]
    w: String,
    #[arg(long, value_name = "A:B")]
    sx_range: String,
    #[arg(long, default_value_t = 1)]
    sy: u32,
    #[arg(long)]
    girth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Attempts per lifting factor.
    #[arg(long, default_value_t = ConstructParams::DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long)]
    girth: usize,
    #[arg(long)]
    batches: Option<usize>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Alist)]
    format: Format,
    /// Replications of an SC code (default 1).
    #[arg(long, default_value_t = 1)]
    batches: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    file: PathBuf,
    /// Eb/N0 points in dB: comma list or `A:B:STEP`.
    #[arg(long, default_value = "1:3:0.5")]
    ebn0: String,
    /// Replications of an SC code.
    #[arg(long, default_value_t = 20)]
    batches: usize,
    #[arg(long, default_value_t = 100)]
    frame_errors: u64,
    #[arg(long, default_value_t = 100_000)]
    max_frames: u64,
    #[arg(long, default_value_t = girthforge::simulate::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

enum Failure {
    Invalid(String),
    Failed(String),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, Failure> {
    r.map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Failed(e.to_string()))
        }
    }
}

fn parse_range(s: &str) -> Result<RangeInclusive<u32>, Failure> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| invalid(format!("range `{s}` must look like A:B")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| invalid(format!("range bound `{t}` is not an integer")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a == 0 || a > b {
        return Err(invalid(format!("range `{s}` must satisfy 1 <= A <= B")));
    }
    Ok(a..=b)
}

fn parse_widths(s: &str) -> Result<Vec<usize>, Failure> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let one = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w >= 1)
            .ok_or_else(|| invalid(format!("coupling width `{t}` must be a positive integer")))
    };
    if let Some((a, b)) = s.split_once(':') {
        let (a, b) = (one(a)?, one(b)?);
        return Ok((a..=b).collect());
    }
    s.split(',').map(one).collect()
}

fn parse_points(s: &str) -> Result<Vec<f64>, Failure> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| invalid(format!("`{t}` is not a number")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step <= 0.0 || b < a {
                return Err(invalid(format!("bad Eb/N0 range `{s}`")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| a + step * k as f64).collect())
        }
        _ => s.split(',').map(num).collect(),
    }
}

fn check_girth(g: usize) -> CmdResult {
    if g < 4 || g % 2 == 1 {
        return Err(invalid(format!("--girth must be even and at least 4, got {g}")));
    }
    Ok(())
}

/// Block protograph and spreading from the ensemble flags.
fn resolve_spreading(
    e: &EnsembleArgs,
    alg: Algorithm,
    w: usize,
    girth: usize,
    seed: u64,
) -> Result<SpreadingSpec, Failure> {
    let block = match (&e.proto, e.dv, e.dc) {
        (Some(path), _, _) => Some(with_path(path, gio::parse_protograph(&read_file(path)?))?),
        (None, Some(dv), Some(dc)) => {
            if dv == 0 || dc == 0 {
                return Err(invalid("--dv and --dc must be positive"));
            }
            Some(Protomatrix::all_ones(dv, dc))
        }
        _ => None,
    };
    if let Some(path) = &e.spread {
        let spec = with_path(path, gio::parse_spreading(&read_file(path)?))?;
        if let Some(b) = &block {
            spec.check_block(b)
                .map_err(|err| invalid(format!("{}: {err}", path.display())))?;
        }
        return Ok(match alg {
            Algorithm::Block => SpreadingSpec::unspread(&spec.block()),
            _ => spec,
        });
    }
    let block = block.ok_or_else(|| invalid("give --dv/--dc, --proto or --spread"))?;
    Ok(match alg {
        Algorithm::Block => SpreadingSpec::unspread(&block),
        _ => {
            if w == 0 {
                return Err(invalid("--w must be at least 1"));
            }
            select_spreading(&block, w, girth, e.candidates, seed)
        }
    })
}

fn construct_failure(e: ConstructError) -> Failure {
    match e {
        ConstructError::Exhausted { .. } => Failure::Failed(e.to_string()),
        _ => Failure::Invalid(e.to_string()),
    }
}

fn cmd_construct(a: ConstructArgs) -> CmdResult {
    check_girth(a.girth)?;
    let alg = Algorithm::from_number(a.alg).ok_or_else(|| invalid("--alg must be 1, 2 or 3"))?;
    if a.sy == 0 {
        return Err(invalid("--sy must be at least 1"));
    }
    let spec = resolve_spreading(&a.ensemble, alg, a.w, a.girth, a.seed)?;
    let range = match (&a.sx, &a.sx_range) {
        (Some(0), _) => return Err(invalid("--sx must be at least 1")),
        (Some(sx), _) => *sx..=*sx,
        (None, Some(r)) => parse_range(r)?,
        (None, None) => return Err(invalid("give --sx or --sx-range")),
    };
    info!(
        "construct alg={} m={} n={} w={} sx={:?} sy={} girth={} seed={} budget={}",
        a.alg,
        spec.m(),
        spec.n(),
        spec.w(),
        range,
        a.sy,
        a.girth,
        a.seed,
        a.budget
    );
    let (code, sx, attempt) = if range.start() == range.end() {
        let params = ConstructParams {
            sx: *range.start(),
            sy: a.sy,
            girth: a.girth,
            seed: a.seed,
            budget: a.budget,
        };
        let c = construct(alg, &spec, &params).map_err(construct_failure)?;
        (c.code, params.sx, c.attempt)
    } else {
        let p = min_lifting(alg, &spec, range, a.sy, a.girth, a.budget, a.seed)
            .map_err(construct_failure)?;
        match (p.code, p.s_min) {
            (Some(code), Some(sx)) => (code, sx, p.trials - 1),
            _ => {
                return Err(Failure::Failed(format!(
                    "no lifting factor in range reached girth {}",
                    a.girth
                )))
            }
        }
    };
    let batches = a.batches.unwrap_or_else(|| default_batches(code.w(), a.girth));
    let report = verify_construction(&code, a.girth, Some(batches))
        .map_err(|e| Failure::Failed(format!("verification failed: {e}")))?;
    eprintln!("{report}");
    let text = match a.format {
        Format::Poly => gio::write_poly(
            &code,
            &[
                "girthforge construct".to_string(),
                format!(
                    "alg={} sx={sx} sy={} girth={} seed={} budget={} attempt={attempt}",
                    a.alg, a.sy, a.girth, a.seed, a.budget
                ),
            ],
        ),
        Format::Alist => gio::write_alist(&code.expand(batches)),
        Format::Csv => return Err(invalid("construct writes poly or alist")),
    };
    write_output(a.out.as_deref(), &text)
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    check_girth(a.girth)?;
    let alg = Algorithm::from_number(a.alg).ok_or_else(|| invalid("--alg must be 1, 2 or 3"))?;
    if a.format != Format::Csv {
        return Err(invalid("sweep writes csv"));
    }
    if a.sy == 0 {
        return Err(invalid("--sy must be at least 1"));
    }
    let range = parse_range(&a.sx_range)?;
    let widths = match alg {
        Algorithm::Block => vec![1],
        _ => parse_widths(&a.w)?,
    };
    let mut sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(
            fs::File::create(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout()),
    };
    let io_err = |e: io::Error| Failure::Failed(e.to_string());
    writeln!(sink, "{}", gio::SWEEP_CSV_HEADER).map_err(io_err)?;
    sink.flush().map_err(io_err)?;
    for w in widths {
        let started = Instant::now();
        let spec = resolve_spreading(&a.ensemble, alg, w, a.girth, a.seed ^ w as u64)?;
        let point = min_lifting(alg, &spec, range.clone(), a.sy, a.girth, a.budget, a.seed)
            .map_err(construct_failure)?;
        if let Some(code) = &point.code {
            verify_construction(code, a.girth, None)
                .map_err(|e| Failure::Failed(format!("w={w}: verification failed: {e}")))?;
        }
        let block = spec.block();
        let row = gio::sweep_csv_row(
            a.alg,
            block.col_weight(0) as usize,
            block.row_weight(0) as usize,
            spec.w(),
            a.girth,
            a.sy,
            point.s_min,
            point.trials,
            a.seed,
            started.elapsed().as_millis(),
        );
        writeln!(sink, "{row}").map_err(io_err)?;
        sink.flush().map_err(io_err)?;
    }
    Ok(())
}

fn load_poly(path: &Path) -> Result<ScCode, Failure> {
    with_path(path, gio::parse_poly(&read_file(path)?))
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    check_girth(a.girth)?;
    let code = load_poly(&a.file)?;
    match verify_construction(&code, a.girth, a.batches) {
        Ok(report) => {
            println!("{report}");
            Ok(())
        }
        Err(e) => {
            println!("{}", e.report);
            Err(Failure::Failed(e.to_string()))
        }
    }
}

fn cmd_export(a: ExportArgs) -> CmdResult {
    let code = load_poly(&a.file)?;
    if a.batches == 0 {
        return Err(invalid("--batches must be at least 1"));
    }
    let text = match a.format {
        Format::Alist => gio::write_alist(&code.expand(a.batches)),
        Format::Poly => gio::write_poly(&code, &[]),
        Format::Csv => return Err(invalid("export writes alist or poly")),
    };
    write_output(a.out.as_deref(), &text)
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    if a.format != Format::Csv {
        return Err(invalid("simulate writes csv"));
    }
    let code = load_poly(&a.file)?;
    if a.batches == 0 {
        return Err(invalid("--batches must be at least 1"));
    }
    let points = parse_points(&a.ebn0)?;
    let pcm = code.expand(a.batches);
    let stop = StopRule {
        min_frame_errors: a.frame_errors,
        max_frames: a.max_frames,
    };
    info!(
        "simulate n={} m={} points={points:?} stop={stop:?} seed={}",
        pcm.cols(),
        pcm.rows(),
        a.seed
    );
    let results = run_ber(&pcm, &points, stop, a.max_iters, Transmit::AllZero, a.seed);
    let mut text = format!("{}\n", gio::BER_CSV_HEADER);
    for r in &results {
        text.push_str(&gio::ber_csv_row(r));
        text.push('\n');
    }
    write_output(a.out.as_deref(), &text)
}

fn configure_threads() -> CmdResult {
    let Ok(v) = std::env::var("GIRTHFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| invalid(format!("GIRTHFORGE_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Failed(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Export(a) => cmd_export(a),
        Command::Simulate(a) => cmd_simulate(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
