//! `erltel` — density tables, simulation, component evaluation, and the
//! verification suites, with reproducible CSV/JSON output.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use erltel_core::algebra::table::{generate_table, truncation_for};
use erltel_core::density::{self, ModelParams};
use erltel_core::error::Error;
use erltel_core::mc::{self, SimConfig};
use erltel_core::report::{self, McEffort};

#[derive(Parser)]
#[command(name = "erltel", version, about = "Numerics for alternating random motion with Erlang-distributed sojourns")]
struct Cli {
    /// Optional JSON config file mirroring the flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form density table (m in {1, 2}).
    Density(DensityArgs),
    /// Monte Carlo position histogram (any m >= 1).
    Simulate(SimulateArgs),
    /// Run verification suites and emit a JSON report.
    Verify(VerifyArgs),
    /// Evaluate one generated component u(l, k) at a point.
    Ufunc(UfuncArgs),
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Single evaluation point.
    #[arg(long, conflicts_with = "grid")]
    x: Option<f64>,
    /// Number of evenly spaced interior points instead of --x.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// all, normalization, atom, boundary, integrals, cr, equivalence,
    /// pde, or mc.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Statistical sample count override (applies to the sampling suites).
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct UfuncArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    y: Option<f64>,
}

/// JSON config file: same keys as the flags; any subset may be present.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    m: Option<u32>,
    lambda: Option<f64>,
    v: Option<f64>,
    t: Option<f64>,
    x: Option<f64>,
    grid: Option<usize>,
    samples: Option<u64>,
    seed: Option<u64>,
    bins: Option<usize>,
    l: Option<usize>,
    k: Option<usize>,
    y: Option<f64>,
    suite: Option<String>,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config: serde_json::Value,
    seed: Option<u64>,
    version: &'static str,
    timestamp: u64,
}

impl Manifest {
    fn new(config: serde_json::Value, seed: Option<u64>) -> Self {
        Manifest {
            command: std::env::args().collect::<Vec<_>>().join(" "),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    fn comment_header(&self) -> String {
        format!(
            "# command: {}\n# config: {}\n# seed: {}\n# version: {}\n# timestamp: {}\n",
            self.command,
            self.config,
            self.seed.map_or("none".to_string(), |s| s.to_string()),
            self.version,
            self.timestamp
        )
    }
}

/// Plain-decimal formatting with `sig` significant digits.
fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, String> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("config {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", p.display()))
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| e.to_string())
        }
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
    }
}

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::UnsupportedShape { .. } => EXIT_UNSUPPORTED,
        _ => EXIT_DOMAIN,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn run_density(args: &DensityArgs, file: &FileConfig, out: &Option<PathBuf>) -> ExitCode {
    let m = args.m.or(file.m).unwrap_or(1);
    let lambda = args.lambda.or(file.lambda).unwrap_or(1.0);
    let v = args.v.or(file.v).unwrap_or(1.0);
    let t = args.t.or(file.t).unwrap_or(1.0);
    if m > 2 {
        return fail(
            EXIT_UNSUPPORTED,
            format!("no closed form for m = {m}; use `erltel simulate --m {m}` instead"),
        );
    }
    let params = match ModelParams::new(m, lambda, v) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_DOMAIN, e),
    };
    if !(t > 0.0) {
        return fail(EXIT_DOMAIN, format!("t must be > 0, got {t}"));
    }
    let xs: Vec<f64> = match (args.x.or(file.x), args.grid.or(file.grid)) {
        (Some(x), _) => vec![x],
        (None, Some(n)) if n >= 1 => {
            // midpoints of n equal slices: evenly spaced, strictly interior
            let edge = v * t;
            (0..n)
                .map(|i| -edge + (2.0 * edge) * (i as f64 + 0.5) / n as f64)
                .collect()
        }
        (None, Some(_)) => return fail(EXIT_DOMAIN, "grid must be >= 1"),
        (None, None) => return fail(EXIT_DOMAIN, "provide --x or --grid"),
    };
    let manifest = Manifest::new(
        serde_json::json!({"m": m, "lambda": lambda, "v": v, "t": t}),
        None,
    );
    let mut text = manifest.comment_header();
    text.push_str("x,f_c\n");
    for x in xs {
        let d = match density::density(&params, t, x) {
            Ok(d) => d,
            Err(e) => return fail(exit_for(&e), e),
        };
        text.push_str(&format!("{},{}\n", fmt_sig(x, 9), fmt_sig(d.continuous, 9)));
    }
    text.push_str(&format!(
        "ATOM,{},{}\n",
        fmt_sig(v * t, 9),
        fmt_sig(density::atom_mass(&params, t), 9)
    ));
    match emit(out, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_DOMAIN, e),
    }
}

fn run_simulate(args: &SimulateArgs, file: &FileConfig, out: &Option<PathBuf>) -> ExitCode {
    let m = args.m.or(file.m).unwrap_or(1);
    let lambda = args.lambda.or(file.lambda).unwrap_or(1.0);
    let v = args.v.or(file.v).unwrap_or(1.0);
    let t = args.t.or(file.t).unwrap_or(1.0);
    let samples = args.samples.or(file.samples).unwrap_or(1_000_000);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let bins = args.bins.or(file.bins).unwrap_or(100);
    let params = match ModelParams::new(m, lambda, v) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_DOMAIN, e),
    };
    let config = SimConfig {
        params,
        t,
        n_samples: samples,
        seed,
        n_bins: bins,
    };
    let hist = match mc::estimate_histogram(&config) {
        Ok(h) => h,
        Err(e) => return fail(exit_for(&e), e),
    };
    let manifest = Manifest::new(
        serde_json::json!({
            "m": m, "lambda": lambda, "v": v, "t": t,
            "samples": samples, "seed": seed, "bins": bins
        }),
        Some(seed),
    );
    let mut text = manifest.comment_header();
    text.push_str(&mc::histogram_to_csv(&hist, v * t, |x| fmt_sig(x, 9)));
    match emit(out, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_DOMAIN, e),
    }
}

fn run_verify(args: &VerifyArgs, file: &FileConfig, out: &Option<PathBuf>) -> ExitCode {
    let suite_name = if args.suite == "all" {
        file.suite.clone().unwrap_or_else(|| args.suite.clone())
    } else {
        args.suite.clone()
    };
    let mut effort = McEffort::default();
    if let Some(n) = args.samples {
        effort.atom_samples = n;
        effort.window_samples = n;
        effort.l1_samples = n;
    }
    if let Some(s) = args.seed {
        effort.seed = s;
    }
    let suites = if suite_name == "all" {
        report::all_suites(&effort)
    } else {
        report::suite_by_name(&suite_name, &effort).map(|s| vec![s])
    };
    let suites = match suites {
        Ok(s) => s,
        Err(e) => return fail(EXIT_DOMAIN, e),
    };
    let all_pass = suites.iter().all(|s| s.passed());
    let manifest = Manifest::new(serde_json::json!({"suite": suite_name}), Some(effort.seed));
    let doc = serde_json::json!({
        "manifest": manifest,
        "pass": all_pass,
        "suites": suites,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&doc).expect("report is serializable"));
    if let Err(e) = emit(out, &text) {
        return fail(EXIT_DOMAIN, e);
    }
    for s in &suites {
        for c in s.failures() {
            eprintln!(
                "FAIL {}: target {} obtained {} tol {}",
                c.name, c.target, c.obtained, c.tolerance
            );
        }
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY_FAILED)
    }
}

fn run_ufunc(args: &UfuncArgs, file: &FileConfig, out: &Option<PathBuf>) -> ExitCode {
    let m = args.m.or(file.m).unwrap_or(2);
    let l = args.l.or(file.l).unwrap_or(0);
    let k = args.k.or(file.k).unwrap_or(0);
    let t = args.t.or(file.t).unwrap_or(1.0);
    let y = args.y.or(file.y).unwrap_or(0.0);
    let w = t * t - y * y;
    if w < 0.0 {
        return fail(EXIT_DOMAIN, format!("point ({t}, {y}) lies outside the support"));
    }
    let table = match generate_table(m, k.max(4), truncation_for(w.max(1.0), 8)) {
        Ok(tab) => tab,
        Err(e) => return fail(exit_for(&e), e),
    };
    let value = match table.eval(l, k, t, y) {
        Ok(v) => v,
        Err(e) => return fail(exit_for(&e), e),
    };
    match emit(out, &format!("{}\n", fmt_sig(value, 9))) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_DOMAIN, e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("ERLTEL_THREADS") {
        match threads.parse::<usize>() {
            Ok(0) => {} // auto
            Ok(n) => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return fail(EXIT_DOMAIN, format!("ERLTEL_THREADS: {e}"));
                }
            }
            Err(_) => return fail(EXIT_DOMAIN, "ERLTEL_THREADS must be an integer"),
        }
    }
    let file = match load_config(&cli.config) {
        Ok(f) => f,
        Err(e) => return fail(EXIT_DOMAIN, e),
    };
    match &cli.command {
        Command::Density(args) => run_density(args, &file, &cli.out),
        Command::Simulate(args) => run_simulate(args, &file, &cli.out),
        Command::Verify(args) => run_verify(args, &file, &cli.out),
        Command::Ufunc(args) => run_ufunc(args, &file, &cli.out),
    }
}
