//! Batch front end: build/reduce/measure/verify subcommands over JSON state
//! files, with deterministic seeding and CSV sweeps.
//!
//! Party labels on the command line and in emitted artifacts are 1-based;
//! the library API is 0-based. Exit codes: 0 success, 1 inequality check
//! failed (or a measure-violation signal), 2 input or convergence errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use scren::io;
use scren::linalg::max_entry_diff;
use scren::measures::{scren_pcs_one_vs_rest, scren_pcs_pair};
use scren::monogamy::{
    ckw_residual_scren, multiparty_scren_mixed, nscren_zero_report, strong_monogamy_residual,
    MonogamyOpts, MonogamyReport, StateSource,
};
use scren::roof::{minimize_roof, scren_mixed, RankPolicy, RoofOpts};
use scren::states::{
    build_coherent_superposition, build_pcs, phase_damp, reduce_pcs_symbolic,
    sample_random_pcs_params, sample_random_wclass, PcsParams, PcsState, WClassCoefficients,
};

/// Channel-identity acceptance bound for `channel`.
const CHANNEL_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "scren",
    about = "Generalized W-class / PCS states and SCREN monogamy checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OptArgs {
    /// Optimizer starts per ensemble size.
    #[arg(long, default_value_t = 8)]
    starts: usize,
    /// Optimizer convergence tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Objective-evaluation budget per start.
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Root seed for all randomized choices.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed ensemble size; default sweeps rank..rank+2.
    #[arg(long)]
    r: Option<usize>,
    /// Tolerance for closed-form identities.
    #[arg(long, default_value_t = 1e-10)]
    closed_tol: f64,
    /// Tolerance for optimizer-backed checks.
    #[arg(long, default_value_t = 1e-4)]
    opt_tol: f64,
    /// Tolerance for zero multi-party SCREN checks.
    #[arg(long, default_value_t = 1e-6)]
    zero_tol: f64,
    /// Disable PCS structural short-circuits; always run the optimizer.
    #[arg(long)]
    force_generic: bool,
}

impl OptArgs {
    fn validate(&self) -> Result<()> {
        if self.starts < 1 {
            bail!("--starts must be >= 1");
        }
        for (name, v) in [
            ("--tol", self.tol),
            ("--closed-tol", self.closed_tol),
            ("--opt-tol", self.opt_tol),
            ("--zero-tol", self.zero_tol),
        ] {
            if !(v > 0.0) {
                bail!("{name} must be > 0");
            }
        }
        Ok(())
    }

    fn roof_opts(&self) -> RoofOpts<f64> {
        RoofOpts {
            rank_policy: self.r.map_or(RankPolicy::Sweep, RankPolicy::Fixed),
            starts: self.starts,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }

    fn monogamy_opts(&self) -> MonogamyOpts<f64> {
        MonogamyOpts {
            roof: self.roof_opts(),
            force_generic: self.force_generic,
            closed_tol: self.closed_tol,
            opt_tol: self.opt_tol,
            zero_tol: self.zero_tol,
            ..MonogamyOpts::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a PCS state file.
    Build {
        /// Standard n-party, d-level uniform W-class coefficients.
        #[arg(long, num_args = 2, value_names = ["N", "D"], conflicts_with_all = ["random", "input"])]
        standard_w: Option<Vec<usize>>,
        /// Random W-class coefficients for n parties, d levels.
        #[arg(long, num_args = 2, value_names = ["N", "D"], conflicts_with = "input")]
        random: Option<Vec<usize>>,
        /// Existing state file to re-emit (validates it).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace parties out of a PCS state via the symbolic reduction law.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        /// 1-based parties to trace out.
        #[arg(long, num_args = 1.., required = true)]
        trace_out: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a SCREN measure on a state file.
    Measure {
        #[arg(long)]
        input: PathBuf,
        /// 1-based focus party.
        #[arg(long, default_value_t = 1)]
        focus: usize,
        /// 1-based second party: measure the two-party marginal SCREN.
        #[arg(long)]
        pair: Option<usize>,
        /// Compute the multi-party (n-)SCREN instead of the one-vs-rest SCREN.
        #[arg(long, conflicts_with = "pair")]
        nscren: bool,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Check the CKW-type SCREN monogamy inequality.
    VerifyMonogamy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        focus: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Check the SCREN strong-monogamy inequality.
    VerifyStrong {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        focus: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Apply phase damping to the coherent superposition of a state file
    /// and check the result against the PCS closed form.
    Channel {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized saturation sweep, CSV output.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opt: OptArgs,
    },
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            // a substantially negative pure measure is an inequality failure,
            // not an input error
            let violation = err
                .downcast_ref::<scren::Error>()
                .is_some_and(|e| matches!(e, scren::Error::MeasureViolation(_)));
            ExitCode::from(if violation { 1 } else { 2 })
        }
    }
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("SCREN_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Build {
            standard_w,
            random,
            input,
            p,
            lambda,
            seed,
            out,
        } => cmd_build(standard_w, random, input, p, lambda, seed, out),
        Command::Reduce {
            input,
            trace_out,
            out,
        } => cmd_reduce(input, trace_out, out),
        Command::Measure {
            input,
            focus,
            pair,
            nscren,
            opt,
        } => cmd_measure(input, focus, pair, nscren, opt),
        Command::VerifyMonogamy {
            input,
            focus,
            out,
            opt,
        } => cmd_verify(input, focus, out, opt, false),
        Command::VerifyStrong {
            input,
            focus,
            out,
            opt,
        } => cmd_verify(input, focus, out, opt, true),
        Command::Channel { input, out } => cmd_channel(input, out),
        Command::Sweep {
            n,
            d,
            count,
            out,
            opt,
        } => cmd_sweep(n, d, count, out, opt),
    }
}

fn read_state_file(path: &PathBuf) -> Result<PcsState<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading state file {}", path.display()))?;
    Ok(io::read_state(&text)?)
}

fn emit(out: Option<PathBuf>, payload: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(&path, payload)
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{payload}"),
    }
    Ok(())
}

fn party_index(label: usize, n: usize, what: &str) -> Result<usize> {
    if label < 1 || label > n {
        bail!("{what} {label} out of range 1..={n}");
    }
    Ok(label - 1)
}

fn cmd_build(
    standard_w: Option<Vec<usize>>,
    random: Option<Vec<usize>>,
    input: Option<PathBuf>,
    p: f64,
    lambda: f64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<u8> {
    let pcs = if let Some(path) = input {
        read_state_file(&path)?
    } else {
        let coeffs = if let Some(nd) = standard_w {
            if nd[1] != 2 {
                WClassCoefficients::uniform(nd[0], nd[1])?
            } else {
                WClassCoefficients::standard_w(nd[0])?
            }
        } else if let Some(nd) = random {
            sample_random_wclass(nd[0], nd[1], seed)?
        } else {
            return Err(anyhow!(
                "one of --standard-w, --random or --input is required"
            ));
        };
        PcsState::new(coeffs, PcsParams::new(p, lambda)?)
    };
    let norm: f64 = pcs.coeffs().matrix().iter().map(|c| c.norm_sqr()).sum();
    eprintln!("normalization residual: {:e}", (norm - 1.0).abs());
    emit(out, &io::write_state(&pcs))?;
    Ok(0)
}

fn cmd_reduce(input: PathBuf, trace_out: Vec<usize>, out: Option<PathBuf>) -> Result<u8> {
    let pcs = read_state_file(&input)?;
    let n = pcs.n();
    let traced: Vec<usize> = trace_out
        .iter()
        .map(|&label| party_index(label, n, "traced party"))
        .collect::<Result<_>>()?;
    let reduced = reduce_pcs_symbolic(&pcs, &traced)?;
    eprintln!(
        "reduced: n = {}, p' = {}, lambda' = {}",
        reduced.n(),
        reduced.params().p(),
        reduced.params().lam()
    );
    emit(out, &io::write_state(&reduced))?;
    Ok(0)
}

fn cmd_measure(
    input: PathBuf,
    focus: usize,
    pair: Option<usize>,
    nscren: bool,
    opt: OptArgs,
) -> Result<u8> {
    opt.validate()?;
    let pcs = read_state_file(&input)?;
    let focus = party_index(focus, pcs.n(), "focus party")?;
    let value = if nscren {
        if opt.force_generic {
            multiparty_scren_mixed(&build_pcs(&pcs), focus, &opt.monogamy_opts())?
        } else {
            let report = nscren_zero_report(&StateSource::Pcs(pcs), focus, &opt.monogamy_opts())?;
            return finish_measure(report.lhs, "closed_form");
        }
    } else if let Some(other) = pair {
        let other = party_index(other, pcs.n(), "pair party")?;
        if opt.force_generic {
            let marginal = build_pcs(&pcs).partial_trace(&[focus.min(other), focus.max(other)])?;
            let fpos = usize::from(focus > other);
            scren_mixed(&marginal, &[fpos], &opt.roof_opts())?
        } else {
            scren_pcs_pair(&pcs, focus, other)?
        }
    } else if opt.force_generic {
        scren_mixed(&build_pcs(&pcs), &[focus], &opt.roof_opts())?
    } else {
        scren_pcs_one_vs_rest(&pcs, focus)?
    };
    finish_measure(value.value, value.method.as_str())
}

fn finish_measure(value: f64, method: &str) -> Result<u8> {
    println!(
        "{}",
        serde_json::json!({ "value": value, "method": method })
    );
    Ok(0)
}

fn cmd_verify(
    input: PathBuf,
    focus: usize,
    out: Option<PathBuf>,
    opt: OptArgs,
    strong: bool,
) -> Result<u8> {
    opt.validate()?;
    let pcs = read_state_file(&input)?;
    let focus = party_index(focus, pcs.n(), "focus party")?;
    let opts = opt.monogamy_opts();
    let source = StateSource::Pcs(pcs);
    let report: MonogamyReport<f64> = if strong {
        strong_monogamy_residual(&source, focus, &opts)?
    } else {
        ckw_residual_scren(&source, focus, &opts)?
    };
    let pass = report.pass;
    emit(out, &io::write_report(&report))?;
    Ok(if pass { 0 } else { 1 })
}

fn cmd_channel(input: PathBuf, out: Option<PathBuf>) -> Result<u8> {
    let pcs = read_state_file(&input)?;
    let psi = build_coherent_superposition(pcs.coeffs(), pcs.params().p())?;
    let damped = phase_damp(&psi, pcs.params().lam())?;
    let residual = max_entry_diff(damped.matrix(), build_pcs(&pcs).matrix());
    eprintln!("channel residual vs closed form: {residual:e}");
    emit(out, &io::write_density(&damped))?;
    if residual > CHANNEL_TOL {
        bail!("phase-damped state deviates from the PCS form by {residual:e}");
    }
    Ok(0)
}

fn split_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn cmd_sweep(n: usize, d: usize, count: usize, out: Option<PathBuf>, opt: OptArgs) -> Result<u8> {
    opt.validate()?;
    if n < 3 || d < 2 {
        bail!("sweep needs n >= 3 and d >= 2");
    }
    use rayon::prelude::*;
    let header =
        "index,n,d,p,lambda,seed,lhs,pair_sum,sm_sum,ckw_residual,sm_residual,spread,error";
    let rows: Vec<String> = (0..count)
        .into_par_iter()
        .map(|i| {
            let seed = split_seed(opt.seed, i as u64);
            match sweep_row(n, d, seed, &opt) {
                Ok(row) => format!("{i},{n},{d},{row},"),
                Err(e) => format!(
                    "{i},{n},{d},,,{seed},,,,,,,\"{}\"",
                    e.to_string().replace('"', "'")
                ),
            }
        })
        .collect();
    let mut payload = String::from(header);
    for row in rows {
        payload.push('\n');
        payload.push_str(&row);
    }
    payload.push('\n');
    emit(out, payload.trim_end_matches('\n'))?;
    Ok(0)
}

fn sweep_row(n: usize, d: usize, seed: u64, opt: &OptArgs) -> Result<String> {
    let coeffs = sample_random_wclass(n, d, seed)?;
    let params = sample_random_pcs_params(seed);
    let pcs = PcsState::new(coeffs, params);
    let mut opts = opt.monogamy_opts();
    opts.roof.seed = seed;
    let source = StateSource::Pcs(pcs.clone());
    let ckw = ckw_residual_scren(&source, 0, &opts)?;
    let sm = strong_monogamy_residual(&source, 0, &opts)?;
    let pair_sum: f64 = ckw.terms.iter().map(|t| t.contribution()).sum();
    let sm_sum: f64 = sm.terms.iter().map(|t| t.contribution()).sum();
    let spread = if opt.force_generic {
        minimize_roof(
            &build_pcs(&pcs),
            |psi| scren::measures::scren_pure(psi, &[0]).map(|m| m.value),
            &opts.roof,
        )?
        .spread
    } else {
        0.0
    };
    Ok(format!(
        "{},{},{},{},{},{},{},{}",
        params.p(),
        params.lam(),
        seed,
        ckw.lhs,
        pair_sum,
        sm_sum,
        ckw.residual,
        format_args!("{},{}", sm.residual, spread)
    ))
}
