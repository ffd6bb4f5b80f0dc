//! Command-line front end: compatibility checks, robustness searches,
//! channel classification, threshold tables, and seeded model estimates.
//!
//! Exit codes are a stable contract: 0 compatible (or pass), 1 incompatible,
//! 2 undecided (or fail), 3 usage or parse error, 4 internal error. Identical
//! invocations with identical seeds produce byte-identical JSON and CSV.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::channels::Channel;
use crate::classify::{
    classify_channel, clone_bound, eb_threshold, projective_threshold, rank1_threshold,
    ClassReport, Evidence,
};
use crate::compat::{joint_measurability, white_noise_robustness, SolverOptions, Verdict};
use crate::constructions::{
    clifford_set, hsm_projective, hsm_rank1, spin_direction_check, HsmEstimate,
};
use crate::error::Error;
use crate::linalg::{C64, CMatrix};
use crate::observables::{depolarize, noisy_spin, trine, Observable};

/// Parsed command line.
#[derive(Parser, Debug)]
#[command(
    name = "incompat",
    version,
    about = "Joint measurability, white-noise robustness, and channel classification"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test whether observables are jointly measurable.
    ///
    /// Exits 0 when compatible, 1 when incompatible, 2 when undecided.
    Check(CheckArgs),
    /// Locate the white-noise level where a set switches compatibility.
    ///
    /// Exits 0 when the bracket reached the requested resolution, 2 otherwise.
    Robustness(RobustnessArgs),
    /// Classify a channel JSON file into the breaking classes.
    Classify(ClassifyArgs),
    /// Emit the closed-form threshold table as CSV.
    Bounds(BoundsArgs),
    /// Run a seeded hidden-state estimate against its closed-form target.
    ///
    /// Exits 0 on a 3-sigma pass, 2 on a fail.
    Hsm(HsmArgs),
}

#[derive(Args, Debug)]
struct SetArgs {
    /// Observable JSON files, one observable per file.
    files: Vec<PathBuf>,
    /// Builtin set: xyz, specker[:m], trine, mub[:d].
    #[arg(long)]
    builtin: Option<String>,
    /// Order of the builtin anticommuting set.
    #[arg(long)]
    m: Option<usize>,
    /// Dimension of the builtin basis family.
    #[arg(long)]
    d: Option<usize>,
    /// White-noise level applied to the set before testing.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    set: SetArgs,
    /// Solver feasibility tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Iteration cap for the feasibility solver.
    #[arg(long)]
    iters: Option<usize>,
    /// Write the JSON result to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RobustnessArgs {
    #[command(flatten)]
    set: SetArgs,
    /// Solver feasibility tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Width of the final noise bracket.
    #[arg(long, default_value_t = 1e-3)]
    resolution: f64,
    /// Iteration cap per feasibility probe.
    #[arg(long)]
    iters: Option<usize>,
    /// Write the JSON result to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Channel JSON file.
    channel: PathBuf,
    /// Classify n-breaking for every n from 2 up to this value.
    #[arg(long, default_value_t = 4)]
    max_n: usize,
    /// Solver feasibility tolerance for refutation probes.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Iteration cap per feasibility probe.
    #[arg(long)]
    iters: Option<usize>,
    /// Write the report JSON to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Smallest dimension row.
    #[arg(long, default_value_t = 2)]
    d_min: usize,
    /// Largest dimension row.
    #[arg(long, default_value_t = 6)]
    d_max: usize,
    /// Smallest family size column.
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    /// Largest family size column.
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    /// Write the CSV to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HsmArgs {
    /// Model kind: projective, rank1, or spin.
    #[arg(long)]
    kind: String,
    /// Dimension of the builtin basis target.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Observable JSON file overriding the builtin target (rank1 only).
    #[arg(long)]
    file: Option<PathBuf>,
    /// Spin direction as three comma-separated components.
    #[arg(long, default_value = "0,0,1")]
    n: String,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// RNG seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write the JSON report to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: e.to_string(),
    }
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 4,
        message: e.to_string(),
    }
}

#[derive(Debug)]
struct CmdOutput {
    /// JSON or CSV payload.
    primary: String,
    /// Human-readable companion, printed to the other stream.
    secondary: Option<String>,
    exit: i32,
    out: Option<PathBuf>,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    crate::init_thread_pool();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 3;
        }
    };
    match dispatch(cli) {
        Ok(output) => {
            if let Some(path) = &output.out {
                if let Err(e) = std::fs::write(path, &output.primary) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 3;
                }
                if let Some(secondary) = &output.secondary {
                    print!("{secondary}");
                }
            } else {
                print!("{}", output.primary);
                if let Some(secondary) = &output.secondary {
                    eprint!("{secondary}");
                }
            }
            output.exit
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<CmdOutput, Failure> {
    match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Robustness(args) => cmd_robustness(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Hsm(args) => cmd_hsm(args),
    }
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

fn qubit_mubs() -> Result<Vec<Observable>, Error> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::identity(2);
    let x = CMatrix::from_rows(&[
        vec![C64::new(s, 0.0), C64::new(s, 0.0)],
        vec![C64::new(s, 0.0), C64::new(-s, 0.0)],
    ])?;
    let y = CMatrix::from_rows(&[
        vec![C64::new(s, 0.0), C64::new(s, 0.0)],
        vec![C64::new(0.0, s), C64::new(0.0, -s)],
    ])?;
    Ok(vec![
        Observable::projective_from_basis(&z)?,
        Observable::projective_from_basis(&x)?,
        Observable::projective_from_basis(&y)?,
    ])
}

/// The d+1 mutually unbiased bases of a prime dimension, as observables.
fn mub_set(d: usize) -> Result<Vec<Observable>, Failure> {
    if d == 2 {
        return qubit_mubs().map_err(internal);
    }
    if !is_prime(d) {
        return Err(usage(format!(
            "the basis family is built for prime dimensions, got {d}"
        )));
    }
    let mut out = vec![
        Observable::projective_from_basis(&CMatrix::identity(d)).map_err(internal)?,
    ];
    let scale = 1.0 / (d as f64).sqrt();
    for a in 0..d {
        let u = CMatrix::from_fn(d, |k, j| {
            let phase = 2.0 * std::f64::consts::PI * ((a * k * k + j * k) % d) as f64 / d as f64;
            C64::new(phase.cos(), phase.sin()) * C64::new(scale, 0.0)
        });
        out.push(Observable::projective_from_basis(&u).map_err(internal)?);
    }
    for (i, first) in out.iter().enumerate() {
        for second in &out[i + 1..] {
            for ei in first.effects() {
                for ej in second.effects() {
                    let overlap = (ei * ej).trace_re();
                    if (overlap - 1.0 / d as f64).abs() > 1e-10 {
                        return Err(internal(format!(
                            "basis family for d = {d} failed the unbiasedness check"
                        )));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn builtin_set(name: &str, m: Option<usize>, d: Option<usize>) -> Result<Vec<Observable>, Failure> {
    let (base, param) = match name.split_once(':') {
        Some((base, raw)) => {
            let value: usize = raw
                .parse()
                .map_err(|_| usage(format!("bad builtin parameter in '{name}'")))?;
            (base, Some(value))
        }
        None => (name, None),
    };
    match base {
        "xyz" => Ok(vec![
            noisy_spin([1.0, 0.0, 0.0], 1.0).map_err(internal)?,
            noisy_spin([0.0, 1.0, 0.0], 1.0).map_err(internal)?,
            noisy_spin([0.0, 0.0, 1.0], 1.0).map_err(internal)?,
        ]),
        "specker" => {
            let order = param.or(m).unwrap_or(3);
            let set = clifford_set(order).map_err(usage)?;
            Ok(set.observables)
        }
        "trine" => Ok(vec![trine()]),
        "mub" => mub_set(param.or(d).unwrap_or(2)),
        other => Err(usage(format!(
            "unknown builtin '{other}'; expected xyz, specker[:m], trine, or mub[:d]"
        ))),
    }
}

fn load_set(args: &SetArgs) -> Result<Vec<Observable>, Failure> {
    let mut set: Vec<Observable> = if let Some(name) = &args.builtin {
        if !args.files.is_empty() {
            return Err(usage("pass observable files or --builtin, not both"));
        }
        builtin_set(name, args.m, args.d)?
    } else {
        if args.files.is_empty() {
            return Err(usage("no observables given; pass JSON files or --builtin"));
        }
        let mut set = Vec::with_capacity(args.files.len());
        for path in &args.files {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let obs: Observable = serde_json::from_str(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            set.push(obs);
        }
        set
    };
    if let Some(first) = set.first() {
        let dim = first.dim();
        if set.iter().any(|o| o.dim() != dim) {
            return Err(usage("observables have mixed dimensions"));
        }
    }
    if !(args.t > 0.0 && args.t <= 1.0) {
        return Err(usage(format!("--t must lie in (0, 1], got {}", args.t)));
    }
    if args.t < 1.0 {
        set = set
            .iter()
            .map(|o| depolarize(o, args.t))
            .collect::<Result<_, _>>()
            .map_err(internal)?;
    }
    Ok(set)
}

fn solver_options(tol: f64, iters: Option<usize>) -> Result<SolverOptions, Failure> {
    let mut opts = SolverOptions {
        tol,
        infeas_tol: (tol * 100.0).max(1e-5),
        ..SolverOptions::default()
    };
    if let Some(iters) = iters {
        opts.max_iters = iters;
    }
    opts.check().map_err(usage)?;
    Ok(opts)
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(internal)
}

fn cmd_check(args: CheckArgs) -> Result<CmdOutput, Failure> {
    let set = load_set(&args.set)?;
    let opts = solver_options(args.tol, args.iters)?;
    let result = joint_measurability(&set, &opts).map_err(internal)?;
    let exit = match result.verdict {
        Verdict::Compatible => 0,
        Verdict::Incompatible => 1,
        Verdict::Undecided => 2,
    };
    Ok(CmdOutput {
        primary: to_pretty(&result)?,
        secondary: None,
        exit,
        out: args.out,
    })
}

fn cmd_robustness(args: RobustnessArgs) -> Result<CmdOutput, Failure> {
    let set = load_set(&args.set)?;
    let opts = solver_options(args.tol, args.iters)?;
    let result =
        white_noise_robustness(&set, &opts, args.resolution).map_err(usage)?;
    let exit = if result.converged { 0 } else { 2 };
    Ok(CmdOutput {
        primary: to_pretty(&result)?,
        secondary: None,
        exit,
        out: args.out,
    })
}

/// One line of the human-readable classification summary.
fn evidence_summary(evidence: &Evidence) -> String {
    match evidence {
        Evidence::Structural { form } => format!("declared form: {form}"),
        Evidence::Bound {
            bound,
            parameter,
            threshold,
        } => format!(
            "{bound} bound: parameter {} within {}",
            fmt6(*parameter),
            fmt6(*threshold)
        ),
        Evidence::ChoiSpectrum { min_pt_eigenvalue } => {
            format!("min partial-transpose eigenvalue {min_pt_eigenvalue:.6e}")
        }
        Evidence::Witness {
            ensemble, sha256, ..
        } => format!("incompatible image of {ensemble} (sha256 {})", &sha256[..12]),
        Evidence::Factor { position, inner } => {
            format!("{position} factor: {}", evidence_summary(inner))
        }
        Evidence::Inherited { from } => format!("follows from {from}"),
        Evidence::Open { needed } => format!("undecided; needs {needed}"),
    }
}

fn summary_table(report: &ClassReport) -> String {
    let mut rows: Vec<(String, String, String)> = Vec::new();
    rows.push((
        "entanglement breaking".into(),
        report.ebc.status.to_string(),
        evidence_summary(&report.ebc.evidence),
    ));
    for (n, verdict) in &report.n_ibc {
        rows.push((
            format!("breaks any {n} observables"),
            verdict.status.to_string(),
            evidence_summary(&verdict.evidence),
        ));
    }
    rows.push((
        "breaks all incompatibility".into(),
        report.ibc.status.to_string(),
        evidence_summary(&report.ibc.evidence),
    ));
    let mut text = format!("{}\n", report.channel);
    for (class, status, evidence) in rows {
        let _ = writeln!(text, "  {class:<28} {status:<10} {evidence}");
    }
    text
}

fn cmd_classify(args: ClassifyArgs) -> Result<CmdOutput, Failure> {
    if args.max_n < 2 {
        return Err(usage("--max-n must be at least 2"));
    }
    let text = std::fs::read_to_string(&args.channel)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.channel.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{}: {e}", args.channel.display())))?;
    let channel = Channel::from_json_value(&value)
        .map_err(|e| usage(format!("{}: {e}", args.channel.display())))?;
    let opts = solver_options(args.tol, args.iters)?;
    let ns: Vec<usize> = (2..=args.max_n).collect();
    let report = classify_channel(&channel, &ns, &opts).map_err(internal)?;
    Ok(CmdOutput {
        primary: to_pretty(&report)?,
        secondary: Some(summary_table(&report)),
        exit: 0,
        out: args.out,
    })
}

/// Formats with six significant digits and no trailing zeros.
fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    format!("{rounded}")
}

fn cmd_bounds(args: BoundsArgs) -> Result<CmdOutput, Failure> {
    if args.d_min < 2 || args.d_min > args.d_max {
        return Err(usage("need 2 <= d_min <= d_max"));
    }
    if args.n_min < 2 || args.n_min > args.n_max {
        return Err(usage("need 2 <= n_min <= n_max"));
    }
    let mut csv = String::from("d,n,clone_bound,t_P,t_0,eb_threshold\n");
    for d in args.d_min..=args.d_max {
        for n in args.n_min..=args.n_max {
            let _ = writeln!(
                csv,
                "{d},{n},{},{},{},{}",
                fmt6(clone_bound(d, n)),
                fmt6(projective_threshold(d)),
                fmt6(rank1_threshold(d)),
                fmt6(eb_threshold(d))
            );
        }
    }
    Ok(CmdOutput {
        primary: csv,
        secondary: None,
        exit: 0,
        out: args.out,
    })
}

#[derive(Serialize)]
struct HsmReport {
    kind: String,
    target_noise: f64,
    target: Observable,
    estimate: HsmEstimate,
    max_abs_deviation: f64,
    max_sigma_deviation: f64,
    sum_within_3_sigma: bool,
    pass: bool,
}

fn parse_direction(raw: &str) -> Result<[f64; 3], Failure> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("bad direction '{raw}'; expected x,y,z")))?;
    if parts.len() != 3 {
        return Err(usage(format!(
            "direction needs three components, got {}",
            parts.len()
        )));
    }
    let norm = (parts[0].powi(2) + parts[1].powi(2) + parts[2].powi(2)).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(usage("direction must be a nonzero finite vector"));
    }
    Ok([parts[0] / norm, parts[1] / norm, parts[2] / norm])
}

fn cmd_hsm(args: HsmArgs) -> Result<CmdOutput, Failure> {
    if args.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let (target_noise, target, estimate) = match args.kind.as_str() {
        "projective" => {
            if args.d < 2 {
                return Err(usage("--d must be at least 2"));
            }
            let basis =
                Observable::projective_from_basis(&CMatrix::identity(args.d)).map_err(internal)?;
            let t = projective_threshold(args.d);
            let estimate = hsm_projective(&basis, args.samples, args.seed).map_err(internal)?;
            (t, depolarize(&basis, t).map_err(internal)?, estimate)
        }
        "rank1" => {
            let obs = match &args.file {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                    serde_json::from_str::<Observable>(&text)
                        .map_err(|e| usage(format!("{}: {e}", path.display())))?
                }
                None => {
                    if args.d != 2 {
                        return Err(usage(
                            "no builtin rank-1 target beyond d = 2; pass --file",
                        ));
                    }
                    trine()
                }
            };
            let t = rank1_threshold(obs.dim());
            let estimate = hsm_rank1(&obs, args.samples, args.seed).map_err(usage)?;
            (t, depolarize(&obs, t).map_err(internal)?, estimate)
        }
        "spin" => {
            let direction = parse_direction(&args.n)?;
            let estimate =
                spin_direction_check(direction, args.samples, args.seed).map_err(internal)?;
            (0.5, noisy_spin(direction, 0.5).map_err(internal)?, estimate)
        }
        other => {
            return Err(usage(format!(
                "unknown kind '{other}'; expected projective, rank1, or spin"
            )));
        }
    };
    let max_abs_deviation = estimate.max_deviation(&target).map_err(internal)?;
    let max_sigma_deviation = estimate.max_sigma_deviation(&target).map_err(internal)?;
    let sum_within = estimate.sum_within(3.0);
    let pass = max_sigma_deviation <= 3.0 && sum_within;
    let report = HsmReport {
        kind: args.kind.clone(),
        target_noise,
        target,
        estimate,
        max_abs_deviation,
        max_sigma_deviation,
        sum_within_3_sigma: sum_within,
        pass,
    };
    Ok(CmdOutput {
        primary: to_pretty(&report)?,
        secondary: None,
        exit: if pass { 0 } else { 2 },
        out: args.out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt6(2.0 / 3.0), "0.666667");
        assert_eq!(fmt6(0.5), "0.5");
        assert_eq!(fmt6(5.0 / 12.0), "0.416667");
        assert_eq!(fmt6(1.0 / 3.0), "0.333333");
        assert_eq!(fmt6(0.0), "0");
        assert_eq!(fmt6(0.625), "0.625");
    }

    #[test]
    fn builtin_families() {
        let xyz = builtin_set("xyz", None, None).unwrap();
        assert_eq!(xyz.len(), 3);
        assert_eq!(xyz[0].dim(), 2);
        let specker5 = builtin_set("specker:5", None, None).unwrap();
        assert_eq!(specker5.len(), 5);
        assert_eq!(specker5[0].dim(), 4);
        let specker_flag = builtin_set("specker", Some(5), None).unwrap();
        assert_eq!(specker_flag.len(), 5);
        let trine = builtin_set("trine", None, None).unwrap();
        assert_eq!(trine[0].outcomes(), 3);
        assert!(builtin_set("nope", None, None).is_err());
        assert!(builtin_set("specker:4", None, None).is_err());
    }

    #[test]
    fn mutually_unbiased_bases_for_small_primes() {
        for d in [2usize, 3, 5] {
            let set = mub_set(d).unwrap();
            assert_eq!(set.len(), d + 1);
            for o in &set {
                assert_eq!(o.dim(), d);
                assert_eq!(o.outcomes(), d);
            }
        }
        assert!(mub_set(4).is_err());
    }

    #[test]
    fn direction_parsing() {
        let v = parse_direction("0,0,1").unwrap();
        assert_eq!(v, [0.0, 0.0, 1.0]);
        let w = parse_direction("1,1,0").unwrap();
        assert!((w[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(parse_direction("1,2").is_err());
        assert!(parse_direction("0,0,0").is_err());
        assert!(parse_direction("a,b,c").is_err());
    }

    #[test]
    fn check_exit_codes_follow_the_verdict() {
        let out = dispatch(
            Cli::try_parse_from(["incompat", "check", "--builtin", "xyz", "--t", "0.5"]).unwrap(),
        )
        .unwrap();
        assert_eq!(out.exit, 0);
        let out = dispatch(
            Cli::try_parse_from(["incompat", "check", "--builtin", "xyz", "--t", "0.7"]).unwrap(),
        )
        .unwrap();
        assert_eq!(out.exit, 1);
        assert!(out.primary.contains("INCOMPATIBLE"));
    }

    #[test]
    fn usage_failures_are_code_three() {
        let err = dispatch(
            Cli::try_parse_from(["incompat", "check", "--builtin", "nope"]).unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.code, 3);
        let err = dispatch(
            Cli::try_parse_from(["incompat", "check"]).unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.code, 3);
        let err = dispatch(
            Cli::try_parse_from(["incompat", "check", "--builtin", "xyz", "--t", "1.5"]).unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.code, 3);
    }

    #[test]
    fn bounds_table_has_the_fixed_header_and_rows() {
        let out = dispatch(
            Cli::try_parse_from([
                "incompat", "bounds", "--d-min", "2", "--d-max", "2", "--n-min", "2", "--n-max",
                "8",
            ])
            .unwrap(),
        )
        .unwrap();
        let lines: Vec<&str> = out.primary.lines().collect();
        assert_eq!(lines[0], "d,n,clone_bound,t_P,t_0,eb_threshold");
        assert_eq!(lines[1], "2,2,0.666667,0.5,0.416667,0.333333");
        let crossing = lines
            .iter()
            .find(|l| l.starts_with("2,8,"))
            .expect("row for n = 8");
        assert_eq!(*crossing, "2,8,0.416667,0.5,0.416667,0.333333");
    }
}
