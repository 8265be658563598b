//! Command-line surface: binomial hedging runs, chaos decomposition,
//! identity/inequality audits, and the entropy-curve table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use bernoulli_calculus::chaos::{walsh_decompose, walsh_reconstruct};
use bernoulli_calculus::finance::{
    build_model, hedge, payoff_builder, price_claim, CrrModel, ModelSpec, PayoffKind,
};
use bernoulli_calculus::identities::{
    clark, covariance_clark, covariance_direct, covariance_iterated, covariance_semigroup,
    variance, variance_sandwich,
};
use bernoulli_calculus::inequalities::{
    deviation_bound_gaussian, deviation_bound_poisson_type, exact_tail, lsi_report,
};
use bernoulli_calculus::malliavin::{
    divergence, gradient, semigroup, semigroup_kernel, skorohod_isometry_sides, SkorohodProcess,
};
use bernoulli_calculus::{
    new_space, BernoulliSpace, OutcomeIndex, RandomVariable, SpaceSpec,
};

const ALL_SUITES: &[&str] = &[
    "clark",
    "adjoint",
    "isometry",
    "semigroup",
    "covariance",
    "lsi",
    "deviation",
    "sandwich",
];

#[derive(Parser)]
#[command(name = "berncalc", about = "Stochastic analysis on finite Bernoulli spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price and replicate a claim in a binomial market model.
    Hedge {
        /// Model JSON: {"N": int, "r": [..], "a": [..], "b": [..], "S0": x, "A0": x}
        #[arg(long)]
        model: PathBuf,
        /// "call", "put", or a path to a JSON array of terminal values
        #[arg(long)]
        payoff: String,
        /// Strike for call/put payoffs
        #[arg(long, default_value_t = 0.0)]
        strike: f64,
        /// Output path for the per-node CSV
        #[arg(long)]
        out: PathBuf,
        /// Largest acceptable replication error
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Expand a random variable over the orthonormal product basis.
    Decompose {
        /// Space JSON: {"N": int, "p": [..]}
        #[arg(long)]
        space: PathBuf,
        /// JSON array of 2^(N+1) values indexed by outcome
        #[arg(long)]
        rv: PathBuf,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the reconstructed value table instead of coefficients
        #[arg(long, default_value_t = false)]
        reconstruct: bool,
    },
    /// Run identity and inequality checks and emit a JSON report.
    Audit {
        #[arg(long)]
        space: PathBuf,
        /// One or more value-table files
        #[arg(long, required = true)]
        rv: Vec<PathBuf>,
        /// Suites to run (default: all of clark, adjoint, isometry,
        /// semigroup, covariance, lsi, deviation, sandwich)
        #[arg(long)]
        suite: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Entropy and its upper bounds on a grid of success probabilities.
    Figure1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    /// Bad input: exit code 2.
    Input(String),
    /// A contract the output must satisfy was violated: exit code 3.
    Contract(String),
}

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// 17 significant digits, locale-independent.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| input_err(format!("cannot parse {what} {}: {e}", path.display())))
}

fn load_space(path: &Path) -> Result<Arc<BernoulliSpace>, CliError> {
    let spec: SpaceSpec = read_json(path, "space file")?;
    new_space(spec.horizon, &spec.p).map_err(|e| input_err(format!("invalid space: {e}")))
}

fn load_rv(space: &Arc<BernoulliSpace>, path: &Path) -> Result<RandomVariable, CliError> {
    let values: Vec<f64> = read_json(path, "value table")?;
    RandomVariable::from_values(space, values)
        .map_err(|e| input_err(format!("invalid value table {}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| input_err(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_hedge(
    model_path: &Path,
    payoff: &str,
    strike: f64,
    out: &Path,
    tolerance: f64,
) -> Result<(), CliError> {
    let spec: ModelSpec = read_json(model_path, "model file")?;
    let model = build_model(&spec).map_err(|e| input_err(format!("invalid model: {e}")))?;
    let kind = match payoff {
        "call" => PayoffKind::Call,
        "put" => PayoffKind::Put,
        path => {
            let values: Vec<f64> = read_json(Path::new(path), "payoff file")?;
            PayoffKind::Custom(values)
        }
    };
    let claim = payoff_builder(&model, &kind, strike)
        .map_err(|e| input_err(format!("invalid payoff: {e}")))?;
    let strategy = hedge(&model, &claim).map_err(|e| input_err(format!("hedging failed: {e}")))?;
    let price = price_claim(&model, &claim).map_err(|e| input_err(format!("{e}")))?;

    let mut csv = String::from("n,prefix,S,V,eta,zeta\n");
    let n = model.horizon();
    for t in 0..=n {
        let s_t = bernoulli_calculus::finance::stock_price(&model, t as i32)
            .map_err(|e| input_err(format!("{e}")))?;
        for node in 0..(1usize << (t + 1)) {
            let w = OutcomeIndex(node);
            let prefix: String = (0..=t).map(|k| if w.z(k) == 1 { '+' } else { '-' }).collect();
            let _ = writeln!(
                csv,
                "{t},{prefix},{},{},{},{}",
                fmt(s_t.value(w)),
                fmt(strategy.value[t + 1].value(w)),
                fmt(strategy.eta.entry(t).value(w)),
                fmt(strategy.zeta.entry(t).value(w)),
            );
        }
    }
    fs::write(out, &csv).map_err(|e| input_err(format!("cannot write {}: {e}", out.display())))?;

    let replication_error = strategy.value[n + 1]
        .sub(&claim)
        .map_err(|e| input_err(format!("{e}")))?
        .norm_inf();
    let self_financing_error = strategy
        .self_financing_residual(&model)
        .map_err(|e| input_err(format!("{e}")))?;
    println!(
        "{{\"price\": {}, \"replication_error\": {}, \"self_financing_error\": {}}}",
        fmt(price),
        fmt(replication_error),
        fmt(self_financing_error),
    );
    if replication_error > tolerance || self_financing_error > tolerance {
        return Err(CliError::Contract(format!(
            "replication error {replication_error:e} or self-financing error {self_financing_error:e} above tolerance {tolerance:e}"
        )));
    }
    let _ = &model as &CrrModel;
    Ok(())
}

fn run_decompose(
    space_path: &Path,
    rv_path: &Path,
    out: Option<&Path>,
    reconstruct: bool,
) -> Result<(), CliError> {
    let space = load_space(space_path)?;
    let f = load_rv(&space, rv_path)?;
    let expansion = walsh_decompose(&f);
    let text = if reconstruct {
        let back = walsh_reconstruct(&expansion);
        let mut text = String::from("[");
        for (i, v) in back.values().iter().enumerate() {
            if i > 0 {
                text.push_str(", ");
            }
            text.push_str(&fmt(*v));
        }
        text.push_str("]\n");
        text
    } else {
        let mut text = String::from("{\"coeffs\": [");
        for (i, (subset, value)) in expansion.sorted_entries().iter().enumerate() {
            if i > 0 {
                text.push_str(", ");
            }
            let subset_text = subset
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            let _ = write!(text, "{{\"subset\": [{subset_text}], \"value\": {}}}", fmt(*value));
        }
        text.push_str("]}\n");
        text
    };
    write_out(out, &text)
}

struct AuditCheck {
    name: String,
    lhs: Option<f64>,
    rhs: Option<f64>,
    residual: Option<f64>,
    pass: bool,
    error: Option<String>,
}

fn check(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> AuditCheck {
    let residual = lhs - rhs;
    AuditCheck {
        name: name.into(),
        lhs: Some(lhs),
        rhs: Some(rhs),
        residual: Some(residual),
        pass: residual.abs() <= tolerance,
        error: None,
    }
}

/// One-sided check: passes when `lhs <= rhs + tolerance`; the recorded
/// residual is the violation (0 when satisfied).
fn check_le(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> AuditCheck {
    let violation = (lhs - rhs).max(0.0);
    AuditCheck {
        name: name.into(),
        lhs: Some(lhs),
        rhs: Some(rhs),
        residual: Some(violation),
        pass: violation <= tolerance,
        error: None,
    }
}

fn check_error(name: impl Into<String>, error: String) -> AuditCheck {
    AuditCheck {
        name: name.into(),
        lhs: None,
        rhs: None,
        residual: None,
        pass: false,
        error: Some(error),
    }
}

/// Deterministic companion process for the adjointness and isometry
/// suites: entry `k` is the value table of `F` rotated by `k + 1` slots.
fn companion_process(f: &RandomVariable) -> SkorohodProcess {
    let space = f.space();
    let dim = space.dim();
    let entries = (0..=space.horizon())
        .map(|k| {
            let values = (0..dim).map(|i| f.values()[(i + k + 1) % dim]).collect();
            RandomVariable::from_values(space, values).expect("same dimension")
        })
        .collect();
    SkorohodProcess::new(space, entries).expect("same space")
}

fn run_suite(
    suite: &str,
    label: &str,
    f: &RandomVariable,
    tolerance: f64,
) -> Vec<AuditCheck> {
    let space = f.space();
    let named = |s: &str| format!("{label}{s}");
    match suite {
        "clark" => {
            let residual = clark(f).reconstruct().sub(f).unwrap().norm_inf();
            vec![check(named("clark.reconstruction"), residual, 0.0, tolerance)]
        }
        "adjoint" => {
            let u = companion_process(f);
            let mut pairing = 0.0;
            for k in 0..=space.horizon() {
                pairing += gradient(f, k).unwrap().mul(u.entry(k)).unwrap().expectation();
            }
            let dual = f.mul(&divergence(&u).unwrap()).unwrap().expectation();
            vec![check(named("adjoint.pairing"), pairing, dual, tolerance)]
        }
        "isometry" => {
            let u = companion_process(f);
            let (lhs, rhs) = skorohod_isometry_sides(&u).unwrap();
            vec![check(named("isometry.skorohod"), lhs, rhs, tolerance)]
        }
        "semigroup" => [0.1, 1.0, 10.0]
            .iter()
            .map(|&t| {
                let gap = semigroup(f, t)
                    .unwrap()
                    .sub(&semigroup_kernel(f, t).unwrap())
                    .unwrap()
                    .norm_inf();
                check(named(&format!("semigroup.kernel_gap_t{t}")), gap, 0.0, tolerance)
            })
            .collect(),
        "covariance" => {
            let g = f.map(|v| v * v);
            let base = covariance_direct(f, &g).unwrap();
            let mut out = vec![
                check(named("covariance.clark"), covariance_clark(f, &g).unwrap(), base, tolerance),
                check(
                    named("covariance.semigroup"),
                    covariance_semigroup(f, &g).unwrap(),
                    base,
                    tolerance,
                ),
            ];
            for n in 0..=2 {
                out.push(check(
                    named(&format!("covariance.iterated_{n}")),
                    covariance_iterated(f, &g, n).unwrap(),
                    base,
                    tolerance,
                ));
            }
            out
        }
        "lsi" => match lsi_report(f) {
            Ok(r) => vec![
                check_le(named("lsi.entropy_le_modified"), r.entropy, r.rhs_modified, tolerance),
                check_le(named("lsi.entropy_le_l1"), r.entropy, r.rhs_l1, tolerance),
                check_le(named("lsi.entropy_le_optimal"), r.entropy, r.rhs_optimal, tolerance),
                check_le(named("lsi.entropy_le_sharp"), r.entropy, r.rhs_sharp, tolerance),
                check_le(named("lsi.sharp_le_optimal"), r.rhs_sharp, r.rhs_optimal, tolerance),
            ],
            Err(e) => vec![check_error(named("lsi.report"), e.to_string())],
        },
        "deviation" => {
            let mean = f.expectation();
            let top = f.values().iter().fold(0.0f64, |m, v| m.max(v - mean));
            let mut out = Vec::new();
            for i in 0..5 {
                let x = top * i as f64 / 4.0;
                let tail = exact_tail(f, x);
                match deviation_bound_poisson_type(f, x) {
                    Ok(b) => out.push(check_le(
                        named(&format!("deviation.poisson_type_{i}")),
                        tail,
                        b,
                        tolerance,
                    )),
                    Err(e) => out.push(check_error(
                        named(&format!("deviation.poisson_type_{i}")),
                        e.to_string(),
                    )),
                }
                match deviation_bound_gaussian(f, x) {
                    Ok(b) => out.push(check_le(
                        named(&format!("deviation.gaussian_{i}")),
                        tail,
                        b,
                        tolerance,
                    )),
                    Err(e) => out.push(check_error(
                        named(&format!("deviation.gaussian_{i}")),
                        e.to_string(),
                    )),
                }
            }
            out
        }
        "sandwich" => {
            let var = variance(f);
            let mut out = Vec::new();
            for n in 1..=2 {
                let (lo, hi) = variance_sandwich(f, n);
                out.push(check_le(named(&format!("sandwich.lower_{n}")), lo, var, tolerance));
                out.push(check_le(named(&format!("sandwich.upper_{n}")), var, hi, tolerance));
            }
            out
        }
        other => vec![check_error(
            format!("{label}{other}"),
            format!("unknown suite '{other}'"),
        )],
    }
}

fn run_audit(
    space_path: &Path,
    rv_paths: &[PathBuf],
    suites: &[String],
    out: Option<&Path>,
    tolerance: f64,
) -> Result<(), CliError> {
    let space = load_space(space_path)?;
    let selected: Vec<String> = if suites.is_empty() {
        ALL_SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        for s in suites {
            if !ALL_SUITES.contains(&s.as_str()) {
                return Err(input_err(format!(
                    "unknown suite '{s}'; expected one of {}",
                    ALL_SUITES.join(", ")
                )));
            }
        }
        suites.to_vec()
    };
    let mut checks = Vec::new();
    for (idx, rv_path) in rv_paths.iter().enumerate() {
        let f = load_rv(&space, rv_path)?;
        let label = if rv_paths.len() > 1 {
            format!("rv{idx}.")
        } else {
            String::new()
        };
        for suite in &selected {
            checks.extend(run_suite(suite, &label, &f, tolerance));
        }
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    let failed = checks.len() - passed;
    let mut text = String::from("{\"checks\": [");
    for (i, c) in checks.iter().enumerate() {
        if i > 0 {
            text.push_str(", ");
        }
        let opt = |v: Option<f64>| v.map(fmt).unwrap_or_else(|| "null".to_string());
        let _ = write!(
            text,
            "{{\"name\": {:?}, \"lhs\": {}, \"rhs\": {}, \"residual\": {}, \"tolerance\": {}, \"pass\": {}",
            c.name,
            opt(c.lhs),
            opt(c.rhs),
            opt(c.residual),
            fmt(tolerance),
            c.pass,
        );
        if let Some(e) = &c.error {
            let _ = write!(text, ", \"error\": {e:?}");
        }
        text.push('}');
    }
    let _ = write!(
        text,
        "], \"summary\": {{\"passed\": {passed}, \"failed\": {failed}}}}}\n"
    );
    write_out(out, &text)?;
    if failed > 0 {
        return Err(CliError::Contract(format!("{failed} audit check(s) failed")));
    }
    Ok(())
}

fn run_figure1(out: Option<&Path>) -> Result<(), CliError> {
    let mut csv = String::from("p,entropy,rhs_modified,rhs_l1,rhs_optimal,rhs_sharp\n");
    let mut violation = None;
    for i in 1..=99 {
        let p = i as f64 / 100.0;
        let space = new_space(0, &[p]).map_err(|e| input_err(format!("{e}")))?;
        let f = RandomVariable::from_fn(&space, |w| if w.z(0) == 1 { 1.0 } else { 3.5 });
        let r = lsi_report(&f).map_err(|e| input_err(format!("{e}")))?;
        let _ = writeln!(
            csv,
            "{p:.2},{},{},{},{},{}",
            fmt(r.entropy),
            fmt(r.rhs_modified),
            fmt(r.rhs_l1),
            fmt(r.rhs_optimal),
            fmt(r.rhs_sharp),
        );
        let slack = 1e-12;
        if !(r.entropy <= r.rhs_sharp + slack
            && r.rhs_sharp <= r.rhs_optimal + slack
            && r.entropy <= r.rhs_l1 + slack
            && r.entropy <= r.rhs_modified + slack)
        {
            violation = Some(p);
        }
    }
    write_out(out, &csv)?;
    if let Some(p) = violation {
        return Err(CliError::Contract(format!(
            "bound ordering violated at p = {p:.2}"
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Hedge {
            model,
            payoff,
            strike,
            out,
            tolerance,
        } => run_hedge(&model, &payoff, strike, &out, tolerance),
        Command::Decompose {
            space,
            rv,
            out,
            reconstruct,
        } => run_decompose(&space, &rv, out.as_deref(), reconstruct),
        Command::Audit {
            space,
            rv,
            suite,
            out,
            tolerance,
        } => run_audit(&space, &rv, &suite, out.as_deref(), tolerance),
        Command::Figure1 { out } => run_figure1(out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Contract(msg)) => {
            eprintln!("contract violation: {msg}");
            ExitCode::from(3)
        }
    }
}
