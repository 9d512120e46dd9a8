use clap::{Args, Subcommand};
use serde_json::Value;

use rellich_core::combinatorics::{exact_series_coefficient, positivity_check, verify_identity};
use rellich_core::factorization::{identity_trials, zeta_one, RellichRemainder};
use rellich_core::optimality::{distance_sweep, sweep, ExperimentConfig, ExperimentKind, DEFAULT_EPSILON, DEFAULT_HEAD_END};
use rellich_core::spectral::{
    best_constant_sweep, conjecture_evidence, hardy_sanity_sweep, rellich_sanity_sweep, SolverOptions,
    TruncationSweep, DEFAULT_TOL,
};
use rellich_core::weights::{leading_constant, series_partial_sum, WeightSpec};
use rellich_core::{LabError, Precision};

use crate::report::{int, num, Row, RunReport};
use crate::{Context, Failure};

type Outcome = Result<RunReport, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn list_value<T: Copy + Into<u64>>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(|x| int(*x)).collect())
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long)]
    order: usize,
    #[arg(long)]
    from: usize,
    #[arg(long)]
    to: usize,
    /// Also evaluate the truncated expansion with this many terms.
    #[arg(long)]
    series_terms: Option<usize>,
}

pub fn weights(a: &WeightsArgs, ctx: &Context) -> Outcome {
    if a.from > a.to {
        return Err(usage("--from must not exceed --to"));
    }
    let precision = ctx.precision_or(Precision::Binary64);
    let weight = WeightSpec::new(a.order, precision)?;
    let lead = leading_constant(a.order)?;
    let mut rep = RunReport::new("weights", precision.as_str(), ctx.seed);
    rep.param("order", int(a.order as u64));
    rep.param("from", int(a.from as u64));
    rep.param("to", int(a.to as u64));
    if let Some(t) = a.series_terms {
        rep.param("series_terms", int(t as u64));
    }
    let mut all_above = true;
    for n in a.from..=a.to {
        let rho = weight.rho(n)?;
        let bound = lead / (n as f64).powi(2 * a.order as i32);
        let ratio = rho / bound;
        all_above &= ratio > 1.0;
        let mut row = Row::new()
            .with("n", int(n as u64))
            .with("rho", num(rho))
            .with("leading_term", num(bound))
            .with("ratio", num(ratio));
        if let Some(t) = a.series_terms {
            row = row.with("series", num(series_partial_sum(a.order, n, t)?));
        }
        rep.results.push(row);
    }
    rep.check("strict_lower_bound", all_above, format!("rho_n > {lead} / n^{}", 2 * a.order));
    Ok(rep)
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[arg(long)]
    n_max: usize,
    /// Absolute tolerance for the equation residuals.
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
}

pub fn factorize(a: &FactorizeArgs, ctx: &Context) -> Outcome {
    if a.n_max < 2 {
        return Err(usage("--n-max must be at least 2"));
    }
    let precision = ctx.precision_or(Precision::Extended);
    let rc = match RellichRemainder::rellich_coeffs_with(a.n_max, precision) {
        Err(LabError::BoundViolation { index }) => {
            return Err(Failure::Check(format!("sandwich bound violated at n = {index}")))
        }
        other => other?,
    };
    let mut rep = RunReport::new("factorize", precision.as_str(), ctx.seed);
    rep.param("n_max", int(a.n_max as u64));
    rep.param("tol", num(a.tol));
    let mut worst = [(0.0f64, 0usize); 3];
    for n in 1..=a.n_max {
        let x = n as f64;
        let eps = rc.eps_values()[n];
        let lower = eps - (1.5 * (2.0 / x).ln_1p()).exp_m1();
        let upper = (1.5 * (3.0 / x).ln_1p()).exp_m1() - eps;
        let mut row = Row::new()
            .with("n", int(n as u64))
            .with("zeta", num(rc.zeta_values()[n]))
            .with("c", num(rc.c_values()[n]))
            .with("b", num(rc.b_values()[n]))
            .with("lower_margin", num(lower))
            .with("upper_margin", num(upper));
        if n >= 2 {
            let r = rc.residuals(n)?;
            for (slot, v) in worst.iter_mut().zip([r.set1, r.set2, r.set3]) {
                if v.abs() > slot.0 {
                    *slot = (v.abs(), n);
                }
            }
            row = row.with("set1", num(r.set1)).with("set2", num(r.set2)).with("set3", num(r.set3));
        } else {
            row = row.with("set1", Value::Null).with("set2", Value::Null).with("set3", Value::Null);
        }
        rep.results.push(row);
    }
    let sandwich = rc.bounds_ok().iter().skip(1).all(|b| *b);
    rep.check("sandwich", sandwich, format!("(1+2/n)^(3/2) < zeta_n < (1+3/n)^(3/2) for n <= {}", a.n_max));
    for (name, (v, n)) in ["set1", "set2", "set3"].iter().zip(worst) {
        rep.check(format!("{name}_residual"), v <= a.tol, format!("max {v:.3e} at n = {n}"));
    }
    Ok(rep)
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Random checks of the factorization identity of order 1 or 2.
    Identity(IdentityArgs),
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=2))]
    order: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 512)]
    support: usize,
    /// Largest accepted relative residual; 1e-12 for order 1 and 1e-10 for order 2 by default.
    #[arg(long)]
    tol: Option<f64>,
}

pub fn verify(c: &VerifyCommand, ctx: &Context) -> Outcome {
    let VerifyCommand::Identity(a) = c;
    if a.trials == 0 || a.support == 0 {
        return Err(usage("--trials and --support must be at least 1"));
    }
    let k = a.order as usize;
    let tol = a.tol.unwrap_or(if k == 1 { 1e-12 } else { 1e-10 });
    let t = identity_trials(k, a.trials, a.support, ctx.seed)?;
    let mut rep = RunReport::new("verify identity", Precision::Binary64.as_str(), ctx.seed);
    rep.param("order", int(a.order));
    rep.param("trials", int(a.trials as u64));
    rep.param("support", int(a.support as u64));
    rep.param("tol", num(tol));
    rep.results.push(
        Row::new()
            .with("order", int(a.order))
            .with("trials", int(t.trials as u64))
            .with("max_relative_residual", num(t.max_relative_residual))
            .with("worst_trial", int(t.worst_trial as u64)),
    );
    rep.check(
        "identity_residual",
        t.max_relative_residual <= tol,
        format!("max {:.3e} at trial {} (seed {})", t.max_relative_residual, t.worst_trial, ctx.seed),
    );
    Ok(rep)
}

#[derive(Debug, Subcommand)]
pub enum OptimalityCommand {
    /// Order-one cut-off near the origin; remainder against 4/log N.
    HardyCritical(SweepArgs),
    /// Order-one cut-off near infinity.
    HardyInfinity(SweepArgs),
    /// Order-two smooth window near infinity.
    RellichInfinity(SweepArgs),
    /// Order-two remainder of the tail cut-off.
    Distance(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "N-list", alias = "n-list", value_delimiter = ',', required = true)]
    n_list: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// First index handled by quadrature instead of exact summation.
    #[arg(long, default_value_t = DEFAULT_HEAD_END)]
    head_end: u64,
}

impl SweepArgs {
    fn sorted(&self) -> Result<Vec<u64>, Failure> {
        let mut ns = self.n_list.clone();
        ns.sort_unstable();
        ns.dedup();
        if ns.first().is_some_and(|n| *n < 2) {
            return Err(usage("every N must be at least 2"));
        }
        Ok(ns)
    }
}

fn decreasing(xs: &[f64], strict: bool) -> bool {
    xs.windows(2).all(|p| if strict { p[1] < p[0] } else { p[1] <= p[0] })
}

pub fn optimality(c: &OptimalityCommand, ctx: &Context) -> Outcome {
    let (name, a, kind) = match c {
        OptimalityCommand::HardyCritical(a) => ("hardy-critical", a, Some(ExperimentKind::HardyCritical)),
        OptimalityCommand::HardyInfinity(a) => ("hardy-infinity", a, Some(ExperimentKind::HardyInfinity)),
        OptimalityCommand::RellichInfinity(a) => ("rellich-infinity", a, Some(ExperimentKind::RellichInfinity)),
        OptimalityCommand::Distance(a) => ("distance", a, None),
    };
    let ns = a.sorted()?;
    let config = ExperimentConfig { epsilon: a.epsilon, head_end: a.head_end };
    let mut rep = RunReport::new(&format!("optimality {name}"), Precision::Binary64.as_str(), ctx.seed);
    rep.param("N_list", list_value(&ns));
    rep.param("epsilon", num(a.epsilon));
    rep.param("head_end", int(a.head_end));
    match kind {
        Some(kind) => experiment_checks(&mut rep, kind, &ns, &config)?,
        None => distance_checks(&mut rep, &ns, &config)?,
    }
    Ok(rep)
}

fn experiment_checks(rep: &mut RunReport, kind: ExperimentKind, ns: &[u64], config: &ExperimentConfig) -> Result<(), Failure> {
    let r = sweep(kind, ns, config)?;
    for e in &r.entries {
        rep.results.push(
            Row::new()
                .with("N", int(e.n))
                .with("remainder_norm2", num(e.remainder_norm2))
                .with("weighted_norm2", num(e.weighted_norm2))
                .with("ratio", num(e.ratio))
                .with("ratio_log_n", num(e.ratio * (e.n as f64).ln()))
                .with("rayleigh_quotient", num(e.rayleigh_quotient)),
        );
    }
    rep.param("log_slope", r.log_slope.map_or(Value::Null, num));
    let ln2 = std::f64::consts::LN_2;
    match kind {
        ExperimentKind::HardyCritical => {
            let worst = r.entries.iter().map(|e| e.remainder_norm2 * (e.n as f64).ln()).fold(0.0, f64::max);
            rep.check("remainder_below_4_over_log_n", worst <= 4.0, format!("max remainder * log N = {worst:.6}"));
            let rem: Vec<f64> = r.entries.iter().map(|e| e.remainder_norm2).collect();
            rep.check("remainder_decreasing", decreasing(&rem, true), "strict in N");
        }
        ExperimentKind::HardyInfinity | ExperimentKind::RellichInfinity => {
            let (c, label) = if kind == ExperimentKind::HardyInfinity { (0.25, "1/4") } else { (9.0 / 16.0, "9/16") };
            let floor = c * ln2;
            let min_w = r.entries.iter().map(|e| e.weighted_norm2).fold(f64::INFINITY, f64::min);
            rep.check("weighted_exceeds_log2_bound", min_w > floor, format!("min {min_w:.6} vs {label} log 2 = {floor:.6}"));
            if kind == ExperimentKind::RellichInfinity {
                let ratios: Vec<f64> = r.entries.iter().map(|e| e.ratio).collect();
                rep.check("ratio_strictly_decreasing", decreasing(&ratios, true), "in N");
                let scaled: Vec<f64> = r.entries.iter().map(|e| e.ratio * (e.n as f64).ln()).collect();
                let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
                let spread = hi / lo - 1.0;
                rep.check("ratio_log_n_spread", spread <= 0.2, format!("max/min - 1 = {spread:.4}"));
                if let Some(e) = r.entries.iter().find(|e| e.n == 1024) {
                    rep.check(
                        "rayleigh_quotient_at_1024",
                        e.rayleigh_quotient < 1.2,
                        format!("{:.6}", e.rayleigh_quotient),
                    );
                }
            }
        }
    }
    Ok(())
}

fn distance_checks(rep: &mut RunReport, ns: &[u64], config: &ExperimentConfig) -> Result<(), Failure> {
    let entries = distance_sweep(ns, config)?;
    let z1 = zeta_one();
    let c1 = z1.sqrt();
    for e in &entries {
        rep.results.push(
            Row::new()
                .with("N", int(e.n))
                .with("value", num(e.value))
                .with("first_entry", num(e.first_entry))
                .with("excess", num(e.excess))
                .with("relative_excess", num(e.excess / z1)),
        );
    }
    rep.param("limit", num(z1));
    let first = entries.iter().map(|e| (e.first_entry + c1).abs()).fold(0.0, f64::max);
    rep.check("first_entry_is_minus_c1", first <= 1e-12, format!("max deviation {first:.3e}"));
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    rep.check("monotone", decreasing(&values, false), "nonincreasing in N");
    if let Some(last) = entries.last().filter(|e| e.n >= 4096) {
        let rel = (last.excess / z1).abs();
        rep.check("within_10_percent", rel <= 0.1, format!("relative excess {rel:.4} at N = {}", last.n));
    }
    Ok(())
}

#[derive(Debug, Subcommand)]
pub enum CombinatoricsCommand {
    /// Exact comparison of the three expressions on a grid.
    Identity(CombIdentityArgs),
    /// Exact expansion coefficients of the weight of order k.
    Series(SeriesArgs),
}

#[derive(Debug, Args)]
pub struct CombIdentityArgs {
    #[arg(long, default_value_t = 12)]
    s_max: usize,
    #[arg(long, default_value_t = 12)]
    k_max: usize,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long)]
    order: usize,
    /// Number of coefficients, starting from index `order`.
    #[arg(long, default_value_t = 20)]
    terms: usize,
}

pub fn combinatorics(c: &CombinatoricsCommand, ctx: &Context) -> Outcome {
    match c {
        CombinatoricsCommand::Identity(a) => {
            let r = verify_identity(a.s_max, a.k_max);
            let mut rep = RunReport::new("combinatorics identity", "exact", ctx.seed);
            rep.param("s_max", int(a.s_max as u64));
            rep.param("k_max", int(a.k_max as u64));
            for row in &r.rows {
                rep.results.push(
                    Row::new()
                        .with("s", int(row.s as u64))
                        .with("k", int(row.k as u64))
                        .with("a", Value::String(row.a.to_string()))
                        .with("b", Value::String(row.b.to_string()))
                        .with("c", Value::String(row.c.to_string()))
                        .with("equal", Value::Bool(row.equal())),
                );
            }
            let detail = match r.first_failure {
                Some((s, k)) => format!("first mismatch at s = {s}, k = {k}"),
                None => format!("{} cells", r.rows.len()),
            };
            rep.check("all_equal", r.all_equal, detail);
            Ok(rep)
        }
        CombinatoricsCommand::Series(a) => {
            if a.order == 0 || a.terms == 0 {
                return Err(usage("--order and --terms must be at least 1"));
            }
            let mut rep = RunReport::new("combinatorics series", "exact", ctx.seed);
            rep.param("order", int(a.order as u64));
            rep.param("terms", int(a.terms as u64));
            for l in a.order..a.order + a.terms {
                let coef = exact_series_coefficient(a.order, l)?;
                rep.results.push(
                    Row::new()
                        .with("l", int(l as u64))
                        .with("coefficient", Value::String(coef.to_string()))
                        .with("value", num(coef.to_f64())),
                );
            }
            let last = a.order + a.terms - 1;
            let positive = positivity_check(a.order, last)?;
            rep.check("coefficients_positive", positive, format!("indices {}..={last}", a.order));
            Ok(rep)
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum SpectralCommand {
    /// Dirichlet order-one matrix against its weight.
    Hardy(SpectralArgs),
    /// Dirichlet order-two matrix against its weight.
    Rellich(SpectralArgs),
    /// Full-space order-two matrix against 1/n^4.
    BestConstant(SpectralArgs),
    /// Smallest eigenvalue of the order-k matrix minus its weight, k >= 3.
    Conjecture(ConjectureArgs),
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
pub struct ConjectureArgs {
    #[arg(long)]
    order: usize,
    #[command(flatten)]
    sweep: SpectralArgs,
    /// Accept eigenvalues down to `-evidence_tol * ‖A‖`.
    #[arg(long, default_value_t = 1e-9)]
    evidence_tol: f64,
}

fn push_sweep(rep: &mut RunReport, s: &TruncationSweep) {
    for e in &s.estimates {
        rep.results.push(
            Row::new()
                .with("size", int(e.size as u64))
                .with("lambda_min", num(e.lambda_min))
                .with("residual", num(e.residual))
                .with("iterations", int(e.iterations as u64))
                .with("converged", Value::Bool(e.converged)),
        );
    }
    rep.param("extrapolation", s.extrapolation.map_or(Value::Null, num));
    rep.check("monotone_nonincreasing", s.monotone_nonincreasing, "min-max under nested truncation");
    rep.check("converged", s.all_converged(), "residual within tolerance");
}

pub fn spectral(c: &SpectralCommand, ctx: &Context) -> Outcome {
    let args = match c {
        SpectralCommand::Hardy(a) | SpectralCommand::Rellich(a) | SpectralCommand::BestConstant(a) => a,
        SpectralCommand::Conjecture(a) => &a.sweep,
    };
    let precision = ctx.precision_or(Precision::Extended);
    let opts = SolverOptions { tol: args.tol, precision };
    let mut sizes = args.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let name = match c {
        SpectralCommand::Hardy(_) => "hardy",
        SpectralCommand::Rellich(_) => "rellich",
        SpectralCommand::BestConstant(_) => "best-constant",
        SpectralCommand::Conjecture(_) => "conjecture",
    };
    let mut rep = RunReport::new(&format!("spectral {name}"), precision.as_str(), ctx.seed);
    rep.param("sizes", list_value(&sizes.iter().map(|s| *s as u64).collect::<Vec<_>>()));
    rep.param("tol", num(args.tol));
    match c {
        SpectralCommand::Hardy(_) | SpectralCommand::Rellich(_) => {
            let hardy = matches!(c, SpectralCommand::Hardy(_));
            let s = if hardy { hardy_sanity_sweep(&sizes, &opts)? } else { rellich_sanity_sweep(&sizes, &opts)? };
            push_sweep(&mut rep, &s);
            let min = s.min_lambda();
            rep.check("at_least_one", min >= 1.0 - 1e-8, format!("min {min:.12}"));
            if hardy {
                if let Some(e) = s.estimates.last().filter(|e| e.size >= 2048) {
                    rep.check("at_most_1_5", e.lambda_min <= 1.5, format!("{:.12} at size {}", e.lambda_min, e.size));
                }
            }
        }
        SpectralCommand::BestConstant(_) => {
            let s = best_constant_sweep(&sizes, &opts)?;
            push_sweep(&mut rep, &s);
        }
        SpectralCommand::Conjecture(a) => {
            rep.param("order", int(a.order as u64));
            rep.param("evidence_tol", num(a.evidence_tol));
            let ev = conjecture_evidence(a.order, &sizes, &opts, a.evidence_tol)?;
            push_sweep(&mut rep, &ev.sweep);
            for (row, (nrm, pd)) in rep.results.iter_mut().zip(ev.norms.iter().zip(&ev.positive_definite)) {
                row.0.insert("norm_inf".into(), num(*nrm));
                row.0.insert("positive_definite".into(), Value::Bool(*pd));
            }
            rep.check("evidence", ev.evidence, "lambda_min >= -tol * ||A|| at every size");
            rep.check("no_negative_pivot", ev.positive_definite.iter().all(|p| *p), "inertia at shift zero");
        }
    }
    Ok(rep)
}
