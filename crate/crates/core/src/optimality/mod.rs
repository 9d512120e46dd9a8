//! Cut-off experiments: how close `ρ^(k)` comes to being sharp.
//!
//! For `u = g^(k) ξ` with a cut-off `ξ` the Rayleigh quotient is
//! `1 + ‖R_k u‖^2 / Σ ρ^(k) u^2`, so each experiment reports the two sums and
//! their ratio. The sums run to `2N^3`; below `head_end` every term is
//! evaluated, above it the smooth stretches are summed by Euler-Maclaurin
//! with the asymptotic expansion of `ζ`.

mod cutoff;
mod summation;

pub use cutoff::{build_cutoff, mollifier, mollifier_derivative_bounds, CutoffKind, CutoffProfile, Piece, Shape, DEFAULT_EPSILON};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, LabError, Result};
use crate::factorization::{entry_scaled_from, pow32_minus_one, r1_entry_scaled, zeta_one, EpsilonStream, ZetaSeries};
use crate::numeric::NeumaierSum;
use crate::weights::SeriesWeight;
use summation::SegmentSummer;

/// `C` in `|ξ_n - 2ξ_{n+1} + ξ_{n+2}| <= C / (n^2 log N)` for the smooth
/// window with the default mollifier and `N >= 8`. The measured supremum is
/// 5.53 at `N = 8` and decreases with `N` (7.48 at `N = 4`).
pub const SECOND_DIFFERENCE_C: f64 = 6.0;

pub const DEFAULT_HEAD_END: u64 = 1 << 20;
const MIN_HEAD_END: u64 = 1000;
const SERIES_TERMS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    HardyCritical,
    HardyInfinity,
    RellichInfinity,
}

impl ExperimentKind {
    pub fn order(self) -> usize {
        match self {
            ExperimentKind::HardyCritical | ExperimentKind::HardyInfinity => 1,
            ExperimentKind::RellichInfinity => 2,
        }
    }

    pub fn cutoff(self) -> CutoffKind {
        match self {
            ExperimentKind::HardyCritical => CutoffKind::HardyCritical,
            ExperimentKind::HardyInfinity => CutoffKind::HardyInfinity,
            ExperimentKind::RellichInfinity => CutoffKind::SmoothWindow,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::HardyCritical => "hardy_critical",
            ExperimentKind::HardyInfinity => "hardy_infinity",
            ExperimentKind::RellichInfinity => "rellich_infinity",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hardy_critical" => Ok(ExperimentKind::HardyCritical),
            "hardy_infinity" => Ok(ExperimentKind::HardyInfinity),
            "rellich_infinity" => Ok(ExperimentKind::RellichInfinity),
            other => Err(invalid("kind", format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub epsilon: f64,
    /// First index summed by quadrature instead of term by term.
    pub head_end: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { epsilon: DEFAULT_EPSILON, head_end: DEFAULT_HEAD_END }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentEntry {
    pub kind: ExperimentKind,
    pub n: u64,
    pub remainder_norm2: f64,
    pub weighted_norm2: f64,
    pub ratio: f64,
    /// `1 + ratio`, the Rayleigh quotient of the test sequence.
    pub rayleigh_quotient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub entries: Vec<ExperimentEntry>,
    /// Least-squares slope of `log ratio` against `log log N`; diagnostic only.
    pub log_slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEntry {
    pub n: u64,
    /// `‖R_2 u‖^2` for the tail cut-off.
    pub value: f64,
    /// `(R_2 u)_1`.
    pub first_entry: f64,
    /// `value - ζ_1`.
    pub excess: f64,
}

struct Sums {
    remainder: f64,
    weighted: f64,
    first_entry: f64,
}

/// Checks that `g^(k) ξ` vanishes on `0..k` and has finite support.
pub fn verify_support(profile: &CutoffProfile, k: usize) -> Result<()> {
    for n in 1..k {
        if profile.value_at(n as u64) != 0.0 {
            return Err(LabError::BoundaryOrder { found: n, required: k });
        }
    }
    if !profile.support_end().is_finite() {
        return Err(invalid("profile", "support is not finite"));
    }
    Ok(())
}

fn check_config(config: &ExperimentConfig) -> Result<()> {
    if config.head_end < MIN_HEAD_END {
        return Err(invalid("head_end", format!("must be at least {MIN_HEAD_END}")));
    }
    Ok(())
}

fn run(profile: &CutoffProfile, k: usize, config: &ExperimentConfig) -> Result<Sums> {
    verify_support(profile, k)?;
    check_config(config)?;
    let rho = SeriesWeight::new(k)?;
    let last = profile.support_end().floor() as u64;
    let head_last = last.min(config.head_end - 1);
    let power = 2 * k as i32 - 1;

    let mut rem = NeumaierSum::default();
    let mut wsum = NeumaierSum::default();
    let mut first_entry = 0.0;
    let mut eps_stream = EpsilonStream::new();
    for n in 1..=head_last {
        let x = n as f64;
        let xi = profile.value(x);
        let entry = if k == 1 {
            r1_entry_scaled(x, profile.d1(x))
        } else {
            let (_, eps) = eps_stream.next().expect("stream is infinite");
            let gap = eps - pow32_minus_one(2.0 / x);
            entry_scaled_from(x, gap, (1.0 + eps).sqrt(), profile.d1(x), profile.d2(x))
        };
        if n == 1 {
            first_entry = entry;
        }
        rem.add(entry * entry);
        if n as usize >= k && xi != 0.0 {
            wsum.add(rho.at_index(n as usize)? * x.powi(power) * xi * xi);
        }
    }

    if last >= config.head_end {
        let summer = SegmentSummer::new();
        let kinks = profile.kinks();
        let rem_cuts: Vec<f64> = kinks.iter().flat_map(|b| (0..=k).map(move |w| b - w as f64)).collect();
        let series = ZetaSeries::new(SERIES_TERMS)?;
        let lo = config.head_end;
        let tail_rem = summer.sum(lo, last, &rem_cuts, |x| {
            let e = if k == 1 {
                r1_entry_scaled(x, profile.d1(x))
            } else {
                let c = (1.0 + series.epsilon(x)).sqrt();
                entry_scaled_from(x, series.lower_gap(x), c, profile.d1(x), profile.d2(x))
            };
            e * e
        });
        let tail_w = summer.sum(lo, last, &kinks, |x| {
            let xi = profile.value(x);
            rho.at(x) * x.powi(power) * xi * xi
        });
        rem.add(tail_rem);
        wsum.add(tail_w);
    }
    Ok(Sums { remainder: rem.total(), weighted: wsum.total(), first_entry })
}

pub fn experiment(kind: ExperimentKind, n: u64) -> Result<ExperimentEntry> {
    experiment_with(kind, n, &ExperimentConfig::default())
}

pub fn experiment_with(kind: ExperimentKind, n: u64, config: &ExperimentConfig) -> Result<ExperimentEntry> {
    let profile = build_cutoff(kind.cutoff(), n, config.epsilon)?;
    let s = run(&profile, kind.order(), config)?;
    if s.weighted <= 0.0 {
        return Err(LabError::ZeroDenominator);
    }
    let ratio = s.remainder / s.weighted;
    Ok(ExperimentEntry {
        kind,
        n,
        remainder_norm2: s.remainder,
        weighted_norm2: s.weighted,
        ratio,
        rayleigh_quotient: 1.0 + ratio,
    })
}

/// Runs the experiment at every `N` in parallel.
pub fn sweep(kind: ExperimentKind, ns: &[u64], config: &ExperimentConfig) -> Result<ExperimentReport> {
    let entries: Vec<ExperimentEntry> =
        ns.par_iter().map(|&n| experiment_with(kind, n, config)).collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = entries
        .iter()
        .filter(|e| e.n >= 3 && e.ratio > 0.0)
        .map(|e| ((e.n as f64).ln().ln(), e.ratio.ln()))
        .collect();
    Ok(ExperimentReport { kind, log_slope: log_slope(&points), entries })
}

/// Least-squares slope through `(x, y)` points; `None` for fewer than two
/// distinct abscissae.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn distance_experiment(n: u64) -> Result<DistanceEntry> {
    distance_experiment_with(n, &ExperimentConfig::default())
}

pub fn distance_experiment_with(n: u64, config: &ExperimentConfig) -> Result<DistanceEntry> {
    let profile = build_cutoff(CutoffKind::SmoothTail, n, config.epsilon)?;
    let s = run(&profile, 2, config)?;
    Ok(DistanceEntry { n, value: s.remainder, first_entry: s.first_entry, excess: s.remainder - zeta_one() })
}

pub fn distance_sweep(ns: &[u64], config: &ExperimentConfig) -> Result<Vec<DistanceEntry>> {
    ns.par_iter().map(|&n| distance_experiment_with(n, config)).collect()
}

/// Measured `sup |ξ_n - 2ξ_{n+1} + ξ_{n+2}| n^2 log N` for the smooth window,
/// scanning every `n` of the support.
pub fn second_difference_constant(n: u64, epsilon: f64) -> Result<f64> {
    let profile = build_cutoff(CutoffKind::SmoothWindow, n, epsilon)?;
    Ok(profile.second_difference_scaled_max(1, profile.support_end() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{rayleigh_quotient, FiniteSequence};
    use crate::precision::Precision;
    use crate::weights::{ground_state, WeightSpec};

    fn direct(kind: ExperimentKind, n: u64) -> f64 {
        let profile = build_cutoff(kind.cutoff(), n, DEFAULT_EPSILON).unwrap();
        let k = kind.order();
        let len = profile.support_end() as usize + 3;
        let u = FiniteSequence::from_fn(len, k, |m| ground_state(k, m) * profile.value_at(m as u64));
        let w = WeightSpec::new(k, Precision::Binary64).unwrap();
        rayleigh_quotient(&u, k, &w).unwrap()
    }

    #[test]
    fn rayleigh_quotient_matches_direct_forms() {
        for kind in [ExperimentKind::HardyCritical, ExperimentKind::HardyInfinity, ExperimentKind::RellichInfinity] {
            for n in [2u64, 3] {
                let e = experiment(kind, n).unwrap();
                let d = direct(kind, n);
                assert!((e.rayleigh_quotient - d).abs() < 1e-9 * d, "{kind} {n}: {} {d}", e.rayleigh_quotient);
            }
        }
    }

    #[test]
    fn distance_first_entry() {
        let d = distance_experiment(4).unwrap();
        let c1 = zeta_one().sqrt();
        assert!((d.first_entry + c1).abs() < 1e-12);
        assert!(d.value > zeta_one());
    }

    #[test]
    fn tail_quadrature_agrees_with_full_head() {
        let full = ExperimentConfig { head_end: 1 << 20, ..Default::default() };
        let short = ExperimentConfig { head_end: 2000, ..Default::default() };
        for kind in [ExperimentKind::HardyInfinity, ExperimentKind::RellichInfinity] {
            let a = experiment_with(kind, 64, &full).unwrap();
            let b = experiment_with(kind, 64, &short).unwrap();
            assert!((a.remainder_norm2 / b.remainder_norm2 - 1.0).abs() < 1e-9, "{kind} {a:?} {b:?}");
            assert!((a.weighted_norm2 / b.weighted_norm2 - 1.0).abs() < 1e-9, "{kind} {a:?} {b:?}");
        }
        let a = distance_experiment_with(64, &full).unwrap();
        let b = distance_experiment_with(64, &short).unwrap();
        assert!((a.value / b.value - 1.0).abs() < 1e-9, "{a:?} {b:?}");
    }

    #[test]
    fn slope_of_a_line() {
        let pts = [(0.0, 1.0), (1.0, -1.0), (2.0, -3.0)];
        assert!((log_slope(&pts).unwrap() + 2.0).abs() < 1e-15);
        assert!(log_slope(&pts[..1]).is_none());
    }

    #[test]
    fn hardy_critical_rejected_for_order_two() {
        let p = build_cutoff(CutoffKind::HardyCritical, 4, DEFAULT_EPSILON).unwrap();
        assert!(verify_support(&p, 2).is_err());
        assert!(verify_support(&p, 1).is_ok());
    }
}
