//! Remainder operators `R_1`, `R_2` in the factorizations
//! `-Δ - ρ^(1) = R_1^* R_1` and `Δ^2 - ρ^(2) = R_2^* R_2`.

mod zeta;

pub use zeta::{zeta_one, zeta_one_ext, EpsilonStream, NaiveZetaStream, ZetaSeries, ZetaStep, ZetaStream};

pub(crate) use zeta::pow32_minus_one;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, LabError, Result};
use crate::numeric::NeumaierSum;
use crate::operators::{apply_neg_laplacian, FiniteSequence};
use crate::precision::Precision;
use crate::weights::{ground_state, rho_k};

/// `a_n = ((n+1)/n)^{1/4}`.
pub fn hardy_a(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(LabError::Domain { index: 0, requirement: "n >= 1" });
    }
    Ok(((0.25) * (1.0 / n as f64).ln_1p()).exp())
}

/// `a_n^2` for `n = 1..=n_max` by forward iteration of
/// `a_n^2 + 1/a_{n-1}^2 = sqrt((n+1)/n) + sqrt((n-1)/n)` from `a_1^2 = sqrt 2`.
/// Index 0 is unused.
pub fn hardy_forward(n_max: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; n_max + 1];
    if n_max == 0 {
        return out;
    }
    out[1] = std::f64::consts::SQRT_2;
    for n in 2..=n_max {
        let x = n as f64;
        out[n] = (1.0 + 1.0 / x).sqrt() + (1.0 - 1.0 / x).sqrt() - 1.0 / out[n - 1];
    }
    out
}

/// Closed-form evaluators for `R_1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HardyRemainder;

impl HardyRemainder {
    pub fn a(&self, n: usize) -> Result<f64> {
        hardy_a(n)
    }

    /// Residual of the defining relation at `n` (`a_1^2 - sqrt 2` at `n = 1`).
    pub fn relation_residual(&self, n: usize) -> Result<f64> {
        let a2 = hardy_a(n)?.powi(2);
        if n == 1 {
            return Ok(a2 - std::f64::consts::SQRT_2);
        }
        let x = n as f64;
        let prev = hardy_a(n - 1)?.powi(2);
        Ok(a2 + 1.0 / prev - (1.0 + 1.0 / x).sqrt() - (1.0 - 1.0 / x).sqrt())
    }

    pub fn apply(&self, u: &FiniteSequence) -> FiniteSequence {
        apply_r1(u)
    }
}

/// `(R_1u)_n = a_n u_n - u_{n+1}/a_n` for `n >= 1`; entry 0 is zero.
pub fn apply_r1(u: &FiniteSequence) -> FiniteSequence {
    let end = u.support_end().unwrap_or(0);
    let values = (0..=end)
        .map(|n| {
            if n == 0 {
                return 0.0;
            }
            let a = ((0.25) * (1.0 / n as f64).ln_1p()).exp();
            a * u.get(n) - u.get(n + 1) / a
        })
        .collect();
    FiniteSequence::unconstrained(values)
}

/// `(R_1 u)_n` for `u = √n ξ_n`, written as `(n(n+1))^{1/4} (ξ_n - ξ_{n+1})`.
pub fn r1_entry_scaled(n: f64, d1: f64) -> f64 {
    (n * (n + 1.0)).sqrt().sqrt() * d1
}

/// Coefficients of `R_2` for `n = 1..=n_max`; index 0 of every array is unused.
#[derive(Debug, Clone)]
pub struct RellichRemainder {
    n_max: usize,
    precision: Precision,
    zeta: Vec<f64>,
    eps: Vec<f64>,
    c: Vec<f64>,
    b: Vec<f64>,
    bounds_ok: Vec<bool>,
}

/// `(1+x)^{3/2}` for the ratios `g_{n+1}/g_n`.
fn pow32(x: f64) -> f64 {
    1.0 + pow32_minus_one(x)
}

fn f64_sandwich(n: usize, eps: f64) -> (bool, bool) {
    let x = n as f64;
    (eps > pow32_minus_one(2.0 / x), eps < pow32_minus_one(3.0 / x))
}

impl RellichRemainder {
    /// `ζ_n` for `n <= n_max` in extended precision; a failed sandwich check
    /// aborts with the offending index.
    pub fn zeta(n_max: usize) -> Result<Self> {
        Self::zeta_with(n_max, Precision::Extended)
    }

    /// Same with a choice of arithmetic. `Binary64` runs the `ε` recurrence.
    pub fn zeta_with(n_max: usize, precision: Precision) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("n_max", "must be positive"));
        }
        let mut zeta = vec![f64::NAN; n_max + 1];
        let mut eps = vec![f64::NAN; n_max + 1];
        let mut bounds_ok = vec![false; n_max + 1];
        match precision {
            Precision::Extended => {
                for step in ZetaStream::new().take(n_max) {
                    if !step.bounds_ok() {
                        return Err(LabError::BoundViolation { index: step.n });
                    }
                    eps[step.n] = step.epsilon();
                    zeta[step.n] = step.zeta.to_f64();
                    bounds_ok[step.n] = true;
                }
            }
            Precision::Binary64 => {
                for (n, e) in EpsilonStream::new().take(n_max) {
                    let (lo, hi) = f64_sandwich(n, e);
                    if !(lo && hi) {
                        return Err(LabError::BoundViolation { index: n });
                    }
                    eps[n] = e;
                    zeta[n] = 1.0 + e;
                    bounds_ok[n] = true;
                }
            }
        }
        Ok(RellichRemainder { n_max, precision, zeta, eps, c: Vec::new(), b: Vec::new(), bounds_ok })
    }

    /// `ζ`, `c` and `b` for `n <= n_max`.
    pub fn rellich_coeffs(n_max: usize) -> Result<Self> {
        Self::rellich_coeffs_with(n_max, Precision::Extended)
    }

    pub fn rellich_coeffs_with(n_max: usize, precision: Precision) -> Result<Self> {
        if n_max < 2 {
            return Err(invalid("n_max", "must be at least 2"));
        }
        let mut out = Self::zeta_with(n_max, precision)?;
        out.fill_coefficients();
        Ok(out)
    }

    fn fill_coefficients(&mut self) {
        self.c = self.zeta.iter().map(|z| z.sqrt()).collect();
        self.b = vec![f64::NAN; self.n_max + 1];
        for n in 1..=self.n_max {
            let x = n as f64;
            let c = self.c[n];
            // b_n = c_n g_n/g_{n+1} + (g_{n+2}/g_{n+1})/c_n
            self.b[n] = c / pow32(1.0 / x) + pow32(1.0 / (x + 1.0)) / c;
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn zeta_values(&self) -> &[f64] {
        &self.zeta
    }

    /// `ζ_n - 1`, carried separately to keep its relative accuracy.
    pub fn eps_values(&self) -> &[f64] {
        &self.eps
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c
    }

    pub fn b_values(&self) -> &[f64] {
        &self.b
    }

    pub fn bounds_ok(&self) -> &[bool] {
        &self.bounds_ok
    }

    fn require(&self, needed: usize) -> Result<()> {
        if self.c.is_empty() || needed > self.n_max {
            return Err(LabError::InsufficientCoefficients {
                available: if self.c.is_empty() { 0 } else { self.n_max },
                needed,
            });
        }
        Ok(())
    }

    pub fn c(&self, n: usize) -> Result<f64> {
        self.require(n)?;
        Ok(self.c[n])
    }

    pub fn b(&self, n: usize) -> Result<f64> {
        self.require(n)?;
        Ok(self.b[n])
    }

    /// Residuals of the three equation sets at `n`.
    pub fn residuals(&self, n: usize) -> Result<EquationResiduals> {
        if n < 2 {
            return Err(LabError::Domain { index: n as u64, requirement: "n >= 2" });
        }
        self.require(n)?;
        let rho = rho_k(2, n)?;
        let mut set1 = 6.0 - rho - self.zeta[n] - self.b[n - 1].powi(2);
        if n >= 3 {
            set1 -= 1.0 / self.zeta[n - 2];
        }
        let set2 = 4.0 - self.c[n] * self.b[n] - self.b[n - 1] / self.c[n - 1];
        let g = (ground_state(2, n), ground_state(2, n + 1), ground_state(2, n + 2));
        let set3 = (self.c[n] * g.0 - self.b[n] * g.1 + g.2 / self.c[n]) / g.1;
        Ok(EquationResiduals { n, set1, set2, set3 })
    }

    /// Residuals for `2 <= n <= n_max`.
    pub fn equation_residuals(&self) -> Result<Vec<EquationResiduals>> {
        (2..=self.n_max).map(|n| self.residuals(n)).collect()
    }

    /// `(R_2u)_n = c_n u_n - b_n u_{n+1} + u_{n+2}/c_n` for `n >= 1`.
    pub fn apply(&self, u: &FiniteSequence) -> Result<FiniteSequence> {
        let end = u.support_end().unwrap_or(0);
        self.require(end + 2)?;
        let values = (0..=end)
            .map(|n| {
                if n == 0 {
                    0.0
                } else {
                    self.c[n] * u.get(n) - self.b[n] * u.get(n + 1) + u.get(n + 2) / self.c[n]
                }
            })
            .collect();
        Ok(FiniteSequence::unconstrained(values))
    }

    /// `(R_2u)_n` for `u = g^(2) ξ`, given `d1 = ξ_n - ξ_{n+1}` and
    /// `d2 = -ξ_n + 2ξ_{n+1} - ξ_{n+2}`.
    pub fn entry_scaled(&self, n: usize, d1: f64, d2: f64) -> f64 {
        let x = n as f64;
        let gap = self.eps[n] - pow32_minus_one(2.0 / x);
        entry_scaled_from(x, gap, self.c[n], d1, d2)
    }
}

/// `(R_2u)_n` for `u = g^(2) ξ` in the form
/// `(g_n (ζ_n - g_{n+2}/g_n) d1 - g_{n+2} d2) / c_n`, where the annihilation
/// of `g^(2)` is built in. `gap` is `ζ_n - (1+2/n)^{3/2}`, supplied by the
/// caller from whichever representation of `ζ` keeps it accurate.
pub fn entry_scaled_from(n: f64, gap: f64, c: f64, d1: f64, d2: f64) -> f64 {
    let g0 = n * n.sqrt();
    let g2 = (n + 2.0) * (n + 2.0).sqrt();
    (g0 * gap * d1 - g2 * d2) / c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationResiduals {
    pub n: usize,
    pub set1: f64,
    pub set2: f64,
    /// `(R_2 g)_n / g_{n+1}`.
    pub set3: f64,
}

impl EquationResiduals {
    pub fn max_abs(&self) -> f64 {
        self.set1.abs().max(self.set2.abs()).max(self.set3.abs())
    }
}

pub fn apply_r2(u: &FiniteSequence, coeffs: &RellichRemainder) -> Result<FiniteSequence> {
    coeffs.apply(u)
}

const LOG_SWITCH: usize = 1000;

/// The positive sequence annihilated by `R_k`: `√n` for `k = 1`; for `k = 2`
/// the solution with `u_0 = u_1 = 0`, `u_2 = 1`. Length `n_max + 1`.
pub fn kernel_solution(k: usize, n_max: usize) -> Result<FiniteSequence> {
    match k {
        1 => Ok(FiniteSequence::from_fn(n_max + 1, 1, |n| (n as f64).sqrt())),
        2 => {
            let coeffs = RellichRemainder::zeta_with(n_max.max(2), Precision::Binary64)?;
            kernel_solution_with(&coeffs, n_max)
        }
        _ => Err(invalid("k", "kernel solutions exist for k = 1, 2")),
    }
}

/// `u_n = g_1 g_n Σ_{m=1}^{n-1} Π_{j<m} ζ_j / (g_m g_{m+1})` from the supplied `ζ`.
pub fn kernel_solution_with(coeffs: &RellichRemainder, n_max: usize) -> Result<FiniteSequence> {
    if n_max < 2 {
        return Err(invalid("n_max", "must be at least 2"));
    }
    if coeffs.n_max() + 2 < n_max {
        return Err(LabError::InsufficientCoefficients { available: coeffs.n_max(), needed: n_max - 2 });
    }
    let mut values = vec![0.0; n_max + 1];
    let mut sum = NeumaierSum::default();
    let mut product = 1.0;
    let mut log_product = 0.0;
    for n in 2..=n_max {
        let m = n - 1;
        if m > 1 {
            let eps = coeffs.eps_values()[m - 1];
            product *= 1.0 + eps;
            log_product += eps.ln_1p();
        }
        let lg = 1.5 * ((m as f64).ln() + ((m + 1) as f64).ln());
        let term = if m < LOG_SWITCH {
            product / (ground_state(2, m) * ground_state(2, m + 1))
        } else {
            let t = (log_product - lg).exp();
            if m == LOG_SWITCH {
                let direct = product / (ground_state(2, m) * ground_state(2, m + 1));
                if ((t - direct) / direct).abs() > 1e-10 {
                    return Err(invalid("kernel", "direct and logarithmic products disagree"));
                }
            }
            t
        };
        sum.add(term);
        values[n] = ground_state(2, n) * sum.total();
    }
    FiniteSequence::new(values, 2)
}

/// `n^{3/2}(n-1)/2^{3/2}`.
pub fn kernel_lower_bound(n: usize) -> f64 {
    let x = n as f64;
    x * x.sqrt() * (x - 1.0) / (2.0 * std::f64::consts::SQRT_2)
}

/// Outcome of a batch of random identity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityTrials {
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub max_support: usize,
    pub max_relative_residual: f64,
    pub worst_trial: usize,
}

/// Relative residual of the order-one identity for `u` (`u_0 = 0`).
pub fn hardy_identity_residual(u: &FiniteSequence) -> Result<f64> {
    if u.get(0) != 0.0 {
        return Err(LabError::Domain { index: 0, requirement: "u_0 = 0" });
    }
    let end = u.support_end().unwrap_or(0);
    let mut lhs = NeumaierSum::default();
    let mut rho_part = NeumaierSum::default();
    for n in 1..=end + 1 {
        lhs.add((u.get(n - 1) - u.get(n)).powi(2));
        if u.get(n) != 0.0 {
            rho_part.add(rho_k(1, n)? * u.get(n).powi(2));
        }
    }
    let rem = apply_r1(u).norm_sq();
    let lhs = lhs.total();
    Ok(relative(lhs, lhs - rho_part.total() - rem))
}

/// Relative residual of the order-two identity for `u` (`u_0 = u_1 = 0`).
pub fn rellich_identity_residual(u: &FiniteSequence, coeffs: &RellichRemainder) -> Result<f64> {
    if u.get(0) != 0.0 || u.get(1) != 0.0 {
        return Err(LabError::Domain { index: 0, requirement: "u_0 = u_1 = 0" });
    }
    let lap = apply_neg_laplacian(u);
    let mut lhs = NeumaierSum::default();
    for v in lap.values().iter().skip(1) {
        lhs.add(v * v);
    }
    let mut rho_part = NeumaierSum::default();
    for (n, v) in u.values().iter().enumerate().skip(2) {
        if *v != 0.0 {
            rho_part.add(rho_k(2, n)? * v * v);
        }
    }
    let rem = coeffs.apply(u)?.norm_sq();
    let lhs = lhs.total();
    Ok(relative(lhs, lhs - rho_part.total() - rem))
}

fn relative(scale: f64, diff: f64) -> f64 {
    if scale == 0.0 {
        diff.abs()
    } else {
        (diff / scale).abs()
    }
}

/// Draws `u` with `u_n` uniform in `[-1, 1]` for `boundary <= n <= end`,
/// `end` uniform in `[boundary, max_support]`.
pub fn random_sequence(rng: &mut impl Rng, boundary: usize, max_support: usize) -> FiniteSequence {
    let end = rng.gen_range(boundary..=max_support.max(boundary));
    FiniteSequence::from_fn(end + 1, boundary, |_| rng.gen_range(-1.0..=1.0))
}

/// Runs `trials` random checks of the order-`k` identity.
pub fn identity_trials(k: usize, trials: usize, max_support: usize, seed: u64) -> Result<IdentityTrials> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = match k {
        1 => None,
        2 => Some(RellichRemainder::rellich_coeffs(max_support + 2)?),
        _ => return Err(invalid("k", "identities are available for k = 1, 2")),
    };
    let mut worst = (0.0f64, 0usize);
    for t in 0..trials {
        let u = random_sequence(&mut rng, k, max_support);
        let r = match &coeffs {
            None => hardy_identity_residual(&u)?,
            Some(c) => rellich_identity_residual(&u, c)?,
        };
        if r > worst.0 {
            worst = (r, t);
        }
    }
    Ok(IdentityTrials {
        k,
        trials,
        seed,
        max_support,
        max_relative_residual: worst.0,
        worst_trial: worst.1,
    })
}

/// Relative gap between binary64 evaluations of `ζ_n` and the 256-bit stream.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub n_max: usize,
    /// Largest `|ζ_f64 - ζ_ext| / ζ_ext` for the rewritten recurrence.
    pub epsilon_form: f64,
    /// Same for the literal recurrence.
    pub literal_form: f64,
    /// `(n, epsilon_form, literal_form)` running maxima at powers of ten.
    pub checkpoints: Vec<(usize, f64, f64)>,
    pub bounds_ok: bool,
    pub first_violation: Option<usize>,
}

pub fn divergence_report(n_max: usize) -> DivergenceReport {
    let mut rep = DivergenceReport {
        n_max,
        epsilon_form: 0.0,
        literal_form: 0.0,
        checkpoints: Vec::new(),
        bounds_ok: true,
        first_violation: None,
    };
    let mut next_mark = 10;
    let streams = ZetaStream::new().zip(EpsilonStream::new()).zip(NaiveZetaStream::new());
    for ((step, (_, e)), (_, z)) in streams.take(n_max) {
        let exact = step.zeta.to_f64();
        rep.epsilon_form = rep.epsilon_form.max(((1.0 + e) - exact).abs() / exact);
        rep.literal_form = rep.literal_form.max((z - exact).abs() / exact);
        if !step.bounds_ok() && rep.bounds_ok {
            rep.bounds_ok = false;
            rep.first_violation = Some(step.n);
        }
        if step.n == next_mark || step.n == n_max {
            rep.checkpoints.push((step.n, rep.epsilon_form, rep.literal_form));
            if step.n == next_mark {
                next_mark *= 10;
            }
        }
    }
    rep
}
