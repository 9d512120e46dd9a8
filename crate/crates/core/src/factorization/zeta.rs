//! The auxiliary sequence `ζ_n = c_n^2` and its sandwich certificate.
//!
//! Three evaluators are provided:
//! * [`ZetaStream`]: the recurrence in 256-bit arithmetic, with an exact
//!   rational check of `(1+2/n)^{3/2} < ζ_n < (1+3/n)^{3/2}` at every step;
//! * [`EpsilonStream`]: the recurrence rewritten for `ε_n = ζ_n - 1` in
//!   binary64, free of the cancellation that plagues the literal form;
//! * [`ZetaSeries`]: the formal expansion of `ζ` in powers of `1/n`, used
//!   where stepping the recurrence is out of reach.

use std::collections::VecDeque;

use crate::error::{invalid, Result};
use crate::precision::Ext;

fn g_ext(m: usize) -> Ext {
    let x = Ext::from_u64(m as u64);
    &x * &x.sqrt()
}

/// `8√2 - 3√3` in 256-bit arithmetic.
pub fn zeta_one_ext() -> Ext {
    Ext::from_u64(8) * Ext::from_u64(2).sqrt() - Ext::from_u64(3) * Ext::from_u64(3).sqrt()
}

pub fn zeta_one() -> f64 {
    zeta_one_ext().to_f64()
}

/// One step of the extended stream.
#[derive(Debug, Clone)]
pub struct ZetaStep {
    pub n: usize,
    pub zeta: Ext,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl ZetaStep {
    pub fn bounds_ok(&self) -> bool {
        self.lower_ok && self.upper_ok
    }

    /// `ζ_n - 1` rounded to binary64, exact up to the final rounding.
    pub fn epsilon(&self) -> f64 {
        (&self.zeta - Ext::one()).to_f64()
    }
}

/// `(1+2/n)^{3/2} < ζ < (1+3/n)^{3/2}`, decided on squares with integers.
fn sandwich(n: usize, zeta: &Ext) -> (bool, bool) {
    let nn = Ext::from_u64(n as u64);
    let lhs = zeta.square() * nn.powi(3);
    let lo = Ext::from_u64(n as u64 + 2).powi(3);
    let hi = Ext::from_u64(n as u64 + 3).powi(3);
    (zeta.is_positive() && lhs > lo, lhs < hi)
}

/// `ζ_1, ζ_2, ...` in 256-bit arithmetic, one square root per step.
pub struct ZetaStream {
    n: usize,
    prev: Option<Ext>,
    // g_{n-1}, g_n, g_{n+1}, g_{n+2}
    g: VecDeque<Ext>,
    four: Ext,
}

impl ZetaStream {
    pub fn new() -> Self {
        ZetaStream {
            n: 1,
            prev: None,
            g: (0..4).map(g_ext).collect(),
            four: Ext::from_u64(4),
        }
    }
}

impl Default for ZetaStream {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for ZetaStream {
    type Item = ZetaStep;

    fn next(&mut self) -> Option<ZetaStep> {
        let n = self.n;
        let zeta = match &self.prev {
            None => zeta_one_ext(),
            Some(prev) => {
                let (gm, g0, g1, g2) = (&self.g[0], &self.g[1], &self.g[2], &self.g[3]);
                let h = g1 / g0;
                let inner = &self.four - &(g2 / g1) - &(gm / g0) - &(&h / prev);
                h * inner
            }
        };
        let (lower_ok, upper_ok) = sandwich(n, &zeta);
        self.prev = Some(zeta.clone());
        self.g.pop_front();
        self.g.push_back(g_ext(n + 3));
        self.n += 1;
        Some(ZetaStep { n, zeta, lower_ok, upper_ok })
    }
}

/// `(1 + x)^{3/2} - 1` without cancellation.
pub(crate) fn pow32_minus_one(x: f64) -> f64 {
    (1.5 * x.ln_1p()).exp_m1()
}

/// `ε_n = ζ_n - 1` in binary64 through the rewritten recurrence
/// `δ = -η_{n+1} - μ_n - (η_n - ε_{n-1})/(1 + ε_{n-1})`, `ε_n = η_n + δ + η_n δ`,
/// with `η_n = (1+1/n)^{3/2} - 1` and `μ_n = (1-1/n)^{3/2} - 1`.
pub struct EpsilonStream {
    n: usize,
    prev: f64,
    eta: f64,
}

impl EpsilonStream {
    pub fn new() -> Self {
        EpsilonStream { n: 1, prev: f64::NAN, eta: f64::NAN }
    }
}

impl Default for EpsilonStream {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for EpsilonStream {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        let n = self.n;
        let eps = if n == 1 {
            self.eta = pow32_minus_one(0.5);
            8.0 * std::f64::consts::SQRT_2 - 3.0 * 3f64.sqrt() - 1.0
        } else {
            let x = n as f64;
            let eta = self.eta;
            let eta_next = pow32_minus_one(1.0 / (x + 1.0));
            let mu = pow32_minus_one(-1.0 / x);
            let delta = -eta_next - mu - (eta - self.prev) / (1.0 + self.prev);
            self.eta = eta_next;
            eta + delta + eta * delta
        };
        self.prev = eps;
        self.n += 1;
        Some((n, eps))
    }
}

/// The literal recurrence in binary64, kept to measure its drift.
pub struct NaiveZetaStream {
    n: usize,
    prev: f64,
}

impl NaiveZetaStream {
    pub fn new() -> Self {
        NaiveZetaStream { n: 1, prev: f64::NAN }
    }
}

impl Default for NaiveZetaStream {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for NaiveZetaStream {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        let n = self.n;
        let z = if n == 1 {
            8.0 * std::f64::consts::SQRT_2 - 3.0 * 3f64.sqrt()
        } else {
            let x = n as f64;
            let h = ((x + 1.0) / x).powf(1.5);
            let h_next = ((x + 2.0) / (x + 1.0)).powf(1.5);
            let h_prev_inv = ((x - 1.0) / x).powf(1.5);
            h * (4.0 - h_next - h_prev_inv - h / self.prev)
        };
        self.prev = z;
        self.n += 1;
        Some((n, z))
    }
}

// Truncated power series in x, coefficients from degree 0.
type Series = Vec<f64>;

fn mul(a: &Series, b: &Series, deg: usize) -> Series {
    let mut out = vec![0.0; deg + 1];
    for (i, ai) in a.iter().enumerate().take(deg + 1) {
        for (j, bj) in b.iter().enumerate().take(deg + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `(1 + c x)^p` to degree `deg`.
fn binomial_series(c: f64, p: f64, deg: usize) -> Series {
    let mut out = vec![1.0; deg + 1];
    for i in 1..=deg {
        out[i] = out[i - 1] * (p - (i - 1) as f64) / i as f64 * c;
    }
    out
}

/// `S(x/(1-x))` for the series `s`.
fn shift_back(s: &Series, deg: usize) -> Series {
    let mut out = vec![0.0; deg + 1];
    for (m, sm) in s.iter().enumerate().take(deg + 1) {
        // (x/(1-x))^m = sum_j C(m+j-1, j) x^(m+j)
        let mut coef = 1.0;
        for j in 0..=deg - m {
            if m == 0 && j > 0 {
                break;
            }
            out[m + j] += sm * coef;
            coef *= (m + j) as f64 / (j + 1) as f64;
        }
    }
    out
}

fn residual(s: &Series, h: &Series, a: &Series, deg: usize) -> Series {
    let t = shift_back(s, deg);
    let st = mul(s, &t, deg);
    let hat = mul(&mul(h, a, deg), &t, deg);
    let hh = mul(h, h, deg);
    (0..=deg).map(|i| st[i] - hat[i] + hh[i]).collect()
}

/// Formal expansion `ζ_n ~ 1 + Σ_{m>=1} s_m n^{-m}`.
///
/// Substituting into `ζ_n ζ_{n-1} = h_n A_n ζ_{n-1} - h_n^2` fixes `s_1` by a
/// quadratic (the root inside the sandwich interval `(3, 4.5)` is taken) and
/// every later `s_m` by a linear equation. The part of `ζ` that depends on
/// the initial value decays like a non-integer power near `n^{-4.16}` and
/// does not enter the formal series.
#[derive(Debug, Clone)]
pub struct ZetaSeries {
    coeffs: Vec<f64>,
}

impl ZetaSeries {
    pub fn new(terms: usize) -> Result<Self> {
        if terms < 2 {
            return Err(invalid("terms", "need at least two coefficients"));
        }
        let deg = terms + 1;
        let h = binomial_series(1.0, 1.5, deg);
        let up = mul(&binomial_series(2.0, 1.5, deg), &binomial_series(1.0, -1.5, deg), deg);
        let down = binomial_series(-1.0, 1.5, deg);
        let a: Series = (0..=deg)
            .map(|i| if i == 0 { 4.0 } else { 0.0 } - up[i] - down[i])
            .collect();

        let mut s = vec![0.0; terms + 1];
        s[0] = 1.0;
        let r2 = |v: f64, s: &mut Series| {
            s[1] = v;
            residual(s, &h, &a, deg)[2]
        };
        let (f0, f1, f2) = (r2(0.0, &mut s), r2(1.0, &mut s), r2(2.0, &mut s));
        let qa = (f2 - 2.0 * f1 + f0) / 2.0;
        let qb = f1 - f0 - qa;
        let disc = (qb * qb - 4.0 * qa * f0).sqrt();
        let roots = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)];
        s[1] = roots
            .into_iter()
            .find(|r| *r > 3.0 && *r < 4.5)
            .ok_or_else(|| invalid("series", "no admissible first coefficient"))?;
        for m in 2..=terms {
            s[m] = 0.0;
            let r0 = residual(&s, &h, &a, deg)[m + 1];
            s[m] = 1.0;
            let r1 = residual(&s, &h, &a, deg)[m + 1];
            s[m] = -r0 / (r1 - r0);
        }
        Ok(ZetaSeries { coeffs: s })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `ζ(n) - (1 + 2/n)^{3/2}`, summed from coefficient differences so the
    /// common leading term `3/n` never has to cancel.
    pub fn lower_gap(&self, n: f64) -> f64 {
        let x = 1.0 / n;
        let lower = binomial_series(2.0, 1.5, self.coeffs.len() - 1);
        let mut acc = 0.0;
        for (s, e) in self.coeffs[1..].iter().zip(&lower[1..]).rev() {
            acc = acc * x + (s - e);
        }
        acc * x
    }

    /// `ζ(x) - 1` at `x = 1/n`.
    pub fn epsilon(&self, n: f64) -> f64 {
        let x = 1.0 / n;
        let mut acc = 0.0;
        for c in self.coeffs[1..].iter().rev() {
            acc = acc * x + c;
        }
        acc * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_values() {
        let mut s = ZetaStream::new();
        let z1 = s.next().unwrap();
        assert!((z1.zeta.to_f64() - 6.117556076278128).abs() < 1e-15);
        assert!(z1.bounds_ok());
        let z2 = s.next().unwrap();
        assert!((z2.zeta.to_f64() - 3.318832153629288).abs() < 1e-15);
        assert!(z2.bounds_ok());
        assert!(z2.zeta.to_f64() > 2.8284 && z2.zeta.to_f64() < 3.9528);
    }

    #[test]
    fn epsilon_form_tracks_extended() {
        let mut worst: f64 = 0.0;
        for (step, (n, e)) in ZetaStream::new().zip(EpsilonStream::new()).take(3000) {
            assert_eq!(step.n, n);
            worst = worst.max((step.epsilon() - e).abs() / step.epsilon());
        }
        assert!(worst < 1e-13, "{worst}");
    }

    #[test]
    fn naive_form_is_close_in_absolute_terms() {
        for (step, (_, z)) in ZetaStream::new().zip(NaiveZetaStream::new()).take(3000) {
            assert!((step.zeta.to_f64() - z).abs() < 1e-12);
        }
    }

    #[test]
    fn series_leading_coefficient() {
        let s = ZetaSeries::new(12).unwrap();
        let expect = 2.0 + 10f64.sqrt() / 2.0;
        assert!((s.coefficients()[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn lower_gap_matches_difference() {
        let s = ZetaSeries::new(16).unwrap();
        for n in [50.0, 1000.0] {
            let direct = s.epsilon(n) - pow32_minus_one(2.0 / n);
            assert!((s.lower_gap(n) - direct).abs() < 1e-13 / n);
        }
    }

    #[test]
    fn series_matches_recurrence_far_out() {
        let series = ZetaSeries::new(12).unwrap();
        for (n, e) in EpsilonStream::new().take(100_001) {
            if n == 10_000 || n == 100_000 {
                let rel = (series.epsilon(n as f64) - e).abs() / e;
                assert!(rel < 1e-11, "n={n} rel={rel}");
            }
        }
    }
}
