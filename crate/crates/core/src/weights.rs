//! Ground states and the improved weights of order `k`.
//!
//! The weight of order `k` at `n` is the centered alternating-binomial stencil
//! applied to `g_m = m^(k-1/2)`, divided by `g_n`. All `O(1)` terms cancel down
//! to a value of size `n^(-2k)`, so the plain binary64 sum loses everything
//! at large `n`. The default evaluators therefore use the convergent expansion
//! in `1/n^2` (exact coefficients) once `n >= 4k`, and a 256-bit direct sum below.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;

use crate::combinatorics::{exact_series_coefficient, factorial, ExactRational};
use crate::error::{invalid, LabError, Result};
use crate::precision::{Ext, Precision};

const SERIES_TERMS: usize = 30;

fn check_order(k: usize) -> Result<()> {
    if k == 0 {
        return Err(invalid("k", "order must be at least 1"));
    }
    Ok(())
}

fn check_index(k: usize, n: usize) -> Result<()> {
    check_order(k)?;
    if n < k {
        return Err(LabError::Domain { index: n as u64, requirement: "n >= k" });
    }
    Ok(())
}

/// `n^(k - 1/2)`, zero at `n = 0`.
pub fn ground_state(k: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let x = n as f64;
    x.powi(k as i32 - 1) * x.sqrt()
}

pub fn ground_state_ext(k: usize, n: usize) -> Ext {
    if n == 0 {
        return Ext::zero();
    }
    let x = Ext::from_u64(n as u64);
    &x.powi(k - 1) * &x.sqrt()
}

/// Signed stencil weights `(-1)^j C(2k, k-j)` for `j = -k..=k`.
pub fn stencil(k: usize) -> Vec<i64> {
    let mut row = vec![1i64; 2 * k + 1];
    for i in 1..=2 * k {
        row[i] = row[i - 1] * (2 * k + 1 - i) as i64 / i as i64;
    }
    row.iter()
        .enumerate()
        .map(|(i, c)| if (i + k).is_multiple_of(2) { *c } else { -*c })
        .collect()
}

fn series_table(k: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("series cache poisoned");
    guard
        .entry(k)
        .or_insert_with(|| {
            Arc::new(
                (k..k + SERIES_TERMS)
                    .map(|l| exact_series_coefficient(k, l).map(|c| c.to_f64()).unwrap_or(0.0))
                    .collect(),
            )
        })
        .clone()
}

/// Truncated expansion `sum_{l=k}^{k+terms-1} coef(k,l) n^(-2l)`.
pub fn series_partial_sum(k: usize, n: usize, terms: usize) -> Result<f64> {
    check_index(k, n)?;
    let coeffs: Vec<f64> = if terms <= SERIES_TERMS {
        series_table(k)[..terms].to_vec()
    } else {
        (k..k + terms)
            .map(|l| exact_series_coefficient(k, l).map(|c| c.to_f64()))
            .collect::<Result<_>>()?
    };
    let x2 = 1.0 / (n as f64 * n as f64);
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * x2 + c;
    }
    Ok(acc * x2.powi(k as i32))
}

/// Weight of order `k` at `n >= k`, accurate to a few ulps.
pub fn rho_k(k: usize, n: usize) -> Result<f64> {
    check_index(k, n)?;
    if n >= 4 * k {
        series_partial_sum(k, n, SERIES_TERMS)
    } else {
        Ok(rho_k_ext(k, n)?.to_f64())
    }
}

/// Direct stencil sum in 256-bit arithmetic.
pub fn rho_k_ext(k: usize, n: usize) -> Result<Ext> {
    check_index(k, n)?;
    let mut acc = Ext::zero();
    for (i, w) in stencil(k).into_iter().enumerate() {
        let m = n + i - k;
        if m == 0 {
            continue;
        }
        acc = acc + Ext::from_i64(w) * ground_state_ext(k, m);
    }
    Ok(acc / ground_state_ext(k, n))
}

/// Direct stencil sum in plain binary64; absolute error near `1e-15`.
pub fn rho_k_binary64(k: usize, n: usize) -> Result<f64> {
    check_index(k, n)?;
    let p = k as f64 - 0.5;
    let x = n as f64;
    let mut acc = 0.0;
    for (i, w) in stencil(k).into_iter().enumerate() {
        let j = i as f64 - k as f64;
        let base = 1.0 + j / x;
        if base > 0.0 {
            acc += w as f64 * base.powf(p);
        }
    }
    Ok(acc)
}

pub fn rho1(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(LabError::Domain { index: 0, requirement: "n >= 1" });
    }
    rho_k(1, n)
}

pub fn rho2(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(LabError::Domain { index: n as u64, requirement: "n >= 2" });
    }
    rho_k(2, n)
}

/// Closed-form coefficient of `n^(-2l-2)` in the order-two expansion.
pub fn series_coefficient_rho2_exact(l: usize) -> Result<ExactRational> {
    if l == 0 {
        return Err(invalid("l", "index must be at least 1"));
    }
    let four_l = BigInt::from(4).pow(l as u32);
    let num = BigInt::from(6) * (&four_l - 1) * BigInt::from(factorial(4 * l as u64));
    let den = &four_l
        * &four_l
        * BigInt::from(factorial(2 * l as u64))
        * BigInt::from(factorial(2 * l as u64 + 2));
    ExactRational::new(num, den)
}

pub fn series_coefficient_rho2(l: usize) -> Result<f64> {
    series_coefficient_rho2_exact(l).map(|c| c.to_f64())
}

/// `sum_{l=1}^{terms} coef(l) / n^(2l+2)` from the closed form.
pub fn series_partial_sum_rho2(n: usize, terms: usize) -> Result<f64> {
    if n < 2 {
        return Err(LabError::Domain { index: n as u64, requirement: "n >= 2" });
    }
    let x2 = 1.0 / (n as f64 * n as f64);
    let mut acc = 0.0;
    for l in (1..=terms).rev() {
        acc = acc * x2 + series_coefficient_rho2(l)?;
    }
    Ok(acc * x2 * x2)
}

/// `((2k)!)^2 / (16^k (k!)^2)`.
pub fn leading_constant_exact(k: usize) -> Result<ExactRational> {
    check_order(k)?;
    let top = BigInt::from(factorial(2 * k as u64));
    let kf = BigInt::from(factorial(k as u64));
    ExactRational::new(&top * &top, BigInt::from(16).pow(k as u32) * &kf * &kf)
}

pub fn leading_constant(k: usize) -> Result<f64> {
    leading_constant_exact(k).map(|c| c.to_f64())
}

/// Expansion of the order-`k` weight evaluated at real `x`, for loops over
/// many points. Accurate for `x >= 4k`.
#[derive(Debug, Clone)]
pub struct SeriesWeight {
    k: usize,
    coeffs: Arc<Vec<f64>>,
}

impl SeriesWeight {
    pub fn new(k: usize) -> Result<Self> {
        check_order(k)?;
        Ok(SeriesWeight { k, coeffs: series_table(k) })
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn at(&self, x: f64) -> f64 {
        let x2 = 1.0 / (x * x);
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x2 + c;
        }
        acc * x2.powi(self.k as i32)
    }

    /// Same value as [`rho_k`] at integer `n >= k`.
    pub fn at_index(&self, n: usize) -> Result<f64> {
        if n >= 4 * self.k {
            Ok(self.at(n as f64))
        } else {
            rho_k(self.k, n)
        }
    }
}

/// Order and evaluation precision of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightSpec {
    order: usize,
    precision: Precision,
}

impl WeightSpec {
    pub fn new(order: usize, precision: Precision) -> Result<Self> {
        check_order(order)?;
        Ok(WeightSpec { order, precision })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn ground_state(&self, n: usize) -> f64 {
        ground_state(self.order, n)
    }

    pub fn rho(&self, n: usize) -> Result<f64> {
        match self.precision {
            Precision::Binary64 => rho_k(self.order, n),
            Precision::Extended => rho_k_ext(self.order, n).map(|v| v.to_f64()),
        }
    }

    pub fn rho_ext(&self, n: usize) -> Result<Ext> {
        rho_k_ext(self.order, n)
    }

    pub fn sweep(&self, from: usize) -> Result<RhoSweep> {
        RhoSweep::new(self.order, from)
    }
}

/// Streams `(n, rho_n)` in 256-bit arithmetic with one square root per step.
pub struct RhoSweep {
    k: usize,
    n: usize,
    weights: Vec<Ext>,
    window: VecDeque<Ext>,
}

impl RhoSweep {
    pub fn new(k: usize, from: usize) -> Result<Self> {
        check_index(k, from)?;
        let weights = stencil(k).into_iter().map(Ext::from_i64).collect();
        let window = (from - k..=from + k).map(|m| ground_state_ext(k, m)).collect();
        Ok(RhoSweep { k, n: from, weights, window })
    }
}

impl Iterator for RhoSweep {
    type Item = (usize, Ext);

    fn next(&mut self) -> Option<Self::Item> {
        let mut acc = Ext::zero();
        for (w, g) in self.weights.iter().zip(self.window.iter()) {
            acc = acc + w * g;
        }
        let out = (self.n, acc / &self.window[self.k]);
        self.window.pop_front();
        self.window.push_back(ground_state_ext(self.k, self.n + self.k + 1));
        self.n += 1;
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn ground_state_values() {
        assert_eq!(ground_state(1, 4), 2.0);
        assert_eq!(ground_state(2, 0), 0.0);
        assert_eq!(ground_state(2, 4), 8.0);
        assert_eq!(ground_state_ext(2, 4).to_f64(), 8.0);
    }

    #[test]
    fn series_weight_matches_pointwise() {
        let w = SeriesWeight::new(2).unwrap();
        for n in [2usize, 3, 7, 8, 100, 12345] {
            assert_eq!(w.at_index(n).unwrap(), rho_k(2, n).unwrap());
        }
        assert!(close(w.at(100.5), rho_k_ext(2, 100).unwrap().to_f64() * (100.0f64 / 100.5).powi(4), 1e-3));
    }

    #[test]
    fn stencil_rows() {
        assert_eq!(stencil(1), vec![-1, 2, -1]);
        assert_eq!(stencil(2), vec![1, -4, 6, -4, 1]);
        assert_eq!(stencil(3)[3], 20);
    }

    #[test]
    fn rho1_values() {
        assert!(close(rho1(1).unwrap(), 0.585786437626905, 1e-14));
        let r2 = rho1(2).unwrap();
        assert!(close(r2, 0.068148347421863, 1e-13));
        assert!(r2 > 1.0 / 16.0);
        assert!(rho1(0).is_err());
        let n = 1_000_000usize;
        assert!((rho1(n).unwrap() * (n * n) as f64 - 0.25).abs() < 1e-5);
    }

    #[test]
    fn rho2_values() {
        let v = rho2(2).unwrap();
        assert!(close(v, 0.06574433402356075, 1e-14));
        assert!(v > 9.0 / 256.0);
        assert!(close(rho2(3).unwrap(), 0.008380417126273727, 1e-14));
        assert!(rho2(1).is_err());
    }

    #[test]
    fn rho_k_consistency_and_order_three() {
        assert!(close(rho_k(1, 5).unwrap(), rho1(5).unwrap(), 1e-14));
        assert!(close(rho_k(2, 3).unwrap(), rho2(3).unwrap(), 1e-14));
        assert!(close(rho_k(3, 3).unwrap(), 0.009295179265916462, 1e-14));
        let scaled = 1e6 * rho_k(3, 10).unwrap();
        assert!(close(scaled, 3.660107713967941, 1e-13));
        assert!(close(scaled, 225.0 / 64.0, 0.05));
        assert!(rho_k(3, 2).is_err());
        assert!(rho_k(0, 2).is_err());
    }

    #[test]
    fn series_and_direct_agree_at_the_switch() {
        for k in 1..=6 {
            for n in [4 * k, 4 * k + 1, 6 * k] {
                let a = series_partial_sum(k, n, SERIES_TERMS).unwrap();
                let b = rho_k_ext(k, n).unwrap().to_f64();
                assert!(close(a, b, 1e-14), "k={k} n={n} {a} {b}");
            }
        }
    }

    #[test]
    fn rho2_coefficients() {
        assert_eq!(series_coefficient_rho2_exact(1).unwrap(), ExactRational::from_ratio(9, 16).unwrap());
        assert_eq!(series_coefficient_rho2_exact(2).unwrap(), ExactRational::from_ratio(105, 128).unwrap());
        assert!(series_coefficient_rho2(0).is_err());
        for l in 1..=20 {
            let a = series_coefficient_rho2_exact(l).unwrap();
            let b = exact_series_coefficient(2, l + 1).unwrap();
            assert_eq!(a, b, "l={l}");
        }
    }

    #[test]
    fn rho2_series_partial_sums() {
        for n in 10..200 {
            let s = series_partial_sum_rho2(n, 20).unwrap();
            assert!(close(s, rho2(n).unwrap(), 1e-12), "n={n}");
        }
    }

    #[test]
    fn leading_constants() {
        assert_eq!(leading_constant(1).unwrap(), 0.25);
        assert_eq!(leading_constant(2).unwrap(), 0.5625);
        assert_eq!(leading_constant(3).unwrap(), 3.515625);
        assert!(leading_constant(0).is_err());
    }

    #[test]
    fn sweep_matches_pointwise() {
        let weight = WeightSpec::new(2, Precision::Extended).unwrap();
        for (n, v) in weight.sweep(2).unwrap().take(40) {
            let d = (v - rho_k_ext(2, n).unwrap()).abs();
            assert!(d < Ext::from_f64(1e-70), "n={n}");
        }
        assert!(WeightSpec::new(3, Precision::Binary64).unwrap().sweep(2).is_err());
    }

    #[test]
    fn binary64_direct_sum_loses_digits() {
        let exact = rho2(10_000).unwrap();
        let naive = rho_k_binary64(2, 10_000).unwrap();
        assert!((naive - exact).abs() < 1e-13);
        assert!(close(rho_k_binary64(2, 3).unwrap(), rho2(3).unwrap(), 1e-11));
    }
}
