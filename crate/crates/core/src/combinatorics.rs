//! Exact arithmetic for Stirling numbers, the three quantities `A`, `B`, `C`
//! and the power-series coefficients of the weights.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, LabError, Result};

/// Arbitrary-precision signed rational, always reduced with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(LabError::ZeroDenominator);
        }
        Ok(ExactRational(BigRational::new(numer, denom)))
    }

    pub fn from_integer(v: BigInt) -> Self {
        ExactRational(BigRational::from_integer(v))
    }

    pub fn from_ratio(p: i64, q: i64) -> Result<Self> {
        Self::new(BigInt::from(p), BigInt::from(q))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.0.to_integer())
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        ExactRational(r)
    }
}

impl From<i64> for ExactRational {
    fn from(v: i64) -> Self {
        ExactRational::from_integer(BigInt::from(v))
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

macro_rules! rat_op {
    ($tr:ident, $m:ident) => {
        impl $tr for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: Self) -> Self {
                ExactRational(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(&rhs.0))
            }
        }
    };
}

rat_op!(Add, add);
rat_op!(Sub, sub);
rat_op!(Mul, mul);
rat_op!(Div, div);

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> Self {
        ExactRational(-self.0)
    }
}

pub(crate) fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Triangular table of Stirling numbers of the second kind.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    rows: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    pub fn new(n_max: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n_max + 1);
        rows.push(vec![BigUint::one()]);
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let mut row = vec![BigUint::zero(); n + 1];
            for m in 1..=n {
                let stay = if m < n { prev[m].clone() * m } else { BigUint::zero() };
                row[m] = stay + &prev[m - 1];
            }
            rows.push(row);
        }
        StirlingTable { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `S(n, m)`; zero when `m > n`. Panics past the table size.
    pub fn get(&self, n: usize, m: usize) -> BigUint {
        if m > n {
            return BigUint::zero();
        }
        self.rows[n][m].clone()
    }
}

pub fn stirling2(n: usize, m: usize) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    StirlingTable::new(n).get(n, m)
}

/// Alternating-sum form `S(n,m) = (1/m!) sum_i (-1)^(m-i) C(m,i) i^n`.
pub fn stirling2_explicit(n: usize, m: usize) -> BigUint {
    let mut acc = BigInt::zero();
    for i in 0..=m {
        let term = binomial(BigInt::from(m), BigInt::from(i)) * BigInt::from(i).pow(n as u32);
        if (m - i).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let q = acc / BigInt::from(factorial(m as u64));
    q.to_biguint().unwrap_or_default()
}

/// Complete homogeneous symmetric polynomial `h_s(1^2, 2^2, ..., k^2)`.
pub fn a_value(s: usize, k: usize) -> BigUint {
    if k == 0 {
        return BigUint::zero();
    }
    let mut h = vec![BigUint::zero(); s + 1];
    h[0] = BigUint::one();
    for i in 1..=k {
        let x = BigUint::from(i * i);
        for j in 1..=s {
            let add = &h[j - 1] * &x;
            h[j] += add;
        }
    }
    h.swap_remove(s)
}

/// Nested-loop definition of `A`; exponential in `s`, kept as a cross-check.
pub fn a_nested(s: usize, k: usize) -> BigUint {
    fn go(depth: usize, upper: usize) -> BigUint {
        if depth == 0 {
            return BigUint::one();
        }
        (1..=upper)
            .map(|j| BigUint::from(j * j) * go(depth - 1, j))
            .fold(BigUint::zero(), |a, b| a + b)
    }
    if k == 0 {
        return BigUint::zero();
    }
    go(s, k)
}

pub fn b_value(s: usize, k: usize) -> ExactRational {
    if k == 0 {
        return ExactRational::zero();
    }
    let e = (2 * k + 2 * s) as u32;
    let mut acc = BigRational::zero();
    for j in -(k as i64)..=(k as i64) {
        let num = BigInt::from(j).pow(e);
        if num.is_zero() {
            continue;
        }
        let den = BigInt::from(factorial((k as i64 + j) as u64) * factorial((k as i64 - j) as u64));
        let term = BigRational::new(num, den);
        if (j + k as i64) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    ExactRational(acc)
}

pub fn c_value(s: usize, k: usize) -> BigInt {
    c_value_with(s, k, &StirlingTable::new(2 * k + 2 * s))
}

fn c_value_with(s: usize, k: usize, table: &StirlingTable) -> BigInt {
    if k == 0 {
        return BigInt::zero();
    }
    let top = 2 * k + 2 * s;
    let mut acc = BigInt::zero();
    let kk = BigInt::from(k);
    for m in 0..=2 * s {
        let term = binomial(BigInt::from(top), BigInt::from(m))
            * BigInt::from(table.get(top - m, 2 * k))
            * kk.pow(m as u32);
        if m % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityRow {
    pub s: usize,
    pub k: usize,
    pub a: BigUint,
    pub b: ExactRational,
    pub c: BigInt,
}

impl IdentityRow {
    pub fn equal(&self) -> bool {
        let a = BigInt::from(self.a.clone());
        self.b.to_integer().as_ref() == Some(&a) && self.c == a
    }
}

/// Outcome of an exhaustive `A = B = C` check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub s_max: usize,
    pub k_max: usize,
    pub all_equal: bool,
    pub first_failure: Option<(usize, usize)>,
    pub rows: Vec<IdentityRow>,
}

pub fn verify_identity(s_max: usize, k_max: usize) -> IdentityReport {
    let table = StirlingTable::new(2 * k_max + 2 * s_max);
    let mut rows = Vec::with_capacity((s_max + 1) * (k_max + 1));
    let mut first_failure = None;
    for s in 0..=s_max {
        for k in 0..=k_max {
            let row = IdentityRow {
                s,
                k,
                a: a_value(s, k),
                b: b_value(s, k),
                c: c_value_with(s, k, &table),
            };
            if first_failure.is_none() && !row.equal() {
                first_failure = Some((s, k));
            }
            rows.push(row);
        }
    }
    IdentityReport { s_max, k_max, all_equal: first_failure.is_none(), first_failure, rows }
}

/// `sum_{j=-k}^{k} (-1)^j C(2k, k+j) j^(2l)`.
pub fn stencil_moment(k: usize, l: usize) -> BigInt {
    let mut acc = BigInt::zero();
    let two_k = BigInt::from(2 * k);
    for j in -(k as i64)..=(k as i64) {
        let term = binomial(two_k.clone(), BigInt::from(k as i64 + j)) * BigInt::from(j).pow(2 * l as u32);
        if j.rem_euclid(2) == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Generalized binomial `binom(k - 1/2, m)`.
pub fn half_binomial(k: usize, m: usize) -> ExactRational {
    let mut num = BigInt::one();
    for i in 0..m {
        num *= BigInt::from(2 * k as i64 - 1 - 2 * i as i64);
    }
    let den = BigInt::from(factorial(m as u64)) * BigInt::from(2).pow(m as u32);
    ExactRational(BigRational::new(num, den))
}

/// Coefficient of `n^(-2l)` in the expansion of the order-`k` weight.
pub fn exact_series_coefficient(k: usize, l: usize) -> Result<ExactRational> {
    if k == 0 {
        return Err(invalid("k", "order must be at least 1"));
    }
    if l < k {
        return Err(invalid("l", format!("coefficient index {l} below the order {k}")));
    }
    let moment = ExactRational::from_integer(stencil_moment(k, l));
    Ok(half_binomial(k, 2 * l) * moment)
}

pub fn positivity_check(k: usize, l_max: usize) -> Result<bool> {
    if l_max < k {
        return Err(invalid("l_max", format!("must be at least the order {k}")));
    }
    for l in k..=l_max {
        if !exact_series_coefficient(k, l)?.is_positive() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> ExactRational {
        ExactRational::from_ratio(p, q).unwrap()
    }

    #[test]
    fn stirling_small_values() {
        assert_eq!(stirling2(4, 2), BigUint::from(7u32));
        assert_eq!(stirling2_explicit(4, 2), BigUint::from(7u32));
        assert_eq!(stirling2(3, 5), BigUint::zero());
        assert_eq!(stirling2(0, 0), BigUint::one());
        let t = StirlingTable::new(50);
        for n in 0..=50 {
            assert_eq!(t.get(n, n), BigUint::one());
        }
        assert_eq!(t.get(6, 4), BigUint::from(65u32));
        assert_eq!(t.get(5, 4), BigUint::from(10u32));
    }

    #[test]
    fn a_values() {
        assert_eq!(a_value(1, 2), BigUint::from(5u32));
        assert_eq!(a_value(2, 2), BigUint::from(21u32));
        assert_eq!(a_value(0, 7), BigUint::one());
        assert_eq!(a_value(0, 0), BigUint::zero());
        assert_eq!(a_value(3, 0), BigUint::zero());
        assert_eq!(a_nested(3, 4), a_value(3, 4));
    }

    #[test]
    fn b_values() {
        assert_eq!(b_value(1, 2), r(5, 1));
        assert_eq!(b_value(2, 2), r(21, 1));
        for s in 0..5 {
            assert!(b_value(s, 0).is_zero());
        }
        assert_eq!(b_value(0, 3), ExactRational::one());
    }

    #[test]
    fn c_values() {
        assert_eq!(c_value(1, 2), BigInt::from(5));
        for k in 1..8 {
            assert_eq!(c_value(0, k), BigInt::one());
        }
        assert_eq!(c_value(3, 1), BigInt::one());
        assert_eq!(c_value(0, 0), BigInt::zero());
    }

    #[test]
    fn identity_small_grids() {
        let rep = verify_identity(2, 2);
        assert!(rep.all_equal);
        assert_eq!(rep.rows.len(), 9);
        assert!(verify_identity(0, 5).all_equal);
        let rep = verify_identity(12, 12);
        assert!(rep.all_equal, "{:?}", rep.first_failure);
        assert_eq!(rep.first_failure, None);
    }

    #[test]
    fn series_coefficients() {
        assert!(exact_series_coefficient(2, 1).is_err());
        assert!(exact_series_coefficient(0, 1).is_err());
        assert_eq!(exact_series_coefficient(2, 2).unwrap(), r(9, 16));
        assert_eq!(exact_series_coefficient(1, 1).unwrap(), r(1, 4));
        assert_eq!(exact_series_coefficient(3, 3).unwrap(), r(225, 64));
        assert_eq!(exact_series_coefficient(2, 3).unwrap(), r(105, 128));
    }

    #[test]
    fn positivity_grid() {
        assert!(positivity_check(2, 22).unwrap());
        assert!(positivity_check(6, 26).unwrap());
        assert!(positivity_check(1, 21).unwrap());
        assert!(positivity_check(3, 2).is_err());
    }

    #[test]
    fn rational_display_and_reduction() {
        let x = r(6, -4);
        assert_eq!(x.to_string(), "-3/2");
        assert_eq!(x.denom(), &BigInt::from(2));
        assert_eq!(r(10, 5).to_string(), "2");
        assert!(ExactRational::from_ratio(1, 0).is_err());
    }
}
