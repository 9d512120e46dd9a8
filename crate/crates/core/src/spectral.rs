//! Smallest generalized eigenvalues `A v = λ W v` for banded `A` and diagonal
//! positive `W`.
//!
//! The count of eigenvalues below `σ` is the number of negative pivots in a
//! banded `LDL^T` of `A - σW` (congruent to `W^{-1/2} A W^{-1/2} - σ`), so
//! `λ_min` is found by bisection on that count and the eigenvector by inverse
//! iteration at the lower end of the final bracket. The matrices of interest
//! have condition numbers near `size^{2k}`, beyond binary64 for the larger
//! sizes, so the default arithmetic is the 256-bit [`Ext`].

use std::ops::{Add, Div, Mul, Sub};

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::operators::{build_matrix, BandedMatrix, BoundaryMode};
use crate::precision::{Ext, Precision};
use crate::weights::rho_k;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_SIZE: usize = 20_000;
const MAX_BISECTIONS: usize = 400;
const INVERSE_STEPS: usize = 3;

/// Arithmetic the factorization can run in.
trait Real:
    Clone + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn of(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_neg(&self) -> bool;
    fn is_zero(&self) -> bool;
    fn sqrt(&self) -> Self;
}

impl Real for f64 {
    fn of(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_neg(&self) -> bool {
        *self < 0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

impl Real for Ext {
    fn of(v: f64) -> Self {
        Ext::from_f64(v)
    }
    fn to_f64(&self) -> f64 {
        Ext::to_f64(self)
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn is_zero(&self) -> bool {
        Ext::is_zero(self)
    }
    fn sqrt(&self) -> Self {
        Ext::sqrt(self)
    }
}

/// `A - σW` with entries converted once.
struct Shifted<T> {
    p: usize,
    // bands[d][i] = A(i, i+d)
    bands: Vec<Vec<T>>,
    w: Vec<T>,
}

/// Unit lower band `L` and diagonal `D` with `LDL^T = A - σW`.
struct Factor<T> {
    p: usize,
    // l[j][d - 1] = L(j, j - d)
    l: Vec<Vec<T>>,
    d: Vec<T>,
    negatives: usize,
}

impl<T: Real> Shifted<T> {
    fn new(a: &BandedMatrix, w: &[f64]) -> Self {
        let p = a.bandwidth();
        let bands = (0..=p).map(|d| a.band(d).iter().map(|v| T::of(*v)).collect()).collect();
        Shifted { p, bands, w: w.iter().map(|v| T::of(*v)).collect() }
    }

    fn dim(&self) -> usize {
        self.w.len()
    }

    fn entry(&self, i: usize, j: usize) -> T {
        let (lo, d) = if i <= j { (i, j - i) } else { (j, i - j) };
        self.bands[d][lo].clone()
    }

    fn factor(&self, sigma: &T) -> Factor<T> {
        let n = self.dim();
        let p = self.p;
        let tiny = T::of(f64::MIN_POSITIVE);
        let mut l: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut d: Vec<T> = Vec::with_capacity(n);
        let mut negatives = 0;
        for j in 0..n {
            let first = j.saturating_sub(p);
            let mut row: Vec<T> = vec![T::of(0.0); j - first];
            // L(j, i) for first <= i < j
            for i in first..j {
                let mut acc = self.entry(j, i);
                for k in first..i {
                    if i - k > p {
                        continue;
                    }
                    let ljk = row[j - k - 1].clone();
                    let lik = l[i][i - k - 1].clone();
                    acc = acc - ljk * lik * d[k].clone();
                }
                row[j - i - 1] = acc / d[i].clone();
            }
            let mut piv = self.entry(j, j) - sigma.clone() * self.w[j].clone();
            for k in first..j {
                let ljk = row[j - k - 1].clone();
                piv = piv - ljk.clone() * ljk * d[k].clone();
            }
            if piv.is_zero() {
                piv = tiny.clone();
            }
            if piv.is_neg() {
                negatives += 1;
            }
            l.push(row);
            d.push(piv);
        }
        Factor { p, l, d, negatives }
    }

    fn count_below(&self, sigma: f64) -> usize {
        self.factor(&T::of(sigma)).negatives
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(self.p);
                let hi = (i + self.p).min(n - 1);
                let mut acc = T::of(0.0);
                for j in lo..=hi {
                    acc = acc + self.entry(i, j) * x[j].clone();
                }
                acc
            })
            .collect()
    }
}

impl<T: Real> Factor<T> {
    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = b.len();
        let mut y: Vec<T> = b.to_vec();
        for j in 0..n {
            for d in 1..=self.p.min(j) {
                y[j] = y[j].clone() - self.l[j][d - 1].clone() * y[j - d].clone();
            }
        }
        for j in 0..n {
            y[j] = y[j].clone() / self.d[j].clone();
        }
        for j in (0..n).rev() {
            for d in 1..=self.p.min(n - 1 - j) {
                let i = j + d;
                y[j] = y[j].clone() - self.l[i][d - 1].clone() * y[i].clone();
            }
        }
        y
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    let mut acc = T::of(0.0);
    for x in v {
        acc = acc + x.clone() * x.clone();
    }
    acc.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub precision: Precision,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOL, precision: Precision::Extended }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub size: usize,
    pub lambda_min: f64,
    /// `‖Av - λWv‖ / ‖v‖` for the computed eigenvector.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Smallest `λ` with `Av = λWv`, to absolute accuracy `tol` (relative once
/// `|λ| > 1`).
pub fn min_gen_eig(a: &BandedMatrix, w: &[f64], tol: f64) -> Result<SpectralEstimate> {
    min_gen_eig_with(a, w, &SolverOptions { tol, ..Default::default() })
}

pub fn min_gen_eig_with(a: &BandedMatrix, w: &[f64], opts: &SolverOptions) -> Result<SpectralEstimate> {
    if w.len() != a.dimension() {
        return Err(invalid("w", format!("{} weights for dimension {}", w.len(), a.dimension())));
    }
    if let Some(i) = w.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid("w", format!("entry {i} is not positive")));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(invalid("tol", "must be positive"));
    }
    if a.dimension() > MAX_SIZE {
        return Err(invalid("size", format!("capped at {MAX_SIZE}")));
    }
    Ok(match opts.precision {
        Precision::Binary64 => solve::<f64>(a, w, opts.tol),
        Precision::Extended => solve::<Ext>(a, w, opts.tol),
    })
}

/// Number of generalized eigenvalues below `sigma` (negative pivots of `A - σW`).
pub fn count_below(a: &BandedMatrix, w: &[f64], sigma: f64, precision: Precision) -> usize {
    match precision {
        Precision::Binary64 => Shifted::<f64>::new(a, w).count_below(sigma),
        Precision::Extended => Shifted::<Ext>::new(a, w).count_below(sigma),
    }
}

/// Gershgorin lower bound for `W^{-1/2} A W^{-1/2}` and the smallest diagonal
/// Rayleigh quotient as an upper bound.
fn bracket(a: &BandedMatrix, w: &[f64]) -> (f64, f64) {
    let n = a.dimension();
    let p = a.bandwidth();
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let diag = a.entry(i, i) / w[i];
        let mut radius = 0.0;
        for j in i.saturating_sub(p)..=(i + p).min(n - 1) {
            if j != i {
                radius += a.entry(i, j).abs() / (w[i] * w[j]).sqrt();
            }
        }
        lo = lo.min(diag - radius);
        hi = hi.min(diag);
    }
    (lo, hi)
}

fn solve<T: Real>(a: &BandedMatrix, w: &[f64], tol: f64) -> SpectralEstimate {
    let m: Shifted<T> = Shifted::new(a, w);
    let (mut lo, mut hi) = bracket(a, w);
    if lo < 0.0 && m.count_below(0.0) == 0 {
        lo = 0.0;
    }
    // make sure the upper end lies above the smallest eigenvalue
    let mut step = hi.abs().max(1.0) * 1e-12;
    while m.count_below(hi) == 0 {
        hi += step;
        step *= 2.0;
    }
    let mut iterations = 0;
    while hi - lo > tol * hi.abs().max(1.0) && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m.count_below(mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let bracketed = hi - lo <= tol * hi.abs().max(1.0);
    let lambda = 0.5 * (lo + hi);

    let factor = m.factor(&T::of(lo));
    let n = m.dim();
    let mut v: Vec<T> = (0..n).map(|i| T::of(1.0 + 0.5 * (i as f64).sin())).collect();
    for _ in 0..INVERSE_STEPS {
        let rhs: Vec<T> = v.iter().zip(&m.w).map(|(x, wi)| x.clone() * wi.clone()).collect();
        let x = factor.solve(&rhs);
        let nx = norm(&x);
        v = x.into_iter().map(|xi| xi / nx.clone()).collect();
        iterations += 1;
    }
    let av = m.apply(&v);
    let lam = T::of(lambda);
    let r: Vec<T> = av
        .into_iter()
        .zip(v.iter().zip(&m.w))
        .map(|(ai, (vi, wi))| ai - lam.clone() * wi.clone() * vi.clone())
        .collect();
    let residual = (norm(&r) / norm(&v)).to_f64();
    SpectralEstimate {
        size: n,
        lambda_min: lambda,
        residual,
        iterations,
        converged: bracketed && residual.is_finite() && residual <= tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSweep {
    pub sizes: Vec<usize>,
    pub estimates: Vec<SpectralEstimate>,
    pub monotone_nonincreasing: bool,
    /// Aitken extrapolation from the last three sizes; diagnostic only.
    pub extrapolation: Option<f64>,
}

impl TruncationSweep {
    fn from_estimates(sizes: Vec<usize>, estimates: Vec<SpectralEstimate>, tol: f64) -> Self {
        let monotone_nonincreasing = estimates
            .windows(2)
            .all(|p| p[1].lambda_min <= p[0].lambda_min + 10.0 * tol * p[0].lambda_min.abs().max(1.0));
        let extrapolation = match estimates.len() {
            n if n >= 3 => aitken(
                estimates[n - 3].lambda_min,
                estimates[n - 2].lambda_min,
                estimates[n - 1].lambda_min,
            ),
            _ => None,
        };
        TruncationSweep { sizes, estimates, monotone_nonincreasing, extrapolation }
    }

    pub fn min_lambda(&self) -> f64 {
        self.estimates.iter().map(|e| e.lambda_min).fold(f64::INFINITY, f64::min)
    }

    pub fn all_converged(&self) -> bool {
        self.estimates.iter().all(|e| e.converged)
    }
}

/// `Δ^2` extrapolation of three successive values.
pub fn aitken(a: f64, b: f64, c: f64) -> Option<f64> {
    let den = a - 2.0 * b + c;
    (den != 0.0 && den.is_finite()).then(|| c - (c - b).powi(2) / den)
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(invalid("sizes", "empty list"));
    }
    if sizes.windows(2).any(|p| p[1] <= p[0]) {
        return Err(invalid("sizes", "must be strictly increasing"));
    }
    if sizes[0] == 0 {
        return Err(invalid("sizes", "must be positive"));
    }
    Ok(())
}

fn run_sweep(
    sizes: &[usize],
    opts: &SolverOptions,
    problem: impl Fn(usize) -> Result<(BandedMatrix, Vec<f64>)> + Sync,
) -> Result<TruncationSweep> {
    check_sizes(sizes)?;
    let estimates: Vec<SpectralEstimate> = sizes
        .par_iter()
        .map(|&s| {
            let (a, w) = problem(s)?;
            min_gen_eig_with(&a, &w, opts)
        })
        .collect::<Result<_>>()?;
    Ok(TruncationSweep::from_estimates(sizes.to_vec(), estimates, opts.tol))
}

fn weight_diagonal(k: usize, first: usize, size: usize) -> Result<Vec<f64>> {
    (first..first + size).map(|n| rho_k(k, n)).collect()
}

/// Dirichlet matrix of order `k` from row `k` against the weight `ρ^(k)`.
pub fn sanity_problem(k: usize, size: usize) -> Result<(BandedMatrix, Vec<f64>)> {
    let a = build_matrix(size, k, BoundaryMode::Dirichlet(k))?;
    Ok((a, weight_diagonal(k, k, size)?))
}

pub fn hardy_sanity_sweep(sizes: &[usize], opts: &SolverOptions) -> Result<TruncationSweep> {
    run_sweep(sizes, opts, |s| sanity_problem(1, s))
}

pub fn rellich_sanity_sweep(sizes: &[usize], opts: &SolverOptions) -> Result<TruncationSweep> {
    run_sweep(sizes, opts, |s| sanity_problem(2, s))
}

/// Full-space order-two matrix (first row `5 -4 1`) against `W = diag(1/n^4)`.
pub fn best_constant_problem(size: usize) -> Result<(BandedMatrix, Vec<f64>)> {
    let a = build_matrix(size, 2, BoundaryMode::FullSpace)?;
    let w = (1..=size).map(|n| (n as f64).powi(-4)).collect();
    Ok((a, w))
}

/// Upper estimates for the best `c` in `Δ^2 >= c/n^4` on the full space.
pub fn best_constant_sweep(sizes: &[usize], opts: &SolverOptions) -> Result<TruncationSweep> {
    run_sweep(sizes, opts, best_constant_problem)
}

/// Smallest ordinary eigenvalues of `A - diag(ρ^(k))` for `k >= 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureEvidence {
    pub k: usize,
    pub sweep: TruncationSweep,
    /// `‖A‖_∞` per size.
    pub norms: Vec<f64>,
    /// `A - W` has no negative pivot at shift zero, per size.
    pub positive_definite: Vec<bool>,
    /// Every smallest eigenvalue is at least `-tol ‖A‖`. Numerical evidence only.
    pub evidence: bool,
    pub tol: f64,
}

pub fn conjecture_problem(k: usize, size: usize) -> Result<(BandedMatrix, Vec<f64>)> {
    let a = build_matrix(size, k, BoundaryMode::Dirichlet(k))?;
    let rho = weight_diagonal(k, k, size)?;
    let mut bands: Vec<Vec<f64>> = (0..=a.bandwidth()).map(|d| a.band(d).to_vec()).collect();
    for (b, r) in bands[0].iter_mut().zip(&rho) {
        *b -= r;
    }
    Ok((BandedMatrix::from_bands(bands, a.boundary_mode())?, vec![1.0; size]))
}

pub fn conjecture_evidence(k: usize, sizes: &[usize], opts: &SolverOptions, tol: f64) -> Result<ConjectureEvidence> {
    if k < 3 {
        return Err(invalid("k", "the conjecture concerns k >= 3"));
    }
    let sweep = run_sweep(sizes, opts, |s| conjecture_problem(k, s))?;
    let norms: Vec<f64> = sizes
        .iter()
        .map(|&s| build_matrix(s, k, BoundaryMode::Dirichlet(k)).map(|a| a.norm_inf()))
        .collect::<Result<_>>()?;
    let positive_definite = sizes
        .par_iter()
        .map(|&s| conjecture_problem(k, s).map(|(a, w)| count_below(&a, &w, 0.0, opts.precision) == 0))
        .collect::<Result<_>>()?;
    let evidence = sweep.estimates.iter().zip(&norms).all(|(e, nrm)| e.lambda_min >= -tol * nrm);
    Ok(ConjectureEvidence { k, sweep, norms, positive_definite, evidence, tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_full_space() {
        let (a, w) = best_constant_problem(2).unwrap();
        let e = min_gen_eig(&a, &w, 1e-12).unwrap();
        let expect = (101.0 - 9305f64.sqrt()) / 2.0;
        assert!((e.lambda_min - expect).abs() < 1e-10, "{e:?}");
        assert!(e.converged);
        let (a, w) = best_constant_problem(1).unwrap();
        assert!((min_gen_eig(&a, &w, 1e-12).unwrap().lambda_min - 5.0).abs() < 1e-10);
    }

    #[test]
    fn scalar_hardy() {
        let (a, w) = sanity_problem(1, 1).unwrap();
        let e = min_gen_eig(&a, &w, 1e-12).unwrap();
        assert!((e.lambda_min - (2.0 + 2f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn toeplitz_with_identity() {
        let a = build_matrix(3, 1, BoundaryMode::Dirichlet(1)).unwrap();
        let e = min_gen_eig(&a, &[1.0; 3], 1e-12).unwrap();
        assert!((e.lambda_min - (2.0 - 2f64.sqrt())).abs() < 1e-10);
        let f = min_gen_eig_with(&a, &[1.0; 3], &SolverOptions { tol: 1e-12, precision: Precision::Binary64 }).unwrap();
        assert!((f.lambda_min - e.lambda_min).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_weights() {
        let a = build_matrix(3, 1, BoundaryMode::Dirichlet(1)).unwrap();
        assert!(min_gen_eig(&a, &[1.0, 0.0, 1.0], 1e-10).is_err());
        assert!(min_gen_eig(&a, &[1.0, 1.0], 1e-10).is_err());
    }

    #[test]
    fn aitken_on_geometric_tail() {
        let f = |i: i32| 2.0 + 0.5f64.powi(i);
        assert!((aitken(f(1), f(2), f(3)).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn conjecture_probe_diagonal() {
        let (a, _) = conjecture_problem(3, 4).unwrap();
        assert!((a.entry(0, 0) - (20.0 - rho_k(3, 3).unwrap())).abs() < 1e-14);
    }
}
