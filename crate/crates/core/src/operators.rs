//! Discrete Dirichlet Laplacian on the half-line, its powers, quadratic forms
//! and truncated banded matrices.

use crate::error::{invalid, LabError, Result};
use crate::weights::WeightSpec;

/// Finitely supported real sequence indexed from 0 whose first
/// `boundary_order` entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSequence {
    values: Vec<f64>,
    boundary_order: usize,
}

impl FiniteSequence {
    pub fn new(values: Vec<f64>, boundary_order: usize) -> Result<Self> {
        if let Some(n) = values.iter().take(boundary_order).position(|v| *v != 0.0) {
            return Err(LabError::Domain { index: n as u64, requirement: "zero inside the boundary layer" });
        }
        Ok(FiniteSequence { values, boundary_order })
    }

    /// Builds `u_n = f(n)` for `boundary_order <= n < len`, zero below.
    pub fn from_fn(len: usize, boundary_order: usize, mut f: impl FnMut(usize) -> f64) -> Self {
        let values = (0..len).map(|n| if n < boundary_order { 0.0 } else { f(n) }).collect();
        FiniteSequence { values, boundary_order }
    }

    /// Sequence with no boundary constraint.
    pub fn unconstrained(values: Vec<f64>) -> Self {
        FiniteSequence { values, boundary_order: 0 }
    }

    pub fn zeros(len: usize, boundary_order: usize) -> Self {
        FiniteSequence { values: vec![0.0; len], boundary_order }
    }

    /// Unit vector `e_i`, with boundary order `i`.
    pub fn unit(i: usize) -> Self {
        let mut values = vec![0.0; i + 1];
        values[i] = 1.0;
        FiniteSequence { values, boundary_order: i }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn boundary_order(&self) -> usize {
        self.boundary_order
    }

    /// Entry `n`, zero past the stored range.
    pub fn get(&self, n: usize) -> f64 {
        self.values.get(n).copied().unwrap_or(0.0)
    }

    /// Index of the last nonzero entry.
    pub fn support_end(&self) -> Option<usize> {
        self.values.iter().rposition(|v| *v != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.support_end().is_none()
    }

    pub fn dot(&self, other: &FiniteSequence) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// `(-Δu)_0 = 2u_0 - u_1`, `(-Δu)_n = -u_{n-1} + 2u_n - u_{n+1}`.
pub fn apply_neg_laplacian(u: &FiniteSequence) -> FiniteSequence {
    let len = u.support_end().map_or(u.len().max(1), |s| s + 2).max(u.len());
    let values = (0..len)
        .map(|n| {
            let left = if n == 0 { 0.0 } else { u.get(n - 1) };
            2.0 * u.get(n) - left - u.get(n + 1)
        })
        .collect();
    FiniteSequence { values, boundary_order: 0 }
}

pub fn apply_power(u: &FiniteSequence, k: usize) -> Result<FiniteSequence> {
    if k == 0 {
        return Err(invalid("k", "power must be at least 1"));
    }
    let mut out = apply_neg_laplacian(u);
    for _ in 1..k {
        out = apply_neg_laplacian(&out);
    }
    Ok(out)
}

fn require_boundary(u: &FiniteSequence, k: usize) -> Result<()> {
    if k == 0 {
        return Err(invalid("k", "power must be at least 1"));
    }
    if u.boundary_order() < k {
        return Err(LabError::BoundaryOrder { found: u.boundary_order(), required: k });
    }
    Ok(())
}

/// `sum_{n>=0} ((-Δ)^k u)_n u_n`.
pub fn quadratic_form(u: &FiniteSequence, k: usize) -> Result<f64> {
    require_boundary(u, k)?;
    Ok(apply_power(u, k)?.dot(u))
}

/// `sum_{n>=1} |(-Δu)_n|^2`, the second route to the order-two form.
pub fn laplacian_norm_sq(u: &FiniteSequence) -> Result<f64> {
    require_boundary(u, 2)?;
    Ok(apply_neg_laplacian(u).values().iter().skip(1).map(|v| v * v).sum())
}

/// `sum_{n>=1} |u_{n-1} - u_n|^2`, the second route to the order-one form.
pub fn gradient_norm_sq(u: &FiniteSequence) -> Result<f64> {
    require_boundary(u, 1)?;
    let end = u.len() + 1;
    Ok((1..end).map(|n| (u.get(n - 1) - u.get(n)).powi(2)).sum())
}

/// Weighted sum `sum_{n>=k} rho_n u_n^2`.
pub fn weighted_norm_sq(u: &FiniteSequence, weight: &WeightSpec) -> Result<f64> {
    let k = weight.order();
    let mut acc = 0.0;
    for (n, v) in u.values().iter().enumerate().skip(k) {
        if *v != 0.0 {
            acc += weight.rho(n)? * v * v;
        }
    }
    Ok(acc)
}

pub fn rayleigh_quotient(u: &FiniteSequence, k: usize, weight: &WeightSpec) -> Result<f64> {
    if weight.order() != k {
        return Err(invalid("weight", format!("order {} does not match k = {k}", weight.order())));
    }
    let num = quadratic_form(u, k)?;
    let den = weighted_norm_sq(u, weight)?;
    if den == 0.0 {
        return Err(LabError::ZeroDenominator);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Rows `n >= M` of the power taken on the half-line `{0, 1, ...}`.
    Dirichlet(usize),
    /// Power of the operator restricted to `{1, 2, ...}`.
    FullSpace,
}

impl BoundaryMode {
    /// Sequence index of matrix row 0.
    pub fn first_index(&self) -> usize {
        match self {
            BoundaryMode::Dirichlet(m) => *m,
            BoundaryMode::FullSpace => 1,
        }
    }
}

/// Symmetric band matrix; `bands[d][i]` holds entry `(i, i + d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    bands: Vec<Vec<f64>>,
    mode: BoundaryMode,
}

impl BandedMatrix {
    pub fn from_bands(bands: Vec<Vec<f64>>, mode: BoundaryMode) -> Result<Self> {
        let dim = bands.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(invalid("bands", "empty matrix"));
        }
        for (d, b) in bands.iter().enumerate() {
            if b.len() != dim.saturating_sub(d) {
                return Err(invalid("bands", format!("band {d} has length {}", b.len())));
            }
        }
        Ok(BandedMatrix { dim, bands, mode })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn band(&self, d: usize) -> &[f64] {
        &self.bands[d]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d >= self.bands.len() || hi >= self.dim {
            0.0
        } else {
            self.bands[d][lo]
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.bands[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (d, band) in self.bands.iter().enumerate().skip(1) {
            for (i, a) in band.iter().enumerate() {
                y[i] += a * x[i + d];
                y[i + d] += a * x[i];
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth());
                let hi = (i + self.bandwidth()).min(self.dim - 1);
                (lo..=hi).map(|j| self.entry(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Exact bands of `T^k` for the tridiagonal `T` (2 on the diagonal, -1 off it)
/// on `dim` indices; `bands[d][i]` is entry `(i, i + d)`.
fn tridiagonal_power(dim: usize, k: usize) -> Vec<Vec<i64>> {
    // full row-wise band storage, offsets -k..=k
    let w = 2 * k + 1;
    let mut cur = vec![vec![0i64; w]; dim];
    for row in cur.iter_mut() {
        row[k] = 1;
    }
    for _ in 0..k {
        let mut next = vec![vec![0i64; w]; dim];
        for i in 0..dim {
            for off in 0..w {
                let j = i as i64 + off as i64 - k as i64;
                if j < 0 || j >= dim as i64 {
                    continue;
                }
                let j = j as usize;
                let mut acc = 2 * cur[i][off];
                if j >= 1 && off >= 1 {
                    acc -= cur[i][off - 1];
                }
                if j + 1 < dim && off + 1 < w {
                    acc -= cur[i][off + 1];
                }
                next[i][off] = acc;
            }
        }
        cur = next;
    }
    (0..=k)
        .map(|d| (0..dim.saturating_sub(d)).map(|i| cur[i][k + d]).collect())
        .collect()
}

/// Truncation of `(-Δ)^k` to `size` rows in the given mode.
pub fn build_matrix(size: usize, k: usize, mode: BoundaryMode) -> Result<BandedMatrix> {
    if size == 0 {
        return Err(invalid("size", "must be positive"));
    }
    if k == 0 {
        return Err(invalid("k", "power must be at least 1"));
    }
    let (offset, dim) = match mode {
        BoundaryMode::Dirichlet(m) => (m, m + size + k),
        BoundaryMode::FullSpace => (0, size + k),
    };
    let full = tridiagonal_power(dim, k);
    let bands = full
        .iter()
        .enumerate()
        .map(|(d, band)| {
            let len = size.saturating_sub(d);
            band[offset..offset + len].iter().map(|v| *v as f64).collect()
        })
        .collect();
    BandedMatrix::from_bands(bands, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::Precision;
    use crate::weights::{rho1, rho2};

    #[test]
    fn laplacian_of_unit_vector() {
        let v = apply_neg_laplacian(&FiniteSequence::unit(2));
        assert_eq!(v.values(), &[0.0, -1.0, 2.0, -1.0]);
        assert_eq!(v.support_end(), Some(3));
    }

    #[test]
    fn linear_sequence_is_harmonic_inside() {
        let u = FiniteSequence::from_fn(20, 0, |n| n as f64);
        let v = apply_neg_laplacian(&u);
        for n in 1..19 {
            assert_eq!(v.get(n), 0.0);
        }
    }

    #[test]
    fn laplacian_of_hardy_ground_state() {
        let u = FiniteSequence::from_fn(200, 0, |n| (n as f64).sqrt());
        let v = apply_neg_laplacian(&u);
        for n in 1..199 {
            let expect = rho1(n).unwrap() * (n as f64).sqrt();
            assert!((v.get(n) - expect).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn bilaplacian_stencil() {
        let v = apply_power(&FiniteSequence::unit(2), 2).unwrap();
        assert_eq!(&v.values()[0..5], &[1.0, -4.0, 6.0, -4.0, 1.0]);
        let u = FiniteSequence::from_fn(30, 0, |n| (n as f64).powi(3));
        let w = apply_power(&u, 2).unwrap();
        for n in 2..27 {
            assert_eq!(w.get(n), 0.0);
        }
        assert_eq!(apply_power(&u, 1).unwrap(), apply_neg_laplacian(&u));
        assert!(apply_power(&u, 0).is_err());
    }

    #[test]
    fn quadratic_forms_of_unit_vectors() {
        let e2 = FiniteSequence::unit(2);
        assert_eq!(quadratic_form(&e2, 2).unwrap(), 6.0);
        assert_eq!(laplacian_norm_sq(&e2).unwrap(), 6.0);
        let e1 = FiniteSequence::unit(1);
        assert_eq!(quadratic_form(&e1, 1).unwrap(), 2.0);
        assert_eq!(gradient_norm_sq(&e1).unwrap(), 2.0);
        assert!(matches!(quadratic_form(&e1, 2), Err(LabError::BoundaryOrder { .. })));
    }

    #[test]
    fn rayleigh_of_unit_vector() {
        let weight = WeightSpec::new(2, Precision::Binary64).unwrap();
        let q = rayleigh_quotient(&FiniteSequence::unit(2), 2, &weight).unwrap();
        assert!((q - 6.0 / rho2(2).unwrap()).abs() < 1e-12);
        assert!((q - 91.26325).abs() < 1e-3);
        let zero = FiniteSequence::zeros(5, 2);
        assert_eq!(rayleigh_quotient(&zero, 2, &weight), Err(LabError::ZeroDenominator));
    }

    #[test]
    fn boundary_layer_is_checked() {
        assert!(FiniteSequence::new(vec![0.0, 1.0], 2).is_err());
        assert!(FiniteSequence::new(vec![0.0, 0.0, 1.0], 2).is_ok());
    }

    #[test]
    fn displayed_matrices() {
        let a = build_matrix(2, 2, BoundaryMode::FullSpace).unwrap();
        assert_eq!(a.to_dense(), vec![vec![5.0, -4.0], vec![-4.0, 6.0]]);
        let t = build_matrix(3, 1, BoundaryMode::FullSpace).unwrap();
        assert_eq!(
            t.to_dense(),
            vec![vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]
        );
        let d = build_matrix(3, 2, BoundaryMode::Dirichlet(2)).unwrap();
        assert_eq!(
            d.to_dense(),
            vec![vec![6.0, -4.0, 1.0], vec![-4.0, 6.0, -4.0], vec![1.0, -4.0, 6.0]]
        );
        assert_eq!(d.bandwidth(), 2);
        let f = build_matrix(6, 2, BoundaryMode::FullSpace).unwrap();
        assert_eq!(f.band(0), &[5.0, 6.0, 6.0, 6.0, 6.0, 6.0]);
        assert_eq!(build_matrix(1, 2, BoundaryMode::FullSpace).unwrap().entry(0, 0), 5.0);
        let c = build_matrix(4, 3, BoundaryMode::Dirichlet(3)).unwrap();
        assert_eq!(c.band(0), &[20.0; 4]);
        assert_eq!(c.band(3), &[-1.0]);
    }
}
