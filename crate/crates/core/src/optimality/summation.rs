//! Sums of smooth terms over very long integer ranges.
//!
//! A range is split at the points where the summand stops being smooth; each
//! long smooth segment is summed by Euler-Maclaurin with the integral taken by
//! Gauss-Legendre panels in `log x`. Short segments are summed term by term.

use gauss_quad::GaussLegendre;

use crate::numeric::NeumaierSum;

const DIRECT_BELOW: u64 = 32;
const PANEL_WIDTH: f64 = 0.25;
const NODES: usize = 16;

pub(crate) struct SegmentSummer {
    rule: GaussLegendre,
}

impl SegmentSummer {
    pub(crate) fn new() -> Self {
        SegmentSummer { rule: GaussLegendre::new(NODES).expect("node count is valid") }
    }

    /// `Σ_{n=lo}^{hi} f(n)`, where `f` is smooth on every interval between
    /// consecutive `cuts` (given as reals, in any order).
    pub(crate) fn sum(&self, lo: u64, hi: u64, cuts: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        let mut inner: Vec<u64> = cuts
            .iter()
            .map(|c| c.ceil())
            .filter(|c| *c > lo as f64 && *c <= hi as f64)
            .map(|c| c as u64)
            .collect();
        inner.sort_unstable();
        inner.dedup();
        let mut acc = NeumaierSum::default();
        let mut start = lo;
        for c in inner.into_iter().chain(std::iter::once(hi + 1)) {
            acc.add(self.segment(start, c - 1, &f));
            start = c;
        }
        acc.total()
    }

    fn segment(&self, a: u64, b: u64, f: &impl Fn(f64) -> f64) -> f64 {
        if b < a {
            return 0.0;
        }
        if b - a + 1 < DIRECT_BELOW {
            return (a..=b).map(|n| f(n as f64)).collect::<NeumaierSum>().total();
        }
        let (af, bf) = (a as f64, b as f64);
        let (ua, ub) = (af.ln(), bf.ln());
        let panels = ((ub - ua) / PANEL_WIDTH).ceil().max(1.0) as usize;
        let width = (ub - ua) / panels as f64;
        let mut integral = NeumaierSum::default();
        for i in 0..panels {
            let lo = ua + i as f64 * width;
            let hi = if i + 1 == panels { ub } else { lo + width };
            integral.add(self.rule.integrate(lo, hi, |u| {
                let x = u.exp().clamp(af, bf);
                f(x) * x
            }));
        }
        integral.total() + 0.5 * (f(af) + f(bf)) + (derivative(f, bf, -1.0) - derivative(f, af, 1.0)) / 12.0
    }
}

/// `f'(x)` from five unit steps in direction `dir`, fourth order.
fn derivative(f: &impl Fn(f64) -> f64, x: f64, dir: f64) -> f64 {
    const W: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    dir * W.iter().enumerate().map(|(i, w)| w * f(x + dir * i as f64)).sum::<f64>() / 12.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_sums() {
        let s = SegmentSummer::new();
        let exact: f64 = (1000..=200_000u64).map(|n| 1.0 / (n as f64).powi(2)).sum();
        let got = s.sum(1000, 200_000, &[], |x| 1.0 / (x * x));
        assert!((got / exact - 1.0).abs() < 1e-12, "{got} {exact}");
    }

    #[test]
    fn cuts_handle_kinks() {
        let s = SegmentSummer::new();
        let f = |x: f64| if x < 5000.5 { x.sqrt() } else { 1.0 / x };
        let exact: f64 = (100..=90_000u64).map(|n| f(n as f64)).sum();
        let got = s.sum(100, 90_000, &[5000.5, 3.0, 1e9], f);
        assert!((got / exact - 1.0).abs() < 1e-12, "{got} {exact}");
    }
}
