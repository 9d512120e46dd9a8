//! Piecewise-logarithmic cut-off sequences and their differences.
//!
//! The differences `ξ_n - ξ_{n+1}` and `-ξ_n + 2ξ_{n+1} - ξ_{n+2}` are of size
//! `1/(n log N)` and `1/(n^2 log N)` while `ξ` itself is of order one, so they
//! are formed from the closed forms rather than by subtracting values.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Result};

pub const DEFAULT_EPSILON: f64 = 0.1;

// P(t) = 10 t^3 - 15 t^4 + 6 t^5
const SMOOTHSTEP: [(i32, f64); 3] = [(3, 10.0), (4, -15.0), (5, 6.0)];

fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid("epsilon", format!("{epsilon} is not in (0, 1/2)")));
    }
    Ok(())
}

/// Quintic smoothstep on `[ε, 1-ε]`: zero below, one above, `C^2` throughout.
pub fn mollifier(t: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(smoothstep((t - epsilon) / (1.0 - 2.0 * epsilon)))
}

/// Suprema of `|η'|` and `|η''|` for the mollifier with parameter `ε`.
pub fn mollifier_derivative_bounds(epsilon: f64) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    let w = 1.0 - 2.0 * epsilon;
    // P' peaks at 15/8 (t = 1/2), |P''| at 10/sqrt(3) (t = 1/2 ± sqrt(3)/6)
    Ok((15.0 / 8.0 / w, 10.0 / 3f64.sqrt() / (w * w)))
}

/// `P[t, t+h]`.
fn dd1(t: f64, h: f64) -> f64 {
    let u = t + h;
    SMOOTHSTEP
        .iter()
        .map(|&(m, c)| c * (0..m).map(|i| u.powi(i) * t.powi(m - 1 - i)).sum::<f64>())
        .sum()
}

/// Complete homogeneous polynomial of degree `d` in three variables.
fn complete_h(d: i32, t0: f64, t1: f64, t2: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..=d {
        for j in 0..=d - i {
            acc += t0.powi(i) * t1.powi(j) * t2.powi(d - i - j);
        }
    }
    acc
}

/// `P[t0, t1, t2]`.
fn dd2(t0: f64, t1: f64, t2: f64) -> f64 {
    SMOOTHSTEP.iter().map(|&(m, c)| c * complete_h(m - 2, t0, t1, t2)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Const(f64),
    /// `v_a + (v_b - v_a) log(x/a) / log(b/a)`.
    LogRamp { a: f64, b: f64, va: f64, vb: f64 },
    /// As `LogRamp` with the mollifier applied to the logarithmic coordinate.
    SmoothRamp { a: f64, b: f64, va: f64, vb: f64, epsilon: f64 },
}

/// A shape on the closed interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub shape: Shape,
}

/// Rescaled coordinate `t` together with `1 - t`, each from its own logarithm.
#[derive(Debug, Clone, Copy)]
struct Coord {
    t: f64,
    tc: f64,
}

impl Shape {
    fn coord(a: f64, b: f64, epsilon: f64, x: f64) -> Coord {
        let l = (b / a).ln();
        let w = 1.0 - 2.0 * epsilon;
        Coord {
            t: ((x / a).ln() / l - epsilon) / w,
            tc: ((b / x).ln() / l - epsilon) / w,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Shape::Const(v) => v,
            Shape::LogRamp { a, b, va, vb } => va + (vb - va) * (x / a).ln() / (b / a).ln(),
            Shape::SmoothRamp { a, b, va, vb, epsilon } => {
                let c = Self::coord(a, b, epsilon, x);
                if c.t <= 0.5 {
                    va + (vb - va) * smoothstep(c.t)
                } else {
                    vb - (vb - va) * smoothstep(c.tc)
                }
            }
        }
    }

    /// `value(x) - value(y)` for `x < y`.
    pub fn diff(&self, x: f64, y: f64) -> f64 {
        match *self {
            Shape::Const(_) => 0.0,
            Shape::LogRamp { a, b, va, vb } => -(vb - va) / (b / a).ln() * ((y - x) / x).ln_1p(),
            Shape::SmoothRamp { a, b, va, vb, epsilon } => {
                let cx = Self::coord(a, b, epsilon, x);
                let cy = Self::coord(a, b, epsilon, y);
                // t_y - t_x
                let h = ((y - x) / x).ln_1p() / ((b / a).ln() * (1.0 - 2.0 * epsilon));
                (vb - va) * step_diff(cx, cy, h)
            }
        }
    }

    /// `-value(x) + 2 value(x+1) - value(x+2)`, or `None` when the stencil
    /// meets a point where the shape is not polynomial in `log x`.
    pub fn second_diff(&self, x: f64) -> Option<f64> {
        let q = (1.0 / (x * (x + 2.0))).ln_1p();
        match *self {
            Shape::Const(_) => Some(0.0),
            Shape::LogRamp { a, b, va, vb } => Some((vb - va) / (b / a).ln() * q),
            Shape::SmoothRamp { a, b, va, vb, epsilon } => {
                let c: Vec<Coord> = (0..3).map(|i| Self::coord(a, b, epsilon, x + i as f64)).collect();
                let scale = (b / a).ln() * (1.0 - 2.0 * epsilon);
                let h1 = (1.0 / x).ln_1p() / scale;
                let h2 = (1.0 / (x + 1.0)).ln_1p() / scale;
                // h2 - h1 without cancellation
                let dh = -q / scale;
                let inside = |t: f64| (0.0..=1.0).contains(&t);
                if c.iter().all(|c| c.t <= 0.0) || c.iter().all(|c| c.t >= 1.0) {
                    return Some(0.0);
                }
                if !c.iter().all(|c| inside(c.t)) {
                    return None;
                }
                // P(t0) - 2P(t1) + P(t2) = (h2 - h1) P[t1,t2] + h1 (t2 - t0) P[t0,t1,t2]
                let d2p = if c[1].t <= 0.5 {
                    dh * dd1(c[1].t, h2) + h1 * (h1 + h2) * dd2(c[0].t, c[1].t, c[2].t)
                } else {
                    // in 1 - t the spacings change sign and P(t) = 1 - P(1 - t)
                    let s = -dh * dd1(c[1].tc, -h2) + h1 * (h1 + h2) * dd2(c[0].tc, c[1].tc, c[2].tc);
                    -s
                };
                Some(-(vb - va) * d2p)
            }
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match *self {
            Shape::SmoothRamp { a, b, epsilon, .. } => {
                let r = b / a;
                vec![a * r.powf(epsilon), a * r.powf(1.0 - epsilon)]
            }
            _ => Vec::new(),
        }
    }
}

/// `P(t_y) - P(t_x)` with clamping, negated: returns `P(t_x) - P(t_y)`.
/// `h = t_y - t_x > 0`.
fn step_diff(cx: Coord, cy: Coord, h: f64) -> f64 {
    if cy.t <= 0.0 || cx.t >= 1.0 {
        return 0.0;
    }
    let both_inside = cx.t >= 0.0 && cy.t <= 1.0;
    if both_inside {
        if cx.t <= 0.5 {
            -h * dd1(cx.t, h)
        } else {
            -h * dd1(cy.tc, h)
        }
    } else if cx.t + cy.t <= 1.0 {
        smoothstep(cx.t) - smoothstep(cy.t)
    } else {
        smoothstep(cy.tc) - smoothstep(cx.tc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutoffKind {
    HardyCritical,
    HardyInfinity,
    SmoothWindow,
    SmoothTail,
}

impl CutoffKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CutoffKind::HardyCritical => "hardy_critical",
            CutoffKind::HardyInfinity => "hardy_infinity",
            CutoffKind::SmoothWindow => "smooth_window",
            CutoffKind::SmoothTail => "smooth_tail",
        }
    }
}

impl fmt::Display for CutoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CutoffKind {
    type Err = crate::error::LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hardy_critical" => Ok(CutoffKind::HardyCritical),
            "hardy_infinity" => Ok(CutoffKind::HardyInfinity),
            "smooth_window" => Ok(CutoffKind::SmoothWindow),
            "smooth_tail" => Ok(CutoffKind::SmoothTail),
            other => Err(invalid("kind", format!("unknown cut-off `{other}`"))),
        }
    }
}

/// A finitely supported cut-off with values in `[0, 1]`.
///
/// Pieces are closed, consecutive and start at 0; where two pieces meet the
/// left one owns the point. Beyond the last piece the value is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile {
    kind: CutoffKind,
    n: u64,
    epsilon: f64,
    pieces: Vec<Piece>,
}

pub fn build_cutoff(kind: CutoffKind, n: u64, epsilon: f64) -> Result<CutoffProfile> {
    if n < 2 {
        return Err(invalid("N", "must be at least 2"));
    }
    check_epsilon(epsilon)?;
    let nf = n as f64;
    let (n2, n3) = (nf * nf, 2.0 * nf * nf * nf);
    let piece = |start: f64, end: f64, shape: Shape| Piece { start, end, shape };
    let smooth = |a: f64, b: f64, va: f64, vb: f64| Shape::SmoothRamp { a, b, va, vb, epsilon };
    let pieces = match kind {
        CutoffKind::HardyCritical => vec![
            piece(0.0, nf, Shape::Const(1.0)),
            piece(nf, n2, Shape::LogRamp { a: nf, b: n2, va: 1.0, vb: 0.0 }),
        ],
        CutoffKind::HardyInfinity => vec![
            piece(0.0, nf, Shape::Const(0.0)),
            piece(nf, n2, Shape::LogRamp { a: nf, b: n2, va: 0.0, vb: 1.0 }),
            piece(n2, 2.0 * n2, Shape::Const(1.0)),
            piece(2.0 * n2, n3, Shape::LogRamp { a: 2.0 * n2, b: n3, va: 1.0, vb: 0.0 }),
        ],
        CutoffKind::SmoothWindow => vec![
            piece(0.0, nf, Shape::Const(0.0)),
            piece(nf, n2, smooth(nf, n2, 0.0, 1.0)),
            piece(n2, 2.0 * n2, Shape::Const(1.0)),
            piece(2.0 * n2, n3, smooth(2.0 * n2, n3, 1.0, 0.0)),
        ],
        CutoffKind::SmoothTail => vec![
            piece(0.0, 1.0, Shape::Const(0.0)),
            piece(1.0, 2.0 * n2, Shape::Const(1.0)),
            piece(2.0 * n2, n3, smooth(2.0 * n2, n3, 1.0, 0.0)),
        ],
    };
    Ok(CutoffProfile { kind, n, epsilon, pieces })
}

const OUTSIDE: Shape = Shape::Const(0.0);

impl CutoffProfile {
    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Right end of the last piece; the profile vanishes from there on.
    pub fn support_end(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.end)
    }

    /// Index of the piece owning `x`; `pieces.len()` past the support.
    fn locate(&self, x: f64) -> usize {
        self.pieces.iter().position(|p| x <= p.end).unwrap_or(self.pieces.len())
    }

    fn shape(&self, i: usize) -> &Shape {
        self.pieces.get(i).map_or(&OUTSIDE, |p| &p.shape)
    }

    // ramps always span their whole piece, so the end values are stored exactly
    fn start_value(&self, i: usize) -> f64 {
        match self.shape(i) {
            Shape::Const(v) => *v,
            Shape::LogRamp { va, .. } | Shape::SmoothRamp { va, .. } => *va,
        }
    }

    fn end_value(&self, i: usize) -> f64 {
        match self.shape(i) {
            Shape::Const(v) => *v,
            Shape::LogRamp { vb, .. } | Shape::SmoothRamp { vb, .. } => *vb,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let v = self.shape(i).value(x);
        v.clamp(0.0, 1.0)
    }

    pub fn value_at(&self, n: u64) -> f64 {
        self.value(n as f64)
    }

    /// `ξ(x) - ξ(y)` for `x <= y`, accumulated piece by piece.
    pub fn diff(&self, x: f64, y: f64) -> f64 {
        let (i, j) = (self.locate(x), self.locate(y));
        if i == j {
            return self.shape(i).diff(x, y);
        }
        let mut acc = self.shape(i).diff(x, self.pieces[i].end);
        for m in i..j {
            // jump between the owner of the shared end and the next piece
            acc += self.end_value(m) - self.start_value(m + 1);
            let start = self.pieces.get(m + 1).map_or(y, |p| p.start);
            let end = if m + 1 == j { y } else { self.pieces[m + 1].end };
            acc += self.shape(m + 1).diff(start, end);
        }
        acc
    }

    /// `ξ(x) - ξ(x+1)`.
    pub fn d1(&self, x: f64) -> f64 {
        self.diff(x, x + 1.0)
    }

    /// `-ξ(x) + 2ξ(x+1) - ξ(x+2)`.
    pub fn d2(&self, x: f64) -> f64 {
        let i = self.locate(x);
        if self.locate(x + 2.0) == i {
            if let Some(v) = self.shape(i).second_diff(x) {
                return v;
            }
        }
        self.d1(x + 1.0) - self.d1(x)
    }

    /// Points where the profile or its derivatives jump: piece ends and the
    /// ends of the flat parts of the mollifier.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.pieces.iter().map(|p| p.end).collect();
        for p in &self.pieces {
            out.extend(p.shape.kinks());
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `sup_n |ξ_n - 2ξ_{n+1} + ξ_{n+2}| n^2 log N` over integer `n` in `[from, to]`.
    pub fn second_difference_scaled_max(&self, from: u64, to: u64) -> f64 {
        let l = (self.n as f64).ln();
        (from.max(1)..=to)
            .map(|n| {
                let x = n as f64;
                self.d2(x).abs() * x * x * l
            })
            .fold(0.0, f64::max)
    }
}
