//! Hopf points of the unforced oscillator
//! `ε ẋ = y + x − x³`, `ẏ = −x − k1 y + B0`, and their first Lyapunov
//! coefficient.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::brent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criticality {
    /// `ℓ1 > 0`
    Sub,
    /// `ℓ1 < 0`
    Super,
    Degenerate,
}

impl Criticality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criticality::Sub => "sub",
            Criticality::Super => "super",
            Criticality::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub k1: f64,
    pub b0: f64,
    pub epsilon: f64,
    /// Equilibrium `(x*, y*)`.
    pub x: f64,
    pub y: f64,
    /// Imaginary part of the critical eigenvalues.
    pub frequency: f64,
    pub l1: f64,
    pub criticality: Criticality,
}

const DEGENERATE_L1: f64 = 1e-10;

/// Jacobian of the unforced field at `x` (it does not depend on `y`).
pub fn planar_jacobian(x: f64, k1: f64, epsilon: f64) -> Matrix2<f64> {
    Matrix2::new((1.0 - 3.0 * x * x) / epsilon, 1.0 / epsilon, -1.0, -k1)
}

/// Equilibrium abscissa: the real root of `k1 x³ + (1 − k1) x = B0` nearest
/// the origin. Unique when `k1 ∈ [0, 1]`.
pub fn planar_equilibrium(k1: f64, b0: f64) -> Result<f64> {
    let g = |x: f64| k1 * x * x * x + (1.0 - k1) * x - b0;
    let r = 2.0 + b0.abs();
    brent(g, -r, r, 1e-15, 0.0, 200).ok_or(Error::BracketFailure {
        what: "equilibrium cubic",
        lo: -r,
        hi: r,
    })
}

fn dot(p: &Vector2<Complex64>, q: &Vector2<Complex64>) -> Complex64 {
    p[0].conj() * q[0] + p[1].conj() * q[1]
}

fn solve2(m: &Matrix2<Complex64>, b: &Vector2<Complex64>) -> Vector2<Complex64> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Vector2::new(
        (m[(1, 1)] * b[0] - m[(0, 1)] * b[1]) / det,
        (m[(0, 0)] * b[1] - m[(1, 0)] * b[0]) / det,
    )
}

/// First Lyapunov coefficient at a Hopf equilibrium `x*`, from the invariant
/// normal-form expression
/// `ℓ1 = Re[⟨p, C(q,q,q̄)⟩ − 2⟨p, B(q, A⁻¹B(q,q̄))⟩ + ⟨p, B(q̄, (2iω−A)⁻¹B(q,q))⟩] / (2ω)`
/// with `Aq = iωq`, `Aᵀp = −iωp`, `⟨q,q⟩ = ⟨p,q⟩ = 1`.
///
/// The only nonlinearity is `−x³/ε` in the first component, so
/// `B(u,v) = (−6x* u₁v₁/ε, 0)` and `C(u,v,w) = (−6 u₁v₁w₁/ε, 0)`.
pub fn first_lyapunov(x: f64, k1: f64, epsilon: f64) -> Result<f64> {
    let a = planar_jacobian(x, k1, epsilon);
    let det = a.determinant();
    if !(det > 0.0) {
        return Err(Error::NotAHopf { det });
    }
    let w = det.sqrt();
    let i = Complex64::i();
    let ac = a.map(|v| Complex64::new(v, 0.0));

    // kernel of A − iω I from its first row
    let mut q = Vector2::new(ac[(0, 1)], i * w - ac[(0, 0)]);
    let qn = dot(&q, &q).re.sqrt();
    q /= Complex64::new(qn, 0.0);
    // kernel of Aᵀ + iω I from its first row
    let mut p = Vector2::new(ac[(1, 0)], -(ac[(0, 0)] + i * w));
    let s = dot(&p, &q);
    p /= s.conj();

    let b = |u: &Vector2<Complex64>, v: &Vector2<Complex64>| {
        Vector2::new(-6.0 * x / epsilon * u[0] * v[0], Complex64::new(0.0, 0.0))
    };
    let c = |u: &Vector2<Complex64>, v: &Vector2<Complex64>, z: &Vector2<Complex64>| {
        Vector2::new(
            -6.0 / epsilon * u[0] * v[0] * z[0],
            Complex64::new(0.0, 0.0),
        )
    };
    let qb = q.map(|v| v.conj());

    let h11 = solve2(&ac, &b(&q, &qb));
    let shifted = Matrix2::from_diagonal_element(2.0 * i * w) - ac;
    let h20 = solve2(&shifted, &b(&q, &q));
    let val = dot(&p, &c(&q, &q, &qb)) - 2.0 * dot(&p, &b(&q, &h11)) + dot(&p, &b(&qb, &h20));
    Ok(val.re / (2.0 * w))
}

/// Hopf point of the unforced system for given `k1` and `ε`.
///
/// The trace vanishes at `x*² = (1 − ε k1)/3` (positive root); `B0` then
/// follows from the equilibrium cubic and the determinant is
/// `(1 − ε k1²)/ε`.
pub fn hopf_locate(k1: f64, epsilon: f64) -> Result<HopfPoint> {
    if !(epsilon > 0.0) || !k1.is_finite() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("need ε > 0 and finite k1, got ε = {epsilon}, k1 = {k1}"),
        });
    }
    let det = (1.0 - epsilon * k1 * k1) / epsilon;
    let x2 = (1.0 - epsilon * k1) / 3.0;
    if !(x2 > 0.0) || !(det > 0.0) {
        return Err(Error::NotAHopf { det });
    }
    let x = x2.sqrt();
    let b0 = k1 * x * x * x + (1.0 - k1) * x;
    let l1 = first_lyapunov(x, k1, epsilon)?;
    let criticality = if l1.abs() < DEGENERATE_L1 {
        Criticality::Degenerate
    } else if l1 > 0.0 {
        Criticality::Sub
    } else {
        Criticality::Super
    };
    Ok(HopfPoint {
        k1,
        b0,
        epsilon,
        x,
        y: x * x * x - x,
        frequency: det.sqrt(),
        l1,
        criticality,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BautinPoint {
    pub k1: f64,
    pub b0: f64,
    pub epsilon: f64,
}

/// Zero of `ℓ1` along the Hopf curve, searched on `k1 ∈ [lo, hi]`.
pub fn bautin_locate_in(epsilon: f64, lo: f64, hi: f64, samples: usize) -> Result<BautinPoint> {
    let l1 = |k: f64| hopf_locate(k, epsilon).map(|h| h.l1).unwrap_or(f64::NAN);
    let n = samples.max(2);
    let grid: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let k = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            (k, l1(k))
        })
        .collect();
    let bracket = grid
        .windows(2)
        .find(|w| w[0].1.is_finite() && w[1].1.is_finite() && w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0].0, w[1].0))
        .ok_or(Error::BracketFailure {
            what: "first Lyapunov coefficient",
            lo,
            hi,
        })?;
    let k = brent(l1, bracket.0, bracket.1, 1e-13, 0.0, 200).ok_or(Error::BracketFailure {
        what: "first Lyapunov coefficient",
        lo: bracket.0,
        hi: bracket.1,
    })?;
    let h = hopf_locate(k, epsilon)?;
    Ok(BautinPoint {
        k1: k,
        b0: h.b0,
        epsilon,
    })
}

/// Bautin point with `k1` searched on `[0.2, 0.9]`.
pub fn bautin_locate(epsilon: f64) -> Result<BautinPoint> {
    bautin_locate_in(epsilon, 0.2, 0.9, 29)
}
