//! Desingularized slow flow on the critical manifold `Y = f(X)` and its
//! folded equilibria.
//!
//! State is `(X, P, Z)`. The flow is the reduced problem multiplied by
//! `f'(X)`, so orbits on the sheet where `f'(X) < 0` run backwards in time.

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::fields::{fold_points, slow_manifold_d2f, slow_manifold_df, slow_manifold_f};
use crate::models::ParameterSet;

/// Residual above which a point is not accepted as a folded equilibrium.
pub const STATIONARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldBranch {
    /// `X = 0`
    Left,
    /// `X = 2√3/3`
    Right,
}

impl FoldBranch {
    pub fn x(self) -> f64 {
        match self {
            FoldBranch::Left => fold_points().0,
            FoldBranch::Right => fold_points().1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldedClass {
    FoldedNode,
    FoldedSaddle,
    FoldedSaddleNode,
    FoldedFocus,
    NoneInDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldedEquilibrium {
    /// `(X, P, Z)`
    pub location: [f64; 3],
    pub branch: FoldBranch,
    /// `[0, λ+, λ−]`; the first entry belongs to the `P` direction.
    pub eigenvalues: [Complex64; 3],
    pub classification: FoldedClass,
}

pub fn desingularized_rhs(s: &Vector3<f64>, params: &ParameterSet) -> Vector3<f64> {
    let (x, p, z) = (s[0], s[1], s[2]);
    let df = slow_manifold_df(x);
    let w = params.omega();
    Vector3::new(
        x - params.k1() * slow_manifold_f(x) + z,
        w * df * (params.mu() - z),
        w * df * p,
    )
}

pub fn desingularized_jacobian(s: &Vector3<f64>, params: &ParameterSet) -> Matrix3<f64> {
    let (x, p, z) = (s[0], s[1], s[2]);
    let df = slow_manifold_df(x);
    let d2f = slow_manifold_d2f(x);
    let w = params.omega();
    Matrix3::new(
        1.0 - params.k1() * df,
        0.0,
        1.0,
        w * d2f * (params.mu() - z),
        0.0,
        -w * df,
        w * d2f * p,
        w * df,
        0.0,
    )
}

fn stationary_residual(location: &[f64; 3], params: &ParameterSet) -> f64 {
    let v = Vector3::from(*location);
    desingularized_rhs(&v, params)
        .amax()
        .max(slow_manifold_df(location[0]).abs())
}

// Nonzero eigenvalues on a fold: roots of λ² − λ − ω f''(X) P = 0.
fn fold_pair(x: f64, p: f64, params: &ParameterSet) -> (f64, [Complex64; 3]) {
    let disc = 1.0 + 4.0 * params.omega() * slow_manifold_d2f(x) * p;
    let root = Complex64::new(disc, 0.0).sqrt();
    let half = Complex64::new(0.5, 0.0);
    (
        disc,
        [
            Complex64::new(0.0, 0.0),
            half + 0.5 * root,
            half - 0.5 * root,
        ],
    )
}

/// Eigenvalues of the linearization at a folded equilibrium.
///
/// On the left fold these are `(0, ½ ± ½√(1 + 8√3 ω P))`, which gives
/// `1 − 8√3 ω √(B1² − μ²)` under the root at the node `P = −√(B1² − μ²)`
/// and `1 + 8√3 ω √(B1² − μ²)` at the saddle.
pub fn folded_eigenvalues(location: &[f64; 3], params: &ParameterSet) -> Result<[Complex64; 3]> {
    let residual = stationary_residual(location, params);
    if !(residual <= STATIONARY_TOL) {
        return Err(Error::NotStationary { residual });
    }
    Ok(fold_pair(location[0], location[1], params).1)
}

fn class_from(disc: f64, eig: &[Complex64; 3]) -> FoldedClass {
    if disc < 0.0 {
        return FoldedClass::FoldedFocus;
    }
    if (disc - 1.0).abs() <= 4.0 * f64::EPSILON {
        return FoldedClass::FoldedSaddleNode;
    }
    if eig[1].re * eig[2].re > 0.0 {
        FoldedClass::FoldedNode
    } else {
        FoldedClass::FoldedSaddle
    }
}

pub fn classify(location: &[f64; 3], params: &ParameterSet) -> Result<FoldedClass> {
    let eig = folded_eigenvalues(location, params)?;
    let (disc, _) = fold_pair(location[0], location[1], params);
    Ok(class_from(disc, &eig))
}

fn equilibrium(branch: FoldBranch, p: f64, z: f64, params: &ParameterSet) -> FoldedEquilibrium {
    let location = [branch.x(), p, z];
    let (disc, eigenvalues) = fold_pair(location[0], p, params);
    FoldedEquilibrium {
        location,
        branch,
        eigenvalues,
        classification: class_from(disc, &eigenvalues),
    }
}

/// Folded equilibria inside the circle `(Z − μ)² + P² = B1²`.
///
/// On the left fold stationarity forces `Z = 0`, so the points are
/// `(0, ∓√(B1² − μ²), 0)`, ordered node first. They merge into one
/// saddle-node at the origin when `|μ| = B1` and leave the domain when
/// `|μ| > B1`. The right fold contributes only if its forced `Z` lies in
/// `[μ − B1, μ + B1]`.
pub fn folded_equilibria(params: &ParameterSet) -> Vec<FoldedEquilibrium> {
    let mut out = Vec::new();
    let (mu, b1) = (params.mu(), params.b1());
    let slack = b1 * b1 - mu * mu;
    let merge_tol = 1e-12 * b1 * b1;
    if slack.abs() <= merge_tol {
        let mut eq = equilibrium(FoldBranch::Left, 0.0, 0.0, params);
        eq.classification = FoldedClass::FoldedSaddleNode;
        out.push(eq);
    } else if slack > 0.0 {
        let p = slack.sqrt();
        out.push(equilibrium(FoldBranch::Left, -p, 0.0, params));
        out.push(equilibrium(FoldBranch::Left, p, 0.0, params));
    }

    let xr = FoldBranch::Right.x();
    let zr = params.k1() * slow_manifold_f(xr) - xr;
    let dz = zr - mu;
    let r2 = b1 * b1 - dz * dz;
    if r2.abs() <= merge_tol {
        let mut eq = equilibrium(FoldBranch::Right, 0.0, zr, params);
        eq.classification = FoldedClass::FoldedSaddleNode;
        out.push(eq);
    } else if r2 > 0.0 {
        let p = r2.sqrt();
        out.push(equilibrium(FoldBranch::Right, -p, zr, params));
        out.push(equilibrium(FoldBranch::Right, p, zr, params));
    }
    out
}

/// Direction in `(X, P, Z)` of the zero eigenvalue of the `(X, Z)` block.
///
/// At the merged point this is the centre direction of the saddle-node.
pub fn center_direction(location: &[f64; 3], params: &ParameterSet) -> Vector3<f64> {
    let j = desingularized_jacobian(&Vector3::from(*location), params);
    let block = Matrix2::new(j[(0, 0)], j[(0, 2)], j[(2, 0)], j[(2, 2)]);
    let (a, b, c, d) = (block[(0, 0)], block[(0, 1)], block[(1, 0)], block[(1, 1)]);
    // kernel of the singular block, from its larger row
    let (u, v) = if a.abs() + b.abs() >= c.abs() + d.abs() {
        (-b, a)
    } else {
        (-d, c)
    };
    let n = (u * u + v * v).sqrt();
    Vector3::new(u / n, 0.0, v / n)
}
