use std::collections::BTreeMap;

use nalgebra::SMatrix;

use super::params::{ParameterSet, PrototypeParams, RescaledParams};
use crate::integrate::{Chart, State, VectorField};
use crate::SQRT_3;

/// Critical manifold of the standard form, `Y = f(X) = √3 X² − X³`.
pub fn slow_manifold_f(x: f64) -> f64 {
    SQRT_3 * x * x - x * x * x
}

pub fn slow_manifold_df(x: f64) -> f64 {
    2.0 * SQRT_3 * x - 3.0 * x * x
}

pub fn slow_manifold_d2f(x: f64) -> f64 {
    2.0 * SQRT_3 - 6.0 * x
}

/// Folds of the critical manifold in standard coordinates, where `f'(X) = 0`.
pub fn fold_points() -> (f64, f64) {
    (0.0, 2.0 * SQRT_3 / 3.0)
}

/// Folds of `y = x³ − x` in the original coordinates.
pub fn original_fold_points() -> (f64, f64) {
    (-SQRT_3 / 3.0, SQRT_3 / 3.0)
}

fn snapshot(p: &ParameterSet) -> BTreeMap<String, f64> {
    [
        ("epsilon", p.epsilon()),
        ("omega", p.omega()),
        ("k1", p.k1()),
        ("b0", p.b0()),
        ("b1", p.b1()),
        ("mu", p.mu()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Forced planar oscillator with explicit time; state `(x, y)`.
pub fn rhs_forced(t: f64, s: &State<2>, p: &ParameterSet) -> State<2> {
    let (x, y) = (s[0], s[1]);
    State::<2>::new(
        (y + x - x * x * x) / p.epsilon(),
        -x - p.k1() * y + p.b0() + p.b1() * (p.omega() * t).sin(),
    )
}

/// Autonomous embedding with `p = cos ωt`, `z = sin ωt`; state `(x, y, p, z)`.
pub fn rhs_autonomous(s: &State<4>, p: &ParameterSet) -> State<4> {
    let (x, y, pp, z) = (s[0], s[1], s[2], s[3]);
    State::<4>::new(
        (y + x - x * x * x) / p.epsilon(),
        -x - p.k1() * y + p.b0() + p.b1() * z,
        -p.omega() * z,
        p.omega() * pp,
    )
}

/// Fold-centred standard form; state `(X, Y, P, Z)`.
pub fn rhs_standard(s: &State<4>, p: &ParameterSet) -> State<4> {
    let (x, y, pp, z) = (s[0], s[1], s[2], s[3]);
    State::<4>::new(
        (-y + SQRT_3 * x * x - x * x * x) / p.epsilon(),
        x - p.k1() * y + z,
        p.omega() * (p.mu() - z),
        p.omega() * pp,
    )
}

/// Family-chart system in the rescaled time `τ = t/√ε`; state `(X̄, Ȳ, P̄, Z̄)`.
///
/// The `P̄` equation is written as `ω√ε (μ̄ − Z̄)` so that the chart is exactly
/// conjugate to [`rhs_standard`] with `μ̄ = μ/√ε`.
pub fn rhs_rescaled(s: &State<4>, p: &RescaledParams) -> State<4> {
    let (x, y, pp, z) = (s[0], s[1], s[2], s[3]);
    let se = p.epsilon.sqrt();
    State::<4>::new(
        -y + SQRT_3 * x * x - se * x * x * x,
        x - p.k1 * se * y + z,
        p.omega * se * (p.mu_bar - z),
        p.omega * se * pp,
    )
}

/// Three-scale prototype with a folded saddle-node; state `(v, z, w)`.
pub fn rhs_prototype(s: &State<3>, p: &PrototypeParams) -> State<3> {
    let (v, z, w) = (s[0], s[1], s[2]);
    State::<3>::new(
        (-z + p.f2 * v * v + p.f3 * v * v * v) / p.epsilon_p,
        v - w,
        p.epsilon_p * (p.mu_p - p.g1 * z),
    )
}

/// Generalized three-variable oscillator; state `(x, y, z)`.
pub fn rhs_generalized(s: &State<3>, p: &PrototypeParams) -> State<3> {
    let (x, y, z) = (s[0], s[1], s[2]);
    State::<3>::new(
        (x * (1.0 - x * x) + y + z) / p.epsilon_p,
        -x - p.k1 * y + p.b0,
        p.k3 * (-x - p.k1 * z + p.b0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcedBvp(pub ParameterSet);

impl VectorField<2> for ForcedBvp {
    fn eval(&self, t: f64, y: &State<2>) -> State<2> {
        rhs_forced(t, y, &self.0)
    }
    fn jacobian(&self, _t: f64, y: &State<2>) -> SMatrix<f64, 2, 2> {
        let e = self.0.epsilon();
        SMatrix::<f64, 2, 2>::new((1.0 - 3.0 * y[0] * y[0]) / e, 1.0 / e, -1.0, -self.0.k1())
    }
    fn chart(&self) -> Chart {
        Chart::Forced
    }
    fn snapshot(&self) -> BTreeMap<String, f64> {
        snapshot(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutonomousBvp(pub ParameterSet);

impl VectorField<4> for AutonomousBvp {
    fn eval(&self, _t: f64, y: &State<4>) -> State<4> {
        rhs_autonomous(y, &self.0)
    }
    fn jacobian(&self, _t: f64, s: &State<4>) -> SMatrix<f64, 4, 4> {
        let p = &self.0;
        let e = p.epsilon();
        let w = p.omega();
        #[rustfmt::skip]
        let m = SMatrix::<f64, 4, 4>::new(
            (1.0 - 3.0 * s[0] * s[0]) / e, 1.0 / e, 0.0, 0.0,
            -1.0, -p.k1(), 0.0, p.b1(),
            0.0, 0.0, 0.0, -w,
            0.0, 0.0, w, 0.0,
        );
        m
    }
    fn chart(&self) -> Chart {
        Chart::Original
    }
    fn snapshot(&self) -> BTreeMap<String, f64> {
        snapshot(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardForm(pub ParameterSet);

impl VectorField<4> for StandardForm {
    fn eval(&self, _t: f64, y: &State<4>) -> State<4> {
        rhs_standard(y, &self.0)
    }
    fn jacobian(&self, _t: f64, s: &State<4>) -> SMatrix<f64, 4, 4> {
        let p = &self.0;
        let e = p.epsilon();
        let w = p.omega();
        #[rustfmt::skip]
        let m = SMatrix::<f64, 4, 4>::new(
            slow_manifold_df(s[0]) / e, -1.0 / e, 0.0, 0.0,
            1.0, -p.k1(), 0.0, 1.0,
            0.0, 0.0, 0.0, -w,
            0.0, 0.0, w, 0.0,
        );
        m
    }
    fn chart(&self) -> Chart {
        Chart::Standard
    }
    fn snapshot(&self) -> BTreeMap<String, f64> {
        snapshot(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledForm(pub RescaledParams);

impl VectorField<4> for RescaledForm {
    fn eval(&self, _t: f64, y: &State<4>) -> State<4> {
        rhs_rescaled(y, &self.0)
    }
    fn jacobian(&self, _t: f64, s: &State<4>) -> SMatrix<f64, 4, 4> {
        let p = &self.0;
        let se = p.epsilon.sqrt();
        let x = s[0];
        let ws = p.omega * se;
        #[rustfmt::skip]
        let m = SMatrix::<f64, 4, 4>::new(
            2.0 * SQRT_3 * x - 3.0 * se * x * x, -1.0, 0.0, 0.0,
            1.0, -p.k1 * se, 0.0, 1.0,
            0.0, 0.0, 0.0, -ws,
            0.0, 0.0, ws, 0.0,
        );
        m
    }
    fn chart(&self) -> Chart {
        Chart::Rescaled
    }
    fn snapshot(&self) -> BTreeMap<String, f64> {
        [
            ("epsilon", self.0.epsilon),
            ("omega", self.0.omega),
            ("k1", self.0.k1),
            ("mu_bar", self.0.mu_bar),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prototype(pub PrototypeParams);

impl VectorField<3> for Prototype {
    fn eval(&self, _t: f64, y: &State<3>) -> State<3> {
        rhs_prototype(y, &self.0)
    }
    fn chart(&self) -> Chart {
        Chart::Prototype
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedBvp(pub PrototypeParams);

impl VectorField<3> for GeneralizedBvp {
    fn eval(&self, _t: f64, y: &State<3>) -> State<3> {
        rhs_generalized(y, &self.0)
    }
    fn chart(&self) -> Chart {
        Chart::Generalized
    }
}
