//! Family-chart analysis of the fold: conserved quantity of the integrable
//! limit, the singular canard, the critical unfolding value and a shooting
//! computation of the splitting between attracting and repelling slow
//! manifolds.

use std::collections::BTreeMap;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{
    integrate_to_event, Chart, Crossing, EventKind, EventSpec, IntegratorConfig, Reversed, State,
    VectorField,
};
use crate::models::ParameterSet;
use crate::numeric::bisect;
use crate::SQRT_3;

/// `H = ½ e^{−2√3 Ȳ} (−X̄² + Ȳ/√3 + 1/6)`, constant along the integrable flow
/// `X̄' = −Ȳ + √3 X̄²`, `Ȳ' = X̄`.
pub fn hamiltonian(xb: f64, yb: f64) -> f64 {
    0.5 * (-2.0 * SQRT_3 * yb).exp() * (-xb * xb + yb / SQRT_3 + 1.0 / 6.0)
}

/// `(∂H/∂X̄, ∂H/∂Ȳ)`
pub fn hamiltonian_gradient(xb: f64, yb: f64) -> (f64, f64) {
    let e = (-2.0 * SQRT_3 * yb).exp();
    (-xb * e, e * (SQRT_3 * xb * xb - yb))
}

/// The `H = 0` orbit `(t/(2√3), t²/(4√3) − 1/(2√3))`, a parabola separating
/// closed orbits from unbounded ones.
pub fn singular_canard(t: f64) -> (f64, f64) {
    (
        t / (2.0 * SQRT_3),
        t * t / (4.0 * SQRT_3) - 1.0 / (2.0 * SQRT_3),
    )
}

/// Critical unfolding value `(Z̄_cr, Z_cr)` with
/// `Z̄_cr = −√3 (1 + 2 k1) √ε / 24` and `Z_cr = √ε Z̄_cr`.
pub fn z_critical(k1: f64, epsilon: f64) -> (f64, f64) {
    let zb = -SQRT_3 * (1.0 + 2.0 * k1) * epsilon.sqrt() / 24.0;
    (zb, zb * epsilon.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CriticalPhase {
    /// Two canard trajectories, at `P = ±√(B1² − (Z_cr − μ)²)`.
    Pair {
        plus: f64,
        minus: f64,
    },
    NoCanardInDomain,
}

pub fn p_critical(params: &ParameterSet) -> CriticalPhase {
    let (_, z_cr) = z_critical(params.k1(), params.epsilon());
    let d = z_cr - params.mu();
    let r2 = params.b1() * params.b1() - d * d;
    if r2 < 0.0 {
        return CriticalPhase::NoCanardInDomain;
    }
    let p = r2.sqrt();
    CriticalPhase::Pair { plus: p, minus: -p }
}

/// Planar family-chart system with `(P̄, Z̄)` frozen:
/// `X̄' = −Ȳ + √3 X̄² − δ X̄³`, `Ȳ' = X̄ − k1 δ Ȳ + Z̄`, with `δ = √ε`.
///
/// With `δ = 0` and `Z̄ = 0` this is the integrable system conserving
/// [`hamiltonian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenFold {
    pub delta: f64,
    pub k1: f64,
    pub z_bar: f64,
}

impl FrozenFold {
    pub fn integrable() -> Self {
        Self {
            delta: 0.0,
            k1: 0.0,
            z_bar: 0.0,
        }
    }

    /// Critical curve `Ȳ = √3 X̄² − δ X̄³`.
    pub fn critical(&self, xb: f64) -> f64 {
        SQRT_3 * xb * xb - self.delta * xb * xb * xb
    }

    fn critical_slope(&self, xb: f64) -> f64 {
        2.0 * SQRT_3 * xb - 3.0 * self.delta * xb * xb
    }

    /// Slow manifold near the critical curve, to first order:
    /// `Ȳ = g − (X̄ − k1 δ g + Z̄) / g'`.
    pub fn slow_manifold(&self, xb: f64) -> f64 {
        let g = self.critical(xb);
        g - (xb - self.k1 * self.delta * g + self.z_bar) / self.critical_slope(xb)
    }
}

impl VectorField<2> for FrozenFold {
    fn eval(&self, _t: f64, s: &State<2>) -> State<2> {
        let (x, y) = (s[0], s[1]);
        State::<2>::new(
            -y + self.critical(x),
            x - self.k1 * self.delta * y + self.z_bar,
        )
    }

    fn jacobian(&self, _t: f64, s: &State<2>) -> SMatrix<f64, 2, 2> {
        SMatrix::<f64, 2, 2>::new(self.critical_slope(s[0]), -1.0, 1.0, -self.k1 * self.delta)
    }

    fn chart(&self) -> Chart {
        Chart::FoldChart
    }

    fn snapshot(&self) -> BTreeMap<String, f64> {
        [
            ("delta", self.delta),
            ("k1", self.k1),
            ("z_bar", self.z_bar),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CanardOptions {
    /// Distance from the fold at which both branches are seeded.
    pub seed_distance: f64,
    /// Scanned `Z̄` interval.
    pub z_window: (f64, f64),
    pub samples: usize,
    /// Bisection tolerance in `Z̄`.
    pub z_tol: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for CanardOptions {
    fn default() -> Self {
        Self {
            seed_distance: 10.0,
            z_window: (-0.2, -1e-6),
            samples: 21,
            z_tol: 1e-11,
            rtol: 1e-11,
            atol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanardResult {
    pub z_bar_analytic: f64,
    pub z_bar_numeric: f64,
    /// `(Z̄, Ȳ_attracting − Ȳ_repelling)` on the scanned grid.
    pub splitting_samples: Vec<(f64, f64)>,
    pub epsilon: f64,
    pub seed_distance: f64,
}

impl CanardResult {
    pub fn ratio(&self) -> f64 {
        self.z_bar_numeric / self.z_bar_analytic
    }
}

/// Seed distance actually used: at most half the distance to the far fold of
/// the frozen critical curve and to where `k1 δ Ȳ` becomes order one.
pub fn effective_seed_distance(requested: f64, k1: f64, delta: f64) -> f64 {
    let mut limit = f64::INFINITY;
    if delta > 0.0 {
        limit = limit.min(2.0 * SQRT_3 / (3.0 * delta));
        if k1 > 0.0 {
            limit = limit.min(1.0 / (k1 * delta * SQRT_3));
        }
    }
    requested.min(0.5 * limit)
}

/// Signed gap `Ȳ_a − Ȳ_r` on `{X̄ = 0}` between the attracting branch
/// (seeded at `X̄ = −L`, integrated forward) and the repelling branch
/// (seeded at `X̄ = L`, integrated backward).
pub fn splitting(field: &FrozenFold, seed_distance: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let l = seed_distance;
    let section = EventSpec::new(
        EventKind::SectionCrossing,
        Crossing::Either,
        |_t, s: &State<2>| s[0],
    );
    let t_max = 20.0 + 10.0 * l;
    let attracting = State::<2>::new(-l, field.slow_manifold(-l));
    let a = integrate_to_event(field, attracting, (0.0, t_max), cfg, &section)?;
    let repelling = State::<2>::new(l, field.slow_manifold(l));
    let r = integrate_to_event(&Reversed(field), repelling, (0.0, t_max), cfg, &section)?;
    Ok(a.state[1] - r.state[1])
}

/// Locates the `Z̄` at which the attracting and repelling slow manifolds of
/// the frozen fold system connect, and compares with [`z_critical`].
pub fn numeric_canard_split(k1: f64, epsilon: f64, opts: &CanardOptions) -> Result<CanardResult> {
    if !(1e-5..=1e-2).contains(&epsilon) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("must lie in [1e-5, 1e-2], got {epsilon}"),
        });
    }
    if opts.samples < 2 || !(opts.z_window.0 < opts.z_window.1) {
        return Err(Error::InvalidParameter {
            name: "z_window",
            reason: "need at least two samples over a nonempty interval".into(),
        });
    }
    let delta = epsilon.sqrt();
    let l = effective_seed_distance(opts.seed_distance, k1, delta);
    let cfg = IntegratorConfig::with_tolerances(opts.rtol, opts.atol);
    let split_at = |z_bar: f64| {
        let field = FrozenFold { delta, k1, z_bar };
        splitting(&field, l, &cfg).ok()
    };

    let (lo, hi) = opts.z_window;
    let n = opts.samples;
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .filter_map(|z| split_at(z).map(|d| (z, d)))
        .collect();

    // smallest sign-changing bracket
    let bracket = samples
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .min_by(|a, b| {
            let ma = a[0].1.abs().max(a[1].1.abs());
            let mb = b[0].1.abs().max(b[1].1.abs());
            ma.total_cmp(&mb)
        })
        .map(|w| (w[0].0, w[1].0))
        .ok_or(Error::BracketFailure {
            what: "canard splitting",
            lo,
            hi,
        })?;

    let z_num = bisect(
        |z| split_at(z).unwrap_or(f64::NAN),
        bracket.0,
        bracket.1,
        opts.z_tol,
        200,
    )
    .ok_or(Error::BracketFailure {
        what: "canard splitting",
        lo: bracket.0,
        hi: bracket.1,
    })?;

    Ok(CanardResult {
        z_bar_analytic: z_critical(k1, epsilon).0,
        z_bar_numeric: z_num,
        splitting_samples: samples,
        epsilon,
        seed_distance: l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hamiltonian_at_origin() {
        assert!((hamiltonian(0.0, 0.0) - 1.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn singular_canard_is_zero_level_orbit() {
        let (x, y) = singular_canard(0.0);
        assert_eq!(x, 0.0);
        assert!((y + 1.0 / (2.0 * SQRT_3)).abs() < 1e-16);
        let field = FrozenFold::integrable();
        for t in [-2.0, 0.0, 3.7] {
            let (x, y) = singular_canard(t);
            assert!(hamiltonian(x, y).abs() < 1e-14);
            let v = field.eval(0.0, &State::<2>::new(x, y));
            // derivative of the parametrization
            assert!((v[0] - 1.0 / (2.0 * SQRT_3)).abs() < 1e-14);
            assert!((v[1] - t / (2.0 * SQRT_3)).abs() < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_is_conserved_pointwise() {
        let field = FrozenFold::integrable();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // region around the singular canard, where e^{-2√3 Ȳ} stays O(1)
        for _ in 0..1000 {
            let (x, y) = (rng.random_range(-1.0..1.0), rng.random_range(-0.5..1.0));
            let v = field.eval(0.0, &State::<2>::new(x, y));
            let (hx, hy) = hamiltonian_gradient(x, y);
            assert!((hx * v[0] + hy * v[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let (x, y) = (0.3, -0.2);
        let h = 1e-6;
        let (gx, gy) = hamiltonian_gradient(x, y);
        let fx = (hamiltonian(x + h, y) - hamiltonian(x - h, y)) / (2.0 * h);
        let fy = (hamiltonian(x, y + h) - hamiltonian(x, y - h)) / (2.0 * h);
        assert!((gx - fx).abs() < 1e-9 && (gy - fy).abs() < 1e-9);
    }

    #[test]
    fn critical_values() {
        let (_, z) = z_critical(0.9, 0.1);
        assert!((z + SQRT_3 * 2.8 / 240.0).abs() < 1e-15);
        assert!((z + 0.020207).abs() < 1e-6);
        assert_eq!(z_critical(-0.5, 0.1).1, 0.0);
        let r = z_critical(0.4, 0.02).1 / z_critical(0.4, 0.01).1;
        assert!((r - 2.0).abs() < 1e-14);
    }

    #[test]
    fn critical_phases() {
        let base = ParameterSet::new(0.1, 0.1, 0.9, 0.2, 0.1).unwrap();
        let (_, zc) = z_critical(0.9, 0.1);
        match p_critical(&base.with_mu(zc).unwrap()) {
            CriticalPhase::Pair { plus, minus } => {
                assert!((plus - 0.1).abs() < 1e-15);
                assert_eq!(plus, -minus);
            }
            other => panic!("{other:?}"),
        }
        let narrow = base.with_b1(0.01).unwrap().with_mu(zc + 0.02).unwrap();
        assert_eq!(p_critical(&narrow), CriticalPhase::NoCanardInDomain);
        match p_critical(&base.with_mu(-0.03).unwrap()) {
            CriticalPhase::Pair { plus, .. } => assert!((plus - 0.09952).abs() < 1e-5, "{plus}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seed_distance_is_clamped() {
        assert_eq!(effective_seed_distance(10.0, 0.0, 0.01), 10.0);
        let l = effective_seed_distance(10.0, 0.9, 0.1);
        assert!((l - 0.5 / (0.09 * SQRT_3)).abs() < 1e-12);
    }

    #[test]
    fn slow_manifold_seed_is_nearly_invariant() {
        let f = FrozenFold {
            delta: 0.01,
            k1: 0.5,
            z_bar: -0.01,
        };
        // residual of the invariance equation is second order in 1/X̄
        for x in [-8.0, 8.0] {
            let h = 1e-5;
            let slope = (f.slow_manifold(x + h) - f.slow_manifold(x - h)) / (2.0 * h);
            let v = f.eval(0.0, &State::<2>::new(x, f.slow_manifold(x)));
            assert!((v[1] - slope * v[0]).abs() < 1e-3 * v[1].abs());
        }
    }

    #[test]
    fn rejects_out_of_range_epsilon() {
        assert!(numeric_canard_split(0.0, 0.1, &CanardOptions::default()).is_err());
    }

    #[test]
    fn splitting_changes_sign_across_the_root() {
        let res = numeric_canard_split(0.0, 1e-2, &CanardOptions::default()).unwrap();
        assert!((0.75..=1.25).contains(&res.ratio()), "{res:?}");
        // monotone near the root
        let near: Vec<_> = res
            .splitting_samples
            .iter()
            .filter(|(z, _)| (z - res.z_bar_numeric).abs() < 0.03)
            .collect();
        assert!(near.len() >= 2);
        for w in near.windows(2) {
            assert!(w[1].1 != w[0].1);
            assert_eq!((w[1].1 - w[0].1).signum(), (near[1].1 - near[0].1).signum());
        }
    }
}
