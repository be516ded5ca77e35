//! Phase-space points in the three charts and the maps between them.
//!
//! Forward map, original to standard:
//! `X = √3/3 − x`, `Y = y + 2√3/9`, `P = B1 p`, `Z = B1 z + μ`.
//! Family chart: `X = √ε X̄`, `Y = ε Ȳ`, `P = √ε P̄`, `Z = √ε Z̄`, `t = √ε τ`.

use serde::{Deserialize, Serialize};

use super::params::ParameterSet;
use crate::error::{Error, Result};
use crate::integrate::State;
use crate::SQRT_3;

/// Tolerance on the circle relation when a state is constructed.
pub const CIRCLE_TOL: f64 = 1e-9;

const X_SHIFT: f64 = SQRT_3 / 3.0;
const Y_SHIFT: f64 = 2.0 * SQRT_3 / 9.0;

/// Point of the autonomous embedding; `(p, z)` lies on the unit circle.
///
/// A point of the 3D projection `(x, y, z)` corresponds to two of these, one
/// for each sign of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginalState {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub z: f64,
}

/// Point in fold-centred coordinates `(X, Y, P, Z)`; `(Z − μ)² + P² = B1²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardState {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub z: f64,
}

/// Point in family-chart coordinates `(X̄, Ȳ, P̄, Z̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledState {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub z: f64,
}

macro_rules! vector_conversions {
    ($t:ty) => {
        impl $t {
            pub fn to_vector(&self) -> State<4> {
                State::<4>::new(self.x, self.y, self.p, self.z)
            }
            /// Wraps a raw vector without checking the circle relation.
            pub fn from_vector(v: &State<4>) -> Self {
                Self {
                    x: v[0],
                    y: v[1],
                    p: v[2],
                    z: v[3],
                }
            }
        }
    };
}

vector_conversions!(OriginalState);
vector_conversions!(StandardState);
vector_conversions!(RescaledState);

impl OriginalState {
    pub fn new(x: f64, y: f64, p: f64, z: f64) -> Result<Self> {
        let s = Self { x, y, p, z };
        let r = s.circle_residual();
        if !(r.abs() <= CIRCLE_TOL) {
            return Err(Error::Domain {
                value: r,
                reason: "p² + z² must equal 1",
            });
        }
        Ok(s)
    }

    /// State at forcing phase `ωt`: `p = cos ωt`, `z = sin ωt`.
    pub fn at_phase(x: f64, y: f64, phase: f64) -> Self {
        Self {
            x,
            y,
            p: phase.cos(),
            z: phase.sin(),
        }
    }

    /// `p² + z² − 1`
    pub fn circle_residual(&self) -> f64 {
        self.p * self.p + self.z * self.z - 1.0
    }
}

impl StandardState {
    pub fn new(x: f64, y: f64, p: f64, z: f64, params: &ParameterSet) -> Result<Self> {
        let s = Self { x, y, p, z };
        let r = s.circle_residual(params);
        if !(r.abs() <= CIRCLE_TOL * params.b1().max(1.0)) {
            return Err(Error::Domain {
                value: r,
                reason: "(Z − μ)² + P² must equal B1²",
            });
        }
        Ok(s)
    }

    /// `(Z − μ)² + P² − B1²`
    pub fn circle_residual(&self, params: &ParameterSet) -> f64 {
        let dz = self.z - params.mu();
        dz * dz + self.p * self.p - params.b1() * params.b1()
    }

    /// Admissible range of `Z`: `[μ − B1, μ + B1]`.
    pub fn z_domain(params: &ParameterSet) -> (f64, f64) {
        (params.mu() - params.b1(), params.mu() + params.b1())
    }
}

pub fn to_standard(s: &OriginalState, params: &ParameterSet) -> Result<StandardState> {
    let b1 = params.b1();
    if b1 == 0.0 {
        return Err(Error::TransformUndefined(
            "B1 = 0 collapses the (P, Z) circle",
        ));
    }
    Ok(StandardState {
        x: X_SHIFT - s.x,
        y: s.y + Y_SHIFT,
        p: b1 * s.p,
        z: b1 * s.z + params.mu(),
    })
}

pub fn from_standard(s: &StandardState, params: &ParameterSet) -> Result<OriginalState> {
    let b1 = params.b1();
    if b1 == 0.0 {
        return Err(Error::TransformUndefined(
            "B1 = 0 collapses the (P, Z) circle",
        ));
    }
    Ok(OriginalState {
        x: X_SHIFT - s.x,
        y: s.y - Y_SHIFT,
        p: s.p / b1,
        z: (s.z - params.mu()) / b1,
    })
}

pub fn to_rescaled(s: &StandardState, epsilon: f64) -> RescaledState {
    let se = epsilon.sqrt();
    RescaledState {
        x: s.x / se,
        y: s.y / epsilon,
        p: s.p / se,
        z: s.z / se,
    }
}

pub fn from_rescaled(s: &RescaledState, epsilon: f64) -> StandardState {
    let se = epsilon.sqrt();
    StandardState {
        x: s.x * se,
        y: s.y * epsilon,
        p: s.p * se,
        z: s.z * se,
    }
}

/// Standard-chart time corresponding to family-chart time `tau`.
pub fn rescaled_to_standard_time(tau: f64, epsilon: f64) -> f64 {
    tau * epsilon.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> ParameterSet {
        ParameterSet::new(0.1, 0.1, 0.9, 0.205, 0.1).unwrap()
    }

    #[test]
    fn right_fold_maps_to_origin() {
        let p = params();
        let s = to_standard(
            &OriginalState::at_phase(SQRT_3 / 3.0, -2.0 * SQRT_3 / 9.0, 0.3),
            &p,
        )
        .unwrap();
        assert!(s.x.abs() < 1e-16);
        assert!(s.y.abs() < 1e-16);
    }

    #[test]
    fn b1_zero_is_rejected() {
        let p = params().with_b1(0.0).unwrap();
        let s = OriginalState::at_phase(0.1, 0.2, 0.0);
        assert!(matches!(
            to_standard(&s, &p),
            Err(Error::TransformUndefined(_))
        ));
    }

    #[test]
    fn round_trip_and_circle_relation() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s = OriginalState::at_phase(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.0..6.3),
            );
            let st = to_standard(&s, &p).unwrap();
            assert!(st.circle_residual(&p).abs() < 1e-15);
            let (lo, hi) = StandardState::z_domain(&p);
            assert!(st.z >= lo - 1e-15 && st.z <= hi + 1e-15);
            let back = from_standard(&st, &p).unwrap();
            assert!((back.to_vector() - s.to_vector()).abs().max() < 1e-12);
            let rs = to_rescaled(&st, p.epsilon());
            let st2 = from_rescaled(&rs, p.epsilon());
            assert!((st2.to_vector() - st.to_vector()).abs().max() < 1e-12);
        }
    }

    // Z vanishes exactly when B1 z = −μ, i.e. sin ωt = −μ/B1.
    #[test]
    fn z_zero_level_set() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let b1: f64 = rng.random_range(0.05..0.5);
            let q = p
                .with_b1(b1)
                .unwrap()
                .with_mu(rng.random_range(-0.04..0.04))
                .unwrap();
            let z = -q.mu() / q.b1();
            let pp = (1.0 - z * z).sqrt();
            let s = OriginalState::new(0.2, 0.1, pp, z).unwrap();
            let st = to_standard(&s, &q).unwrap();
            assert!(st.z.abs() < 1e-15, "{}", st.z);
        }
    }

    #[test]
    fn constructor_checks_circle() {
        assert!(OriginalState::new(0.0, 0.0, 1.0, 0.1).is_err());
        assert!(OriginalState::new(0.0, 0.0, 0.6, 0.8).is_ok());
        let p = params();
        assert!(StandardState::new(0.0, 0.0, 0.0, p.mu() + p.b1(), &p).is_ok());
        assert!(StandardState::new(0.0, 0.0, 0.0, p.mu(), &p).is_err());
    }
}
