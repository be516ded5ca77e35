//! Global return of a relaxation loop, tracked through the forcing phase
//! `W = ωt`.
//!
//! On the circle `(Z − μ)² + P² = B1²` the phase satisfies `P = B1 cos W`,
//! `Z = μ + B1 sin W`; `P` decreases for `W ∈ (0, π)` and increases for
//! `W ∈ (π, 2π)`. One loop (left sheet to right fold, jump, right sheet to the
//! other fold, jump back) advances `W` by `ω` times the slow passage time.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::quadrature::integrate_adaptive;
use crate::error::{Error, Result};
use crate::integrate::{integrate, Crossing, EventKind, EventSpec, IntegratorConfig, State};
use crate::models::fields::{slow_manifold_df, slow_manifold_f};
use crate::models::{ParameterSet, StandardForm};
use crate::SQRT_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseDirection {
    Increasing,
    Decreasing,
}

/// Which arccos branch the landing phase falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandingBranch {
    /// `W1 = arccos(P1/B1)`, `P` decreasing
    Minus,
    /// `W1 = 2π − arccos(P1/B1)`, `P` increasing
    Plus,
    /// `W1 = 2π + arccos(P1/B1)`, past the wall at `P = B1`
    Wrapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReturn {
    pub w1: f64,
    pub p1: f64,
    pub branch: LandingBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapSample {
    pub w0: f64,
    pub w1_numeric: f64,
    pub w1_analytic: f64,
    pub p0: f64,
    pub p1_numeric: f64,
    pub p1_analytic: f64,
    pub direction: PhaseDirection,
    pub branch: LandingBranch,
    /// Time taken by the loop.
    pub return_time: f64,
}

/// First-order phase advance of one loop, `3ω(1 − k1/2)`. Depends only on
/// `k1` and `ω`.
pub fn lao_increment(k1: f64, omega: f64) -> f64 {
    3.0 * omega * (1.0 - 0.5 * k1)
}

// f'(X)/(X − k1 f(X)) with the common factor X removed.
fn passage_density(x: f64, k1: f64) -> f64 {
    (2.0 * SQRT_3 - 3.0 * x) / (1.0 - k1 * (SQRT_3 * x - x * x))
}

/// Slow passage time of one loop:
/// `∫_{√3}^{2√3/3} + ∫_{−√3/3}^{0}` of `f'(X) / (X − k1 f(X)) dX`.
///
/// Equals 3 at `k1 = 0`; `3(1 − k1/2)` is its first-order expansion.
pub fn return_integral(k1: f64) -> Result<f64> {
    let right = integrate_adaptive(
        |x| passage_density(x, k1),
        SQRT_3,
        2.0 * SQRT_3 / 3.0,
        1e-13,
        1e-13,
        200,
    )?;
    let left = integrate_adaptive(
        |x| passage_density(x, k1),
        -SQRT_3 / 3.0,
        0.0,
        1e-13,
        1e-13,
        200,
    )?;
    Ok(right + left)
}

fn check_p(p0: f64, b1: f64) -> Result<()> {
    if !(p0.abs() <= b1) {
        return Err(Error::Domain {
            value: p0,
            reason: "|P0| must not exceed B1",
        });
    }
    Ok(())
}

/// Phase of `P0` given the direction in which `P` moves there.
pub fn w0_from_p(p0: f64, b1: f64, direction: PhaseDirection) -> Result<f64> {
    check_p(p0, b1)?;
    let a = (p0 / b1).clamp(-1.0, 1.0).acos();
    Ok(match direction {
        PhaseDirection::Decreasing => a,
        PhaseDirection::Increasing => TAU - a,
    })
}

fn branch_of(w1: f64) -> LandingBranch {
    if w1 <= PI {
        LandingBranch::Minus
    } else if w1 <= TAU {
        LandingBranch::Plus
    } else {
        LandingBranch::Wrapped
    }
}

/// `W1 = W0 + 3ω(1 − k1/2)` and `P1 = B1 cos W1`.
pub fn return_map_analytic(w0: f64, params: &ParameterSet) -> Result<AnalyticReturn> {
    if !(0.0..=3.0 * PI).contains(&w0) {
        return Err(Error::Domain {
            value: w0,
            reason: "W0 must lie in [0, 3π]",
        });
    }
    let mut w1 = w0 + lao_increment(params.k1(), params.omega());
    if w1 > 3.0 * PI {
        w1 -= TAU;
    }
    Ok(AnalyticReturn {
        w1,
        p1: params.b1() * w1.cos(),
        branch: branch_of(w1),
    })
}

/// Analytic return started from `P0`:
/// `P1 = B1 cos(arccos(P0/B1) ∓ 3ω(1 − k1/2))`, minus when `P` increases.
pub fn return_map_from_p(
    p0: f64,
    direction: PhaseDirection,
    params: &ParameterSet,
) -> Result<AnalyticReturn> {
    let w0 = w0_from_p(p0, params.b1(), direction)?;
    return_map_analytic(w0, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReturnOptions {
    /// Section `X = section_x` on the sheet `X < 0`, crossed with `X` rising.
    pub section_x: f64,
    pub max_time: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        Self {
            section_x: -0.3,
            max_time: 200.0,
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

/// Integrates the standard form through one loop from `P0` on the sheet
/// `X < 0` and compares the landing phase with [`return_map_from_p`].
pub fn return_map_numeric(
    params: &ParameterSet,
    p0: f64,
    direction: PhaseDirection,
    opts: &ReturnOptions,
) -> Result<ReturnMapSample> {
    let b1 = params.b1();
    if b1 == 0.0 {
        return Err(Error::TransformUndefined(
            "B1 = 0 collapses the (P, Z) circle",
        ));
    }
    let analytic = return_map_from_p(p0, direction, params)?;
    let w0 = w0_from_p(p0, b1, direction)?;
    let xs = opts.section_x;
    if !(xs < 0.0 && xs > -SQRT_3 / 3.0) {
        return Err(Error::InvalidParameter {
            name: "section_x",
            reason: format!("must lie in (−√3/3, 0), got {xs}"),
        });
    }

    let z0 = params.mu() + b1 * w0.sin();
    // slow manifold with its first-order correction
    let y0 = slow_manifold_f(xs)
        - params.epsilon() * (xs - params.k1() * slow_manifold_f(xs) + z0) / slow_manifold_df(xs);
    let start = State::<4>::new(xs, y0, b1 * w0.cos(), z0);

    let section = EventSpec::new(
        EventKind::SectionCrossing,
        Crossing::Rising,
        move |_t, s: &State<4>| s[0] - xs,
    );
    let cfg = IntegratorConfig::with_tolerances(opts.rtol, opts.atol);
    let traj = integrate(
        &StandardForm(*params),
        start,
        (0.0, opts.max_time),
        &cfg,
        &[section],
    )
    .map_err(|f| f.error)?;

    // the loop is complete once X has visited the far sheet, beyond its fold
    let far_sheet = 0.5 * (2.0 * SQRT_3 / 3.0 + SQRT_3);
    let far = traj
        .times
        .iter()
        .zip(&traj.states)
        .find(|(_, s)| s[0] > far_sheet)
        .map(|(t, _)| *t)
        .ok_or(Error::NoReturn {
            t_max: opts.max_time,
        })?;
    let landing = traj
        .events
        .iter()
        .find(|e| e.t > far)
        .ok_or(Error::NoReturn {
            t_max: opts.max_time,
        })?;

    let mut w1 = w0 + params.omega() * landing.t;
    if w1 > 3.0 * PI {
        w1 -= TAU;
    }
    Ok(ReturnMapSample {
        w0,
        w1_numeric: w1,
        w1_analytic: analytic.w1,
        p0,
        p1_numeric: landing.state[2],
        p1_analytic: analytic.p1,
        direction,
        branch: analytic.branch,
        return_time: landing.t,
    })
}
