//! Five-stage, L-stable, stiffly accurate SDIRK pair of orders 4(3)
//! (Hairer & Wanner, "Solving ODEs II", table IV.6.5), solved stage by stage
//! with a simplified Newton iteration.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::dense::HermiteStep;
use super::{IntegratorConfig, State, VectorField};
use crate::error::{Error, Result};

pub(crate) const GAMMA: f64 = 0.25;
pub(crate) const STAGES: usize = 5;

pub(crate) const C: [f64; STAGES] = [0.25, 0.75, 11.0 / 20.0, 0.5, 1.0];

pub(crate) const A: [[f64; STAGES]; STAGES] = [
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [0.5, 0.25, 0.0, 0.0, 0.0],
    [17.0 / 50.0, -1.0 / 25.0, 0.25, 0.0, 0.0],
    [371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0.0],
    [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25],
];

/// Weights of the order-3 embedded solution. The order-4 weights are the last
/// row of `A`.
pub(crate) const B_HAT: [f64; STAGES] =
    [59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0];

const NEWTON_MAX_ITER: usize = 10;
const NEWTON_TOL: f64 = 1e-2;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_failures: usize,
    pub rhs_evals: usize,
    pub jacobian_evals: usize,
}

/// Adaptive stepper state. `advance` performs one accepted step.
pub(crate) struct Stepper<'f, F: ?Sized, const N: usize> {
    field: &'f F,
    cfg: IntegratorConfig,
    pub t: f64,
    pub y: State<N>,
    pub f: State<N>,
    h: f64,
    pub stats: StepStats,
}

fn weighted_rms<const N: usize>(
    v: &State<N>,
    y0: &State<N>,
    y1: &State<N>,
    cfg: &IntegratorConfig,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = cfg.atol + cfg.rtol * y0[i].abs().max(y1[i].abs());
        let r = v[i] / sc;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn solve<const N: usize>(lu: &LU<f64, Dyn, Dyn>, b: &State<N>) -> Option<State<N>> {
    let x = lu.solve(&DVector::from_column_slice(b.as_slice()))?;
    Some(State::<N>::from_column_slice(x.as_slice()))
}

impl<'f, F, const N: usize> Stepper<'f, F, N>
where
    F: VectorField<N> + ?Sized,
{
    pub fn new(field: &'f F, t0: f64, y0: State<N>, t_end: f64, cfg: IntegratorConfig) -> Self {
        let f0 = field.eval(t0, &y0);
        let mut s = Self {
            field,
            cfg,
            t: t0,
            y: y0,
            f: f0,
            h: 0.0,
            stats: StepStats {
                rhs_evals: 1,
                ..Default::default()
            },
        };
        s.h = s.initial_step(t_end);
        s
    }

    fn initial_step(&mut self, t_end: f64) -> f64 {
        let span = t_end - self.t;
        if let Some(h) = self.cfg.initial_step {
            return h.min(span).min(self.cfg.step_cap());
        }
        let zero = State::<N>::zeros();
        let d0 = weighted_rms(&self.y, &self.y, &zero, &self.cfg);
        let d1 = weighted_rms(&self.f, &self.y, &zero, &self.cfg);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1 = self.y + self.f * h0;
        let f1 = self.field.eval(self.t + h0, &y1);
        self.stats.rhs_evals += 1;
        let d2 = weighted_rms(&(f1 - self.f), &self.y, &zero, &self.cfg) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span).min(self.cfg.step_cap())
    }

    /// Attempts steps until one is accepted; never steps past `t_end`.
    pub fn advance(&mut self, t_end: f64) -> Result<HermiteStep<N>> {
        let mut last_rejected = false;
        loop {
            let remaining = t_end - self.t;
            let mut h = self.h.min(self.cfg.step_cap());
            // avoid a sliver step at the end
            if h >= remaining || h > 0.9 * remaining {
                h = if h >= remaining {
                    remaining
                } else {
                    0.5 * remaining
                };
            }
            let h_min = 16.0 * f64::EPSILON * self.t.abs().max(1.0);
            if h < h_min {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }

            match self.try_step(h) {
                Some((y1, err)) => {
                    if err <= 1.0 {
                        let f1 = self.field.eval(self.t + h, &y1);
                        self.stats.rhs_evals += 1;
                        self.stats.accepted += 1;
                        let t1 = if h == remaining { t_end } else { self.t + h };
                        let step = HermiteStep {
                            t0: self.t,
                            t1,
                            y0: self.y,
                            y1,
                            f0: self.f,
                            f1,
                        };
                        let mut fac = SAFETY * err.max(1e-10).powf(-0.25);
                        fac = fac.clamp(FAC_MIN, FAC_MAX);
                        if last_rejected {
                            fac = fac.min(1.0);
                        }
                        self.h = h * fac;
                        self.t = t1;
                        self.y = y1;
                        self.f = f1;
                        return Ok(step);
                    }
                    self.stats.rejected += 1;
                    last_rejected = true;
                    let fac = (SAFETY * err.powf(-0.25)).clamp(FAC_MIN, 1.0);
                    self.h = h * fac;
                }
                None => {
                    self.stats.newton_failures += 1;
                    last_rejected = true;
                    self.h = h * 0.25;
                }
            }
        }
    }

    /// One SDIRK step of size `h`. Returns the new state and the scaled
    /// error norm, or `None` when a Newton iteration fails to converge.
    fn try_step(&mut self, h: f64) -> Option<(State<N>, f64)> {
        let t0 = self.t;
        let y0 = self.y;
        let jac = self.field.jacobian(t0, &y0);
        self.stats.jacobian_evals += 1;
        // const-generic LU lacks the needed trait bounds; N is tiny, so go dynamic
        let m = DMatrix::<f64>::identity(N, N)
            - DMatrix::from_column_slice(N, N, jac.as_slice()) * (h * GAMMA);
        let lu = m.lu();

        let mut k = [State::<N>::zeros(); STAGES];
        let mut z = y0;
        for i in 0..STAGES {
            let mut base = y0;
            for (j, kj) in k.iter().enumerate().take(i) {
                base += kj * (h * A[i][j]);
            }
            // predictor: previous stage slope
            let slope = if i == 0 { self.f } else { k[i - 1] };
            z = base + slope * (h * GAMMA);
            let ti = t0 + C[i] * h;
            let mut converged = false;
            let mut prev_norm = f64::INFINITY;
            for _ in 0..NEWTON_MAX_ITER {
                let fz = self.field.eval(ti, &z);
                self.stats.rhs_evals += 1;
                let residual = z - base - fz * (h * GAMMA);
                let delta = solve(&lu, &(-residual))?;
                z += delta;
                let norm = weighted_rms(&delta, &y0, &z, &self.cfg);
                if !norm.is_finite() {
                    return None;
                }
                if norm <= NEWTON_TOL {
                    converged = true;
                    break;
                }
                if norm > 2.0 * prev_norm {
                    return None;
                }
                prev_norm = norm;
            }
            if !converged {
                return None;
            }
            k[i] = (z - base) / (h * GAMMA);
        }
        let y1 = z;
        let mut err = State::<N>::zeros();
        for i in 0..STAGES {
            err += k[i] * (h * (A[STAGES - 1][i] - B_HAT[i]));
        }
        // filter the estimate through (I - hγJ)^-1 for stiff components
        let err = solve(&lu, &err).unwrap_or(err);
        let norm = weighted_rms(&err, &y0, &y1, &self.cfg);
        if !norm.is_finite() {
            return None;
        }
        Some((y1, norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_row_sums_match_nodes() {
        for i in 0..STAGES {
            let s: f64 = A[i].iter().sum();
            assert!((s - C[i]).abs() < 1e-15, "row {i}");
        }
    }

    // Order conditions of the main (order 4) and embedded (order 3) weights.
    #[test]
    fn order_conditions() {
        let b = A[STAGES - 1];
        let dot =
            |u: &[f64; STAGES], v: &[f64; STAGES]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let mut ac = [0.0; STAGES];
        let mut ac2 = [0.0; STAGES];
        for i in 0..STAGES {
            for j in 0..STAGES {
                ac[i] += A[i][j] * C[j];
                ac2[i] += A[i][j] * C[j] * C[j];
            }
        }
        let mut aac = [0.0; STAGES];
        for i in 0..STAGES {
            for j in 0..STAGES {
                aac[i] += A[i][j] * ac[j];
            }
        }
        let ones = [1.0; STAGES];
        let c2 = C.map(|c| c * c);
        let c3 = C.map(|c| c * c * c);
        let mut cac = [0.0; STAGES];
        for i in 0..STAGES {
            cac[i] = C[i] * ac[i];
        }
        for (w, order) in [(b, 4), (B_HAT, 3)] {
            assert!((dot(&w, &ones) - 1.0).abs() < 1e-14);
            assert!((dot(&w, &C) - 0.5).abs() < 1e-14);
            assert!((dot(&w, &c2) - 1.0 / 3.0).abs() < 1e-14);
            assert!((dot(&w, &ac) - 1.0 / 6.0).abs() < 1e-14);
            if order == 4 {
                assert!((dot(&w, &c3) - 0.25).abs() < 1e-13);
                assert!((dot(&w, &cac) - 0.125).abs() < 1e-13);
                assert!((dot(&w, &ac2) - 1.0 / 12.0).abs() < 1e-13);
                assert!((dot(&w, &aac) - 1.0 / 24.0).abs() < 1e-13);
            }
        }
    }
}
