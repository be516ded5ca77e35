//! Adaptive stiff integration with dense event location.
//!
//! Every model in the crate implements [`VectorField`]; [`integrate`] drives
//! the implicit stepper over a time span, records the accepted steps and
//! locates sign changes of user supplied event functions on the step
//! interpolant.

mod dense;
mod events;
mod sdirk;

use std::collections::BTreeMap;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dense::HermiteStep;
pub use events::{Crossing, EventKind, EventSpec, SectionEvent};
pub use sdirk::StepStats;

use events::EventTracker;
use sdirk::Stepper;

pub type State<const N: usize> = SVector<f64, N>;

/// Coordinate chart a trajectory is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// Planar forced system with explicit time, `(x, y)`.
    Forced,
    /// Autonomous embedding `(x, y, p, z)`.
    Original,
    /// Fold-centred coordinates `(X, Y, P, Z)`.
    Standard,
    /// Family-chart coordinates `(X̄, Ȳ, P̄, Z̄)`.
    Rescaled,
    /// Desingularized slow flow `(X, P, Z)`.
    SlowFlow,
    Prototype,
    Generalized,
    /// Frozen planar fold system used by the canard computation.
    FoldChart,
    Other,
}

/// A (possibly non-autonomous) vector field `dy/dt = f(t, y)`.
pub trait VectorField<const N: usize>: Sync {
    fn eval(&self, t: f64, y: &State<N>) -> State<N>;

    /// Jacobian `∂f/∂y`. The default uses central differences.
    fn jacobian(&self, t: f64, y: &State<N>) -> SMatrix<f64, N, N> {
        finite_difference_jacobian(|s| self.eval(t, s), y)
    }

    fn chart(&self) -> Chart {
        Chart::Other
    }

    /// Named parameter values recorded with every trajectory.
    fn snapshot(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }
}

pub fn finite_difference_jacobian<const N: usize, G>(g: G, y: &State<N>) -> SMatrix<f64, N, N>
where
    G: Fn(&State<N>) -> State<N>,
{
    let mut jac = SMatrix::<f64, N, N>::zeros();
    for j in 0..N {
        let h = f64::EPSILON.cbrt() * y[j].abs().max(1.0);
        let mut yp = *y;
        let mut ym = *y;
        yp[j] += h;
        ym[j] -= h;
        let col = (g(&yp) - g(&ym)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}

/// Wraps a closure as a vector field.
pub struct FnField<G>(pub G);

impl<G, const N: usize> VectorField<N> for FnField<G>
where
    G: Fn(f64, &State<N>) -> State<N> + Sync,
{
    fn eval(&self, t: f64, y: &State<N>) -> State<N> {
        (self.0)(t, y)
    }
}

/// Time-reversed field: integrating it forward in `s` follows the original
/// field backward in `t = -s`.
pub struct Reversed<'a, F: ?Sized>(pub &'a F);

impl<F, const N: usize> VectorField<N> for Reversed<'_, F>
where
    F: VectorField<N> + ?Sized,
{
    fn eval(&self, s: f64, y: &State<N>) -> State<N> {
        -self.0.eval(-s, y)
    }
    fn jacobian(&self, s: f64, y: &State<N>) -> SMatrix<f64, N, N> {
        -self.0.jacobian(-s, y)
    }
    fn chart(&self) -> Chart {
        self.0.chart()
    }
    fn snapshot(&self) -> BTreeMap<String, f64> {
        self.0.snapshot()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size; unbounded when absent.
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    pub event_tol: f64,
    pub max_steps: usize,
    /// Accepted steps (and events) before this time are not stored.
    pub record_start: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: None,
            initial_step: None,
            event_tol: 1e-10,
            max_steps: 10_000_000,
            record_start: None,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn step_cap(&self) -> f64 {
        self.max_step.unwrap_or(f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("event_tol", self.event_tol),
        ];
        for (name, v) in checks {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        if let Some(h) = self.max_step {
            if h.is_nan() || h <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "max_step",
                    reason: format!("must be positive, got {h}"),
                });
            }
        }
        if let Some(h) = self.initial_step {
            if h.is_nan() || h <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "initial_step",
                    reason: format!("must be positive, got {h}"),
                });
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_steps",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Adaptively sampled solution with its located events.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<State<N>>,
    /// Right-hand side at each stored state; used for Hermite interpolation.
    pub derivatives: Vec<State<N>>,
    pub chart: Chart,
    pub params: BTreeMap<String, f64>,
    pub events: Vec<SectionEvent<N>>,
    pub stats: StepStats,
    /// Event sign changes discarded as tangential grazes.
    pub grazes: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&State<N>> {
        self.states.last()
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// Dense state at `t` from the stored steps, or `None` outside the
    /// recorded range.
    pub fn state_at(&self, t: f64) -> Option<State<N>> {
        let (first, last) = (*self.times.first()?, *self.times.last()?);
        if t < first || t > last {
            return None;
        }
        let idx = self.times.partition_point(|&s| s <= t);
        if idx == 0 {
            return Some(self.states[0]);
        }
        if idx >= self.times.len() {
            return self.states.last().copied();
        }
        let step = HermiteStep {
            t0: self.times[idx - 1],
            t1: self.times[idx],
            y0: self.states[idx - 1],
            y1: self.states[idx],
            f0: self.derivatives[idx - 1],
            f1: self.derivatives[idx],
        };
        Some(step.at(t))
    }

    /// Events of one kind, in time order.
    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &SectionEvent<N>> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

/// Integration failure carrying the trajectory computed so far.
#[derive(Debug, Clone)]
pub struct IntegrationFailure<const N: usize> {
    pub error: Error,
    pub partial: Trajectory<N>,
}

impl<const N: usize> std::fmt::Display for IntegrationFailure<N> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (partial trajectory with {} points)",
            self.error,
            self.partial.len()
        )
    }
}

impl<const N: usize> std::error::Error for IntegrationFailure<N> {}

impl<const N: usize> From<IntegrationFailure<N>> for Error {
    fn from(f: IntegrationFailure<N>) -> Self {
        f.error
    }
}

fn check_span(t0: f64, t1: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
        return Err(Error::InvalidTimeSpan { start: t0, end: t1 });
    }
    Ok(())
}

/// Integrates `field` from `(t_span.0, y0)` to `t_span.1`.
///
/// Sign changes of every event function are located on the step
/// interpolant to `config.event_tol`.
pub fn integrate<F, const N: usize>(
    field: &F,
    y0: State<N>,
    t_span: (f64, f64),
    config: &IntegratorConfig,
    events: &[EventSpec<'_, N>],
) -> std::result::Result<Trajectory<N>, IntegrationFailure<N>>
where
    F: VectorField<N> + ?Sized,
{
    let (t0, t_end) = t_span;
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        derivatives: Vec::new(),
        chart: field.chart(),
        params: field.snapshot(),
        events: Vec::new(),
        stats: StepStats::default(),
        grazes: 0,
    };
    if let Err(error) = config.validate().and_then(|_| check_span(t0, t_end)) {
        return Err(IntegrationFailure {
            error,
            partial: traj,
        });
    }

    let record_from = config.record_start.unwrap_or(f64::NEG_INFINITY);
    let mut stepper = Stepper::new(field, t0, y0, t_end, *config);
    let mut tracker = EventTracker::new(events, t0, &y0, config.event_tol);
    if t0 >= record_from {
        traj.times.push(t0);
        traj.states.push(y0);
        traj.derivatives.push(stepper.f);
    }

    let mut failure = None;
    while stepper.t < t_end {
        if stepper.stats.accepted >= config.max_steps {
            failure = Some(Error::MaxStepsExceeded {
                max_steps: config.max_steps,
                t: stepper.t,
            });
            break;
        }
        let step = match stepper.advance(t_end) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        for ev in tracker.process(&step) {
            if ev.t >= record_from {
                traj.events.push(ev);
            }
        }
        if step.t1 >= record_from {
            traj.times.push(step.t1);
            traj.states.push(step.y1);
            traj.derivatives.push(step.f1);
        }
    }

    if let Some(&first) = traj.times.first() {
        traj.events.retain(|e| e.t >= first);
    }
    traj.stats = stepper.stats;
    traj.grazes = tracker.grazes;
    match failure {
        None => Ok(traj),
        Some(error) => Err(IntegrationFailure {
            error,
            partial: traj,
        }),
    }
}

/// Options for [`poincare_section`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionOptions {
    pub n_crossings: usize,
    /// Crossings before `t0 + transient` are skipped.
    pub transient: f64,
    /// Integration stops with a timeout error at `t0 + max_time`.
    pub max_time: f64,
}

/// Collects the first `n_crossings` directed crossings of `section` after the
/// transient. The trajectory itself is not stored.
pub fn poincare_section<F, const N: usize>(
    field: &F,
    y0: State<N>,
    t0: f64,
    section: &EventSpec<'_, N>,
    options: SectionOptions,
    config: &IntegratorConfig,
) -> Result<Vec<SectionEvent<N>>>
where
    F: VectorField<N> + ?Sized,
{
    config.validate()?;
    let t_end = t0 + options.max_time;
    check_span(t0, t_end)?;
    let t_collect = t0 + options.transient;
    let specs = std::slice::from_ref(section);
    let mut stepper = Stepper::new(field, t0, y0, t_end, *config);
    let mut tracker = EventTracker::new(specs, t0, &y0, config.event_tol);
    let mut out = Vec::with_capacity(options.n_crossings);
    while stepper.t < t_end {
        if stepper.stats.accepted >= config.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: config.max_steps,
                t: stepper.t,
            });
        }
        let step = stepper.advance(t_end)?;
        for ev in tracker.process(&step) {
            if ev.t >= t_collect {
                out.push(ev);
                if out.len() == options.n_crossings {
                    return Ok(out);
                }
            }
        }
    }
    if out.is_empty() {
        Err(Error::SectionTimeout { t_max: t_end })
    } else {
        Err(Error::InsufficientData(format!(
            "only {} of {} section crossings before t = {t_end}",
            out.len(),
            options.n_crossings
        )))
    }
}

/// Integrates until the first event fires and returns it together with the
/// number of accepted steps. Used for shooting-type computations.
pub fn integrate_to_event<F, const N: usize>(
    field: &F,
    y0: State<N>,
    t_span: (f64, f64),
    config: &IntegratorConfig,
    event: &EventSpec<'_, N>,
) -> Result<SectionEvent<N>>
where
    F: VectorField<N> + ?Sized,
{
    let opts = SectionOptions {
        n_crossings: 1,
        transient: 0.0,
        max_time: t_span.1 - t_span.0,
    };
    poincare_section(field, y0, t_span.0, event, opts, config)?
        .pop()
        .ok_or(Error::SectionTimeout { t_max: t_span.1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);
    impl VectorField<1> for Decay {
        fn eval(&self, _t: f64, y: &State<1>) -> State<1> {
            State::<1>::new(-self.0 * y[0])
        }
        fn jacobian(&self, _t: f64, _y: &State<1>) -> SMatrix<f64, 1, 1> {
            SMatrix::<f64, 1, 1>::new(-self.0)
        }
    }

    struct Rotation(f64);
    impl VectorField<2> for Rotation {
        fn eval(&self, _t: f64, y: &State<2>) -> State<2> {
            State::<2>::new(-self.0 * y[1], self.0 * y[0])
        }
    }

    #[test]
    fn stiff_linear_decay_matches_exponential() {
        let lambda = 1e4;
        let cfg = IntegratorConfig::default();
        let traj = integrate(&Decay(lambda), State::<1>::new(1.0), (0.0, 1.0), &cfg, &[]).unwrap();
        for (t, y) in traj.times.iter().zip(&traj.states) {
            let exact = (-lambda * t).exp();
            assert!(
                (y[0] - exact).abs() <= cfg.rtol * exact.abs() + 10.0 * cfg.atol,
                "t={t}"
            );
        }
        // L-stability keeps the stiff problem cheap
        assert!(traj.stats.accepted < 500, "{:?}", traj.stats);
    }

    #[test]
    fn rotation_returns_after_one_period() {
        let omega = 0.1;
        let cfg = IntegratorConfig::default();
        let period = std::f64::consts::TAU / omega;
        let traj = integrate(
            &Rotation(omega),
            State::<2>::new(1.0, 0.0),
            (0.0, period),
            &cfg,
            &[],
        )
        .unwrap();
        let end = traj.last_state().unwrap();
        assert!((end[0] - 1.0).abs() < 10.0 * cfg.rtol, "{end}");
        assert!(end[1].abs() < 10.0 * cfg.rtol, "{end}");
        assert_eq!(*traj.times.last().unwrap(), period);
    }

    #[test]
    fn rejects_empty_span_and_bad_tolerances() {
        let cfg = IntegratorConfig::default();
        let err = integrate(&Decay(1.0), State::<1>::new(1.0), (1.0, 1.0), &cfg, &[]).unwrap_err();
        assert!(matches!(err.error, Error::InvalidTimeSpan { .. }));
        let bad = IntegratorConfig { rtol: 0.0, ..cfg };
        assert!(integrate(&Decay(1.0), State::<1>::new(1.0), (0.0, 1.0), &bad, &[]).is_err());
    }

    #[test]
    fn max_steps_returns_partial_trajectory() {
        let cfg = IntegratorConfig {
            max_steps: 5,
            max_step: Some(0.01),
            ..Default::default()
        };
        let err = integrate(
            &Rotation(1.0),
            State::<2>::new(1.0, 0.0),
            (0.0, 10.0),
            &cfg,
            &[],
        )
        .unwrap_err();
        assert!(matches!(
            err.error,
            Error::MaxStepsExceeded { max_steps: 5, .. }
        ));
        assert_eq!(err.partial.len(), 6);
    }

    #[test]
    fn step_underflow_on_blow_up() {
        // y' = y^2 blows up at t = 1
        let field = FnField(|_t: f64, y: &State<1>| State::<1>::new(y[0] * y[0]));
        let err = integrate(
            &field,
            State::<1>::new(1.0),
            (0.0, 2.0),
            &IntegratorConfig::default(),
            &[],
        )
        .unwrap_err();
        assert!(
            matches!(
                err.error,
                Error::StepSizeUnderflow { .. } | Error::MaxStepsExceeded { .. }
            ),
            "{:?}",
            err.error
        );
        // stops at the blow-up time to within the tolerance
        assert!((*err.partial.times.last().unwrap() - 1.0).abs() < 1e-6);
        assert!(err.partial.last_state().unwrap()[0] > 1e6);
    }

    #[test]
    fn circle_crossings_alternate() {
        let omega = 0.1;
        let field = Rotation(omega);
        // state = (p, z); crossings of z = 0 at t = kπ/ω
        let ev = EventSpec::new(
            EventKind::SectionCrossing,
            Crossing::Either,
            |_t, y: &State<2>| y[1],
        );
        let period = std::f64::consts::TAU / omega;
        let traj = integrate(
            &field,
            State::<2>::new(1.0, 0.0),
            (0.0, 3.0 * period),
            &IntegratorConfig::default(),
            &[ev],
        )
        .unwrap();
        assert_eq!(traj.events.len(), 5);
        for (k, e) in traj.events.iter().enumerate() {
            let expected = (k + 1) as f64 * std::f64::consts::PI / omega;
            assert!((e.t - expected).abs() < 1e-6, "{} vs {}", e.t, expected);
            let dir = if k % 2 == 0 { -1 } else { 1 };
            assert_eq!(e.direction, dir);
        }
    }

    #[test]
    fn reversed_field_integrates_backward() {
        let field = Decay(2.0);
        let traj = integrate(
            &Reversed(&field),
            State::<1>::new(1.0),
            (0.0, 1.0),
            &IntegratorConfig::default(),
            &[],
        )
        .unwrap();
        let y = traj.last_state().unwrap()[0];
        assert!((y - 2f64.exp()).abs() < 1e-6);
    }

    #[test]
    fn dense_state_matches_exact_solution() {
        let field = Rotation(1.0);
        let traj = integrate(
            &field,
            State::<2>::new(1.0, 0.0),
            (0.0, 5.0),
            &IntegratorConfig::default(),
            &[],
        )
        .unwrap();
        for i in 0..50 {
            let t = 0.1 * i as f64 + 0.013;
            let s = traj.state_at(t).unwrap();
            assert!((s[0] - t.cos()).abs() < 1e-6);
            assert!((s[1] - t.sin()).abs() < 1e-6);
        }
        assert!(traj.state_at(5.1).is_none());
    }
}
