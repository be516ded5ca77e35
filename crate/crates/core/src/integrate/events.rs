use serde::{Deserialize, Serialize};

use super::dense::HermiteStep;
use super::State;
use crate::numeric::brent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    SectionCrossing,
    FoldCrossing,
    LocalExtremum,
    DomainWall,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::SectionCrossing => "section-crossing",
            EventKind::FoldCrossing => "fold-crossing",
            EventKind::LocalExtremum => "local-extremum",
            EventKind::DomainWall => "domain-wall",
        }
    }
}

/// Which sign changes of the event function are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Crossing {
    /// negative to positive
    Rising,
    /// positive to negative
    Falling,
    Either,
}

impl Crossing {
    fn accepts(self, direction: i8) -> bool {
        match self {
            Crossing::Rising => direction > 0,
            Crossing::Falling => direction < 0,
            Crossing::Either => true,
        }
    }
}

type EventFn<'a, const N: usize> = dyn Fn(f64, &State<N>) -> f64 + Sync + 'a;

pub struct EventSpec<'a, const N: usize> {
    pub kind: EventKind,
    pub crossing: Crossing,
    func: Box<EventFn<'a, N>>,
}

impl<'a, const N: usize> EventSpec<'a, N> {
    pub fn new<G>(kind: EventKind, crossing: Crossing, g: G) -> Self
    where
        G: Fn(f64, &State<N>) -> f64 + Sync + 'a,
    {
        Self {
            kind,
            crossing,
            func: Box::new(g),
        }
    }

    pub fn eval(&self, t: f64, y: &State<N>) -> f64 {
        (self.func)(t, y)
    }
}

impl<const N: usize> std::fmt::Debug for EventSpec<'_, N> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventSpec")
            .field("kind", &self.kind)
            .field("crossing", &self.crossing)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionEvent<const N: usize> {
    pub t: f64,
    pub state: State<N>,
    pub kind: EventKind,
    /// +1 for a rising crossing of the event function, -1 for falling.
    pub direction: i8,
    /// Position of the event function in the list passed to the integrator.
    pub index: usize,
}

// Sub-intervals of each step inspected for sign changes; catches pairs of
// roots that fall inside a single step.
const SUBDIVISIONS: usize = 4;
// A crossing whose slope changes g by less than this many event tolerances
// over max(step, 1) time units is treated as a tangential graze.
const GRAZE_FACTOR: f64 = 10.0;

pub(crate) struct EventTracker<'s, 'a, const N: usize> {
    specs: &'s [EventSpec<'a, N>],
    last: Vec<f64>,
    tol: f64,
    pub grazes: usize,
}

impl<'s, 'a, const N: usize> EventTracker<'s, 'a, N> {
    pub fn new(specs: &'s [EventSpec<'a, N>], t0: f64, y0: &State<N>, tol: f64) -> Self {
        let last = specs.iter().map(|s| s.eval(t0, y0)).collect();
        Self {
            specs,
            last,
            tol,
            grazes: 0,
        }
    }

    /// Locates the events inside an accepted step, in time order.
    pub fn process(&mut self, step: &HermiteStep<N>) -> Vec<SectionEvent<N>> {
        let mut found = Vec::new();
        let h = step.h();
        let specs = self.specs;
        for (index, spec) in specs.iter().enumerate() {
            let g_end = spec.eval(step.t1, &step.y1);
            let mut theta_a = 0.0;
            let mut g_a = self.last[index];
            for k in 1..=SUBDIVISIONS {
                let theta_b = k as f64 / SUBDIVISIONS as f64;
                let g_b = if k == SUBDIVISIONS {
                    g_end
                } else {
                    let tb = step.t0 + theta_b * h;
                    spec.eval(tb, &step.at_theta(theta_b))
                };
                let crosses = (g_a < 0.0 && g_b >= 0.0) || (g_a > 0.0 && g_b <= 0.0);
                if crosses {
                    let direction: i8 = if g_b > g_a { 1 } else { -1 };
                    if spec.crossing.accepts(direction) {
                        if let Some(ev) =
                            self.refine(spec, step, theta_a, theta_b, g_b, direction, index)
                        {
                            found.push(ev);
                        }
                    }
                }
                theta_a = theta_b;
                g_a = g_b;
            }
            self.last[index] = g_end;
        }
        found.sort_by(|a, b| a.t.total_cmp(&b.t));
        found
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        spec: &EventSpec<'a, N>,
        step: &HermiteStep<N>,
        theta_a: f64,
        theta_b: f64,
        g_b: f64,
        direction: i8,
        index: usize,
    ) -> Option<SectionEvent<N>> {
        let h = step.h();
        let g_theta = |theta: f64| spec.eval(step.t0 + theta * h, &step.at_theta(theta));
        let theta = if g_b == 0.0 {
            theta_b
        } else {
            brent(g_theta, theta_a, theta_b, 1e-14, self.tol * 1e-2, 200)?
        };
        // slope of g along the interpolant
        let d = 1e-6;
        let (lo, hi) = ((theta - d).max(0.0), (theta + d).min(1.0));
        let slope = (g_theta(hi) - g_theta(lo)) / ((hi - lo) * h);
        if slope.abs() * h.max(1.0) < GRAZE_FACTOR * self.tol {
            self.grazes += 1;
            return None;
        }
        let t = if theta == 1.0 {
            step.t1
        } else {
            step.t0 + theta * h
        };
        let state = if theta == 1.0 {
            step.y1
        } else {
            step.at_theta(theta)
        };
        Some(SectionEvent {
            t,
            state,
            kind: spec.kind,
            direction,
            index,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_step() -> HermiteStep<1> {
        // y(t) = t on [0, 1]
        HermiteStep {
            t0: 0.0,
            t1: 1.0,
            y0: State::<1>::new(0.0),
            y1: State::<1>::new(1.0),
            f0: State::<1>::new(1.0),
            f1: State::<1>::new(1.0),
        }
    }

    #[test]
    fn finds_two_roots_in_one_step() {
        // (y - 0.3)(y - 0.7) changes sign twice
        let spec = EventSpec::new(
            EventKind::LocalExtremum,
            Crossing::Either,
            |_t, y: &State<1>| (y[0] - 0.3) * (y[0] - 0.7),
        );
        let specs = [spec];
        let step = linear_step();
        let mut tr = EventTracker::new(&specs, 0.0, &step.y0, 1e-12);
        let evs = tr.process(&step);
        assert_eq!(evs.len(), 2);
        assert!((evs[0].t - 0.3).abs() < 1e-10);
        assert_eq!(evs[0].direction, -1);
        assert!((evs[1].t - 0.7).abs() < 1e-10);
        assert_eq!(evs[1].direction, 1);
    }

    #[test]
    fn direction_filter() {
        let spec = EventSpec::new(
            EventKind::SectionCrossing,
            Crossing::Falling,
            |_t, y: &State<1>| y[0] - 0.5,
        );
        let specs = [spec];
        let step = linear_step();
        let mut tr = EventTracker::new(&specs, 0.0, &step.y0, 1e-12);
        assert!(tr.process(&step).is_empty());
    }

    #[test]
    fn tangential_graze_is_discarded() {
        // g has slope ~1e-12 through its zero
        let spec = EventSpec::new(
            EventKind::SectionCrossing,
            Crossing::Either,
            |_t, y: &State<1>| 1e-12 * (y[0] - 0.5),
        );
        let specs = [spec];
        let step = linear_step();
        let mut tr = EventTracker::new(&specs, 0.0, &step.y0, 1e-10);
        assert!(tr.process(&step).is_empty());
        assert_eq!(tr.grazes, 1);
    }
}
