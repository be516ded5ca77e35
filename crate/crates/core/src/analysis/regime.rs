//! Long forced runs and their classification: signature, section cloud,
//! torus and bursting flags. Parameter sweeps run through [`crate::parallel`].

use serde::{Deserialize, Serialize};

use super::signature::{
    detect_bursting, extract_signature, MMOSignature, SignatureAnalysis, SignatureConfig,
};
use super::torus::{detect_torus, TorusConfig, TorusReport};
use crate::error::{Error, Result};
use crate::integrate::{
    integrate, Crossing, EventKind, EventSpec, IntegrationFailure, IntegratorConfig, State,
    Trajectory,
};
use crate::models::{AutonomousBvp, OriginalState, ParameterSet};
use crate::parallel::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeOptions {
    /// Initial `(x, y)`.
    pub initial: [f64; 2],
    /// Initial forcing phase `ωt0`.
    pub phase: f64,
    /// Forcing periods discarded before recording.
    pub transient_periods: f64,
    pub record_periods: f64,
    pub integrator: IntegratorConfig,
    pub signature: SignatureConfig,
    pub torus: TorusConfig,
    /// Minimum length of every complete large run for bursting.
    pub burst_threshold: usize,
}

impl Default for RegimeOptions {
    fn default() -> Self {
        Self {
            initial: [-1.0, 0.0],
            phase: 0.0,
            transient_periods: 20.0,
            record_periods: 60.0,
            integrator: IntegratorConfig::default(),
            signature: SignatureConfig::default(),
            torus: TorusConfig::default(),
            burst_threshold: 5,
        }
    }
}

impl RegimeOptions {
    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if !(self.transient_periods >= 0.0 && self.transient_periods.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "transient_periods",
                reason: format!(
                    "must be finite and nonnegative, got {}",
                    self.transient_periods
                ),
            });
        }
        if !(self.record_periods > 0.0 && self.record_periods.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "record_periods",
                reason: format!("must be finite and positive, got {}", self.record_periods),
            });
        }
        if !(self.signature.large_threshold > 0.0) {
            return Err(Error::InvalidParameter {
                name: "large_threshold",
                reason: format!("must be positive, got {}", self.signature.large_threshold),
            });
        }
        Ok(())
    }

    /// `(start of recording, end of run)` in time units.
    pub fn window(&self, params: &ParameterSet) -> (f64, f64) {
        let period = params.forcing_period();
        (
            self.transient_periods * period,
            (self.transient_periods + self.record_periods) * period,
        )
    }
}

/// Integrates the autonomous forced system in original coordinates.
///
/// Recorded events: local extrema of `x` and rising crossings of `z = 0`
/// (one per forcing period). Steps before the transient are not stored.
pub fn simulate(
    params: &ParameterSet,
    opts: &RegimeOptions,
) -> std::result::Result<Trajectory<4>, IntegrationFailure<4>> {
    let (record, end) = opts.window(params);
    let start = OriginalState::at_phase(opts.initial[0], opts.initial[1], opts.phase).to_vector();
    let cfg = IntegratorConfig {
        record_start: Some(record),
        ..opts.integrator
    };
    let extremum = EventSpec::new(
        EventKind::LocalExtremum,
        Crossing::Either,
        |_t, s: &State<4>| s[1] + s[0] - s[0] * s[0] * s[0],
    );
    let section = EventSpec::new(
        EventKind::SectionCrossing,
        Crossing::Rising,
        |_t, s: &State<4>| s[3],
    );
    integrate(
        &AutonomousBvp(*params),
        start,
        (0.0, end),
        &cfg,
        &[extremum, section],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub mu: f64,
    /// Overall label: bursting and torus override the signature.
    pub regime: MMOSignature,
    pub analysis: SignatureAnalysis,
    /// `(x, y)` at rising crossings of `z = 0`.
    pub section: Vec<[f64; 2]>,
    /// Present when enough section points were recorded.
    pub torus: Option<TorusReport>,
    pub bursting: bool,
}

impl RegimeReport {
    pub fn is_torus(&self) -> bool {
        self.torus.as_ref().is_some_and(|t| t.is_torus)
    }
}

/// Classifies a trajectory produced by [`simulate`].
pub fn analyze(
    traj: &Trajectory<4>,
    params: &ParameterSet,
    opts: &RegimeOptions,
) -> Result<RegimeReport> {
    let analysis = extract_signature(traj, &opts.signature)?;
    let section: Vec<[f64; 2]> = traj
        .events_of(EventKind::SectionCrossing)
        .map(|e| [e.state[0], e.state[1]])
        .collect();
    let torus = if section.len() >= opts.torus.min_points {
        Some(detect_torus(&section, &opts.torus)?)
    } else {
        None
    };
    let bursting = detect_bursting(&analysis.classes(), opts.burst_threshold).unwrap_or(false);
    let regime = if bursting {
        MMOSignature::Bursting
    } else if torus.as_ref().is_some_and(|t| t.is_torus) {
        MMOSignature::Torus
    } else {
        analysis.signature.clone()
    };
    Ok(RegimeReport {
        mu: params.mu(),
        regime,
        analysis,
        section,
        torus,
        bursting,
    })
}

/// [`simulate`] followed by [`analyze`].
pub fn run_regime(params: &ParameterSet, opts: &RegimeOptions) -> Result<RegimeReport> {
    opts.validate()?;
    let traj = simulate(params, opts)?;
    analyze(&traj, params, opts)
}

/// One sweep row without the bulky per-oscillation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub signature: String,
    pub regime: MMOSignature,
    pub large_count: usize,
    pub small_count: usize,
    pub max_large_run: usize,
    pub period: Option<f64>,
    pub torus: bool,
    pub bursting: bool,
}

impl From<&RegimeReport> for RegimeSummary {
    fn from(r: &RegimeReport) -> Self {
        Self {
            signature: r.analysis.signature.to_string(),
            regime: r.regime.clone(),
            large_count: r.analysis.large_count,
            small_count: r.analysis.small_count,
            max_large_run: r.analysis.max_large_run(),
            period: r.analysis.period,
            torus: r.is_torus(),
            bursting: r.bursting,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub mu: f64,
    pub summary: Option<RegimeSummary>,
    /// Failure of this value; the sweep carries on.
    pub error: Option<String>,
}

/// Checks that sweep values are nonempty, finite and pairwise distinct.
pub fn validate_sweep_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter {
            name: "values",
            reason: "empty value list".into(),
        });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "values",
            reason: format!("{v} is not finite"),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter {
            name: "values",
            reason: format!("{} appears more than once", w[0]),
        });
    }
    Ok(())
}

/// Runs [`run_regime`] for each value of the named parameter.
///
/// Rows follow the order of `values` whatever the execution mode.
pub fn sweep(
    template: &ParameterSet,
    parameter: &str,
    values: &[f64],
    opts: &RegimeOptions,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    validate_sweep_values(values)?;
    opts.validate()?;
    // reject unknown names before spawning work
    template.with_named(parameter, values[0])?;
    Ok(parallel::map(values, exec, |&v| {
        let row = |mu, summary, error| SweepRow {
            parameter: parameter.to_string(),
            value: v,
            mu,
            summary,
            error,
        };
        match template.with_named(parameter, v) {
            Err(e) => row(f64::NAN, None, Some(e.to_string())),
            Ok(p) => match run_regime(&p, opts) {
                Ok(r) => row(p.mu(), Some(RegimeSummary::from(&r)), None),
                Err(e) => row(p.mu(), None, Some(e.to_string())),
            },
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(b0: f64) -> ParameterSet {
        ParameterSet::new(0.1, 0.1, 0.9, b0, 0.1).unwrap()
    }

    #[test]
    fn window_in_periods() {
        let p = fig1(0.2);
        let o = RegimeOptions::default();
        let (a, b) = o.window(&p);
        assert!((a - 20.0 * std::f64::consts::TAU / 0.1).abs() < 1e-9);
        assert!((b - 80.0 * std::f64::consts::TAU / 0.1).abs() < 1e-9);
    }

    #[test]
    fn section_once_per_period() {
        let p = fig1(0.212);
        let o = RegimeOptions {
            phase: 1.0,
            transient_periods: 1.0,
            record_periods: 5.0,
            ..Default::default()
        };
        // crossings at t = (2πk − 1)/ω, none on the window ends
        let traj = simulate(&p, &o).unwrap();
        let n = traj.events_of(EventKind::SectionCrossing).count();
        assert_eq!(n, 5);
        assert!(traj.times[0] >= o.window(&p).0);
    }

    #[test]
    fn sweep_validation() {
        let p = fig1(0.2);
        let o = RegimeOptions::default();
        assert!(sweep(&p, "b0", &[], &o, Execution::Sequential).is_err());
        assert!(sweep(&p, "b0", &[0.2, 0.2], &o, Execution::Sequential).is_err());
        assert!(sweep(&p, "b0", &[f64::NAN], &o, Execution::Sequential).is_err());
        assert!(sweep(&p, "nope", &[0.2], &o, Execution::Sequential).is_err());
        let bad = RegimeOptions {
            record_periods: 0.0,
            ..Default::default()
        };
        assert!(run_regime(&p, &bad).is_err());
    }

    #[test]
    fn unforced_relaxation_is_all_large() {
        // B0 = 0 sits far from the Hopf values: plain relaxation oscillation
        let p = ParameterSet::new(0.1, 0.1, 0.9, 0.0, 0.0).unwrap();
        let o = RegimeOptions {
            transient_periods: 1.0,
            record_periods: 3.0,
            ..Default::default()
        };
        let r = run_regime(&p, &o).unwrap();
        assert_eq!(r.regime, MMOSignature::Relaxation);
        assert!(!r.bursting);
        assert!(r.torus.is_none());
    }
}
