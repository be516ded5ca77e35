use std::io::Write;
use std::path::{Path, PathBuf};

use bvpmmo::analysis::signature::{classify_series, detect_bursting};
use bvpmmo::analysis::{
    bautin_locate, hopf_locate, lao_increment, return_integral, return_map_from_p,
    return_map_numeric, sweep, PhaseDirection, ReturnOptions, SignatureConfig,
};
use bvpmmo::canard::{numeric_canard_split, p_critical, z_critical, CanardOptions};
use bvpmmo::integrate::{
    integrate, Crossing, EventKind, EventSpec, IntegrationFailure, IntegratorConfig, State,
    StepStats, Trajectory, VectorField,
};
use bvpmmo::models::{
    from_standard, to_standard, AutonomousBvp, ForcedBvp, OriginalState, ParameterSet,
    StandardForm, StandardState,
};
use bvpmmo::parallel::Execution;
use bvpmmo::slowfast::folded_equilibria;
use serde::Serialize;

use crate::config::{Format, ModelKind, RunConfig, SweepSpec};
use crate::error::CliError;
use crate::output::{self, EventRow, Row, FORMAT_VERSION};

/// A simulation in original coordinates, possibly cut short.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub rows: Vec<Row>,
    pub events: Vec<EventRow>,
    pub stats: StepStats,
    pub error: Option<CliError>,
}

fn event_specs<'a, const N: usize, F: VectorField<N>>(
    field: &'a F,
    section: impl Fn(f64, &State<N>) -> f64 + Sync + 'a,
) -> [EventSpec<'a, N>; 2] {
    [
        // x' = 0 (standard chart: X' = 0)
        EventSpec::new(
            EventKind::LocalExtremum,
            Crossing::Either,
            move |t, s: &State<N>| field.eval(t, s)[0],
        ),
        EventSpec::new(EventKind::SectionCrossing, Crossing::Rising, section),
    ]
}

fn split<const N: usize>(
    r: Result<Trajectory<N>, IntegrationFailure<N>>,
) -> (Trajectory<N>, Option<CliError>) {
    match r {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(CliError::numerical(f.error.to_string()))),
    }
}

fn events_of<const N: usize>(
    traj: &Trajectory<N>,
    mut conv: impl FnMut(f64, &State<N>) -> [f64; 5],
) -> Vec<EventRow> {
    traj.events
        .iter()
        .map(|e| {
            let r = conv(e.t, &e.state);
            EventRow {
                t: r[0],
                kind: e.kind.as_str(),
                direction: e.direction,
                state: [r[1], r[2], r[3], r[4]],
            }
        })
        .collect()
}

pub fn run_simulation(cfg: &RunConfig) -> Result<Simulation, CliError> {
    cfg.validate()?;
    let params = cfg.params;
    let (start, end, record) = cfg.span();
    let icfg = IntegratorConfig {
        record_start: Some(record),
        ..cfg.run.integrator
    };
    let [x0, y0] = cfg.run.initial;
    let phase = cfg.run.phase;
    let initial = OriginalState::at_phase(x0, y0, phase);

    match cfg.model {
        ModelKind::Original => {
            let field = AutonomousBvp(params);
            let ev = event_specs(&field, |_t, s: &State<4>| s[3]);
            let (traj, error) = split(integrate(
                &field,
                initial.to_vector(),
                (start, end),
                &icfg,
                &ev,
            ));
            let conv = |t: f64, s: &State<4>| [t, s[0], s[1], s[2], s[3]];
            Ok(Simulation {
                rows: traj
                    .times
                    .iter()
                    .zip(&traj.states)
                    .map(|(&t, s)| conv(t, s))
                    .collect(),
                events: events_of(&traj, conv),
                stats: traj.stats,
                error,
            })
        }
        ModelKind::Standard => {
            let field = StandardForm(params);
            let mu = params.mu();
            let ev = event_specs(&field, move |_t, s: &State<4>| s[3] - mu);
            let y0 = to_standard(&initial, &params)?.to_vector();
            let (traj, error) = split(integrate(&field, y0, (start, end), &icfg, &ev));
            let conv = |t: f64, s: &State<4>| {
                // B1 > 0 is checked by validate
                let o = from_standard(&StandardState::from_vector(s), &params)
                    .expect("B1 > 0")
                    .to_vector();
                [t, o[0], o[1], o[2], o[3]]
            };
            Ok(Simulation {
                rows: traj
                    .times
                    .iter()
                    .zip(&traj.states)
                    .map(|(&t, s)| conv(t, s))
                    .collect(),
                events: events_of(&traj, conv),
                stats: traj.stats,
                error,
            })
        }
        ModelKind::Forced => {
            // explicit forcing time is shifted so that ωt starts at `phase`
            let w = params.omega();
            let offset = phase / w;
            let field = ForcedBvp(params);
            let ev = event_specs(&field, move |t, _s: &State<2>| (w * t).sin());
            let icfg = IntegratorConfig {
                record_start: Some(record + offset),
                ..icfg
            };
            let (traj, error) = split(integrate(
                &field,
                State::<2>::new(x0, y0),
                (start + offset, end + offset),
                &icfg,
                &ev,
            ));
            let conv =
                |t: f64, s: &State<2>| [t - offset, s[0], s[1], (w * t).cos(), (w * t).sin()];
            Ok(Simulation {
                rows: traj
                    .times
                    .iter()
                    .zip(&traj.states)
                    .map(|(&t, s)| conv(t, s))
                    .collect(),
                events: events_of(&traj, conv),
                stats: traj.stats,
                error,
            })
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub version: u32,
    pub config: &'a RunConfig,
    pub mu: f64,
    pub truncated: bool,
    pub error: Option<&'a str>,
    pub points: usize,
    pub events: usize,
    pub stats: StepStats,
    pub files: Files,
}

#[derive(Debug, Serialize)]
pub struct Files {
    pub trajectory: String,
    pub events: String,
}

/// Writes trajectory, events and `metadata.json` into `dir`. Returns the
/// integrator error, if any, after the partial output is on disk.
pub fn cmd_simulate(cfg: &RunConfig, dir: &Path) -> Result<Simulation, CliError> {
    let sim = run_simulation(cfg)?;
    output::create_dir(dir)?;
    let format = cfg.output.format;
    let traj_path = output::output_path(dir, "trajectory", format);
    let ev_path = output::output_path(dir, "events", format);
    match format {
        Format::Csv => {
            output::write_trajectory_csv(output::create_file(&traj_path)?, &sim.rows)?;
            output::write_events_csv(output::create_file(&ev_path)?, &sim.events)?;
        }
        Format::Json => {
            output::write_trajectory_json(output::create_file(&traj_path)?, &sim.rows)?;
            output::write_events_json(output::create_file(&ev_path)?, &sim.events)?;
        }
    }
    let file_name = |p: &Path| {
        p.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let meta = Metadata {
        version: FORMAT_VERSION,
        config: cfg,
        mu: cfg.params.mu(),
        truncated: sim.error.is_some(),
        error: sim.error.as_ref().map(|e| e.message.as_str()),
        points: sim.rows.len(),
        events: sim.events.len(),
        stats: sim.stats,
        files: Files {
            trajectory: file_name(&traj_path),
            events: file_name(&ev_path),
        },
    };
    output::write_json(output::create_file(&dir.join("metadata.json"))?, &meta)?;
    Ok(sim)
}

pub fn cmd_sweep(
    cfg: &RunConfig,
    spec: &SweepSpec,
    out: &mut dyn Write,
    format: Format,
) -> Result<(), CliError> {
    cfg.run.validate()?;
    let values = spec.resolved_values()?;
    let rows = sweep(
        &cfg.params,
        &spec.parameter,
        &values,
        &cfg.run,
        Execution::from_jobs(spec.jobs),
    )?;
    output::write_sweep(out, &rows, format)
}

#[derive(Debug, Serialize)]
pub struct FoldsReport {
    pub params: ParameterSet,
    pub mu: f64,
    pub equilibria: Vec<bvpmmo::slowfast::FoldedEquilibrium>,
}

pub fn cmd_folds(params: &ParameterSet) -> FoldsReport {
    FoldsReport {
        params: *params,
        mu: params.mu(),
        equilibria: folded_equilibria(params),
    }
}

#[derive(Debug, Serialize)]
pub struct CanardReport {
    pub params: ParameterSet,
    pub mu: f64,
    pub z_bar_critical: f64,
    pub z_critical: f64,
    pub critical_phase: bvpmmo::canard::CriticalPhase,
    /// Only with `--numeric`.
    pub numeric: Option<bvpmmo::canard::CanardResult>,
}

pub fn cmd_canard(params: &ParameterSet, numeric: bool) -> Result<CanardReport, CliError> {
    let (zb, z) = z_critical(params.k1(), params.epsilon());
    let numeric = if numeric {
        Some(numeric_canard_split(
            params.k1(),
            params.epsilon(),
            &CanardOptions::default(),
        )?)
    } else {
        None
    };
    Ok(CanardReport {
        params: *params,
        mu: params.mu(),
        z_bar_critical: zb,
        z_critical: z,
        critical_phase: p_critical(params),
        numeric,
    })
}

#[derive(Debug, Serialize)]
pub struct ReturnEntry {
    pub p0: f64,
    pub analytic: bvpmmo::analysis::AnalyticReturn,
    pub numeric: Option<bvpmmo::analysis::ReturnMapSample>,
}

#[derive(Debug, Serialize)]
pub struct ReturnReport {
    pub params: ParameterSet,
    pub direction: PhaseDirection,
    pub increment: f64,
    pub return_integral: f64,
    pub returns: Vec<ReturnEntry>,
}

pub fn cmd_returnmap(
    params: &ParameterSet,
    p0: &[f64],
    direction: PhaseDirection,
    numeric: bool,
) -> Result<ReturnReport, CliError> {
    let returns = p0
        .iter()
        .map(|&p| {
            Ok(ReturnEntry {
                p0: p,
                analytic: return_map_from_p(p, direction, params)?,
                numeric: if numeric {
                    Some(return_map_numeric(
                        params,
                        p,
                        direction,
                        &ReturnOptions::default(),
                    )?)
                } else {
                    None
                },
            })
        })
        .collect::<Result<Vec<_>, bvpmmo::Error>>()?;
    Ok(ReturnReport {
        params: *params,
        direction,
        increment: lao_increment(params.k1(), params.omega()),
        return_integral: return_integral(params.k1())?,
        returns,
    })
}

#[derive(Debug, Serialize)]
pub struct HopfReport {
    pub k1: f64,
    pub epsilon: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    pub mu: f64,
    pub x: f64,
    pub y: f64,
    pub frequency: f64,
    pub l1: f64,
    pub criticality: bvpmmo::analysis::Criticality,
}

pub fn cmd_hopf(k1: f64, epsilon: f64) -> Result<HopfReport, CliError> {
    let h = hopf_locate(k1, epsilon)?;
    Ok(HopfReport {
        k1: h.k1,
        epsilon: h.epsilon,
        b0: h.b0,
        mu: bvpmmo::analysis::mu_of(h.k1, h.b0),
        x: h.x,
        y: h.y,
        frequency: h.frequency,
        l1: h.l1,
        criticality: h.criticality,
    })
}

#[derive(Debug, Serialize)]
pub struct BautinReport {
    pub k1: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    pub epsilon: f64,
}

pub fn cmd_bautin(epsilon: f64) -> Result<BautinReport, CliError> {
    let b = bautin_locate(epsilon)?;
    Ok(BautinReport {
        k1: b.k1,
        b0: b.b0,
        epsilon: b.epsilon,
    })
}

#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub input: PathBuf,
    pub samples: usize,
    pub signature: String,
    pub large_count: usize,
    pub small_count: usize,
    pub max_large_run: usize,
    pub period: Option<f64>,
    pub bursting: bool,
}

/// Reads `t,x` columns. Lines starting with `#` are comments; a first row
/// that does not parse as numbers is a header, which may name the columns.
pub fn read_series(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let (mut tc, mut xc) = (0usize, 1usize);
    let (mut t, mut x) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let parsed: Option<Vec<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        match parsed {
            Some(v) if v.len() > tc.max(xc) => {
                t.push(v[tc]);
                x.push(v[xc]);
            }
            None if i == 0 => {
                let find = |name: &str| rec.iter().position(|f| f.eq_ignore_ascii_case(name));
                if let (Some(a), Some(b)) = (find("t"), find("x")) {
                    (tc, xc) = (a, b);
                }
            }
            _ => {
                return Err(CliError::validation(format!(
                    "{}: row {} is not a numeric t,x record",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if t.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok((t, x))
}

pub fn cmd_classify(
    path: &Path,
    cfg: &SignatureConfig,
    burst_threshold: usize,
) -> Result<ClassifyReport, CliError> {
    let (t, x) = read_series(path)?;
    let a = classify_series(&t, &x, cfg)?;
    let bursting = detect_bursting(&a.classes(), burst_threshold).unwrap_or(false);
    Ok(ClassifyReport {
        input: path.to_path_buf(),
        samples: t.len(),
        signature: if bursting {
            "bursting".to_string()
        } else {
            a.signature.to_string()
        },
        large_count: a.large_count,
        small_count: a.small_count,
        max_large_run: a.max_large_run(),
        period: a.period,
        bursting,
    })
}
