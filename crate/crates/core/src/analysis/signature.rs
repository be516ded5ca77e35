//! Mixed-mode signatures from `x` time series.
//!
//! Oscillations run from one local maximum of `x` to the next. The span of an
//! oscillation is its peak minus the lowest value before the next peak; spans
//! above the large threshold count as large oscillations, the rest as small
//! ones. Runs are compressed into `(L, s)` pairs, written `L^s`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{Chart, EventKind, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OscillationClass {
    Large,
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub t_peak: f64,
    pub peak: f64,
    pub trough: f64,
    pub span: f64,
    pub class: OscillationClass,
    /// State at the peak, used for recurrence checks.
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignaturePair {
    pub large: u32,
    pub small: u32,
}

impl fmt::Display for SignaturePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.large, self.small)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "pairs")]
pub enum MMOSignature {
    /// Only small oscillations.
    SmallCycle,
    /// Only large oscillations.
    Relaxation,
    /// One period of a repeating mixed pattern.
    Periodic(Vec<SignaturePair>),
    /// Mixed pattern without detected period; pairs cover the whole record.
    Aperiodic(Vec<SignaturePair>),
    Torus,
    Bursting,
}

impl MMOSignature {
    pub fn pairs(&self) -> &[SignaturePair] {
        match self {
            MMOSignature::Periodic(p) | MMOSignature::Aperiodic(p) => p,
            _ => &[],
        }
    }

    pub fn is_mixed(&self) -> bool {
        let p = self.pairs();
        p.iter().any(|q| q.large > 0) && p.iter().any(|q| q.small > 0)
    }
}

impl fmt::Display for MMOSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MMOSignature::SmallCycle => f.write_str("small-cycle"),
            MMOSignature::Relaxation => f.write_str("relaxation"),
            MMOSignature::Torus => f.write_str("torus"),
            MMOSignature::Bursting => f.write_str("bursting"),
            MMOSignature::Aperiodic(_) => f.write_str("aperiodic"),
            MMOSignature::Periodic(pairs) => {
                let parts: Vec<String> = pairs.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignatureConfig {
    /// Span separating large from small oscillations.
    pub large_threshold: f64,
    /// Extrema closer than this in `x` to their neighbour are ignored.
    pub min_amplitude: f64,
    /// Euclidean tolerance for peak-state recurrence.
    pub recurrence_tol: f64,
    pub min_repeats: usize,
    /// Samples before this time are ignored.
    pub transient: f64,
}

impl Default for SignatureConfig {
    fn default() -> Self {
        Self {
            large_threshold: 1.0,
            min_amplitude: 1e-6,
            recurrence_tol: 1e-4,
            min_repeats: 2,
            transient: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureAnalysis {
    pub signature: MMOSignature,
    pub oscillations: Vec<Oscillation>,
    pub large_count: usize,
    pub small_count: usize,
    /// Time span of one detected period.
    pub period: Option<f64>,
}

impl SignatureAnalysis {
    pub fn classes(&self) -> Vec<OscillationClass> {
        self.oscillations.iter().map(|o| o.class).collect()
    }

    /// Longest run of consecutive large oscillations.
    pub fn max_large_run(&self) -> usize {
        longest_run(&self.classes(), OscillationClass::Large)
    }
}

pub fn longest_run(classes: &[OscillationClass], which: OscillationClass) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for c in classes {
        if *c == which {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

#[derive(Debug, Clone)]
struct Extremum {
    t: f64,
    x: f64,
    state: Vec<f64>,
    is_max: bool,
}

// Alternating maxima and minima, dropping reversals smaller than `threshold`.
fn zigzag(points: impl Iterator<Item = (f64, f64, Vec<f64>)>, threshold: f64) -> Vec<Extremum> {
    let mut out: Vec<Extremum> = Vec::new();
    let mut hi: Option<(f64, f64, Vec<f64>)> = None;
    let mut lo: Option<(f64, f64, Vec<f64>)> = None;
    // +1 searching for a maximum, −1 for a minimum, 0 undecided
    let mut dir = 0i8;
    let mut first_t = None;
    for (t, x, s) in points {
        first_t.get_or_insert(t);
        match dir {
            0 => {
                if hi.as_ref().is_none_or(|h| x > h.1) {
                    hi = Some((t, x, s.clone()));
                }
                if lo.as_ref().is_none_or(|l| x < l.1) {
                    lo = Some((t, x, s.clone()));
                }
                let (h, l) = (hi.as_ref().map(|v| v.1), lo.as_ref().map(|v| v.1));
                if let (Some(h), Some(l)) = (h, l) {
                    if x <= h - threshold {
                        let (ht, hx, hs) = hi.take().unwrap_or_default();
                        out.push(Extremum {
                            t: ht,
                            x: hx,
                            state: hs,
                            is_max: true,
                        });
                        lo = Some((t, x, s));
                        dir = -1;
                    } else if x >= l + threshold {
                        let (lt, lx, ls) = lo.take().unwrap_or_default();
                        out.push(Extremum {
                            t: lt,
                            x: lx,
                            state: ls,
                            is_max: false,
                        });
                        hi = Some((t, x, s));
                        dir = 1;
                    }
                }
            }
            1 => {
                let h = hi.as_ref().map_or(f64::NEG_INFINITY, |v| v.1);
                if x > h {
                    hi = Some((t, x, s));
                } else if x <= h - threshold {
                    let (ht, hx, hs) = hi.take().unwrap_or_default();
                    out.push(Extremum {
                        t: ht,
                        x: hx,
                        state: hs,
                        is_max: true,
                    });
                    lo = Some((t, x, s));
                    dir = -1;
                }
            }
            _ => {
                let l = lo.as_ref().map_or(f64::INFINITY, |v| v.1);
                if x < l {
                    lo = Some((t, x, s));
                } else if x >= l + threshold {
                    let (lt, lx, ls) = lo.take().unwrap_or_default();
                    out.push(Extremum {
                        t: lt,
                        x: lx,
                        state: ls,
                        is_max: false,
                    });
                    hi = Some((t, x, s));
                    dir = 1;
                }
            }
        }
    }
    // the first sample is a record boundary, not an extremum
    if out.first().map(|e| Some(e.t) == first_t).unwrap_or(false) {
        out.remove(0);
    }
    out
}

fn oscillations_from_extrema(ext: &[Extremum], cfg: &SignatureConfig) -> Vec<Oscillation> {
    let maxima: Vec<usize> = ext
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_max)
        .map(|(i, _)| i)
        .collect();
    maxima
        .windows(2)
        .map(|w| {
            let peak = &ext[w[0]];
            let trough = ext[w[0] + 1..w[1]]
                .iter()
                .map(|e| e.x)
                .fold(f64::INFINITY, f64::min);
            let span = peak.x - trough;
            Oscillation {
                t_peak: peak.t,
                peak: peak.x,
                trough,
                span,
                class: if span > cfg.large_threshold {
                    OscillationClass::Large
                } else {
                    OscillationClass::Small
                },
                state: peak.state.clone(),
            }
        })
        .collect()
}

/// Run-length compression into `(L, s)` pairs. A leading small run becomes
/// `(0, s)`.
pub fn compress(classes: &[OscillationClass]) -> Vec<SignaturePair> {
    let mut pairs: Vec<SignaturePair> = Vec::new();
    let mut cur = SignaturePair { large: 0, small: 0 };
    for c in classes {
        match c {
            OscillationClass::Large => {
                if cur.small > 0 {
                    pairs.push(cur);
                    cur = SignaturePair { large: 0, small: 0 };
                }
                cur.large += 1;
            }
            OscillationClass::Small => cur.small += 1,
        }
    }
    if cur.large > 0 || cur.small > 0 {
        pairs.push(cur);
    }
    pairs
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

// Smallest period p such that the last `repeats · p` classes repeat with
// period p, one period holds both classes, and the peak state recurs after
// p oscillations.
fn detect_period(osc: &[Oscillation], cfg: &SignatureConfig) -> Option<usize> {
    let n = osc.len();
    let repeats = cfg.min_repeats.max(2);
    (2..=n / repeats).find(|&p| {
        let window = repeats * p;
        let tail = &osc[n - p..];
        let mixed = tail.iter().any(|o| o.class == OscillationClass::Large)
            && tail.iter().any(|o| o.class == OscillationClass::Small);
        let labels_repeat = mixed && (n - window..n - p).all(|i| osc[i].class == osc[i + p].class);
        labels_repeat && distance(&osc[n - 1].state, &osc[n - 1 - p].state) <= cfg.recurrence_tol
    })
}

fn summarize(oscillations: Vec<Oscillation>, cfg: &SignatureConfig) -> Result<SignatureAnalysis> {
    if oscillations.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} oscillations detected, need at least 3",
            oscillations.len()
        )));
    }
    let large_count = oscillations
        .iter()
        .filter(|o| o.class == OscillationClass::Large)
        .count();
    let small_count = oscillations.len() - large_count;
    let mut period = None;
    let signature = if large_count == 0 {
        MMOSignature::SmallCycle
    } else if small_count == 0 {
        MMOSignature::Relaxation
    } else if let Some(p) = detect_period(&oscillations, cfg) {
        let n = oscillations.len();
        period = Some(oscillations[n - 1].t_peak - oscillations[n - 1 - p].t_peak);
        let mut cycle: Vec<OscillationClass> =
            oscillations[n - p..].iter().map(|o| o.class).collect();
        // start the period at the first large oscillation after a small one
        let start = (0..p)
            .find(|&i| {
                cycle[i] == OscillationClass::Large
                    && cycle[(i + p - 1) % p] == OscillationClass::Small
            })
            .unwrap_or(0);
        cycle.rotate_left(start);
        MMOSignature::Periodic(compress(&cycle))
    } else {
        let classes: Vec<OscillationClass> = oscillations.iter().map(|o| o.class).collect();
        MMOSignature::Aperiodic(compress(&classes))
    };
    Ok(SignatureAnalysis {
        signature,
        oscillations,
        large_count,
        small_count,
        period,
    })
}

/// Signature of a sampled `(t, x)` series. The peak value and span stand in
/// for the state in the recurrence test.
pub fn classify_series(t: &[f64], x: &[f64], cfg: &SignatureConfig) -> Result<SignatureAnalysis> {
    if t.len() != x.len() {
        return Err(Error::InsufficientData(
            "time and value columns differ in length".into(),
        ));
    }
    let pts = t
        .iter()
        .zip(x)
        .filter(|(ti, _)| **ti >= cfg.transient)
        .map(|(&ti, &xi)| (ti, xi, vec![xi]));
    let ext = zigzag(pts, cfg.min_amplitude);
    let mut osc = oscillations_from_extrema(&ext, cfg);
    for o in &mut osc {
        o.state = vec![o.peak, o.span];
    }
    summarize(osc, cfg)
}

/// Signature of a trajectory in the original or standard chart.
///
/// Local-extremum events recorded during integration are used when present,
/// since they are located on the dense output; otherwise the accepted steps
/// are scanned.
pub fn extract_signature(traj: &Trajectory<4>, cfg: &SignatureConfig) -> Result<SignatureAnalysis> {
    let sign = match traj.chart {
        Chart::Original => 1.0,
        Chart::Standard => -1.0,
        other => {
            return Err(Error::InvalidParameter {
                name: "chart",
                reason: format!("signature needs original or standard coordinates, got {other:?}"),
            })
        }
    };
    let offset = if sign < 0.0 { crate::SQRT_3 / 3.0 } else { 0.0 };
    let to_x = |v: f64| offset + sign * v;
    let state_of = |s: &crate::integrate::State<4>| s.iter().copied().collect::<Vec<f64>>();

    let has_extrema = traj
        .events
        .iter()
        .any(|e| e.kind == EventKind::LocalExtremum);
    let ext = if has_extrema {
        let pts = traj
            .events_of(EventKind::LocalExtremum)
            .filter(|e| e.t >= cfg.transient)
            .map(|e| (e.t, to_x(e.state[0]), state_of(&e.state)));
        zigzag(pts, cfg.min_amplitude)
    } else {
        let pts = traj
            .times
            .iter()
            .zip(&traj.states)
            .filter(|(t, _)| **t >= cfg.transient)
            .map(|(&t, s)| (t, to_x(s[0]), state_of(s)));
        zigzag(pts, cfg.min_amplitude)
    };
    summarize(oscillations_from_extrema(&ext, cfg), cfg)
}

/// Long trains of large oscillations separated by small-oscillation epochs.
///
/// The first and last runs may be cut by the record and are ignored. True
/// when at least two complete large runs exist and each has length at least
/// `burst_threshold`.
pub fn detect_bursting(classes: &[OscillationClass], burst_threshold: usize) -> Result<bool> {
    if classes.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} oscillations, need at least 3",
            classes.len()
        )));
    }
    let mut runs: Vec<(OscillationClass, usize)> = Vec::new();
    for c in classes {
        match runs.last_mut() {
            Some((k, n)) if k == c => *n += 1,
            _ => runs.push((*c, 1)),
        }
    }
    if runs.len() < 3 {
        return Ok(false);
    }
    let complete_large: Vec<usize> = runs[1..runs.len() - 1]
        .iter()
        .filter(|(k, _)| *k == OscillationClass::Large)
        .map(|(_, n)| *n)
        .collect();
    Ok(complete_large.len() >= 2 && complete_large.iter().all(|&n| n >= burst_threshold))
}
