//! Closed-curve test for Poincaré section point clouds.
//!
//! Points are scaled to the unit box, linked by a Euclidean minimum spanning
//! tree, and the longest path through the tree is taken as the candidate
//! loop. The cloud is a closed curve when that path visits nearly every
//! point and its two ends nearly meet.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SECTION_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusConfig {
    pub min_points: usize,
    /// Minimum fraction of points on the longest tree path.
    pub min_coverage: f64,
    /// End gap, in median tree edges.
    pub max_gap_edges: f64,
    /// End gap as a fraction of the path length.
    pub max_gap_fraction: f64,
    /// Relative distance below which two points count as one.
    pub duplicate_tol: f64,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self {
            min_points: MIN_SECTION_POINTS,
            min_coverage: 0.9,
            max_gap_edges: 5.0,
            max_gap_fraction: 0.1,
            duplicate_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusReport {
    pub is_torus: bool,
    /// Indices along the loop.
    pub ordering: Vec<usize>,
    pub coverage: f64,
    /// Gap between loop ends divided by the median tree edge.
    pub closure_gap: f64,
    pub distinct_points: usize,
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn normalize(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let scale = [0, 1].map(|k| if hi[k] > lo[k] { hi[k] - lo[k] } else { 1.0 });
    points
        .iter()
        .map(|p| [(p[0] - lo[0]) / scale[0], (p[1] - lo[1]) / scale[1]])
        .collect()
}

// Prim's algorithm on the complete graph; returns adjacency lists with weights.
fn minimum_spanning_tree(points: &[[f64; 2]]) -> Vec<Vec<(usize, f64)>> {
    let n = points.len();
    let mut adj = vec![Vec::new(); n];
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    best[0] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap_or(0);
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            let w = best[u];
            adj[u].push((parent[u], w));
            adj[parent[u]].push((u, w));
        }
        for v in 0..n {
            if !in_tree[v] {
                let d = dist(&points[u], &points[v]);
                if d < best[v] {
                    best[v] = d;
                    parent[v] = u;
                }
            }
        }
    }
    adj
}

// Farthest node from `start` by path length, with the predecessor map.
fn farthest(adj: &[Vec<(usize, f64)>], start: usize) -> (usize, Vec<usize>) {
    let n = adj.len();
    let mut d = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    d[start] = 0.0;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &(v, w) in &adj[u] {
            if d[v].is_infinite() {
                d[v] = d[u] + w;
                pred[v] = u;
                stack.push(v);
            }
        }
    }
    let far = (0..n)
        .max_by(|&a, &b| d[a].total_cmp(&d[b]))
        .unwrap_or(start);
    (far, pred)
}

/// Decides whether section points lie on a closed invariant curve.
pub fn detect_torus(points: &[[f64; 2]], cfg: &TorusConfig) -> Result<TorusReport> {
    if points.len() < cfg.min_points {
        return Err(Error::InsufficientData(format!(
            "{} section points, need at least {}",
            points.len(),
            cfg.min_points
        )));
    }
    let pts = normalize(points);
    let n = pts.len();

    // a periodic orbit revisits finitely many points
    let mut distinct: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        if !distinct.iter().any(|q| dist(p, q) <= cfg.duplicate_tol) {
            distinct.push(*p);
        }
    }
    let rejected = |distinct_points: usize| TorusReport {
        is_torus: false,
        ordering: Vec::new(),
        coverage: 0.0,
        closure_gap: f64::INFINITY,
        distinct_points,
    };
    if distinct.len() < n / 2 {
        return Ok(rejected(distinct.len()));
    }

    let adj = minimum_spanning_tree(&pts);
    let (a, _) = farthest(&adj, 0);
    let (b, pred) = farthest(&adj, a);
    let mut ordering = vec![b];
    let mut cur = b;
    while cur != a {
        cur = pred[cur];
        ordering.push(cur);
    }
    let path_len: f64 = ordering
        .windows(2)
        .map(|w| dist(&pts[w[0]], &pts[w[1]]))
        .sum();

    let mut edges: Vec<f64> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, l)| l.iter().filter(move |(v, _)| *v > u).map(|(_, w)| *w))
        .collect();
    edges.sort_by(f64::total_cmp);
    let median = edges.get(edges.len() / 2).copied().unwrap_or(0.0);

    let coverage = ordering.len() as f64 / n as f64;
    let gap = dist(&pts[a], &pts[b]);
    let closure_gap = if median > 0.0 {
        gap / median
    } else {
        f64::INFINITY
    };
    let is_torus = coverage >= cfg.min_coverage
        && closure_gap <= cfg.max_gap_edges
        && gap <= cfg.max_gap_fraction * path_len;
    Ok(TorusReport {
        is_torus,
        ordering,
        coverage,
        closure_gap,
        distinct_points: distinct.len(),
    })
}
