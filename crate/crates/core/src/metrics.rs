//! Reconstruction metrics: color-matched IoU for Layout, edge Chamfer distance
//! for CSG2D and voxel IoU for CSG3D.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::Domain;
use crate::exec::{Canvas, Color, Grid, Visual, SIZE_2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ciou,
    Chamfer,
    Iou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

impl Metric {
    pub fn for_domain(domain: Domain) -> Metric {
        match domain {
            Domain::Layout => Metric::Ciou,
            Domain::Csg2d => Metric::Chamfer,
            Domain::Csg3d => Metric::Iou,
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::Chamfer => Direction::LowerBetter,
            Metric::Ciou | Metric::Iou => Direction::HigherBetter,
        }
    }

    /// Value of a perfect reconstruction.
    pub fn optimum(self) -> f64 {
        match self {
            Metric::Chamfer => 0.0,
            Metric::Ciou | Metric::Iou => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("cannot compare {0:?} with {1:?}")]
    MetricMismatch(Metric, Metric),
    #[error("cannot score a {0} visual against a {1} visual")]
    DomainMismatch(Domain, Domain),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub metric: Metric,
    pub value: f64,
}

impl Score {
    pub fn new(metric: Metric, value: f64) -> Score {
        Score { metric, value }
    }

    pub fn direction(&self) -> Direction {
        self.metric.direction()
    }

    /// Strict improvement of `self` over `other`; ties are not improvements.
    pub fn better(&self, other: &Score) -> Result<bool, MetricError> {
        if self.metric != other.metric {
            return Err(MetricError::MetricMismatch(self.metric, other.metric));
        }
        Ok(self.rank_cmp(other) == Ordering::Less)
    }

    /// Total order with better scores first.
    pub fn rank_cmp(&self, other: &Score) -> Ordering {
        let ord = self.value.total_cmp(&other.value);
        match self.direction() {
            Direction::HigherBetter => ord.reverse(),
            Direction::LowerBetter => ord,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.value == self.metric.optimum()
    }

    /// Signed improvement of `self` over `other` (positive is better).
    pub fn gain_over(&self, other: &Score) -> f64 {
        match self.direction() {
            Direction::HigherBetter => self.value - other.value,
            Direction::LowerBetter => other.value - self.value,
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.value)
    }
}

/// Scores `candidate` against `target` with the domain metric.
pub fn score(candidate: &Visual, target: &Visual) -> Result<Score, MetricError> {
    let value = match (candidate, target) {
        (Visual::Layout(a), Visual::Layout(b)) => ciou(a, b),
        (Visual::Csg2d(a), Visual::Csg2d(b)) => edge_chamfer(a, b),
        (Visual::Csg3d(a), Visual::Csg3d(b)) => iou(a, b),
        _ => return Err(MetricError::DomainMismatch(candidate.domain(), target.domain())),
    };
    Ok(Score::new(Metric::for_domain(target.domain()), value))
}

/// Intersection counts only pixels where both canvases show the same color.
pub fn ciou(a: &Canvas, b: &Canvas) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    for (x, y) in a.cells().iter().zip(b.cells()) {
        let (xa, ya) = (*x != Color::Background, *y != Color::Background);
        if xa || ya {
            union += 1;
            if x == y {
                inter += 1;
            }
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn iou(a: &Grid, b: &Grid) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    for (x, y) in a.cells().iter().zip(b.cells()) {
        inter += usize::from(*x && *y);
        union += usize::from(*x || *y);
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Occupied 2D cells with at least one unoccupied 4-neighbor; cells outside the
/// canvas count as unoccupied. Returned in row-major order as (col, row).
pub fn edge_cells(g: &Grid) -> Vec<(usize, usize)> {
    let n = g.side();
    let on = |c: isize, r: isize| c >= 0 && r >= 0 && (c as usize) < n && (r as usize) < n && g.get(&[c as usize, r as usize]);
    let mut out = Vec::new();
    for r in 0..n as isize {
        for c in 0..n as isize {
            if on(c, r) && !(on(c - 1, r) && on(c + 1, r) && on(c, r - 1) && on(c, r + 1)) {
                out.push((c as usize, r as usize));
            }
        }
    }
    out
}

/// Distance charged when exactly one edge set is empty.
pub fn chamfer_empty_penalty() -> f64 {
    SIZE_2D as f64 * std::f64::consts::SQRT_2
}

/// Symmetric mean nearest-edge distance in pixel units.
pub fn edge_chamfer(a: &Grid, b: &Grid) -> f64 {
    let ea = edge_cells(a);
    let eb = edge_cells(b);
    match (ea.is_empty(), eb.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return chamfer_empty_penalty(),
        _ => {}
    }
    let n = a.side();
    let da = squared_edt(n, &ea);
    let db = squared_edt(n, &eb);
    let mean = |from: &[(usize, usize)], dt: &[f64]| {
        from.iter().map(|&(c, r)| dt[r * n + c].sqrt()).sum::<f64>() / from.len() as f64
    };
    0.5 * (mean(&ea, &db) + mean(&eb, &da))
}

/// Exact squared Euclidean distance to the nearest site on an `n×n` grid,
/// row-major, via two passes of the 1D lower-envelope transform.
fn squared_edt(n: usize, sites: &[(usize, usize)]) -> Vec<f64> {
    const INF: f64 = 1e20;
    let mut grid = vec![INF; n * n];
    for &(c, r) in sites {
        grid[r * n + c] = 0.0;
    }
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    for c in 0..n {
        for r in 0..n {
            f[r] = grid[r * n + c];
        }
        edt_1d(&f, &mut d);
        for r in 0..n {
            grid[r * n + c] = d[r];
        }
    }
    for r in 0..n {
        f.copy_from_slice(&grid[r * n..(r + 1) * n]);
        edt_1d(&f, &mut d);
        grid[r * n..(r + 1) * n].copy_from_slice(&d);
    }
    grid
}

fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let sq = |q: usize| (q * q) as f64;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + sq(q)) - (f[p] + sq(p))) / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0 and the new parabola dominates everywhere
                v[0] = q;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Grid;

    fn dot(c: usize, r: usize) -> Grid {
        let mut g = Grid::empty_2d();
        g.set(&[c, r], true);
        g
    }

    #[test]
    fn better_respects_direction_and_ties() {
        let s = |v| Score::new(Metric::Ciou, v);
        assert!(s(0.9).better(&s(0.8)).unwrap());
        assert!(!s(0.1).better(&s(0.1)).unwrap());
        let c = |v| Score::new(Metric::Chamfer, v);
        assert!(c(0.5).better(&c(0.7)).unwrap());
        assert_eq!(s(0.5).better(&c(0.5)), Err(MetricError::MetricMismatch(Metric::Ciou, Metric::Chamfer)));
    }

    #[test]
    fn single_pixels_ten_apart() {
        assert_eq!(edge_chamfer(&dot(10, 30), &dot(20, 30)), 10.0);
    }

    #[test]
    fn chamfer_empty_conventions() {
        let e = Grid::empty_2d();
        assert_eq!(edge_chamfer(&e, &e), 0.0);
        assert_eq!(edge_chamfer(&e, &dot(3, 3)), 64.0 * 2f64.sqrt());
    }

    #[test]
    fn edt_handles_sites_on_both_ends() {
        let mut d = vec![0.0; 5];
        edt_1d(&[0.0, 1e20, 1e20, 1e20, 0.0], &mut d);
        assert_eq!(d, vec![0.0, 1.0, 4.0, 1.0, 0.0]);
        edt_1d(&[1e20, 1e20, 0.0, 1e20, 1e20], &mut d);
        assert_eq!(d, vec![4.0, 1.0, 0.0, 1.0, 4.0]);
    }

    #[test]
    fn iou_of_shifted_cube() {
        let mut a = Grid::empty_3d();
        let mut b = Grid::empty_3d();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    a.set(&[10 + x, 10 + y, 10 + z], true);
                    b.set(&[11 + x, 10 + y, 10 + z], true);
                }
            }
        }
        assert_eq!(iou(&a, &b), 4.0 / 12.0);
    }
}
