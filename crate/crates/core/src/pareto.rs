//! Nondominated sorting with the sequential search strategy (ENS-SS),
//! crowding distance and last-front selection.
//!
//! Every coordinate is minimized. [`MinPoint::from_objectives`] flips the
//! sign of the D and E indices so the three optimality criteria share that
//! convention.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::ObjectiveVector;

/// A point in objective space, all coordinates to be minimized.
#[derive(Debug, Clone, PartialEq)]
pub struct MinPoint {
    pub coords: Vec<f64>,
}

impl MinPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    /// `(-log_det, trace_inv, -lambda_min)`.
    pub fn from_objectives(v: &ObjectiveVector) -> Self {
        Self {
            coords: vec![-v.log_det, v.trace_inv, -v.lambda_min],
        }
    }
}

/// True iff `a` is no worse than `b` everywhere and better somewhere.
pub fn dominates(a: &MinPoint, b: &MinPoint) -> bool {
    let mut strictly = false;
    for (x, y) in a.coords.iter().zip(&b.coords) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Fronts as positions into the sorted input, best rank first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrontPartition {
    pub fronts: Vec<Vec<usize>>,
    pub assigned_count: usize,
    /// Some points were left unranked because enough had been assigned.
    pub terminated_early: bool,
    /// Number of dominance tests performed.
    pub comparisons: u64,
}

/// ENS-SS restricted to the ranks needed to reach `capacity` points.
///
/// Points are presorted lexicographically by coordinates, so a point can
/// only be dominated by one that precedes it; equal coordinates keep input
/// order. Rank `q` is filled by one pass over the still-unranked points,
/// each compared against the members already placed in rank `q`. Sorting
/// stops after the first rank that brings the assigned count to `capacity`.
/// Front members are listed in presort order.
pub fn ens_ss_partial(points: &[MinPoint], capacity: usize) -> Result<FrontPartition> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("cannot sort an empty point set".into()));
    }
    if capacity == 0 {
        return Err(Error::InvalidArgument("L_max must be at least 1".into()));
    }
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    remaining.sort_by(|&a, &b| lexicographic(&points[a], &points[b]).then(a.cmp(&b)));

    let mut out = FrontPartition::default();
    while !remaining.is_empty() {
        let mut front: Vec<usize> = Vec::new();
        let mut rest = Vec::with_capacity(remaining.len());
        for &idx in &remaining {
            let mut dominated = false;
            // later members are closer in the presort and more likely dominators
            for &member in front.iter().rev() {
                out.comparisons += 1;
                if dominates(&points[member], &points[idx]) {
                    dominated = true;
                    break;
                }
            }
            if dominated {
                rest.push(idx);
            } else {
                front.push(idx);
            }
        }
        out.assigned_count += front.len();
        out.fronts.push(front);
        remaining = rest;
        if out.assigned_count >= capacity {
            out.terminated_early = !remaining.is_empty();
            break;
        }
    }
    Ok(out)
}

fn lexicographic(a: &MinPoint, b: &MinPoint) -> std::cmp::Ordering {
    for (x, y) in a.coords.iter().zip(&b.coords) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Crowding distance of each member of a mutually nondominating front, in
/// input order. Boundary members of any objective get `+inf`; objectives
/// with zero or non-finite range add nothing to interior members.
pub fn crowding_distance(front: &[MinPoint]) -> Vec<f64> {
    let len = front.len();
    let mut dist = vec![0.0; len];
    if len <= 2 {
        return vec![f64::INFINITY; len];
    }
    let dims = front[0].coords.len();
    let mut order: Vec<usize> = (0..len).collect();
    for m in 0..dims {
        order.sort_by(|&a, &b| front[a].coords[m].total_cmp(&front[b].coords[m]));
        let lo = front[order[0]].coords[m];
        let hi = front[order[len - 1]].coords[m];
        dist[order[0]] = f64::INFINITY;
        dist[order[len - 1]] = f64::INFINITY;
        let range = hi - lo;
        if !(range > 0.0 && range.is_finite()) {
            continue;
        }
        for w in order.windows(3) {
            let gap = front[w[2]].coords[m] - front[w[0]].coords[m];
            dist[w[1]] += gap / range;
        }
    }
    dist
}

/// Picks `needed` members of the last front: infinite-distance members
/// first, then uniform draws without replacement from the rest. When the
/// infinite-distance members alone exceed `needed`, a uniform subset of
/// them is taken. Returns sorted positions into `front`.
pub fn select_from_last_front<R: Rng + ?Sized>(
    front: &[MinPoint],
    needed: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if needed == 0 || needed > front.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot pick {needed} members from a front of {}",
            front.len()
        )));
    }
    if needed == front.len() {
        return Ok((0..front.len()).collect());
    }
    let dist = crowding_distance(front);
    let (boundary, interior): (Vec<usize>, Vec<usize>) =
        (0..front.len()).partition(|&i| dist[i] == f64::INFINITY);
    let mut picked = if boundary.len() >= needed {
        rand::seq::index::sample(rng, boundary.len(), needed)
            .into_iter()
            .map(|j| boundary[j])
            .collect()
    } else {
        let mut picked = boundary;
        let extra = needed - picked.len();
        picked.extend(
            rand::seq::index::sample(rng, interior.len(), extra)
                .into_iter()
                .map(|j| interior[j]),
        );
        picked
    };
    picked.sort_unstable();
    Ok(picked)
}
