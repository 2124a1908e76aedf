//! Independent reference implementations shared by the integration suites.
//! Everything here recomputes objectives from scratch with `eval_all` and
//! never touches the incremental or ENS-SS code paths.

#![allow(dead_code)]

use std::collections::BTreeMap;

use nmg_select::bench::naive_nondominated_sort;
use nmg_select::nmg::SelectionRng;
use nmg_select::objectives::eval_all;
use nmg_select::pareto::{select_from_last_front, MinPoint};
use nmg_select::{CandidateMatrix, ObjectiveKind, ObjectiveVector, SensorSet};
use rand::SeedableRng;

/// Tie rule shared with the selectors: `a` wins only if it beats `b` by more
/// than 1e-12 relative.
pub fn beats(a: f64, b: f64) -> bool {
    if a == b {
        return false;
    }
    if !a.is_finite() || !b.is_finite() {
        return a > b;
    }
    a - b > 1e-12 * a.abs().max(b.abs())
}

pub fn oriented(kind: ObjectiveKind, v: &ObjectiveVector) -> f64 {
    match kind {
        ObjectiveKind::D => v.log_det,
        ObjectiveKind::A => -v.trace_inv,
        ObjectiveKind::E => v.lambda_min,
    }
}

/// Pure greedy by exhaustive per-step argmax over full recomputes.
pub fn stepwise_greedy(u: &CandidateMatrix, p: usize, kind: ObjectiveKind) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for _ in 0..p {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..u.n() {
            if chosen.contains(&i) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(i);
            let v = eval_all(u, &SensorSet::new(trial, u.n()).unwrap()).unwrap();
            let s = oriented(kind, &v);
            match best {
                Some((_, b)) if !beats(s, b) => {}
                _ => best = Some((i, s)),
            }
        }
        chosen.push(best.unwrap().0);
    }
    chosen
}

/// NMG by brute force: expand every reserved set, dedup on sorted indices,
/// recompute every objective, sort completely, then fill fronts in rank
/// order with the same last-front rule and rng stream. Returns the sorted
/// index lists reserved at each step, sorted.
pub fn nmg_pipeline(u: &CandidateMatrix, p: usize, capacity: usize, seed: u64) -> Vec<Vec<Vec<usize>>> {
    let mut rng = SelectionRng::seed_from_u64(seed);
    let mut parents: Vec<Vec<usize>> = vec![vec![]];
    let mut out = Vec::new();
    for _ in 0..p {
        let mut unique: BTreeMap<Vec<usize>, ObjectiveVector> = BTreeMap::new();
        for parent in &parents {
            for i in 0..u.n() {
                if parent.contains(&i) {
                    continue;
                }
                let mut s = parent.clone();
                s.push(i);
                s.sort_unstable();
                if !unique.contains_key(&s) {
                    let v = eval_all(u, &SensorSet::new(s.clone(), u.n()).unwrap()).unwrap();
                    unique.insert(s, v);
                }
            }
        }
        let sets: Vec<Vec<usize>> = unique.keys().cloned().collect();
        let points: Vec<MinPoint> = unique.values().map(MinPoint::from_objectives).collect();
        let fronts = naive_nondominated_sort(&points).fronts;
        let mut kept: Vec<usize> = Vec::new();
        for front in fronts {
            if kept.len() + front.len() <= capacity {
                kept.extend(&front);
            } else {
                let need = capacity - kept.len();
                let pts: Vec<MinPoint> = front.iter().map(|&i| points[i].clone()).collect();
                let picks = select_from_last_front(&pts, need, &mut rng).unwrap();
                kept.extend(picks.into_iter().map(|j| front[j]));
            }
            if kept.len() >= capacity {
                break;
            }
        }
        let mut step: Vec<Vec<usize>> = kept.iter().map(|&i| sets[i].clone()).collect();
        step.sort();
        parents = step.clone();
        out.push(step);
    }
    out
}

/// Sorted index lists of an archive, sorted.
pub fn archive_sets(archive: &nmg_select::Archive) -> Vec<Vec<usize>> {
    let mut v: Vec<Vec<usize>> = archive
        .members()
        .iter()
        .map(|m| m.set.key().indices().to_vec())
        .collect();
    v.sort();
    v
}

/// Direct crowding-distance formula over an index-sorted copy.
pub fn crowding_reference(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut d = vec![0.0f64; n];
    for m in 0..front[0].len() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| front[a][m].partial_cmp(&front[b][m]).unwrap());
        let lo = front[idx[0]][m];
        let hi = front[idx[n - 1]][m];
        d[idx[0]] = f64::INFINITY;
        d[idx[n - 1]] = f64::INFINITY;
        if hi > lo {
            for k in 1..n - 1 {
                d[idx[k]] += (front[idx[k + 1]][m] - front[idx[k - 1]][m]) / (hi - lo);
            }
        }
    }
    d
}
