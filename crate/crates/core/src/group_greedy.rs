//! Group-greedy selection (DGG, AGG, EGG): keep the `L_max` best sets under
//! one objective at every step.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greedy::{check_count, strictly_better, ObjectiveKind};
use crate::model::{Archive, ArchiveMember, CandidateMatrix, CanonicalKey, SensorSet};
use crate::objectives::{eval_all, AugmentBase};

/// A deduplicated one-sensor extension of a reserved set.
#[derive(Debug, Clone)]
pub(crate) struct Expansion {
    pub parent: usize,
    pub added: usize,
    pub set: SensorSet,
}

/// Every extension of every parent by every index it lacks, first
/// occurrence kept, sorted by canonical key.
pub(crate) fn expand_unique(parents: &[SensorSet], n: usize) -> Result<Vec<Expansion>> {
    let mut seen: HashSet<CanonicalKey> = HashSet::new();
    let mut out = Vec::new();
    for (parent, set) in parents.iter().enumerate() {
        for added in (0..n).filter(|&i| !set.contains(i)) {
            let grown = set.with(added)?;
            if seen.insert(grown.key().clone()) {
                out.push(Expansion {
                    parent,
                    added,
                    set: grown,
                });
            }
        }
    }
    out.sort_by(|a, b| a.set.key().cmp(b.set.key()));
    Ok(out)
}

pub(crate) fn prepare_bases<'a>(
    u: &'a CandidateMatrix,
    parents: &[SensorSet],
) -> Result<Vec<AugmentBase<'a>>> {
    parents
        .par_iter()
        .map(|s| AugmentBase::new(u, s.clone()))
        .collect()
}

/// Positions of the `count` best scores, best first. Scores within the tie
/// tolerance resolve to the earlier position.
fn top_positions(scores: &[f64], count: usize) -> Vec<usize> {
    let mut taken = vec![false; scores.len()];
    let mut picked = Vec::with_capacity(count.min(scores.len()));
    for _ in 0..count.min(scores.len()) {
        let mut best: Option<usize> = None;
        for (pos, &s) in scores.iter().enumerate() {
            if taken[pos] {
                continue;
            }
            match best {
                Some(b) if !strictly_better(s, scores[b]) => {}
                _ => best = Some(pos),
            }
        }
        let b = best.expect("fewer picks than scores");
        taken[b] = true;
        picked.push(b);
    }
    picked
}

/// Step-wise group-greedy selector.
pub struct GroupGreedySelector<'a> {
    u: &'a CandidateMatrix,
    objective: ObjectiveKind,
    capacity: usize,
    archive: Option<Archive>,
}

impl<'a> GroupGreedySelector<'a> {
    pub fn new(u: &'a CandidateMatrix, capacity: usize, objective: ObjectiveKind) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("L_max must be at least 1".into()));
        }
        Ok(Self {
            u,
            objective,
            capacity,
            archive: None,
        })
    }

    pub fn archive(&self) -> Option<&Archive> {
        self.archive.as_ref()
    }

    pub fn step(&mut self) -> Result<&Archive> {
        let parents: Vec<SensorSet> = match &self.archive {
            None => vec![SensorSet::empty()],
            Some(a) => a.members().iter().map(|m| m.set.clone()).collect(),
        };
        let k = parents[0].len() + 1;
        if k > self.u.n() {
            return Err(Error::TooManySensors { p: k, n: self.u.n() });
        }
        let bases = prepare_bases(self.u, &parents)?;
        let expansions = expand_unique(&parents, self.u.n())?;
        let scores = expansions
            .par_iter()
            .map(|e| self.objective.augmented_score(&bases[e.parent], e.added))
            .collect::<Result<Vec<f64>>>()?;
        let members = top_positions(&scores, self.capacity)
            .into_iter()
            .map(|pos| {
                let set = expansions[pos].set.clone();
                let objectives = eval_all(self.u, &set)?;
                Ok(ArchiveMember { set, objectives })
            })
            .collect::<Result<Vec<_>>>()?;
        self.archive = Some(Archive::new(members, k, self.capacity)?);
        Ok(self.archive.as_ref().expect("archive was just set"))
    }
}

/// Runs group-greedy for `p` steps and returns the archive of every step.
/// Archive members are ordered best first under `objective`.
pub fn group_greedy(
    u: &CandidateMatrix,
    p: usize,
    capacity: usize,
    objective: ObjectiveKind,
) -> Result<Vec<Archive>> {
    check_count(p, u.n())?;
    let mut selector = GroupGreedySelector::new(u, capacity, objective)?;
    (0..p).map(|_| selector.step().cloned()).collect()
}
