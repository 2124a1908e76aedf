//! Pure-greedy selection under a single objective (DG, AG, EG).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CandidateMatrix, ObjectiveVector, SensorSet};
use crate::objectives::{eval_all, AugmentBase};

/// Relative tolerance under which two objective values count as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Which optimality index a single-objective method optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectiveKind {
    /// Maximize `log det(FIM)`.
    D,
    /// Minimize `tr(FIM^-1)`.
    A,
    /// Maximize `lambda_min(FIM)`.
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [ObjectiveKind::D, ObjectiveKind::A, ObjectiveKind::E];

    pub fn direction(self) -> Direction {
        match self {
            ObjectiveKind::A => Direction::Minimize,
            ObjectiveKind::D | ObjectiveKind::E => Direction::Maximize,
        }
    }

    /// The raw index this objective reads from `v`.
    pub fn value(self, v: &ObjectiveVector) -> f64 {
        match self {
            ObjectiveKind::D => v.log_det,
            ObjectiveKind::A => v.trace_inv,
            ObjectiveKind::E => v.lambda_min,
        }
    }

    /// The index oriented so that larger is better. Singular sets map to
    /// `-inf` (D, A) or `0` (E) and lose to every nonsingular set.
    pub fn score(self, v: &ObjectiveVector) -> f64 {
        self.orient(self.value(v))
    }

    pub(crate) fn orient(self, value: f64) -> f64 {
        match self.direction() {
            Direction::Maximize => value,
            Direction::Minimize => -value,
        }
    }

    /// Oriented score of `base ∪ {i}`, using the cheapest exact path.
    pub(crate) fn augmented_score(self, base: &AugmentBase<'_>, i: usize) -> Result<f64> {
        Ok(match self {
            ObjectiveKind::D => base.log_det(i)?,
            ObjectiveKind::A => -base.trace_inv(i)?,
            ObjectiveKind::E => base.lambda_min(i)?,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            ObjectiveKind::D => "D",
            ObjectiveKind::A => "A",
            ObjectiveKind::E => "E",
        }
    }
}

/// True when oriented score `a` beats `b` by more than the tie tolerance.
pub fn strictly_better(a: f64, b: f64) -> bool {
    if a == b || a.is_nan() {
        return false;
    }
    if b.is_nan() || !a.is_finite() || !b.is_finite() {
        return a > b;
    }
    a - b > TIE_RTOL * a.abs().max(b.abs())
}

/// Position of the best score; the earliest position wins ties.
pub(crate) fn argbest(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (pos, &s) in scores.iter().enumerate() {
        match best {
            None => best = Some(pos),
            Some(b) if strictly_better(s, scores[b]) => best = Some(pos),
            _ => {}
        }
    }
    best
}

/// One step of a pure-greedy trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub set: SensorSet,
    pub added: usize,
    pub objectives: ObjectiveVector,
}

/// Step-wise pure-greedy selector.
pub struct GreedySelector<'a> {
    u: &'a CandidateMatrix,
    objective: ObjectiveKind,
    current: SensorSet,
}

impl<'a> GreedySelector<'a> {
    pub fn new(u: &'a CandidateMatrix, objective: ObjectiveKind) -> Self {
        Self {
            u,
            objective,
            current: SensorSet::empty(),
        }
    }

    pub fn current(&self) -> &SensorSet {
        &self.current
    }

    /// Adds the best remaining sensor.
    pub fn step(&mut self) -> Result<GreedyStep> {
        let n = self.u.n();
        if self.current.len() >= n {
            return Err(Error::TooManySensors {
                p: self.current.len() + 1,
                n,
            });
        }
        let base = AugmentBase::new(self.u, self.current.clone())?;
        let candidates: Vec<usize> = (0..n).filter(|&i| !self.current.contains(i)).collect();
        let scores = candidates
            .par_iter()
            .map(|&i| self.objective.augmented_score(&base, i))
            .collect::<Result<Vec<f64>>>()?;
        let added = candidates[argbest(&scores).expect("at least one candidate remains")];
        self.current = self.current.with(added)?;
        Ok(GreedyStep {
            set: self.current.clone(),
            added,
            objectives: eval_all(self.u, &self.current)?,
        })
    }
}

/// Selects `p` sensors one at a time, each maximizing the objective given
/// the sensors already chosen. Returns the nested sets of sizes `1..=p`.
pub fn pure_greedy(
    u: &CandidateMatrix,
    p: usize,
    objective: ObjectiveKind,
) -> Result<Vec<GreedyStep>> {
    check_count(p, u.n())?;
    let mut selector = GreedySelector::new(u, objective);
    (0..p).map(|_| selector.step()).collect()
}

pub(crate) fn check_count(p: usize, n: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidArgument("at least one sensor must be selected".into()));
    }
    if p > n {
        return Err(Error::TooManySensors { p, n });
    }
    Ok(())
}
