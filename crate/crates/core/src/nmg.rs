//! The nondominated-solution-based multiobjective-greedy (NMG) driver.
//!
//! Each step extends every reserved set by every sensor it lacks, drops
//! duplicate sets, ranks the extensions by Pareto dominance over the D-, A-
//! and E-optimality indices, and reserves whole fronts until `L_max` sets
//! are held. The front that crosses `L_max` is thinned by crowding distance
//! and a seeded random draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greedy::{check_count, strictly_better, ObjectiveKind};
use crate::group_greedy::{expand_unique, prepare_bases};
use crate::model::{Archive, ArchiveMember, CandidateMatrix, ObjectiveVector, SensorSet};
use crate::pareto::{ens_ss_partial, select_from_last_front, MinPoint};

/// Random source for last-front selection. One stream per run, drawn from
/// in step order.
pub type SelectionRng = ChaCha8Rng;

/// Step-wise NMG selector.
pub struct NmgSelector<'a> {
    u: &'a CandidateMatrix,
    capacity: usize,
    rng: SelectionRng,
    archive: Option<Archive>,
}

impl<'a> NmgSelector<'a> {
    pub fn new(u: &'a CandidateMatrix, capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("L_max must be at least 1".into()));
        }
        Ok(Self {
            u,
            capacity,
            rng: SelectionRng::seed_from_u64(seed),
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
        let values = expansions
            .par_iter()
            .map(|e| bases[e.parent].evaluate(e.added))
            .collect::<Result<Vec<ObjectiveVector>>>()?;
        let points: Vec<MinPoint> = values.iter().map(MinPoint::from_objectives).collect();

        let chosen = reserve(&points, self.capacity, &mut self.rng)?;
        let members = chosen
            .into_iter()
            .map(|pos| ArchiveMember {
                set: expansions[pos].set.clone(),
                objectives: values[pos],
            })
            .collect();
        self.archive = Some(Archive::new(members, k, self.capacity)?);
        Ok(self.archive.as_ref().expect("archive was just set"))
    }
}

/// Positions of the points to reserve, given points in canonical-key order.
/// Whole fronts are taken in rank order; the front that reaches `capacity`
/// is thinned with [`select_from_last_front`]. Within a front, positions are
/// ascending.
pub(crate) fn reserve(
    points: &[MinPoint],
    capacity: usize,
    rng: &mut SelectionRng,
) -> Result<Vec<usize>> {
    let partition = ens_ss_partial(points, capacity)?;
    let mut chosen = Vec::with_capacity(capacity);
    for front in partition.fronts {
        let mut front = front;
        front.sort_unstable();
        if chosen.len() + front.len() <= capacity {
            chosen.extend(front);
        } else {
            let needed = capacity - chosen.len();
            let front_points: Vec<MinPoint> = front.iter().map(|&i| points[i].clone()).collect();
            let picks = select_from_last_front(&front_points, needed, rng)?;
            chosen.extend(picks.into_iter().map(|j| front[j]));
        }
        if chosen.len() >= capacity {
            break;
        }
    }
    Ok(chosen)
}

/// Runs NMG for `p` steps with `capacity` (`L_max`) reserved sets and returns
/// the archive of every step.
pub fn nmg_select(
    u: &CandidateMatrix,
    p: usize,
    capacity: usize,
    seed: u64,
) -> Result<Vec<Archive>> {
    check_count(p, u.n())?;
    let mut selector = NmgSelector::new(u, capacity, seed)?;
    (0..p).map(|_| selector.step().cloned()).collect()
}

/// The archive member best under `objective`; near-ties go to the smaller
/// canonical key.
pub fn best_of_archive(archive: &Archive, objective: ObjectiveKind) -> Option<&ArchiveMember> {
    let mut members: Vec<&ArchiveMember> = archive.members().iter().collect();
    members.sort_by(|a, b| a.set.key().cmp(b.set.key()));
    let mut best: Option<&ArchiveMember> = None;
    for m in members {
        match best {
            Some(b) if !strictly_better(objective.score(&m.objectives), objective.score(&b.objectives)) => {}
            _ => best = Some(m),
        }
    }
    best
}

/// Best value of each index over the archive; the three may come from
/// different sets.
pub fn best_indices(archive: &Archive) -> ObjectiveVector {
    let pick = |kind| {
        best_of_archive(archive, kind)
            .map(|m| kind.value(&m.objectives))
            .expect("archives are never empty")
    };
    ObjectiveVector {
        log_det: pick(ObjectiveKind::D),
        trace_inv: pick(ObjectiveKind::A),
        lambda_min: pick(ObjectiveKind::E),
    }
}
