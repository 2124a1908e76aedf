//! Benchmark protocol: seeded random systems, multi-trial comparisons
//! normalized by the pure-greedy baselines, Pareto dumps, correlation
//! statistics, and the exhaustive oracles used to check the selectors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::greedy::{strictly_better, GreedySelector, ObjectiveKind};
use crate::group_greedy::GroupGreedySelector;
use crate::model::{CandidateMatrix, ObjectiveVector, SensorSet};
use crate::nmg::{best_indices, best_of_archive, NmgSelector};
use crate::objectives::eval_all;
use crate::pareto::{dominates, FrontPartition, MinPoint};

/// `n x r` matrix of i.i.d. standard-normal entries, filled row by row from
/// a ChaCha8 stream seeded with `seed`.
pub fn random_candidate_matrix(n: usize, r: usize, seed: u64) -> Result<CandidateMatrix> {
    if n == 0 || r == 0 {
        return Err(Error::InvalidArgument(format!(
            "matrix dimensions must be positive, got {n} x {r}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * r);
    for _ in 0..n * r {
        data.push(StandardNormal.sample(&mut rng));
    }
    CandidateMatrix::new(DMatrix::from_row_slice(n, r, &data))
}

/// Selection methods compared by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Nmg,
    Dg,
    Ag,
    Eg,
    Dgg,
    Agg,
    Egg,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Nmg,
        Method::Dg,
        Method::Ag,
        Method::Eg,
        Method::Dgg,
        Method::Agg,
        Method::Egg,
    ];
    pub const BASELINES: [Method; 6] = [
        Method::Dg,
        Method::Ag,
        Method::Eg,
        Method::Dgg,
        Method::Agg,
        Method::Egg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Nmg => "nmg",
            Method::Dg => "dg",
            Method::Ag => "ag",
            Method::Eg => "eg",
            Method::Dgg => "dgg",
            Method::Agg => "agg",
            Method::Egg => "egg",
        }
    }

    /// The single objective of a baseline; `None` for NMG.
    pub fn objective(self) -> Option<ObjectiveKind> {
        match self {
            Method::Nmg => None,
            Method::Dg | Method::Dgg => Some(ObjectiveKind::D),
            Method::Ag | Method::Agg => Some(ObjectiveKind::A),
            Method::Eg | Method::Egg => Some(ObjectiveKind::E),
        }
    }

    pub fn is_group(self) -> bool {
        matches!(self, Method::Dgg | Method::Agg | Method::Egg)
    }

    /// The pure-greedy method for `kind`.
    pub fn pure(kind: ObjectiveKind) -> Method {
        match kind {
            ObjectiveKind::D => Method::Dg,
            ObjectiveKind::A => Method::Ag,
            ObjectiveKind::E => Method::Eg,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Indices of a method's answer after `p` sensors, and the wall time spent
/// to reach it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// For NMG each index is the best over the archive; for a group method,
    /// the indices of the archive's best set under its own objective.
    pub objectives: ObjectiveVector,
    /// Cumulative seconds from the start of the run to the end of step `p`.
    pub time_s: f64,
}

/// Runs `method` for `p_max` steps, recording each step.
pub fn run_method(
    u: &CandidateMatrix,
    method: Method,
    p_max: usize,
    capacity: usize,
    seed: u64,
) -> Result<Vec<StepRecord>> {
    crate::greedy::check_count(p_max, u.n())?;
    let start = Instant::now();
    let mut out = Vec::with_capacity(p_max);
    match method {
        Method::Nmg => {
            let mut sel = NmgSelector::new(u, capacity, seed)?;
            for _ in 0..p_max {
                let best = best_indices(sel.step()?);
                out.push(StepRecord {
                    objectives: best,
                    time_s: start.elapsed().as_secs_f64(),
                });
            }
        }
        Method::Dg | Method::Ag | Method::Eg => {
            let kind = method.objective().expect("pure method has an objective");
            let mut sel = GreedySelector::new(u, kind);
            for _ in 0..p_max {
                let step = sel.step()?;
                out.push(StepRecord {
                    objectives: step.objectives,
                    time_s: start.elapsed().as_secs_f64(),
                });
            }
        }
        Method::Dgg | Method::Agg | Method::Egg => {
            let kind = method.objective().expect("group method has an objective");
            let mut sel = GroupGreedySelector::new(u, capacity, kind)?;
            for _ in 0..p_max {
                let archive = sel.step()?;
                let best = best_of_archive(archive, kind).expect("archives are never empty");
                out.push(StepRecord {
                    objectives: best.objectives,
                    time_s: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub n: usize,
    pub r: usize,
    pub p_max: usize,
    pub capacity: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.r == 0 {
            return Err(Error::InvalidArgument("n and r must be positive".into()));
        }
        if self.p_max == 0 || self.p_max > self.n {
            return Err(Error::TooManySensors {
                p: self.p_max,
                n: self.n,
            });
        }
        if self.capacity == 0 {
            return Err(Error::InvalidArgument("L_max must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods requested".into()));
        }
        Ok(())
    }

    /// Seed of trial `t`; also seeds that trial's NMG selection stream.
    pub fn trial_seed(&self, t: usize) -> u64 {
        self.base_seed.wrapping_add(t as u64)
    }
}

/// Everything measured on one random matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub seed: u64,
    pub n: usize,
    pub r: usize,
    pub p_max: usize,
    pub capacity: usize,
    /// `records[method][p - 1]`. Always holds DG, AG and EG, which normalize
    /// the other methods.
    pub records: BTreeMap<Method, Vec<StepRecord>>,
}

/// Ratios of one method to the pure-greedy baselines; above 1 is better in
/// every column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratios {
    /// `det(method) / det(DG)`.
    pub d: f64,
    /// `tr(AG^-1) / tr(method^-1)`.
    pub a: f64,
    /// `lambda_min(method) / lambda_min(EG)`.
    pub e: f64,
}

impl TrialReport {
    pub fn ratios(&self, method: Method, p: usize) -> Ratios {
        let at = |m: Method| self.records[&m][p - 1].objectives;
        let mine = at(method);
        Ratios {
            d: (mine.log_det - at(Method::Dg).log_det).exp(),
            a: at(Method::Ag).trace_inv / mine.trace_inv,
            e: mine.lambda_min / at(Method::Eg).lambda_min,
        }
    }
}

/// Mean over trials for one `(p, method)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub p: usize,
    pub method: Method,
    pub mean_d_ratio: f64,
    pub mean_a_ratio: f64,
    pub mean_e_ratio: f64,
    pub mean_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub config: BenchConfig,
    pub trials: Vec<TrialReport>,
    pub aggregate: Vec<AggregateRow>,
}

/// Runs one trial: every requested method plus the three normalizers on
/// the matrix seeded by `seed`.
pub fn run_trial(config: &BenchConfig, seed: u64) -> Result<TrialReport> {
    let u = random_candidate_matrix(config.n, config.r, seed)?;
    let mut roster: Vec<Method> = config.methods.clone();
    roster.extend([Method::Dg, Method::Ag, Method::Eg]);
    roster.sort();
    roster.dedup();
    let mut records = BTreeMap::new();
    for m in roster {
        records.insert(m, run_method(&u, m, config.p_max, config.capacity, seed)?);
    }
    Ok(TrialReport {
        seed,
        n: config.n,
        r: config.r,
        p_max: config.p_max,
        capacity: config.capacity,
        records,
    })
}

/// Runs every trial and averages the per-trial ratios (mean of ratios).
pub fn run_trials(config: &BenchConfig) -> Result<BenchResult> {
    config.validate()?;
    let trials = (0..config.trials)
        .map(|t| run_trial(config, config.trial_seed(t)))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(config, &trials);
    Ok(BenchResult {
        config: config.clone(),
        trials,
        aggregate,
    })
}

pub fn aggregate(config: &BenchConfig, trials: &[TrialReport]) -> Vec<AggregateRow> {
    let count = trials.len() as f64;
    let mut rows = Vec::new();
    for p in 1..=config.p_max {
        for &method in &config.methods {
            let (mut d, mut a, mut e, mut t) = (0.0, 0.0, 0.0, 0.0);
            for trial in trials {
                let r = trial.ratios(method, p);
                d += r.d;
                a += r.a;
                e += r.e;
                t += trial.records[&method][p - 1].time_s;
            }
            rows.push(AggregateRow {
                p,
                method,
                mean_d_ratio: d / count,
                mean_a_ratio: a / count,
                mean_e_ratio: e / count,
                mean_time_s: t / count,
            });
        }
    }
    rows
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "pearson needs two equal-length samples of at least 2, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::InvalidArgument("pearson of a constant sample".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// The three index pairs reported by the correlation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexPair {
    DA,
    DE,
    AE,
}

impl IndexPair {
    pub const ALL: [IndexPair; 3] = [IndexPair::DA, IndexPair::DE, IndexPair::AE];

    pub fn label(self) -> &'static str {
        match self {
            IndexPair::DA => "D-A",
            IndexPair::DE => "D-E",
            IndexPair::AE => "A-E",
        }
    }

    fn pick(self, v: &ObjectiveVector) -> (f64, f64) {
        match self {
            IndexPair::DA => (v.log_det, v.trace_inv),
            IndexPair::DE => (v.log_det, v.lambda_min),
            IndexPair::AE => (v.trace_inv, v.lambda_min),
        }
    }
}

/// Pearson coefficients of the three index pairs over a set of solutions,
/// using `log det` for the D coordinate.
pub fn archive_correlations(values: &[ObjectiveVector]) -> Result<BTreeMap<IndexPair, f64>> {
    IndexPair::ALL
        .into_iter()
        .map(|pair| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = values.iter().map(|v| pair.pick(v)).unzip();
            pearson(&xs, &ys).map(|r| (pair, r))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationConfig {
    pub n: usize,
    pub r: usize,
    pub p: usize,
    pub capacity: usize,
    pub trials: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSummary {
    pub mean: BTreeMap<IndexPair, f64>,
    pub trials_used: usize,
    pub trials_skipped: usize,
}

/// Runs NMG on `trials` random matrices and averages the Pearson
/// coefficients of the final archive. Trials whose archive is constant in
/// some index are skipped and counted.
pub fn correlation_study(config: &CorrelationConfig) -> Result<CorrelationSummary> {
    if config.capacity < 3 {
        return Err(Error::InvalidArgument(
            "correlation study needs L_max of at least 3".into(),
        ));
    }
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut sums: BTreeMap<IndexPair, f64> = BTreeMap::new();
    let (mut used, mut skipped) = (0, 0);
    for t in 0..config.trials {
        let seed = config.base_seed.wrapping_add(t as u64);
        let u = random_candidate_matrix(config.n, config.r, seed)?;
        let traj = crate::nmg::nmg_select(&u, config.p, config.capacity, seed)?;
        let values: Vec<ObjectiveVector> = traj
            .last()
            .expect("p >= 1")
            .members()
            .iter()
            .map(|m| m.objectives)
            .collect();
        match archive_correlations(&values) {
            Ok(rs) => {
                used += 1;
                for (pair, r) in rs {
                    *sums.entry(pair).or_default() += r;
                }
            }
            Err(_) => skipped += 1,
        }
    }
    if used == 0 {
        return Err(Error::InvalidArgument(
            "every trial produced a degenerate archive".into(),
        ));
    }
    let mean = sums.into_iter().map(|(k, s)| (k, s / used as f64)).collect();
    Ok(CorrelationSummary {
        mean,
        trials_used: used,
        trials_skipped: skipped,
    })
}

/// One labelled solution in a Pareto dump.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpEntry {
    pub method: Method,
    pub set: SensorSet,
    pub objectives: ObjectiveVector,
}

/// The final NMG archive next to the answers of the six baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoDump {
    pub entries: Vec<DumpEntry>,
}

impl ParetoDump {
    pub fn nmg_entries(&self) -> impl Iterator<Item = &DumpEntry> {
        self.entries.iter().filter(|e| e.method == Method::Nmg)
    }

    /// True when no NMG entry dominates another.
    pub fn nmg_mutually_nondominated(&self) -> bool {
        let pts: Vec<MinPoint> = self
            .nmg_entries()
            .map(|e| MinPoint::from_objectives(&e.objectives))
            .collect();
        pts.iter()
            .all(|a| pts.iter().all(|b| !dominates(a, b)))
    }
}

/// Final-step solutions of NMG and every baseline on one matrix. Only the
/// rank-1 members of the NMG archive are kept.
pub fn pareto_dump(u: &CandidateMatrix, p: usize, capacity: usize, seed: u64) -> Result<ParetoDump> {
    let traj = crate::nmg::nmg_select(u, p, capacity, seed)?;
    let archive = traj.last().expect("p >= 1");
    let pts: Vec<MinPoint> = archive
        .members()
        .iter()
        .map(|m| MinPoint::from_objectives(&m.objectives))
        .collect();
    let mut entries: Vec<DumpEntry> = archive
        .members()
        .iter()
        .zip(&pts)
        .filter(|(_, a)| pts.iter().all(|b| !dominates(b, a)))
        .map(|(m, _)| DumpEntry {
            method: Method::Nmg,
            set: m.set.clone(),
            objectives: m.objectives,
        })
        .collect();
    for method in Method::BASELINES {
        let kind = method.objective().expect("baseline has an objective");
        let set = if method.is_group() {
            let traj = crate::group_greedy::group_greedy(u, p, capacity, kind)?;
            best_of_archive(traj.last().expect("p >= 1"), kind)
                .expect("archives are never empty")
                .set
                .clone()
        } else {
            crate::greedy::pure_greedy(u, p, kind)?
                .pop()
                .expect("p >= 1")
                .set
        };
        let objectives = eval_all(u, &set)?;
        entries.push(DumpEntry {
            method,
            set,
            objectives,
        });
    }
    Ok(ParetoDump { entries })
}

/// Largest number of subsets [`brute_force_best`] will enumerate.
pub const BRUTE_FORCE_BUDGET: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}

/// Exact optimum of `objective` over all `p`-subsets, by enumeration in
/// lexicographic order; near-ties keep the earlier subset.
pub fn brute_force_best(u: &CandidateMatrix, p: usize, objective: ObjectiveKind) -> Result<SensorSet> {
    let n = u.n();
    crate::greedy::check_count(p, n)?;
    let combinations = binomial(n, p);
    if combinations > BRUTE_FORCE_BUDGET {
        return Err(Error::BudgetExceeded {
            combinations,
            budget: BRUTE_FORCE_BUDGET,
        });
    }
    let mut current: Vec<usize> = (0..p).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let set = SensorSet::new(current.clone(), n)?;
        let score = objective.score(&eval_all(u, &set)?);
        match &best {
            Some((b, _)) if !strictly_better(score, *b) => {}
            _ => best = Some((score, current.clone())),
        }
        // advance to the next combination
        let mut i = p;
        while i > 0 && current[i - 1] == n - p + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        current[i - 1] += 1;
        for j in i..p {
            current[j] = current[j - 1] + 1;
        }
    }
    let (_, indices) = best.expect("at least one subset");
    SensorSet::new(indices, n)
}

/// Complete nondominated sort by repeated pairwise peeling. Fronts list
/// input positions in ascending order.
pub fn naive_nondominated_sort(points: &[MinPoint]) -> FrontPartition {
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut out = FrontPartition::default();
    while !remaining.is_empty() {
        let (front, rest): (Vec<usize>, Vec<usize>) = remaining.iter().partition(|&&a| {
            remaining
                .iter()
                .all(|&b| !dominates(&points[b], &points[a]))
        });
        out.comparisons += (remaining.len() * remaining.len()) as u64;
        out.assigned_count += front.len();
        out.fronts.push(front);
        remaining = rest;
    }
    out
}
