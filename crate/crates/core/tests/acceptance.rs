//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. `ACCEPTANCE_ONLY=1,3,9` restricts the run.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nmg_select::bench::{
    correlation_study, naive_nondominated_sort, random_candidate_matrix, run_method, run_trials,
    BenchConfig, BenchResult, CorrelationConfig, IndexPair, Method, TrialReport,
};
use nmg_select::greedy::pure_greedy;
use nmg_select::nmg::nmg_select;
use nmg_select::model::measurement_matrix;
use nmg_select::objectives::{eval_all, fim_in, AugmentBase, Regime};
use nmg_select::pareto::{ens_ss_partial, MinPoint};
use nmg_select::{ObjectiveKind, ObjectiveVector, SensorSet};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    let s = elapsed.as_secs_f64();
    if s < limit_s {
        Ok(())
    } else {
        Err(format!("took {s:.2} s, limit {limit_s} s"))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn max_rel(a: &ObjectiveVector, b: &ObjectiveVector) -> f64 {
    if a.is_singular() || b.is_singular() {
        return if a.is_singular() == b.is_singular() { 0.0 } else { f64::INFINITY };
    }
    rel(a.log_det, b.log_det).max(rel(a.trace_inv, b.trace_inv)).max(rel(a.lambda_min, b.lambda_min))
}

fn greedy_oracle() -> Outcome {
    let start = Instant::now();
    for seed in 0..10 {
        let u = random_candidate_matrix(30, 5, seed).unwrap();
        for kind in ObjectiveKind::ALL {
            let got: Vec<usize> = pure_greedy(&u, 10, kind).unwrap().iter().map(|s| s.added).collect();
            let want = common::stepwise_greedy(&u, 10, kind);
            if got != want {
                return Err(format!("seed {seed} {kind:?}: {got:?} != {want:?}"));
            }
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("30 trajectories identical in {:.2} s", start.elapsed().as_secs_f64()))
}

fn sorting_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ranks = 0;
    for case in 0..1000 {
        let w = rng.gen_range(10..=500);
        let cap = if case % 2 == 0 { 5 } else { 50 };
        let grid = case % 4 >= 2;
        let points: Vec<MinPoint> = (0..w)
            .map(|_| {
                MinPoint::new(
                    (0..3)
                        .map(|_| if grid { rng.gen_range(0..8) as f64 } else { rng.gen::<f64>() })
                        .collect(),
                )
            })
            .collect();
        let ens = ens_ss_partial(&points, cap).unwrap();
        let naive = naive_nondominated_sort(&points);
        for (q, front) in ens.fronts.iter().enumerate() {
            let mut f = front.clone();
            f.sort_unstable();
            if f != naive.fronts[q] {
                return Err(format!("case {case}: rank {} differs", q + 1));
            }
            ranks += 1;
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("{ranks} fronts identical over 1000 sets in {:.2} s", start.elapsed().as_secs_f64()))
}

fn nmg_trajectories(seeds: std::ops::Range<u64>) -> Vec<Vec<Vec<Vec<usize>>>> {
    seeds
        .map(|seed| {
            let u = random_candidate_matrix(10, 3, seed).unwrap();
            nmg_select(&u, 3, 4, seed).unwrap().iter().map(common::archive_sets).collect()
        })
        .collect()
}

fn nmg_oracle() -> Outcome {
    let start = Instant::now();
    let got = nmg_trajectories(0..10);
    for (seed, traj) in got.iter().enumerate() {
        let u = random_candidate_matrix(10, 3, seed as u64).unwrap();
        let want = common::nmg_pipeline(&u, 3, 4, seed as u64);
        if *traj != want {
            return Err(format!("seed {seed}: {traj:?} != {want:?}"));
        }
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!("10 trajectories identical in {:.2} s", start.elapsed().as_secs_f64()))
}

fn numerical_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut under, mut over) = (0.0f64, 0, 0);
    for pair in 0..1000u64 {
        let r = rng.gen_range(2..=10);
        let n = rng.gen_range(3 * r..=40);
        let u = random_candidate_matrix(n, r, 1000 + pair).unwrap();
        let k = rng.gen_range(0..=(2 * r).min(n - 1));
        let picks = sample(&mut rng, n, k + 1).into_vec();
        let base = SensorSet::new(picks[..k].to_vec(), n).unwrap();
        let cand = picks[k];
        if k < r { under += 1 } else { over += 1 }
        let full = eval_all(&u, &base.with(cand).unwrap()).unwrap();
        let fast = AugmentBase::new(&u, base).unwrap().evaluate(cand).unwrap();
        let d = max_rel(&fast, &full);
        if !(d <= 1e-8) {
            return Err(format!("pair {pair}: deviation {d:e}"));
        }
        worst = worst.max(d);
    }
    let mut boundary = 0.0f64;
    for seed in 0..200u64 {
        let r = 2 + (seed as usize % 9);
        let u = random_candidate_matrix(3 * r, r, 5000 + seed).unwrap();
        let set = SensorSet::new((0..r).map(|i| 3 * i).collect(), 3 * r).unwrap();
        let c = measurement_matrix(&u, &set).unwrap();
        let g = fim_in(&c, r, Regime::Gram).unwrap().objectives();
        let f = fim_in(&c, r, Regime::Information).unwrap().objectives();
        let d = max_rel(&g, &f);
        if !(d <= 1e-9) {
            return Err(format!("boundary seed {seed}: deviation {d:e}"));
        }
        boundary = boundary.max(d);
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "augmented worst {worst:.1e} ({under} p<=r, {over} p>r), boundary worst {boundary:.1e}"
    ))
}

fn desk_config() -> BenchConfig {
    BenchConfig {
        n: 200,
        r: 10,
        p_max: 20,
        capacity: 10,
        trials: 20,
        base_seed: 0,
        methods: Method::ALL.to_vec(),
    }
}

fn mean_over_trials(result: &BenchResult, f: impl Fn(&TrialReport) -> f64) -> f64 {
    result.trials.iter().map(f).sum::<f64>() / result.trials.len() as f64
}

fn beats_pure_greedy(result: &BenchResult) -> Outcome {
    let mut best = [1.0f64; 3];
    for p in 1..=20 {
        let m = [
            mean_over_trials(result, |t| t.ratios(Method::Nmg, p).d),
            mean_over_trials(result, |t| t.ratios(Method::Nmg, p).a),
            mean_over_trials(result, |t| t.ratios(Method::Nmg, p).e),
        ];
        for (k, v) in m.iter().enumerate() {
            if !(*v >= 1.0 - 1e-9) {
                return Err(format!("p={p} index {} mean ratio {v}", ["D", "A", "E"][k]));
            }
            best[k] = best[k].max(*v);
        }
    }
    for (k, v) in best.iter().enumerate() {
        if !(*v > 1.005) {
            return Err(format!("index {} never exceeds 1.005 (max {v})", ["D", "A", "E"][k]));
        }
    }
    Ok(format!("peak mean ratios D {:.4} A {:.4} E {:.4}", best[0], best[1], best[2]))
}

fn versus_group_greedy(result: &BenchResult) -> Outcome {
    let p = 20;
    let at = |t: &TrialReport, m: Method| t.records[&m][p - 1].objectives;
    let a = |m: Method| mean_over_trials(result, |t| at(t, m).trace_inv / at(t, Method::Ag).trace_inv);
    let e = |m: Method| mean_over_trials(result, |t| t.ratios(m, p).e);
    let d = |m: Method| mean_over_trials(result, |t| t.ratios(m, p).d);
    let (a_nmg, a_agg) = (a(Method::Nmg), a(Method::Agg));
    let (e_nmg, e_egg) = (e(Method::Nmg), e(Method::Egg));
    let detail = format!(
        "A {a_nmg:.4} vs AGG {a_agg:.4}, E {e_nmg:.4} vs EGG {e_egg:.4}, D {:.4} vs DGG {:.4}",
        d(Method::Nmg),
        d(Method::Dgg)
    );
    if a_nmg <= a_agg && e_nmg >= e_egg {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn correlations() -> Outcome {
    let smoke_start = Instant::now();
    let smoke = correlation_study(&CorrelationConfig {
        n: 300,
        r: 10,
        p: 20,
        capacity: 50,
        trials: 10,
        base_seed: 0,
    })
    .map_err(|e| e.to_string())?;
    let smoke_s = smoke_start.elapsed().as_secs_f64();
    let smoke_de = smoke.mean[&IndexPair::DE];
    if !(smoke_de < 0.0) || smoke_s >= 120.0 {
        return Err(format!("smoke D-E {smoke_de:.3} in {smoke_s:.1} s"));
    }
    let full = correlation_study(&CorrelationConfig {
        n: 1000,
        r: 10,
        p: 20,
        capacity: 50,
        trials: 30,
        base_seed: 0,
    })
    .map_err(|e| e.to_string())?;
    let (da, de, ae) = (
        full.mean[&IndexPair::DA],
        full.mean[&IndexPair::DE],
        full.mean[&IndexPair::AE],
    );
    let detail = format!(
        "D-E {de:.3}, D-A {da:.3}, A-E {ae:.3} over {} trials ({} skipped); smoke D-E {smoke_de:.3} in {smoke_s:.1} s",
        full.trials_used, full.trials_skipped
    );
    if de <= -0.6 && da.abs() <= 0.5 && ae.abs() <= 0.5 && full.trials_used >= 30 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Fastest of three runs, to damp scheduler noise.
fn time_method(method: Method, capacity: usize) -> f64 {
    let u = random_candidate_matrix(1000, 10, 0).unwrap();
    (0..3)
        .map(|_| run_method(&u, method, 20, capacity, 0).unwrap().last().unwrap().time_s)
        .fold(f64::INFINITY, f64::min)
}

fn timing_order() -> Outcome {
    let nmg = time_method(Method::Nmg, 50);
    let group: Vec<(Method, f64)> = [Method::Dgg, Method::Agg, Method::Egg]
        .into_iter()
        .map(|m| (m, time_method(m, 50)))
        .collect();
    let pure: Vec<(Method, f64)> = [Method::Dg, Method::Ag, Method::Eg]
        .into_iter()
        .map(|m| (m, time_method(m, 50)))
        .collect();
    let sweep: Vec<f64> = [5, 10, 20].into_iter().map(|l| time_method(Method::Nmg, l)).chain([nmg]).collect();
    let fmt = |v: &[(Method, f64)]| {
        v.iter().map(|(m, t)| format!("{m} {t:.3}")).collect::<Vec<_>>().join(", ")
    };
    let detail = format!(
        "NMG {nmg:.3} s; {}; {}; NMG over L 5/10/20/50: {:.3}/{:.3}/{:.3}/{:.3} s",
        fmt(&group),
        fmt(&pure),
        sweep[0],
        sweep[1],
        sweep[2],
        sweep[3]
    );
    let slowest_pure = pure.iter().map(|x| x.1).fold(0.0, f64::max);
    let fastest_group = group.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let slowest_group = group.iter().map(|x| x.1).fold(0.0, f64::max);
    let ordered = nmg > slowest_group && fastest_group > slowest_pure;
    let monotone = sweep.windows(2).all(|w| w[1] >= 0.8 * w[0]);
    if ordered && monotone {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bench_fingerprint(result: &BenchResult) -> Vec<String> {
    let mut out = Vec::new();
    for t in &result.trials {
        for (m, recs) in &t.records {
            for (k, rec) in recs.iter().enumerate() {
                let o = rec.objectives;
                out.push(format!(
                    "{} {m} {} {:016x} {:016x} {:016x}",
                    t.seed,
                    k + 1,
                    o.log_det.to_bits(),
                    o.trace_inv.to_bits(),
                    o.lambda_min.to_bits()
                ));
            }
        }
    }
    out
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn determinism(first_bench: &BenchResult) -> Outcome {
    let reference = (nmg_trajectories(0..10), bench_fingerprint(first_bench));
    for threads in [1, 4] {
        let again = in_pool(threads, || {
            let bench = run_trials(&desk_config()).unwrap();
            (nmg_trajectories(0..10), bench_fingerprint(&bench))
        });
        if again.0 != reference.0 {
            return Err(format!("NMG oracle trajectories differ with {threads} threads"));
        }
        if again.1 != reference.1 {
            return Err(format!("benchmark values differ with {threads} threads"));
        }
    }
    Ok(format!("{} benchmark values identical across 3 runs", reference.1.len()))
}

fn main() -> ExitCode {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |k: u32| only.as_ref().map_or(true, |v| v.contains(&k));

    let mut bench: Option<BenchResult> = None;
    let mut desk_bench = || -> BenchResult {
        bench.get_or_insert_with(|| run_trials(&desk_config()).unwrap()).clone()
    };

    let mut failed = 0;
    let mut report = |k: u32, name: &str, outcome: Outcome| {
        match outcome {
            Ok(d) => println!("[PASS] criterion {k} {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("[FAIL] criterion {k} {name}: {d}");
            }
        }
    };

    if wanted(1) {
        report(1, "greedy step-optimality", greedy_oracle());
    }
    if wanted(2) {
        report(2, "nondominated sorting", sorting_oracle());
    }
    if wanted(3) {
        report(3, "NMG end-to-end", nmg_oracle());
    }
    if wanted(4) {
        report(4, "numerical consistency", numerical_consistency());
    }
    if wanted(5) {
        report(5, "NMG vs pure greedy", beats_pure_greedy(&desk_bench()));
    }
    if wanted(6) {
        report(6, "NMG vs group greedy", versus_group_greedy(&desk_bench()));
    }
    if wanted(7) {
        report(7, "index correlations", correlations());
    }
    if wanted(8) {
        report(8, "timing order", timing_order());
    }
    if wanted(9) {
        report(9, "determinism", determinism(&desk_bench()));
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
