use std::sync::Arc;
use std::time::Instant;

use bbha::bees::{
    heuristic_fitness, neighbour, random_plan, run_bees_baseline, worker_step, BeeParams, BeesBudget, Site,
};
use bbha::cuts::{BendersCut, CutPool, CutSource};
use bbha::incumbent::SharedIncumbent;
use bbha::io::{brute_force, enumerate_plans, tri3};
use bbha::model::{Bus, Instance, PlanLayout, PlanVector, RightOfWay};
use bbha::scalar::objective_close;
use bbha::scout::{run_scout, ScoutBudget, ScoutConfig};
use bbha::subproblem::PlanEvaluator;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_plan_counts_are_uniform() {
    let layout = PlanLayout::new(vec![2]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut hist = [0usize; 3];
    let n = 10_000;
    for _ in 0..n {
        hist[random_plan(&layout, &mut rng).count(0)] += 1;
    }
    // Chi-square with 2 degrees of freedom; 13.8 is the 0.001 quantile.
    let e = n as f64 / 3.0;
    let chi2: f64 = hist.iter().map(|&h| (h as f64 - e).powi(2) / e).sum();
    assert!(chi2 < 13.8, "{hist:?}");
    assert_eq!(
        random_plan(&PlanLayout::new(vec![0, 0]), &mut rng),
        PlanVector::zeros(&PlanLayout::new(vec![0, 0]))
    );
}

#[test]
fn neighbour_of_single_corridor() {
    let layout = PlanLayout::new(vec![3]);
    let y = PlanVector::from_counts(&layout, &[1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut seen = [false; 4];
    for _ in 0..2000 {
        seen[neighbour(&y, 10, &mut rng).count(0)] = true;
    }
    assert_eq!(seen, [true, false, true, true]);
}

#[test]
fn radius_one_changes_one_corridor_by_one() {
    let inst = tri3();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let y = random_plan(inst.layout(), &mut rng);
        let z = neighbour(&y, 1, &mut rng);
        let diff: Vec<i64> = y
            .counts()
            .iter()
            .zip(z.counts())
            .map(|(&a, b)| b as i64 - a as i64)
            .collect();
        assert_eq!(diff.iter().filter(|d| **d != 0).count(), 1);
        assert_eq!(diff.iter().map(|d| d.abs()).sum::<i64>(), 1);
    }
}

#[test]
fn neighbour_respects_radius_and_direction() {
    // Wider layout so multi-step moves on one corridor happen often.
    let layout = PlanLayout::new(vec![3, 2, 1, 4]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let y = random_plan(&layout, &mut rng);
        let ngh = 1 + (rng.gen_range(0..6) as usize);
        let z = neighbour(&y, ngh, &mut rng);
        assert_eq!(bbha::model::normalize_plan(&layout, z.values()), z);
        assert!(y.hamming(&z) <= ngh);
        assert!(y.hamming(&z) >= 1);
        let grouped: usize = y.counts().iter().zip(z.counts()).map(|(&a, b)| a.abs_diff(b)).sum();
        assert_eq!(grouped, y.hamming(&z));
    }
}

use rand::Rng;

#[test]
fn heuristic_arithmetic() {
    let layout = PlanLayout::new(vec![1, 1]);
    let y = PlanVector::from_counts(&layout, &[1, 0]).unwrap();
    let cut = Arc::new(BendersCut {
        coefficients: vec![4.0, 1.0],
        rhs: 7.0,
        source: CutSource::Imported,
        generation_plan: PlanVector::zeros(&layout),
    });
    let costs = [2.0, 3.0];
    assert_eq!(heuristic_fitness(&costs, &y, std::slice::from_ref(&cut), f64::INFINITY), 5.0);
    assert_eq!(
        heuristic_fitness(&costs, &PlanVector::zeros(&layout), &[], f64::INFINITY),
        0.0
    );
    // Early exit: the master cost alone exceeds the incumbent.
    assert_eq!(heuristic_fitness(&costs, &y, &[cut], 1.0), 2.0);
}

fn scout_pool(inst: &Instance) -> CutPool<f64> {
    let pool = CutPool::new();
    let inc = SharedIncumbent::new(Instant::now());
    run_scout(inst, &pool, &inc, ScoutConfig::default(), ScoutBudget::default(), None).unwrap();
    pool
}

#[test]
fn heuristic_underestimates_and_is_exact_at_generators() {
    let inst = tri3();
    let pool = scout_pool(&inst);
    let mut eval = PlanEvaluator::new(&inst);
    for plan in enumerate_plans(inst.layout()) {
        let e = eval.evaluate(&plan, CutSource::Imported).unwrap();
        pool.push(e.cut);
    }
    let cuts = pool.snapshot();
    let costs = inst.slot_costs();
    let oracle = brute_force(&inst).unwrap();
    for (plan, truth) in &oracle.table {
        let h = heuristic_fitness(&costs, plan, &cuts, f64::INFINITY);
        assert!(h <= truth + 1e-6, "{plan}: {h} > {truth}");
        if cuts.iter().any(|c| &c.generation_plan == plan) {
            assert!(objective_close(h, *truth), "{plan}: {h} vs {truth}");
        }
    }
}

#[test]
fn more_cuts_never_lower_the_estimate() {
    let inst = tri3();
    let plans = enumerate_plans(inst.layout());
    let mut eval = PlanEvaluator::new(&inst);
    let costs = inst.slot_costs();
    let mut cuts = Vec::new();
    let mut last: Vec<f64> = plans
        .iter()
        .map(|p| heuristic_fitness(&costs, p, &cuts, f64::INFINITY))
        .collect();
    for p in &plans {
        cuts.push(Arc::new(eval.evaluate(p, CutSource::Imported).unwrap().cut));
        let now: Vec<f64> = plans
            .iter()
            .map(|q| heuristic_fitness(&costs, q, &cuts, f64::INFINITY))
            .collect();
        assert!(now.iter().zip(&last).all(|(a, b)| a >= b));
        last = now;
    }
}

#[test]
fn optimal_site_is_never_replaced() {
    let inst = tri3();
    let oracle = brute_force(&inst).unwrap();
    let pool = scout_pool(&inst);
    let cuts = pool.snapshot();
    let site = Site::new(oracle.plan.clone(), oracle.objective, 8);
    let mut eval = PlanEvaluator::new(&inst);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let out = worker_step(
            &site,
            10,
            &cuts,
            oracle.objective,
            &[],
            &mut eval,
            CutSource::Worker(0),
            &mut rng,
        )
        .unwrap();
        assert!(out.improved.is_none());
    }
}

#[test]
fn worker_step_evaluates_the_best_screened_neighbour() {
    let inst = tri3();
    let pool = scout_pool(&inst);
    let cuts = pool.snapshot();
    let costs = inst.slot_costs();
    let zero = PlanVector::zeros(inst.layout());
    let mut eval = PlanEvaluator::new(&inst);
    let fitness = eval.evaluate(&zero, CutSource::Imported).unwrap().fitness;
    let site = Site::new(zero, fitness, 8);
    for seed in 0..10 {
        // Replay the sample with a cloned rng.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut replay = rng.clone();
        let sample: Vec<PlanVector> = (0..6).map(|_| neighbour(&site.center, 8, &mut replay)).collect();
        let mut best: Option<(PlanVector, f64)> = None;
        for c in sample {
            let h = heuristic_fitness(&costs, &c, &cuts, f64::INFINITY);
            if best.as_ref().is_none_or(|b| h < b.1) {
                best = Some((c, h));
            }
        }
        let before = eval.solves();
        let out = worker_step(
            &site,
            6,
            &cuts,
            f64::INFINITY,
            &[],
            &mut eval,
            CutSource::Worker(0),
            &mut rng,
        )
        .unwrap();
        assert!(eval.solves() - before <= 1);
        let (expect, h) = best.unwrap();
        if h < site.fitness {
            assert_eq!(out.evaluated.as_ref().unwrap().0, expect);
            assert!(out.cut.is_some());
        } else {
            assert!(out.evaluated.is_none());
        }
    }
}

#[test]
fn without_cuts_the_cheapest_neighbour_is_evaluated() {
    let inst = tri3();
    let costs = inst.slot_costs();
    let all = PlanVector::ones(inst.layout());
    let site = Site::new(all, f64::INFINITY, 2);
    let mut eval = PlanEvaluator::new(&inst);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut replay = rng.clone();
    let sample: Vec<PlanVector> = (0..5).map(|_| neighbour(&site.center, 2, &mut replay)).collect();
    let cheapest = sample
        .iter()
        .min_by(|a, b| {
            heuristic_fitness(&costs, a, &[], f64::INFINITY).total_cmp(&heuristic_fitness(
                &costs,
                b,
                &[],
                f64::INFINITY,
            ))
        })
        .unwrap();
    let out = worker_step(
        &site,
        5,
        &[],
        f64::INFINITY,
        &[],
        &mut eval,
        CutSource::Worker(0),
        &mut rng,
    )
    .unwrap();
    let chosen = &out.evaluated.unwrap().0;
    assert_eq!(
        heuristic_fitness(&costs, chosen, &[], f64::INFINITY),
        heuristic_fitness(&costs, cheapest, &[], f64::INFINITY)
    );
}

fn single_candidate() -> Instance {
    let buses = vec![
        Bus {
            id: 0,
            demand: vec![0.0],
            max_generation: 100.0,
            curtailment_cost: vec![1000.0],
            storage_unit_cost: 2000.0,
            max_storage: 0.0,
        },
        Bus {
            id: 1,
            demand: vec![50.0],
            max_generation: 0.0,
            curtailment_cost: vec![1000.0],
            storage_unit_cost: 2000.0,
            max_storage: 0.0,
        },
    ];
    let row = RightOfWay::new(0, 1, 0, 1, 100.0, 1.0, 80.0);
    Instance::new("single", 1, buses, vec![row])
}

#[test]
fn baseline_finds_a_paying_circuit_in_one_iteration() {
    let inst = single_candidate();
    let params = BeeParams::default();
    let mut hits = 0;
    for seed in 0..20 {
        let inc = SharedIncumbent::new(Instant::now());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let budget = BeesBudget {
            iteration_limit: Some(1),
            ..Default::default()
        };
        let out = run_bees_baseline(&inst, &params, budget, &mut rng, &inc).unwrap();
        if out.best.center.count(0) == 1 {
            hits += 1;
        }
    }
    assert_eq!(hits, 20);
}

#[test]
fn baseline_reaches_tri3_optimum() {
    let inst = tri3();
    let oracle = brute_force(&inst).unwrap();
    let mut hits = 0;
    for seed in 0..5 {
        let inc = SharedIncumbent::new(Instant::now());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let budget = BeesBudget {
            iteration_limit: Some(30),
            ..Default::default()
        };
        let out = run_bees_baseline(&inst, &BeeParams::default(), budget, &mut rng, &inc).unwrap();
        if objective_close(out.best.fitness, oracle.objective) {
            hits += 1;
        }
    }
    assert!(hits >= 4, "{hits} of 5");
}

#[test]
fn degenerate_labels_give_the_same_trajectory() {
    let inst = tri3();
    let a = BeeParams {
        ne: 1,
        nb: 1,
        nre: 4,
        nrb: 4,
        ..BeeParams::default()
    };
    let b = BeeParams { ne: 0, ..a };
    let run = |p: &BeeParams| {
        let inc = SharedIncumbent::new(Instant::now());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let budget = BeesBudget {
            iteration_limit: Some(5),
            ..Default::default()
        };
        run_bees_baseline(&inst, p, budget, &mut rng, &inc).unwrap();
        inc.snapshot().trace.iter().map(|t| t.incumbent).collect::<Vec<_>>()
    };
    assert_eq!(run(&a), run(&b));
}
