//! Seeded synthetic instances of desk-checkable size.
//!
//! Bus 0 holds the only generator. Existing single circuits form a random
//! spanning tree rooted there; every tree corridor and a few spare corridors
//! accept new circuits. Corridor limits are set from the mean demand behind
//! each tree corridor so that the do-nothing plan curtails a sizeable share
//! of energy while the all-in plan (with storage) curtails almost nothing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cuts::CutSource;
use crate::io::profiles::DemandProfile;
use crate::model::{Bus, Instance, PlanVector, RightOfWay};
use crate::subproblem::PlanEvaluator;

#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    pub buses: usize,
    /// Extra candidate-only corridors beyond the spanning tree.
    pub spare_rights_of_way: usize,
    pub intervals: usize,
    pub seed: u64,
    /// Target for the total number of candidate slots.
    pub slots: usize,
    pub storage_unit_cost: f64,
    /// Curtailment penalty per MWh; the per-interval cost is this times
    /// `24 / intervals`.
    pub value_of_lost_load: f64,
}

impl GeneratorConfig {
    pub fn new(buses: usize, spare_rights_of_way: usize, intervals: usize, seed: u64) -> Self {
        Self {
            buses,
            spare_rights_of_way,
            intervals,
            seed,
            slots: 12,
            storage_unit_cost: 2000.0,
            value_of_lost_load: 3000.0,
        }
    }
}

/// Share of demanded energy that is curtailed at the optimal dispatch.
pub fn curtailed_share(inst: &Instance, plan: &PlanVector) -> f64 {
    let eval = PlanEvaluator::new(inst)
        .evaluate(plan, CutSource::Initializer)
        .expect("generator instances solve");
    let curtailed: f64 = eval.operation.curtailment.iter().flatten().sum();
    let demand = inst.total_demand();
    if demand > 0.0 {
        curtailed / demand
    } else {
        0.0
    }
}

fn round_to(v: f64, step: f64) -> f64 {
    // Divide rather than multiply by a fractional step so the result prints short.
    if step < 1.0 {
        let inv = (1.0 / step).round();
        (v * inv).round() / inv
    } else {
        (v / step).round() * step
    }
}

fn three_digits(v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    round_to(v, 10f64.powi(v.log10().floor() as i32 - 2))
}

#[derive(Clone)]
struct Draft {
    buses: Vec<Bus>,
    /// `(from, to, existing, max_new, susceptance)`.
    corridors: Vec<(usize, usize, usize, usize, f64)>,
    /// Mean total demand behind each tree corridor (by child bus).
    submean: Vec<f64>,
    subpeak: Vec<f64>,
}

fn draft(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Draft {
    let n = cfg.buses;
    let t = cfg.intervals;
    let mut buses = Vec::with_capacity(n);
    let alpha = round_to(cfg.value_of_lost_load * 24.0 / t as f64, 0.001);
    let mut peaks = vec![0.0; n];
    for (k, peak) in peaks.iter_mut().enumerate() {
        let demand = if k == 0 {
            vec![0.0; t]
        } else {
            *peak = rng.gen_range(20..=60) as f64;
            let profile = *DemandProfile::ALL.choose(rng).expect("profiles exist");
            profile
                .demand(*peak, t)
                .into_iter()
                .map(|d| round_to(d, 0.001))
                .collect()
        };
        let max_storage = if k == 0 {
            0.0
        } else {
            round_to(*peak * rng.gen_range(0.5..1.0) * (t as f64 / 4.0).max(1.0), 1.0)
        };
        buses.push(Bus {
            id: k,
            demand,
            max_generation: 0.0,
            curtailment_cost: vec![alpha; t],
            storage_unit_cost: cfg.storage_unit_cost,
            max_storage,
        });
    }

    let mut parent = vec![usize::MAX; n];
    let mut corridors = Vec::new();
    for k in 1..n {
        parent[k] = rng.gen_range(0..k);
        corridors.push((parent[k], k, 1, 1, round_to(rng.gen_range(1.0..4.0), 0.1)));
    }
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| parent[j] != i)
        .collect();
    pairs.shuffle(rng);
    for &(i, j) in pairs.iter().take(cfg.spare_rights_of_way) {
        corridors.push((i, j, 0, 1, round_to(rng.gen_range(1.0..4.0), 0.1)));
    }
    // Fit the slot total: drop spare corridors first, then tree candidates;
    // grow random corridors (up to 3 circuits) when there is room.
    let mut total: usize = corridors.iter().map(|c| c.3).sum();
    while total > cfg.slots && corridors.len() > n - 1 {
        corridors.pop();
        total -= 1;
    }
    while total > cfg.slots {
        let idx = corridors.iter().rposition(|c| c.3 > 0).expect("some slot left");
        corridors[idx].3 -= 1;
        total -= 1;
    }
    let growable = |c: &(usize, usize, usize, usize, f64)| c.3 > 0 && c.3 < 3;
    while total < cfg.slots && corridors.iter().any(growable) {
        let idx = rng.gen_range(0..corridors.len());
        if growable(&corridors[idx]) {
            corridors[idx].3 += 1;
            total += 1;
        }
    }

    let mut submean = vec![0.0; n];
    let mut subpeak = vec![0.0; n];
    for k in 1..n {
        let mut series = vec![0.0; t];
        for (j, bus) in buses.iter().enumerate() {
            let mut a = j;
            while a != 0 && a != k {
                a = parent[a];
            }
            if a == k {
                for (s, d) in series.iter_mut().zip(&bus.demand) {
                    *s += d;
                }
            }
        }
        submean[k] = series.iter().sum::<f64>() / t as f64;
        subpeak[k] = series.iter().copied().fold(0.0, f64::max);
    }
    let system_peak = (0..t)
        .map(|s| buses.iter().map(|b| b.demand[s]).sum::<f64>())
        .fold(0.0, f64::max);
    buses[0].max_generation = (1.2 * system_peak).ceil();
    Draft {
        buses,
        corridors,
        submean,
        subpeak,
    }
}

fn build(cfg: &GeneratorConfig, d: &Draft, lambda: f64, costs: &[f64]) -> Instance {
    let mut rows = Vec::with_capacity(d.corridors.len());
    for (idx, &(i, j, existing, max_new, gamma)) in d.corridors.iter().enumerate() {
        let limit = if existing > 0 && max_new == 0 {
            // Not expandable: never the bottleneck.
            1.2 * d.subpeak[j]
        } else if existing > 0 {
            lambda * d.submean[j] / (1 + max_new) as f64
        } else {
            lambda * 0.5 * (d.submean[i] + d.submean[j]) / (1 + max_new) as f64
        };
        rows.push(RightOfWay::new(
            i,
            j,
            existing,
            max_new,
            costs[idx],
            gamma,
            round_to(limit.max(0.1), 0.1),
        ));
    }
    let name = format!(
        "gen-b{}-r{}-t{}-s{}",
        cfg.buses, cfg.spare_rights_of_way, cfg.intervals, cfg.seed
    );
    Instance::new(name, cfg.intervals, d.buses.clone(), rows)
}

/// Deterministic in `cfg`.
///
/// # Panics
///
/// If `cfg.buses < 2` or `cfg.intervals == 0`.
pub fn generate_instance(cfg: &GeneratorConfig) -> Instance {
    assert!(cfg.buses >= 2, "the generator needs at least two buses");
    assert!(cfg.intervals >= 1, "the generator needs at least one interval");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fallback = None;
    for _attempt in 0..40 {
        let d = draft(cfg, &mut rng);
        let unit = vec![1.0; d.corridors.len()];
        for lambda in [1.15, 1.3, 1.5, 1.75, 2.0] {
            let inst = build(cfg, &d, lambda, &unit);
            let none = PlanVector::zeros(inst.layout());
            let all = PlanVector::ones(inst.layout());
            let (share_none, share_all) = (curtailed_share(&inst, &none), curtailed_share(&inst, &all));
            if share_none < 0.2 {
                break;
            }
            if share_all <= 0.02 {
                return price(cfg, &d, lambda, &inst, &mut rng);
            }
            if fallback.is_none() {
                fallback = Some((d.clone(), lambda, inst));
            }
        }
    }
    // Calibration failed for every draw; keep the first congested candidate.
    let (d, lambda, inst) = fallback.expect("at least one congested draft");
    log::warn!(
        "generator seed {} could not reach near-zero all-in curtailment",
        cfg.seed
    );
    price(cfg, &d, lambda, &inst, &mut rng)
}

/// Sets circuit costs relative to the operating savings of the all-in plan,
/// so that some but not all circuits pay for themselves.
fn price(cfg: &GeneratorConfig, d: &Draft, lambda: f64, calibrated: &Instance, rng: &mut ChaCha8Rng) -> Instance {
    let mut eval = PlanEvaluator::new(calibrated);
    let v_none = eval
        .evaluate(&PlanVector::zeros(calibrated.layout()), CutSource::Initializer)
        .expect("generator instances solve")
        .operation
        .cost;
    let v_all = eval
        .evaluate(&PlanVector::ones(calibrated.layout()), CutSource::Initializer)
        .expect("generator instances solve")
        .operation
        .cost;
    let slots = calibrated.num_slots().max(1) as f64;
    let savings = (v_none - v_all).max(1.0);
    let costs: Vec<f64> = d
        .corridors
        .iter()
        .map(|_| three_digits(savings / slots * rng.gen_range(0.1..1.2)).max(1.0))
        .collect();
    build(cfg, d, lambda, &costs)
}
