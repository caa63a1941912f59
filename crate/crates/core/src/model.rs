//! Problem data for transmission expansion with energy storage: buses,
//! rights of way, the cyclic time grid, and the binary expansion plan.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A network node with its demand series and local resources.
#[derive(Clone, Debug, PartialEq)]
pub struct Bus<S: Scalar = f64> {
    pub id: usize,
    /// Demand per interval (MW), length `T`.
    pub demand: Vec<S>,
    /// Generation capacity (MW).
    pub max_generation: S,
    /// Curtailment penalty per interval (currency per MW), length `T`.
    pub curtailment_cost: Vec<S>,
    /// Storage cost (currency per MWh of installed capacity).
    pub storage_unit_cost: S,
    /// Largest installable storage (MWh).
    pub max_storage: S,
}

/// A corridor between two buses holding existing and candidate circuits.
#[derive(Clone, Debug, PartialEq)]
pub struct RightOfWay<S: Scalar = f64> {
    pub from_bus: usize,
    pub to_bus: usize,
    pub existing_circuits: usize,
    pub max_new_circuits: usize,
    pub circuit_cost: S,
    pub susceptance: S,
    /// Thermal limit per circuit (MW).
    pub flow_limit: S,
    /// Disjunctive constant for the candidate voltage-law rows (MW).
    pub big_m: S,
}

impl<S: Scalar> RightOfWay<S> {
    /// A right of way whose disjunctive constant is filled in by [`Instance::new`].
    pub fn new(
        from_bus: usize,
        to_bus: usize,
        existing_circuits: usize,
        max_new_circuits: usize,
        circuit_cost: S,
        susceptance: S,
        flow_limit: S,
    ) -> Self {
        Self {
            from_bus,
            to_bus,
            existing_circuits,
            max_new_circuits,
            circuit_cost,
            susceptance,
            flow_limit,
            big_m: S::zero(),
        }
    }

    pub fn is_candidate(&self) -> bool {
        self.max_new_circuits > 0
    }

    pub fn is_existing(&self) -> bool {
        self.existing_circuits > 0
    }
}

/// Slot layout of the binary plan: right of way `r` owns the contiguous
/// slots `offsets[r] .. offsets[r] + sizes[r]`, one per candidate circuit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlanLayout {
    sizes: Arc<[usize]>,
    offsets: Arc<[usize]>,
}

impl PlanLayout {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        for &s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        offsets.push(acc);
        Self {
            sizes: sizes.into(),
            offsets: offsets.into(),
        }
    }

    pub fn num_groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_slots(&self) -> usize {
        self.offsets[self.sizes.len()]
    }

    pub fn group_size(&self, group: usize) -> usize {
        self.sizes[group]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn group_range(&self, group: usize) -> std::ops::Range<usize> {
        self.offsets[group]..self.offsets[group + 1]
    }

    /// Slot of the `position`-th (0-based) candidate circuit on `group`.
    pub fn slot(&self, group: usize, position: usize) -> usize {
        debug_assert!(position < self.sizes[group]);
        self.offsets[group] + position
    }

    /// Inverse of [`PlanLayout::slot`].
    pub fn group_of(&self, slot: usize) -> (usize, usize) {
        let group = self.offsets.partition_point(|&o| o <= slot) - 1;
        (group, slot - self.offsets[group])
    }

    /// Number of distinct normalized plans, `prod (n_max + 1)`.
    pub fn num_normalized_plans(&self) -> u128 {
        self.sizes.iter().map(|&s| s as u128 + 1).product()
    }
}

/// Binary installation vector in symmetry-normalized form: within every
/// right of way the installed circuits occupy the lowest positions.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PlanRepr", into = "PlanRepr")]
pub struct PlanVector {
    values: Vec<bool>,
    layout: PlanLayout,
}

impl PlanVector {
    pub fn zeros(layout: &PlanLayout) -> Self {
        Self {
            values: vec![false; layout.num_slots()],
            layout: layout.clone(),
        }
    }

    pub fn ones(layout: &PlanLayout) -> Self {
        Self {
            values: vec![true; layout.num_slots()],
            layout: layout.clone(),
        }
    }

    /// Plan installing `counts[r]` circuits on right of way `r`.
    pub fn from_counts(layout: &PlanLayout, counts: &[usize]) -> Result<Self> {
        if counts.len() != layout.num_groups() {
            return Err(Error::DimensionMismatch {
                what: "circuit counts",
                expected: layout.num_groups(),
                found: counts.len(),
            });
        }
        let mut values = vec![false; layout.num_slots()];
        for (group, &count) in counts.iter().enumerate() {
            if count > layout.group_size(group) {
                return Err(Error::InvalidParams(format!(
                    "right of way {group}: {count} circuits exceeds maximum {}",
                    layout.group_size(group)
                )));
            }
            let start = layout.group_range(group).start;
            values[start..start + count].fill(true);
        }
        Ok(Self {
            values,
            layout: layout.clone(),
        })
    }

    pub fn layout(&self) -> &PlanLayout {
        &self.layout
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, slot: usize) -> bool {
        self.values[slot]
    }

    pub fn count(&self, group: usize) -> usize {
        self.values[self.layout.group_range(group)]
            .iter()
            .filter(|&&v| v)
            .count()
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..self.layout.num_groups()).map(|g| self.count(g)).collect()
    }

    pub fn num_installed(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    /// Number of slots in which the two plans differ.
    pub fn hamming(&self, other: &PlanVector) -> usize {
        self.values.iter().zip(&other.values).filter(|(a, b)| a != b).count()
    }

    /// Values as `0.0 / 1.0`.
    pub fn as_scalars<S: Scalar>(&self) -> Vec<S> {
        self.values
            .iter()
            .map(|&v| if v { S::one() } else { S::zero() })
            .collect()
    }
}

impl PartialOrd for PlanVector {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PlanVector {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.values.cmp(&other.values)
    }
}

impl fmt::Debug for PlanVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlanVector{:?}", self.counts())
    }
}

impl fmt::Display for PlanVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let counts: Vec<String> = self.counts().iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", counts.join(" "))
    }
}

#[derive(Serialize, Deserialize)]
struct PlanRepr {
    max_new: Vec<usize>,
    installed: Vec<usize>,
}

impl From<PlanVector> for PlanRepr {
    fn from(plan: PlanVector) -> Self {
        Self {
            installed: plan.counts(),
            max_new: plan.layout.sizes.to_vec(),
        }
    }
}

impl TryFrom<PlanRepr> for PlanVector {
    type Error = Error;

    fn try_from(repr: PlanRepr) -> Result<Self> {
        PlanVector::from_counts(&PlanLayout::new(repr.max_new), &repr.installed)
    }
}

/// Packs the ones of every right of way into its lowest positions. The number
/// of circuits per right of way, and hence the master cost, is preserved.
///
/// Panics if `raw` is not dimensioned to `layout`.
pub fn normalize_plan(layout: &PlanLayout, raw: &[bool]) -> PlanVector {
    assert_eq!(
        raw.len(),
        layout.num_slots(),
        "raw plan has {} slots, layout has {}",
        raw.len(),
        layout.num_slots()
    );
    let mut values = vec![false; raw.len()];
    for group in 0..layout.num_groups() {
        let range = layout.group_range(group);
        let ones = raw[range.clone()].iter().filter(|&&v| v).count();
        values[range.start..range.start + ones].fill(true);
    }
    PlanVector {
        values,
        layout: layout.clone(),
    }
}

/// Immutable problem data. Construct with [`Instance::new`], which also
/// derives the disjunctive constants of every right of way.
#[derive(Clone, Debug)]
pub struct Instance<S: Scalar = f64> {
    name: String,
    num_intervals: usize,
    buses: Vec<Bus<S>>,
    rights_of_way: Vec<RightOfWay<S>>,
    layout: PlanLayout,
}

impl<S: Scalar> Instance<S> {
    /// Builds an instance, setting every `big_m` to
    /// `susceptance * L * max_kl(flow_limit_kl / susceptance_kl)` where `L`
    /// is the number of buses. Any angle difference that a feasible dispatch
    /// can realise across the network is bounded by that path-length bound.
    pub fn new(
        name: impl Into<String>,
        num_intervals: usize,
        buses: Vec<Bus<S>>,
        mut rights_of_way: Vec<RightOfWay<S>>,
    ) -> Self {
        let angle_bound = S::of_usize(buses.len().max(1))
            * rights_of_way
                .iter()
                .filter(|r| r.susceptance > S::zero())
                .map(|r| r.flow_limit / r.susceptance)
                .fold(S::zero(), S::max);
        for row in &mut rights_of_way {
            row.big_m = row.susceptance * angle_bound;
        }
        Self::with_explicit_big_m(name, num_intervals, buses, rights_of_way)
    }

    /// Builds an instance keeping the `big_m` values supplied by the caller.
    pub fn with_explicit_big_m(
        name: impl Into<String>,
        num_intervals: usize,
        buses: Vec<Bus<S>>,
        rights_of_way: Vec<RightOfWay<S>>,
    ) -> Self {
        let layout = PlanLayout::new(rights_of_way.iter().map(|r| r.max_new_circuits).collect());
        Self {
            name: name.into(),
            num_intervals,
            buses,
            rights_of_way,
            layout,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_intervals(&self) -> usize {
        self.num_intervals
    }

    pub fn buses(&self) -> &[Bus<S>] {
        &self.buses
    }

    pub fn rights_of_way(&self) -> &[RightOfWay<S>] {
        &self.rights_of_way
    }

    pub fn layout(&self) -> &PlanLayout {
        &self.layout
    }

    pub fn num_slots(&self) -> usize {
        self.layout.num_slots()
    }

    /// Cost of each plan slot, in slot order.
    pub fn slot_costs(&self) -> Vec<S> {
        let mut costs = Vec::with_capacity(self.num_slots());
        for row in &self.rights_of_way {
            costs.extend(std::iter::repeat_n(row.circuit_cost, row.max_new_circuits));
        }
        costs
    }

    pub fn total_demand(&self) -> S {
        self.buses.iter().flat_map(|b| b.demand.iter().copied()).sum()
    }

    /// Instance with every demand series replaced by `peak_k * profile[t]`.
    pub fn with_demand(&self, demand: Vec<Vec<S>>) -> Self {
        let mut next = self.clone();
        for (bus, series) in next.buses.iter_mut().zip(demand) {
            bus.demand = series;
        }
        next
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    NoIntervals,
    BusIdOrder,
    DemandLength,
    CurtailmentCostLength,
    Negative,
    NonPositiveCurtailmentCost,
    SelfLoop,
    UnknownBus,
    NonPositiveFlowLimit,
    NonPositiveSusceptance,
    BigMTooSmall,
    Disconnected,
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Offending entity, e.g. `bus 3` or `right of way 2 (0-1)`.
    pub entity: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, entity: String, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            entity,
            message: message.into(),
        });
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Checks every data invariant and lists each violation; never fails.
pub fn validate_instance<S: Scalar>(inst: &Instance<S>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let t_len = inst.num_intervals;
    let n = inst.buses.len();

    if t_len == 0 {
        report.push(
            ViolationKind::NoIntervals,
            "instance".into(),
            "number of intervals must be at least 1",
        );
    }

    for (index, bus) in inst.buses.iter().enumerate() {
        let entity = format!("bus {}", bus.id);
        if bus.id != index {
            report.push(
                ViolationKind::BusIdOrder,
                entity.clone(),
                format!("bus ids must be 0..{n} in order, found {} at position {index}", bus.id),
            );
        }
        if bus.demand.len() != t_len {
            report.push(
                ViolationKind::DemandLength,
                entity.clone(),
                format!("demand length {} differs from {t_len} intervals", bus.demand.len()),
            );
        }
        if bus.curtailment_cost.len() != t_len {
            report.push(
                ViolationKind::CurtailmentCostLength,
                entity.clone(),
                format!(
                    "curtailment cost length {} differs from {t_len} intervals",
                    bus.curtailment_cost.len()
                ),
            );
        }
        let scalars = bus.demand.iter().chain(&bus.curtailment_cost).chain([
            &bus.max_generation,
            &bus.storage_unit_cost,
            &bus.max_storage,
        ]);
        if scalars.clone().any(|v| !v.is_finite()) {
            report.push(ViolationKind::NonFinite, entity.clone(), "non-finite value");
        }
        if bus.demand.iter().any(|&d| d < S::zero()) {
            report.push(ViolationKind::Negative, entity.clone(), "negative demand");
        }
        if bus.max_generation < S::zero() {
            report.push(ViolationKind::Negative, entity.clone(), "negative max generation");
        }
        if bus.max_storage < S::zero() {
            report.push(ViolationKind::Negative, entity.clone(), "negative max storage");
        }
        if bus.storage_unit_cost < S::zero() {
            report.push(ViolationKind::Negative, entity.clone(), "negative storage cost");
        }
        if bus.curtailment_cost.iter().any(|&a| a <= S::zero()) {
            report.push(
                ViolationKind::NonPositiveCurtailmentCost,
                entity.clone(),
                "curtailment cost must be positive",
            );
        }
    }

    let angle_bound = S::of_usize(n.max(1))
        * inst
            .rights_of_way
            .iter()
            .filter(|r| r.susceptance > S::zero())
            .map(|r| r.flow_limit / r.susceptance)
            .fold(S::zero(), S::max);

    for (index, row) in inst.rights_of_way.iter().enumerate() {
        let entity = format!("right of way {index} ({}-{})", row.from_bus, row.to_bus);
        if row.from_bus == row.to_bus {
            report.push(
                ViolationKind::SelfLoop,
                entity.clone(),
                "self-loop: from bus equals to bus",
            );
        }
        if row.from_bus >= n || row.to_bus >= n {
            report.push(ViolationKind::UnknownBus, entity.clone(), "references an unknown bus");
        }
        if [row.circuit_cost, row.susceptance, row.flow_limit, row.big_m]
            .iter()
            .any(|v| !v.is_finite())
        {
            report.push(ViolationKind::NonFinite, entity.clone(), "non-finite value");
        }
        if row.circuit_cost < S::zero() {
            report.push(ViolationKind::Negative, entity.clone(), "negative circuit cost");
        }
        if !(row.flow_limit > S::zero()) {
            report.push(
                ViolationKind::NonPositiveFlowLimit,
                entity.clone(),
                "flow limit must be positive",
            );
        }
        if !(row.susceptance > S::zero()) {
            report.push(
                ViolationKind::NonPositiveSusceptance,
                entity.clone(),
                "susceptance must be positive",
            );
        }
        let required = row.susceptance * angle_bound;
        if row.is_candidate() && row.big_m < required * (S::one() - S::of(1e-12)) {
            report.push(
                ViolationKind::BigMTooSmall,
                entity,
                format!("big-M {} below the angle bound {}", row.big_m, required),
            );
        }
    }

    if !report.contains(ViolationKind::UnknownBus) && n > 0 {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for row in &inst.rights_of_way {
            if row.is_existing() || row.is_candidate() {
                let (a, b) = (find(&mut parent, row.from_bus), find(&mut parent, row.to_bus));
                parent[a] = b;
            }
        }
        let active: Vec<usize> = inst
            .buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.max_generation > S::zero() || b.demand.iter().any(|&d| d > S::zero()))
            .map(|(i, _)| i)
            .collect();
        if let Some(&first) = active.first() {
            let root = find(&mut parent, first);
            for &bus in &active[1..] {
                if find(&mut parent, bus) != root {
                    report.push(
                        ViolationKind::Disconnected,
                        format!("bus {bus}"),
                        format!("not connected to bus {first} through existing or candidate circuits"),
                    );
                }
            }
        }
    }

    report
}

/// Investment part of the master objective, `sum c_ij * y_ij^p`.
pub fn master_cost<S: Scalar>(inst: &Instance<S>, plan: &PlanVector) -> Result<S> {
    if plan.len() != inst.num_slots() {
        return Err(Error::DimensionMismatch {
            what: "plan",
            expected: inst.num_slots(),
            found: plan.len(),
        });
    }
    Ok(inst
        .rights_of_way
        .iter()
        .enumerate()
        .map(|(group, row)| row.circuit_cost * S::of_usize(plan.count(group)))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::tri3;

    fn one_bus(demand: Vec<f64>) -> Bus {
        Bus {
            id: 0,
            curtailment_cost: vec![10.0; demand.len()],
            demand,
            max_generation: 0.0,
            storage_unit_cost: 1.0,
            max_storage: 0.0,
        }
    }

    fn two_bus_instance() -> Instance {
        let mut b1 = one_bus(vec![5.0]);
        b1.id = 1;
        let mut b0 = one_bus(vec![0.0]);
        b0.max_generation = 10.0;
        Instance::new(
            "pair",
            1,
            vec![b0, b1],
            vec![RightOfWay::new(0, 1, 0, 3, 10.0, 2.0, 4.0)],
        )
    }

    #[test]
    fn self_loop_is_reported() {
        let inst = Instance::new(
            "loop",
            1,
            vec![one_bus(vec![1.0])],
            vec![RightOfWay::new(0, 0, 1, 0, 1.0, 1.0, 1.0)],
        );
        let report = validate_instance(&inst);
        assert!(report.contains(ViolationKind::SelfLoop));
        assert!(report.to_string().contains("self-loop"));
    }

    #[test]
    fn short_demand_series_is_reported() {
        let mut inst = two_bus_instance();
        inst.num_intervals = 2;
        inst.buses[0].curtailment_cost = vec![1.0, 1.0];
        inst.buses[1].curtailment_cost = vec![1.0, 1.0];
        inst.buses[1].demand = vec![5.0, 5.0];
        let report = validate_instance(&inst);
        assert_eq!(report.violations.len(), 1, "{report}");
        assert!(report.contains(ViolationKind::DemandLength));
        assert!(report.to_string().contains("demand length"));
        assert!(report.violations[0].entity.contains("bus 0"));
    }

    #[test]
    fn tri3_is_valid() {
        let report = validate_instance(&tri3());
        assert!(report.is_empty(), "{report}");
    }

    #[test]
    fn undersized_big_m_is_reported() {
        let inst = two_bus_instance();
        let mut rows = inst.rights_of_way().to_vec();
        rows[0].big_m = 0.1;
        let small = Instance::with_explicit_big_m("small", 1, inst.buses().to_vec(), rows);
        assert!(validate_instance(&small).contains(ViolationKind::BigMTooSmall));
    }

    #[test]
    fn disconnected_load_is_reported() {
        let mut inst = two_bus_instance();
        inst.rights_of_way[0].max_new_circuits = 0;
        assert!(validate_instance(&inst).contains(ViolationKind::Disconnected));
    }

    #[test]
    fn big_m_follows_path_length_bound() {
        let inst = two_bus_instance();
        // L = 2 buses, f/gamma = 2 => M = gamma * 2 * 2.
        assert_eq!(inst.rights_of_way()[0].big_m, 8.0);
    }

    #[test]
    fn master_cost_examples() {
        let inst = two_bus_instance();
        let layout = inst.layout().clone();
        assert_eq!(master_cost(&inst, &PlanVector::zeros(&layout)).unwrap(), 0.0);
        let two = PlanVector::from_counts(&layout, &[2]).unwrap();
        assert_eq!(master_cost(&inst, &two).unwrap(), 20.0);
        let wrong = PlanVector::zeros(&PlanLayout::new(vec![2]));
        assert!(matches!(
            master_cost(&inst, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn master_cost_all_ones_on_tri3() {
        let inst = tri3();
        let all = PlanVector::ones(inst.layout());
        let mut expected = 0.0;
        for row in inst.rights_of_way() {
            for _ in 0..row.max_new_circuits {
                expected += row.circuit_cost;
            }
        }
        assert_eq!(master_cost(&inst, &all).unwrap(), expected);
    }

    #[test]
    fn normalize_examples() {
        let two = PlanLayout::new(vec![2]);
        assert_eq!(normalize_plan(&two, &[false, true]).values(), &[true, false]);
        let three = PlanLayout::new(vec![3]);
        assert_eq!(
            normalize_plan(&three, &[true, true, false]).values(),
            &[true, true, false]
        );
    }

    #[test]
    fn normalize_exhaustive_six_slots() {
        let layout = PlanLayout::new(vec![6]);
        for mask in 0u32..64 {
            let raw: Vec<bool> = (0..6).map(|i| mask >> i & 1 == 1).collect();
            let k = mask.count_ones() as usize;
            let plan = normalize_plan(&layout, &raw);
            for (i, &v) in plan.values().iter().enumerate() {
                assert_eq!(v, i < k, "mask {mask:06b}");
            }
        }
    }

    #[test]
    fn slot_lookup_round_trips() {
        let layout = PlanLayout::new(vec![2, 0, 3, 1]);
        for slot in 0..layout.num_slots() {
            let (g, p) = layout.group_of(slot);
            assert_eq!(layout.slot(g, p), slot);
        }
        assert_eq!(layout.num_normalized_plans(), 3 * 4 * 2);
    }

    #[test]
    fn plan_serde_round_trip() {
        let layout = PlanLayout::new(vec![2, 3]);
        let plan = PlanVector::from_counts(&layout, &[1, 3]).unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        let back: PlanVector = serde_json::from_str(&json).unwrap();
        assert_eq!(plan, back);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn raw_plan() -> impl Strategy<Value = (Vec<usize>, Vec<bool>)> {
            prop::collection::vec(0usize..4, 1..5).prop_flat_map(|sizes| {
                let n: usize = sizes.iter().sum();
                (Just(sizes), prop::collection::vec(any::<bool>(), n))
            })
        }

        proptest! {
            #[test]
            fn normalization_preserves_cost_and_is_idempotent((sizes, raw) in raw_plan()) {
                let rows: Vec<RightOfWay> = sizes
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| RightOfWay::new(0, 1, 0, s, 1.5 + i as f64, 1.0, 1.0))
                    .collect();
                let inst = Instance::new("p", 1, vec![one_bus(vec![0.0]), one_bus(vec![0.0])], rows);
                let layout = inst.layout().clone();
                let once = normalize_plan(&layout, &raw);
                let twice = normalize_plan(&layout, once.values());
                prop_assert_eq!(&once, &twice);
                let raw_cost: f64 = raw
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v)
                    .map(|(s, _)| inst.slot_costs()[s])
                    .sum();
                let cost = master_cost(&inst, &once).unwrap();
                prop_assert!((cost - raw_cost).abs() < 1e-9);
            }
        }
    }
}
