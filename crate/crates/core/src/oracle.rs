//! Exact brute-force baselines and an independent feasibility checker.
//!
//! Everything here recomputes lengths and loads from the distance matrix and
//! never trusts values cached on a solution.

use std::fmt;
use std::time::{Duration, Instant};

use crate::binpack::{check_items, Bin, BinClass, Item, Packing, CAPACITY_SLACK};
use crate::error::{Error, Result};
use crate::instance::{MetricInstance, VertexId, DEPOT};
use crate::solvers::{solution_alpha, AssignedTour, RoutingSolution, SolutionMeta};
use crate::tree::Tour;

/// Absolute slack on tour lengths.
pub const LENGTH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VerifyKind {
    Coverage,
    Duplicate,
    Capacity,
    Distance,
    Balance,
    Endpoint,
    Fleet,
}

impl fmt::Display for VerifyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerifyKind::Coverage => "coverage",
            VerifyKind::Duplicate => "duplicate",
            VerifyKind::Capacity => "capacity",
            VerifyKind::Distance => "distance",
            VerifyKind::Balance => "balance",
            VerifyKind::Endpoint => "endpoint",
            VerifyKind::Fleet => "fleet",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TourViolation {
    pub tour: Option<usize>,
    pub vertex: Option<VertexId>,
    pub kind: VerifyKind,
    pub magnitude: f64,
}

impl fmt::Display for TourViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation", self.kind)?;
        if let Some(t) = self.tour {
            write!(f, " in tour {t}")?;
        }
        if let Some(v) = self.vertex {
            write!(f, " at vertex {v}")?;
        }
        write!(f, " (magnitude {})", self.magnitude)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub violations: Vec<TourViolation>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: VerifyKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    fn push(&mut self, tour: Option<usize>, vertex: Option<VertexId>, kind: VerifyKind, magnitude: f64) {
        self.violations.push(TourViolation {
            tour,
            vertex,
            kind,
            magnitude,
        });
    }
}

/// Checks a routing solution against the instance: every customer served
/// exactly once, every tour a closed walk from the depot, capacity and
/// distance bounds of the assigned class, vehicle counts per class, and (if
/// requested) the balance ratio.
pub fn verify_solution(inst: &MetricInstance, sol: &RoutingSolution, alpha_target: Option<f64>) -> VerifyReport {
    let n = inst.n();
    let fleet = inst.fleet();
    let mut report = VerifyReport::default();
    let mut visits = vec![0usize; n];
    let mut lengths = Vec::with_capacity(sol.tours.len());
    let mut per_class = vec![0usize; fleet.len()];

    for (i, AssignedTour { class_id, tour }) in sol.tours.iter().enumerate() {
        let seq = &tour.seq;
        if seq.len() < 2 || seq[0] != DEPOT || seq[seq.len() - 1] != DEPOT {
            report.push(Some(i), None, VerifyKind::Endpoint, 0.0);
        }
        if let Some(&bad) = seq.iter().find(|&&v| v >= n) {
            report.push(Some(i), Some(bad), VerifyKind::Coverage, bad as f64);
            lengths.push(0.0);
            continue;
        }
        let interior = if seq.len() >= 2 {
            &seq[1..seq.len() - 1]
        } else {
            &seq[..]
        };
        let mut load = 0.0;
        for &v in interior {
            if v == DEPOT {
                report.push(Some(i), Some(v), VerifyKind::Endpoint, 0.0);
                continue;
            }
            visits[v] += 1;
            if visits[v] > 1 {
                report.push(Some(i), Some(v), VerifyKind::Duplicate, visits[v] as f64);
            } else {
                load += inst.demand(v);
            }
        }
        let length = inst.walk_length(seq);
        lengths.push(length);

        let Some(class) = fleet.class(*class_id) else {
            report.push(Some(i), None, VerifyKind::Fleet, *class_id as f64);
            continue;
        };
        per_class[*class_id] += 1;
        if load > class.capacity + CAPACITY_SLACK {
            report.push(Some(i), None, VerifyKind::Capacity, load - class.capacity);
        }
        if length > class.distance_bound + LENGTH_SLACK {
            report.push(Some(i), None, VerifyKind::Distance, length - class.distance_bound);
        }
    }
    for v in inst.customers() {
        if visits[v] == 0 {
            report.push(None, Some(v), VerifyKind::Coverage, 1.0);
        }
    }
    for (class_id, c) in fleet.classes().iter().enumerate() {
        if !c.multiplicity.allows(per_class[class_id]) {
            let limit = c.multiplicity.limit().unwrap_or(0) as f64;
            report.push(None, None, VerifyKind::Fleet, per_class[class_id] as f64 - limit);
        }
    }
    if let Some(target) = alpha_target {
        let achieved = solution_alpha(&lengths);
        if achieved < target {
            report.push(None, None, VerifyKind::Balance, target - achieved);
        }
    }
    report
}

/// Checks open paths from the balanced peeling algorithm: every customer on
/// exactly one path and each path no longer than `bound`. The depot may
/// appear on any number of paths.
pub fn verify_paths(inst: &MetricInstance, paths: &[Vec<VertexId>], bound: f64) -> VerifyReport {
    let n = inst.n();
    let mut report = VerifyReport::default();
    let mut visits = vec![0usize; n];
    for (i, seq) in paths.iter().enumerate() {
        if let Some(&bad) = seq.iter().find(|&&v| v >= n) {
            report.push(Some(i), Some(bad), VerifyKind::Coverage, bad as f64);
            continue;
        }
        for &v in seq.iter().filter(|&&v| v != DEPOT) {
            visits[v] += 1;
            if visits[v] > 1 {
                report.push(Some(i), Some(v), VerifyKind::Duplicate, visits[v] as f64);
            }
        }
        let length = inst.walk_length(seq);
        if length > bound + LENGTH_SLACK {
            report.push(Some(i), None, VerifyKind::Distance, length - bound);
        }
    }
    for v in inst.customers() {
        if visits[v] == 0 {
            report.push(None, Some(v), VerifyKind::Coverage, 1.0);
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    /// Largest vertex count (depot included) accepted by the tour oracles.
    pub max_n: usize,
    pub max_items: usize,
    pub max_states: u64,
    pub time_cap: Duration,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_n: 7,
            max_items: 8,
            max_states: 50_000_000,
            time_cap: Duration::from_secs(60),
        }
    }
}

struct Budget {
    limits: OracleLimits,
    states: u64,
    started: Instant,
}

impl Budget {
    fn new(limits: OracleLimits) -> Self {
        Budget {
            limits,
            states: 0,
            started: Instant::now(),
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.states += 1;
        if self.states > self.limits.max_states {
            return Err(Error::ResourceLimit(format!(
                "more than {} search states",
                self.limits.max_states
            )));
        }
        if self.states.is_multiple_of(4096) && self.started.elapsed() > self.limits.time_cap {
            return Err(Error::ResourceLimit(format!(
                "exceeded time cap of {:?}",
                self.limits.time_cap
            )));
        }
        Ok(())
    }
}

/// Lexicographic successor of `xs`; false when `xs` was the last permutation.
pub(crate) fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let Some(i) = (0..xs.len() - 1).rev().find(|&i| xs[i] < xs[i + 1]) else {
        return false;
    };
    let j = (i + 1..xs.len()).rev().find(|&j| xs[j] > xs[i]).unwrap();
    xs.swap(i, j);
    xs[i + 1..].reverse();
    true
}

/// Shortest depot-to-depot tour through `members` by full enumeration. The
/// lexicographically first order wins among tours within 1e-12 of the best.
fn best_order(inst: &MetricInstance, members: &[VertexId]) -> (Vec<VertexId>, f64) {
    let mut perm = members.to_vec();
    perm.sort_unstable();
    let closed_len = |p: &[VertexId]| -> f64 {
        match (p.first(), p.last()) {
            (Some(&a), Some(&z)) => inst.dist(DEPOT, a) + inst.walk_length(p) + inst.dist(z, DEPOT),
            _ => 0.0,
        }
    };
    let mut best = perm.clone();
    let mut best_len = closed_len(&perm);
    while next_permutation(&mut perm) {
        let len = closed_len(&perm);
        if len < best_len - 1e-12 {
            best_len = len;
            best.clone_from(&perm);
        }
    }
    (best, best_len)
}

/// Optimal closed tour through every vertex, starting at the depot.
pub fn exact_tsp(inst: &MetricInstance) -> Result<Tour> {
    const MAX_N: usize = 10;
    if inst.n() > MAX_N {
        return Err(Error::ResourceLimit(format!(
            "exact TSP handles at most {MAX_N} vertices, got {}",
            inst.n()
        )));
    }
    let customers: Vec<VertexId> = inst.customers().collect();
    if customers.is_empty() {
        return Ok(Tour::from_seq(inst, vec![DEPOT]));
    }
    let (order, _) = best_order(inst, &customers);
    Ok(Tour::r_tour(inst, &order))
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Optimal(RoutingSolution),
    Infeasible,
}

impl OracleOutcome {
    pub fn pi(&self) -> Option<usize> {
        match self {
            OracleOutcome::Optimal(s) => Some(s.pi),
            OracleOutcome::Infeasible => None,
        }
    }

    pub fn solution(&self) -> Option<&RoutingSolution> {
        match self {
            OracleOutcome::Optimal(s) => Some(s),
            OracleOutcome::Infeasible => None,
        }
    }
}

struct TourSearch<'a> {
    feasible: &'a [Vec<usize>],
    limits: Vec<Option<u32>>,
    branch_classes: bool,
    used: Vec<usize>,
    stack: Vec<(usize, usize)>,
    best: Option<Vec<(usize, usize)>>,
    budget: Budget,
}

impl TourSearch<'_> {
    fn run(&mut self, rest: usize) -> Result<()> {
        self.budget.tick()?;
        if rest == 0 {
            if self.best.as_ref().is_none_or(|b| self.stack.len() < b.len()) {
                self.best = Some(self.stack.clone());
            }
            return Ok(());
        }
        if let Some(b) = &self.best {
            if self.stack.len() + 1 >= b.len() {
                return Ok(());
            }
        }
        let low = rest & rest.wrapping_neg();
        let others = rest & !low;
        // submasks of `others`, largest first, each joined with the lowest customer
        let mut sub = others;
        loop {
            let block = sub | low;
            for &class in &self.feasible[block] {
                if self.limits[class].is_some_and(|k| self.used[class] >= k as usize) {
                    continue;
                }
                self.used[class] += 1;
                self.stack.push((block, class));
                self.run(rest & !block)?;
                self.stack.pop();
                self.used[class] -= 1;
                if !self.branch_classes {
                    break;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
        Ok(())
    }
}

/// Minimum number of feasible tours, by exhaustive search over set
/// partitions of the customers (blocks canonically ordered by their smallest
/// member) and class assignments. Each block is routed optimally by
/// permutation enumeration.
pub fn exact_min_tours(inst: &MetricInstance, limits: OracleLimits) -> Result<OracleOutcome> {
    let n = inst.n();
    if n > limits.max_n {
        return Err(Error::ResourceLimit(format!(
            "instance has {n} vertices, oracle limit is {}",
            limits.max_n
        )));
    }
    let customers: Vec<VertexId> = inst.customers().collect();
    let m = customers.len();
    if m >= usize::BITS as usize - 1 {
        return Err(Error::ResourceLimit(format!("{m} customers")));
    }
    let fleet = inst.fleet();
    let full = (1usize << m) - 1;

    let mut budget = Budget::new(limits);
    let mut orders: Vec<(Vec<VertexId>, f64)> = vec![(Vec::new(), 0.0); full + 1];
    let mut feasible: Vec<Vec<usize>> = vec![Vec::new(); full + 1];
    for mask in 1..=full {
        budget.tick()?;
        let members: Vec<VertexId> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| customers[b]).collect();
        let load: f64 = members.iter().map(|&v| inst.demand(v)).sum();
        let (order, len) = best_order(inst, &members);
        feasible[mask] = fleet
            .classes()
            .iter()
            .enumerate()
            .filter(|(_, c)| load <= c.capacity + CAPACITY_SLACK && len <= c.distance_bound + LENGTH_SLACK)
            .map(|(i, _)| i)
            .collect();
        orders[mask] = (order, len);
    }

    let limits_per_class: Vec<Option<u32>> = fleet.classes().iter().map(|c| c.multiplicity.limit()).collect();
    let mut search = TourSearch {
        feasible: &feasible,
        branch_classes: limits_per_class.iter().any(Option::is_some),
        limits: limits_per_class,
        used: vec![0; fleet.len()],
        stack: Vec::new(),
        best: None,
        budget,
    };
    search.run(full)?;

    let Some(blocks) = search.best else {
        return Ok(OracleOutcome::Infeasible);
    };
    let tours = blocks
        .into_iter()
        .map(|(mask, class_id)| AssignedTour {
            class_id,
            tour: Tour::r_tour(inst, &orders[mask].0),
        })
        .collect();
    Ok(OracleOutcome::Optimal(RoutingSolution::new(
        tours,
        SolutionMeta::new("exact"),
    )))
}

/// `(class_id, item indices)` of one bin.
type BinGroup = (usize, Vec<usize>);

struct PackSearch<'a> {
    items: &'a [Item],
    classes: &'a [BinClass],
    opened: Vec<usize>,
    bins: Vec<(usize, f64, Vec<usize>)>,
    total: f64,
    best: Option<(f64, Vec<BinGroup>)>,
    budget: Budget,
}

impl PackSearch<'_> {
    fn run(&mut self, i: usize) -> Result<()> {
        self.budget.tick()?;
        if let Some((best, _)) = &self.best {
            if self.total >= *best {
                return Ok(());
            }
        }
        if i == self.items.len() {
            let snapshot = self.bins.iter().map(|(c, _, its)| (*c, its.clone())).collect();
            self.best = Some((self.total, snapshot));
            return Ok(());
        }
        let size = self.items[i].size;
        for b in 0..self.bins.len() {
            let (c, load, _) = &self.bins[b];
            if load + size <= self.classes[*c].capacity + CAPACITY_SLACK {
                self.bins[b].1 += size;
                self.bins[b].2.push(i);
                self.run(i + 1)?;
                self.bins[b].2.pop();
                self.bins[b].1 -= size;
            }
        }
        for (c, class) in self.classes.iter().enumerate() {
            if class.capacity <= 0.0
                || size > class.capacity + CAPACITY_SLACK
                || class.limit.is_some_and(|k| self.opened[c] >= k as usize)
            {
                continue;
            }
            self.opened[c] += 1;
            self.total += class.capacity;
            self.bins.push((c, size, vec![i]));
            self.run(i + 1)?;
            self.bins.pop();
            self.total -= class.capacity;
            self.opened[c] -= 1;
        }
        Ok(())
    }
}

/// Minimum total bin capacity over every assignment of items to bins.
pub fn exact_pack(items: &[Item], classes: &[BinClass], limits: OracleLimits) -> Result<Packing> {
    if items.len() > limits.max_items {
        return Err(Error::ResourceLimit(format!(
            "{} items, oracle limit is {}",
            items.len(),
            limits.max_items
        )));
    }
    check_items(items, classes)?;
    let mut order = items.to_vec();
    order.sort_by(|a, b| b.size.total_cmp(&a.size).then(a.vertex.cmp(&b.vertex)));
    let mut search = PackSearch {
        items: &order,
        classes,
        opened: vec![0; classes.len()],
        bins: Vec::new(),
        total: 0.0,
        best: None,
        budget: Budget::new(limits),
    };
    search.run(0)?;
    let Some((_, bins)) = search.best else {
        return Err(Error::Infeasible("bin limits leave some item unpacked".into()));
    };
    Ok(Packing::from_bins(
        bins.into_iter()
            .map(|(c, its)| Bin {
                class_id: classes[c].class_id,
                capacity: classes[c].capacity,
                items: its.into_iter().map(|i| order[i]).collect(),
            })
            .collect(),
    ))
}
