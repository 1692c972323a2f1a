//! Routing pipelines built from the packing and tree machinery:
//!
//! * [`solve_dvrp`]: distance-constrained tours for a single bound.
//! * [`solve_min_nt`]: capacity bins first, then DVRP tours inside each bin.
//! * [`solve_min_nht`]: balanced paths peeled off a minimum spanning tree.
//! * [`solve_bdcvrp`]: capacity bins, balanced peeling per bin, then closing
//!   each path through the depot.
//! * [`reduce_dcvrp_to_bdcvrp`]: pads a feasible solution with zero-demand
//!   chains so every tour reaches the same length.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::binpack::{bin_classes, customer_items, pack_variable_bins, packing_groups, CAPACITY_SLACK};
use crate::error::{Error, Result};
use crate::instance::{
    induced_subinstance, validate_instance, FleetSpec, MetricInstance, VehicleClass, VertexId, DEPOT,
};
use crate::oracle::verify_solution;
use crate::tree::{
    deepest_heavy_vertex, double_shortcut, minimum_spanning_tree, peel_bundle, split_tour_by_distance, tour_to_path,
    Path, Tour,
};
use crate::EPS;

#[derive(Debug, Clone, PartialEq)]
pub struct AssignedTour {
    pub class_id: usize,
    pub tour: Tour,
}

/// Algorithm name, numeric parameters and free-form diagnostics attached to
/// a solution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionMeta {
    pub algorithm: String,
    pub parameters: BTreeMap<String, f64>,
    pub notes: BTreeMap<String, Value>,
}

impl SolutionMeta {
    pub fn new(algorithm: impl Into<String>) -> Self {
        SolutionMeta {
            algorithm: algorithm.into(),
            ..Default::default()
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_owned(), value);
        self
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.notes.insert(key.to_owned(), value.into());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingSolution {
    pub tours: Vec<AssignedTour>,
    pub pi: usize,
    pub alpha: f64,
    pub meta: SolutionMeta,
}

impl RoutingSolution {
    /// Assembles a solution, ordering tours by their first customer so the
    /// result does not depend on the order subproblems were solved in.
    pub fn new(mut tours: Vec<AssignedTour>, meta: SolutionMeta) -> Self {
        tours.sort_by_key(|t| (t.tour.customers().first().copied().unwrap_or(usize::MAX), t.class_id));
        let lengths: Vec<f64> = tours.iter().map(|t| t.tour.length).collect();
        RoutingSolution {
            pi: tours.len(),
            alpha: solution_alpha(&lengths),
            tours,
            meta,
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.tours.iter().map(|t| t.tour.length).collect()
    }

    /// Tours per vehicle class.
    pub fn class_counts(&self, classes: usize) -> Vec<usize> {
        let mut counts = vec![0; classes];
        for t in &self.tours {
            if let Some(c) = counts.get_mut(t.class_id) {
                *c += 1;
            }
        }
        counts
    }
}

/// Min over max tour length. One tour or none counts as perfectly balanced,
/// as does a set of zero-length tours.
pub fn solution_alpha(lengths: &[f64]) -> f64 {
    if lengths.len() <= 1 {
        return 1.0;
    }
    let max = lengths.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return 1.0;
    }
    lengths.iter().copied().fold(f64::INFINITY, f64::min) / max
}

/// The balance ratio `min / max` of a nonempty list of positive lengths.
pub fn balance_ratio(lengths: &[f64]) -> Result<f64> {
    if lengths.is_empty() {
        return Err(Error::InvalidParameter {
            name: "lengths",
            reason: "empty list".into(),
        });
    }
    if let Some(&bad) = lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "lengths",
            reason: format!("lengths must be positive, got {bad}"),
        });
    }
    let max = lengths.iter().copied().fold(0.0, f64::max);
    let min = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(min / max)
}

fn check_alpha(name: &'static str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must lie strictly between 0 and 1, got {alpha}"),
        })
    }
}

fn check_fleet_limits(fleet: &FleetSpec, tours: &[AssignedTour]) -> Result<()> {
    let mut counts = vec![0usize; fleet.len()];
    for t in tours {
        counts[t.class_id] += 1;
    }
    for (class, (c, &used)) in fleet.classes().iter().zip(&counts).enumerate() {
        if let Some(k) = c.multiplicity.limit() {
            if used > k as usize {
                return Err(Error::FleetExhausted {
                    class,
                    needed: used,
                    available: k,
                });
            }
        }
    }
    Ok(())
}

/// Distance-constrained routing for a single bound `t`: minimum spanning
/// tree, doubled and shortcut into one tour, then split into r-tours of
/// length at most `t`.
pub fn solve_dvrp(inst: &MetricInstance, t: f64) -> Result<Vec<Tour>> {
    if inst.n() <= 1 {
        return Ok(Vec::new());
    }
    let radius = inst.radius();
    if 2.0 * radius > t {
        return Err(Error::Unreachable {
            vertex: inst.farthest_vertex(),
            distance: radius,
            bound: t,
        });
    }
    let all: Vec<VertexId> = (0..inst.n()).collect();
    let tree = minimum_spanning_tree(inst, &all)?;
    let tour = double_shortcut(inst, &tree.preorder(DEPOT), &[]);
    split_tour_by_distance(&tour, inst, t)
}

/// Capacity first, distance second: pack demands into vehicle-class bins,
/// then route each bin's customers with [`solve_dvrp`] under that class's
/// distance bound. The tour count is the sum over bins.
pub fn solve_min_nt(inst: &MetricInstance) -> Result<RoutingSolution> {
    validate_instance(inst, EPS).into_result()?;
    let fleet = inst.fleet();
    let packing = pack_variable_bins(&customer_items(inst), &bin_classes(fleet))?;
    let groups = packing_groups(&packing);

    let mut tours = Vec::new();
    for (class_id, members) in &groups {
        let class = fleet.classes()[*class_id];
        let mut subset = vec![DEPOT];
        subset.extend_from_slice(members);
        let sub = induced_subinstance(inst, &subset)?;
        for t in solve_dvrp(&sub.instance, class.distance_bound)? {
            let seq = t.seq.iter().map(|&v| sub.to_original(v)).collect();
            tours.push(AssignedTour {
                class_id: *class_id,
                tour: Tour::from_seq(inst, seq),
            });
        }
    }
    check_fleet_limits(fleet, &tours)?;

    let mut meta = SolutionMeta::new("min-nt");
    meta.note("bins", groups.len());
    meta.note("packing_total_size", packing.total_size);
    Ok(RoutingSolution::new(tours, meta))
}

/// Paths produced by the balanced peeling algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedPaths {
    pub paths: Vec<Path>,
    /// Traversal count applied to each path by padding (1 when unpadded).
    pub repeats: Vec<u32>,
    /// `repeats[i] * paths[i].length`.
    pub effective_lengths: Vec<f64>,
    pub k: usize,
    pub max_len: f64,
    pub min_len: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub peels: usize,
    pub max_edge: f64,
    /// Whether every tree edge was at most `lambda / 4`, in which case every
    /// path is guaranteed to be at most `lambda`.
    pub strict: bool,
    /// Guaranteed upper bound on each path length.
    pub length_bound: f64,
}

/// Balanced peeling over the minimum spanning tree.
///
/// While the tree weighs more than `lambda` (or its shortcut path would be
/// longer than `lambda`), cut a bundle from the deepest vertex whose subtree
/// weighs more than `lambda / 4`, double and shortcut it into a tour skipping
/// vertices already served, and open that tour into a path. The remaining
/// tree becomes the last path.
///
/// Anchors served by a bundle path are not visited again; the depot is never
/// treated as served. With `pad`, a path shorter than `lambda / 2` is
/// traversed `2^h` times for the smallest `h` reaching `lambda / 2`.
pub fn solve_min_nht(inst: &MetricInstance, lambda: f64, pad: bool) -> Result<BalancedPaths> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be positive, got {lambda}"),
        });
    }
    let n = inst.n();
    let all: Vec<VertexId> = (0..n).collect();
    let mut tree = minimum_spanning_tree(inst, &all)?;
    let max_edge = tree.max_edge();
    let strict = max_edge <= lambda / 4.0;
    let quarter = lambda / 4.0;

    let mut covered = vec![false; n];
    let mut paths: Vec<Path> = Vec::new();
    let mut peels = 0;

    let residual = loop {
        if tree.total_weight() <= lambda {
            let tour = double_shortcut(inst, &tree.preorder(DEPOT), &covered);
            let path = tour_to_path(inst, &tour);
            if path.length <= lambda {
                break path;
            }
        }
        let Some(v) = deepest_heavy_vertex(&tree, quarter) else {
            let tour = double_shortcut(inst, &tree.preorder(DEPOT), &covered);
            break tour_to_path(inst, &tour);
        };
        let bundle = peel_bundle(&mut tree, v, quarter)?;
        peels += 1;
        let tour = double_shortcut(inst, &bundle.preorder(), &covered);
        let path = tour_to_path(inst, &tour);
        if path.seq.iter().any(|&u| u != DEPOT) {
            for &u in &path.seq {
                if u != DEPOT {
                    covered[u] = true;
                }
            }
            paths.push(path);
        }
    };
    if residual.seq.iter().any(|&u| u != DEPOT) {
        paths.push(residual);
    }

    let mut repeats = Vec::with_capacity(paths.len());
    let mut effective_lengths = Vec::with_capacity(paths.len());
    let mut max_len: f64 = 0.0;
    let mut min_len = f64::INFINITY;
    for p in &paths {
        let mut reps: u32 = 1;
        if pad && p.length > 0.0 {
            while (reps as f64) * p.length < lambda / 2.0 && reps < (1 << 30) {
                reps *= 2;
            }
        }
        let eff = reps as f64 * p.length;
        max_len = max_len.max(eff);
        min_len = min_len.min(eff);
        repeats.push(reps);
        effective_lengths.push(eff);
    }
    let k = paths.len();
    let alpha = if k == 0 {
        min_len = 0.0;
        1.0
    } else if max_len > 0.0 {
        min_len / max_len
    } else {
        1.0
    };

    Ok(BalancedPaths {
        paths,
        repeats,
        effective_lengths,
        k,
        max_len,
        min_len,
        alpha,
        lambda,
        peels,
        max_edge,
        strict,
        length_bound: if strict { lambda } else { lambda + 2.0 * max_edge },
    })
}

fn close_paths(inst: &MetricInstance, paths: &[Path]) -> Vec<Tour> {
    paths.iter().map(|p| Tour::r_tour(inst, &p.seq)).collect()
}

/// Balanced capacity- and distance-constrained routing.
///
/// Demands are packed into vehicle-class bins; each bin is peeled into
/// balanced paths with `lambda` set to the class distance bound, and every
/// path is closed through the depot. If a closed tour overruns the bound the
/// bin is redone once with `lambda = T - 2Δ`; any tour still too long is then
/// split by distance. The achieved balance is reported, and
/// `meta.notes["balanced"]` says whether it meets `alpha_target`.
pub fn solve_bdcvrp(inst: &MetricInstance, alpha_target: f64) -> Result<RoutingSolution> {
    check_alpha("alpha_target", alpha_target)?;
    validate_instance(inst, EPS).into_result()?;
    let fleet = inst.fleet();
    let packing = pack_variable_bins(&customer_items(inst), &bin_classes(fleet))?;
    let groups = packing_groups(&packing);

    let mut tours = Vec::new();
    let mut retries = 0usize;
    let mut splits = 0usize;
    let mut padding = Vec::new();
    for (class_id, members) in &groups {
        let bound = fleet.classes()[*class_id].distance_bound;
        let mut subset = vec![DEPOT];
        subset.extend_from_slice(members);
        let sub = induced_subinstance(inst, &subset)?;
        let local = &sub.instance;

        let mut nht = solve_min_nht(local, bound, true)?;
        let mut closed = close_paths(local, &nht.paths);
        if closed.iter().any(|t| t.length > bound) {
            let reduced = bound - 2.0 * local.radius();
            if reduced > EPS {
                retries += 1;
                nht = solve_min_nht(local, reduced, true)?;
                closed = close_paths(local, &nht.paths);
            }
        }
        padding.push(json!(nht.repeats));

        for t in closed {
            let pieces = if t.length > bound {
                splits += 1;
                split_tour_by_distance(&t, local, bound)?
            } else {
                vec![t]
            };
            for piece in pieces {
                let seq = piece.seq.iter().map(|&v| sub.to_original(v)).collect();
                tours.push(AssignedTour {
                    class_id: *class_id,
                    tour: Tour::from_seq(inst, seq),
                });
            }
        }
    }
    check_fleet_limits(fleet, &tours)?;

    let mut meta = SolutionMeta::new("bdcvrp").param("alpha_target", alpha_target);
    meta.note("composed", true);
    meta.note("bins", groups.len());
    meta.note("retries", retries);
    meta.note("splits", splits);
    meta.note("padding_repeats", Value::Array(padding));
    let mut sol = RoutingSolution::new(tours, meta);
    let balanced = sol.alpha >= alpha_target;
    sol.meta.note("balanced", balanced);
    Ok(sol)
}

/// Zero-demand vertices appended after a tour's last customer.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddingChain {
    pub tour_index: usize,
    /// Last customer of the tour, where the chain starts.
    pub attach: VertexId,
    pub vertices: Vec<VertexId>,
    /// Lengths of the chain edges, starting with `attach -> vertices[0]`.
    pub edge_lengths: Vec<f64>,
    /// Length of the closing edge back to the depot.
    pub closing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetInstance {
    pub base: MetricInstance,
    pub instance: MetricInstance,
    pub chains: Vec<PaddingChain>,
    /// The input tours, each extended through its chain.
    pub padded_tours: Vec<AssignedTour>,
    pub alpha_target: f64,
    pub l_max: f64,
}

impl GadgetInstance {
    /// Every vertex id added by the padding.
    pub fn added_vertices(&self) -> std::ops::Range<VertexId> {
        self.base.n()..self.instance.n()
    }

    pub fn padded_solution(&self) -> RoutingSolution {
        let mut meta = SolutionMeta::new("padded").param("alpha_target", self.alpha_target);
        meta.note("l_max", self.l_max);
        RoutingSolution::new(self.padded_tours.clone(), meta)
    }
}

fn assign_classes(inst: &MetricInstance, tours: &[Tour]) -> Result<Vec<AssignedTour>> {
    tours
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let t = Tour::from_seq(inst, t.seq.clone());
            let class_id = inst
                .fleet()
                .classes()
                .iter()
                .position(|c| t.load <= c.capacity + CAPACITY_SLACK && t.length <= c.distance_bound + EPS)
                .ok_or_else(|| {
                    Error::InfeasibleTours(format!(
                        "tour {i} (length {}, load {}) fits no vehicle class",
                        t.length, t.load
                    ))
                })?;
            Ok(AssignedTour { class_id, tour: t })
        })
        .collect()
}

/// Chain edge lengths summing to `deficit`: `floor(deficit/radius)` edges of
/// length `radius` and a remainder edge (dropped below 1e-12), or two halves
/// when `deficit < 2 * radius`.
pub fn padding_edges(deficit: f64, radius: f64) -> Vec<f64> {
    if radius > 0.0 && deficit >= 2.0 * radius {
        let s = (deficit / radius).floor();
        let mut edges = vec![radius; s as usize];
        let rem = deficit - s * radius;
        if rem >= 1e-12 {
            edges.push(rem);
        }
        edges
    } else {
        vec![deficit / 2.0, deficit / 2.0]
    }
}

/// Pads every tour of a feasible solution up to the longest tour's length.
///
/// For a tour with deficit `L`, the edge from its last customer (distance `b`
/// to the depot) back to the depot is replaced by a chain of zero-demand
/// vertices whose edges add up to exactly `L`, followed by an edge of length
/// `b` to the depot. The chain uses `floor(L/Δ)` edges of length Δ (the depot
/// radius) plus one remainder edge; when `L < 2Δ` it uses two edges of
/// `L/2`, so that no chain edge can be shortcut through the depot. The
/// gadget metric is the shortest-path closure, with the original block kept
/// bit-for-bit. Distance bounds below the longest tour are raised to it.
pub fn reduce_dcvrp_to_bdcvrp(inst: &MetricInstance, tours: &[Tour], alpha: f64) -> Result<GadgetInstance> {
    check_alpha("alpha", alpha)?;
    let assigned = assign_classes(inst, tours)?;
    let probe = RoutingSolution::new(assigned.clone(), SolutionMeta::new("input"));
    let report = verify_solution(inst, &probe, None);
    if let Some(v) = report.violations.first() {
        return Err(Error::InfeasibleTours(v.to_string()));
    }

    let n = inst.n();
    let radius = inst.radius();
    let l_max = assigned.iter().map(|t| t.tour.length).fold(0.0, f64::max);
    let slack = EPS * l_max.max(1.0);

    let mut chains = Vec::new();
    let mut next = n;
    for (i, t) in assigned.iter().enumerate() {
        let deficit = l_max - t.tour.length;
        if deficit <= slack {
            continue;
        }
        let seq = &t.tour.seq;
        let attach = seq[seq.len() - 2];
        let closing = inst.dist(attach, DEPOT);
        let edge_lengths = padding_edges(deficit, radius);
        let vertices: Vec<VertexId> = (next..next + edge_lengths.len()).collect();
        next += edge_lengths.len();
        chains.push(PaddingChain {
            tour_index: i,
            attach,
            vertices,
            edge_lengths,
            closing,
        });
    }

    let total = next;
    let mut d = vec![vec![f64::INFINITY; total]; total];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
        if i < n {
            row[..n].copy_from_slice(inst.row(i));
        }
    }
    let link = |d: &mut Vec<Vec<f64>>, u: usize, v: usize, w: f64| {
        if w < d[u][v] {
            d[u][v] = w;
            d[v][u] = w;
        }
    };
    for c in &chains {
        let mut prev = c.attach;
        for (&v, &w) in c.vertices.iter().zip(&c.edge_lengths) {
            link(&mut d, prev, v, w);
            prev = v;
        }
        link(&mut d, prev, DEPOT, c.closing);
    }
    for k in 0..total {
        let dk = d[k].clone();
        for row in d.iter_mut() {
            let dik = row[k];
            if dik.is_infinite() {
                continue;
            }
            for (dij, &dkj) in row.iter_mut().zip(&dk) {
                let via = dik + dkj;
                if via < *dij {
                    *dij = via;
                }
            }
        }
    }
    for (i, row) in d.iter_mut().enumerate().take(n) {
        row[..n].copy_from_slice(inst.row(i));
    }

    let mut demand = inst.demands().to_vec();
    demand.resize(total, 0.0);
    let classes: Vec<VehicleClass> = inst
        .fleet()
        .classes()
        .iter()
        .map(|c| VehicleClass {
            distance_bound: c.distance_bound.max(l_max),
            ..*c
        })
        .collect();
    let gadget = MetricInstance::from_matrix(format!("{}-gadget", inst.name()), d, demand, FleetSpec::new(classes)?)?;

    let mut padded_tours = assigned;
    for c in &chains {
        let t = &padded_tours[c.tour_index];
        let mut seq = t.tour.seq.clone();
        seq.pop();
        seq.extend_from_slice(&c.vertices);
        seq.push(DEPOT);
        padded_tours[c.tour_index] = AssignedTour {
            class_id: t.class_id,
            tour: Tour::from_seq(&gadget, seq),
        };
    }

    Ok(GadgetInstance {
        base: inst.clone(),
        instance: gadget,
        chains,
        padded_tours,
        alpha_target: alpha,
        l_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::euclidean_instance;

    fn unit_square(capacity: f64, bound: f64) -> MetricInstance {
        euclidean_instance(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
            &[0.0, 1.0, 1.0, 1.0],
            FleetSpec::single(capacity, bound).unwrap(),
        )
        .unwrap()
    }

    fn line(k: usize, spacing: f64) -> MetricInstance {
        let pts: Vec<_> = (0..=k).map(|i| (i as f64 * spacing, 0.0)).collect();
        let mut demands = vec![1.0; k + 1];
        demands[0] = 0.0;
        euclidean_instance(&pts, &demands, FleetSpec::single(100.0, 100.0).unwrap()).unwrap()
    }

    fn depot_only() -> MetricInstance {
        euclidean_instance(&[(0.0, 0.0)], &[0.0], FleetSpec::single(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn dvrp_examples() {
        let sq = unit_square(3.0, 6.0);
        let one = solve_dvrp(&sq, 6.0).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].length, 4.0);

        let three = solve_dvrp(&sq, 3.0).unwrap();
        let lengths: Vec<f64> = three.iter().map(|t| t.length).collect();
        assert_eq!(lengths[0], 2.0);
        assert!((lengths[1] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(lengths[2], 2.0);

        assert!(solve_dvrp(&depot_only(), 1.0).unwrap().is_empty());
        assert!(matches!(
            solve_dvrp(&sq, 2.0),
            Err(Error::Unreachable { vertex: 3, .. })
        ));
    }

    #[test]
    fn min_nt_examples() {
        let sol = solve_min_nt(&unit_square(3.0, 6.0)).unwrap();
        assert_eq!(sol.pi, 1);
        assert_eq!(sol.tours[0].tour.seq, vec![0, 1, 3, 2, 0]);
        assert_eq!(sol.tours[0].tour.length, 4.0);
        assert_eq!(sol.alpha, 1.0);

        let sol = solve_min_nt(&unit_square(1.0, 6.0)).unwrap();
        assert_eq!(sol.pi, 3);
        let seqs: Vec<_> = sol.tours.iter().map(|t| t.tour.seq.clone()).collect();
        assert_eq!(seqs, vec![vec![0, 1, 0], vec![0, 2, 0], vec![0, 3, 0]]);

        assert_eq!(solve_min_nt(&depot_only()).unwrap().pi, 0);
    }

    #[test]
    fn min_nt_rejects_invalid_instances() {
        assert!(matches!(
            solve_min_nt(&unit_square(3.0, 2.0)),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn min_nt_respects_fleet_limits() {
        let inst = unit_square(1.0, 6.0).with_fleet(
            FleetSpec::new(vec![
                VehicleClass::new(1.0, 6.0).with_multiplicity(crate::instance::Multiplicity::Limited(2))
            ])
            .unwrap(),
        );
        assert!(matches!(solve_min_nt(&inst), Err(Error::InfeasibleItem { .. })));
    }

    #[test]
    fn min_nht_line() {
        let inst = line(6, 0.5);
        let bp = solve_min_nht(&inst, 2.0, false).unwrap();
        assert_eq!(bp.k, 2);
        assert_eq!(bp.paths[0].seq, vec![4, 5, 6]);
        assert_eq!(bp.paths[0].length, 1.0);
        assert_eq!(bp.paths[1].seq, vec![0, 1, 2, 3]);
        assert_eq!(bp.paths[1].length, 1.5);
        assert_eq!(bp.max_len, 1.5);
        assert_eq!(bp.min_len, 1.0);
        assert_eq!(bp.alpha, 1.0 / 1.5);
        assert_eq!(bp.peels, 1);
        assert!(bp.strict);
    }

    #[test]
    fn min_nht_single_path() {
        let sq = unit_square(3.0, 8.0);
        let bp = solve_min_nht(&sq, 8.0, false).unwrap();
        assert_eq!(bp.k, 1);
        assert_eq!(bp.paths[0].seq, vec![0, 1, 3, 2]);
        assert_eq!(bp.paths[0].length, 3.0);
        assert_eq!(bp.alpha, 1.0);
        assert!(solve_min_nht(&sq, 0.0, false).is_err());
    }

    #[test]
    fn min_nht_padding_doubles_short_paths() {
        let inst = line(6, 0.5);
        let bp = solve_min_nht(&inst, 4.0, true).unwrap();
        assert_eq!(bp.k, 1);
        // one path of length 3 >= lambda/2, no padding needed
        assert_eq!(bp.repeats, vec![1]);

        let short = line(1, 0.5);
        let bp = solve_min_nht(&short, 4.0, true).unwrap();
        assert_eq!(bp.repeats, vec![4]);
        assert_eq!(bp.effective_lengths, vec![2.0]);
    }

    #[test]
    fn bdcvrp_examples() {
        let sol = solve_bdcvrp(&unit_square(3.0, 8.0), 0.5).unwrap();
        assert_eq!(sol.pi, 1);
        assert_eq!(sol.alpha, 1.0);
        assert_eq!(sol.meta.notes["balanced"], json!(true));

        let two = euclidean_instance(
            &[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)],
            &[0.0, 1.0, 1.0],
            FleetSpec::single(1.0, 4.0).unwrap(),
        )
        .unwrap();
        let sol = solve_bdcvrp(&two, 0.9).unwrap();
        assert_eq!(sol.pi, 2);
        assert_eq!(sol.lengths(), vec![2.0, 2.0]);
        assert_eq!(sol.alpha, 1.0);
        assert_eq!(sol.meta.notes["balanced"], json!(true));

        let far = euclidean_instance(
            &[(0.0, 0.0), (1.0, 0.0)],
            &[0.0, 1.0],
            FleetSpec::single(1.0, 1.5).unwrap(),
        )
        .unwrap();
        assert!(matches!(solve_bdcvrp(&far, 0.5), Err(Error::InvalidInstance(_))));
        assert!(solve_bdcvrp(&two, 1.0).is_err());
        assert!(solve_bdcvrp(&two, 0.0).is_err());
    }

    #[test]
    fn balance_ratio_examples() {
        assert_eq!(balance_ratio(&[4.0, 4.0]).unwrap(), 1.0);
        assert_eq!(balance_ratio(&[2.0, 4.0]).unwrap(), 0.5);
        assert_eq!(balance_ratio(&[1.0, 1.5]).unwrap(), 1.0 / 1.5);
        assert!(balance_ratio(&[]).is_err());
        assert!(balance_ratio(&[1.0, 0.0]).is_err());
    }

    /// Depot at the origin, customers on the axes at distance 1 (Δ = 1).
    fn cross() -> MetricInstance {
        euclidean_instance(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (0.5, 0.0)],
            &[0.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            FleetSpec::single(10.0, 10.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn padding_edge_lengths() {
        assert_eq!(padding_edges(2.0, 1.0), vec![1.0, 1.0]);
        let e = padding_edges(2.7, 1.0);
        assert_eq!(e.len(), 3);
        assert_eq!(&e[..2], &[1.0, 1.0]);
        assert!((e[2] - 0.7).abs() < 1e-12);
        // 3 - 0.5 + 2 + 0.7 + 0.5
        assert!((3.0 - 0.5 + e.iter().sum::<f64>() + 0.5 - 5.7).abs() < 1e-12);
        assert_eq!(padding_edges(0.5, 1.0), vec![0.25, 0.25]);
    }

    #[test]
    fn gadget_pads_to_longest() {
        let inst = cross();
        let tours = vec![
            Tour::r_tour(&inst, &[2, 4]),
            Tour::r_tour(&inst, &[1]),
            Tour::r_tour(&inst, &[3, 5]),
        ];
        let g = reduce_dcvrp_to_bdcvrp(&inst, &tours, 0.9).unwrap();
        assert_eq!(g.l_max, 4.0);
        assert_eq!(g.chains.len(), 2);
        let c = &g.chains[0];
        assert_eq!((c.tour_index, c.attach, c.closing), (1, 1, 1.0));
        assert_eq!(c.edge_lengths, vec![1.0, 1.0]);
        let c = &g.chains[1];
        assert_eq!((c.tour_index, c.attach, c.closing), (2, 5, 0.5));
        assert_eq!(c.edge_lengths, vec![0.5, 0.5]);
        for t in &g.padded_tours {
            assert!((t.tour.length - 4.0).abs() < 1e-9, "{:?}", t.tour);
        }
        for v in g.added_vertices() {
            assert_eq!(g.instance.demand(v), 0.0);
        }
        assert!(validate_instance(&g.instance, 1e-9).ok());
        let back = induced_subinstance(&g.instance, &(0..inst.n()).collect::<Vec<_>>()).unwrap();
        assert_eq!(back.instance.rows(), inst.rows());
    }

    #[test]
    fn gadget_small_deficit_uses_halves() {
        let rows = vec![
            vec![0.0, 1.0, 1.0, 0.5],
            vec![1.0, 0.0, 1.7, 1.0],
            vec![1.0, 1.7, 0.0, 1.5],
            vec![0.5, 1.0, 1.5, 0.0],
        ];
        let inst = MetricInstance::from_matrix(
            "frac",
            rows,
            vec![0.0, 1.0, 1.0, 1.0],
            FleetSpec::single(10.0, 10.0).unwrap(),
        )
        .unwrap();
        assert!(validate_instance(&inst, 1e-9).ok());
        let long = Tour::r_tour(&inst, &[3, 1]); // 0.5 + 1 + 1 = 2.5
        let short = Tour::r_tour(&inst, &[2]); // 2
        let g = reduce_dcvrp_to_bdcvrp(&inst, &[long, short], 0.5).unwrap();
        assert_eq!(g.l_max, 2.5);
        let c = &g.chains[0];
        assert_eq!(c.tour_index, 1);
        assert_eq!(c.closing, 1.0);
        // deficit 0.5 < 2Δ, so two half edges
        assert_eq!(c.edge_lengths, vec![0.25, 0.25]);
        for t in &g.padded_tours {
            assert!((t.tour.length - 2.5).abs() < 1e-9);
        }
    }

    #[test]
    fn gadget_equal_lengths_unchanged() {
        let inst = unit_square(1.0, 6.0);
        let tours = vec![Tour::r_tour(&inst, &[1]), Tour::r_tour(&inst, &[2])];
        let covered_all = reduce_dcvrp_to_bdcvrp(&inst, &tours, 0.5);
        assert!(matches!(covered_all, Err(Error::InfeasibleTours(_))));

        let inst = euclidean_instance(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
            &[0.0, 1.0, 1.0],
            FleetSpec::single(1.0, 6.0).unwrap(),
        )
        .unwrap();
        let tours = vec![Tour::r_tour(&inst, &[1]), Tour::r_tour(&inst, &[2])];
        let g = reduce_dcvrp_to_bdcvrp(&inst, &tours, 0.5).unwrap();
        assert!(g.chains.is_empty());
        assert_eq!(g.instance.rows(), inst.rows());
        assert_eq!(g.instance.fleet(), inst.fleet());
    }
}
