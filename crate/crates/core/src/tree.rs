//! Spanning-tree machinery: minimum spanning trees rooted at the depot,
//! subtree-weight bookkeeping, bundle peeling, and the double-and-shortcut
//! construction of tours and paths.

use crate::error::{Error, Result};
use crate::instance::{MetricInstance, VertexId, DEPOT};

/// A closed walk. `seq` starts and ends at the same vertex unless it is
/// degenerate (a single vertex, or empty).
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub seq: Vec<VertexId>,
    pub length: f64,
    pub load: f64,
}

impl Tour {
    /// Wraps a vertex sequence, computing its length and load from `inst`.
    /// The load counts each distinct vertex once.
    pub fn from_seq(inst: &MetricInstance, seq: Vec<VertexId>) -> Self {
        let length = inst.walk_length(&seq);
        let mut seen = vec![false; inst.n()];
        let mut load = 0.0;
        for &v in &seq {
            if !seen[v] {
                seen[v] = true;
                load += inst.demand(v);
            }
        }
        Tour { seq, length, load }
    }

    /// The r-tour `depot, customers..., depot`.
    pub fn r_tour(inst: &MetricInstance, customers: &[VertexId]) -> Self {
        let mut seq = Vec::with_capacity(customers.len() + 2);
        seq.push(DEPOT);
        seq.extend(customers.iter().copied().filter(|&v| v != DEPOT));
        seq.push(DEPOT);
        Self::from_seq(inst, seq)
    }

    /// Vertices other than the depot, in visiting order, without repeats.
    pub fn customers(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = Vec::with_capacity(self.seq.len());
        for &v in &self.seq {
            if v != DEPOT && !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Relabels vertices through `map` (e.g. sub-instance to parent ids).
    pub fn relabel(mut self, map: impl Fn(VertexId) -> VertexId) -> Self {
        for v in &mut self.seq {
            *v = map(*v);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub seq: Vec<VertexId>,
    pub length: f64,
}

/// Spanning tree over the live vertices, rooted at the depot.
///
/// All per-vertex arrays are indexed by instance vertex id. `inner_weight[v]`
/// is the weight of the edges strictly below `v` (the edge to its parent is
/// not included), so `inner_weight[root]` is the total tree weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    parent: Vec<Option<VertexId>>,
    edge_w: Vec<f64>,
    inner_weight: Vec<f64>,
    depth: Vec<usize>,
    children: Vec<Vec<VertexId>>,
    live: Vec<bool>,
}

impl RootedTree {
    pub fn root(&self) -> VertexId {
        DEPOT
    }

    pub fn total_weight(&self) -> f64 {
        self.inner_weight[DEPOT]
    }

    pub fn is_live(&self, v: VertexId) -> bool {
        self.live.get(v).copied().unwrap_or(false)
    }

    pub fn live_vertices(&self) -> Vec<VertexId> {
        (0..self.live.len()).filter(|&v| self.live[v]).collect()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn edge_weight(&self, v: VertexId) -> f64 {
        self.edge_w[v]
    }

    pub fn inner_weight(&self, v: VertexId) -> f64 {
        self.inner_weight[v]
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[v]
    }

    /// Live tree edges as `(parent, child, weight)`, ordered by child id.
    pub fn edges(&self) -> Vec<(VertexId, VertexId, f64)> {
        self.live_vertices()
            .into_iter()
            .filter_map(|v| self.parent[v].map(|p| (p, v, self.edge_w[v])))
            .collect()
    }

    pub fn max_edge(&self) -> f64 {
        self.edges().iter().map(|e| e.2).fold(0.0, f64::max)
    }

    /// Depth-first preorder from `v`, children in ascending id order.
    pub fn preorder(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().rev());
        }
        out
    }

    /// Subtree weights computed from scratch, for checking the incremental
    /// bookkeeping.
    pub fn recompute_inner_weights(&self) -> Vec<f64> {
        let mut inner = vec![0.0; self.live.len()];
        if !self.is_live(DEPOT) {
            return inner;
        }
        for &v in self.preorder(DEPOT).iter().rev() {
            inner[v] = self.children[v].iter().map(|&c| inner[c] + self.edge_w[c]).sum();
        }
        inner
    }
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

/// Kruskal's algorithm over the sub-metric induced by `live`, then rooted at
/// the depot.
///
/// Equal-weight edges are taken in lexicographic `(min endpoint, max
/// endpoint)` order, which makes the tree deterministic.
pub fn minimum_spanning_tree(inst: &MetricInstance, live: &[VertexId]) -> Result<RootedTree> {
    if live.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let n = inst.n();
    let mut is_live = vec![false; n];
    for &v in live {
        if v >= n {
            return Err(Error::VertexOutOfRange(v));
        }
        is_live[v] = true;
    }
    if !is_live[DEPOT] {
        return Err(Error::MissingDepot);
    }
    let verts: Vec<VertexId> = (0..n).filter(|&v| is_live[v]).collect();

    let mut candidates = Vec::with_capacity(verts.len() * verts.len() / 2);
    for (a, &u) in verts.iter().enumerate() {
        for &v in &verts[a + 1..] {
            candidates.push((inst.dist(u, v), u, v));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut uf: Vec<usize> = (0..n).collect();
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut taken = 0;
    for (_, u, v) in candidates {
        if taken + 1 == verts.len() {
            break;
        }
        let (ru, rv) = (find(&mut uf, u), find(&mut uf, v));
        if ru != rv {
            uf[ru] = rv;
            adj[u].push(v);
            adj[v].push(u);
            taken += 1;
        }
    }

    let mut tree = RootedTree {
        parent: vec![None; n],
        edge_w: vec![0.0; n],
        inner_weight: vec![0.0; n],
        depth: vec![0; n],
        children: vec![Vec::new(); n],
        live: is_live,
    };
    let mut stack = vec![DEPOT];
    let mut seen = vec![false; n];
    seen[DEPOT] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                tree.parent[v] = Some(u);
                tree.edge_w[v] = inst.dist(u, v);
                tree.depth[v] = tree.depth[u] + 1;
                tree.children[u].push(v);
                stack.push(v);
            }
        }
    }
    for ch in &mut tree.children {
        ch.sort_unstable();
    }
    tree.inner_weight = tree.recompute_inner_weights();
    Ok(tree)
}

/// The deepest live vertex whose subtree weighs more than `threshold`;
/// smallest id among equally deep candidates.
pub fn deepest_heavy_vertex(tree: &RootedTree, threshold: f64) -> Option<VertexId> {
    tree.live_vertices()
        .into_iter()
        .filter(|&v| tree.inner_weight[v] > threshold)
        .max_by(|&a, &b| tree.depth[a].cmp(&tree.depth[b]).then(b.cmp(&a)))
}

/// A group of child subtrees cut away from `anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeeledBundle {
    pub anchor: VertexId,
    /// Removed vertices in depth-first preorder.
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId, f64)>,
    pub weight: f64,
}

impl PeeledBundle {
    /// Anchor followed by the removed vertices, i.e. a preorder walk of the
    /// bundle as a tree rooted at the anchor.
    pub fn preorder(&self) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.vertices.len() + 1);
        out.push(self.anchor);
        out.extend_from_slice(&self.vertices);
        out
    }
}

/// Cuts a bundle of child subtrees ("chunks": a child's subtree plus the edge
/// up to `v`) away from `v`.
///
/// If some chunk alone weighs more than `stop_threshold`, the first such
/// chunk (by child id) is the bundle. Otherwise chunks are accumulated in
/// ascending child id until their weight exceeds `stop_threshold`. When `v`
/// was chosen by [`deepest_heavy_vertex`] with the same threshold, every
/// chunk weighs at most `stop_threshold + max_edge`, so the bundle weighs at
/// most `2 * stop_threshold` whenever `max_edge <= stop_threshold`.
pub fn peel_bundle(tree: &mut RootedTree, v: VertexId, stop_threshold: f64) -> Result<PeeledBundle> {
    if !tree.is_live(v) {
        return Err(Error::VertexOutOfRange(v));
    }
    let kids = tree.children[v].clone();
    if kids.is_empty() {
        return Err(Error::InvalidParameter {
            name: "v",
            reason: format!("vertex {v} has no children to peel"),
        });
    }
    let chunk = |c: VertexId| tree.inner_weight[c] + tree.edge_w[c];

    let selected: Vec<VertexId> = match kids.iter().copied().find(|&c| chunk(c) > stop_threshold) {
        Some(c) => vec![c],
        None => {
            let mut acc = 0.0;
            let mut out = Vec::new();
            for &c in &kids {
                out.push(c);
                acc += chunk(c);
                if acc > stop_threshold {
                    break;
                }
            }
            out
        }
    };

    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for &c in &selected {
        for u in tree.preorder(c) {
            let p = tree.parent[u].expect("non-root vertex has a parent");
            edges.push((p, u, tree.edge_w[u]));
            vertices.push(u);
        }
    }
    let weight: f64 = selected.iter().map(|&c| chunk(c)).sum();

    tree.children[v].retain(|c| !selected.contains(c));
    for &u in &vertices {
        tree.live[u] = false;
        tree.children[u].clear();
        tree.inner_weight[u] = 0.0;
    }
    let mut cur = Some(v);
    while let Some(u) = cur {
        tree.inner_weight[u] -= weight;
        cur = tree.parent[u];
    }
    if tree.children[v].is_empty() {
        tree.inner_weight[v] = 0.0;
    }

    Ok(PeeledBundle {
        anchor: v,
        vertices,
        edges,
        weight,
    })
}

/// Shortcuts the doubled-tree Euler walk given by `order` (a depth-first
/// preorder) into a closed tour, skipping repeats and any vertex flagged in
/// `covered`. By the triangle inequality the result is no longer than twice
/// the tree weight.
pub fn double_shortcut(inst: &MetricInstance, order: &[VertexId], covered: &[bool]) -> Tour {
    let mut seen = vec![false; inst.n()];
    let mut seq = Vec::with_capacity(order.len() + 1);
    for &v in order {
        if !seen[v] && !covered.get(v).copied().unwrap_or(false) {
            seen[v] = true;
            seq.push(v);
        }
    }
    if seq.len() >= 2 {
        seq.push(seq[0]);
    }
    Tour::from_seq(inst, seq)
}

/// Opens a tour into a path by deleting its heaviest edge (the last one on
/// ties).
pub fn tour_to_path(inst: &MetricInstance, tour: &Tour) -> Path {
    let seq = &tour.seq;
    if seq.len() < 3 {
        let seq: Vec<VertexId> = seq.iter().take(1).copied().collect();
        return Path { seq, length: 0.0 };
    }
    let mut cut = 0;
    let mut heaviest = f64::NEG_INFINITY;
    for j in 0..seq.len() - 1 {
        let w = inst.dist(seq[j], seq[j + 1]);
        if w >= heaviest {
            heaviest = w;
            cut = j;
        }
    }
    // rotate so the path runs from seq[cut + 1] around to seq[cut]
    let body = &seq[..seq.len() - 1];
    let mut path_seq = Vec::with_capacity(body.len());
    path_seq.extend_from_slice(&body[(cut + 1) % body.len()..]);
    path_seq.extend_from_slice(&body[..(cut + 1) % body.len()]);
    let length = inst.walk_length(&path_seq);
    Path { seq: path_seq, length }
}

/// Splits a tour into r-tours of length at most `budget`.
///
/// Walks the tour's customers in order and cuts a segment just before its
/// internal length would exceed `budget - 2Δ`, Δ being the largest depot
/// distance among the tour's customers. Each segment is closed through the
/// depot.
pub fn split_tour_by_distance(tour: &Tour, inst: &MetricInstance, budget: f64) -> Result<Vec<Tour>> {
    let customers = tour.customers();
    let Some(&far) = customers
        .iter()
        .max_by(|&&a, &&b| inst.dist(DEPOT, a).total_cmp(&inst.dist(DEPOT, b)).then(b.cmp(&a)))
    else {
        return Ok(Vec::new());
    };
    let radius = inst.dist(DEPOT, far);
    if 2.0 * radius > budget {
        return Err(Error::Unreachable {
            vertex: far,
            distance: radius,
            bound: budget,
        });
    }
    let allowance = budget - 2.0 * radius;

    let mut out = Vec::new();
    let mut segment = vec![customers[0]];
    let mut internal = 0.0;
    for &c in &customers[1..] {
        let step = inst.dist(*segment.last().unwrap(), c);
        if internal + step > allowance {
            out.push(Tour::r_tour(inst, &segment));
            segment = vec![c];
            internal = 0.0;
        } else {
            segment.push(c);
            internal += step;
        }
    }
    out.push(Tour::r_tour(inst, &segment));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{euclidean_instance, FleetSpec};

    fn unit_square() -> MetricInstance {
        euclidean_instance(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
            &[0.0, 1.0, 1.0, 1.0],
            FleetSpec::single(3.0, 6.0).unwrap(),
        )
        .unwrap()
    }

    pub(crate) fn line(k: usize, spacing: f64) -> MetricInstance {
        let pts: Vec<_> = (0..=k).map(|i| (i as f64 * spacing, 0.0)).collect();
        let mut demands = vec![1.0; k + 1];
        demands[0] = 0.0;
        euclidean_instance(&pts, &demands, FleetSpec::single(100.0, 100.0).unwrap()).unwrap()
    }

    fn all(inst: &MetricInstance) -> Vec<VertexId> {
        (0..inst.n()).collect()
    }

    #[test]
    fn unit_square_mst() {
        let inst = unit_square();
        let tree = minimum_spanning_tree(&inst, &all(&inst)).unwrap();
        assert_eq!(tree.total_weight(), 3.0);
        assert_eq!(tree.edges(), vec![(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0)]);
    }

    #[test]
    fn two_vertex_mst() {
        let inst = euclidean_instance(
            &[(0.0, 0.0), (5.0, 0.0)],
            &[0.0, 1.0],
            FleetSpec::single(1.0, 10.0).unwrap(),
        )
        .unwrap();
        let tree = minimum_spanning_tree(&inst, &[0, 1]).unwrap();
        assert_eq!(tree.total_weight(), 5.0);
        assert!(minimum_spanning_tree(&inst, &[]).is_err());
    }

    #[test]
    fn line_inner_weights() {
        let inst = line(6, 0.5);
        let tree = minimum_spanning_tree(&inst, &all(&inst)).unwrap();
        assert_eq!(tree.total_weight(), 3.0);
        let inner: Vec<f64> = (0..7).map(|v| tree.inner_weight(v)).collect();
        assert_eq!(inner, vec![3.0, 2.5, 2.0, 1.5, 1.0, 0.5, 0.0]);
        assert_eq!(tree.depth(6), 6);
    }

    #[test]
    fn deepest_heavy() {
        let inst = line(6, 0.5);
        let tree = minimum_spanning_tree(&inst, &all(&inst)).unwrap();
        assert_eq!(deepest_heavy_vertex(&tree, 0.5), Some(4));
        assert_eq!(deepest_heavy_vertex(&tree, 3.0), None);

        let star = euclidean_instance(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)],
            &[0.0, 1.0, 1.0, 1.0],
            FleetSpec::single(10.0, 10.0).unwrap(),
        )
        .unwrap();
        let tree = minimum_spanning_tree(&star, &all(&star)).unwrap();
        assert_eq!(deepest_heavy_vertex(&tree, 0.5), Some(0));
    }

    #[test]
    fn peel_line() {
        let inst = line(6, 0.5);
        let mut tree = minimum_spanning_tree(&inst, &all(&inst)).unwrap();
        let b = peel_bundle(&mut tree, 4, 0.5).unwrap();
        assert_eq!(b.anchor, 4);
        assert_eq!(b.vertices, vec![5, 6]);
        assert_eq!(b.weight, 1.0);
        assert_eq!(tree.total_weight(), 2.0);
        assert_eq!(
            tree.recompute_inner_weights(),
            (0..7).map(|v| tree.inner_weight(v)).collect::<Vec<_>>()
        );
        assert!(!tree.is_live(5));
        assert!(peel_bundle(&mut tree, 4, 0.5).is_err());

        let tour = double_shortcut(&inst, &b.preorder(), &[]);
        assert_eq!(tour.seq, vec![4, 5, 6, 4]);
        assert_eq!(tour.length, 2.0);
        let path = tour_to_path(&inst, &tour);
        assert_eq!(path.seq, vec![4, 5, 6]);
        assert_eq!(path.length, 1.0);
    }

    #[test]
    fn peel_star_accumulates() {
        let star = euclidean_instance(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)],
            &[0.0, 1.0, 1.0, 1.0],
            FleetSpec::single(10.0, 10.0).unwrap(),
        )
        .unwrap();
        let mut tree = minimum_spanning_tree(&star, &all(&star)).unwrap();
        let b = peel_bundle(&mut tree, 0, 1.5).unwrap();
        assert_eq!(b.vertices, vec![1, 2]);
        assert_eq!(b.weight, 2.0);
        assert_eq!(tree.total_weight(), 1.0);
        assert_eq!(tree.children(0), &[3]);
    }

    #[test]
    fn peel_single_heavy_chunk() {
        let inst = line(6, 0.5);
        let mut tree = minimum_spanning_tree(&inst, &all(&inst)).unwrap();
        let b = peel_bundle(&mut tree, 0, 0.1).unwrap();
        assert_eq!(b.vertices, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(b.weight, 3.0);
        assert_eq!(tree.total_weight(), 0.0);
    }

    #[test]
    fn unit_square_double_shortcut() {
        let inst = unit_square();
        let tree = minimum_spanning_tree(&inst, &all(&inst)).unwrap();
        let tour = double_shortcut(&inst, &tree.preorder(DEPOT), &[]);
        assert_eq!(tour.seq, vec![0, 1, 3, 2, 0]);
        assert_eq!(tour.length, 4.0);
        assert_eq!(tour.load, 3.0);
        let path = tour_to_path(&inst, &tour);
        assert_eq!(path.seq, vec![0, 1, 3, 2]);
        assert_eq!(path.length, 3.0);

        let lone = double_shortcut(&inst, &[0], &[]);
        assert_eq!(lone.seq, vec![0]);
        assert_eq!(lone.length, 0.0);
        assert_eq!(tour_to_path(&inst, &lone).seq, vec![0]);
    }

    #[test]
    fn covered_vertices_are_skipped() {
        let inst = line(6, 0.5);
        let mut covered = vec![false; 7];
        covered[4] = true;
        let tour = double_shortcut(&inst, &[0, 1, 2, 3, 4], &covered);
        assert_eq!(tour.seq, vec![0, 1, 2, 3, 0]);
        let path = tour_to_path(&inst, &tour);
        assert_eq!(path.seq, vec![0, 1, 2, 3]);
        assert_eq!(path.length, 1.5);
    }

    #[test]
    fn path_from_small_tours() {
        let inst = line(2, 1.0);
        let t = Tour::r_tour(&inst, &[2]);
        let p = tour_to_path(&inst, &t);
        assert_eq!(p.seq, vec![0, 2]);
        assert_eq!(p.length, 2.0);

        let tri = euclidean_instance(
            &[(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)],
            &[0.0, 1.0, 1.0],
            FleetSpec::single(10.0, 10.0).unwrap(),
        )
        .unwrap();
        let t = Tour::r_tour(&tri, &[1, 2]);
        let p = tour_to_path(&tri, &t);
        assert!((p.length - 2.0 / 3.0 * t.length).abs() < 1e-12);
    }

    #[test]
    fn split_unit_square() {
        let inst = unit_square();
        let tour = Tour::from_seq(&inst, vec![0, 1, 3, 2, 0]);
        let one = split_tour_by_distance(&tour, &inst, 6.0).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].length, 4.0);

        let three = split_tour_by_distance(&tour, &inst, 3.0).unwrap();
        let seqs: Vec<_> = three.iter().map(|t| t.seq.clone()).collect();
        assert_eq!(seqs, vec![vec![0, 1, 0], vec![0, 3, 0], vec![0, 2, 0]]);
        assert_eq!(three[0].length, 2.0);
        assert!((three[1].length - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(three[2].length, 2.0);

        let err = split_tour_by_distance(&tour, &inst, 2.0).unwrap_err();
        assert!(matches!(err, Error::Unreachable { vertex: 3, .. }));

        let empty = Tour::from_seq(&inst, vec![0]);
        assert!(split_tour_by_distance(&empty, &inst, 1.0).unwrap().is_empty());
    }
}
