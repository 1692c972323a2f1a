//! Problem model: a finite metric with a depot at index 0, per-vertex
//! demands and a heterogeneous fleet of vehicle classes.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::EPS;

/// Index of a vertex in a [`MetricInstance`]. The depot is always `DEPOT`.
pub type VertexId = usize;

pub const DEPOT: VertexId = 0;

/// A point in the plane, used by Euclidean instances.
pub type Point = (f64, f64);

/// How many vehicles of a class are stationed at the depot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Multiplicity {
    #[default]
    Unbounded,
    Limited(u32),
}

impl Multiplicity {
    pub fn limit(self) -> Option<u32> {
        match self {
            Multiplicity::Unbounded => None,
            Multiplicity::Limited(k) => Some(k),
        }
    }

    /// Whether `used` vehicles can be drawn from this class.
    pub fn allows(self, used: usize) -> bool {
        match self {
            Multiplicity::Unbounded => true,
            Multiplicity::Limited(k) => used <= k as usize,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Unbounded => f.write_str("inf"),
            Multiplicity::Limited(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleClass {
    pub capacity: f64,
    pub distance_bound: f64,
    pub multiplicity: Multiplicity,
}

impl VehicleClass {
    pub fn new(capacity: f64, distance_bound: f64) -> Self {
        VehicleClass {
            capacity,
            distance_bound,
            multiplicity: Multiplicity::Unbounded,
        }
    }

    pub fn with_multiplicity(mut self, multiplicity: Multiplicity) -> Self {
        self.multiplicity = multiplicity;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetSpec {
    classes: Vec<VehicleClass>,
}

impl FleetSpec {
    pub fn new(classes: Vec<VehicleClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::EmptyFleet);
        }
        for (class, c) in classes.iter().enumerate() {
            if !(c.distance_bound.is_finite() && c.distance_bound > 0.0) {
                return Err(Error::InvalidClass {
                    class,
                    reason: format!("distance bound must be positive, got {}", c.distance_bound),
                });
            }
            if !(c.capacity.is_finite() && c.capacity >= 0.0) {
                return Err(Error::InvalidClass {
                    class,
                    reason: format!("capacity must be nonnegative, got {}", c.capacity),
                });
            }
            if c.multiplicity == Multiplicity::Limited(0) {
                return Err(Error::InvalidClass {
                    class,
                    reason: "multiplicity must be positive".into(),
                });
            }
        }
        Ok(FleetSpec { classes })
    }

    /// Single unbounded class.
    pub fn single(capacity: f64, distance_bound: f64) -> Result<Self> {
        Self::new(vec![VehicleClass::new(capacity, distance_bound)])
    }

    pub fn classes(&self) -> &[VehicleClass] {
        &self.classes
    }

    pub fn class(&self, id: usize) -> Option<&VehicleClass> {
        self.classes.get(id)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.classes
            .iter()
            .map(|c| c.distance_bound)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_capacity(&self) -> f64 {
        self.classes.iter().map(|c| c.capacity).fold(0.0, f64::max)
    }
}

/// A complete metric over `n` vertices. Vertex 0 is the depot.
///
/// The value is immutable once built. Construction only checks structure
/// (square matrix, matching lengths); metric properties are checked by
/// [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetricInstance {
    name: String,
    n: usize,
    dist: Vec<f64>,
    demand: Vec<f64>,
    fleet: FleetSpec,
    coords: Option<Vec<Point>>,
}

impl MetricInstance {
    pub fn from_matrix(
        name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        demand: Vec<f64>,
        fleet: FleetSpec,
    ) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        let mut dist = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(Error::MalformedMatrix {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
            dist.extend(r);
        }
        if demand.len() != n {
            return Err(Error::LengthMismatch {
                what: "demands",
                expected: n,
                got: demand.len(),
            });
        }
        Ok(MetricInstance {
            name: name.into(),
            n,
            dist,
            demand,
            fleet,
            coords: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_fleet(mut self, fleet: FleetSpec) -> Self {
        self.fleet = fleet;
        self
    }

    /// Number of vertices, depot included.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn customers(&self) -> impl Iterator<Item = VertexId> {
        1..self.n
    }

    #[inline]
    pub fn dist(&self, i: VertexId, j: VertexId) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: VertexId) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn demand(&self, v: VertexId) -> f64 {
        self.demand[v]
    }

    pub fn demands(&self) -> &[f64] {
        &self.demand
    }

    pub fn fleet(&self) -> &FleetSpec {
        &self.fleet
    }

    pub fn coords(&self) -> Option<&[Point]> {
        self.coords.as_deref()
    }

    /// Depot radius: the largest distance from the depot to any vertex.
    pub fn radius(&self) -> f64 {
        self.row(DEPOT).iter().copied().fold(0.0, f64::max)
    }

    /// Vertex realising [`Self::radius`] (smallest id on ties).
    pub fn farthest_vertex(&self) -> VertexId {
        let mut best = DEPOT;
        for v in self.customers() {
            if self.dist(DEPOT, v) > self.dist(DEPOT, best) {
                best = v;
            }
        }
        best
    }

    /// Length of a vertex sequence, summed over consecutive pairs.
    pub fn walk_length(&self, seq: &[VertexId]) -> f64 {
        seq.windows(2).map(|w| self.dist(w[0], w[1])).sum()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    NonFinite,
    NegativeDistance,
    Diagonal,
    Symmetry,
    Triangle,
    DemandSign,
    DepotDemand,
    Radius,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::NonFinite => "non-finite",
            ViolationKind::NegativeDistance => "negative-distance",
            ViolationKind::Diagonal => "diagonal",
            ViolationKind::Symmetry => "symmetry",
            ViolationKind::Triangle => "triangle",
            ViolationKind::DemandSign => "demand-sign",
            ViolationKind::DepotDemand => "depot-demand",
            ViolationKind::Radius => "radius",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub witness: Vec<VertexId>,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {:?} (magnitude {})", self.kind, self.witness, self.magnitude)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidInstance(v.to_string())),
        }
    }
}

fn tol(eps: f64, scale: f64) -> f64 {
    eps * scale.abs().max(1.0)
}

/// Checks every metric, demand and depot-radius requirement, reporting all
/// violations rather than stopping at the first.
///
/// The triangle inequality is checked with relative slack
/// `eps_tri * max(1, d(i,j) + d(j,k))`. Symmetry is checked exactly.
pub fn validate_instance(inst: &MetricInstance, eps_tri: f64) -> ValidationReport {
    let n = inst.n();
    let mut violations = Vec::new();
    let mut finite = true;

    for i in 0..n {
        for j in 0..n {
            let d = inst.dist(i, j);
            if !d.is_finite() {
                finite = false;
                violations.push(Violation {
                    kind: ViolationKind::NonFinite,
                    witness: vec![i, j],
                    magnitude: d,
                });
            } else if d < 0.0 {
                violations.push(Violation {
                    kind: ViolationKind::NegativeDistance,
                    witness: vec![i, j],
                    magnitude: -d,
                });
            }
        }
    }
    for i in 0..n {
        let d = inst.dist(i, i);
        if d != 0.0 {
            violations.push(Violation {
                kind: ViolationKind::Diagonal,
                witness: vec![i],
                magnitude: d.abs(),
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if inst.dist(i, j) != inst.dist(j, i) {
                violations.push(Violation {
                    kind: ViolationKind::Symmetry,
                    witness: vec![i, j],
                    magnitude: (inst.dist(i, j) - inst.dist(j, i)).abs(),
                });
            }
        }
    }
    if finite {
        for i in 0..n {
            for k in i + 1..n {
                let direct = inst.dist(i, k);
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let via = inst.dist(i, j) + inst.dist(j, k);
                    if direct - via > tol(eps_tri, via) {
                        violations.push(Violation {
                            kind: ViolationKind::Triangle,
                            witness: vec![i, j, k],
                            magnitude: direct - via,
                        });
                    }
                }
            }
        }
    }
    for (v, &q) in inst.demands().iter().enumerate() {
        if !(q.is_finite() && q >= 0.0) {
            violations.push(Violation {
                kind: ViolationKind::DemandSign,
                witness: vec![v],
                magnitude: q.abs(),
            });
        }
    }
    if inst.demand(DEPOT) != 0.0 {
        violations.push(Violation {
            kind: ViolationKind::DepotDemand,
            witness: vec![DEPOT],
            magnitude: inst.demand(DEPOT).abs(),
        });
    }
    if finite {
        let half = inst.fleet().t_min() / 2.0;
        let radius = inst.radius();
        if radius - half > tol(EPS, half) {
            violations.push(Violation {
                kind: ViolationKind::Radius,
                witness: vec![inst.farthest_vertex()],
                magnitude: radius - half,
            });
        }
    }

    ValidationReport { violations }
}

/// Builds the Euclidean metric over `points`; `points[0]` is the depot.
pub fn euclidean_instance(points: &[Point], demands: &[f64], fleet: FleetSpec) -> Result<MetricInstance> {
    if points.is_empty() {
        return Err(Error::EmptyInstance);
    }
    if points.len() != demands.len() {
        return Err(Error::LengthMismatch {
            what: "demands",
            expected: points.len(),
            got: demands.len(),
        });
    }
    let rows = points
        .iter()
        .map(|&(xi, yi)| points.iter().map(|&(xj, yj)| (xi - xj).hypot(yi - yj)).collect())
        .collect();
    let mut inst = MetricInstance::from_matrix("euclidean", rows, demands.to_vec(), fleet)?;
    inst.coords = Some(points.to_vec());
    Ok(inst)
}

/// Parameters for [`random_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    pub n: usize,
    pub seed: u64,
    pub side: f64,
    pub demand_range: (f64, f64),
    pub fleet: FleetSpec,
}

pub const GENERATION_ATTEMPTS: usize = 1000;

/// Uniform points in a `side × side` box, resampled until the depot radius
/// fits the fleet. Deterministic for a fixed seed.
pub fn random_instance(spec: &RandomSpec) -> Result<MetricInstance> {
    let RandomSpec {
        n,
        seed,
        side,
        demand_range: (lo, hi),
        ref fleet,
    } = *spec;
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least the depot".into(),
        });
    }
    if !(side.is_finite() && side >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "side",
            reason: format!("box side must be nonnegative, got {side}"),
        });
    }
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(Error::InvalidParameter {
            name: "demand_range",
            reason: format!("need 0 <= lo <= hi, got [{lo}, {hi}]"),
        });
    }
    if hi > fleet.max_capacity() {
        return Err(Error::InvalidParameter {
            name: "demand_range",
            reason: format!("demand {hi} exceeds the largest capacity {}", fleet.max_capacity()),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = fleet.t_min() / 2.0;
    for _ in 0..GENERATION_ATTEMPTS {
        let points: Vec<Point> = (0..n)
            .map(|_| (rng.gen::<f64>() * side, rng.gen::<f64>() * side))
            .collect();
        let demands: Vec<f64> = (0..n)
            .map(|v| {
                let q = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
                if v == DEPOT {
                    0.0
                } else {
                    q
                }
            })
            .collect();
        let inst = euclidean_instance(&points, &demands, fleet.clone())?;
        if inst.radius() <= half {
            return Ok(inst.with_name(format!("random-n{n}-s{seed}")));
        }
    }
    Err(Error::GenerationFailed {
        attempts: GENERATION_ATTEMPTS,
        reason: format!("no sample had depot radius <= {half}"),
    })
}

/// An instance restricted to a vertex subset, with the map back to the
/// original vertex ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SubInstance {
    pub instance: MetricInstance,
    /// `original[new_id]` is the id in the parent instance.
    pub original: Vec<VertexId>,
}

impl SubInstance {
    pub fn to_original(&self, v: VertexId) -> VertexId {
        self.original[v]
    }
}

/// Restricts `inst` to `subset`, renumbering densely in ascending id order
/// (so the depot stays at 0).
pub fn induced_subinstance(inst: &MetricInstance, subset: &[VertexId]) -> Result<SubInstance> {
    let mut keep = subset.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&v) = keep.iter().find(|&&v| v >= inst.n()) {
        return Err(Error::VertexOutOfRange(v));
    }
    if keep.first() != Some(&DEPOT) {
        return Err(Error::MissingDepot);
    }
    let rows = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| inst.dist(i, j)).collect())
        .collect();
    let demand = keep.iter().map(|&v| inst.demand(v)).collect();
    let mut sub = MetricInstance::from_matrix(inst.name(), rows, demand, inst.fleet().clone())?;
    sub.coords = inst.coords().map(|pts| keep.iter().map(|&v| pts[v]).collect());
    Ok(SubInstance {
        instance: sub,
        original: keep,
    })
}
