//! Variable-size bin packing of customer demands onto vehicle classes.
//!
//! Bins come in several capacities (one per vehicle class) and the objective
//! is the total capacity of the bins opened.

use crate::error::{Error, Result};
use crate::instance::{FleetSpec, MetricInstance, VertexId};

/// Slack for capacity comparisons on real-valued demands.
pub const CAPACITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub vertex: VertexId,
    pub size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinClass {
    pub class_id: usize,
    pub capacity: f64,
    /// Maximum number of bins of this class, `None` for unbounded.
    pub limit: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub class_id: usize,
    pub capacity: f64,
    pub items: Vec<Item>,
}

impl Bin {
    pub fn load(&self) -> f64 {
        self.items.iter().map(|it| it.size).sum()
    }

    fn fits(&self, size: f64) -> bool {
        self.load() + size <= self.capacity + CAPACITY_SLACK
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Packing {
    pub bins: Vec<Bin>,
    pub total_size: f64,
}

impl Packing {
    pub(crate) fn from_bins(bins: Vec<Bin>) -> Self {
        let total_size = bins.iter().map(|b| b.capacity).sum();
        Packing { bins, total_size }
    }
}

/// One item per customer, sized by its demand.
pub fn customer_items(inst: &MetricInstance) -> Vec<Item> {
    inst.customers()
        .map(|vertex| Item {
            vertex,
            size: inst.demand(vertex),
        })
        .collect()
}

pub fn bin_classes(fleet: &FleetSpec) -> Vec<BinClass> {
    fleet
        .classes()
        .iter()
        .enumerate()
        .map(|(class_id, c)| BinClass {
            class_id,
            capacity: c.capacity,
            limit: c.multiplicity.limit(),
        })
        .collect()
}

pub(crate) fn check_items(items: &[Item], classes: &[BinClass]) -> Result<()> {
    let largest = classes
        .iter()
        .filter(|c| c.capacity > 0.0)
        .map(|c| c.capacity)
        .fold(f64::NEG_INFINITY, f64::max);
    for it in items {
        if it.size.is_nan() || it.size < 0.0 || it.size > largest + CAPACITY_SLACK {
            return Err(Error::InfeasibleItem {
                vertex: it.vertex,
                size: it.size,
            });
        }
    }
    Ok(())
}

/// Best-fit decreasing for variable bin sizes.
///
/// Items are taken largest first (vertex id breaks ties). Each goes to the
/// open bin with the least residual room that still fits it, preferring the
/// smaller class id and then the earlier bin on ties. When no open bin fits,
/// a new bin is opened from the class that would be best utilised if it were
/// filled first-fit with this item and the items still to come; ties go to
/// the smaller capacity, then the smaller class id.
pub fn pack_variable_bins(items: &[Item], classes: &[BinClass]) -> Result<Packing> {
    check_items(items, classes)?;
    let mut order = items.to_vec();
    order.sort_by(|a, b| b.size.total_cmp(&a.size).then(a.vertex.cmp(&b.vertex)));

    let mut bins: Vec<Bin> = Vec::new();
    let mut opened = vec![0usize; classes.len()];

    for (idx, item) in order.iter().enumerate() {
        let best_open = bins
            .iter()
            .enumerate()
            .filter(|(_, b)| b.fits(item.size))
            .min_by(|(ia, a), (ib, b)| {
                (a.capacity - a.load())
                    .total_cmp(&(b.capacity - b.load()))
                    .then(a.class_id.cmp(&b.class_id))
                    .then(ia.cmp(ib))
            })
            .map(|(i, _)| i);
        if let Some(i) = best_open {
            bins[i].items.push(*item);
            continue;
        }

        let rest = &order[idx + 1..];
        let chosen = classes
            .iter()
            .enumerate()
            .filter(|(ci, c)| {
                c.capacity > 0.0
                    && item.size <= c.capacity + CAPACITY_SLACK
                    && c.limit.is_none_or(|k| opened[*ci] < k as usize)
            })
            .map(|(ci, c)| (ci, c, lookahead_fill(c.capacity, item.size, rest) / c.capacity))
            .max_by(|(_, a, ua), (_, b, ub)| {
                ua.total_cmp(ub)
                    .then(b.capacity.total_cmp(&a.capacity))
                    .then(b.class_id.cmp(&a.class_id))
            });
        match chosen {
            Some((ci, c, _)) => {
                opened[ci] += 1;
                bins.push(Bin {
                    class_id: c.class_id,
                    capacity: c.capacity,
                    items: vec![*item],
                });
            }
            None => {
                return Err(Error::InfeasibleItem {
                    vertex: item.vertex,
                    size: item.size,
                })
            }
        }
    }
    Ok(Packing::from_bins(bins))
}

fn lookahead_fill(capacity: f64, first: f64, rest: &[Item]) -> f64 {
    let mut load = first;
    for it in rest {
        if load + it.size <= capacity + CAPACITY_SLACK {
            load += it.size;
        }
    }
    load
}

/// One `(class_id, vertices)` group per opened bin, vertices ascending.
pub fn packing_groups(p: &Packing) -> Vec<(usize, Vec<VertexId>)> {
    p.bins
        .iter()
        .map(|b| {
            let mut vs: Vec<_> = b.items.iter().map(|it| it.vertex).collect();
            vs.sort_unstable();
            (b.class_id, vs)
        })
        .collect()
}
