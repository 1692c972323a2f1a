//! Solvers for the heterogeneous-fleet capacity- and distance-constrained
//! vehicle routing problem and its balanced variant, with exact brute-force
//! oracles for checking them on small instances.
//!
//! The depot is always vertex 0. Lengths and demands are `f64`; comparisons
//! use the explicit tolerances exported by each module.

pub mod binpack;
pub mod cli;
pub mod error;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod solvers;
pub mod tree;

/// Default tolerance for metric checks and length comparisons.
pub const EPS: f64 = 1e-9;

pub use error::{Error, Result};
pub use instance::{
    euclidean_instance, induced_subinstance, random_instance, validate_instance, FleetSpec, MetricInstance,
    Multiplicity, RandomSpec, ValidationReport, VehicleClass, VertexId, DEPOT,
};
pub use oracle::{exact_min_tours, exact_pack, exact_tsp, verify_solution, OracleLimits, OracleOutcome, VerifyReport};
pub use solvers::{
    balance_ratio, reduce_dcvrp_to_bdcvrp, solve_bdcvrp, solve_dvrp, solve_min_nht, solve_min_nt, BalancedPaths,
    GadgetInstance, RoutingSolution,
};
pub use tree::{Path, Tour};
