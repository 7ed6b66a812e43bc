//! Identification of switched linear systems from regressor/output data.
//!
//! The crate estimates subsystem parameters and the switching sequence by
//! block-coordinate descent on a penalty-relaxed mixed-integer problem,
//! certifies persistence of excitation with a partition-based test,
//! checks uniqueness claims by exhaustive enumeration on small instances and
//! selects the number of subsystems by penalized least squares.
//!
//! Subsystem labels are 1-based in every public interface; sample indices are 0-based.
//!
//! ```
//! use slsid_core::{bcd_solve, fixtures, SolverConfig};
//!
//! let (_, data) = fixtures::example2();
//! let report = bcd_solve(&data, &SolverConfig::new(2)).unwrap();
//! assert!(report.objective < 1e-12);
//! ```

pub mod bcd;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod order;
pub mod pe;
pub mod simulate;

pub use bcd::{
    assign_step, bcd_solve, fit_cluster_params, stationarity_check, Init, IterationRecord,
    SolveReport, SolverConfig, StopReason,
};
pub use error::{Error, Result};
pub use metrics::{classification_error, nmse, Permutation};
pub use model::{Assignment, Dataset, NoiseKind, NoiseSpec, RelaxedMembership, SlModel};
pub use objective::{objective_integer, objective_relaxed};
pub use oracle::{oracle_global, oracle_unique, OracleOptions, OracleResult, SolutionClass};
pub use order::{
    consistency_sweep, select_order, ConsistencyRow, ConsistencyScenario, OrderSelectConfig,
    OrderSelectReport, Penalty,
};
pub use pe::{
    check_cluster_pe, check_distinct_params, check_genericity_sufficient,
    check_no_separating_regressor, check_partition_condition, min_samples_bako, min_samples_ours,
    min_samples_table, min_samples_vidal, pe_report, PartitionVerdict, PartitionWitness,
    PeLimits, PeReport, PeTolerances, SampleCounts,
};
pub use simulate::{derive_seed, generate_random_scenario, simulate};
