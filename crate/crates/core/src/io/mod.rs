//! Instance files, demand profiles, the synthetic generator and the
//! exhaustive oracle.

pub mod format;
pub mod generator;
pub mod oracle;
pub mod profiles;

pub use format::{parse_instance, serialize_instance, InstanceFile};
pub use generator::{generate_instance, GeneratorConfig};
pub use oracle::{brute_force, enumerate_plans, OracleResult, ORACLE_SLOT_LIMIT};
pub use profiles::DemandProfile;

use crate::model::Instance;

/// Text of the shipped three-bus instance.
pub const TRI3_TEXT: &str = include_str!("../../data/tri3.tesp");

/// Three buses over four intervals: a generator at bus 0 feeding two load
/// buses through congested corridors, four candidate circuits and storage
/// sites at both loads.
pub fn tri3() -> Instance {
    parse_instance(TRI3_TEXT).expect("shipped tri3 file parses")
}
