//! Immediate snapshot complexes.
//!
//! A round counter fixes how many write-read rounds each process runs. The protocol
//! complex of all layered immediate snapshot executions is indexed by witness
//! structures; this crate builds it, implements its canonical stratification, and
//! checks its combinatorial topology (pseudomanifold structure, homology, collapses).

pub mod complex;
pub mod counter;
pub mod error;
pub mod schedule;
pub mod set;
pub mod strata;
pub mod topology;
pub mod verify;
pub mod witness;

pub use complex::{Complex, SimplexId, DEFAULT_SIMPLEX_CAP};
pub use counter::RoundCounter;
pub use error::{Error, Result};
pub use schedule::Schedule;
pub use set::{Pid, ProcSet};
pub use strata::{StratumKind, StratumRef};
pub use witness::{Row, TraceForm, WitnessStructure};
