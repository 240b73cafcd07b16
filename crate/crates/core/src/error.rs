use thiserror::Error;

use crate::set::{Pid, ProcSet};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("process id {0} out of range (ids must be below 64)")]
    PidOutOfRange(Pid),

    #[error("cannot execute {set}: not a subset of the active set {active}")]
    NotActive { set: ProcSet, active: ProcSet },

    #[error("sets {0} and {1} overlap")]
    Overlap(ProcSet, ProcSet),

    #[error("round counter has empty support")]
    EmptySupport,

    #[error("process {0} is not passive")]
    NotPassive(Pid),

    #[error("process {0} is not in the support")]
    NotInSupport(Pid),

    #[error("invalid witness data: {0}")]
    InvalidWitness(String),

    #[error("prestructure is not stable")]
    NotStable,

    #[error("{set} is not a subset of the active set {active}")]
    NotSubsetOfActive { set: ProcSet, active: ProcSet },

    #[error("simplex {0} is not in the complex")]
    NotInComplex(String),

    #[error("simplex {simplex} is not in stratum {stratum}")]
    NotInStratum { simplex: String, stratum: String },

    #[error("malformed stratum: {0}")]
    MalformedStratum(String),

    #[error("resource cap exceeded: more than {limit} {what}")]
    ResourceCap { limit: usize, what: &'static str },

    #[error("collapse step {index} invalid: {reason}")]
    InvalidCollapse { index: usize, reason: String },

    #[error("greedy collapse stalled with {remaining} simplices left")]
    CollapseStalled { remaining: usize },

    #[error("certificate failed: {0}")]
    Certificate(String),
}
