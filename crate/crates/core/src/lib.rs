//! Behaviour-space diverse planning.
//!
//! Planning tasks written in a PDDL fragment are grounded, compiled to
//! step-indexed SMT formulas, extended with behaviour-dimension encodings,
//! and solved repeatedly while already-seen behaviours (and, once those are
//! exhausted, already-seen plans) are forbidden.

pub mod bench;
pub mod dimensions;
pub mod encoding;
pub mod grounding;
pub mod metrics;
pub mod pddl;
pub mod planner;
pub mod rational;
pub mod report;
pub mod sexpr;
pub mod smt;
