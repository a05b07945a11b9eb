//! Fault masking analysis for small combinational netlists, centred on the
//! 2-of-3 majority voters used in triple modular redundancy.
//!
//! The crate is organised bottom-up:
//!
//! - [`netlist`]: immutable single-output netlist IR and fault-free evaluation.
//! - [`voters`]: the four built-in voter circuits.
//! - [`dsl`]: the `.voter` text format (parser and canonical serializer).
//! - [`fault`]: exhaustive internal fault injection under assignment or
//!   propagation semantics, producing truth-cum-fault enumeration rows.
//! - [`metrics`]: fault masking ratio, TMR reliability and FT-FOM ranking.
//! - [`report`]: Markdown, CSV and JSON renderings.

pub mod dsl;
mod error;
pub mod fault;
pub mod metrics;
pub mod netlist;
pub mod report;
pub mod voters;

mod sim;

pub use error::{Error, Result};
pub use netlist::{Expr, Gate, GateKind, NetId, Netlist, Valuation, Violation, ViolationKind};
pub use voters::{builtin, VoterName};
