//! The four built-in majority voter circuits. All take primary inputs
//! `X, Y, Z` and drive output `V`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::netlist::{Expr, Gate, GateKind, NetId, Netlist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VoterName {
    Classical,
    Kp,
    Bn,
    Proposed,
}

impl VoterName {
    pub const ALL: [VoterName; 4] = [VoterName::Classical, VoterName::Kp, VoterName::Bn, VoterName::Proposed];

    pub fn as_str(self) -> &'static str {
        match self {
            VoterName::Classical => "classical",
            VoterName::Kp => "kp",
            VoterName::Bn => "bn",
            VoterName::Proposed => "proposed",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            VoterName::Classical => "AND-OR sum of products, three internal nodes",
            VoterName::Kp => "XOR pair + priority encoder + 2:1 MUX, four internal nodes",
            VoterName::Bn => "XOR-selected 2:1 MUX, one internal node",
            VoterName::Proposed => "OR gate + complex gate MZ + XY + YZ, one internal node",
        }
    }

    /// Published fault masking ratio (single and multiple faults), as
    /// printed. Kept for side-by-side comparison only.
    pub fn published_fmr(self) -> &'static str {
        match self {
            VoterName::Classical => "0.4286",
            VoterName::Kp => "0.7083",
            VoterName::Bn => "0.5",
            VoterName::Proposed => "0.75",
        }
    }

    pub fn netlist(self) -> Netlist {
        builtin(self)
    }
}

impl fmt::Display for VoterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VoterName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        VoterName::ALL.into_iter().find(|v| v.as_str() == s).ok_or_else(|| Error::UnknownVoter(s.to_string()))
    }
}

fn id(s: &str) -> NetId {
    NetId::new(s).expect("built-in net names are valid")
}

fn gate(out: &str, kind: GateKind, inputs: &[&str]) -> Gate {
    Gate::new(id(out), kind, inputs.iter().map(|s| id(s)).collect())
}

pub fn builtin(name: VoterName) -> Netlist {
    let inputs = vec![id("X"), id("Y"), id("Z")];
    let gates = match name {
        VoterName::Classical => vec![
            gate("N1", GateKind::And, &["X", "Y"]),
            gate("N2", GateKind::And, &["Y", "Z"]),
            gate("N3", GateKind::And, &["X", "Z"]),
            gate("V", GateKind::Or, &["N1", "N2", "N3"]),
        ],
        // Connectivity reconstructed from the published truth-cum-fault
        // table; P = 1 routes Z, P = 0 routes X.
        VoterName::Kp => vec![
            gate("N1", GateKind::Xor, &["X", "Y"]),
            gate("N2", GateKind::Xor, &["Y", "Z"]),
            gate("N3", GateKind::Inv, &["N2"]),
            gate("P", GateKind::And, &["N1", "N3"]),
            Gate::mux(id("V"), id("P"), id("X"), id("Z")),
        ],
        VoterName::Bn => vec![gate("N", GateKind::Xor, &["X", "Y"]), Gate::mux(id("V"), id("N"), id("Y"), id("Z"))],
        // The complex gate stays a single EXPR so M is the only fault site.
        VoterName::Proposed => vec![
            gate("M", GateKind::Or, &["X", "Y"]),
            Gate::expr(
                id("V"),
                Expr::Or(vec![
                    Expr::And(vec![Expr::net("M"), Expr::net("Z")]),
                    Expr::And(vec![Expr::net("X"), Expr::net("Y")]),
                    Expr::And(vec![Expr::net("Y"), Expr::net("Z")]),
                ]),
            ),
        ],
    };
    Netlist::new(name.as_str(), inputs, gates, id("V"))
}
