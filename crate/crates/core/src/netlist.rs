//! Single-output combinational netlist IR.
//!
//! A [`Netlist`] is a list of primary inputs followed by gates in topological
//! order; the last gate drives the primary output. Every other gate output is
//! an internal node and therefore a fault site.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sim::Circuit;

/// Name of a net: a letter followed by letters, digits or `_`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetId(String);

impl NetId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if Self::is_valid(&name) {
            Ok(NetId(name))
        } else {
            Err(Error::InvalidNetName(name))
        }
    }

    pub fn is_valid(name: &str) -> bool {
        let mut chars = name.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for NetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NetId::new(s)
    }
}

impl fmt::Display for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NetId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Boolean expression tree used by `EXPR` gates.
///
/// `And`, `Or` and `Xor` are n-ary (at least two operands) and evaluate as a
/// left fold.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Net(NetId),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Xor(Vec<Expr>),
}

impl Expr {
    /// Leaf referencing `name`. Panics on an invalid net name.
    pub fn net(name: &str) -> Expr {
        Expr::Net(NetId::new(name).expect("valid net name"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    /// Distinct referenced nets in order of first appearance.
    pub fn references(&self) -> Vec<NetId> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut Vec<NetId>) {
        match self {
            Expr::Net(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Expr::Not(e) => e.collect_refs(out),
            Expr::And(es) | Expr::Or(es) | Expr::Xor(es) => es.iter().for_each(|e| e.collect_refs(out)),
        }
    }

    /// Evaluates against a lookup of net values.
    pub fn eval(&self, value: &impl Fn(&NetId) -> bool) -> bool {
        match self {
            Expr::Net(n) => value(n),
            Expr::Not(e) => !e.eval(value),
            Expr::And(es) => es.iter().all(|e| e.eval(value)),
            Expr::Or(es) => es.iter().any(|e| e.eval(value)),
            Expr::Xor(es) => es.iter().fold(false, |acc, e| acc ^ e.eval(value)),
        }
    }

    fn short_operator_lists(&self) -> bool {
        match self {
            Expr::Net(_) => false,
            Expr::Not(e) => e.short_operator_lists(),
            Expr::And(es) | Expr::Or(es) | Expr::Xor(es) => es.len() < 2 || es.iter().any(Expr::short_operator_lists),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Inv,
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    /// Inputs are `[select, a, b]`; select 0 routes `a`, select 1 routes `b`.
    Mux2,
    Expr(Expr),
}

pub const MAX_GATE_ARITY: usize = 8;

impl GateKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            GateKind::Inv => "INV",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Mux2 => "MUX",
            GateKind::Expr(_) => "EXPR",
        }
    }

    /// Human-readable arity requirement, `None` for EXPR.
    pub fn arity_text(&self) -> Option<&'static str> {
        match self {
            GateKind::Inv => Some("exactly 1 input"),
            GateKind::Mux2 => Some("exactly 3 inputs"),
            GateKind::Expr(_) => None,
            _ => Some("2..8 inputs"),
        }
    }

    pub fn accepts_arity(&self, n: usize) -> bool {
        match self {
            GateKind::Inv => n == 1,
            GateKind::Mux2 => n == 3,
            GateKind::Expr(_) => true,
            _ => (2..=MAX_GATE_ARITY).contains(&n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub output: NetId,
    pub kind: GateKind,
    pub inputs: Vec<NetId>,
}

impl Gate {
    pub fn new(output: NetId, kind: GateKind, inputs: Vec<NetId>) -> Gate {
        Gate { output, kind, inputs }
    }

    pub fn mux(output: NetId, select: NetId, a: NetId, b: NetId) -> Gate {
        Gate::new(output, GateKind::Mux2, vec![select, a, b])
    }

    /// EXPR gate; its input list is derived from the expression.
    pub fn expr(output: NetId, expr: Expr) -> Gate {
        let inputs = expr.references();
        Gate::new(output, GateKind::Expr(expr), inputs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateInput,
    MultipleDrivers,
    DrivesPrimaryInput,
    Cycle,
    ForwardReference,
    UndefinedNet,
    Arity,
    MalformedExpr,
    UndrivenOutput,
    OutputNotLast,
}

/// One broken netlist invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub net: NetId,
    /// Index of the offending gate, if the violation belongs to one.
    pub gate: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gate {
            Some(g) => write!(f, "gate #{g}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Netlist {
    name: String,
    inputs: Vec<NetId>,
    gates: Vec<Gate>,
    output: NetId,
}

impl Netlist {
    /// Stores the parts as given. Use [`Netlist::validate`] (or
    /// [`Netlist::checked`]) before analysing a hand-built netlist; every
    /// analysis entry point re-validates anyway.
    pub fn new(name: impl Into<String>, inputs: Vec<NetId>, gates: Vec<Gate>, output: NetId) -> Netlist {
        Netlist { name: name.into(), inputs, gates, output }
    }

    pub fn checked(name: impl Into<String>, inputs: Vec<NetId>, gates: Vec<Gate>, output: NetId) -> Result<Netlist> {
        let n = Netlist::new(name, inputs, gates, output);
        let violations = n.validate();
        if violations.is_empty() {
            Ok(n)
        } else {
            Err(Error::InvalidNetlist(violations))
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn primary_inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> &NetId {
        &self.output
    }

    /// Fault sites: every gate output except the primary output, in
    /// declaration order.
    pub fn internal_nodes(&self) -> Vec<NetId> {
        self.gates.iter().map(|g| &g.output).filter(|n| **n != self.output).cloned().collect()
    }

    /// Checks every structural invariant. An empty list means the netlist is
    /// well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push =
            |kind, net: &NetId, gate, message: String| out.push(Violation { kind, net: net.clone(), gate, message });

        let mut seen_inputs = HashSet::new();
        for input in &self.inputs {
            if !seen_inputs.insert(input) {
                push(ViolationKind::DuplicateInput, input, None, format!("duplicate primary input {input}"));
            }
        }

        // position of the first gate driving each net
        let mut driver: HashMap<&NetId, usize> = HashMap::new();
        for (i, g) in self.gates.iter().enumerate() {
            if seen_inputs.contains(&g.output) {
                push(
                    ViolationKind::DrivesPrimaryInput,
                    &g.output,
                    Some(i),
                    format!("gate drives primary input {}", g.output),
                );
            } else if driver.contains_key(&g.output) {
                push(ViolationKind::MultipleDrivers, &g.output, Some(i), format!("multiple drivers for {}", g.output));
            } else {
                driver.insert(&g.output, i);
            }
        }

        for (i, g) in self.gates.iter().enumerate() {
            if !g.kind.accepts_arity(g.inputs.len()) {
                push(
                    ViolationKind::Arity,
                    &g.output,
                    Some(i),
                    format!(
                        "{} requires {}, got {}",
                        g.kind.keyword(),
                        g.kind.arity_text().unwrap_or_default(),
                        g.inputs.len()
                    ),
                );
            }
            if let GateKind::Expr(e) = &g.kind {
                if e.short_operator_lists() {
                    push(
                        ViolationKind::MalformedExpr,
                        &g.output,
                        Some(i),
                        format!("EXPR for {} has an operator with fewer than 2 operands", g.output),
                    );
                }
                if e.references() != g.inputs {
                    push(
                        ViolationKind::MalformedExpr,
                        &g.output,
                        Some(i),
                        format!("EXPR for {} lists inputs that differ from its expression", g.output),
                    );
                }
            }
            for input in &g.inputs {
                if seen_inputs.contains(input) {
                    continue;
                }
                if *input == g.output {
                    push(ViolationKind::Cycle, input, Some(i), format!("self-reference/cycle at {input}"));
                    continue;
                }
                match driver.get(input) {
                    Some(&j) if j < i => {}
                    Some(_) => push(
                        ViolationKind::ForwardReference,
                        input,
                        Some(i),
                        format!("{} reads {input} before it is defined", g.output),
                    ),
                    None => push(ViolationKind::UndefinedNet, input, Some(i), format!("undefined net {input}")),
                }
            }
        }

        match driver.get(&self.output) {
            None => push(
                ViolationKind::UndrivenOutput,
                &self.output,
                None,
                format!("primary output {} is not driven by any gate", self.output),
            ),
            Some(&i) if i + 1 != self.gates.len() => push(
                ViolationKind::OutputNotLast,
                &self.output,
                Some(i),
                format!("primary output {} must be driven by the last gate", self.output),
            ),
            Some(_) => {}
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Fault-free evaluation for one input vector (bits in primary input
    /// order).
    pub fn evaluate(&self, inputs: &[bool]) -> Result<Valuation> {
        let circuit = Circuit::compile(self)?;
        circuit.check_width(inputs.len())?;
        let bits = circuit.evaluate(inputs);
        let nets = self.inputs.iter().chain(self.gates.iter().map(|g| &g.output)).cloned().collect();
        Ok(Valuation { nets, bits })
    }

    /// Output for every input vector, in ascending binary order with the
    /// first primary input as the most significant bit.
    pub fn truth_table(&self) -> Result<Vec<(Vec<bool>, bool)>> {
        let circuit = Circuit::compile(self)?;
        let k = self.inputs.len();
        Ok((0..1u32 << k)
            .map(|v| {
                let bits = input_bits(v, k);
                let out = *circuit.evaluate(&bits).last().expect("netlist has gates");
                (bits, out)
            })
            .collect())
    }
}

/// Expands `value` into `width` bits, most significant first.
pub fn input_bits(value: u32, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| value >> i & 1 == 1).collect()
}

/// Total assignment of bits to the nets of a netlist: primary inputs first,
/// then gate outputs in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation {
    nets: Vec<NetId>,
    bits: Vec<bool>,
}

impl Valuation {
    pub fn get(&self, net: &str) -> Option<bool> {
        self.nets.iter().position(|n| n.as_str() == net).map(|i| self.bits[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NetId, bool)> {
        self.nets.iter().zip(self.bits.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.nets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nets.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> NetId {
        NetId::new(s).unwrap()
    }

    fn ids(names: &[&str]) -> Vec<NetId> {
        names.iter().map(|s| id(s)).collect()
    }

    fn classical() -> Netlist {
        Netlist::new(
            "classical",
            ids(&["X", "Y", "Z"]),
            vec![
                Gate::new(id("N1"), GateKind::And, ids(&["X", "Y"])),
                Gate::new(id("N2"), GateKind::And, ids(&["Y", "Z"])),
                Gate::new(id("N3"), GateKind::And, ids(&["X", "Z"])),
                Gate::new(id("V"), GateKind::Or, ids(&["N1", "N2", "N3"])),
            ],
            id("V"),
        )
    }

    #[test]
    fn net_names() {
        assert!(NetId::new("N1").is_ok());
        assert!(NetId::new("a_b9").is_ok());
        assert!(NetId::new("1N").is_err());
        assert!(NetId::new("").is_err());
        assert!(NetId::new("N-1").is_err());
    }

    #[test]
    fn classical_is_valid() {
        assert_eq!(classical().validate(), vec![]);
    }

    #[test]
    fn self_reference_is_a_cycle() {
        let n = Netlist::new(
            "bad",
            ids(&["X", "Y"]),
            vec![
                Gate::new(id("N1"), GateKind::And, ids(&["N1", "X"])),
                Gate::new(id("V"), GateKind::Or, ids(&["N1", "Y"])),
            ],
            id("V"),
        );
        let v = n.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Cycle);
        assert_eq!(v[0].message, "self-reference/cycle at N1");
    }

    #[test]
    fn two_drivers_for_output() {
        let n = Netlist::new(
            "bad",
            ids(&["X", "Y"]),
            vec![
                Gate::new(id("V"), GateKind::And, ids(&["X", "Y"])),
                Gate::new(id("V"), GateKind::Or, ids(&["X", "Y"])),
            ],
            id("V"),
        );
        let v = n.validate();
        assert!(v.iter().any(|v| v.message == "multiple drivers for V"), "{v:?}");
    }

    #[test]
    fn forward_and_undefined_references() {
        let n = Netlist::new(
            "bad",
            ids(&["X"]),
            vec![
                Gate::new(id("A"), GateKind::And, ids(&["X", "B"])),
                Gate::new(id("B"), GateKind::Inv, ids(&["X"])),
                Gate::new(id("V"), GateKind::Or, ids(&["A", "Q"])),
            ],
            id("V"),
        );
        let kinds: Vec<_> = n.validate().into_iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::ForwardReference, ViolationKind::UndefinedNet]);
    }

    #[test]
    fn arity_and_output_placement() {
        let n = Netlist::new(
            "bad",
            ids(&["X", "Y"]),
            vec![Gate::new(id("V"), GateKind::And, ids(&["X"])), Gate::new(id("A"), GateKind::Inv, ids(&["X", "Y"]))],
            id("V"),
        );
        let kinds: Vec<_> = n.validate().into_iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::Arity, ViolationKind::Arity, ViolationKind::OutputNotLast]);

        let undriven = Netlist::new("u", ids(&["X"]), vec![], id("V"));
        assert_eq!(undriven.validate()[0].kind, ViolationKind::UndrivenOutput);
    }

    #[test]
    fn evaluate_classical_row() {
        let val = classical().evaluate(&[true, true, false]).unwrap();
        assert_eq!(val.get("N1"), Some(true));
        assert_eq!(val.get("N2"), Some(false));
        assert_eq!(val.get("N3"), Some(false));
        assert_eq!(val.get("V"), Some(true));
        assert_eq!(val.len(), 7);
    }

    #[test]
    fn evaluate_rejects_wrong_width() {
        assert!(matches!(classical().evaluate(&[true, false]), Err(Error::InputWidth { expected: 3, got: 2 })));
    }

    #[test]
    fn inverter_truth_table() {
        let n = Netlist::checked("inv", ids(&["X"]), vec![Gate::new(id("V"), GateKind::Inv, ids(&["X"]))], id("V"))
            .unwrap();
        let outs: Vec<bool> = n.truth_table().unwrap().into_iter().map(|(_, o)| o).collect();
        assert_eq!(outs, vec![true, false]);
    }

    #[test]
    fn internal_nodes_exclude_output() {
        assert_eq!(classical().internal_nodes(), ids(&["N1", "N2", "N3"]));
    }

    /// Each primitive checked against its definition over every input
    /// combination.
    #[test]
    fn gate_semantics_exhaustive() {
        let kinds = [GateKind::And, GateKind::Or, GateKind::Nand, GateKind::Nor, GateKind::Xor, GateKind::Xnor];
        for kind in kinds {
            for arity in 2..=4usize {
                let inputs: Vec<NetId> = (0..arity).map(|i| id(&format!("I{i}"))).collect();
                let n = Netlist::checked("g", inputs.clone(), vec![Gate::new(id("V"), kind.clone(), inputs)], id("V"))
                    .unwrap();
                for (bits, out) in n.truth_table().unwrap() {
                    let and = bits.iter().all(|&b| b);
                    let or = bits.iter().any(|&b| b);
                    let xor = bits.iter().filter(|&&b| b).count() % 2 == 1;
                    let expect = match kind {
                        GateKind::And => and,
                        GateKind::Or => or,
                        GateKind::Nand => !and,
                        GateKind::Nor => !or,
                        GateKind::Xor => xor,
                        GateKind::Xnor => !xor,
                        _ => unreachable!(),
                    };
                    assert_eq!(out, expect, "{kind:?} {bits:?}");
                }
            }
        }

        let mux = Netlist::checked(
            "mux",
            ids(&["S", "A", "B"]),
            vec![Gate::mux(id("V"), id("S"), id("A"), id("B"))],
            id("V"),
        )
        .unwrap();
        for (bits, out) in mux.truth_table().unwrap() {
            assert_eq!(out, if bits[0] { bits[2] } else { bits[1] });
        }
    }

    #[test]
    fn expr_gate_matches_expression_eval() {
        let e = Expr::Or(vec![
            Expr::And(vec![Expr::net("A"), Expr::not(Expr::net("B"))]),
            Expr::Xor(vec![Expr::net("B"), Expr::net("C"), Expr::net("A")]),
        ]);
        let inputs = ids(&["A", "B", "C"]);
        let n = Netlist::checked("e", inputs.clone(), vec![Gate::expr(id("V"), e.clone())], id("V")).unwrap();
        for (bits, out) in n.truth_table().unwrap() {
            let lookup = |net: &NetId| bits[inputs.iter().position(|i| i == net).unwrap()];
            assert_eq!(out, e.eval(&lookup));
        }
    }
}
