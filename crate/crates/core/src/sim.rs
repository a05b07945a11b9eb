//! Index-based form of a validated netlist, evaluated 64 scenarios at a time.
//!
//! Each net holds a `u64` word whose bit `l` is the net's value in lane `l`.
//! Slots `0..k` are the primary inputs, slot `k + i` is the output of gate `i`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fault::InjectionSemantics;
use crate::netlist::{Expr, GateKind, NetId, Netlist};

pub(crate) const MAX_INPUTS: usize = 16;
pub(crate) const MAX_INTERNAL: usize = 63;

#[derive(Debug)]
enum Op {
    Inv,
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Mux,
    Expr(SlotExpr),
}

#[derive(Debug)]
enum SlotExpr {
    Slot(usize),
    Not(Box<SlotExpr>),
    And(Vec<SlotExpr>),
    Or(Vec<SlotExpr>),
    Xor(Vec<SlotExpr>),
}

impl SlotExpr {
    fn lower(e: &Expr, slots: &HashMap<&NetId, usize>) -> SlotExpr {
        let all = |es: &[Expr]| es.iter().map(|e| SlotExpr::lower(e, slots)).collect();
        match e {
            Expr::Net(n) => SlotExpr::Slot(slots[n]),
            Expr::Not(e) => SlotExpr::Not(Box::new(SlotExpr::lower(e, slots))),
            Expr::And(es) => SlotExpr::And(all(es)),
            Expr::Or(es) => SlotExpr::Or(all(es)),
            Expr::Xor(es) => SlotExpr::Xor(all(es)),
        }
    }

    fn eval(&self, values: &[u64]) -> u64 {
        match self {
            SlotExpr::Slot(s) => values[*s],
            SlotExpr::Not(e) => !e.eval(values),
            SlotExpr::And(es) => es.iter().fold(!0, |acc, e| acc & e.eval(values)),
            SlotExpr::Or(es) => es.iter().fold(0, |acc, e| acc | e.eval(values)),
            SlotExpr::Xor(es) => es.iter().fold(0, |acc, e| acc ^ e.eval(values)),
        }
    }
}

#[derive(Debug)]
struct SlotGate {
    op: Op,
    args: Vec<usize>,
}

#[derive(Debug)]
pub(crate) struct Circuit {
    inputs: usize,
    gates: Vec<SlotGate>,
}

impl Circuit {
    pub(crate) fn compile(netlist: &Netlist) -> Result<Circuit> {
        let violations = netlist.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidNetlist(violations));
        }
        let k = netlist.primary_inputs().len();
        if k > MAX_INPUTS {
            return Err(Error::TooLarge(format!("{k} primary inputs (limit {MAX_INPUTS})")));
        }
        let internal = netlist.gates().len() - 1;
        if internal > MAX_INTERNAL {
            return Err(Error::TooLarge(format!("{internal} internal nodes (limit {MAX_INTERNAL})")));
        }

        let slots: HashMap<&NetId, usize> = netlist
            .primary_inputs()
            .iter()
            .chain(netlist.gates().iter().map(|g| &g.output))
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        let gates = netlist
            .gates()
            .iter()
            .map(|g| {
                let op = match &g.kind {
                    GateKind::Inv => Op::Inv,
                    GateKind::And => Op::And,
                    GateKind::Or => Op::Or,
                    GateKind::Nand => Op::Nand,
                    GateKind::Nor => Op::Nor,
                    GateKind::Xor => Op::Xor,
                    GateKind::Xnor => Op::Xnor,
                    GateKind::Mux2 => Op::Mux,
                    GateKind::Expr(e) => Op::Expr(SlotExpr::lower(e, &slots)),
                };
                SlotGate { op, args: g.inputs.iter().map(|n| slots[n]).collect() }
            })
            .collect();
        Ok(Circuit { inputs: k, gates })
    }

    pub(crate) fn num_inputs(&self) -> usize {
        self.inputs
    }

    pub(crate) fn num_internal(&self) -> usize {
        self.gates.len() - 1
    }

    pub(crate) fn num_slots(&self) -> usize {
        self.inputs + self.gates.len()
    }

    pub(crate) fn check_width(&self, got: usize) -> Result<()> {
        if got == self.inputs {
            Ok(())
        } else {
            Err(Error::InputWidth { expected: self.inputs, got })
        }
    }

    fn eval_gate(gate: &SlotGate, values: &[u64]) -> u64 {
        let args = gate.args.iter().map(|&s| values[s]);
        match &gate.op {
            Op::Inv => !values[gate.args[0]],
            Op::And => args.fold(!0, |a, b| a & b),
            Op::Nand => !args.fold(!0, |a, b| a & b),
            Op::Or => args.fold(0, |a, b| a | b),
            Op::Nor => !args.fold(0, |a, b| a | b),
            Op::Xor => args.fold(0, |a, b| a ^ b),
            Op::Xnor => !args.fold(0, |a, b| a ^ b),
            Op::Mux => {
                let (sel, a, b) = (values[gate.args[0]], values[gate.args[1]], values[gate.args[2]]);
                (sel & b) | (!sel & a)
            }
            Op::Expr(e) => e.eval(values),
        }
    }

    fn load_inputs(&self, input: u32, values: &mut [u64]) {
        for (i, v) in values[..self.inputs].iter_mut().enumerate() {
            let bit = input >> (self.inputs - 1 - i) & 1;
            *v = if bit == 1 { !0 } else { 0 };
        }
    }

    /// Evaluates all 64 lanes for input vector `input` (first primary input
    /// is the most significant bit). `disturbance[j]` is the lane word for
    /// internal node `j`: forced values under assignment, flip masks under
    /// propagation. Returns the primary output word; `values` receives every
    /// slot.
    pub(crate) fn run(
        &self,
        input: u32,
        semantics: InjectionSemantics,
        disturbance: &[u64],
        values: &mut [u64],
    ) -> u64 {
        debug_assert_eq!(disturbance.len(), self.num_internal());
        debug_assert_eq!(values.len(), self.num_slots());
        self.load_inputs(input, values);
        let n = self.num_internal();
        for (j, gate) in self.gates[..n].iter().enumerate() {
            values[self.inputs + j] = match semantics {
                InjectionSemantics::Assignment => disturbance[j],
                InjectionSemantics::Propagation => Self::eval_gate(gate, values) ^ disturbance[j],
            };
        }
        let out = Self::eval_gate(&self.gates[n], values);
        values[self.inputs + n] = out;
        out
    }

    /// Fault-free evaluation; returns every slot value.
    pub(crate) fn evaluate(&self, inputs: &[bool]) -> Vec<bool> {
        let input = inputs.iter().fold(0u32, |acc, &b| acc << 1 | b as u32);
        let words = self.fault_free_words(input);
        words.iter().map(|w| w & 1 == 1).collect()
    }

    pub(crate) fn fault_free_words(&self, input: u32) -> Vec<u64> {
        let mut values = vec![0; self.num_slots()];
        let flips = vec![0; self.num_internal()];
        self.run(input, InjectionSemantics::Propagation, &flips, &mut values);
        values
    }

    /// Fault-free internal node values packed as a mask (bit `j` = node `j`)
    /// plus the fault-free output.
    pub(crate) fn fault_free_mask(&self, input: u32) -> (u64, bool) {
        let words = self.fault_free_words(input);
        let n = self.num_internal();
        let mask = (0..n).fold(0u64, |m, j| m | (words[self.inputs + j] & 1) << j);
        (mask, words[self.inputs + n] & 1 == 1)
    }
}
