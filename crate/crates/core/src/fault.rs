//! Exhaustive injection of internal faults, joint with external
//! (function-module) fault labelling.
//!
//! A scenario disturbs the internal nodes of a netlist under one of two
//! semantics:
//!
//! - **Assignment**: every internal node is forced to a chosen bit. Gates see
//!   the forced values, so only the output gate is recomputed.
//! - **Propagation**: a set of nodes is flipped. Nodes are evaluated in
//!   topological order from (possibly disturbed) upstream values and then
//!   inverted when they are flip sites.
//!
//! Internally a scenario is a *disturbance mask* with bit `j` standing for
//! internal node `j`: the forced bits under assignment, the flip set under
//! propagation. Row order uses the *encoding* of that mask, which puts the
//! first internal node in the most significant position.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{input_bits, NetId, Netlist};
use crate::sim::Circuit;

/// Upper bound on rows materialised by [`enumerate`].
pub const MAX_ROWS: u128 = 1 << 24;
/// Upper bound on scenarios evaluated by [`tally`].
pub const MAX_TALLY_SCENARIOS: u128 = 1 << 36;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InjectionSemantics {
    Assignment,
    Propagation,
}

impl InjectionSemantics {
    pub fn as_str(self) -> &'static str {
        match self {
            InjectionSemantics::Assignment => "assignment",
            InjectionSemantics::Propagation => "propagation",
        }
    }
}

impl fmt::Display for InjectionSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InjectionSemantics {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "assign" | "assignment" => Ok(InjectionSemantics::Assignment),
            "propagate" | "propagation" => Ok(InjectionSemantics::Propagation),
            other => Err(format!("unknown semantics `{other}` (expected assign or propagate)")),
        }
    }
}

/// Largest number of simultaneously disturbed internal nodes to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaxFaults {
    All,
    /// Must be at least 1; zero is rejected when used.
    Upto(usize),
}

impl MaxFaults {
    fn resolve(self, nodes: usize) -> Result<usize> {
        match self {
            MaxFaults::All => Ok(nodes),
            MaxFaults::Upto(0) => Err(Error::ZeroMaxFaults),
            MaxFaults::Upto(c) => Ok(c.min(nodes)),
        }
    }
}

impl fmt::Display for MaxFaults {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFaults::All => f.write_str("all"),
            MaxFaults::Upto(c) => write!(f, "{c}"),
        }
    }
}

impl FromStr for MaxFaults {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(MaxFaults::All);
        }
        s.parse::<usize>()
            .map(MaxFaults::Upto)
            .map_err(|_| format!("expected a non-negative integer or `all`, got `{s}`"))
    }
}

impl Serialize for MaxFaults {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MaxFaults::All => s.serialize_str("all"),
            MaxFaults::Upto(c) => s.serialize_u64(*c as u64),
        }
    }
}

impl<'de> Deserialize<'de> for MaxFaults {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(c) => Ok(MaxFaults::Upto(c)),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaultDirection {
    ZeroToOne,
    OneToZero,
}

impl FaultDirection {
    /// Direction of a disturbance that leaves the node at `bit`.
    pub fn into_bit(bit: bool) -> FaultDirection {
        if bit {
            FaultDirection::ZeroToOne
        } else {
            FaultDirection::OneToZero
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            FaultDirection::ZeroToOne => "0→1",
            FaultDirection::OneToZero => "1→0",
        }
    }

    pub fn ascii(self) -> &'static str {
        match self {
            FaultDirection::ZeroToOne => "0->1",
            FaultDirection::OneToZero => "1->0",
        }
    }
}

/// Function-module fault status implied by the voter's input vector: only
/// all-zero and all-one vectors are codewords.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExternalFaultLabel {
    NoModuleFault,
    ModuleFaults,
}

impl ExternalFaultLabel {
    pub fn of(input: &[bool]) -> ExternalFaultLabel {
        if input.iter().all(|&b| b) || input.iter().all(|&b| !b) {
            ExternalFaultLabel::NoModuleFault
        } else {
            ExternalFaultLabel::ModuleFaults
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            ExternalFaultLabel::NoModuleFault => "No function module fault/failure",
            ExternalFaultLabel::ModuleFaults => "Single/multiple function module faults/failures",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowState {
    Actual,
    Correct,
    Error,
}

impl RowState {
    pub fn as_str(self) -> &'static str {
        match self {
            RowState::Actual => "Actual",
            RowState::Correct => "Correct",
            RowState::Error => "Error",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeValue {
    pub bit: bool,
    pub fault: Option<FaultDirection>,
}

/// Net names shared by all rows of one enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RowSchema {
    pub netlist: String,
    pub inputs: Vec<NetId>,
    pub internal: Vec<NetId>,
    pub output: NetId,
}

impl RowSchema {
    fn of(netlist: &Netlist) -> RowSchema {
        RowSchema {
            netlist: netlist.name().to_string(),
            inputs: netlist.primary_inputs().to_vec(),
            internal: netlist.internal_nodes(),
            output: netlist.output().clone(),
        }
    }
}

/// One line of a truth-cum-fault enumeration table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationRow {
    pub schema: Arc<RowSchema>,
    pub semantics: InjectionSemantics,
    pub input: Vec<bool>,
    pub internal: Vec<NodeValue>,
    pub output: bool,
    pub state: RowState,
    pub external: ExternalFaultLabel,
    /// Number of disturbed internal nodes.
    pub cardinality: usize,
}

/// A disturbance of the internal nodes, addressed by net name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaultScenario {
    /// Forced bit for every internal node.
    Assignment(Vec<(String, bool)>),
    /// Nodes to invert after evaluation.
    Propagation(Vec<String>),
}

impl FaultScenario {
    pub fn assignment<S: AsRef<str>>(forced: impl IntoIterator<Item = (S, bool)>) -> FaultScenario {
        FaultScenario::Assignment(forced.into_iter().map(|(n, b)| (n.as_ref().to_string(), b)).collect())
    }

    pub fn flips<S: AsRef<str>>(sites: impl IntoIterator<Item = S>) -> FaultScenario {
        FaultScenario::Propagation(sites.into_iter().map(|s| s.as_ref().to_string()).collect())
    }

    pub fn semantics(&self) -> InjectionSemantics {
        match self {
            FaultScenario::Assignment(_) => InjectionSemantics::Assignment,
            FaultScenario::Propagation(_) => InjectionSemantics::Propagation,
        }
    }

    fn mask(&self, internal: &[NetId]) -> Result<u64> {
        let index = |name: &str| {
            internal.iter().position(|n| n.as_str() == name).ok_or_else(|| Error::UnknownSite(name.to_string()))
        };
        let mut mask = 0u64;
        match self {
            FaultScenario::Assignment(forced) => {
                let mut covered = 0u64;
                for (name, bit) in forced {
                    let j = index(name)?;
                    covered |= 1 << j;
                    mask = (mask & !(1 << j)) | (*bit as u64) << j;
                }
                if let Some(j) = (0..internal.len()).find(|j| covered >> j & 1 == 0) {
                    return Err(Error::IncompleteAssignment(internal[j].to_string()));
                }
            }
            FaultScenario::Propagation(sites) => {
                for name in sites {
                    mask |= 1 << index(name)?;
                }
            }
        }
        Ok(mask)
    }
}

/// Fault-free values of the internal nodes for one input vector.
pub fn fault_free_internal(netlist: &Netlist, input: &[bool]) -> Result<Vec<bool>> {
    let circuit = Circuit::compile(netlist)?;
    circuit.check_width(input.len())?;
    let all = circuit.evaluate(input);
    Ok(all[input.len()..input.len() + circuit.num_internal()].to_vec())
}

/// Evaluates one scenario for one input vector.
pub fn apply_scenario(netlist: &Netlist, input: &[bool], scenario: &FaultScenario) -> Result<EnumerationRow> {
    let engine = Engine::new(netlist)?;
    engine.circuit.check_width(input.len())?;
    let mask = scenario.mask(&engine.schema.internal)?;
    let index = input.iter().fold(0u32, |acc, &b| acc << 1 | b as u32);
    let mut rows = engine.rows_for(index, scenario.semantics(), &[mask]);
    Ok(rows.remove(0))
}

/// Every scenario with at most `max` disturbed nodes, for every input vector.
///
/// Rows are grouped by input vector in ascending binary order. Each group
/// starts with the Actual row, followed by the faulty scenarios in ascending
/// cardinality, ties broken by ascending disturbance encoding.
pub fn enumerate(netlist: &Netlist, semantics: InjectionSemantics, max: MaxFaults) -> Result<Vec<EnumerationRow>> {
    let engine = Engine::new(netlist)?;
    let n = engine.circuit.num_internal();
    let limit = max.resolve(n)?;
    let per_input: u128 = (0..=limit).map(|i| binomial(n, i)).sum();
    let total = per_input << engine.circuit.num_inputs();
    if total > MAX_ROWS {
        return Err(Error::TooLarge(format!("enumerating {total} rows")));
    }
    let groups: Vec<Vec<EnumerationRow>> = (0..engine.num_vectors())
        .into_par_iter()
        .map(|input| {
            let (ff, _) = engine.circuit.fault_free_mask(input);
            let actual = match semantics {
                InjectionSemantics::Assignment => ff,
                InjectionSemantics::Propagation => 0,
            };
            let mut masks = vec![actual];
            masks.extend(ordered_disturbances(n, ff, semantics, limit));
            engine.rows_for(input, semantics, &masks)
        })
        .collect();
    Ok(groups.into_iter().flatten().collect())
}

/// Faulty and masked scenario counts for one input vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputTally {
    /// Input vector, first primary input as the most significant bit.
    pub input: u32,
    pub faulty: u64,
    pub masked: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tally {
    pub width: usize,
    pub per_input: Vec<InputTally>,
}

impl Tally {
    pub fn faulty(&self) -> u64 {
        self.per_input.iter().map(|t| t.faulty).sum()
    }

    pub fn masked(&self) -> u64 {
        self.per_input.iter().map(|t| t.masked).sum()
    }
}

/// Counts faulty (non-Actual) and masked (Correct) scenarios without
/// materialising rows. Agrees with tallying the states of [`enumerate`].
pub fn tally(netlist: &Netlist, semantics: InjectionSemantics, max: MaxFaults) -> Result<Tally> {
    let engine = Engine::new(netlist)?;
    let n = engine.circuit.num_internal();
    let limit = max.resolve(n)?;
    let per_input: u128 = (0..=limit).map(|i| binomial(n, i)).sum();
    let total = per_input << engine.circuit.num_inputs();
    if total > MAX_TALLY_SCENARIOS {
        return Err(Error::TooLarge(format!("tallying {total} scenarios")));
    }
    let per_input =
        (0..engine.num_vectors())
            .into_par_iter()
            .map(|input| {
                if limit == n {
                    engine.tally_all(input, semantics)
                } else {
                    engine.tally_listed(input, semantics, limit)
                }
            })
            .collect();
    Ok(Tally { width: engine.circuit.num_inputs(), per_input })
}

struct Engine {
    circuit: Circuit,
    schema: Arc<RowSchema>,
}

/// Lane word for node `j` when lane `l` carries disturbance mask `base + l`.
const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

impl Engine {
    fn new(netlist: &Netlist) -> Result<Engine> {
        let circuit = Circuit::compile(netlist)?;
        Ok(Engine { circuit, schema: Arc::new(RowSchema::of(netlist)) })
    }

    fn num_vectors(&self) -> u32 {
        1 << self.circuit.num_inputs()
    }

    fn rows_for(&self, input: u32, semantics: InjectionSemantics, masks: &[u64]) -> Vec<EnumerationRow> {
        let k = self.circuit.num_inputs();
        let n = self.circuit.num_internal();
        let (ff, ff_out) = self.circuit.fault_free_mask(input);
        let bits = input_bits(input, k);
        let external = ExternalFaultLabel::of(&bits);
        let mut values = vec![0u64; self.circuit.num_slots()];
        let mut rows = Vec::with_capacity(masks.len());
        for chunk in masks.chunks(64) {
            let words = transpose(chunk, n);
            let out = self.circuit.run(input, semantics, &words, &mut values);
            for (lane, &mask) in chunk.iter().enumerate() {
                let internal: Vec<NodeValue> = (0..n)
                    .map(|j| {
                        let bit = values[k + j] >> lane & 1 == 1;
                        let injected = match semantics {
                            InjectionSemantics::Assignment => (mask ^ ff) >> j & 1 == 1,
                            InjectionSemantics::Propagation => mask >> j & 1 == 1,
                        };
                        NodeValue { bit, fault: injected.then(|| FaultDirection::into_bit(bit)) }
                    })
                    .collect();
                let cardinality = match semantics {
                    InjectionSemantics::Assignment => (mask ^ ff).count_ones(),
                    InjectionSemantics::Propagation => mask.count_ones(),
                } as usize;
                let output = out >> lane & 1 == 1;
                let state = if cardinality == 0 {
                    RowState::Actual
                } else if output == ff_out {
                    RowState::Correct
                } else {
                    RowState::Error
                };
                rows.push(EnumerationRow {
                    schema: Arc::clone(&self.schema),
                    semantics,
                    input: bits.clone(),
                    internal,
                    output,
                    state,
                    external,
                    cardinality,
                });
            }
        }
        rows
    }

    /// Every one of the `2^n` disturbance masks, 64 lanes at a time.
    fn tally_all(&self, input: u32, semantics: InjectionSemantics) -> InputTally {
        let n = self.circuit.num_internal();
        let (ff, ff_out) = self.circuit.fault_free_mask(input);
        let actual = match semantics {
            InjectionSemantics::Assignment => ff,
            InjectionSemantics::Propagation => 0,
        };
        let expected = if ff_out { !0u64 } else { 0 };
        let count: u64 = 1 << n;
        let valid_lanes = if count >= 64 { !0u64 } else { (1u64 << count) - 1 };
        let mut values = vec![0u64; self.circuit.num_slots()];
        let mut words = vec![0u64; n];
        let (mut faulty, mut masked) = (0u64, 0u64);
        let mut base = 0u64;
        while base < count {
            for (j, w) in words.iter_mut().enumerate() {
                *w = if j < 6 {
                    LANE_PATTERNS[j]
                } else if base >> j & 1 == 1 {
                    !0
                } else {
                    0
                };
            }
            let out = self.circuit.run(input, semantics, &words, &mut values);
            let mut lanes = valid_lanes;
            if actual >= base && actual - base < 64 {
                lanes &= !(1u64 << (actual - base));
            }
            faulty += lanes.count_ones() as u64;
            masked += (!(out ^ expected) & lanes).count_ones() as u64;
            base += 64;
        }
        InputTally { input, faulty, masked }
    }

    fn tally_listed(&self, input: u32, semantics: InjectionSemantics, limit: usize) -> InputTally {
        let n = self.circuit.num_internal();
        let (ff, ff_out) = self.circuit.fault_free_mask(input);
        let expected = if ff_out { !0u64 } else { 0 };
        let masks = ordered_disturbances(n, ff, semantics, limit);
        let mut values = vec![0u64; self.circuit.num_slots()];
        let (mut faulty, mut masked) = (0u64, 0u64);
        for chunk in masks.chunks(64) {
            let words = transpose(chunk, n);
            let out = self.circuit.run(input, semantics, &words, &mut values);
            let lanes = if chunk.len() == 64 { !0u64 } else { (1u64 << chunk.len()) - 1 };
            faulty += chunk.len() as u64;
            masked += (!(out ^ expected) & lanes).count_ones() as u64;
        }
        InputTally { input, faulty, masked }
    }
}

/// Lane words for up to 64 disturbance masks: bit `l` of word `j` is bit `j`
/// of `masks[l]`.
fn transpose(masks: &[u64], n: usize) -> Vec<u64> {
    let mut words = vec![0u64; n];
    for (lane, &mask) in masks.iter().enumerate() {
        let mut m = mask;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            words[j] |= 1 << lane;
            m &= m - 1;
        }
    }
    words
}

/// Reverses the low `n` bits, mapping node `j` to position `n - 1 - j`.
fn encode(mask: u64, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - n)
    }
}

/// Ascending `n`-bit values with exactly `c` bits set.
fn combinations(n: usize, c: usize) -> impl Iterator<Item = u64> {
    let end: u128 = 1u128 << n;
    let start: u64 = if c == 0 { 0 } else { u64::MAX >> (64 - c) };
    let mut next = Some(start).filter(|&s| (s as u128) < end);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let low = cur & cur.wrapping_neg();
            let ripple = cur as u128 + low as u128;
            let succ = (((ripple as u64 ^ cur) >> 2) / low) as u128 | ripple;
            (succ < end).then_some(succ as u64)
        };
        Some(cur)
    })
}

/// Non-actual disturbance masks with cardinality `1..=limit`, in canonical
/// row order.
fn ordered_disturbances(n: usize, ff: u64, semantics: InjectionSemantics, limit: usize) -> Vec<u64> {
    let mut out = Vec::new();
    for c in 1..=limit {
        match semantics {
            InjectionSemantics::Propagation => out.extend(combinations(n, c).map(|e| encode(e, n))),
            InjectionSemantics::Assignment => {
                let ff_enc = encode(ff, n);
                let mut forced: Vec<u64> = combinations(n, c).map(|e| e ^ ff_enc).collect();
                forced.sort_unstable();
                out.extend(forced.into_iter().map(|f| encode(f, n)));
            }
        }
    }
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
