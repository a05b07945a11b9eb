#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use voterlab::fault::InjectionSemantics;
use voterlab::{Expr, Gate, GateKind, NetId, Netlist};

pub fn id(s: &str) -> NetId {
    NetId::new(s).unwrap()
}

pub fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

fn random_expr(rng: &mut impl Rng, nets: &[NetId], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.35) {
        return Expr::Net(nets[rng.gen_range(0..nets.len())].clone());
    }
    let op = rng.gen_range(0..4);
    if op == 0 {
        return Expr::not(random_expr(rng, nets, depth - 1));
    }
    let width = rng.gen_range(2..=3);
    let operands = (0..width).map(|_| random_expr(rng, nets, depth - 1)).collect();
    match op {
        1 => Expr::And(operands),
        2 => Expr::Or(operands),
        _ => Expr::Xor(operands),
    }
}

/// Random well-formed netlist with 1..=4 inputs and at most `max_gates`
/// gates (the last one drives the output).
pub fn random_netlist(rng: &mut impl Rng, max_gates: usize) -> Netlist {
    let k = rng.gen_range(1..=4);
    let inputs: Vec<NetId> = (0..k).map(|i| id(&format!("{}{i}", ["X", "in", "A_"][i % 3]))).collect();
    let gates_n = rng.gen_range(1..=max_gates);
    let mut nets = inputs.clone();
    let mut gates = Vec::new();
    for g in 0..gates_n {
        let out = if g + 1 == gates_n { id("OUT") } else { id(&format!("n{g}")) };
        let choice = rng.gen_range(0..9);
        let arity = match choice {
            0 => 1,
            1 | 2 => rng.gen_range(2..=4),
            7 => 3,
            _ => rng.gen_range(2..=3),
        };
        let args: Vec<NetId> = (0..arity).map(|_| nets[rng.gen_range(0..nets.len())].clone()).collect();
        let gate = match choice {
            0 => Gate::new(out.clone(), GateKind::Inv, args),
            1 => Gate::new(out.clone(), GateKind::And, args),
            2 => Gate::new(out.clone(), GateKind::Or, args),
            3 => Gate::new(out.clone(), GateKind::Nand, args),
            4 => Gate::new(out.clone(), GateKind::Nor, args),
            5 => Gate::new(out.clone(), GateKind::Xor, args),
            6 => Gate::new(out.clone(), GateKind::Xnor, args),
            7 => Gate::mux(out.clone(), args[0].clone(), args[1].clone(), args[2].clone()),
            _ => Gate::expr(out.clone(), random_expr(rng, &nets, 3)),
        };
        gates.push(gate);
        nets.push(out);
    }
    Netlist::checked(format!("rand{gates_n}"), inputs, gates, id("OUT")).unwrap()
}

/// Straight-line scalar simulation by net name, used as an oracle for the
/// bit-parallel engine. `disturb(j, computed)` returns the value of internal
/// node `j`.
pub fn naive_eval(
    netlist: &Netlist,
    input: &[bool],
    mut disturb: impl FnMut(usize, bool) -> bool,
) -> (Vec<bool>, bool) {
    let mut val: HashMap<NetId, bool> = netlist.primary_inputs().iter().cloned().zip(input.iter().copied()).collect();
    let mut internal = Vec::new();
    let last = netlist.gates().len() - 1;
    for (j, g) in netlist.gates().iter().enumerate() {
        let args: Vec<bool> = g.inputs.iter().map(|n| val[n]).collect();
        let computed = match &g.kind {
            GateKind::Inv => !args[0],
            GateKind::And => args.iter().all(|&b| b),
            GateKind::Or => args.iter().any(|&b| b),
            GateKind::Nand => !args.iter().all(|&b| b),
            GateKind::Nor => !args.iter().any(|&b| b),
            GateKind::Xor => args.iter().filter(|&&b| b).count() % 2 == 1,
            GateKind::Xnor => args.iter().filter(|&&b| b).count() % 2 == 0,
            GateKind::Mux2 => {
                if args[0] {
                    args[2]
                } else {
                    args[1]
                }
            }
            GateKind::Expr(e) => e.eval(&|n: &NetId| val[n]),
        };
        let v = if j == last { computed } else { disturb(j, computed) };
        if j != last {
            internal.push(v);
        }
        val.insert(g.output.clone(), v);
    }
    (internal, val[netlist.output()])
}

/// (faulty, masked) over every scenario with 1..=max disturbed nodes,
/// computed by brute force.
pub fn naive_tally(netlist: &Netlist, semantics: InjectionSemantics, max: usize) -> (u64, u64) {
    let k = netlist.primary_inputs().len();
    let n = netlist.internal_nodes().len();
    let (mut p, mut q) = (0, 0);
    for v in 0..1u32 << k {
        let input: Vec<bool> = (0..k).rev().map(|i| v >> i & 1 == 1).collect();
        let (ff, ff_out) = naive_eval(netlist, &input, |_, c| c);
        for d in 0..1u64 << n {
            let (out, card) = match semantics {
                InjectionSemantics::Assignment => {
                    let card = (0..n).filter(|&j| (d >> j & 1 == 1) != ff[j]).count();
                    (naive_eval(netlist, &input, |j, _| d >> j & 1 == 1).1, card)
                }
                InjectionSemantics::Propagation => {
                    (naive_eval(netlist, &input, |j, c| c ^ (d >> j & 1 == 1)).1, d.count_ones() as usize)
                }
            };
            if card == 0 || card > max {
                continue;
            }
            p += 1;
            q += (out == ff_out) as u64;
        }
    }
    (p, q)
}

/// Truth-table walk for the KP voter with its gates written out by hand:
/// N1 = X^Y, N2 = Y^Z, N3 = !N2, P = N1&N3, V = P ? Z : X. Under assignment
/// only the forced P reaches the output MUX.
pub fn kp_oracle_assignment() -> (u64, u64) {
    let (mut p, mut q) = (0, 0);
    for v in 0..8u8 {
        let (x, y, z) = (v >> 2 & 1 == 1, v >> 1 & 1 == 1, v & 1 == 1);
        let n1 = x ^ y;
        let n2 = y ^ z;
        let n3 = !n2;
        let pp = n1 & n3;
        let fault_free = [n1, n2, n3, pp];
        let v_ok = if pp { z } else { x };
        for a in 0..16u8 {
            let forced = [a >> 3 & 1 == 1, a >> 2 & 1 == 1, a >> 1 & 1 == 1, a & 1 == 1];
            if forced == fault_free {
                continue;
            }
            let out = if forced[3] { z } else { x };
            p += 1;
            q += (out == v_ok) as u64;
        }
    }
    (p, q)
}

pub fn kp_oracle_propagation(max: u32) -> (u64, u64) {
    let (mut p, mut q) = (0, 0);
    for v in 0..8u8 {
        let (x, y, z) = (v >> 2 & 1 == 1, v >> 1 & 1 == 1, v & 1 == 1);
        let v_ok = if (x ^ y) & !(y ^ z) { z } else { x };
        for f in 1..16u8 {
            if f.count_ones() > max {
                continue;
            }
            let flip = |i: u8| f >> (3 - i) & 1 == 1;
            let n1 = (x ^ y) ^ flip(0);
            let n2 = (y ^ z) ^ flip(1);
            let n3 = !n2 ^ flip(2);
            let pp = (n1 & n3) ^ flip(3);
            let out = if pp { z } else { x };
            p += 1;
            q += (out == v_ok) as u64;
        }
    }
    (p, q)
}
