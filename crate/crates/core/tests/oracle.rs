//! Independent brute-force oracles checked against the engine.

mod common;

use common::{kp_oracle_assignment, kp_oracle_propagation, naive_tally, random_netlist};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voterlab::fault::{tally, InjectionSemantics, MaxFaults};
use voterlab::metrics::fmr;
use voterlab::{builtin, VoterName};

#[test]
fn kp_oracle_frozen_values() {
    assert_eq!(kp_oracle_assignment(), (120, 88));
    assert_eq!(kp_oracle_propagation(1), (32, 22));
    assert_eq!(kp_oracle_propagation(4), (120, 88));
}

#[test]
fn kp_engine_matches_oracle() {
    let kp = builtin(VoterName::Kp);
    let r = fmr(&kp, InjectionSemantics::Assignment, MaxFaults::All).unwrap();
    assert_eq!((r.faulty, r.masked), kp_oracle_assignment());
    let r = fmr(&kp, InjectionSemantics::Propagation, MaxFaults::Upto(1)).unwrap();
    assert_eq!((r.faulty, r.masked), kp_oracle_propagation(1));
    let r = fmr(&kp, InjectionSemantics::Propagation, MaxFaults::All).unwrap();
    assert_eq!((r.faulty, r.masked), kp_oracle_propagation(4));
}

#[test]
fn builtins_match_naive_simulation() {
    for v in VoterName::ALL {
        let n = builtin(v);
        let nodes = n.internal_nodes().len();
        for sem in [InjectionSemantics::Assignment, InjectionSemantics::Propagation] {
            for max in 1..=nodes {
                let t = tally(&n, sem, MaxFaults::Upto(max)).unwrap();
                assert_eq!((t.faulty(), t.masked()), naive_tally(&n, sem, max), "{v} {sem} {max}");
            }
        }
    }
}

#[test]
fn random_netlists_match_naive_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..60 {
        let n = random_netlist(&mut rng, 9);
        let nodes = n.internal_nodes().len();
        if nodes == 0 {
            continue;
        }
        for sem in [InjectionSemantics::Assignment, InjectionSemantics::Propagation] {
            let all = tally(&n, sem, MaxFaults::All).unwrap();
            assert_eq!((all.faulty(), all.masked()), naive_tally(&n, sem, nodes), "{}", voterlab::dsl::serialize(&n));
            let one = tally(&n, sem, MaxFaults::Upto(1)).unwrap();
            assert_eq!((one.faulty(), one.masked()), naive_tally(&n, sem, 1));
        }
    }
}
