//! Shared fixtures for the criterion benches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kc_core::families::{gen, Family};
use kc_core::random::random_dnnf;
use kc_core::{compile, NnfCircuit, Sdd, Var, Vtree, VtreeShape};

pub fn family_circuit(family: Family) -> NnfCircuit {
    gen(family).expect("valid family").circuit
}

pub fn balanced_vtree(n: u32) -> Vtree {
    let vars: Vec<Var> = (1..=n).collect();
    Vtree::build(&vars, VtreeShape::Balanced).expect("nonempty")
}

pub fn compiled(family: Family) -> Sdd {
    let c = family_circuit(family);
    compile(&c, &balanced_vtree(c.var_count())).expect("compiles")
}

/// Seeded batch of random DNNFs over at most `vars` variables.
pub fn dnnf_batch(seed: u64, count: usize, vars: u32, max_nodes: usize) -> Vec<NnfCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_dnnf(&mut rng, vars, max_nodes)).collect()
}
