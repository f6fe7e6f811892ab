//! Ready-made constraint sets: a small reordering example and seeded random
//! single-read workloads.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ConstraintSet, Cycle, Port, TimedDatum};

/// Six data produced in order (a, c, b, e, f, d) and consumed in order
/// (c, a, e, b, d, f) over one point-to-point link.
pub fn six_datum_reorder() -> ConstraintSet {
    let data = [("a", 0, 3), ("c", 1, 2), ("b", 2, 5), ("e", 3, 4), ("f", 4, 7), ("d", 5, 6)]
        .into_iter()
        .map(|(id, w, r)| TimedDatum::single(id, "in", w, "out", r))
        .collect();
    ConstraintSet::new(vec![Port::input("in"), Port::output("out")], data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomConfig {
    pub n: usize,
    pub inputs: usize,
    pub outputs: usize,
    /// Largest gap between consecutive write cycles.
    pub max_write_gap: Cycle,
    /// Largest lifetime (write to read distance).
    pub max_lifetime: Cycle,
}

impl RandomConfig {
    /// Port counts, gaps and lifetimes drawn from the seed.
    pub fn from_seed(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
        RandomConfig {
            n,
            inputs: rng.gen_range(1..=3),
            outputs: rng.gen_range(1..=3),
            max_write_gap: rng.gen_range(0..=3),
            max_lifetime: rng.gen_range(1..=(2 * n as Cycle).max(2)),
        }
    }
}

/// Valid single-read constraint set; deterministic in `(config, seed)`.
pub fn random_constraints_with(cfg: &RandomConfig, seed: u64) -> ConstraintSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<String> = (0..cfg.inputs.max(1)).map(|i| format!("i{i}")).collect();
    let outputs: Vec<String> = (0..cfg.outputs.max(1)).map(|i| format!("o{i}")).collect();
    let mut used: HashSet<(usize, Cycle, bool)> = HashSet::new();
    let mut cursor: Cycle = 0;
    let mut data = Vec::with_capacity(cfg.n);
    for k in 0..cfg.n {
        cursor += rng.gen_range(0..=cfg.max_write_gap);
        let (wp, wt) = loop {
            let p = rng.gen_range(0..inputs.len());
            if used.insert((p, cursor, true)) {
                break (p, cursor);
            }
            if (0..inputs.len()).all(|q| used.contains(&(q, cursor, true))) {
                cursor += 1;
            }
        };
        let mut rt = wt + rng.gen_range(1..=cfg.max_lifetime.max(1));
        let rp = loop {
            let p = rng.gen_range(0..outputs.len());
            if used.insert((p, rt, false)) {
                break p;
            }
            if (0..outputs.len()).all(|q| used.contains(&(q, rt, false))) {
                rt += 1;
            }
        };
        data.push(TimedDatum::single(format!("x{k}"), inputs[wp].clone(), wt, outputs[rp].clone(), rt));
    }
    let ports = inputs.iter().map(Port::input).chain(outputs.iter().map(Port::output)).collect();
    let cs = ConstraintSet::new(ports, data);
    debug_assert!(cs.validate().is_empty());
    cs
}

pub fn random_constraints(n: usize, seed: u64) -> ConstraintSet {
    random_constraints_with(&RandomConfig::from_seed(n, seed), seed)
}
