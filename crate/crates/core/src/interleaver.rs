//! Constraint sets for block-permutation (interleaver) workloads.

use thiserror::Error;

use crate::model::{Access, ConstraintSet, Cycle, Port, TimedDatum};

pub const INPUT_PORT: &str = "in";
pub const OUTPUT_PORT: &str = "out";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterleaverSpec {
    pub permutation: Vec<usize>,
    pub input_period: Cycle,
    pub latency: Cycle,
    pub output_period: Cycle,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterleaverError {
    #[error("permutation is not a bijection on [0,{n}): {reason}")]
    NotBijection { n: usize, reason: String },
    #[error("periods must be at least 1 (input {input}, output {output})")]
    ZeroPeriod { input: Cycle, output: Cycle },
    #[error("infeasible latency {latency}: datum {datum} would be read no later than it is written; minimal feasible latency is {min_latency}")]
    Infeasible { latency: Cycle, datum: usize, min_latency: Cycle },
    #[error("bad scheme `{0}`")]
    Scheme(String),
}

impl InterleaverSpec {
    pub fn new(permutation: Vec<usize>, input_period: Cycle, latency: Cycle, output_period: Cycle) -> Self {
        InterleaverSpec { permutation, input_period, latency, output_period }
    }

    pub fn n(&self) -> usize {
        self.permutation.len()
    }

    /// Position of each datum in the output sequence (inverse permutation).
    pub fn ranks(&self) -> Result<Vec<usize>, InterleaverError> {
        let n = self.n();
        let mut rank = vec![usize::MAX; n];
        for (k, &d) in self.permutation.iter().enumerate() {
            if d >= n {
                return Err(InterleaverError::NotBijection { n, reason: format!("entry {d} out of range") });
            }
            if rank[d] != usize::MAX {
                return Err(InterleaverError::NotBijection { n, reason: format!("entry {d} repeated") });
            }
            rank[d] = k;
        }
        Ok(rank)
    }

    /// Smallest latency for which every read is strictly after its write.
    pub fn min_latency(&self) -> Result<Cycle, InterleaverError> {
        let rank = self.ranks()?;
        let worst = rank
            .iter()
            .enumerate()
            .map(|(i, &r)| i as i128 * self.input_period as i128 - r as i128 * self.output_period as i128)
            .max()
            .unwrap_or(0);
        Ok((worst + 1).max(1) as Cycle)
    }

    /// Latency at which reading starts one cycle after the last write, so the
    /// whole frame is resident at once.
    pub fn full_frame_latency(n: usize, input_period: Cycle) -> Cycle {
        (n.saturating_sub(1) as Cycle) * input_period + 1
    }
}

/// Row-write / column-read block interleaver: `pi(i) = (i mod rows)*cols + i div rows`.
pub fn block_permutation(rows: usize, cols: usize) -> Vec<usize> {
    assert!(rows >= 1 && cols >= 1, "block interleaver needs rows, cols >= 1");
    (0..rows * cols).map(|i| (i % rows) * cols + i / rows).collect()
}

pub fn identity_permutation(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Reads a permutation from whitespace- or comma-separated integers.
pub fn parse_permutation(text: &str) -> Result<Vec<usize>, InterleaverError> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| InterleaverError::Scheme(format!("not an index: `{s}`"))))
        .collect()
}

pub fn datum_id(i: usize) -> String {
    format!("d{i}")
}

/// Datum `i` is written at `i * input_period` on the single input port and
/// read on the single output port at `latency + rank(i) * output_period`.
pub fn generate(spec: &InterleaverSpec) -> Result<ConstraintSet, InterleaverError> {
    if spec.input_period == 0 || spec.output_period == 0 {
        return Err(InterleaverError::ZeroPeriod { input: spec.input_period, output: spec.output_period });
    }
    let rank = spec.ranks()?;
    let mut data = Vec::with_capacity(spec.n());
    for (i, &r) in rank.iter().enumerate() {
        let w = i as Cycle * spec.input_period;
        let rd = spec.latency + r as Cycle * spec.output_period;
        if rd <= w {
            return Err(InterleaverError::Infeasible {
                latency: spec.latency,
                datum: i,
                min_latency: spec.min_latency()?,
            });
        }
        data.push(TimedDatum::new(datum_id(i), Access::new(INPUT_PORT, w), vec![Access::new(OUTPUT_PORT, rd)]));
    }
    let cs =
        ConstraintSet::new(vec![Port::input(INPUT_PORT), Port::output(OUTPUT_PORT)], data).with_word_width(Some(1));
    debug_assert!(cs.validate().is_empty());
    Ok(cs)
}
