//! Reference implementations used as test oracles. Written from the
//! behavioural definitions (what a FIFO/LIFO/register would replay), not
//! from the library's predicates.

#![allow(dead_code)]

use std::collections::VecDeque;

use star::graph::Label;
use star::model::{ConstraintSet, Cycle, TimedDatum};

/// Label a pair by asking which single storage element could carry both.
///
/// Two data fit one register if their residencies `[write, read)` never
/// overlap. Otherwise they share a queue if they leave in arrival order and
/// a stack if they leave in reverse order. A single element accepts one
/// write and serves one read per cycle.
pub fn oracle_label(a: &TimedDatum, b: &TimedDatum) -> Option<Label> {
    let (wa, ra) = (a.write.t, a.reads[0].t);
    let (wb, rb) = (b.write.t, b.reads[0].t);
    if wa == wb {
        return None;
    }
    let overlap = wa < rb && wb < ra;
    if !overlap {
        return Some(Label::Register);
    }
    let (first, second) = if wa < wb { ((wa, ra), (wb, rb)) } else { ((wb, rb), (wa, ra)) };
    if first.1 == second.1 {
        None
    } else if first.1 < second.1 {
        replay(&[first, second], false).then_some(Label::Fifo)
    } else {
        replay(&[first, second], true).then_some(Label::Lifo)
    }
}

/// Replays (write, read) pairs through one queue or stack and reports
/// whether every read gets the datum it expects. Reads run before writes
/// within a cycle.
pub fn replay(items: &[(Cycle, Cycle)], stack: bool) -> bool {
    let end = items.iter().map(|&(_, r)| r).max().unwrap_or(0);
    let mut store: VecDeque<usize> = VecDeque::new();
    for t in 0..=end {
        let mut readers: Vec<usize> = (0..items.len()).filter(|&i| items[i].1 == t).collect();
        if readers.len() > 1 {
            return false;
        }
        if let Some(i) = readers.pop() {
            let got = if stack { store.pop_back() } else { store.pop_front() };
            if got != Some(i) {
                return false;
            }
        }
        let writers: Vec<usize> = (0..items.len()).filter(|&i| items[i].0 == t).collect();
        if writers.len() > 1 {
            return false;
        }
        store.extend(writers);
    }
    store.is_empty()
}

/// Peak residency by scanning every cycle.
pub fn brute_occupancy<'a>(data: impl IntoIterator<Item = &'a TimedDatum>) -> usize {
    let spans: Vec<(Cycle, Cycle)> = data.into_iter().map(|d| (d.tau_min(), d.tau_max())).collect();
    let end = spans.iter().map(|s| s.1).max().unwrap_or(0);
    (0..=end).map(|t| spans.iter().filter(|&&(w, r)| w <= t && t < r).count()).max().unwrap_or(0)
}

/// Cells needed by one element holding `group`, or `None` if no sequence of
/// FIFO/LIFO/register behaviours can carry it. The group is split into busy
/// periods (maximal runs of overlapping residency); each must replay as a
/// queue or as a stack.
pub fn group_cost(group: &[&TimedDatum]) -> Option<usize> {
    let mut items: Vec<(Cycle, Cycle)> = group.iter().map(|d| (d.tau_min(), d.tau_max())).collect();
    items.sort();
    let mut periods: Vec<Vec<(Cycle, Cycle)>> = Vec::new();
    let mut horizon = 0;
    for it in items {
        match periods.last_mut() {
            Some(p) if it.0 < horizon => {
                p.push(it);
                horizon = horizon.max(it.1);
            }
            _ => {
                periods.push(vec![it]);
                horizon = it.1;
            }
        }
    }
    let mut peak = 0;
    for p in &periods {
        if !replay(p, false) && !replay(p, true) {
            return None;
        }
        let end = p.iter().map(|x| x.1).max().unwrap_or(0);
        let occ = (0..=end).map(|t| p.iter().filter(|&&(w, r)| w <= t && t < r).count()).max().unwrap_or(0);
        peak = peak.max(occ);
    }
    Some(peak)
}

/// Fewest cells over every partition of the data into elements.
pub fn exhaustive_min_cells(cs: &ConstraintSet) -> usize {
    fn go(data: &[TimedDatum], i: usize, blocks: &mut Vec<Vec<usize>>, best: &mut usize) {
        let cost_so_far: usize = blocks
            .iter()
            .map(|b| {
                let g: Vec<&TimedDatum> = b.iter().map(|&k| &data[k]).collect();
                group_cost(&g).unwrap_or(usize::MAX / 64)
            })
            .sum();
        if cost_so_far >= *best {
            return;
        }
        if i == data.len() {
            *best = cost_so_far;
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            go(data, i + 1, blocks, best);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        go(data, i + 1, blocks, best);
        blocks.pop();
    }
    let mut best = usize::MAX;
    go(cs.data(), 0, &mut Vec::new(), &mut best);
    best
}
