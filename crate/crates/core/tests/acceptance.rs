//! Acceptance criteria. Each test writes one `[PASS]`/`[FAIL]` line to
//! stderr (bypassing the test harness capture) before asserting.

mod common;

use std::io::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use star::allocation::{Kind, Weights};
use star::graph::{build_graph, classify_pair, Compat, Label};
use star::interleaver::{block_permutation, generate, InterleaverSpec};
use star::model::{serialize_constraints, Cycle, TimedDatum};
use star::pipeline::{synthesize, write_report};
use star::sim::simulate;
use star::structure::{fifo_depth, lifo_depth, longest_paths, occupancy_oracle, StructPath};
use star::workload::{random_constraints, six_datum_reorder};

use common::{brute_occupancy, exhaustive_min_cells, oracle_label};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "[{tag}] criterion {id}: {name}: {detail}");
}

fn datum(id: &str, w: Cycle, r: Cycle) -> TimedDatum {
    TimedDatum::single(id, "in", w, "out", r)
}

fn random_datum(rng: &mut ChaCha8Rng, id: &str, horizon: Cycle, max_life: Cycle) -> TimedDatum {
    let w = rng.gen_range(0..horizon);
    datum(id, w, w + rng.gen_range(1..=max_life))
}

#[test]
fn c1_pair_rule_conformance() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    let mut seen = [0usize; 4];
    for k in 0..10_000 {
        let x = random_datum(&mut rng, "x", 24, 16);
        let y = random_datum(&mut rng, "y", 24, 16);
        let (a, b) = if x.tau_min() <= y.tau_min() { (x, y) } else { (y, x) };
        let (amin, afirst, amax) = (a.tau_min(), a.tau_first(), a.tau_max());
        let (bmin, bfirst, bmax) = (b.tau_min(), b.tau_first(), b.tau_max());
        let rule_r = bmin >= amax;
        let rule_f = amin < bmin && bmin < amax && bfirst > amax;
        let rule_l = amin < bmin && bmin < amax && afirst > bmax;
        let holding = [rule_r, rule_f, rule_l].iter().filter(|&&h| h).count();
        let got = classify_pair(&a, &b).expect("ordered pair");
        let ok = holding <= 1
            && match got {
                Compat::Edge(Label::Register) => rule_r,
                Compat::Edge(Label::Fifo) => rule_f,
                Compat::Edge(Label::Lifo) => rule_l,
                Compat::Incompatible => holding == 0,
            }
            && got.label() == oracle_label(&a, &b);
        seen[match got {
            Compat::Edge(Label::Register) => 0,
            Compat::Edge(Label::Fifo) => 1,
            Compat::Edge(Label::Lifo) => 2,
            Compat::Incompatible => 3,
        }] += 1;
        if !ok {
            failures.push(format!("#{k}: {a:?} {b:?} -> {got:?}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(5) && seen.iter().all(|&c| c > 0);
    report(
        1,
        "pair rule conformance",
        pass,
        &format!("10000 pairs, {} failures, R/F/L/I = {seen:?}, {elapsed:.2?}", failures.len()),
    );
    assert!(pass, "{:?}", &failures[..failures.len().min(5)]);
}

#[test]
fn c2_transitivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut ff, mut ll, mut failures) = (0, 0, Vec::new());
    let mut tries = 0u64;
    while (ff < 10_000 || ll < 10_000) && tries < 50_000_000 {
        tries += 1;
        let mut v = [
            random_datum(&mut rng, "a", 30, 20),
            random_datum(&mut rng, "b", 30, 20),
            random_datum(&mut rng, "c", 30, 20),
        ];
        v.sort_by_key(|d| d.tau_min());
        let [a, b, c] = &v;
        let ab = classify_pair(a, b).unwrap();
        let bc = classify_pair(b, c).unwrap();
        let ac = classify_pair(a, c).unwrap();
        match (ab, bc) {
            (Compat::Edge(Label::Fifo), Compat::Edge(Label::Fifo)) if ff < 10_000 => {
                ff += 1;
                if !matches!(ac, Compat::Edge(Label::Fifo | Label::Register)) {
                    failures.push(format!("F.F: {a:?} {b:?} {c:?} -> {ac:?}"));
                }
            }
            (Compat::Edge(Label::Lifo), Compat::Edge(Label::Lifo)) if ll < 10_000 => {
                ll += 1;
                if ac != Compat::Edge(Label::Lifo) {
                    failures.push(format!("L.L: {a:?} {b:?} {c:?} -> {ac:?}"));
                }
            }
            _ => {}
        }
    }
    let pass = failures.is_empty() && ff == 10_000 && ll == 10_000;
    report(2, "F/L transitivity", pass, &format!("{ff} F.F and {ll} L.L triples, {} failures", failures.len()));
    assert!(pass, "{:?}", &failures[..failures.len().min(5)]);
}

fn check_path_depth(g: &star::graph::CompatGraph, p: &StructPath) -> Result<(), String> {
    let members: Vec<&TimedDatum> = p.data(g).collect();
    let brute = brute_occupancy(members.iter().copied());
    let sweep = occupancy_oracle(members.iter().copied());
    let depth = match p.label() {
        Label::Fifo => fifo_depth(g, p).map_err(|e| e.to_string())?,
        Label::Lifo => lifo_depth(p).map_err(|e| e.to_string())?,
        Label::Register => return Ok(()),
    };
    if depth == brute && depth == sweep {
        Ok(())
    } else {
        Err(format!("{:?} {:?}: depth {depth}, brute {brute}, sweep {sweep}", p.label(), p.ids(g)))
    }
}

#[test]
fn c3_depth_equals_peak_occupancy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut failures, mut paths) = (Vec::new(), 0usize);
    for seed in 0..1000u64 {
        let n = rng.gen_range(2..=64);
        let cs = random_constraints(n, seed);
        let g = build_graph(&cs).unwrap();
        for label in [Label::Fifo, Label::Lifo] {
            for p in longest_paths(&g, label) {
                // every contiguous window of a homogeneous path is one too
                let nodes = p.nodes().to_vec();
                for i in 0..nodes.len() {
                    for j in i + 2..=nodes.len().min(i + 12) {
                        let sub = StructPath::new(&g, label, nodes[i..j].to_vec()).unwrap();
                        paths += 1;
                        if let Err(e) = check_path_depth(&g, &sub) {
                            failures.push(format!("seed {seed}: {e}"));
                        }
                    }
                }
                paths += 1;
                if let Err(e) = check_path_depth(&g, &p) {
                    failures.push(format!("seed {seed}: {e}"));
                }
            }
        }
    }
    let pass = failures.is_empty() && paths > 0;
    report(
        3,
        "depth equals peak occupancy",
        pass,
        &format!("1000 instances, {paths} paths checked, {} failures", failures.len()),
    );
    assert!(pass, "{:?}", &failures[..failures.len().min(5)]);
}

#[test]
fn c4_edge_count_bound() {
    let mut failures = Vec::new();
    let (mut instances, mut complete) = (0, 0);
    let mut check = |name: String, cs: &star::model::ConstraintSet| {
        let g = build_graph(cs).unwrap();
        let n = g.node_count();
        let pairs = n * n.saturating_sub(1) / 2;
        let counts = g.counts();
        instances += 1;
        let ok = g.edge_count() <= pairs
            && g.edge_count() == g.edges().count()
            && g.edge_count() + counts.incompatible == pairs
            && (counts.incompatible > 0 || g.edge_count() == pairs);
        if counts.incompatible == 0 {
            complete += 1;
        }
        if !ok {
            failures.push(format!("{name}: n={n} edges={} incompatible={}", g.edge_count(), counts.incompatible));
        }
    };
    for seed in 0..500u64 {
        check(format!("random {seed}"), &random_constraints(1 + (seed as usize % 120), seed));
    }
    for (rows, cols) in [(1, 1), (2, 3), (3, 2), (4, 5), (8, 8), (10, 12)] {
        let spec = InterleaverSpec::new(block_permutation(rows, cols), 1, 0, 1);
        let spec = InterleaverSpec { latency: spec.min_latency().unwrap(), ..spec };
        check(format!("block {rows}x{cols}"), &generate(&spec).unwrap());
    }
    check("six-datum".into(), &six_datum_reorder());
    let pass = failures.is_empty() && complete > 0;
    report(
        4,
        "edge count bound",
        pass,
        &format!("{instances} instances ({complete} without incompatible pairs), {} failures", failures.len()),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn c5_end_to_end_soundness() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for k in 0..500u64 {
        let n = rng.gen_range(1..=200);
        let seed = rng.gen::<u64>();
        let cs = random_constraints(n, seed);
        let cpath = dir.path().join(format!("c{k}.json"));
        let npath = dir.path().join(format!("n{k}.json"));
        std::fs::write(&cpath, serialize_constraints(&cs)).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = [
            "star".as_ref(),
            "check".as_ref(),
            "--constraints".as_ref(),
            cpath.as_os_str(),
            "--out".as_ref(),
            npath.as_os_str(),
        ];
        let code = star::cli::run_with(argv, &mut out, &mut err);
        if code != 0 {
            failures.push(format!("n={n} seed={seed}: exit {code}: {}", String::from_utf8_lossy(&err)));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(60);
    report(
        5,
        "end-to-end soundness",
        pass,
        &format!("500 constraint sets, {} failures, {elapsed:.2?}", failures.len()),
    );
    assert!(pass, "{:?}", &failures[..failures.len().min(5)]);
}

#[test]
fn c6_reorder_example() {
    let cs = six_datum_reorder();
    let syn = synthesize(&cs, &Weights::default()).unwrap();
    let cells = syn.netlist.total_cells();
    let trace = simulate(&syn.netlist, &cs).unwrap();

    // a FIFO mode carrying more data than its depth
    let overfull = syn.netlist.elements.iter().any(|e| {
        e.modes.iter().any(|m| {
            let carried = cs
                .data()
                .iter()
                .filter(|d| syn.netlist.binding[&d.id] == e.id && m.from <= d.tau_min() && d.tau_max() <= m.to)
                .count();
            m.kind == Kind::Fifo && carried > m.depth
        })
    });
    let optimum = exhaustive_min_cells(&cs);
    let pass = cells <= 5 && overfull && trace.passed() && cells <= optimum + 1;
    report(
        6,
        "six-datum reorder",
        pass,
        &format!("{cells} cells (6 registers unshared), exhaustive optimum {optimum}, FIFO over its depth: {overfull}"),
    );
    assert!(pass);
}

#[test]
fn c7_interleaver_scaling() {
    let columns = ["FIFO", "LIFO", "Reg", "Total", "Largest FIFO", "Smallest FIFO", "Largest LIFO", "Smallest LIFO"];
    let mut all = true;
    let mut lines = Vec::new();
    for (rows, cols) in [(15, 20), (20, 30), (30, 40)] {
        let n = rows * cols;
        let start = Instant::now();
        let latency = InterleaverSpec::full_frame_latency(n, 1);
        let cs = generate(&InterleaverSpec::new(block_permutation(rows, cols), 1, latency, 1)).unwrap();
        let syn = synthesize(&cs, &Weights::default()).unwrap();
        let report_text = write_report(&cs, &syn);
        let trace = simulate(&syn.netlist, &cs).unwrap();
        let elapsed = start.elapsed();
        let s = syn.netlist.summary();
        let ok = columns.iter().all(|c| report_text.contains(c))
            && s.total <= n / 4
            && s.total_cells == n
            && trace.passed()
            && elapsed < Duration::from_secs(300);
        all &= ok;
        lines.push(format!(
            "n={n} ({rows}x{cols}): FIFO={} LIFO={} Reg={} Mixed={} total={} cells={} {elapsed:.2?}",
            s.fifo, s.lifo, s.reg, s.mixed, s.total, s.total_cells
        ));
    }
    report(7, "interleaver scaling", all, &lines.join("; "));
    assert!(all);
}

#[test]
fn c8_mutation_robustness() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut fifo_mutants, mut lifo_mutants) = (0, 0);
    let mut failures = Vec::new();
    let mut seed = 0u64;
    while fifo_mutants + lifo_mutants < 100 && seed < 10_000 {
        seed += 1;
        let cs = random_constraints(rng.gen_range(8..=120), seed);
        let syn = synthesize(&cs, &Weights::default()).unwrap();
        let want_fifo = fifo_mutants <= lifo_mutants;
        let target = if want_fifo { Kind::Fifo } else { Kind::Lifo };
        let sites: Vec<(usize, usize)> = syn
            .netlist
            .elements
            .iter()
            .enumerate()
            .flat_map(|(e, el)| el.modes.iter().enumerate().map(move |(m, mode)| (e, m, mode.kind)))
            .filter(|&(_, _, k)| k == target)
            .map(|(e, m, _)| (e, m))
            .collect();
        if sites.is_empty() {
            continue;
        }
        let (e, m) = sites[rng.gen_range(0..sites.len())];
        let mut mutant = syn.netlist.clone();
        let expected = if want_fifo {
            mutant.elements[e].modes[m].depth -= 1;
            fifo_mutants += 1;
            "overflow"
        } else {
            mutant.elements[e].modes[m].kind = Kind::Fifo;
            lifo_mutants += 1;
            "FIFO order violated"
        };
        let trace = simulate(&mutant, &cs).unwrap();
        match trace.first_divergence() {
            Some(d) if d.kind() == expected => {}
            other => failures.push(format!("seed {seed} element {e} mode {m}: expected {expected}, got {other:?}")),
        }
    }
    let pass = failures.is_empty() && fifo_mutants + lifo_mutants == 100;
    report(
        8,
        "mutation robustness",
        pass,
        &format!("{fifo_mutants} FIFO depth and {lifo_mutants} LIFO kind mutants, {} silent or wrong", failures.len()),
    );
    assert!(pass, "{:?}", &failures[..failures.len().min(5)]);
}
