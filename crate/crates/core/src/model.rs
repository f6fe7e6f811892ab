//! I/O constraint sets: ports, timed data, lifetimes, and the JSON
//! constraint-file format.
//!
//! A [`ConstraintSet`] lists the ports of the adapter and, for every datum,
//! the cycle at which it is written on an input port and the cycles at which
//! it is read on output ports. Everything downstream (compatibility graph,
//! structure sizing, allocation, simulation) is derived from it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cycle index. Time is integral and non-negative.
pub type Cycle = u64;

/// Version of the constraint-file schema accepted by [`parse_constraints`].
pub const CONSTRAINT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "in", alias = "input")]
    Input,
    #[serde(rename = "out", alias = "output")]
    Output,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Input => f.write_str("input"),
            Direction::Output => f.write_str("output"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub dir: Direction,
}

impl Port {
    pub fn input(name: impl Into<String>) -> Self {
        Port { name: name.into(), dir: Direction::Input }
    }

    pub fn output(name: impl Into<String>) -> Self {
        Port { name: name.into(), dir: Direction::Output }
    }
}

/// A single write or read: which port, at which cycle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Access {
    pub port: String,
    pub t: Cycle,
}

impl Access {
    pub fn new(port: impl Into<String>, t: Cycle) -> Self {
        Access { port: port.into(), t }
    }
}

/// Closed cycle interval `[start, end]`.
///
/// Two intervals that only touch (`a.end == b.start`) are treated as
/// disjoint: the cell released by the read at `end` can take the write at
/// the same cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: Cycle,
    pub end: Cycle,
}

impl Interval {
    pub fn new(start: Cycle, end: Cycle) -> Self {
        debug_assert!(start <= end, "interval [{start},{end}] is reversed");
        Interval { start, end }
    }

    pub fn span(&self) -> Cycle {
        self.end - self.start
    }

    pub fn disjoint(&self, other: &Interval) -> bool {
        self.end <= other.start || other.end <= self.start
    }

    pub fn contains(&self, t: Cycle) -> bool {
        self.start <= t && t <= self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

/// A datum crossing the adapter: one write, one or more reads.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimedDatum {
    pub id: String,
    pub write: Access,
    pub reads: Vec<Access>,
}

impl TimedDatum {
    /// Builds a datum; reads are sorted by (time, port).
    pub fn new(id: impl Into<String>, write: Access, mut reads: Vec<Access>) -> Self {
        reads.sort_by(|a, b| (a.t, &a.port).cmp(&(b.t, &b.port)));
        TimedDatum { id: id.into(), write, reads }
    }

    /// Single-read shorthand.
    pub fn single(
        id: impl Into<String>,
        write_port: impl Into<String>,
        write_t: Cycle,
        read_port: impl Into<String>,
        read_t: Cycle,
    ) -> Self {
        TimedDatum::new(id, Access::new(write_port, write_t), vec![Access::new(read_port, read_t)])
    }

    pub fn tau_min(&self) -> Cycle {
        self.write.t
    }

    /// Earliest read. Falls back to the write time for a datum with no reads,
    /// which [`ConstraintSet::validate`] reports.
    pub fn tau_first(&self) -> Cycle {
        self.reads.iter().map(|r| r.t).min().unwrap_or(self.write.t)
    }

    pub fn tau_max(&self) -> Cycle {
        self.reads.iter().map(|r| r.t).max().unwrap_or(self.write.t)
    }

    /// `[tau_min, tau_max]`.
    pub fn lifetime(&self) -> Interval {
        Interval::new(self.tau_min(), self.tau_max().max(self.tau_min()))
    }

    /// Cycles during which the datum occupies a cell, `tau_max - tau_min`.
    pub fn residency(&self) -> Cycle {
        self.lifetime().span()
    }

    pub fn is_single_read(&self) -> bool {
        self.reads.len() == 1
    }
}

pub fn lifetime(d: &TimedDatum) -> Interval {
    d.lifetime()
}

/// One broken invariant of a [`ConstraintSet`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    DuplicatePort { port: String },
    DuplicateDatum { datum: String },
    UnknownPort { datum: String, port: String },
    Direction { datum: String, port: String, expected: Direction },
    NoReads { datum: String },
    ReadNotAfterWrite { datum: String, write_t: Cycle, read_t: Cycle },
    PortCollision { port: String, t: Cycle, first: String, second: String },
}

impl Violation {
    /// Short category name, stable across versions.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::DuplicatePort { .. } => "duplicate port",
            Violation::DuplicateDatum { .. } => "duplicate id",
            Violation::UnknownPort { .. } => "unknown port",
            Violation::Direction { .. } => "direction",
            Violation::NoReads { .. } => "no reads",
            Violation::ReadNotAfterWrite { .. } => "read before write",
            Violation::PortCollision { .. } => "port collision",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicatePort { port } => write!(f, "duplicate port: `{port}` declared twice"),
            Violation::DuplicateDatum { datum } => write!(f, "duplicate id: datum `{datum}` declared twice"),
            Violation::UnknownPort { datum, port } => {
                write!(f, "unknown port: datum `{datum}` uses undeclared port `{port}`")
            }
            Violation::Direction { datum, port, expected } => {
                write!(f, "direction: datum `{datum}` uses port `{port}` which is not an {expected} port")
            }
            Violation::NoReads { datum } => write!(f, "no reads: datum `{datum}` is never read"),
            Violation::ReadNotAfterWrite { datum, write_t, read_t } => {
                write!(f, "read before write: datum `{datum}` written at {write_t} but read at {read_t}")
            }
            Violation::PortCollision { port, t, first, second } => {
                write!(f, "port collision: `{first}` and `{second}` both use port `{port}` at cycle {t}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ConstraintError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid constraint set ({} violation(s)): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Ports plus timed data.
///
/// Construction normalizes ordering (ports by name, data by write time then
/// id, reads by time) but does not validate; use [`ConstraintSet::checked`]
/// or [`parse_constraints`] for a validated set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSet {
    ports: Vec<Port>,
    data: Vec<TimedDatum>,
    word_width: Option<u32>,
}

impl ConstraintSet {
    pub fn new(mut ports: Vec<Port>, data: Vec<TimedDatum>) -> Self {
        ports.sort_by(|a, b| a.name.cmp(&b.name).then(a.dir.cmp(&b.dir)));
        let mut data: Vec<TimedDatum> = data.into_iter().map(|d| TimedDatum::new(d.id, d.write, d.reads)).collect();
        data.sort_by(|a, b| (a.write.t, &a.id).cmp(&(b.write.t, &b.id)));
        ConstraintSet { ports, data, word_width: None }
    }

    pub fn checked(ports: Vec<Port>, data: Vec<TimedDatum>) -> Result<Self, ConstraintError> {
        let cs = ConstraintSet::new(ports, data);
        let violations = cs.validate();
        if violations.is_empty() {
            Ok(cs)
        } else {
            Err(ConstraintError::Invalid(violations))
        }
    }

    pub fn with_word_width(mut self, width: Option<u32>) -> Self {
        self.word_width = width;
        self
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn data(&self) -> &[TimedDatum] {
        &self.data
    }

    pub fn word_width(&self) -> Option<u32> {
        self.word_width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn datum(&self, id: &str) -> Option<&TimedDatum> {
        self.data.iter().find(|d| d.id == id)
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    /// Data in chronological order: write time, then write port, then id.
    pub fn chronological(&self) -> Vec<&TimedDatum> {
        let mut v: Vec<&TimedDatum> = self.data.iter().collect();
        v.sort_by(|a, b| (a.write.t, &a.write.port, &a.id).cmp(&(b.write.t, &b.write.port, &b.id)));
        v
    }

    /// Production sequence: datum ids ordered by write time.
    pub fn production_order(&self) -> Vec<&str> {
        self.chronological().into_iter().map(|d| d.id.as_str()).collect()
    }

    /// Consumption sequence: datum ids ordered by first read time.
    pub fn consumption_order(&self) -> Vec<&str> {
        let mut v: Vec<&TimedDatum> = self.data.iter().collect();
        v.sort_by(|a, b| (a.tau_first(), &a.id).cmp(&(b.tau_first(), &b.id)));
        v.into_iter().map(|d| d.id.as_str()).collect()
    }

    pub fn max_time(&self) -> Option<Cycle> {
        self.data.iter().map(|d| d.tau_max().max(d.tau_min())).max()
    }

    /// Checks every invariant; an empty result means the set is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut port_dirs: BTreeMap<&str, Direction> = BTreeMap::new();
        for p in &self.ports {
            if port_dirs.insert(&p.name, p.dir).is_some() {
                out.push(Violation::DuplicatePort { port: p.name.clone() });
            }
        }

        let mut seen_ids = BTreeSet::new();
        // (port, cycle) -> first datum using it
        let mut slots: BTreeMap<(&str, Cycle), &str> = BTreeMap::new();

        let check_port = |datum: &str, acc: &Access, expected: Direction, out: &mut Vec<Violation>| -> bool {
            match port_dirs.get(acc.port.as_str()) {
                None => {
                    out.push(Violation::UnknownPort { datum: datum.to_string(), port: acc.port.clone() });
                    false
                }
                Some(&dir) if dir != expected => {
                    out.push(Violation::Direction { datum: datum.to_string(), port: acc.port.clone(), expected });
                    false
                }
                Some(_) => true,
            }
        };

        for d in &self.data {
            if !seen_ids.insert(d.id.as_str()) {
                out.push(Violation::DuplicateDatum { datum: d.id.clone() });
            }
            let mut accesses = Vec::with_capacity(1 + d.reads.len());
            if check_port(&d.id, &d.write, Direction::Input, &mut out) {
                accesses.push(&d.write);
            }
            if d.reads.is_empty() {
                out.push(Violation::NoReads { datum: d.id.clone() });
            }
            for r in &d.reads {
                if r.t <= d.write.t {
                    out.push(Violation::ReadNotAfterWrite { datum: d.id.clone(), write_t: d.write.t, read_t: r.t });
                }
                if check_port(&d.id, r, Direction::Output, &mut out) {
                    accesses.push(r);
                }
            }
            for acc in accesses {
                if let Some(first) = slots.insert((acc.port.as_str(), acc.t), d.id.as_str()) {
                    out.push(Violation::PortCollision {
                        port: acc.port.clone(),
                        t: acc.t,
                        first: first.to_string(),
                        second: d.id.clone(),
                    });
                    // keep the first occupant as reference
                    slots.insert((acc.port.as_str(), acc.t), first);
                }
            }
        }
        out
    }

    /// Data that are read more than once.
    pub fn multi_read_data(&self) -> Vec<&str> {
        self.data.iter().filter(|d| d.reads.len() > 1).map(|d| d.id.as_str()).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    ports: Vec<Port>,
    data: Vec<RawDatum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    word_width: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatum {
    id: String,
    write: Access,
    reads: Vec<Access>,
}

/// Parses and validates a constraint file.
pub fn parse_constraints(text: &str) -> Result<ConstraintSet, ConstraintError> {
    let raw: RawFile = serde_json::from_str(text).map_err(|e| ConstraintError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let data = raw.data.into_iter().map(|d| TimedDatum::new(d.id, d.write, d.reads)).collect();
    let cs = ConstraintSet::new(raw.ports, data).with_word_width(raw.word_width);
    let violations = cs.validate();
    if violations.is_empty() {
        Ok(cs)
    } else {
        Err(ConstraintError::Invalid(violations))
    }
}

/// Canonical serialization: sorted keys, data ordered by (write time, id).
pub fn serialize_constraints(cs: &ConstraintSet) -> String {
    let raw = RawFile {
        ports: cs.ports.clone(),
        data: cs
            .data
            .iter()
            .map(|d| RawDatum { id: d.id.clone(), write: d.write.clone(), reads: d.reads.clone() })
            .collect(),
        word_width: cs.word_width,
    };
    crate::canonical_json(&raw)
}
