//! Inductive discovery of project trees from event logs.
//!
//! The log is split recursively along maximal cuts of its directly-follows graph, tried in the
//! order ×, →, ∧, ↺. Sub-logs with empty traces become `×(τ, …)`, single-activity sub-logs
//! become leaves, and a log without any cut falls through to the flower `↺(τ, a₁, …, aₖ)`.
//! Every node is annotated with the number of traces in the sub-log it was mined from.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::dfg::{Dfg, DfgError};
use crate::event_log::{EventLog, VariantLog};
use crate::tree::{Operator, ProjectTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinerError {
    #[error("cannot mine an empty log")]
    EmptyLog,
    #[error("trace {trace:?} cannot be assigned under a {op} cut")]
    Unassignable { op: &'static str, trace: Vec<String> },
}

impl From<DfgError> for MinerError {
    fn from(_: DfgError) -> Self {
        MinerError::EmptyLog
    }
}

/// An operator with an ordered partition of the activities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub operator: Operator,
    pub partition: Vec<BTreeSet<String>>,
}

impl Cut {
    pub fn degree(&self) -> usize {
        self.partition.len()
    }

    fn component_of(&self) -> HashMap<&str, usize> {
        self.partition.iter().enumerate().flat_map(|(i, part)| part.iter().map(move |a| (a.as_str(), i))).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut x = x;
        while self.0[x] != root {
            let next = self.0[x];
            self.0[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index becomes the root so classes are keyed by their smallest member
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }

    /// Classes over `members`, each sorted, ordered by smallest member.
    fn classes(&mut self, members: &[usize]) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &m in members {
            let r = self.find(m);
            by_root.entry(r).or_default().push(m);
        }
        let mut classes: Vec<Vec<usize>> = by_root.into_values().collect();
        for c in &mut classes {
            c.sort_unstable();
        }
        classes.sort_by_key(|c| c[0]);
        classes
    }
}

fn to_cut(dfg: &Dfg, operator: Operator, parts: Vec<Vec<usize>>) -> Cut {
    Cut {
        operator,
        partition: parts.into_iter().map(|p| p.into_iter().map(|i| dfg.activities()[i].clone()).collect()).collect(),
    }
}

/// The first maximal cut in the order ×, →, ∧, ↺, if any.
pub fn find_cut(dfg: &Dfg) -> Option<Cut> {
    if dfg.len() < 2 {
        return None;
    }
    xor_cut(dfg)
        .map(|p| to_cut(dfg, Operator::Xor, p))
        .or_else(|| sequence_cut(dfg).map(|p| to_cut(dfg, Operator::Sequence, p)))
        .or_else(|| parallel_cut(dfg).map(|p| to_cut(dfg, Operator::And, p)))
        .or_else(|| loop_cut(dfg).map(|p| to_cut(dfg, Operator::Loop, p)))
}

fn all(dfg: &Dfg) -> Vec<usize> {
    (0..dfg.len()).collect()
}

/// Connected components of the undirected graph.
fn xor_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let n = dfg.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for &j in dfg.successors(i) {
            uf.union(i, j);
        }
    }
    let parts = uf.classes(&all(dfg));
    (parts.len() >= 2).then_some(parts)
}

/// Merge pairs that are mutually reachable or mutually unreachable; the classes then form a chain.
fn sequence_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let n = dfg.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if dfg.reaches_index(i, j) == dfg.reaches_index(j, i) {
                uf.union(i, j);
            }
        }
    }
    let mut parts = uf.classes(&all(dfg));
    if parts.len() < 2 {
        return None;
    }
    parts.sort_by(
        |x, y| {
            if dfg.reaches_index(x[0], y[0]) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        },
    );
    Some(parts)
}

/// Components of the graph joining every pair not connected in both directions, then
/// coarsened so that each part holds a start and an end activity.
fn parallel_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let n = dfg.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if !(dfg.follows(i, j) && dfg.follows(j, i)) {
                uf.union(i, j);
            }
        }
    }
    let components = uf.classes(&all(dfg));
    let has_start = |c: &Vec<usize>| c.iter().any(|&i| dfg.is_start(i));
    let has_end = |c: &Vec<usize>| c.iter().any(|&i| dfg.is_end(i));

    let mut parts = Vec::new();
    let mut start_only = Vec::new();
    let mut end_only = Vec::new();
    let mut neither = Vec::new();
    for c in components {
        match (has_start(&c), has_end(&c)) {
            (true, true) => parts.push(c),
            (true, false) => start_only.push(c),
            (false, true) => end_only.push(c),
            (false, false) => neither.push(c),
        }
    }
    let pairs = start_only.len().min(end_only.len());
    let mut leftovers: Vec<usize> = neither.into_iter().flatten().collect();
    let mut start_iter = start_only.into_iter();
    let mut end_iter = end_only.into_iter();
    for _ in 0..pairs {
        let mut merged = start_iter.next().unwrap();
        merged.extend(end_iter.next().unwrap());
        merged.sort_unstable();
        parts.push(merged);
    }
    leftovers.extend(start_iter.flatten());
    leftovers.extend(end_iter.flatten());
    if parts.len() < 2 {
        return None;
    }
    parts.sort_by_key(|p| p[0]);
    parts[0].extend(leftovers);
    parts[0].sort_unstable();
    parts.sort_by_key(|p| p[0]);
    Some(parts)
}

/// Body seeded with start and end activities; components of the rest become redo parts unless
/// their connections to the body force them into it.
fn loop_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let n = dfg.len();
    let mut in_body: Vec<bool> = (0..n).map(|i| dfg.is_start(i) || dfg.is_end(i)).collect();
    let rest: Vec<usize> = (0..n).filter(|&i| !in_body[i]).collect();
    if rest.is_empty() {
        return None;
    }
    let mut uf = UnionFind::new(n);
    for &i in &rest {
        for &j in dfg.successors(i) {
            if !in_body[j] {
                uf.union(i, j);
            }
        }
    }
    let mut candidates = uf.classes(&rest);
    let starts: Vec<usize> = (0..n).filter(|&i| dfg.is_start(i)).collect();
    let ends: Vec<usize> = (0..n).filter(|&i| dfg.is_end(i)).collect();

    loop {
        let before = candidates.len();
        let mut keep = Vec::new();
        for component in candidates {
            let forced = component.iter().any(|&b| {
                let body_to_b = (0..n).any(|a| in_body[a] && dfg.follows(a, b) && !dfg.is_end(a));
                let b_to_body = (0..n).any(|a| in_body[a] && dfg.follows(b, a) && !dfg.is_start(a));
                let partial_from_end =
                    ends.iter().any(|&a| dfg.follows(a, b)) && !ends.iter().all(|&a| dfg.follows(a, b));
                let partial_to_start =
                    starts.iter().any(|&a| dfg.follows(b, a)) && !starts.iter().all(|&a| dfg.follows(b, a));
                body_to_b || b_to_body || partial_from_end || partial_to_start
            });
            if forced {
                for &b in &component {
                    in_body[b] = true;
                }
            } else {
                keep.push(component);
            }
        }
        candidates = keep;
        if candidates.len() == before {
            break;
        }
    }
    if candidates.is_empty() {
        return None;
    }
    let body: Vec<usize> = (0..n).filter(|&i| in_body[i]).collect();
    let mut parts = vec![body];
    parts.extend(candidates);
    Some(parts)
}

/// Splits a log along a cut; multiplicities carry over to the sub-logs.
pub fn split_log(log: &VariantLog, cut: &Cut) -> Result<Vec<VariantLog>, MinerError> {
    let component = cut.component_of();
    let lookup = |a: &String, trace: &[String]| {
        component
            .get(a.as_str())
            .copied()
            .ok_or_else(|| MinerError::Unassignable { op: cut.operator.name(), trace: trace.to_vec() })
    };
    let mut out = vec![VariantLog::new(); cut.degree()];
    for (trace, count) in log.iter() {
        let unassignable = || MinerError::Unassignable { op: cut.operator.name(), trace: trace.clone() };
        let comps: Vec<usize> = trace.iter().map(|a| lookup(a, trace)).collect::<Result<_, _>>()?;
        match cut.operator {
            Operator::Xor => {
                let first = *comps.first().ok_or_else(unassignable)?;
                if comps.iter().any(|&c| c != first) {
                    return Err(unassignable());
                }
                out[first].add(trace.clone(), count);
            }
            Operator::Sequence | Operator::And => {
                if cut.operator == Operator::Sequence && comps.windows(2).any(|w| w[1] < w[0]) {
                    return Err(unassignable());
                }
                for (i, sub) in out.iter_mut().enumerate() {
                    let projected =
                        trace.iter().zip(&comps).filter(|(_, c)| **c == i).map(|(a, _)| a.clone()).collect();
                    sub.add(projected, count);
                }
            }
            Operator::Loop => {
                let mut segments: Vec<(usize, Vec<String>)> = Vec::new();
                for (a, &c) in trace.iter().zip(&comps) {
                    match segments.last_mut() {
                        Some((last, seg)) if *last == c => seg.push(a.clone()),
                        _ => segments.push((c, vec![a.clone()])),
                    }
                }
                let well_formed = !segments.is_empty()
                    && segments.first().is_some_and(|(c, _)| *c == 0)
                    && segments.last().is_some_and(|(c, _)| *c == 0)
                    && segments.iter().enumerate().all(|(i, (c, _))| (i % 2 == 0) == (*c == 0));
                if !well_formed {
                    return Err(unassignable());
                }
                for (c, seg) in segments {
                    out[c].add(seg, count);
                }
            }
        }
    }
    Ok(out)
}

pub fn mine_tree(log: &EventLog) -> Result<ProjectTree, MinerError> {
    mine_variants(&log.variant_log())
}

pub fn mine_variants(log: &VariantLog) -> Result<ProjectTree, MinerError> {
    if log.is_empty() {
        return Err(MinerError::EmptyLog);
    }
    mine(log)
}

fn mine(log: &VariantLog) -> Result<ProjectTree, MinerError> {
    let cases = log.cases();
    let empty = log.empty_traces();
    if empty == cases {
        return Ok(ProjectTree::tau().with_freq(cases));
    }
    if empty > 0 {
        let mut rest = VariantLog::new();
        for (t, c) in log.iter().filter(|(t, _)| !t.is_empty()) {
            rest.add(t.clone(), c);
        }
        let child = mine(&rest)?;
        return Ok(ProjectTree::xor(vec![ProjectTree::tau().with_freq(empty), child]).with_freq(cases));
    }

    let alphabet = log.alphabet();
    if alphabet.len() == 1 {
        let activity = alphabet.into_iter().next().unwrap();
        let occurrences: u64 = log.iter().map(|(t, c)| t.len() as u64 * c).sum();
        if occurrences == cases {
            return Ok(ProjectTree::leaf(activity).with_freq(cases));
        }
        return Ok(ProjectTree::looped(vec![
            ProjectTree::leaf(activity).with_freq(occurrences),
            ProjectTree::tau().with_freq(occurrences - cases),
        ])
        .with_freq(cases));
    }

    let dfg = Dfg::from_variants(log)?;
    match find_cut(&dfg) {
        Some(cut) => {
            let children = split_log(log, &cut)?.iter().map(mine).collect::<Result<Vec<_>, _>>()?;
            Ok(ProjectTree::node(cut.operator, children).with_freq(cases))
        }
        None => Ok(flower(log, alphabet)),
    }
}

fn flower(log: &VariantLog, alphabet: BTreeSet<String>) -> ProjectTree {
    let cases = log.cases();
    let mut counts: BTreeMap<&String, u64> = BTreeMap::new();
    let mut events = 0;
    for (t, c) in log.iter() {
        events += t.len() as u64 * c;
        for a in t {
            *counts.entry(a).or_insert(0) += c;
        }
    }
    let mut children = vec![ProjectTree::tau().with_freq(events + cases)];
    children.extend(alphabet.iter().map(|a| ProjectTree::leaf(a.clone()).with_freq(counts[a])));
    ProjectTree::looped(children).with_freq(cases)
}
