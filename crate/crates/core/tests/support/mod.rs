//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use planminer_core::dfg::Dfg;
use planminer_core::event_log::{parse_event_log, EventLog, VariantLog};
use planminer_core::hours::Hours;
use planminer_core::planner::VariantPlan;
use planminer_core::tree::{Operator, ProjectTree};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn table_one() -> EventLog {
    parse_event_log(&data("table1.csv")).unwrap()
}

pub fn log100() -> EventLog {
    parse_event_log(&data("log100.csv")).unwrap()
}

pub fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn hours(value: &str) -> Hours {
    Hours::parse(value).unwrap()
}

/// Directly-follows relation and start/end sets recomputed from the variants.
pub struct Relations {
    pub activities: Vec<String>,
    pub arcs: BTreeSet<(String, String)>,
    pub start: BTreeSet<String>,
    pub end: BTreeSet<String>,
}

impl Relations {
    pub fn of(log: &VariantLog) -> Self {
        let mut arcs = BTreeSet::new();
        let mut start = BTreeSet::new();
        let mut end = BTreeSet::new();
        for (trace, _) in log.iter() {
            if let (Some(f), Some(l)) = (trace.first(), trace.last()) {
                start.insert(f.clone());
                end.insert(l.clone());
            }
            for w in trace.windows(2) {
                arcs.insert((w[0].clone(), w[1].clone()));
            }
        }
        Relations { activities: log.alphabet().into_iter().collect(), arcs, start, end }
    }

    pub fn follows(&self, a: &str, b: &str) -> bool {
        self.arcs.contains(&(a.to_string(), b.to_string()))
    }

    /// Non-empty path, by depth-first search.
    pub fn path(&self, a: &str, b: &str) -> bool {
        let mut stack: Vec<&str> = vec![a];
        let mut seen = BTreeSet::new();
        while let Some(x) = stack.pop() {
            for (from, to) in &self.arcs {
                if from == x {
                    if to == b {
                        return true;
                    }
                    if seen.insert(to.as_str()) {
                        stack.push(to);
                    }
                }
            }
        }
        false
    }
}

/// The cut conditions checked literally, one quantifier at a time.
pub fn cut_holds(r: &Relations, op: Operator, parts: &[BTreeSet<String>]) -> bool {
    let covered: BTreeSet<&String> = parts.iter().flatten().collect();
    let total: usize = parts.iter().map(BTreeSet::len).sum();
    if parts.iter().any(BTreeSet::is_empty) || total != covered.len() || covered.len() != r.activities.len() {
        return false;
    }
    let pairs =
        |i: usize, j: usize| parts[i].iter().flat_map(move |a| parts[j].iter().map(move |b| (a.as_str(), b.as_str())));
    let n = parts.len();
    match op {
        Operator::Sequence => {
            (0..n).all(|i| (i + 1..n).all(|j| pairs(i, j).all(|(a, b)| r.path(a, b) && !r.path(b, a))))
        }
        Operator::Xor => (0..n).all(|i| (0..n).all(|j| i == j || pairs(i, j).all(|(a, b)| !r.follows(a, b)))),
        Operator::And => {
            parts.iter().all(|p| p.iter().any(|a| r.start.contains(a)) && p.iter().any(|a| r.end.contains(a)))
                && (0..n).all(|i| (0..n).all(|j| i == j || pairs(i, j).all(|(a, b)| r.follows(a, b))))
        }
        Operator::Loop => {
            let body = &parts[0];
            n >= 2
                && r.start.iter().chain(&r.end).all(|a| body.contains(a))
                && body.iter().all(|a| {
                    let out = (1..n).any(|i| parts[i].iter().any(|b| r.follows(a, b)));
                    !out || r.end.contains(a)
                })
                && body.iter().all(|a| {
                    let inbound = (1..n).any(|i| parts[i].iter().any(|b| r.follows(b, a)));
                    !inbound || r.start.contains(a)
                })
                && (1..n).all(|i| (1..n).all(|j| i == j || pairs(i, j).all(|(a, b)| !r.follows(a, b))))
                && (1..n).all(|i| {
                    parts[i].iter().all(|b| {
                        let any = r.end.iter().any(|a| r.follows(a, b));
                        !any || r.end.iter().all(|a| r.follows(a, b))
                    })
                })
                && (1..n).all(|i| {
                    parts[i].iter().all(|b| {
                        let any = r.start.iter().any(|a| r.follows(b, a));
                        !any || r.start.iter().all(|a| r.follows(b, a))
                    })
                })
        }
    }
}

/// Every set partition of `items`.
pub fn set_partitions(items: &[String]) -> Vec<Vec<BTreeSet<String>>> {
    let Some((first, rest)) = items.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for partition in set_partitions(rest) {
        for i in 0..partition.len() {
            let mut p = partition.clone();
            p[i].insert(first.clone());
            out.push(p);
        }
        let mut p = partition;
        p.push(BTreeSet::from([first.clone()]));
        out.push(p);
    }
    out
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Largest degree (≥ 2) of any valid cut of the operator, by exhaustive search; 0 if none.
pub fn max_cut_degree(r: &Relations, op: Operator) -> usize {
    let mut best = 0;
    for partition in set_partitions(&r.activities) {
        if partition.len() < 2 || partition.len() <= best {
            continue;
        }
        let valid = match op {
            Operator::Xor | Operator::And => cut_holds(r, op, &partition),
            Operator::Sequence => permutations(&partition).iter().any(|p| cut_holds(r, op, p)),
            Operator::Loop => (0..partition.len()).any(|i| {
                let mut p = partition.clone();
                p.swap(0, i);
                cut_holds(r, op, &p)
            }),
        };
        if valid {
            best = partition.len();
        }
    }
    best
}

fn concat(xs: &BTreeSet<Vec<String>>, ys: &BTreeSet<Vec<String>>, bound: usize) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    for x in xs {
        for y in ys {
            if x.len() + y.len() <= bound {
                out.insert(x.iter().chain(y).cloned().collect());
            }
        }
    }
    out
}

fn shuffles(x: &[String], y: &[String], out: &mut BTreeSet<Vec<String>>, prefix: &mut Vec<String>) {
    if x.is_empty() || y.is_empty() {
        let mut t = prefix.clone();
        t.extend_from_slice(x);
        t.extend_from_slice(y);
        out.insert(t);
        return;
    }
    prefix.push(x[0].clone());
    shuffles(&x[1..], y, out, prefix);
    prefix.pop();
    prefix.push(y[0].clone());
    shuffles(x, &y[1..], out, prefix);
    prefix.pop();
}

/// All traces of the tree's language of length ≤ `bound`, from the operator semantics.
pub fn language(tree: &ProjectTree, bound: usize) -> BTreeSet<Vec<String>> {
    match tree {
        ProjectTree::Leaf { label: None, .. } => BTreeSet::from([Vec::new()]),
        ProjectTree::Leaf { label: Some(a), .. } => {
            if bound == 0 {
                BTreeSet::new()
            } else {
                BTreeSet::from([vec![a.clone()]])
            }
        }
        ProjectTree::Node { op, children, .. } => {
            let langs: Vec<BTreeSet<Vec<String>>> = children.iter().map(|c| language(c, bound)).collect();
            match op {
                Operator::Xor => langs.into_iter().flatten().collect(),
                Operator::Sequence => langs.iter().skip(1).fold(langs[0].clone(), |acc, l| concat(&acc, l, bound)),
                Operator::And => langs.iter().skip(1).fold(langs[0].clone(), |acc, l| {
                    let mut out = BTreeSet::new();
                    for x in &acc {
                        for y in l {
                            if x.len() + y.len() <= bound {
                                shuffles(x, y, &mut out, &mut Vec::new());
                            }
                        }
                    }
                    out
                }),
                Operator::Loop => {
                    let body = &langs[0];
                    let redo: BTreeSet<Vec<String>> = langs[1..].iter().flatten().cloned().collect();
                    let mut result = body.clone();
                    let mut frontier = body.clone();
                    while !frontier.is_empty() {
                        let next = concat(&concat(&frontier, &redo, bound), body, bound);
                        frontier = next.difference(&result).cloned().collect();
                        result.extend(frontier.iter().cloned());
                    }
                    result
                }
            }
        }
    }
}

/// Random block-structured tree over distinct activities `a`, `b`, … (at most `alphabet`).
/// With `silent`, τ leaves may appear under choices and as loop redo parts.
pub fn random_tree(rng: &mut impl Rng, alphabet: usize, silent: bool) -> ProjectTree {
    let mut names: Vec<String> = (0..alphabet).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    names.shuffle(rng);
    let take = rng.gen_range(1..=alphabet);
    names.truncate(take);
    build(rng, &names, silent, true)
}

fn split_names(rng: &mut impl Rng, names: &[String], parts: usize) -> Vec<Vec<String>> {
    let mut cuts: Vec<usize> = (1..names.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort();
    let mut out = Vec::new();
    let mut start = 0;
    for c in cuts.into_iter().chain([names.len()]) {
        out.push(names[start..c].to_vec());
        start = c;
    }
    out
}

fn build(rng: &mut impl Rng, names: &[String], silent: bool, loops: bool) -> ProjectTree {
    if names.len() == 1 {
        let leaf = ProjectTree::leaf(names[0].clone());
        return if silent && rng.gen_bool(0.15) { ProjectTree::xor(vec![leaf, ProjectTree::tau()]) } else { leaf };
    }
    let op = match rng.gen_range(0..if loops { 4 } else { 3 }) {
        0 => Operator::Sequence,
        1 => Operator::Xor,
        2 => Operator::And,
        _ => Operator::Loop,
    };
    if op == Operator::Loop {
        if silent && rng.gen_bool(0.3) {
            let body = build(rng, names, false, false);
            return ProjectTree::looped(vec![body, ProjectTree::tau()]);
        }
        let redo_size = rng.gen_range(1..names.len());
        let (body_names, redo_names) = names.split_at(names.len() - redo_size);
        // body start and end activities are kept apart so the loop stays rediscoverable
        let body = if body_names.len() >= 2 {
            let halves = split_names(rng, body_names, 2);
            ProjectTree::seq(halves.iter().map(|h| build(rng, h, false, false)).collect())
        } else {
            ProjectTree::leaf(body_names[0].clone())
        };
        if body_names.len() < 2 {
            // a single-activity body keeps start and end equal; fall back to a sequence
            return ProjectTree::seq(vec![body, build(rng, redo_names, silent, loops)]);
        }
        let redo = build(rng, redo_names, false, false);
        return ProjectTree::looped(vec![body, redo]);
    }
    let parts = rng.gen_range(2..=names.len().min(3));
    let children = split_names(rng, names, parts).iter().map(|n| build(rng, n, silent, loops)).collect();
    ProjectTree::node(op, children)
}

/// Log containing every trace of the language up to `bound`, once each.
pub fn complete_log(tree: &ProjectTree, bound: usize) -> VariantLog {
    VariantLog::from_traces(language(tree, bound))
}

/// Longest start-to-end path by enumerating every path.
pub fn brute_force_makespan(plan: &VariantPlan, durations: &BTreeMap<String, Hours>) -> Hours {
    let n = plan.len();
    let mut succ = vec![Vec::new(); n];
    let mut has_pred = vec![false; n];
    for &(i, j) in plan.index_arcs() {
        succ[i].push(j);
        has_pred[j] = true;
    }
    let p: Vec<Hours> = plan.activities().iter().map(|a| durations[&a.label]).collect();
    fn walk(v: usize, succ: &[Vec<usize>], p: &[Hours], acc: Hours, best: &mut Hours) {
        let acc = acc + p[v];
        if succ[v].is_empty() {
            *best = (*best).max(acc);
        }
        for &w in &succ[v] {
            walk(w, succ, p, acc, best);
        }
    }
    let mut best = Hours::ZERO;
    for v in (0..n).filter(|&v| !has_pred[v]) {
        walk(v, &succ, &p, Hours::ZERO, &mut best);
    }
    best
}

/// Random DAG over `n` activities: arcs only go from lower to higher index.
pub fn random_dag(rng: &mut impl Rng, n: usize) -> (VariantPlan, BTreeMap<String, Hours>) {
    let labels: Vec<String> = (0..n).map(|i| format!("x{i:02}")).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let density = rng.gen_range(0.1..0.6);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                arcs.push((i, j));
            }
        }
    }
    let plan = VariantPlan::new(&refs, &arcs).unwrap();
    let durations =
        labels.iter().map(|l| (l.clone(), Hours::new(rng.gen_range(0..=40), rng.gen_range(1..=4)))).collect();
    (plan, durations)
}

pub fn dfg_of(log: &VariantLog) -> Dfg {
    Dfg::from_variants(log).unwrap()
}
