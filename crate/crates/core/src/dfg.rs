//! Directly-follows graphs with arc frequencies and dummy start/end nodes.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::OnceLock;

use thiserror::Error;

use crate::dot::quote;
use crate::event_log::{EventLog, VariantLog, END_SYMBOL, START_SYMBOL};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DfgError {
    #[error("cannot build a directly-follows graph from an empty log")]
    EmptyLog,
    #[error("unknown activity `{0}`")]
    UnknownNode(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DfgNode {
    Start,
    Activity(String),
    End,
}

impl DfgNode {
    pub fn activity(name: &str) -> Self {
        DfgNode::Activity(name.to_string())
    }

    pub fn label(&self) -> &str {
        match self {
            DfgNode::Start => START_SYMBOL,
            DfgNode::End => END_SYMBOL,
            DfgNode::Activity(a) => a,
        }
    }
}

/// Activities are indexed in sorted label order; index-level accessors serve the cut detectors.
#[derive(Debug)]
pub struct Dfg {
    activities: Vec<String>,
    index: HashMap<String, usize>,
    arcs: BTreeMap<(DfgNode, DfgNode), u64>,
    start: Vec<u64>,
    end: Vec<u64>,
    succ: Vec<Vec<usize>>,
    adjacency: Vec<Vec<bool>>,
    cases: u64,
    closure: OnceLock<Vec<Vec<bool>>>,
}

impl Clone for Dfg {
    fn clone(&self) -> Self {
        Dfg {
            activities: self.activities.clone(),
            index: self.index.clone(),
            arcs: self.arcs.clone(),
            start: self.start.clone(),
            end: self.end.clone(),
            succ: self.succ.clone(),
            adjacency: self.adjacency.clone(),
            cases: self.cases,
            closure: OnceLock::new(),
        }
    }
}

impl PartialEq for Dfg {
    fn eq(&self, other: &Self) -> bool {
        self.arcs == other.arcs && self.activities == other.activities
    }
}

pub fn build_dfg(log: &EventLog) -> Result<Dfg, DfgError> {
    Dfg::from_variants(&log.variant_log())
}

impl Dfg {
    pub fn from_variants(log: &VariantLog) -> Result<Dfg, DfgError> {
        if log.is_empty() {
            return Err(DfgError::EmptyLog);
        }
        let activities: Vec<String> = log.alphabet().into_iter().collect();
        let index: HashMap<String, usize> = activities.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let n = activities.len();
        let mut arcs: BTreeMap<(DfgNode, DfgNode), u64> = BTreeMap::new();
        let mut start = vec![0; n];
        let mut end = vec![0; n];
        let mut adjacency = vec![vec![false; n]; n];
        for (trace, count) in log.iter() {
            let mut prev = DfgNode::Start;
            for (pos, activity) in trace.iter().enumerate() {
                let i = index[activity];
                if pos == 0 {
                    start[i] += count;
                } else {
                    adjacency[index[prev.label()]][i] = true;
                }
                let node = DfgNode::Activity(activity.clone());
                *arcs.entry((prev, node.clone())).or_insert(0) += count;
                prev = node;
            }
            if let DfgNode::Activity(last) = &prev {
                end[index[last]] += count;
            }
            *arcs.entry((prev, DfgNode::End)).or_insert(0) += count;
        }
        let succ =
            adjacency.iter().map(|row| row.iter().enumerate().filter(|(_, b)| **b).map(|(j, _)| j).collect()).collect();
        Ok(Dfg { activities, index, arcs, start, end, succ, adjacency, cases: log.cases(), closure: OnceLock::new() })
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn cases(&self) -> u64 {
        self.cases
    }

    pub fn arcs(&self) -> &BTreeMap<(DfgNode, DfgNode), u64> {
        &self.arcs
    }

    pub fn frequency(&self, from: &DfgNode, to: &DfgNode) -> u64 {
        self.arcs.get(&(from.clone(), to.clone())).copied().unwrap_or(0)
    }

    pub fn start_activities(&self) -> BTreeMap<String, u64> {
        self.counted(&self.start)
    }

    pub fn end_activities(&self) -> BTreeMap<String, u64> {
        self.counted(&self.end)
    }

    fn counted(&self, counts: &[u64]) -> BTreeMap<String, u64> {
        counts.iter().enumerate().filter(|(_, c)| **c > 0).map(|(i, c)| (self.activities[i].clone(), *c)).collect()
    }

    pub fn index_of(&self, activity: &str) -> Option<usize> {
        self.index.get(activity).copied()
    }

    /// Directly-follows arc between two activity indices.
    pub fn follows(&self, from: usize, to: usize) -> bool {
        self.adjacency[from][to]
    }

    pub fn successors(&self, from: usize) -> &[usize] {
        &self.succ[from]
    }

    pub fn is_start(&self, i: usize) -> bool {
        self.start[i] > 0
    }

    pub fn is_end(&self, i: usize) -> bool {
        self.end[i] > 0
    }

    /// Non-empty path between activity indices.
    pub fn reaches_index(&self, from: usize, to: usize) -> bool {
        self.closure()[from][to]
    }

    fn closure(&self) -> &Vec<Vec<bool>> {
        self.closure.get_or_init(|| {
            let n = self.activities.len();
            (0..n)
                .map(|source| {
                    let mut seen = vec![false; n];
                    let mut queue: VecDeque<usize> = self.succ[source].iter().copied().collect();
                    while let Some(v) = queue.pop_front() {
                        if !seen[v] {
                            seen[v] = true;
                            queue.extend(self.succ[v].iter().copied());
                        }
                    }
                    seen
                })
                .collect()
        })
    }

    /// True iff a directed path of length ≥ 1 leads from `x` to `y`.
    pub fn reaches(&self, x: &str, y: &str) -> Result<bool, DfgError> {
        let i = self.index_of(x).ok_or_else(|| DfgError::UnknownNode(x.to_string()))?;
        let j = self.index_of(y).ok_or_else(|| DfgError::UnknownNode(y.to_string()))?;
        Ok(self.reaches_index(i, j))
    }

    pub fn total_frequency(&self) -> u64 {
        self.arcs.values().sum()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfg {\n  rankdir=LR;\n");
        let _ = writeln!(
            out,
            "  {} [shape=triangle, orientation=270, style=filled, fillcolor=black, label=\"\"];",
            quote(START_SYMBOL)
        );
        let _ = writeln!(out, "  {} [shape=square, style=filled, fillcolor=black, label=\"\"];", quote(END_SYMBOL));
        for a in &self.activities {
            let _ = writeln!(out, "  {} [shape=box, style=rounded];", quote(&format!("act:{a}")));
        }
        let id = |n: &DfgNode| match n {
            DfgNode::Activity(a) => quote(&format!("act:{a}")),
            other => quote(other.label()),
        };
        for ((from, to), freq) in &self.arcs {
            let _ = writeln!(out, "  {} -> {} [label=\"{freq}\"];", id(from), id(to));
        }
        for a in &self.activities {
            let _ = writeln!(out, "  {} [label={}];", quote(&format!("act:{a}")), quote(a));
        }
        out.push_str("}\n");
        out
    }
}
