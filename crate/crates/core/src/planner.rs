//! Variant decoding into activity-on-node plans, critical-path scheduling and relaxation gain.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_log::{EventLog, END_SYMBOL, START_SYMBOL};
use crate::hours::Hours;
use crate::tree::{Operator, ProjectTree};

/// Loop unroll counts above this are rejected.
pub const MAX_UNROLL: u32 = 100;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("choice has no selection for {0}")]
    IncompleteChoice(String),
    #[error("{node} has {arity} children, selection {index} is out of range")]
    BadSelection { node: String, index: usize, arity: usize },
    #[error("unknown tree node `{0}`")]
    UnknownNode(String),
    #[error("loop {0} unroll count exceeds {MAX_UNROLL}")]
    TooManyUnrolls(String),
    #[error("bad selector `{0}`, expected NODE=INDEX")]
    BadSelector(String),
    #[error("precedence graph has a cycle")]
    Cycle,
    #[error("no duration for activity `{0}`")]
    MissingDuration(String),
    #[error("unknown plan activity `{0}`")]
    UnknownActivity(String),
    #[error("cannot estimate durations from an empty log")]
    EmptyLog,
    #[error("unknown project `{0}`")]
    UnknownProject(String),
    #[error("unknown duration estimator `{0}`")]
    BadEstimator(String),
    #[error("baseline activities {baseline:?} differ from plan activities {plan:?}")]
    ActivityMismatch { baseline: Vec<String>, plan: Vec<String> },
    #[error("variant limit must be at least 1")]
    ZeroLimit,
}

/// Selected child per exclusive-choice node (`xor1`, `xor2`, … in preorder) and redo passes
/// per loop node (`loop1`, …; absent means zero).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantChoice {
    #[serde(default)]
    pub xor: BTreeMap<String, usize>,
    #[serde(default)]
    pub loops: BTreeMap<String, u32>,
}

impl VariantChoice {
    /// Parses selectors such as `xor1=0` or `loop2=1`; comma-separated lists are accepted.
    pub fn from_selectors<'a>(selectors: impl IntoIterator<Item = &'a str>) -> Result<Self, PlanError> {
        let mut choice = VariantChoice::default();
        for part in selectors.into_iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || PlanError::BadSelector(part.to_string());
            let (node, value) = part.split_once('=').ok_or_else(bad)?;
            let node = node.trim();
            if node.starts_with("xor") {
                choice.xor.insert(node.to_string(), value.trim().parse().map_err(|_| bad())?);
            } else if node.starts_with("loop") {
                choice.loops.insert(node.to_string(), value.trim().parse().map_err(|_| bad())?);
            } else {
                return Err(bad());
            }
        }
        Ok(choice)
    }

    pub fn selectors(&self) -> String {
        let parts: Vec<String> = self
            .xor
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .chain(self.loops.iter().filter(|(_, v)| **v > 0).map(|(k, v)| format!("{k}={v}")))
            .collect();
        parts.join(",")
    }
}

fn node_names(tree: &ProjectTree) -> BTreeMap<usize, String> {
    let mut names = BTreeMap::new();
    for op in [Operator::Xor, Operator::Loop] {
        for (i, node) in tree.operator_nodes(op).into_iter().enumerate() {
            names.insert(node, format!("{}{}", op.name(), i + 1));
        }
    }
    names
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankedVariant {
    pub choice: VariantChoice,
    /// Product of the selected branches' case frequencies.
    pub weight: u64,
}

/// Exclusive-choice combinations (loops at zero redo passes) by descending weight, ties by
/// branch rank order, truncated at `limit`.
pub fn enumerate_variants(tree: &ProjectTree, limit: usize) -> Result<Vec<RankedVariant>, PlanError> {
    if limit == 0 {
        return Err(PlanError::ZeroLimit);
    }
    let nodes = tree.preorder();
    let xors: Vec<(String, Vec<(u64, usize)>)> = tree
        .operator_nodes(Operator::Xor)
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let mut ranked: Vec<(u64, usize)> =
                nodes[n].children().iter().enumerate().map(|(c, child)| (child.freq(), c)).collect();
            ranked.sort_by_key(|&(f, c)| (Reverse(f), c));
            (format!("xor{}", i + 1), ranked)
        })
        .collect();
    let weight = |ranks: &[usize]| -> u64 {
        ranks.iter().zip(&xors).fold(1u64, |acc, (&r, (_, ranked))| acc.saturating_mul(ranked[r].0))
    };
    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    let first = vec![0usize; xors.len()];
    heap.push((weight(&first), Reverse(first.clone())));
    seen.insert(first);
    let mut out = Vec::new();
    while let Some((w, Reverse(ranks))) = heap.pop() {
        let choice = VariantChoice {
            xor: xors.iter().zip(&ranks).map(|((name, ranked), &r)| (name.clone(), ranked[r].1)).collect(),
            loops: BTreeMap::new(),
        };
        out.push(RankedVariant { choice, weight: w });
        if out.len() == limit {
            break;
        }
        for d in 0..ranks.len() {
            if ranks[d] + 1 < xors[d].1.len() {
                let mut next = ranks.clone();
                next[d] += 1;
                if seen.insert(next.clone()) {
                    heap.push((weight(&next), Reverse(next)));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanActivity {
    /// Unique within the plan; repeated activities get `#2`, `#3`, … suffixes.
    pub id: String,
    pub label: String,
}

/// Activity-on-node precedence network; dummy start and end nodes are implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantPlan {
    activities: Vec<PlanActivity>,
    arcs: BTreeSet<(usize, usize)>,
}

impl VariantPlan {
    /// Builds a plan from activity labels (ids derived from labels) and index arcs.
    pub fn new(labels: &[&str], arcs: &[(usize, usize)]) -> Result<Self, PlanError> {
        let mut plan = VariantPlan { activities: Vec::new(), arcs: BTreeSet::new() };
        for label in labels {
            plan.push(label);
        }
        for &(i, j) in arcs {
            if i >= labels.len() || j >= labels.len() {
                return Err(PlanError::UnknownActivity(format!("#{}", i.max(j))));
            }
            plan.arcs.insert((i, j));
        }
        Ok(plan)
    }

    /// Fully serial plan in the given order.
    pub fn serial(labels: &[&str]) -> Self {
        let arcs: Vec<(usize, usize)> = (1..labels.len()).map(|i| (i - 1, i)).collect();
        Self::new(labels, &arcs).expect("indices in range")
    }

    /// All activities unordered between start and end.
    pub fn parallel(labels: &[&str]) -> Self {
        Self::new(labels, &[]).expect("no arcs")
    }

    fn push(&mut self, label: &str) -> usize {
        let repeats = self.activities.iter().filter(|a| a.label == label).count();
        let id = if repeats == 0 { label.to_string() } else { format!("{label}#{}", repeats + 1) };
        self.activities.push(PlanActivity { id, label: label.to_string() });
        self.activities.len() - 1
    }

    pub fn activities(&self) -> &[PlanActivity] {
        &self.activities
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.arcs.iter().map(|&(i, j)| (self.activities[i].id.as_str(), self.activities[j].id.as_str()))
    }

    pub fn index_arcs(&self) -> &BTreeSet<(usize, usize)> {
        &self.arcs
    }

    pub fn with_arc(mut self, from: usize, to: usize) -> Self {
        self.arcs.insert((from, to));
        self
    }

    pub fn without_arc(mut self, from: usize, to: usize) -> Self {
        self.arcs.remove(&(from, to));
        self
    }

    pub fn labels(&self) -> Vec<String> {
        self.activities.iter().map(|a| a.label.clone()).collect()
    }

    /// Arcs including the dummy start and end nodes.
    pub fn full_arcs(&self) -> Vec<(String, String)> {
        let n = self.activities.len();
        let mut has_pred = vec![false; n];
        let mut has_succ = vec![false; n];
        for &(i, j) in &self.arcs {
            has_succ[i] = true;
            has_pred[j] = true;
        }
        let mut out = Vec::new();
        for (a, _) in self.activities.iter().zip(&has_pred).filter(|(_, p)| !**p) {
            out.push((START_SYMBOL.to_string(), a.id.clone()));
        }
        out.extend(self.arcs().map(|(a, b)| (a.to_string(), b.to_string())));
        for (a, _) in self.activities.iter().zip(&has_succ).filter(|(_, s)| !**s) {
            out.push((a.id.clone(), END_SYMBOL.to_string()));
        }
        if n == 0 {
            out.push((START_SYMBOL.to_string(), END_SYMBOL.to_string()));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "activities": self.activities,
            "arcs": self.full_arcs().into_iter().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
        })
    }
}

/// Entry and exit activities of a decoded block; `None` for a block with no activities.
type Fragment = Option<(Vec<usize>, Vec<usize>)>;

struct Decoder<'a> {
    names: BTreeMap<usize, String>,
    choice: &'a VariantChoice,
    plan: VariantPlan,
}

impl Decoder<'_> {
    fn link(&mut self, from: &[usize], to: &[usize]) {
        for &i in from {
            for &j in to {
                self.plan.arcs.insert((i, j));
            }
        }
    }

    fn then(&mut self, current: Fragment, next: Fragment) -> Fragment {
        match (current, next) {
            (None, f) | (f, None) => f,
            (Some((entries, exits)), Some((next_entries, next_exits))) => {
                self.link(&exits, &next_entries);
                Some((entries, next_exits))
            }
        }
    }

    fn decode(&mut self, tree: &ProjectTree, index: usize) -> Result<Fragment, PlanError> {
        let mut child_index = Vec::new();
        let mut next = index + 1;
        for child in tree.children() {
            child_index.push(next);
            next += child.size();
        }
        match tree {
            ProjectTree::Leaf { label: None, .. } => Ok(None),
            ProjectTree::Leaf { label: Some(a), .. } => {
                let n = self.plan.push(a);
                Ok(Some((vec![n], vec![n])))
            }
            ProjectTree::Node { op: Operator::Sequence, children, .. } => {
                let mut current = None;
                for (child, &ci) in children.iter().zip(&child_index) {
                    let fragment = self.decode(child, ci)?;
                    current = self.then(current, fragment);
                }
                Ok(current)
            }
            ProjectTree::Node { op: Operator::And, children, .. } => {
                let mut entries = Vec::new();
                let mut exits = Vec::new();
                for (child, &ci) in children.iter().zip(&child_index) {
                    if let Some((en, ex)) = self.decode(child, ci)? {
                        entries.extend(en);
                        exits.extend(ex);
                    }
                }
                Ok(if entries.is_empty() { None } else { Some((entries, exits)) })
            }
            ProjectTree::Node { op: Operator::Xor, children, .. } => {
                let name = self.names[&index].clone();
                let &selected = self.choice.xor.get(&name).ok_or_else(|| PlanError::IncompleteChoice(name.clone()))?;
                if selected >= children.len() {
                    return Err(PlanError::BadSelection { node: name, index: selected, arity: children.len() });
                }
                self.decode(&children[selected], child_index[selected])
            }
            ProjectTree::Node { op: Operator::Loop, children, .. } => {
                let name = &self.names[&index];
                let unroll = self.choice.loops.get(name).copied().unwrap_or(0);
                if unroll > MAX_UNROLL {
                    return Err(PlanError::TooManyUnrolls(name.clone()));
                }
                // most frequent redo child, first on ties
                let redo =
                    (1..children.len())
                        .fold(1, |best, i| if children[i].freq() > children[best].freq() { i } else { best });
                let mut current = self.decode(&children[0], child_index[0])?;
                for _ in 0..unroll {
                    let back = self.decode(&children[redo], child_index[redo])?;
                    current = self.then(current, back);
                    let body = self.decode(&children[0], child_index[0])?;
                    current = self.then(current, body);
                }
                Ok(current)
            }
        }
    }
}

/// Sequence becomes serial precedence, parallel blocks fork and join, each choice keeps the
/// selected child, loops unroll their redo part, and silent leaves vanish.
pub fn decode_variant(tree: &ProjectTree, choice: &VariantChoice) -> Result<VariantPlan, PlanError> {
    let names = node_names(tree);
    let known: BTreeSet<&String> = names.values().collect();
    if let Some(unknown) = choice.xor.keys().chain(choice.loops.keys()).find(|k| !known.contains(k)) {
        return Err(PlanError::UnknownNode(unknown.clone()));
    }
    if let Some(missing) = names.values().filter(|n| n.starts_with("xor")).find(|n| !choice.xor.contains_key(*n)) {
        return Err(PlanError::IncompleteChoice(missing.clone()));
    }
    let mut decoder = Decoder { names, choice, plan: VariantPlan { activities: Vec::new(), arcs: BTreeSet::new() } };
    decoder.decode(tree, 0)?;
    Ok(decoder.plan)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub enum Estimator {
    Mean,
    Median,
    P90,
    /// Durations observed in one project; activities it lacks fall back to the mean.
    Fixed(String),
}

impl From<Estimator> for String {
    fn from(e: Estimator) -> String {
        e.to_string()
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Estimator::Mean => f.write_str("mean"),
            Estimator::Median => f.write_str("median"),
            Estimator::P90 => f.write_str("p90"),
            Estimator::Fixed(p) => write!(f, "fixed:{p}"),
        }
    }
}

impl FromStr for Estimator {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, PlanError> {
        match s.trim() {
            "mean" => Ok(Estimator::Mean),
            "median" => Ok(Estimator::Median),
            "p90" => Ok(Estimator::P90),
            other => match other.strip_prefix("fixed:") {
                Some(p) if !p.is_empty() => Ok(Estimator::Fixed(p.to_string())),
                _ => Err(PlanError::BadEstimator(s.to_string())),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DurationModel {
    pub estimator: Estimator,
    pub durations: BTreeMap<String, Hours>,
}

impl DurationModel {
    pub fn fixed(durations: impl IntoIterator<Item = (String, Hours)>) -> Self {
        DurationModel { estimator: Estimator::Fixed("manual".into()), durations: durations.into_iter().collect() }
    }

    pub fn get(&self, label: &str) -> Result<Hours, PlanError> {
        self.durations.get(label).copied().ok_or_else(|| PlanError::MissingDuration(label.to_string()))
    }
}

fn mean(values: &[Hours]) -> Hours {
    values.iter().sum::<Hours>() / values.len() as i64
}

fn median(sorted: &[Hours]) -> Hours {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2
    }
}

/// Nearest-rank 90th percentile.
fn p90(sorted: &[Hours]) -> Hours {
    let rank = (sorted.len() * 9).div_ceil(10).max(1);
    sorted[rank - 1]
}

pub fn estimate_durations(log: &EventLog, estimator: &Estimator) -> Result<DurationModel, PlanError> {
    if log.is_empty() {
        return Err(PlanError::EmptyLog);
    }
    let mut samples: BTreeMap<String, Vec<Hours>> = BTreeMap::new();
    for trace in log.traces() {
        for e in &trace.events {
            samples.entry(e.activity.clone()).or_default().push(e.duration);
        }
    }
    for values in samples.values_mut() {
        values.sort();
    }
    let mut durations: BTreeMap<String, Hours> = samples
        .iter()
        .map(|(a, v)| {
            let d = match estimator {
                Estimator::Median => median(v),
                Estimator::P90 => p90(v),
                Estimator::Mean | Estimator::Fixed(_) => mean(v),
            };
            (a.clone(), d)
        })
        .collect();
    if let Estimator::Fixed(project) = estimator {
        let trace = log
            .trace(project)
            .or_else(|| project.strip_prefix("proj").and_then(|p| log.trace(p)))
            .ok_or_else(|| PlanError::UnknownProject(project.clone()))?;
        let mut own: BTreeMap<String, Vec<Hours>> = BTreeMap::new();
        for e in &trace.events {
            own.entry(e.activity.clone()).or_default().push(e.duration);
        }
        for (a, v) in own {
            durations.insert(a, mean(&v));
        }
    }
    Ok(DurationModel { estimator: estimator.clone(), durations })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledActivity {
    pub id: String,
    pub label: String,
    pub duration: Hours,
    pub es: Hours,
    pub ef: Hours,
    pub ls: Hours,
    pub lf: Hours,
    pub slack: Hours,
}

impl ScheduledActivity {
    pub fn is_critical(&self) -> bool {
        self.slack == Hours::ZERO
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// Ordered by earliest start, then id.
    pub activities: Vec<ScheduledActivity>,
    pub makespan: Hours,
    pub critical_path: Vec<String>,
}

impl Schedule {
    pub fn activity(&self, id: &str) -> Option<&ScheduledActivity> {
        self.activities.iter().find(|a| a.id == id)
    }

    pub fn slack(&self, id: &str) -> Option<Hours> {
        self.activity(id).map(|a| a.slack)
    }

    /// Text table ordered by earliest start with a bar per activity (`#` busy, `.` slack).
    pub fn gantt(&self) -> String {
        const WIDTH: i64 = 40;
        let name_width = self.activities.iter().map(|a| a.id.chars().count()).max().unwrap_or(8).max(8);
        let mut out = format!(
            "{:<name_width$} {:>8} {:>8} {:>8} {:>8} {:>8}  timeline\n",
            "activity", "ES", "EF", "LS", "LF", "slack"
        );
        let scale = |h: Hours| -> usize {
            if self.makespan == Hours::ZERO {
                return 0;
            }
            let cells = h.ratio() * WIDTH / self.makespan.ratio();
            cells.round().to_integer().max(0) as usize
        };
        for a in &self.activities {
            let lead = scale(a.es);
            let busy = scale(a.ef).saturating_sub(lead).max(usize::from(a.duration > Hours::ZERO));
            let slack = scale(a.lf).saturating_sub(lead + busy);
            let _ = writeln!(
                out,
                "{:<name_width$} {:>8} {:>8} {:>8} {:>8} {:>8}  |{}{}{}",
                a.id,
                a.es.to_string(),
                a.ef.to_string(),
                a.ls.to_string(),
                a.lf.to_string(),
                a.slack.to_string(),
                " ".repeat(lead),
                "#".repeat(busy),
                ".".repeat(slack)
            );
        }
        let _ = writeln!(out, "makespan: {} h", self.makespan);
        let _ = writeln!(out, "critical path: {}", self.critical_path.join(" → "));
        out
    }
}

/// Forward and backward passes over the precedence DAG with exact arithmetic.
pub fn critical_path(plan: &VariantPlan, durations: &DurationModel) -> Result<Schedule, PlanError> {
    let n = plan.activities.len();
    let p: Vec<Hours> = plan.activities.iter().map(|a| durations.get(&a.label)).collect::<Result<_, _>>()?;
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for &(i, j) in &plan.arcs {
        succs[i].push(j);
        preds[j].push(i);
    }
    let order = topological_order(plan, &preds, &succs)?;

    let mut es = vec![Hours::ZERO; n];
    let mut ef = vec![Hours::ZERO; n];
    for &v in &order {
        es[v] = preds[v].iter().map(|&u| ef[u]).fold(Hours::ZERO, Hours::max);
        ef[v] = es[v] + p[v];
    }
    let makespan = ef.iter().copied().fold(Hours::ZERO, Hours::max);
    let mut lf = vec![makespan; n];
    let mut ls = vec![makespan; n];
    for &v in order.iter().rev() {
        lf[v] = succs[v].iter().map(|&w| ls[w]).min().unwrap_or(makespan);
        ls[v] = lf[v] - p[v];
    }

    let critical = |v: usize| ls[v] == es[v];
    let pick = |candidates: Vec<usize>| {
        candidates.into_iter().min_by(|&a, &b| plan.activities[a].id.cmp(&plan.activities[b].id))
    };
    let mut critical_path = Vec::new();
    let mut current = pick((0..n).filter(|&v| preds[v].is_empty() && critical(v)).collect());
    while let Some(v) = current {
        critical_path.push(plan.activities[v].id.clone());
        current = pick(succs[v].iter().copied().filter(|&w| critical(w) && es[w] == ef[v]).collect());
    }

    let mut activities: Vec<ScheduledActivity> = (0..n)
        .map(|v| ScheduledActivity {
            id: plan.activities[v].id.clone(),
            label: plan.activities[v].label.clone(),
            duration: p[v],
            es: es[v],
            ef: ef[v],
            ls: ls[v],
            lf: lf[v],
            slack: ls[v] - es[v],
        })
        .collect();
    activities.sort_by(|a, b| a.es.cmp(&b.es).then_with(|| a.id.cmp(&b.id)));
    Ok(Schedule { activities, makespan, critical_path })
}

fn topological_order(plan: &VariantPlan, preds: &[Vec<usize>], succs: &[Vec<usize>]) -> Result<Vec<usize>, PlanError> {
    let n = plan.activities.len();
    let mut indegree: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<(&str, usize)> =
        (0..n).filter(|&v| indegree[v] == 0).map(|v| (plan.activities[v].id.as_str(), v)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(first) = ready.pop_first() {
        let v = first.1;
        order.push(v);
        for &w in &succs[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.insert((plan.activities[w].id.as_str(), w));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(PlanError::Cycle)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelaxationReport {
    pub baseline_makespan: Hours,
    pub plan_makespan: Hours,
    pub gain: Hours,
    pub gain_percent: f64,
    pub slack: BTreeMap<String, Hours>,
}

/// Compares the fully serial execution of `baseline` with the plan's critical path. Both must
/// contain the same activities with the same multiplicities.
pub fn relaxation_report(
    baseline: &[String],
    plan: &VariantPlan,
    durations: &DurationModel,
) -> Result<RelaxationReport, PlanError> {
    let mut base_sorted = baseline.to_vec();
    base_sorted.sort();
    let mut plan_sorted = plan.labels();
    plan_sorted.sort();
    if base_sorted != plan_sorted {
        return Err(PlanError::ActivityMismatch { baseline: base_sorted, plan: plan_sorted });
    }
    let baseline_makespan = baseline.iter().map(|a| durations.get(a)).sum::<Result<Hours, _>>()?;
    let schedule = critical_path(plan, durations)?;
    let gain = baseline_makespan - schedule.makespan;
    let gain_percent = if baseline_makespan == Hours::ZERO {
        0.0
    } else {
        Hours::from(gain.ratio() * 100 / baseline_makespan.ratio()).to_f64()
    };
    Ok(RelaxationReport {
        baseline_makespan,
        plan_makespan: schedule.makespan,
        gain,
        gain_percent,
        slack: schedule.activities.iter().map(|a| (a.id.clone(), a.slack)).collect(),
    })
}
