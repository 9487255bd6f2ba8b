//! Decision rules at exclusive-choice places, learned with a small Gini decision tree.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::event_log::{EventLog, FeatureValue, TAU};
use crate::petri::{firing_sequence, PetriNet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecisionError {
    #[error("project {0} does not replay on the net")]
    TraceMismatch(String),
    #[error("no instances to learn from")]
    NoInstances,
    #[error("instances carry no usable features")]
    NoFeatures,
    #[error("unknown decision point `{0}`")]
    UnknownPoint(String),
    #[error("instance label {label} is not an alternative of {point}")]
    BadLabel { point: String, label: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecisionPoint {
    pub id: String,
    pub place: String,
    /// First transition of each branch, aligned with `alternatives`.
    pub branches: Vec<String>,
    pub alternatives: Vec<BTreeSet<String>>,
}

impl DecisionPoint {
    pub fn alternative_name(&self, index: usize) -> String {
        alternative_name(&self.alternatives[index])
    }
}

pub fn alternative_name(set: &BTreeSet<String>) -> String {
    match set.len() {
        0 => TAU.to_string(),
        1 => set.iter().next().cloned().unwrap_or_default(),
        _ => format!("{{{}}}", set.iter().cloned().collect::<Vec<_>>().join(",")),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecisionInstance {
    pub project_id: String,
    pub features: BTreeMap<String, FeatureValue>,
    /// Index into the point's alternatives.
    pub label: usize,
}

/// Places with two or more outgoing arcs. A branch's alternative is the set of visible
/// activities reachable from it but from no sibling branch.
pub fn find_decision_points(net: &PetriNet) -> Vec<DecisionPoint> {
    let mut points = Vec::new();
    for place in net.places() {
        let branches: Vec<String> = net.postset(&place.id).into_iter().map(str::to_string).collect();
        if branches.len() < 2 {
            continue;
        }
        let reach: Vec<BTreeSet<String>> = branches.iter().map(|t| visible_reach(net, t, &place.id)).collect();
        let alternatives = (0..reach.len())
            .map(|i| {
                reach[i]
                    .iter()
                    .filter(|a| !reach.iter().enumerate().any(|(j, r)| j != i && r.contains(*a)))
                    .cloned()
                    .collect()
            })
            .collect();
        points.push(DecisionPoint { id: format!("dp:{}", place.id), place: place.id.clone(), branches, alternatives });
    }
    points
}

fn visible_reach(net: &PetriNet, from: &str, blocked: &str) -> BTreeSet<String> {
    let mut seen = HashSet::new();
    let mut labels = BTreeSet::new();
    let mut queue = VecDeque::from([from.to_string()]);
    while let Some(id) = queue.pop_front() {
        if id == blocked || !seen.insert(id.clone()) {
            continue;
        }
        if let Some(label) = net.transition(&id).and_then(|t| t.label.clone()) {
            labels.insert(label);
        }
        queue.extend(net.postset(&id).into_iter().map(str::to_string));
    }
    labels
}

/// Labels each case by the branch its replay takes at the point's first visit.
pub fn extract_instances(
    net: &PetriNet,
    log: &EventLog,
    point: &DecisionPoint,
) -> Result<Vec<DecisionInstance>, DecisionError> {
    let mut out = Vec::new();
    for trace in log.traces() {
        let firing = firing_sequence(net, &trace.activities())
            .ok_or_else(|| DecisionError::TraceMismatch(trace.project_id.clone()))?;
        if let Some(label) = branch_taken(net, &firing, point) {
            out.push(DecisionInstance { project_id: trace.project_id.clone(), features: trace.case_features(), label });
        }
    }
    Ok(out)
}

fn branch_taken(net: &PetriNet, firing: &[String], point: &DecisionPoint) -> Option<usize> {
    firing
        .iter()
        .find(|t| net.preset(t).contains(&point.place.as_str()))
        .and_then(|t| point.branches.iter().position(|b| b == t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RuleConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig { max_depth: 4, min_leaf: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Condition {
    Equals { feature: String, value: String },
    AtMost { feature: String, threshold: f64 },
}

impl Condition {
    pub fn holds(&self, features: &BTreeMap<String, FeatureValue>) -> bool {
        match (self, features) {
            (Condition::Equals { feature, value }, f) => f.get(feature).is_some_and(|v| v.to_string() == *value),
            (Condition::AtMost { feature, threshold }, f) => {
                matches!(f.get(feature), Some(FeatureValue::Number(v)) if v <= threshold)
            }
        }
    }

    fn text(&self, negated: bool) -> String {
        match self {
            Condition::Equals { feature, value } => format!("{feature} {} {value}", if negated { "!=" } else { "=" }),
            Condition::AtMost { feature, threshold } => {
                format!("{feature} {} {threshold}", if negated { ">" } else { "<=" })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RuleNode {
    Leaf { alternative: usize, support: usize, correct: usize },
    Split { condition: Condition, then: Box<RuleNode>, otherwise: Box<RuleNode> },
}

impl RuleNode {
    fn predict(&self, features: &BTreeMap<String, FeatureValue>) -> usize {
        match self {
            RuleNode::Leaf { alternative, .. } => *alternative,
            RuleNode::Split { condition, then, otherwise } => {
                if condition.holds(features) {
                    then.predict(features)
                } else {
                    otherwise.predict(features)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RuleNode::Leaf { .. } => 0,
            RuleNode::Split { then, otherwise, .. } => 1 + then.depth().max(otherwise.depth()),
        }
    }

    fn paths(&self, prefix: &mut Vec<String>, out: &mut Vec<(Vec<String>, usize, usize, usize)>) {
        match self {
            RuleNode::Leaf { alternative, support, correct } => {
                out.push((prefix.clone(), *alternative, *support, *correct))
            }
            RuleNode::Split { condition, then, otherwise } => {
                prefix.push(condition.text(false));
                then.paths(prefix, out);
                prefix.pop();
                prefix.push(condition.text(true));
                otherwise.paths(prefix, out);
                prefix.pop();
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRule {
    pub point: String,
    pub alternatives: Vec<String>,
    pub tree: RuleNode,
    pub correct: usize,
    pub total: usize,
}

impl DecisionRule {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    /// One `IF … THEN …` line per leaf.
    pub fn text(&self) -> Vec<String> {
        let mut paths = Vec::new();
        self.tree.paths(&mut Vec::new(), &mut paths);
        paths
            .into_iter()
            .map(|(conds, alt, support, correct)| {
                let guard = if conds.is_empty() { "TRUE".to_string() } else { conds.join(" AND ") };
                let acc = if support == 0 { 1.0 } else { correct as f64 / support as f64 };
                format!("IF {guard} THEN {} (support={support}, acc={acc})", self.alternatives[alt])
            })
            .collect()
    }

    /// Compact form such as `client = IZ → d else {b,c}`.
    pub fn summary(&self) -> String {
        fn render(node: &RuleNode, names: &[String], nested: bool) -> String {
            match node {
                RuleNode::Leaf { alternative, .. } => names[*alternative].clone(),
                RuleNode::Split { condition, then, otherwise } => {
                    let body = format!(
                        "{} → {} else {}",
                        condition.text(false),
                        render(then, names, true),
                        render(otherwise, names, true)
                    );
                    if nested {
                        format!("({body})")
                    } else {
                        body
                    }
                }
            }
        }
        render(&self.tree, &self.alternatives, false)
    }

    /// Guard for one alternative: disjunction of the leaf paths predicting it.
    pub fn guard_for(&self, alternative: usize) -> Option<String> {
        let mut paths = Vec::new();
        self.tree.paths(&mut Vec::new(), &mut paths);
        let guards: Vec<String> = paths
            .into_iter()
            .filter(|(_, alt, _, _)| *alt == alternative)
            .map(|(conds, ..)| if conds.is_empty() { "TRUE".to_string() } else { conds.join(" AND ") })
            .collect();
        if guards.is_empty() {
            None
        } else {
            Some(guards.join(" OR "))
        }
    }

    pub fn to_json(&self) -> Value {
        fn node_json(node: &RuleNode, names: &[String]) -> Value {
            match node {
                RuleNode::Leaf { alternative, support, correct } => {
                    json!({"alternative": names[*alternative], "support": support, "correct": correct})
                }
                RuleNode::Split { condition, then, otherwise } => json!({
                    "condition": condition,
                    "then": node_json(then, names),
                    "else": node_json(otherwise, names),
                }),
            }
        }
        json!({
            "point": self.point,
            "alternatives": self.alternatives,
            "accuracy": self.accuracy(),
            "correct": self.correct,
            "total": self.total,
            "summary": self.summary(),
            "text": self.text(),
            "tree": node_json(&self.tree, &self.alternatives),
        })
    }
}

impl Serialize for DecisionRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Greedy binary tree minimizing weighted Gini impurity; ties go to the first candidate in
/// (feature name, value or threshold) order.
pub fn learn_rules(
    point: &DecisionPoint,
    instances: &[DecisionInstance],
    config: &RuleConfig,
) -> Result<DecisionRule, DecisionError> {
    if instances.is_empty() {
        return Err(DecisionError::NoInstances);
    }
    if let Some(bad) = instances.iter().find(|i| i.label >= point.alternatives.len()) {
        return Err(DecisionError::BadLabel { point: point.id.clone(), label: bad.label });
    }
    let labels: BTreeSet<usize> = instances.iter().map(|i| i.label).collect();
    if labels.len() > 1 && instances.iter().all(|i| i.features.is_empty()) {
        return Err(DecisionError::NoFeatures);
    }
    let all: Vec<&DecisionInstance> = instances.iter().collect();
    let tree = grow(&all, point.alternatives.len(), config, 0);
    let correct = instances.iter().filter(|i| tree.predict(&i.features) == i.label).count();
    Ok(DecisionRule {
        point: point.id.clone(),
        alternatives: (0..point.alternatives.len()).map(|i| point.alternative_name(i)).collect(),
        tree,
        correct,
        total: instances.len(),
    })
}

type Impurity = Ratio<i128>;

fn class_counts(items: &[&DecisionInstance], classes: usize) -> Vec<usize> {
    let mut counts = vec![0; classes];
    for i in items {
        counts[i.label] += 1;
    }
    counts
}

/// Gini impurity scaled by the subset size: n − Σ c²/n.
fn scaled_gini(counts: &[usize]) -> Impurity {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Impurity::from_integer(0);
    }
    let squares: i128 = counts.iter().map(|&c| (c * c) as i128).sum();
    Impurity::from_integer(n as i128) - Impurity::new(squares, n as i128)
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn grow(items: &[&DecisionInstance], classes: usize, config: &RuleConfig, depth: usize) -> RuleNode {
    let counts = class_counts(items, classes);
    let alternative = majority(&counts);
    let leaf = RuleNode::Leaf { alternative, support: items.len(), correct: counts[alternative] };
    let parent = scaled_gini(&counts);
    if depth >= config.max_depth || parent == Impurity::from_integer(0) || items.len() < 2 * config.min_leaf.max(1) {
        return leaf;
    }
    let mut best: Option<(Impurity, Condition)> = None;
    for condition in candidates(items) {
        let (yes, no): (Vec<&DecisionInstance>, Vec<&DecisionInstance>) =
            items.iter().partition(|i| condition.holds(&i.features));
        if yes.len() < config.min_leaf.max(1) || no.len() < config.min_leaf.max(1) {
            continue;
        }
        let impurity = scaled_gini(&class_counts(&yes, classes)) + scaled_gini(&class_counts(&no, classes));
        if best.as_ref().is_none_or(|(b, _)| impurity < *b) {
            best = Some((impurity, condition));
        }
    }
    match best {
        Some((impurity, condition)) if impurity < parent => {
            let (yes, no): (Vec<&DecisionInstance>, Vec<&DecisionInstance>) =
                items.iter().partition(|i| condition.holds(&i.features));
            RuleNode::Split {
                condition,
                then: Box::new(grow(&yes, classes, config, depth + 1)),
                otherwise: Box::new(grow(&no, classes, config, depth + 1)),
            }
        }
        _ => leaf,
    }
}

fn candidates(items: &[&DecisionInstance]) -> Vec<Condition> {
    let mut by_feature: BTreeMap<&str, Vec<&FeatureValue>> = BTreeMap::new();
    for i in items {
        for (name, value) in &i.features {
            by_feature.entry(name).or_default().push(value);
        }
    }
    let mut out = Vec::new();
    for (name, values) in by_feature {
        let numbers: Option<Vec<f64>> = values
            .iter()
            .map(|v| match v {
                FeatureValue::Number(x) => Some(*x),
                FeatureValue::Text(_) => None,
            })
            .collect();
        match numbers {
            Some(mut xs) => {
                xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
                xs.dedup();
                for pair in xs.windows(2) {
                    out.push(Condition::AtMost { feature: name.to_string(), threshold: (pair[0] + pair[1]) / 2.0 });
                }
            }
            None => {
                let distinct: BTreeSet<String> = values.iter().map(|v| v.to_string()).collect();
                for value in distinct {
                    out.push(Condition::Equals { feature: name.to_string(), value });
                }
            }
        }
    }
    out
}

/// Writes each rule's per-alternative guard onto the arcs leaving its decision place.
pub fn annotate_rules(net: &PetriNet, rules: &[DecisionRule]) -> Result<PetriNet, DecisionError> {
    let points = find_decision_points(net);
    let mut annotated = net.clone();
    for rule in rules {
        let point = points
            .iter()
            .find(|p| p.id == rule.point && p.alternatives.len() == rule.alternatives.len())
            .ok_or_else(|| DecisionError::UnknownPoint(rule.point.clone()))?;
        for arc in annotated.arcs_mut() {
            if arc.source != point.place {
                continue;
            }
            if let Some(i) = point.branches.iter().position(|b| *b == arc.target) {
                arc.rule = rule.guard_for(i);
            }
        }
    }
    Ok(annotated)
}

/// Rules for every decision point of `net`. With `skip_unfit`, cases that do not replay are
/// left out instead of failing. Points no case reaches, or whose cases carry no features,
/// get no rule.
pub fn mine_rules(
    net: &PetriNet,
    log: &EventLog,
    config: &RuleConfig,
    skip_unfit: bool,
) -> Result<Vec<DecisionRule>, DecisionError> {
    let points = find_decision_points(net);
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let mut firings = Vec::new();
    for trace in log.traces() {
        match firing_sequence(net, &trace.activities()) {
            Some(f) => firings.push((trace, f)),
            None if skip_unfit => {}
            None => return Err(DecisionError::TraceMismatch(trace.project_id.clone())),
        }
    }
    let mut rules = Vec::new();
    for point in &points {
        let instances: Vec<DecisionInstance> = firings
            .iter()
            .filter_map(|(trace, firing)| {
                branch_taken(net, firing, point).map(|label| DecisionInstance {
                    project_id: trace.project_id.clone(),
                    features: trace.case_features(),
                    label,
                })
            })
            .collect();
        if instances.is_empty() {
            continue;
        }
        match learn_rules(point, &instances, config) {
            Ok(rule) => rules.push(rule),
            Err(DecisionError::NoFeatures) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(rules)
}
