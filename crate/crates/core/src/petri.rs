//! Timed, frequency-annotated workflow Petri nets.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::dot::quote;
use crate::event_log::TAU;
use crate::hours::{Fraction, Hours};
use crate::tree::{Operator, ProjectTree, TreeError};

/// Markings explored before soundness is reported as unknown.
pub const DEFAULT_MAX_STATES: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PetriError {
    #[error("malformed tree: {0}")]
    MalformedTree(#[from] TreeError),
    #[error("filter threshold {0} is outside [0, 1]")]
    InvalidGamma(String),
    #[error("case count must be positive")]
    NoCases,
    #[error("node id `{0}` already in use")]
    DuplicateId(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("arc {0} -> {1} does not connect a place and a transition")]
    NotBipartite(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Place {
    pub id: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub id: String,
    /// `None` is a silent τ transition.
    pub label: Option<String>,
    pub duration: Hours,
    pub freq: u64,
    /// Preorder index of the tree node the transition was built from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }

    pub fn display_label(&self) -> &str {
        self.label.as_deref().unwrap_or(TAU)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub source: String,
    pub target: String,
    pub freq: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<Arc>,
    source: String,
    sink: String,
}

/// Token counts per place.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Marking(BTreeMap<String, u32>);

impl Marking {
    pub fn single(place: &str) -> Self {
        Marking(BTreeMap::from([(place.to_string(), 1)]))
    }

    pub fn tokens(&self, place: &str) -> u32 {
        self.0.get(place).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    pub is_workflow_net: bool,
    pub dead_transitions: BTreeSet<String>,
    pub disconnected_nodes: BTreeSet<String>,
    /// `None` when the state space exceeded the exploration bound.
    pub sound: Option<bool>,
    pub reachable_markings: Option<usize>,
    pub issues: Vec<String>,
}

impl PetriNet {
    pub fn new(source: &str, sink: &str) -> Self {
        let mut net = PetriNet {
            places: Vec::new(),
            transitions: Vec::new(),
            arcs: Vec::new(),
            source: source.to_string(),
            sink: sink.to_string(),
        };
        net.places.push(Place { id: source.to_string() });
        if sink != source {
            net.places.push(Place { id: sink.to_string() });
        }
        net
    }

    fn id_taken(&self, id: &str) -> bool {
        self.places.iter().any(|p| p.id == id) || self.transitions.iter().any(|t| t.id == id)
    }

    pub fn add_place(&mut self, id: &str) -> Result<(), PetriError> {
        if self.id_taken(id) {
            return Err(PetriError::DuplicateId(id.to_string()));
        }
        self.places.push(Place { id: id.to_string() });
        Ok(())
    }

    pub fn add_transition(&mut self, id: &str, label: Option<&str>, freq: u64) -> Result<(), PetriError> {
        if self.id_taken(id) {
            return Err(PetriError::DuplicateId(id.to_string()));
        }
        self.transitions.push(Transition {
            id: id.to_string(),
            label: label.map(str::to_string),
            duration: Hours::ZERO,
            freq,
            node: None,
        });
        Ok(())
    }

    pub fn add_arc(&mut self, source: &str, target: &str, freq: u64) -> Result<(), PetriError> {
        let kind = |id: &str| {
            if self.places.iter().any(|p| p.id == id) {
                Ok(true)
            } else if self.transitions.iter().any(|t| t.id == id) {
                Ok(false)
            } else {
                Err(PetriError::UnknownNode(id.to_string()))
            }
        };
        if kind(source)? == kind(target)? {
            return Err(PetriError::NotBipartite(source.to_string(), target.to_string()));
        }
        self.arcs.push(Arc { source: source.to_string(), target: target.to_string(), freq, rule: None });
        Ok(())
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub(crate) fn arcs_mut(&mut self) -> &mut [Arc] {
        &mut self.arcs
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn sink(&self) -> &str {
        &self.sink
    }

    pub fn is_place(&self, id: &str) -> bool {
        self.places.iter().any(|p| p.id == id)
    }

    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.id == id)
    }

    pub fn initial_marking(&self) -> Marking {
        Marking::single(&self.source)
    }

    pub fn final_marking(&self) -> Marking {
        Marking::single(&self.sink)
    }

    pub fn visible_labels(&self) -> BTreeSet<String> {
        self.transitions.iter().filter_map(|t| t.label.clone()).collect()
    }

    pub fn arc_set(&self) -> BTreeSet<(String, String)> {
        self.arcs.iter().map(|a| (a.source.clone(), a.target.clone())).collect()
    }

    pub fn preset(&self, id: &str) -> Vec<&str> {
        self.arcs.iter().filter(|a| a.target == id).map(|a| a.source.as_str()).collect()
    }

    pub fn postset(&self, id: &str) -> Vec<&str> {
        self.arcs.iter().filter(|a| a.source == id).map(|a| a.target.as_str()).collect()
    }

    /// Sets firing durations by activity label; τ transitions stay at zero.
    pub fn with_durations(mut self, durations: &BTreeMap<String, Hours>) -> Self {
        for t in &mut self.transitions {
            if let Some(label) = &t.label {
                if let Some(d) = durations.get(label) {
                    t.duration = *d;
                }
            }
        }
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct TransitionRepr<'a> {
            id: &'a str,
            label: &'a str,
            tau: bool,
            duration: Hours,
            freq: u64,
            #[serde(skip_serializing_if = "Option::is_none")]
            node: Option<usize>,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            source: &'a str,
            sink: &'a str,
            places: &'a [Place],
            transitions: Vec<TransitionRepr<'a>>,
            arcs: &'a [Arc],
        }
        serde_json::to_value(Repr {
            source: &self.source,
            sink: &self.sink,
            places: &self.places,
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionRepr {
                    id: &t.id,
                    label: t.display_label(),
                    tau: t.is_silent(),
                    duration: t.duration,
                    freq: t.freq,
                    node: t.node,
                })
                .collect(),
            arcs: &self.arcs,
        })
        .expect("net serializes")
    }

    /// Graphviz rendering; τ transitions are filled black rectangles.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph petri {\n  rankdir=LR;\n");
        for p in &self.places {
            let label = if p.id == self.source { format!("{}\n●", p.id) } else { p.id.clone() };
            let _ = writeln!(out, "  {} [shape=circle, label={}];", quote(&p.id), quote(&label));
        }
        for t in &self.transitions {
            match &t.label {
                Some(a) => {
                    let _ = writeln!(
                        out,
                        "  {} [shape=box, label={}];",
                        quote(&t.id),
                        quote(&format!("{a}\n({})", t.freq))
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "  {} [shape=box, style=filled, fillcolor=black, width=0.15, label=\"\", xlabel={}];",
                        quote(&t.id),
                        quote(&t.freq.to_string())
                    );
                }
            }
        }
        for a in &self.arcs {
            let label = match &a.rule {
                Some(rule) => format!("{}\n{rule}", a.freq),
                None => a.freq.to_string(),
            };
            let _ = writeln!(out, "  {} -> {} [label={}];", quote(&a.source), quote(&a.target), quote(&label));
        }
        out.push_str("}\n");
        out
    }
}

struct Builder {
    net: PetriNet,
    places: usize,
    transitions: usize,
    node: usize,
}

impl Builder {
    fn place(&mut self) -> String {
        self.places += 1;
        let id = format!("p{}", self.places);
        self.net.places.push(Place { id: id.clone() });
        id
    }

    fn transition(&mut self, label: Option<&str>, freq: u64, node: usize) -> String {
        self.transitions += 1;
        let id = format!("t{}", self.transitions);
        self.net.transitions.push(Transition {
            id: id.clone(),
            label: label.map(str::to_string),
            duration: Hours::ZERO,
            freq,
            node: Some(node),
        });
        id
    }

    fn arc(&mut self, source: &str, target: &str, freq: u64) {
        self.net.arcs.push(Arc { source: source.into(), target: target.into(), freq, rule: None });
    }

    fn connect(&mut self, entry: &str, t: &str, exit: &str, freq: u64) {
        self.arc(entry, t, freq);
        self.arc(t, exit, freq);
    }

    fn translate(&mut self, tree: &ProjectTree, entry: &str, exit: &str) {
        let node = self.node;
        self.node += 1;
        match tree {
            ProjectTree::Leaf { label, freq } => {
                let t = self.transition(label.as_deref(), *freq, node);
                self.connect(entry, &t, exit, *freq);
            }
            ProjectTree::Node { op: Operator::Sequence, children, .. } => {
                let mut current = entry.to_string();
                for (i, child) in children.iter().enumerate() {
                    let next = if i + 1 == children.len() { exit.to_string() } else { self.place() };
                    self.translate(child, &current, &next);
                    current = next;
                }
            }
            ProjectTree::Node { op: Operator::Xor, children, .. } => {
                for child in children {
                    self.translate(child, entry, exit);
                }
            }
            ProjectTree::Node { op: Operator::And, children, freq } => {
                let split = self.transition(None, *freq, node);
                self.arc(entry, &split, *freq);
                let mut exits = Vec::new();
                for child in children {
                    let (child_in, child_out) = (self.place(), self.place());
                    self.arc(&split, &child_in, *freq);
                    self.translate(child, &child_in, &child_out);
                    exits.push(child_out);
                }
                let join = self.transition(None, *freq, node);
                for p in exits {
                    self.arc(&p, &join, *freq);
                }
                self.arc(&join, exit, *freq);
            }
            ProjectTree::Node { op: Operator::Loop, children, freq } => {
                let (loop_in, loop_out) = (self.place(), self.place());
                let enter = self.transition(None, *freq, node);
                self.connect(entry, &enter, &loop_in, *freq);
                self.translate(&children[0], &loop_in, &loop_out);
                for redo in &children[1..] {
                    self.translate(redo, &loop_out, &loop_in);
                }
                let leave = self.transition(None, *freq, node);
                self.connect(&loop_out, &leave, exit, *freq);
            }
        }
    }
}

/// Block-structured translation: the result is a workflow net with source `start` and sink `end`.
pub fn tree_to_petri(tree: &ProjectTree) -> Result<PetriNet, PetriError> {
    tree.validate()?;
    let mut builder = Builder { net: PetriNet::new("start", "end"), places: 0, transitions: 0, node: 0 };
    builder.translate(tree, "start", "end");
    Ok(builder.net)
}

/// Index-based firing engine over a net.
pub(crate) struct Engine<'a> {
    net: &'a PetriNet,
    pre: Vec<Vec<usize>>,
    post: Vec<Vec<usize>>,
    source: Option<usize>,
    sink: Option<usize>,
}

type State = Vec<u32>;

impl<'a> Engine<'a> {
    pub(crate) fn new(net: &'a PetriNet) -> Self {
        let place_index: HashMap<&str, usize> =
            net.places.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
        let trans_index: HashMap<&str, usize> =
            net.transitions.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
        let mut pre = vec![Vec::new(); net.transitions.len()];
        let mut post = vec![Vec::new(); net.transitions.len()];
        for a in &net.arcs {
            if let (Some(&p), Some(&t)) = (place_index.get(a.source.as_str()), trans_index.get(a.target.as_str())) {
                pre[t].push(p);
            }
            if let (Some(&t), Some(&p)) = (trans_index.get(a.source.as_str()), place_index.get(a.target.as_str())) {
                post[t].push(p);
            }
        }
        Engine {
            net,
            pre,
            post,
            source: place_index.get(net.source.as_str()).copied(),
            sink: place_index.get(net.sink.as_str()).copied(),
        }
    }

    fn initial(&self) -> Option<State> {
        let mut m = vec![0; self.net.places.len()];
        m[self.source?] = 1;
        Some(m)
    }

    fn is_final(&self, m: &State) -> bool {
        match self.sink {
            Some(s) => m[s] == 1 && m.iter().sum::<u32>() == 1,
            None => false,
        }
    }

    /// Transitions without input places are never enabled.
    fn enabled(&self, m: &State, t: usize) -> bool {
        !self.pre[t].is_empty() && self.pre[t].iter().all(|&p| m[p] > 0)
    }

    fn fire(&self, m: &State, t: usize) -> State {
        let mut next = m.clone();
        for &p in &self.pre[t] {
            next[p] -= 1;
        }
        for &p in &self.post[t] {
            next[p] += 1;
        }
        next
    }

    /// Breadth-first search for a firing sequence whose visible labels spell `trace`.
    pub(crate) fn replay(&self, trace: &[String], max_states: usize) -> Option<Vec<usize>> {
        let start = (self.initial()?, 0usize);
        // (marking, trace position) -> predecessor and the transition fired from it
        type Node = (State, usize);
        let mut parent: HashMap<Node, Option<(Node, usize)>> = HashMap::new();
        parent.insert(start.clone(), None);
        let mut queue = VecDeque::from([start]);
        while let Some(state) = queue.pop_front() {
            let (m, pos) = &state;
            if *pos == trace.len() && self.is_final(m) {
                let mut firing = Vec::new();
                let mut cursor = state.clone();
                while let Some(Some((prev, t))) = parent.get(&cursor) {
                    firing.push(*t);
                    cursor = prev.clone();
                }
                firing.reverse();
                return Some(firing);
            }
            for (t, transition) in self.net.transitions.iter().enumerate() {
                if !self.enabled(m, t) {
                    continue;
                }
                let next_pos = match &transition.label {
                    None => *pos,
                    Some(a) if trace.get(*pos) == Some(a) => pos + 1,
                    Some(_) => continue,
                };
                let next = (self.fire(m, t), next_pos);
                if !parent.contains_key(&next) {
                    if parent.len() >= max_states {
                        return None;
                    }
                    parent.insert(next.clone(), Some((state.clone(), t)));
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

/// True iff some firing sequence with these visible labels leads from `[start]` to `[end]`.
pub fn replay_trace(net: &PetriNet, trace: &[String]) -> bool {
    Engine::new(net).replay(trace, DEFAULT_MAX_STATES).is_some()
}

/// Transition ids of a firing sequence that replays the trace, if any.
pub fn firing_sequence(net: &PetriNet, trace: &[String]) -> Option<Vec<String>> {
    let engine = Engine::new(net);
    engine.replay(trace, DEFAULT_MAX_STATES).map(|seq| seq.into_iter().map(|t| net.transitions[t].id.clone()).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimedFiring {
    pub transition: String,
    pub start: Hours,
    pub end: Hours,
}

/// As-soon-as-possible timed execution along a replaying firing sequence: every token records
/// the instant it was produced, and a transition starts once all its input tokens exist.
pub fn timed_execution(net: &PetriNet, trace: &[String]) -> Option<(Hours, Vec<TimedFiring>)> {
    let engine = Engine::new(net);
    let sequence = engine.replay(trace, DEFAULT_MAX_STATES)?;
    let mut tokens: Vec<Vec<Hours>> = vec![Vec::new(); net.places.len()];
    tokens[engine.source?].push(Hours::ZERO);
    let mut firings = Vec::new();
    for t in sequence {
        let mut start = Hours::ZERO;
        for &p in &engine.pre[t] {
            let queue = &mut tokens[p];
            let earliest = (0..queue.len()).min_by_key(|&i| queue[i])?;
            start = start.max(queue.swap_remove(earliest));
        }
        let end = start + net.transitions[t].duration;
        for &p in &engine.post[t] {
            tokens[p].push(end);
        }
        firings.push(TimedFiring { transition: net.transitions[t].id.clone(), start, end });
    }
    let completion = tokens[engine.sink?].iter().copied().max()?;
    Some((completion, firings))
}

/// Workflow-net shape plus bounded reachability analysis for soundness.
pub fn check_structure(net: &PetriNet, max_states: usize) -> StructuralReport {
    let mut issues = Vec::new();
    let ids: Vec<&str> =
        net.places.iter().map(|p| p.id.as_str()).chain(net.transitions.iter().map(|t| t.id.as_str())).collect();
    let has_source = net.is_place(&net.source);
    let has_sink = net.is_place(&net.sink);
    if !has_source {
        issues.push(format!("source place `{}` is missing", net.source));
    }
    if !has_sink {
        issues.push(format!("sink place `{}` is missing", net.sink));
    }
    for p in &net.places {
        let no_in = net.preset(&p.id).is_empty();
        let no_out = net.postset(&p.id).is_empty();
        if no_in && p.id != net.source {
            issues.push(format!("place `{}` has no input transition", p.id));
        }
        if no_out && p.id != net.sink {
            issues.push(format!("place `{}` has no output transition", p.id));
        }
        if p.id == net.source && !no_in {
            issues.push("source place has incoming arcs".to_string());
        }
        if p.id == net.sink && !no_out {
            issues.push("sink place has outgoing arcs".to_string());
        }
    }

    let forward = reach_set(net, &net.source, true);
    let backward = reach_set(net, &net.sink, false);
    let disconnected_nodes: BTreeSet<String> =
        ids.iter().filter(|id| !(forward.contains(**id) && backward.contains(**id))).map(|id| id.to_string()).collect();
    let is_workflow_net = has_source && has_sink && issues.is_empty() && disconnected_nodes.is_empty();

    let engine = Engine::new(net);
    let (sound, dead_transitions, reachable_markings) = match engine.initial() {
        None => (Some(false), BTreeSet::new(), None),
        Some(initial) => match explore(&engine, initial, max_states) {
            None => (None, BTreeSet::new(), None),
            Some(graph) => {
                let dead: BTreeSet<String> = net
                    .transitions
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !graph.fired[*i])
                    .map(|(_, t)| t.id.clone())
                    .collect();
                let proper = graph.states.iter().all(|m| match engine.sink {
                    Some(s) if m[s] > 0 => engine.is_final(m),
                    _ => true,
                });
                let completes = graph.all_reach_final(&engine);
                let sound = is_workflow_net && dead.is_empty() && proper && completes;
                if !proper {
                    issues.push("improper completion: tokens remain when the sink is marked".into());
                }
                if !completes {
                    issues.push("some reachable marking cannot complete".into());
                }
                (Some(sound), dead, Some(graph.states.len()))
            }
        },
    };
    StructuralReport { is_workflow_net, dead_transitions, disconnected_nodes, sound, reachable_markings, issues }
}

fn reach_set<'a>(net: &'a PetriNet, from: &'a str, forward: bool) -> HashSet<&'a str> {
    let mut seen = HashSet::new();
    if !net.places.iter().any(|p| p.id == from) {
        return seen;
    }
    let mut queue = VecDeque::from([from]);
    while let Some(id) = queue.pop_front() {
        if !seen.insert(id) {
            continue;
        }
        for a in &net.arcs {
            if forward && a.source == id {
                queue.push_back(&a.target);
            } else if !forward && a.target == id {
                queue.push_back(&a.source);
            }
        }
    }
    seen
}

struct ReachabilityGraph {
    states: Vec<State>,
    edges: Vec<Vec<usize>>,
    fired: Vec<bool>,
}

impl ReachabilityGraph {
    fn all_reach_final(&self, engine: &Engine) -> bool {
        let mut reverse = vec![Vec::new(); self.states.len()];
        for (from, targets) in self.edges.iter().enumerate() {
            for &to in targets {
                reverse[to].push(from);
            }
        }
        let mut good = vec![false; self.states.len()];
        let mut queue: VecDeque<usize> = (0..self.states.len()).filter(|&i| engine.is_final(&self.states[i])).collect();
        while let Some(s) = queue.pop_front() {
            if good[s] {
                continue;
            }
            good[s] = true;
            queue.extend(reverse[s].iter().copied());
        }
        good.iter().all(|g| *g)
    }
}

fn explore(engine: &Engine, initial: State, max_states: usize) -> Option<ReachabilityGraph> {
    let mut index: HashMap<State, usize> = HashMap::new();
    let mut graph =
        ReachabilityGraph { states: Vec::new(), edges: Vec::new(), fired: vec![false; engine.net.transitions.len()] };
    index.insert(initial.clone(), 0);
    graph.states.push(initial);
    graph.edges.push(Vec::new());
    let mut cursor = 0;
    while cursor < graph.states.len() {
        let m = graph.states[cursor].clone();
        for t in 0..engine.net.transitions.len() {
            if !engine.enabled(&m, t) {
                continue;
            }
            graph.fired[t] = true;
            let next = engine.fire(&m, t);
            let target = match index.get(&next) {
                Some(&i) => i,
                None => {
                    if graph.states.len() >= max_states {
                        return None;
                    }
                    let i = graph.states.len();
                    index.insert(next.clone(), i);
                    graph.states.push(next);
                    graph.edges.push(Vec::new());
                    i
                }
            };
            graph.edges[cursor].push(target);
        }
        cursor += 1;
    }
    Some(graph)
}

/// Removes every flow whose frequency share of the cases is below `gamma`, then transitions
/// left with neither input nor output places, then places left without arcs.
pub fn filter_model(net: &PetriNet, gamma: f64, case_count: u64) -> Result<(PetriNet, StructuralReport), PetriError> {
    let gamma = Fraction::from_f64(gamma).ok_or_else(|| PetriError::InvalidGamma(gamma.to_string()))?;
    filter_model_exact(net, gamma, case_count)
}

pub fn filter_model_exact(
    net: &PetriNet,
    gamma: Fraction,
    case_count: u64,
) -> Result<(PetriNet, StructuralReport), PetriError> {
    if case_count == 0 {
        return Err(PetriError::NoCases);
    }
    let mut filtered = net.clone();
    filtered.arcs.retain(|a| !gamma.exceeds_share(a.freq, case_count));
    let touched: HashSet<String> = filtered.arcs.iter().flat_map(|a| [a.source.clone(), a.target.clone()]).collect();
    filtered.transitions.retain(|t| touched.contains(&t.id));
    filtered.places.retain(|p| touched.contains(&p.id));
    let report = check_structure(&filtered, DEFAULT_MAX_STATES);
    Ok((filtered, report))
}
