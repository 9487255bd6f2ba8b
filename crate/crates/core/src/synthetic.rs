//! Seeded synthetic event logs played out from a project tree.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, FixedOffset};
use num_rational::Ratio;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_log::{EventLog, EventRecord, FeatureValue, LogError, Trace};
use crate::hours::{rational_from_f64, Hours};
use crate::petri::{replay_trace, tree_to_petri, PetriError};
use crate::tree::{Operator, ProjectTree, TreeError};

/// Upper bound on redo passes per loop during play-out.
const MAX_REDO: usize = 3;
const REDO_PROBABILITY: f64 = 0.3;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("generator needs at least one activity")]
    NoActivities,
    #[error("block width must be at least 1")]
    ZeroWidth,
    #[error("variant weights must be non-negative and not all zero")]
    BadWeights,
    #[error("variant {0:?} is not in the model's language")]
    NotInLanguage(Vec<String>),
    #[error("bad duration distribution for `{0}`")]
    BadDuration(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Net(#[from] PetriError),
    #[error(transparent)]
    Log(#[from] LogError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSpec {
    /// Tree in its JSON form.
    Tree(serde_json::Value),
    /// Sequence of parallel blocks over generated activity names.
    Blocks { activities: usize, width: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DurationDist {
    Fixed(f64),
    /// Whole minutes drawn uniformly between the bounds, in hours.
    Uniform(f64, f64),
}

impl Default for DurationDist {
    fn default() -> Self {
        DurationDist::Fixed(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedVariant {
    pub trace: Vec<String>,
    pub weight: f64,
    #[serde(default)]
    pub features: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub model: ModelSpec,
    pub cases: u64,
    pub seed: u64,
    /// When given, cases are apportioned to these variants exactly; otherwise the tree is
    /// played out at random, choosing branches in proportion to their frequencies.
    #[serde(default)]
    pub variants: Vec<WeightedVariant>,
    #[serde(default)]
    pub durations: BTreeMap<String, DurationDist>,
    #[serde(default)]
    pub default_duration: DurationDist,
}

impl GeneratorSpec {
    pub fn tree(tree: &ProjectTree, cases: u64, seed: u64) -> Self {
        GeneratorSpec {
            model: ModelSpec::Tree(tree.to_json()),
            cases,
            seed,
            variants: Vec::new(),
            durations: BTreeMap::new(),
            default_duration: DurationDist::default(),
        }
    }

    pub fn model_tree(&self) -> Result<ProjectTree, GenError> {
        match &self.model {
            ModelSpec::Tree(value) => Ok(ProjectTree::from_json(&value.to_string())?),
            ModelSpec::Blocks { activities, width } => block_tree(*activities, *width),
        }
    }
}

/// Activity names `a`..`z`, then `a26`, `a27`, ….
pub fn activity_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("a{i}")
    }
}

fn block_tree(activities: usize, width: usize) -> Result<ProjectTree, GenError> {
    if activities == 0 {
        return Err(GenError::NoActivities);
    }
    if width == 0 {
        return Err(GenError::ZeroWidth);
    }
    let names: Vec<String> = (0..activities).map(activity_name).collect();
    let blocks: Vec<ProjectTree> = names
        .chunks(width)
        .map(|chunk| {
            if chunk.len() == 1 {
                ProjectTree::leaf(chunk[0].clone())
            } else {
                ProjectTree::and(chunk.iter().map(|a| ProjectTree::leaf(a.clone())).collect())
            }
        })
        .collect();
    Ok(if blocks.len() == 1 { blocks.into_iter().next().expect("one block") } else { ProjectTree::seq(blocks) })
}

/// Random trace from the tree's language.
pub fn play_out(tree: &ProjectTree, rng: &mut impl Rng) -> Vec<String> {
    let mut out = Vec::new();
    play(tree, rng, &mut out);
    out
}

fn pick_child(children: &[ProjectTree], rng: &mut impl Rng) -> usize {
    match WeightedIndex::new(children.iter().map(ProjectTree::freq)) {
        Ok(dist) => dist.sample(rng),
        Err(_) => rng.gen_range(0..children.len()),
    }
}

fn play(tree: &ProjectTree, rng: &mut impl Rng, out: &mut Vec<String>) {
    match tree {
        ProjectTree::Leaf { label: Some(a), .. } => out.push(a.clone()),
        ProjectTree::Leaf { label: None, .. } => {}
        ProjectTree::Node { op: Operator::Sequence, children, .. } => {
            for c in children {
                play(c, rng, out);
            }
        }
        ProjectTree::Node { op: Operator::Xor, children, .. } => {
            let i = pick_child(children, rng);
            play(&children[i], rng, out);
        }
        ProjectTree::Node { op: Operator::And, children, .. } => {
            let mut parts: Vec<std::collections::VecDeque<String>> = children
                .iter()
                .map(|c| {
                    let mut part = Vec::new();
                    play(c, rng, &mut part);
                    part.into()
                })
                .collect();
            // uniform over interleavings: draw the next part in proportion to what it has left
            loop {
                let remaining: Vec<usize> = parts.iter().map(|p| p.len()).collect();
                let Ok(dist) = WeightedIndex::new(&remaining) else { break };
                let i = dist.sample(rng);
                out.extend(parts[i].pop_front());
            }
        }
        ProjectTree::Node { op: Operator::Loop, children, .. } => {
            play(&children[0], rng, out);
            let mut redo = 0;
            while redo < MAX_REDO && rng.gen_bool(REDO_PROBABILITY) {
                let i = 1 + pick_child(&children[1..], rng);
                play(&children[i], rng, out);
                play(&children[0], rng, out);
                redo += 1;
            }
        }
    }
}

/// Largest-remainder apportionment of `total` cases to exact rational weights.
fn apportion(weights: &[Ratio<i64>], total: u64) -> Vec<u64> {
    let sum: Ratio<i64> = weights.iter().sum();
    let quotas: Vec<Ratio<i64>> = weights.iter().map(|w| w / sum * Ratio::from_integer(total as i64)).collect();
    let mut counts: Vec<u64> = quotas.iter().map(|q| q.floor().to_integer() as u64).collect();
    let mut left = total - counts.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| quotas[b].fract().cmp(&quotas[a].fract()).then(a.cmp(&b)));
    for i in order {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

fn sample_duration(dist: &DurationDist, rng: &mut impl Rng, activity: &str) -> Result<Hours, GenError> {
    let bad = || GenError::BadDuration(activity.to_string());
    match *dist {
        DurationDist::Fixed(h) => {
            let value = rational_from_f64(h).ok_or_else(bad)?;
            if value < Ratio::from_integer(0) {
                return Err(bad());
            }
            Ok(Hours::from(value))
        }
        DurationDist::Uniform(lo, hi) => {
            if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
                return Err(bad());
            }
            let minutes = rng.gen_range((lo * 60.0).round() as i64..=(hi * 60.0).round() as i64);
            Ok(Hours::from_minutes(minutes))
        }
    }
}

fn feature_value(value: &serde_json::Value) -> FeatureValue {
    match value {
        serde_json::Value::Number(n) => FeatureValue::Number(n.as_f64().unwrap_or(0.0)),
        serde_json::Value::String(s) => FeatureValue::Text(s.clone()),
        other => FeatureValue::Text(other.to_string()),
    }
}

/// Deterministic for a fixed spec; every trace is checked against the model's net.
pub fn generate_synthetic_log(spec: &GeneratorSpec) -> Result<EventLog, GenError> {
    let tree = spec.model_tree()?;
    let net = tree_to_petri(&tree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut cases: Vec<(Vec<String>, BTreeMap<String, FeatureValue>)> = Vec::new();
    if spec.variants.is_empty() {
        for _ in 0..spec.cases {
            cases.push((play_out(&tree, &mut rng), BTreeMap::new()));
        }
    } else {
        let weights: Vec<Ratio<i64>> = spec
            .variants
            .iter()
            .map(|v| rational_from_f64(v.weight).filter(|w| *w >= Ratio::from_integer(0)).ok_or(GenError::BadWeights))
            .collect::<Result<_, _>>()?;
        if weights.iter().all(|w| *w == Ratio::from_integer(0)) {
            return Err(GenError::BadWeights);
        }
        for v in &spec.variants {
            if !replay_trace(&net, &v.trace) {
                return Err(GenError::NotInLanguage(v.trace.clone()));
            }
        }
        for (v, count) in spec.variants.iter().zip(apportion(&weights, spec.cases)) {
            let features: BTreeMap<String, FeatureValue> =
                v.features.iter().map(|(k, x)| (k.clone(), feature_value(x))).collect();
            for _ in 0..count {
                cases.push((v.trace.clone(), features.clone()));
            }
        }
        cases.shuffle(&mut rng);
    }

    let origin = DateTime::parse_from_rfc3339("2024-01-01T08:00:00Z").expect("valid origin");
    let mut traces = Vec::with_capacity(cases.len());
    for (i, (activities, features)) in cases.into_iter().enumerate() {
        if spec.variants.is_empty() && !replay_trace(&net, &activities) {
            return Err(GenError::NotInLanguage(activities));
        }
        let project_id = (i + 1).to_string();
        let mut clock: DateTime<FixedOffset> = origin + Duration::days(7 * i as i64);
        let mut events = Vec::with_capacity(activities.len());
        for (k, activity) in activities.into_iter().enumerate() {
            let dist = spec.durations.get(&activity).unwrap_or(&spec.default_duration);
            let duration = sample_duration(dist, &mut rng, &activity)?;
            events.push(EventRecord {
                project_id: project_id.clone(),
                event_id: format!("e{}", k + 1),
                activity,
                timestamp: clock,
                duration,
                features: features.clone(),
            });
            let seconds = (duration.ratio() * 3600).round().to_integer();
            clock += Duration::seconds(seconds) + Duration::minutes(15);
        }
        traces.push(Trace { project_id, events });
    }
    Ok(EventLog::from_traces(traces)?)
}
