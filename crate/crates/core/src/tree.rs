//! Block-structured project trees over sequence, exclusive choice, parallel and redo-loop operators.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_log::{is_reserved_label, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    #[serde(rename = "seq")]
    Sequence,
    Xor,
    And,
    Loop,
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Sequence => "→",
            Operator::Xor => "×",
            Operator::And => "∧",
            Operator::Loop => "↺",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::Sequence => "seq",
            Operator::Xor => "xor",
            Operator::And => "and",
            Operator::Loop => "loop",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("loop node needs at least two children, found {0}")]
    LoopArity(usize),
    #[error("{0} node without children")]
    Childless(&'static str),
    #[error("invalid leaf label `{0}`")]
    BadLabel(String),
    #[error("malformed tree JSON: {0}")]
    Json(String),
}

/// A project tree; every node carries the number of cases routed through it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProjectTree {
    /// `label == None` is the silent activity τ.
    Leaf {
        label: Option<String>,
        freq: u64,
    },
    Node {
        op: Operator,
        children: Vec<ProjectTree>,
        freq: u64,
    },
}

impl ProjectTree {
    pub fn leaf(label: impl Into<String>) -> Self {
        ProjectTree::Leaf { label: Some(label.into()), freq: 0 }
    }

    pub fn tau() -> Self {
        ProjectTree::Leaf { label: None, freq: 0 }
    }

    pub fn node(op: Operator, children: Vec<ProjectTree>) -> Self {
        ProjectTree::Node { op, children, freq: 0 }
    }

    pub fn seq(children: Vec<ProjectTree>) -> Self {
        Self::node(Operator::Sequence, children)
    }

    pub fn xor(children: Vec<ProjectTree>) -> Self {
        Self::node(Operator::Xor, children)
    }

    pub fn and(children: Vec<ProjectTree>) -> Self {
        Self::node(Operator::And, children)
    }

    pub fn looped(children: Vec<ProjectTree>) -> Self {
        Self::node(Operator::Loop, children)
    }

    pub fn with_freq(mut self, f: u64) -> Self {
        match &mut self {
            ProjectTree::Leaf { freq, .. } | ProjectTree::Node { freq, .. } => *freq = f,
        }
        self
    }

    pub fn freq(&self) -> u64 {
        match self {
            ProjectTree::Leaf { freq, .. } | ProjectTree::Node { freq, .. } => *freq,
        }
    }

    pub fn children(&self) -> &[ProjectTree] {
        match self {
            ProjectTree::Leaf { .. } => &[],
            ProjectTree::Node { children, .. } => children,
        }
    }

    pub fn operator(&self) -> Option<Operator> {
        match self {
            ProjectTree::Leaf { .. } => None,
            ProjectTree::Node { op, .. } => Some(*op),
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, ProjectTree::Leaf { label: None, .. })
    }

    /// Visible activity labels occurring in the tree.
    pub fn activities(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let ProjectTree::Leaf { label: Some(a), .. } = t {
                out.insert(a.clone());
            }
        });
        out
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ProjectTree)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// All nodes in preorder; a node's position here is its node index.
    pub fn preorder(&self) -> Vec<&ProjectTree> {
        let mut out = Vec::new();
        self.walk(&mut |t| out.push(t));
        out
    }

    pub fn size(&self) -> usize {
        self.preorder().len()
    }

    /// Node indices of the `op` nodes, in preorder. The i-th (0-based) is named `{op}{i+1}`.
    pub fn operator_nodes(&self, op: Operator) -> Vec<usize> {
        self.preorder().iter().enumerate().filter(|(_, t)| t.operator() == Some(op)).map(|(i, _)| i).collect()
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        match self {
            ProjectTree::Leaf { label: Some(a), .. } if a.is_empty() || is_reserved_label(a) => {
                Err(TreeError::BadLabel(a.clone()))
            }
            ProjectTree::Leaf { .. } => Ok(()),
            ProjectTree::Node { op: Operator::Loop, children, .. } if children.len() < 2 => {
                Err(TreeError::LoopArity(children.len()))
            }
            ProjectTree::Node { op, children, .. } if children.is_empty() => Err(TreeError::Childless(op.name())),
            ProjectTree::Node { children, .. } => children.iter().try_for_each(ProjectTree::validate),
        }
    }

    /// Structural equality ignoring frequency annotations.
    pub fn same_shape(&self, other: &ProjectTree) -> bool {
        match (self, other) {
            (ProjectTree::Leaf { label: a, .. }, ProjectTree::Leaf { label: b, .. }) => a == b,
            (ProjectTree::Node { op: o1, children: c1, .. }, ProjectTree::Node { op: o2, children: c2, .. }) => {
                o1 == o2 && c1.len() == c2.len() && c1.iter().zip(c2).all(|(x, y)| x.same_shape(y))
            }
            _ => false,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TreeRepr::from(self)).expect("tree serializes")
    }

    pub fn from_json(value: &str) -> Result<Self, TreeError> {
        let repr: TreeRepr = serde_json::from_str(value).map_err(|e| TreeError::Json(e.to_string()))?;
        let tree = ProjectTree::try_from(repr)?;
        tree.validate()?;
        Ok(tree)
    }
}

/// Renders the operator notation, e.g. `→(a, ×(∧(b, c), d), e)`.
impl fmt::Display for ProjectTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectTree::Leaf { label: Some(a), .. } => f.write_str(a),
            ProjectTree::Leaf { label: None, .. } => f.write_str(TAU),
            ProjectTree::Node { op, children, .. } => {
                write!(f, "{}(", op.symbol())?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    freq: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<TreeRepr>,
}

impl From<&ProjectTree> for TreeRepr {
    fn from(tree: &ProjectTree) -> Self {
        match tree {
            ProjectTree::Leaf { label, freq } => TreeRepr {
                op: "leaf".into(),
                label: Some(label.clone().unwrap_or_else(|| TAU.to_string())),
                freq: *freq,
                children: Vec::new(),
            },
            ProjectTree::Node { op, children, freq } => TreeRepr {
                op: op.name().into(),
                label: None,
                freq: *freq,
                children: children.iter().map(TreeRepr::from).collect(),
            },
        }
    }
}

impl TryFrom<TreeRepr> for ProjectTree {
    type Error = TreeError;

    fn try_from(repr: TreeRepr) -> Result<Self, TreeError> {
        let op = match repr.op.as_str() {
            "leaf" => {
                let label = repr.label.ok_or_else(|| TreeError::Json("leaf without label".into()))?;
                let label = if label == TAU { None } else { Some(label) };
                return Ok(ProjectTree::Leaf { label, freq: repr.freq });
            }
            "seq" => Operator::Sequence,
            "xor" => Operator::Xor,
            "and" => Operator::And,
            "loop" => Operator::Loop,
            other => return Err(TreeError::Json(format!("unknown op `{other}`"))),
        };
        let children = repr.children.into_iter().map(ProjectTree::try_from).collect::<Result<_, _>>()?;
        Ok(ProjectTree::Node { op, children, freq: repr.freq })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn running() -> ProjectTree {
        use ProjectTree as T;
        T::seq(vec![T::leaf("a"), T::xor(vec![T::and(vec![T::leaf("b"), T::leaf("c")]), T::leaf("d")]), T::leaf("e")])
    }

    #[test]
    fn notation() {
        assert_eq!(running().to_string(), "→(a, ×(∧(b, c), d), e)");
        assert_eq!(ProjectTree::looped(vec![ProjectTree::tau(), ProjectTree::leaf("a")]).to_string(), "↺(τ, a)");
    }

    #[test]
    fn json_shape_and_round_trip() {
        let tree = running().with_freq(4);
        let json = tree.to_json();
        assert_eq!(json["op"], "seq");
        assert_eq!(json["freq"], 4);
        assert_eq!(json["children"][0]["label"], "a");
        assert_eq!(json["children"][1]["op"], "xor");
        let back = ProjectTree::from_json(&json.to_string()).unwrap();
        assert_eq!(back, tree);
        let tau = ProjectTree::tau().to_json();
        assert_eq!(ProjectTree::from_json(&tau.to_string()).unwrap(), ProjectTree::tau());
    }

    #[test]
    fn validation() {
        assert!(running().validate().is_ok());
        assert_eq!(ProjectTree::looped(vec![ProjectTree::leaf("a")]).validate(), Err(TreeError::LoopArity(1)));
        assert_eq!(ProjectTree::seq(vec![]).validate(), Err(TreeError::Childless("seq")));
        assert!(ProjectTree::leaf("▶").validate().is_err());
        assert!(ProjectTree::from_json(r#"{"op":"loop","freq":1,"children":[{"op":"leaf","label":"a","freq":1}]}"#)
            .is_err());
        assert!(ProjectTree::from_json(r#"{"op":"star","freq":1}"#).is_err());
    }

    #[test]
    fn operator_nodes_in_preorder() {
        let t = running();
        assert_eq!(t.operator_nodes(Operator::Xor), vec![2]);
        assert_eq!(t.operator_nodes(Operator::And), vec![3]);
        assert_eq!(t.size(), 8);
        assert_eq!(t.activities().len(), 5);
    }
}
