use planminer_core::event_log::{log_stats, parse_event_log, EventLog};
use planminer_core::miner::mine_tree;
use planminer_core::pipeline::{build_model, plan_choice, Model, ModelOptions, PipelineError, PlanOutcome};
use planminer_core::planner::{decode_variant, estimate_durations, Estimator, VariantChoice};
use planminer_core::tree::ProjectTree;
use planminer_core::Fraction;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// A committed variant choice and the schedule computed for it.
#[derive(Clone, Debug)]
pub struct Selection {
    pub choice: VariantChoice,
    pub baseline: Option<Vec<String>>,
    pub outcome: PlanOutcome,
}

/// Uploaded log with everything derived from it. The mined tree never changes; nets and
/// rules are rebuilt per request from the tree and the requested threshold.
#[derive(Clone, Debug)]
pub struct Session {
    pub csv: String,
    pub log: EventLog,
    pub tree: ProjectTree,
    pub gamma: Fraction,
    pub durations: Estimator,
    pub selection: Option<Selection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub csv: String,
    pub gamma: String,
    pub durations: String,
    #[serde(default)]
    pub tree: Option<Value>,
    #[serde(default)]
    pub choice: Option<VariantChoice>,
    #[serde(default)]
    pub baseline: Option<Vec<String>>,
}

impl Session {
    pub fn from_csv(csv: String) -> Result<Self, PipelineError> {
        Session::with_tree(csv, None)
    }

    /// Uses `tree` instead of mining one when given.
    pub fn with_tree(csv: String, tree: Option<ProjectTree>) -> Result<Self, PipelineError> {
        let log = parse_event_log(&csv)?;
        let tree = match tree {
            Some(tree) => tree,
            None => mine_tree(&log)?,
        };
        Ok(Session { csv, log, tree, gamma: Fraction::ZERO, durations: Estimator::Mean, selection: None })
    }

    pub fn model(&self, gamma: Fraction, rules: bool) -> Result<Model, PipelineError> {
        let options = ModelOptions { gamma, rules, ..Default::default() };
        build_model(&self.tree, Some(&self.log), &options)
    }

    /// Makes `gamma` current and drops the selection if the filtered model no longer has its
    /// activities.
    pub fn set_gamma(&mut self, gamma: Fraction) -> Result<(), PipelineError> {
        self.gamma = gamma;
        if let Some(selection) = &self.selection {
            let visible = self.model(gamma, false)?.net.visible_labels();
            let plan = decode_variant(&self.tree, &selection.choice)?;
            if plan.labels().iter().any(|a| !visible.contains(a)) {
                self.selection = None;
            }
        }
        Ok(())
    }

    pub fn choose(
        &mut self,
        choice: VariantChoice,
        durations: Option<Estimator>,
        baseline: Option<Vec<String>>,
    ) -> Result<&Selection, PipelineError> {
        let estimator = durations.unwrap_or_else(|| self.durations.clone());
        let outcome = self.plan(&choice, &estimator, baseline.clone())?;
        self.durations = estimator;
        Ok(self.selection.insert(Selection { choice, baseline, outcome }))
    }

    fn plan(
        &self,
        choice: &VariantChoice,
        estimator: &Estimator,
        baseline: Option<Vec<String>>,
    ) -> Result<PlanOutcome, PipelineError> {
        let model = self.model(self.gamma, false)?;
        let durations = estimate_durations(&self.log, estimator)?;
        plan_choice(&model, Some(&self.log), choice, &durations, baseline)
    }

    pub fn outcome_json(&self, selection: &Selection) -> Value {
        let mut value = serde_json::to_value(&selection.outcome).expect("outcome serializes");
        value["gamma"] = json!(self.gamma);
        value["durations"] = json!(self.durations.to_string());
        value["selectors"] = json!(selection.choice.selectors());
        value
    }

    pub fn summary(&self, id: &str) -> Value {
        json!({
            "session": id,
            "cases": self.log.len(),
            "stats": log_stats(&self.log),
            "tree": self.tree.to_string(),
            "gamma": self.gamma,
            "durations": self.durations.to_string(),
            "selection": self.selection.as_ref().map(|s| self.outcome_json(s)),
        })
    }

    pub fn snapshot(&self) -> Snapshot {
        let ratio = self.gamma.ratio();
        Snapshot {
            csv: self.csv.clone(),
            gamma: format!("{}/{}", ratio.numer(), ratio.denom()),
            durations: self.durations.to_string(),
            tree: Some(self.tree.to_json()),
            choice: self.selection.as_ref().map(|s| s.choice.clone()),
            baseline: self.selection.as_ref().and_then(|s| s.baseline.clone()),
        }
    }

    /// Rebuilds a session from its snapshot; a stored choice that no longer plans is dropped.
    pub fn restore(snapshot: Snapshot) -> Result<Self, PipelineError> {
        let tree = snapshot.tree.map(|t| ProjectTree::from_json(&t.to_string())).transpose()?;
        let mut session = Session::with_tree(snapshot.csv, tree)?;
        session.gamma = Fraction::parse(&snapshot.gamma).unwrap_or(Fraction::ZERO);
        session.durations = snapshot.durations.parse()?;
        if let Some(choice) = snapshot.choice {
            if let Ok(outcome) = session.plan(&choice, &session.durations, snapshot.baseline.clone()) {
                session.selection = Some(Selection { choice, baseline: snapshot.baseline, outcome });
            }
        }
        Ok(session)
    }
}
