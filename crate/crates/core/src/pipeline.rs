//! End-to-end steps shared by the service and the command line.

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::decision::{annotate_rules, mine_rules, DecisionError, DecisionRule, RuleConfig};
use crate::event_log::{log_stats, EventLog, LogError};
use crate::hours::Fraction;
use crate::miner::MinerError;
use crate::petri::{
    check_structure, filter_model_exact, tree_to_petri, PetriError, PetriNet, StructuralReport, DEFAULT_MAX_STATES,
};
use crate::planner::{
    critical_path, decode_variant, relaxation_report, DurationModel, PlanError, RelaxationReport, Schedule,
    VariantChoice, VariantPlan,
};
use crate::synthetic::GenError;
use crate::tree::{ProjectTree, TreeError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Miner(#[from] MinerError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Net(#[from] PetriError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("activities {0:?} are filtered out of the model at the current threshold")]
    FilteredOut(Vec<String>),
    #[error("decision rules need the event log")]
    RulesNeedLog,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelOptions {
    pub gamma: Fraction,
    pub rules: bool,
    pub rule_config: RuleConfig,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions { gamma: Fraction::ZERO, rules: false, rule_config: RuleConfig::default() }
    }
}

/// Filtered, frequency- and rule-annotated net derived from a mined tree.
#[derive(Clone, Debug)]
pub struct Model {
    pub tree: ProjectTree,
    pub cases: u64,
    pub gamma: Fraction,
    pub net: PetriNet,
    pub structure: StructuralReport,
    pub rules: Vec<DecisionRule>,
}

/// The case count is the root frequency of the tree. Rules are learned on the filtered net;
/// above γ = 0 cases that no longer fit it are left out.
pub fn build_model(tree: &ProjectTree, log: Option<&EventLog>, options: &ModelOptions) -> Result<Model, PipelineError> {
    let full = tree_to_petri(tree)?;
    let cases = tree.freq();
    let (net, structure) = if options.gamma == Fraction::ZERO || cases == 0 {
        let report = check_structure(&full, DEFAULT_MAX_STATES);
        (full, report)
    } else {
        filter_model_exact(&full, options.gamma, cases)?
    };
    let rules = if options.rules {
        let log = log.ok_or(PipelineError::RulesNeedLog)?;
        mine_rules(&net, log, &options.rule_config, options.gamma != Fraction::ZERO)?
    } else {
        Vec::new()
    };
    let net = annotate_rules(&net, &rules)?;
    Ok(Model { tree: tree.clone(), cases, gamma: options.gamma, net, structure, rules })
}

impl Model {
    pub fn to_json(&self) -> Value {
        json!({
            "gamma": self.gamma,
            "cases": self.cases,
            "tree": self.tree.to_string(),
            "tree_json": self.tree.to_json(),
            "net": self.net.to_json(),
            "structure": self.structure,
            "rules": self.rules,
        })
    }

    pub fn rules_json(&self) -> Value {
        json!({ "gamma": self.gamma, "rules": self.rules })
    }

    pub fn rules_text(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push_str(&format!("{}: {} (accuracy {})\n", rule.point, rule.summary(), rule.accuracy()));
            for line in rule.text() {
                out.push_str(&format!("  {line}\n"));
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanOutcome {
    pub choice: VariantChoice,
    #[serde(serialize_with = "plan_json")]
    pub plan: VariantPlan,
    pub schedule: Schedule,
    pub baseline: Vec<String>,
    pub relaxation: RelaxationReport,
}

fn plan_json<S: serde::Serializer>(plan: &VariantPlan, s: S) -> Result<S::Ok, S::Error> {
    plan.to_json().serialize(s)
}

/// Most frequent logged trace with the plan's activities; otherwise the plan's own
/// activities in schedule order.
pub fn default_baseline(log: Option<&EventLog>, plan: &VariantPlan, schedule: &Schedule) -> Vec<String> {
    let mut wanted = plan.labels();
    wanted.sort();
    if let Some(log) = log {
        let stats = log_stats(log);
        for (trace, _) in stats.ranked() {
            let mut sorted = trace.clone();
            sorted.sort();
            if sorted == wanted {
                return trace.clone();
            }
        }
    }
    schedule.activities.iter().map(|a| a.label.clone()).collect()
}

/// Decodes a choice, rejects it if the model at the current threshold lacks its activities,
/// and schedules it against a serial baseline.
pub fn plan_choice(
    model: &Model,
    log: Option<&EventLog>,
    choice: &VariantChoice,
    durations: &DurationModel,
    baseline: Option<Vec<String>>,
) -> Result<PlanOutcome, PipelineError> {
    let plan = decode_variant(&model.tree, choice)?;
    let visible = model.net.visible_labels();
    let mut missing: Vec<String> = plan.labels().into_iter().filter(|a| !visible.contains(a)).collect();
    missing.dedup();
    if !missing.is_empty() {
        return Err(PipelineError::FilteredOut(missing));
    }
    let schedule = critical_path(&plan, durations)?;
    let baseline = baseline.unwrap_or_else(|| default_baseline(log, &plan, &schedule));
    let relaxation = relaxation_report(&baseline, &plan, durations)?;
    Ok(PlanOutcome { choice: choice.clone(), plan, schedule, baseline, relaxation })
}
