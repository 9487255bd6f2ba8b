//! Text and DOT views of service responses.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use planminer_core::dot::quote;
use planminer_core::planner::Schedule;
use serde_json::Value;

fn hours(value: &Value) -> String {
    format!("{} h", value.as_f64().unwrap_or(f64::NAN))
}

fn words(value: &Value) -> String {
    value
        .as_array()
        .map(|items| items.iter().filter_map(Value::as_str).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

pub fn model_text(model: &Value) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tree: {}", model["tree"].as_str().unwrap_or_default());
    let _ = writeln!(out, "gamma: {}", model["gamma"]);
    let _ = writeln!(out, "cases: {}", model["cases"]);
    let net = &model["net"];
    let visible: Vec<&str> = net["transitions"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|t| t["tau"] == false)
        .filter_map(|t| t["label"].as_str())
        .collect();
    let silent = net["transitions"].as_array().map_or(0, |ts| ts.len() - visible.len());
    let _ = writeln!(out, "activities: {}", visible.join(" "));
    let _ = writeln!(out, "silent transitions: {silent}");
    let _ = writeln!(out, "places: {}", net["places"].as_array().map_or(0, Vec::len));
    let structure = &model["structure"];
    let _ = writeln!(out, "workflow net: {}", structure["is_workflow_net"]);
    let _ = writeln!(out, "sound: {}", structure["sound"]);
    for issue in structure["issues"].as_array().into_iter().flatten() {
        let _ = writeln!(out, "issue: {}", issue.as_str().unwrap_or_default());
    }
    for rule in model["rules"].as_array().into_iter().flatten() {
        let _ = writeln!(
            out,
            "rule {}: {}",
            rule["point"].as_str().unwrap_or_default(),
            rule["summary"].as_str().unwrap_or_default()
        );
    }
    out
}

pub fn variants_text(variants: &Value) -> String {
    let mut out = format!("{:<16} {:>8} {:>9}  activities\n", "selectors", "weight", "available");
    for v in variants["variants"].as_array().into_iter().flatten() {
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>9}  {}",
            v["selectors"].as_str().unwrap_or_default(),
            v["weight"].to_string(),
            v["available"].to_string(),
            words(&v["activities"])
        );
    }
    out
}

pub fn plan_text(outcome: &Value) -> Result<String> {
    let schedule: Schedule = serde_json::from_value(outcome["schedule"].clone()).context("schedule in response")?;
    let relaxation = &outcome["relaxation"];
    let mut out = format!("variant: {}\n", outcome["selectors"].as_str().unwrap_or_default());
    out.push_str(&schedule.gantt());
    let _ = writeln!(out, "baseline: {} ({})", words(&outcome["baseline"]), hours(&relaxation["baseline_makespan"]));
    let _ = writeln!(
        out,
        "relaxation gain: {} ({:.1}%)",
        hours(&relaxation["gain"]),
        relaxation["gain_percent"].as_f64().unwrap_or(0.0)
    );
    Ok(out)
}

pub fn plan_dot(outcome: &Value) -> String {
    let critical: Vec<&str> =
        outcome["schedule"]["critical_path"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
    let mut out = String::from("digraph plan {\n  rankdir=LR;\n  node [shape=box];\n");
    for a in outcome["plan"]["activities"].as_array().into_iter().flatten() {
        let id = a["id"].as_str().unwrap_or_default();
        let duration = outcome["schedule"]["activities"]
            .as_array()
            .into_iter()
            .flatten()
            .find(|s| s["id"] == id)
            .map(|s| hours(&s["duration"]))
            .unwrap_or_default();
        let label = format!("{}\n{duration}", a["label"].as_str().unwrap_or_default());
        let style = if critical.contains(&id) { ", penwidth=2" } else { "" };
        let _ = writeln!(out, "  {} [label={}{style}];", quote(id), quote(&label));
    }
    for arc in outcome["plan"]["arcs"].as_array().into_iter().flatten() {
        let (from, to) = (arc[0].as_str().unwrap_or_default(), arc[1].as_str().unwrap_or_default());
        let _ = writeln!(out, "  {} -> {};", quote(from), quote(to));
    }
    out.push_str("}\n");
    out
}

pub fn report_text(report: &Value) -> Result<String> {
    let mut out = String::new();
    let stats = &report["stats"];
    let _ = writeln!(out, "cases: {}, distinct variants: {}", stats["cases"], stats["distinct_variants"]);
    for v in stats["variants"].as_array().into_iter().flatten() {
        let _ = writeln!(out, "  {:>6}  {}", v["count"].to_string(), words(&v["trace"]));
    }
    let _ = writeln!(out, "tree: {}", report["tree"].as_str().unwrap_or_default());
    let _ = writeln!(out, "gamma: {}", report["gamma"]);
    let structure = &report["structure"];
    let _ = writeln!(out, "workflow net: {}, sound: {}", structure["is_workflow_net"], structure["sound"]);
    for rule in report["rules"].as_array().into_iter().flatten() {
        let _ = writeln!(
            out,
            "rule {}: {} (accuracy {})",
            rule["point"].as_str().unwrap_or_default(),
            rule["summary"].as_str().unwrap_or_default(),
            rule["accuracy"]
        );
    }
    out.push_str("variants:\n");
    out.push_str(&variants_text(report));
    if !report["plan"].is_null() {
        out.push_str(&plan_text(&report["plan"])?);
    }
    Ok(out)
}
