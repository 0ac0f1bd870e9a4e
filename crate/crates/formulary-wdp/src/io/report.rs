//! Report documents and their serialization: byte-deterministic JSON,
//! a human text summary, and CSV for duopoly favorability curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::compliance::{ComplianceFinding, Quantity};
use crate::duopoly::CurvePoint;
use crate::engine::{AssignmentOutcome, SolveReport, SwitchingDelta};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Text,
    CsvCurve,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmitError {
    #[error("UNSUPPORTED_FORMAT: {format:?} cannot render a {content} report")]
    Unsupported {
        format: String,
        content: &'static str,
    },
}

/// Everything the tool can emit as a report.
#[derive(Debug, Clone)]
pub enum ReportContent {
    Solve {
        scenario_digest: String,
        report: Box<SolveReport>,
        /// Truncate ranked and switching lists to this many entries.
        top: Option<usize>,
    },
    Check {
        scenario_digest: String,
        findings: Vec<ComplianceFinding>,
    },
    Curve(Vec<CurvePoint>),
}

pub fn emit_report(content: &ReportContent, format: OutputFormat) -> Result<Vec<u8>, EmitError> {
    match (content, format) {
        (
            ReportContent::Solve {
                scenario_digest,
                report,
                top,
            },
            OutputFormat::Json,
        ) => Ok(to_json_bytes(&solve_doc(scenario_digest, report, *top))),
        (ReportContent::Solve { report, top, .. }, OutputFormat::Text) => {
            Ok(solve_text(report, *top).into_bytes())
        }
        (
            ReportContent::Check {
                scenario_digest,
                findings,
            },
            OutputFormat::Json,
        ) => Ok(to_json_bytes(&check_doc(scenario_digest, findings))),
        (ReportContent::Check { findings, .. }, OutputFormat::Text) => {
            Ok(findings_text(findings).into_bytes())
        }
        (ReportContent::Curve(points), OutputFormat::CsvCurve) => Ok(curve_csv(points)),
        (content, format) => Err(EmitError::Unsupported {
            format: format!("{format:?}").to_ascii_lowercase(),
            content: match content {
                ReportContent::Solve { .. } => "solve",
                ReportContent::Check { .. } => "check",
                ReportContent::Curve(_) => "curve",
            },
        }),
    }
}

fn to_json_bytes<T: Serialize>(doc: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(doc).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

// --- JSON documents ---------------------------------------------------

#[derive(Debug, Serialize)]
struct ReportDoc {
    schema: &'static str,
    scenario_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    winner: Option<OutcomeDoc>,
    ranked: Vec<OutcomeDoc>,
    switching: Vec<SwitchingDoc>,
    findings: Vec<FindingDoc>,
    warnings: Vec<String>,
    tool_version: &'static str,
}

#[derive(Debug, Serialize)]
struct OutcomeDoc {
    key: String,
    statuses: BTreeMap<String, String>,
    active_options: Vec<ActiveOptionDoc>,
    shares: BTreeMap<String, String>,
    effective_rates: BTreeMap<String, String>,
    sponsor_cost: String,
    gross_rebate_total: String,
    objective_value: String,
    warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ActiveOptionDoc {
    drug: String,
    option: usize,
}

#[derive(Debug, Serialize)]
struct SwitchingDoc {
    assignment_key: String,
    sponsor_cost_delta: String,
    gross_rebate_delta: String,
    drugs: Vec<DrugDeltaDoc>,
}

#[derive(Debug, Serialize)]
struct DrugDeltaDoc {
    drug: String,
    share_delta: String,
    rate_delta: String,
}

#[derive(Debug, Serialize)]
struct FindingDoc {
    rule: &'static str,
    severity: &'static str,
    drug: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    observed: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<String>,
    explanation: String,
}

fn outcome_doc(outcome: &AssignmentOutcome) -> OutcomeDoc {
    OutcomeDoc {
        key: outcome.assignment.canonical_key(),
        statuses: outcome
            .drugs
            .iter()
            .map(|(d, o)| (d.to_string(), o.status.to_string()))
            .collect(),
        active_options: outcome
            .assignment
            .active_options()
            .iter()
            .map(|(d, i)| ActiveOptionDoc {
                drug: d.to_string(),
                option: *i,
            })
            .collect(),
        shares: outcome
            .drugs
            .iter()
            .map(|(d, o)| (d.to_string(), o.share.to_string()))
            .collect(),
        effective_rates: outcome
            .drugs
            .iter()
            .map(|(d, o)| (d.to_string(), o.effective_rate.format_dp(4)))
            .collect(),
        sponsor_cost: outcome.sponsor_cost.to_canonical_string(),
        gross_rebate_total: outcome.gross_rebate_total.to_canonical_string(),
        objective_value: outcome.objective_value.to_canonical_string(),
        warnings: outcome.warnings.clone(),
    }
}

fn switching_doc(delta: &SwitchingDelta) -> SwitchingDoc {
    SwitchingDoc {
        assignment_key: delta.assignment_key.clone(),
        sponsor_cost_delta: delta.sponsor_cost_delta.to_canonical_string(),
        gross_rebate_delta: delta.gross_rebate_delta.to_canonical_string(),
        drugs: delta
            .drug_deltas
            .iter()
            .map(|d| DrugDeltaDoc {
                drug: d.drug_id.to_string(),
                share_delta: d.share_delta.format_dp(4),
                rate_delta: d.rate_delta.format_dp(4),
            })
            .collect(),
    }
}

fn finding_doc(finding: &ComplianceFinding) -> FindingDoc {
    FindingDoc {
        rule: finding.rule.code(),
        severity: finding.severity.label(),
        drug: finding.drug_id.clone(),
        observed: finding.observed.as_ref().map(Quantity::to_string),
        threshold: finding.threshold.as_ref().map(Quantity::to_string),
        explanation: finding.explanation.clone(),
    }
}

fn solve_doc(digest: &str, report: &SolveReport, top: Option<usize>) -> ReportDoc {
    let limit = top.unwrap_or(report.ranked.len());
    ReportDoc {
        schema: super::scenario_doc::SCHEMA,
        scenario_digest: digest.to_string(),
        winner: Some(outcome_doc(&report.winner)),
        ranked: report.ranked.iter().take(limit).map(outcome_doc).collect(),
        switching: report
            .switching
            .iter()
            .take(limit.saturating_sub(1))
            .map(switching_doc)
            .collect(),
        findings: Vec::new(),
        warnings: report.winner.warnings.clone(),
        tool_version: TOOL_VERSION,
    }
}

fn check_doc(digest: &str, findings: &[ComplianceFinding]) -> ReportDoc {
    ReportDoc {
        schema: super::scenario_doc::SCHEMA,
        scenario_digest: digest.to_string(),
        winner: None,
        ranked: Vec::new(),
        switching: Vec::new(),
        findings: findings.iter().map(finding_doc).collect(),
        warnings: Vec::new(),
        tool_version: TOOL_VERSION,
    }
}

// --- text rendering ---------------------------------------------------

fn solve_text(report: &SolveReport, top: Option<usize>) -> String {
    let mut out = String::new();
    let w = &report.winner;
    let _ = writeln!(out, "winner: {}", w.assignment.canonical_key());
    let _ = writeln!(out, "  sponsor_cost:      {}", w.sponsor_cost);
    let _ = writeln!(out, "  gross_rebates:     {}", w.gross_rebate_total);
    let _ = writeln!(out, "  objective:         {}", w.objective_value);
    for (drug, o) in &w.drugs {
        let _ = writeln!(
            out,
            "  {drug}: {} share {} rate {}",
            o.status,
            o.share,
            o.effective_rate.format_dp(4)
        );
    }
    for warning in &w.warnings {
        let _ = writeln!(out, "  warning: {warning}");
    }
    let limit = top.unwrap_or(report.ranked.len());
    let _ = writeln!(
        out,
        "ranked ({} of {} assignments):",
        limit.min(report.ranked.len()),
        report.ranked.len()
    );
    for (i, outcome) in report.ranked.iter().take(limit).enumerate() {
        let _ = writeln!(
            out,
            "  {:>2}. objective {} cost {} rebates {}  {}",
            i + 1,
            outcome.objective_value,
            outcome.sponsor_cost,
            outcome.gross_rebate_total,
            outcome.assignment.canonical_key()
        );
    }
    if !report.switching.is_empty() {
        let _ = writeln!(out, "switching (winner minus alternative):");
        for delta in report.switching.iter().take(limit.saturating_sub(1)) {
            let _ = writeln!(
                out,
                "  vs {}: cost {} rebates {}",
                delta.assignment_key, delta.sponsor_cost_delta, delta.gross_rebate_delta
            );
        }
    }
    out
}

/// One line per finding, observed against threshold.
pub fn findings_text(findings: &[ComplianceFinding]) -> String {
    if findings.is_empty() {
        return "no findings\n".to_string();
    }
    let mut out = String::new();
    for f in findings {
        let values = match (&f.observed, &f.threshold) {
            (Some(o), Some(t)) => format!(" observed {o} vs threshold {t}"),
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            "{} {} {}:{} ({})",
            f.severity.label(),
            f.rule.code(),
            f.drug_id,
            values,
            f.explanation
        );
    }
    out
}

fn curve_csv(points: &[CurvePoint]) -> Vec<u8> {
    let mut out = String::from("x,decision,margin\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{}",
            p.entrant_share.format_dp(4),
            p.preference.label(),
            p.margin.format_dp(4)
        );
    }
    out.into_bytes()
}
