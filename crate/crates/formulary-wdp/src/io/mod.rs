//! File formats: the scenario document, margin statements, and report
//! emission. All JSON documents carry a top-level `schema` version field
//! and encode rates and money as decimal strings.

pub mod report;
pub mod scenario_doc;

pub use report::{
    emit_report, findings_text, EmitError, OutputFormat, ReportContent, TOOL_VERSION,
};
pub use scenario_doc::{
    bytes_digest, emit_scenario, load_scenario, scenario_digest, scenario_to_doc, LoadError,
    LoadIssue, ScenarioDoc, SCHEMA,
};

use serde::{Deserialize, Serialize};

use crate::financials::{Basis, MarginStatement};

/// Margin statement file: `{"schema", "basis", "gtn_rebate_rate",
/// "cost_of_sales", "marketing"}`, rates as decimal strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginsDoc {
    pub schema: String,
    pub basis: String,
    pub gtn_rebate_rate: String,
    pub cost_of_sales: String,
    pub marketing: String,
}

pub fn load_margins(bytes: &[u8]) -> Result<MarginStatement, LoadError> {
    let text = std::str::from_utf8(bytes).map_err(|e| LoadError::Parse {
        line: 0,
        column: 0,
        message: format!("document is not UTF-8: {e}"),
    })?;
    let doc: MarginsDoc = serde_json::from_str(text).map_err(|e| LoadError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut issues = Vec::new();
    if doc.schema != SCHEMA {
        issues.push(LoadIssue {
            code: "SCHEMA_VERSION".to_string(),
            message: format!("expected schema {SCHEMA:?}, got {:?}", doc.schema),
        });
    }
    let basis = match doc.basis.as_str() {
        "net" => Some(Basis::Net),
        "gross" => Some(Basis::Gross),
        other => {
            issues.push(LoadIssue {
                code: "BAD_BASIS".to_string(),
                message: format!("basis must be \"net\" or \"gross\", got {other:?}"),
            });
            None
        }
    };
    let mut rate = |path: &str, text: &str| match text.parse::<crate::domain::Rate>() {
        Ok(r) => Some(r),
        Err(e) => {
            issues.push(LoadIssue {
                code: "RATE_OUT_OF_RANGE".to_string(),
                message: format!("{path}: {e}"),
            });
            None
        }
    };
    let gtn = rate("gtn_rebate_rate", &doc.gtn_rebate_rate);
    let cos = rate("cost_of_sales", &doc.cost_of_sales);
    let mkt = rate("marketing", &doc.marketing);
    if !issues.is_empty() {
        return Err(LoadError::Invalid(issues));
    }
    Ok(MarginStatement {
        basis: basis.expect("checked above"),
        gtn_rebate_rate: gtn.expect("checked above"),
        cost_of_sales: cos.expect("checked above"),
        marketing: mkt.expect("checked above"),
    })
}
