//! The scenario file format: JSON with decimal strings for every rate and
//! money field, unknown fields rejected, canonical re-emission, and a
//! content digest over the canonical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::compliance::check_linear_basis;
use crate::decimal::Decimal;
use crate::domain::scenario::ShareModel;
use crate::domain::validate::{
    validate_scenario, RawExclusionaryOption, RawMenu, RawPriceProtection, RawScenario,
    RawShareModel,
};
use crate::domain::{Scenario, ValidationError};

/// Version tag carried by every JSON document this tool reads or writes.
pub const SCHEMA: &str = "formulary-wdp/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema: String,
    pub class_name: String,
    pub total_units: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveDoc>,
    /// Share model; validated by hand because its shape depends on "type".
    pub share_model: Value,
    pub drugs: Vec<DrugDoc>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bid_down_limit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tier3_share: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count_admin_fee_in_cost: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gross_rebate_weight: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrugDoc {
    pub id: String,
    pub manufacturer: String,
    pub wac_per_unit: String,
    /// Keys: `exclusive`, `shared_1_of_<k>` (k >= 2), `tier3`.
    pub bids: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admin_fee: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub price_protection: Option<PriceProtectionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclusionary: Option<Vec<ExclusionaryDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceProtectionDoc {
    pub factor: String,
    pub baseline_wac_date: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExclusionaryDoc {
    pub excludes: Vec<String>,
    pub incremental_rate: String,
}

/// One document-level problem, with the stable code it would carry in a
/// findings or error listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadIssue {
    pub code: String,
    pub message: String,
}

impl From<&ValidationError> for LoadIssue {
    fn from(e: &ValidationError) -> LoadIssue {
        LoadIssue {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("PARSE_ERROR at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("scenario document is invalid ({} problem(s))", .0.len())]
    Invalid(Vec<LoadIssue>),
}

impl LoadError {
    pub fn issues(&self) -> Vec<LoadIssue> {
        match self {
            LoadError::Parse { message, .. } => vec![LoadIssue {
                code: "PARSE_ERROR".to_string(),
                message: message.clone(),
            }],
            LoadError::Invalid(issues) => issues.clone(),
        }
    }
}

/// Parse and validate a scenario document. Structural problems (bad JSON,
/// wrong types, unknown fields) fail fast with a position; decimal-string
/// and semantic problems aggregate into one complete list.
pub fn load_scenario(bytes: &[u8]) -> Result<Scenario, LoadError> {
    let text = std::str::from_utf8(bytes).map_err(|e| LoadError::Parse {
        line: 0,
        column: 0,
        message: format!("document is not UTF-8: {e}"),
    })?;
    let value: Value = serde_json::from_str(text).map_err(parse_error)?;

    // Non-linear bid bases are scanned on the raw value so they are reported
    // even when the typed parse would reject the same fields as unknown.
    let mut issues: Vec<LoadIssue> = Vec::new();
    if let Some(drugs) = value.get("drugs").and_then(Value::as_array) {
        for drug in drugs {
            for finding in check_linear_basis(drug) {
                issues.push(LoadIssue {
                    code: "NONLINEAR_TERM".to_string(),
                    message: format!("drug {}: {}", finding.drug_id, finding.explanation),
                });
            }
        }
    }

    let doc: ScenarioDoc = match serde_json::from_str(text) {
        Ok(doc) => doc,
        Err(e) => {
            if !issues.is_empty() {
                return Err(LoadError::Invalid(issues));
            }
            return Err(parse_error(e));
        }
    };
    if !issues.is_empty() {
        return Err(LoadError::Invalid(issues));
    }
    if doc.schema != SCHEMA {
        return Err(LoadError::Invalid(vec![LoadIssue {
            code: "SCHEMA_VERSION".to_string(),
            message: format!("expected schema {SCHEMA:?}, got {:?}", doc.schema),
        }]));
    }

    let raw = doc_to_raw(&doc, &mut issues);
    if !issues.is_empty() {
        return Err(LoadError::Invalid(issues));
    }
    validate_scenario(raw)
        .map_err(|errors| LoadError::Invalid(errors.iter().map(LoadIssue::from).collect()))
}

fn parse_error(e: serde_json::Error) -> LoadError {
    LoadError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

struct FieldParser {
    issues: Vec<LoadIssue>,
}

impl FieldParser {
    fn decimal(&mut self, path: &str, text: &str) -> Option<Decimal> {
        match text.parse::<Decimal>() {
            Ok(d) => Some(d),
            Err(e) => {
                self.issues.push(LoadIssue {
                    code: "DECIMAL_SYNTAX".to_string(),
                    message: format!("{path}: {e}"),
                });
                None
            }
        }
    }
}

fn doc_to_raw(doc: &ScenarioDoc, issues: &mut Vec<LoadIssue>) -> RawScenario {
    let mut fp = FieldParser { issues: Vec::new() };

    let mut drugs = Vec::new();
    for drug in &doc.drugs {
        let path = format!("drugs.{}", drug.id);
        let mut preferred_bids = Vec::new();
        let mut tier3_bid = None;
        for (key, text) in &drug.bids {
            let bid_path = format!("{path}.bids.{key}");
            let Some(value) = fp.decimal(&bid_path, text) else {
                continue;
            };
            match parse_bid_key(key) {
                Some(BidKey::Preferred(k)) => preferred_bids.push((k, value)),
                Some(BidKey::Tier3) => tier3_bid = Some(value),
                None => fp.issues.push(LoadIssue {
                    code: "UNKNOWN_BID_KEY".to_string(),
                    message: format!(
                        "{bid_path}: expected \"exclusive\", \"shared_1_of_<k>\" or \"tier3\""
                    ),
                }),
            }
        }
        drugs.push(RawMenu {
            id: drug.id.clone(),
            manufacturer: drug.manufacturer.clone(),
            wac_per_unit: fp.decimal(&format!("{path}.wac_per_unit"), &drug.wac_per_unit),
            preferred_bids,
            tier3_bid,
            admin_fee: drug
                .admin_fee
                .as_ref()
                .and_then(|t| fp.decimal(&format!("{path}.admin_fee"), t)),
            price_protection: drug.price_protection.as_ref().and_then(|pp| {
                fp.decimal(&format!("{path}.price_protection.factor"), &pp.factor)
                    .map(|factor| RawPriceProtection {
                        factor,
                        baseline_wac_date: pp.baseline_wac_date.clone(),
                    })
            }),
            exclusionary: drug
                .exclusionary
                .as_deref()
                .unwrap_or_default()
                .iter()
                .enumerate()
                .filter_map(|(i, opt)| {
                    fp.decimal(
                        &format!("{path}.exclusionary[{i}].incremental_rate"),
                        &opt.incremental_rate,
                    )
                    .map(|rate| RawExclusionaryOption {
                        excludes: opt.excludes.clone(),
                        incremental_rate: rate,
                    })
                })
                .collect(),
        });
    }

    let policy = doc.policy.clone().unwrap_or_default();
    let objective = doc.objective.clone().unwrap_or_default();
    let share_model = parse_share_model(&doc.share_model, &mut fp);

    let raw = RawScenario {
        class_name: doc.class_name.clone(),
        total_units: doc.total_units,
        bid_down_limit: policy
            .bid_down_limit
            .as_ref()
            .and_then(|t| fp.decimal("policy.bid_down_limit", t)),
        tier3_share: policy
            .tier3_share
            .as_ref()
            .and_then(|t| fp.decimal("policy.tier3_share", t)),
        count_admin_fee_in_cost: policy.count_admin_fee_in_cost,
        gross_rebate_weight: objective
            .gross_rebate_weight
            .as_ref()
            .and_then(|t| fp.decimal("objective.gross_rebate_weight", t)),
        share_model,
        drugs,
    };
    issues.extend(fp.issues);
    raw
}

enum BidKey {
    Preferred(usize),
    Tier3,
}

fn parse_bid_key(key: &str) -> Option<BidKey> {
    match key {
        "exclusive" => Some(BidKey::Preferred(1)),
        "tier3" => Some(BidKey::Tier3),
        _ => {
            let digits = key.strip_prefix("shared_1_of_")?;
            let k: usize = digits.parse().ok()?;
            (k >= 2 && digits == k.to_string()).then_some(BidKey::Preferred(k))
        }
    }
}

fn parse_share_model(value: &Value, fp: &mut FieldParser) -> Option<RawShareModel> {
    let issue = |fp: &mut FieldParser, message: String| {
        fp.issues.push(LoadIssue {
            code: "SHARE_MODEL_SYNTAX".to_string(),
            message,
        });
        None
    };
    let Some(object) = value.as_object() else {
        return issue(fp, "share_model: expected an object".to_string());
    };
    let Some(kind) = object.get("type").and_then(Value::as_str) else {
        return issue(
            fp,
            "share_model.type: expected \"table\" or \"proportional\"".to_string(),
        );
    };
    match kind {
        "proportional" => {
            for key in object.keys() {
                if !matches!(key.as_str(), "type" | "weights" | "tier3_share") {
                    return issue(fp, format!("share_model: unknown field {key:?}"));
                }
            }
            let Some(weights) = object.get("weights").and_then(Value::as_object) else {
                return issue(fp, "share_model.weights: expected an object".to_string());
            };
            let mut parsed = Vec::new();
            for (drug, w) in weights {
                let Some(text) = w.as_str() else {
                    return issue(
                        fp,
                        format!("share_model.weights.{drug}: expected a decimal string"),
                    );
                };
                if let Some(d) = fp.decimal(&format!("share_model.weights.{drug}"), text) {
                    parsed.push((drug.clone(), d));
                }
            }
            let tier3_share = match object.get("tier3_share") {
                None => None,
                Some(Value::String(text)) => fp.decimal("share_model.tier3_share", text),
                Some(_) => {
                    return issue(
                        fp,
                        "share_model.tier3_share: expected a decimal string".to_string(),
                    )
                }
            };
            Some(RawShareModel::Proportional {
                weights: parsed,
                tier3_share,
            })
        }
        "table" => {
            for key in object.keys() {
                if !matches!(key.as_str(), "type" | "entries") {
                    return issue(fp, format!("share_model: unknown field {key:?}"));
                }
            }
            let Some(entries) = object.get("entries").and_then(Value::as_object) else {
                return issue(fp, "share_model.entries: expected an object".to_string());
            };
            let mut parsed = Vec::new();
            for (key, shares) in entries {
                let Some(shares) = shares.as_object() else {
                    return issue(fp, format!("share_model.entries.{key}: expected an object"));
                };
                let mut entry = Vec::new();
                for (drug, s) in shares {
                    let Some(text) = s.as_str() else {
                        return issue(
                            fp,
                            format!("share_model.entries.{key}.{drug}: expected a decimal string"),
                        );
                    };
                    if let Some(d) = fp.decimal(&format!("share_model.entries.{key}.{drug}"), text)
                    {
                        entry.push((drug.clone(), d));
                    }
                }
                parsed.push((key.clone(), entry));
            }
            Some(RawShareModel::Table(parsed))
        }
        other => issue(fp, format!("share_model.type: unknown variant {other:?}")),
    }
}

/// Canonical document for a validated scenario: drugs sorted by id, rates
/// at fixed four decimals, money in minimal exact form, keys in schema
/// order. Loading the canonical bytes reproduces the scenario exactly.
pub fn scenario_to_doc(scenario: &Scenario) -> ScenarioDoc {
    let rate4 = |r: &crate::domain::Rate| r.as_decimal().format_dp(4);
    let drugs = scenario
        .menus
        .iter()
        .map(|menu| {
            let mut bids = BTreeMap::new();
            for (k, rate) in &menu.preferred_rates {
                let key = if *k == 1 {
                    "exclusive".to_string()
                } else {
                    format!("shared_1_of_{k}")
                };
                bids.insert(key, rate4(rate));
            }
            if let Some(t3) = &menu.tier3_rate {
                bids.insert("tier3".to_string(), rate4(t3));
            }
            DrugDoc {
                id: menu.drug_id.to_string(),
                manufacturer: menu.manufacturer_id.to_string(),
                wac_per_unit: menu.wac_per_unit.to_canonical_string(),
                bids,
                admin_fee: menu.admin_fee.as_ref().map(rate4),
                price_protection: menu.price_protection.as_ref().map(|pp| PriceProtectionDoc {
                    factor: rate4(&pp.factor),
                    baseline_wac_date: pp.baseline_wac_date.clone(),
                }),
                exclusionary: if menu.exclusionary_options.is_empty() {
                    None
                } else {
                    Some(
                        menu.exclusionary_options
                            .iter()
                            .map(|opt| ExclusionaryDoc {
                                excludes: opt.excludes.iter().map(|d| d.to_string()).collect(),
                                incremental_rate: rate4(&opt.incremental_rate),
                            })
                            .collect(),
                    )
                },
            }
        })
        .collect();

    let share_model = match &scenario.share_model {
        ShareModel::Proportional {
            weights,
            tier3_share,
        } => serde_json::json!({
            "type": "proportional",
            "weights": weights
                .iter()
                .map(|(d, w)| (d.to_string(), Value::String(rate4(w))))
                .collect::<serde_json::Map<_, _>>(),
            "tier3_share": rate4(tier3_share),
        }),
        ShareModel::Table(entries) => serde_json::json!({
            "type": "table",
            "entries": entries
                .iter()
                .map(|(key, shares)| {
                    (
                        key.clone(),
                        Value::Object(
                            shares
                                .iter()
                                .map(|(d, s)| (d.to_string(), Value::String(rate4(s))))
                                .collect(),
                        ),
                    )
                })
                .collect::<serde_json::Map<_, _>>(),
        }),
    };

    ScenarioDoc {
        schema: SCHEMA.to_string(),
        class_name: scenario.class_name.clone(),
        total_units: scenario.total_units,
        policy: Some(PolicyDoc {
            bid_down_limit: Some(rate4(&scenario.policy.bid_down_limit)),
            tier3_share: Some(rate4(&scenario.policy.tier3_share)),
            count_admin_fee_in_cost: Some(scenario.policy.count_admin_fee_in_cost),
        }),
        objective: Some(ObjectiveDoc {
            gross_rebate_weight: Some(rate4(&scenario.objective.gross_rebate_weight)),
        }),
        share_model,
        drugs,
    }
}

/// Canonical bytes of a validated scenario.
pub fn emit_scenario(scenario: &Scenario) -> Vec<u8> {
    let doc = scenario_to_doc(scenario);
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("scenario doc serializes");
    bytes.push(b'\n');
    bytes
}

/// Content hash of the canonicalized scenario, `sha256:<hex>`.
pub fn scenario_digest(scenario: &Scenario) -> String {
    let doc = scenario_to_doc(scenario);
    let compact = serde_json::to_vec(&doc).expect("scenario doc serializes");
    bytes_digest(&compact)
}

/// Hash of arbitrary bytes in the same `sha256:<hex>` shape; used when a
/// document cannot be canonicalized because it failed validation.
pub fn bytes_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(7 + digest.len() * 2);
    out.push_str("sha256:");
    for byte in digest {
        let _ = std::fmt::Write::write_fmt(&mut out, format_args!("{byte:02x}"));
    }
    out
}
