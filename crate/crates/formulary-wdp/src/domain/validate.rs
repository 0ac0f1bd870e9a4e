//! Scenario validation: raw document shapes in, validated [`Scenario`] out.
//!
//! Validation never stops at the first problem; it returns the complete
//! error list so a scenario author can fix a file in one pass.

use std::collections::{BTreeMap, BTreeSet};

use crate::decimal::Decimal;
use crate::domain::menu::{BidMenu, ExclusionaryOption, PriceProtection};
use crate::domain::money::Money;
use crate::domain::rate::{Rate, RateError};
use crate::domain::scenario::{ObjectiveConfig, Policy, Position, Scenario, ShareModel};
use crate::domain::{DrugId, ManufacturerId};

/// Upper bound on total units; keeps every downstream product exact in i128.
pub const MAX_TOTAL_UNITS: u64 = 1_000_000_000_000;
/// Upper bound on a per-unit WAC, same rationale.
pub const MAX_WAC: &str = "1000000";

/// A scenario as parsed from a document, before any semantic checks.
/// Rates arrive as plain decimals so that range and precision problems
/// surface as validation errors rather than parse failures.
#[derive(Debug, Clone, Default)]
pub struct RawScenario {
    pub class_name: String,
    pub total_units: u64,
    pub bid_down_limit: Option<Decimal>,
    pub tier3_share: Option<Decimal>,
    pub count_admin_fee_in_cost: Option<bool>,
    pub gross_rebate_weight: Option<Decimal>,
    pub share_model: Option<RawShareModel>,
    pub drugs: Vec<RawMenu>,
}

#[derive(Debug, Clone)]
pub enum RawShareModel {
    Table(Vec<(String, Vec<(String, Decimal)>)>),
    Proportional {
        weights: Vec<(String, Decimal)>,
        tier3_share: Option<Decimal>,
    },
}

#[derive(Debug, Clone, Default)]
pub struct RawMenu {
    pub id: String,
    pub manufacturer: String,
    pub wac_per_unit: Option<Decimal>,
    /// (k, rate) pairs; k = 1 is the exclusive bid.
    pub preferred_bids: Vec<(usize, Decimal)>,
    pub tier3_bid: Option<Decimal>,
    pub admin_fee: Option<Decimal>,
    pub price_protection: Option<RawPriceProtection>,
    pub exclusionary: Vec<RawExclusionaryOption>,
}

#[derive(Debug, Clone)]
pub struct RawPriceProtection {
    pub factor: Decimal,
    pub baseline_wac_date: String,
}

#[derive(Debug, Clone)]
pub struct RawExclusionaryOption {
    pub excludes: Vec<String>,
    pub incremental_rate: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("{path}: rate {value} is outside [0, 1]")]
    RateOutOfRange { path: String, value: String },
    #[error("{path}: rate {value} is finer than basis-point resolution")]
    RatePrecision { path: String, value: String },
    #[error("{path}: exclusionary option names unknown drug {competitor}")]
    UnknownCompetitor { path: String, competitor: String },
    #[error(
        "{path}: non-linear bid term {field:?} is banned; only %-off-WAC unit rates are accepted"
    )]
    NonlinearTerm { path: String, field: String },
    #[error("duplicate drug id {0}")]
    DuplicateDrug(String),
    #[error("share table entry {key:?}: shares over non-excluded drugs sum to {sum}, expected exactly 1")]
    ShareSum { key: String, sum: String },
    #[error("share table entry {key:?}: {reason}")]
    BadShareKey { key: String, reason: String },
    #[error("{path}: excluded drug carries nonzero share {value}")]
    ExcludedShareNonzero { path: String, value: String },
    #[error("menu for {drug} offers no exclusive or shared preferred rate")]
    MissingPreferredRate { drug: String },
    #[error("menu for {drug} bids on a 1-of-{k} position but the scenario has only {n} drugs")]
    KExceedsDrugCount { drug: String, k: usize, n: usize },
    #[error("menu for {drug} has two bids for the 1-of-{k} position")]
    DuplicateBidKey { drug: String, k: usize },
    #[error("{path}: exclusionary option excludes no drugs")]
    EmptyExclusionSet { path: String },
    #[error("{path}: exclusionary option may only name competitors of other manufacturers ({competitor} is not)")]
    SelfExclusion { path: String, competitor: String },
    #[error("total_units {0} must be between 1 and {MAX_TOTAL_UNITS}")]
    TotalUnitsOutOfRange(u64),
    #[error("{path}: WAC {value} must be positive and at most {MAX_WAC}")]
    WacOutOfRange { path: String, value: String },
    #[error("scenario has no drugs")]
    NoDrugs,
    #[error("scenario has no share model")]
    NoShareModel,
    #[error("proportional weight for {drug} must be strictly positive")]
    WeightNotPositive { drug: String },
    #[error("proportional share model is missing a weight for {drug}")]
    MissingWeight { drug: String },
    #[error("proportional share model names unknown drug {drug}")]
    UnknownWeightDrug { drug: String },
    #[error("tier3 share {share} times {count} possible tier-3 drugs reaches 1; preferred drugs would get nothing")]
    Tier3ShareTooLarge { share: String, count: usize },
}

impl ValidationError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::RateOutOfRange { .. } => "RATE_OUT_OF_RANGE",
            ValidationError::RatePrecision { .. } => "RATE_PRECISION",
            ValidationError::UnknownCompetitor { .. } => "UNKNOWN_COMPETITOR",
            ValidationError::NonlinearTerm { .. } => "NONLINEAR_TERM",
            ValidationError::DuplicateDrug(_) => "DUPLICATE_DRUG",
            ValidationError::ShareSum { .. } => "SHARE_SUM",
            ValidationError::BadShareKey { .. } => "BAD_SHARE_KEY",
            ValidationError::ExcludedShareNonzero { .. } => "EXCLUDED_SHARE_NONZERO",
            ValidationError::MissingPreferredRate { .. } => "MISSING_PREFERRED_RATE",
            ValidationError::KExceedsDrugCount { .. } => "K_EXCEEDS_DRUG_COUNT",
            ValidationError::DuplicateBidKey { .. } => "DUPLICATE_BID_KEY",
            ValidationError::EmptyExclusionSet { .. } => "EMPTY_EXCLUSION_SET",
            ValidationError::SelfExclusion { .. } => "SELF_EXCLUSION",
            ValidationError::TotalUnitsOutOfRange(_) => "TOTAL_UNITS_OUT_OF_RANGE",
            ValidationError::WacOutOfRange { .. } => "WAC_OUT_OF_RANGE",
            ValidationError::NoDrugs => "NO_DRUGS",
            ValidationError::NoShareModel => "NO_SHARE_MODEL",
            ValidationError::WeightNotPositive { .. } => "WEIGHT_NOT_POSITIVE",
            ValidationError::MissingWeight { .. } => "MISSING_WEIGHT",
            ValidationError::UnknownWeightDrug { .. } => "UNKNOWN_WEIGHT_DRUG",
            ValidationError::Tier3ShareTooLarge { .. } => "TIER3_SHARE_TOO_LARGE",
        }
    }
}

struct Checker {
    errors: Vec<ValidationError>,
}

impl Checker {
    fn rate(&mut self, path: &str, value: &Decimal) -> Option<Rate> {
        match Rate::try_from_decimal(value) {
            Ok(r) => Some(r),
            Err(RateError::TooPrecise(v)) => {
                self.errors.push(ValidationError::RatePrecision {
                    path: path.to_string(),
                    value: v,
                });
                None
            }
            Err(_) => {
                self.errors.push(ValidationError::RateOutOfRange {
                    path: path.to_string(),
                    value: value.to_string(),
                });
                None
            }
        }
    }
}

/// Check every invariant and return a normalized scenario (drugs sorted by
/// id) or the complete list of problems.
pub fn validate_scenario(raw: RawScenario) -> Result<Scenario, Vec<ValidationError>> {
    let mut ck = Checker { errors: Vec::new() };

    if raw.total_units == 0 || raw.total_units > MAX_TOTAL_UNITS {
        ck.errors
            .push(ValidationError::TotalUnitsOutOfRange(raw.total_units));
    }
    if raw.drugs.is_empty() {
        ck.errors.push(ValidationError::NoDrugs);
    }

    let mut seen = BTreeSet::new();
    for drug in &raw.drugs {
        if !seen.insert(drug.id.clone()) {
            ck.errors
                .push(ValidationError::DuplicateDrug(drug.id.clone()));
        }
    }
    let known: BTreeSet<&str> = raw.drugs.iter().map(|d| d.id.as_str()).collect();
    let n = known.len();
    let max_wac: Decimal = MAX_WAC.parse().expect("constant");

    let mut menus = Vec::new();
    for drug in &raw.drugs {
        let path = format!("drugs.{}", drug.id);
        let wac = match &drug.wac_per_unit {
            Some(w) if !w.is_negative() && !w.is_zero() && *w <= max_wac && w.round_dp(4) == *w => {
                Money::from_decimal(*w)
            }
            Some(w) => {
                ck.errors.push(ValidationError::WacOutOfRange {
                    path: format!("{path}.wac_per_unit"),
                    value: w.to_string(),
                });
                Money::ZERO
            }
            None => {
                ck.errors.push(ValidationError::WacOutOfRange {
                    path: format!("{path}.wac_per_unit"),
                    value: "(missing)".to_string(),
                });
                Money::ZERO
            }
        };

        let mut preferred_rates = BTreeMap::new();
        for (k, bid) in &drug.preferred_bids {
            let bid_path = if *k == 1 {
                format!("{path}.bids.exclusive")
            } else {
                format!("{path}.bids.shared_1_of_{k}")
            };
            if *k == 0 || *k > n {
                ck.errors.push(ValidationError::KExceedsDrugCount {
                    drug: drug.id.clone(),
                    k: *k,
                    n,
                });
            }
            if let Some(rate) = ck.rate(&bid_path, bid) {
                if preferred_rates.insert(*k, rate).is_some() {
                    ck.errors.push(ValidationError::DuplicateBidKey {
                        drug: drug.id.clone(),
                        k: *k,
                    });
                }
            }
        }
        if drug.preferred_bids.is_empty() {
            ck.errors.push(ValidationError::MissingPreferredRate {
                drug: drug.id.clone(),
            });
        }

        let tier3_rate = drug
            .tier3_bid
            .as_ref()
            .and_then(|b| ck.rate(&format!("{path}.bids.tier3"), b));
        let admin_fee = drug
            .admin_fee
            .as_ref()
            .and_then(|b| ck.rate(&format!("{path}.admin_fee"), b));
        let price_protection = drug.price_protection.as_ref().and_then(|pp| {
            ck.rate(&format!("{path}.price_protection.factor"), &pp.factor)
                .map(|factor| PriceProtection {
                    factor,
                    baseline_wac_date: pp.baseline_wac_date.clone(),
                })
        });

        let mut exclusionary_options = Vec::new();
        for (i, option) in drug.exclusionary.iter().enumerate() {
            let opt_path = format!("{path}.exclusionary[{i}]");
            if option.excludes.is_empty() {
                ck.errors.push(ValidationError::EmptyExclusionSet {
                    path: opt_path.clone(),
                });
            }
            let mut excludes = BTreeSet::new();
            for competitor in &option.excludes {
                if !known.contains(competitor.as_str()) {
                    ck.errors.push(ValidationError::UnknownCompetitor {
                        path: opt_path.clone(),
                        competitor: competitor.clone(),
                    });
                    continue;
                }
                let same_mfr = competitor == &drug.id
                    || raw
                        .drugs
                        .iter()
                        .any(|d| &d.id == competitor && d.manufacturer == drug.manufacturer);
                if same_mfr {
                    ck.errors.push(ValidationError::SelfExclusion {
                        path: opt_path.clone(),
                        competitor: competitor.clone(),
                    });
                    continue;
                }
                excludes.insert(DrugId::new(competitor));
            }
            if let Some(rate) = ck.rate(
                &format!("{opt_path}.incremental_rate"),
                &option.incremental_rate,
            ) {
                exclusionary_options.push(ExclusionaryOption {
                    excludes,
                    incremental_rate: rate,
                });
            }
        }

        menus.push(BidMenu {
            drug_id: DrugId::new(&drug.id),
            manufacturer_id: ManufacturerId::new(&drug.manufacturer),
            wac_per_unit: wac,
            preferred_rates,
            tier3_rate,
            admin_fee,
            price_protection,
            exclusionary_options,
        });
    }
    menus.sort_by(|a, b| a.drug_id.cmp(&b.drug_id));

    let default_rate_10 = Rate::from_basis_points(1000).unwrap();
    let bid_down_limit = raw
        .bid_down_limit
        .as_ref()
        .and_then(|d| ck.rate("policy.bid_down_limit", d))
        .unwrap_or(default_rate_10);
    let policy_tier3_share = raw
        .tier3_share
        .as_ref()
        .and_then(|d| ck.rate("policy.tier3_share", d))
        .unwrap_or(default_rate_10);
    let gross_rebate_weight = raw
        .gross_rebate_weight
        .as_ref()
        .and_then(|d| ck.rate("objective.gross_rebate_weight", d))
        .unwrap_or(Rate::ZERO);

    let tier3_capable = raw.drugs.iter().filter(|d| d.tier3_bid.is_some()).count();
    let share_model = match &raw.share_model {
        None => {
            ck.errors.push(ValidationError::NoShareModel);
            None
        }
        Some(RawShareModel::Proportional {
            weights,
            tier3_share,
        }) => {
            let mut map = BTreeMap::new();
            for (id, w) in weights {
                if !known.contains(id.as_str()) {
                    ck.errors
                        .push(ValidationError::UnknownWeightDrug { drug: id.clone() });
                    continue;
                }
                if let Some(rate) = ck.rate(&format!("share_model.weights.{id}"), w) {
                    if rate.is_zero() {
                        ck.errors
                            .push(ValidationError::WeightNotPositive { drug: id.clone() });
                    } else {
                        map.insert(DrugId::new(id), rate);
                    }
                }
            }
            for id in &known {
                if !map.contains_key(&DrugId::new(*id))
                    && !ck.errors.iter().any(|e| {
                        matches!(e,
                        ValidationError::WeightNotPositive { drug } if drug == id)
                    })
                {
                    ck.errors.push(ValidationError::MissingWeight {
                        drug: id.to_string(),
                    });
                }
            }
            let s_t3 = tier3_share
                .as_ref()
                .and_then(|d| ck.rate("share_model.tier3_share", d))
                .unwrap_or(policy_tier3_share);
            let max_tier3 = tier3_capable.min(n.saturating_sub(1));
            if max_tier3 > 0 {
                let occupied = s_t3.as_decimal().mul(&Decimal::from_u64(max_tier3 as u64));
                if occupied >= Decimal::ONE {
                    ck.errors.push(ValidationError::Tier3ShareTooLarge {
                        share: s_t3.to_string(),
                        count: max_tier3,
                    });
                }
            }
            Some(ShareModel::Proportional {
                weights: map,
                tier3_share: s_t3,
            })
        }
        Some(RawShareModel::Table(entries)) => {
            let mut table = BTreeMap::new();
            for (key, shares) in entries {
                let parsed_key = parse_share_key(key, &known);
                let positions = match parsed_key {
                    Ok(p) => p,
                    Err(reason) => {
                        ck.errors.push(ValidationError::BadShareKey {
                            key: key.clone(),
                            reason,
                        });
                        continue;
                    }
                };
                let mut entry = BTreeMap::new();
                let mut sum = Decimal::ZERO;
                let mut entry_ok = true;
                for (id, value) in shares {
                    if !known.contains(id.as_str()) {
                        ck.errors.push(ValidationError::BadShareKey {
                            key: key.clone(),
                            reason: format!("share listed for unknown drug {id}"),
                        });
                        entry_ok = false;
                        continue;
                    }
                    let Some(rate) = ck.rate(&format!("share_model.entries.{key}.{id}"), value)
                    else {
                        entry_ok = false;
                        continue;
                    };
                    if positions.get(id.as_str()) == Some(&Position::Excluded) && !rate.is_zero() {
                        ck.errors.push(ValidationError::ExcludedShareNonzero {
                            path: format!("share_model.entries.{key}.{id}"),
                            value: rate.to_string(),
                        });
                        entry_ok = false;
                        continue;
                    }
                    if positions.get(id.as_str()) != Some(&Position::Excluded) {
                        sum = sum.add(&rate.as_decimal());
                    }
                    entry.insert(DrugId::new(id), rate);
                }
                if entry_ok && sum != Decimal::ONE {
                    ck.errors.push(ValidationError::ShareSum {
                        key: key.clone(),
                        sum: sum.to_string(),
                    });
                    entry_ok = false;
                }
                if entry_ok {
                    table.insert(key.clone(), entry);
                }
            }
            Some(ShareModel::Table(table))
        }
    };

    if !ck.errors.is_empty() {
        return Err(ck.errors);
    }

    Ok(Scenario {
        class_name: raw.class_name,
        total_units: raw.total_units,
        menus,
        share_model: share_model.expect("share model present when no errors"),
        policy: Policy {
            bid_down_limit,
            tier3_share: policy_tier3_share,
            count_admin_fee_in_cost: raw.count_admin_fee_in_cost.unwrap_or(false),
        },
        objective: ObjectiveConfig {
            gross_rebate_weight,
        },
    })
}

/// Parse a canonical share-table key (`id=POSITION,...`) against the known
/// drug set. Every drug must appear exactly once.
fn parse_share_key(
    key: &str,
    known: &BTreeSet<&str>,
) -> Result<BTreeMap<String, Position>, String> {
    let mut positions = BTreeMap::new();
    for part in key.split(',') {
        let (id, status) = part
            .split_once('=')
            .ok_or_else(|| format!("malformed segment {part:?}, expected id=POSITION"))?;
        if !known.contains(id) {
            return Err(format!("unknown drug {id}"));
        }
        let position = match status {
            "PREFERRED" => Position::Preferred,
            "TIER3" => Position::Tier3,
            "EXCLUDED" => Position::Excluded,
            other => return Err(format!("unknown position {other:?}")),
        };
        if positions.insert(id.to_string(), position).is_some() {
            return Err(format!("drug {id} listed twice"));
        }
    }
    for id in known {
        if !positions.contains_key(*id) {
            return Err(format!("drug {id} missing from key"));
        }
    }
    if !positions.values().any(|p| *p == Position::Preferred) {
        return Err("no drug is preferred".to_string());
    }
    Ok(positions)
}
