//! Market-design screens over bid menus: incumbent bid-down limits,
//! minimum incremental exclusionary rebates, the linear-bid-basis ban,
//! a subadditivity sanity check, and the bundled-rebate counterfactual
//! against a standard per-drug auction.

use std::cmp::Ordering;
use std::fmt;

use serde_json::Value;

use crate::decimal::Decimal;
use crate::domain::menu::BidMenu;
use crate::domain::money::Money;
use crate::domain::rate::Rate;
use crate::domain::scenario::{Policy, Scenario};
use crate::duopoly::ld_minimum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleId {
    BidDownLimit,
    LdBelowMinimum,
    NonlinearBasis,
    SubadditivityWarning,
    BundleDominated,
}

impl RuleId {
    pub fn code(&self) -> &'static str {
        match self {
            RuleId::BidDownLimit => "BID_DOWN_LIMIT",
            RuleId::LdBelowMinimum => "LD_BELOW_MINIMUM",
            RuleId::NonlinearBasis => "NONLINEAR_BASIS",
            RuleId::SubadditivityWarning => "SUBADDITIVITY_WARNING",
            RuleId::BundleDominated => "BUNDLE_DOMINATED",
        }
    }
}

/// Reject findings fail the menu; warnings flag empirically odd structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Reject,
    Warn,
}

impl Severity {
    pub fn label(&self) -> &'static str {
        match self {
            Severity::Reject => "reject",
            Severity::Warn => "warn",
        }
    }
}

/// Observed value and threshold always carry the same unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Quantity {
    Rate(Decimal),
    Money(Money),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Rate(r) => f.write_str(&r.format_dp(4)),
            Quantity::Money(m) => f.write_str(&m.to_canonical_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplianceFinding {
    pub rule: RuleId,
    pub severity: Severity,
    pub drug_id: String,
    pub observed: Option<Quantity>,
    pub threshold: Option<Quantity>,
    pub explanation: String,
}

/// Report order: rejects first, then rule code, then drug id. Stable, so
/// findings of one menu keep their option order.
pub fn finding_order(a: &ComplianceFinding, b: &ComplianceFinding) -> Ordering {
    a.severity
        .cmp(&b.severity)
        .then_with(|| a.rule.code().cmp(b.rule.code()))
        .then_with(|| a.drug_id.cmp(&b.drug_id))
}

/// Flag every shared 1-of-k rate that bids down more than `delta` below
/// the menu's own exclusive rate. Vacuous for menus without an exclusive
/// bid.
pub fn check_bid_down(menu: &BidMenu, delta: Rate) -> Vec<ComplianceFinding> {
    let Some(exclusive) = menu.exclusive_rate() else {
        return Vec::new();
    };
    let floor = delta.complement().as_decimal().mul(&exclusive.as_decimal());
    let mut findings = Vec::new();
    for (k, rate) in &menu.preferred_rates {
        if *k == 1 {
            continue;
        }
        if rate.as_decimal() < floor {
            findings.push(ComplianceFinding {
                rule: RuleId::BidDownLimit,
                severity: Severity::Reject,
                drug_id: menu.drug_id.to_string(),
                observed: Some(Quantity::Rate(rate.as_decimal())),
                threshold: Some(Quantity::Rate(floor)),
                explanation: format!(
                    "1-of-{k} rate {rate} bids down more than {delta} below the exclusive rate {exclusive}; floor is {}",
                    floor.format_dp(4)
                ),
            });
        }
    }
    findings
}

/// Flag every incremental exclusionary rebate below the minimum that
/// covers the Tier-3 rebates forgone by outright exclusion. The threshold
/// is the duopoly model's `ld_minimum`; this check never computes its own.
pub fn check_ld(menu: &BidMenu, delta: Rate, tier3_share: Rate) -> Vec<ComplianceFinding> {
    let Some(exclusive) = menu.exclusive_rate() else {
        return Vec::new();
    };
    let minimum = ld_minimum(
        &exclusive.as_decimal(),
        &delta.as_decimal(),
        &tier3_share.as_decimal(),
    );
    let mut findings = Vec::new();
    for (index, option) in menu.exclusionary_options.iter().enumerate() {
        if option.incremental_rate.as_decimal() < minimum {
            let named: Vec<String> = option.excludes.iter().map(|d| d.to_string()).collect();
            findings.push(ComplianceFinding {
                rule: RuleId::LdBelowMinimum,
                severity: Severity::Reject,
                drug_id: menu.drug_id.to_string(),
                observed: Some(Quantity::Rate(option.incremental_rate.as_decimal())),
                threshold: Some(Quantity::Rate(minimum)),
                explanation: format!(
                    "exclusionary option {index} (excludes {}) offers {} against a minimum of {}",
                    named.join(", "),
                    option.incremental_rate,
                    minimum.format_dp(4)
                ),
            });
        }
    }
    findings
}

/// Warn when a menu's per-unit bid rises with the number of drugs sharing
/// the position; willingness to pay normally falls as k grows.
pub fn check_subadditivity(menu: &BidMenu) -> Vec<ComplianceFinding> {
    let mut findings = Vec::new();
    let rates: Vec<(&usize, &Rate)> = menu.preferred_rates.iter().collect();
    for pair in rates.windows(2) {
        let (k_small, r_small) = pair[0];
        let (k_large, r_large) = pair[1];
        if r_large > r_small {
            findings.push(ComplianceFinding {
                rule: RuleId::SubadditivityWarning,
                severity: Severity::Warn,
                drug_id: menu.drug_id.to_string(),
                observed: Some(Quantity::Rate(r_large.as_decimal())),
                threshold: Some(Quantity::Rate(r_small.as_decimal())),
                explanation: format!(
                    "1-of-{k_large} rate {r_large} exceeds 1-of-{k_small} rate {r_small}; shared-position bids normally fall as k grows"
                ),
            });
        }
    }
    findings
}

/// Field-name markers whose presence makes a bid non-linear in unit volume.
const NONLINEAR_MARKERS: [&str; 4] = ["bundle", "lump_sum", "market_share", "cross_drug"];

/// Scan a raw (pre-validation) menu document for banned non-linear bid
/// bases: lump sums, bundled or cross-drug terms, market-share-contingent
/// tiers. Anything beyond a flat %-off-WAC schedule rejects.
pub fn check_linear_basis(raw_menu: &Value) -> Vec<ComplianceFinding> {
    let drug_id = raw_menu
        .get("id")
        .and_then(Value::as_str)
        .unwrap_or("(unknown)")
        .to_string();
    let mut offending = Vec::new();
    scan_keys(raw_menu, "", &mut offending);
    offending
        .into_iter()
        .map(|path| ComplianceFinding {
            rule: RuleId::NonlinearBasis,
            severity: Severity::Reject,
            drug_id: drug_id.clone(),
            observed: None,
            threshold: None,
            explanation: format!(
                "field {path:?} introduces a non-linear bid basis; only per-unit %-off-WAC rates are accepted"
            ),
        })
        .collect()
}

fn scan_keys(value: &Value, path: &str, offending: &mut Vec<String>) {
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                let child_path = if path.is_empty() {
                    key.clone()
                } else {
                    format!("{path}.{key}")
                };
                let lowered = key.to_ascii_lowercase();
                if NONLINEAR_MARKERS.iter().any(|m| lowered.contains(m)) {
                    offending.push(child_path.clone());
                }
                scan_keys(child, &child_path, offending);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                scan_keys(child, &format!("{path}[{i}]"), offending);
            }
        }
        _ => {}
    }
}

/// A lump-sum rebate offer tying established drugs to a favored assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleOffer {
    pub bundled_rebate_total: Money,
    pub tying_drug: String,
    pub tied_drugs: Vec<String>,
    pub market_gross: Money,
    pub pbm_share: Rate,
    pub expected_winning_rate: Rate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleComparison {
    /// What a standard per-drug auction would raise:
    /// `market_gross * pbm_share * expected_winning_rate`.
    pub standard_proceeds: Money,
    pub bundle_total: Money,
    pub finding: Option<ComplianceFinding>,
}

/// Compare a bundled offer against the standard-auction counterfactual.
/// The bundle is dominated (reject) when the standard auction would raise
/// at least as much.
pub fn bundle_counterfactual(offer: &BundleOffer) -> BundleComparison {
    let proceeds = offer
        .market_gross
        .amount()
        .mul(&offer.pbm_share.as_decimal())
        .mul(&offer.expected_winning_rate.as_decimal());
    let standard_proceeds = Money::from_decimal(proceeds);
    let finding = if standard_proceeds >= offer.bundled_rebate_total {
        Some(ComplianceFinding {
            rule: RuleId::BundleDominated,
            severity: Severity::Reject,
            drug_id: offer.tying_drug.clone(),
            observed: Some(Quantity::Money(offer.bundled_rebate_total)),
            threshold: Some(Quantity::Money(standard_proceeds)),
            explanation: format!(
                "bundled offer {} is dominated by standard-auction proceeds {} ({} of a {} market at {})",
                offer.bundled_rebate_total,
                standard_proceeds,
                offer.pbm_share,
                offer.market_gross,
                offer.expected_winning_rate
            ),
        })
    } else {
        None
    };
    BundleComparison {
        standard_proceeds,
        bundle_total: offer.bundled_rebate_total,
        finding,
    }
}

/// Run every menu-level check over a validated scenario and return the
/// findings in report order. Pure in (scenario, policy): same inputs, same
/// report.
pub fn compliance_report(scenario: &Scenario, policy: &Policy) -> Vec<ComplianceFinding> {
    let mut findings = Vec::new();
    for menu in &scenario.menus {
        findings.extend(check_bid_down(menu, policy.bid_down_limit));
        findings.extend(check_ld(menu, policy.bid_down_limit, policy.tier3_share));
        findings.extend(check_subadditivity(menu));
    }
    findings.sort_by(finding_order);
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::menu::ExclusionaryOption;
    use crate::domain::{DrugId, ManufacturerId};

    fn rate(s: &str) -> Rate {
        s.parse().unwrap()
    }

    fn dec(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn menu(id: &str, preferred: &[(usize, &str)], options: &[(&str, &str)]) -> BidMenu {
        BidMenu {
            drug_id: DrugId::new(id),
            manufacturer_id: ManufacturerId::new(format!("mfr-{id}")),
            wac_per_unit: "100".parse().unwrap(),
            preferred_rates: preferred.iter().map(|(k, r)| (*k, rate(r))).collect(),
            tier3_rate: None,
            admin_fee: None,
            price_protection: None,
            exclusionary_options: options
                .iter()
                .map(|(excludes, inc)| ExclusionaryOption {
                    excludes: [DrugId::new(*excludes)].into(),
                    incremental_rate: rate(inc),
                })
                .collect(),
        }
    }

    fn delta10() -> Rate {
        rate("0.10")
    }

    #[test]
    fn steep_bid_down_rejects() {
        // exclusive 57.5%, shared 18%: floor is 51.75%
        let m = menu("novolog", &[(1, "0.575"), (2, "0.18")], &[]);
        let findings = check_bid_down(&m, delta10());
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].rule, RuleId::BidDownLimit);
        assert_eq!(findings[0].threshold, Some(Quantity::Rate(dec("0.5175"))));
    }

    #[test]
    fn apidra_bid_down_rejects() {
        let m = menu("apidra", &[(1, "0.66"), (2, "0.41")], &[]);
        let findings = check_bid_down(&m, delta10());
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].threshold, Some(Quantity::Rate(dec("0.594"))));
    }

    #[test]
    fn shallow_bid_down_passes() {
        let m = menu("lantus", &[(1, "0.56"), (2, "0.54"), (3, "0.51")], &[]);
        assert!(check_bid_down(&m, delta10()).is_empty());
    }

    #[test]
    fn bid_down_exactly_at_the_floor_passes() {
        let m = menu("d", &[(1, "0.50"), (2, "0.45")], &[]);
        assert!(check_bid_down(&m, delta10()).is_empty());
        let m = menu("d", &[(1, "0.50"), (2, "0.4499")], &[]);
        assert_eq!(check_bid_down(&m, delta10()).len(), 1);
    }

    #[test]
    fn no_exclusive_rate_is_vacuous() {
        let m = menu("entrant", &[(2, "0.90")], &[]);
        assert!(check_bid_down(&m, delta10()).is_empty());
        assert!(check_ld(&m, delta10(), rate("0.10")).is_empty());
    }

    #[test]
    fn tiny_exclusionary_increments_reject() {
        let m = menu(
            "lantus",
            &[(1, "0.56"), (2, "0.54"), (3, "0.51")],
            &[("levemir", "0.02"), ("basaglar", "0.03")],
        );
        let findings = check_ld(&m, delta10(), rate("0.10"));
        assert_eq!(findings.len(), 2);
        for f in &findings {
            assert_eq!(f.threshold, Some(Quantity::Rate(dec("0.0504"))));
            assert_eq!(f.severity, Severity::Reject);
        }
    }

    #[test]
    fn healthy_exclusionary_increment_passes() {
        let m = menu(
            "apidra",
            &[(1, "0.66"), (2, "0.41")],
            &[("humalog", "0.15")],
        );
        assert!(check_ld(&m, delta10(), rate("0.10")).is_empty());
    }

    #[test]
    fn zero_tier3_share_passes_everything() {
        let m = menu("lantus", &[(1, "0.56")], &[("levemir", "0.02")]);
        assert!(check_ld(&m, delta10(), Rate::ZERO).is_empty());
    }

    #[test]
    fn ld_threshold_comes_from_the_duopoly_model() {
        let m = menu("lantus", &[(1, "0.56")], &[("levemir", "0.02")]);
        let findings = check_ld(&m, delta10(), rate("0.10"));
        let expected = ld_minimum(&dec("0.56"), &dec("0.10"), &dec("0.10"));
        assert_eq!(findings[0].threshold, Some(Quantity::Rate(expected)));
    }

    #[test]
    fn decreasing_bids_raise_no_subadditivity_warning() {
        let m = menu("lantus", &[(1, "0.50"), (2, "0.40"), (3, "0.26")], &[]);
        assert!(check_subadditivity(&m).is_empty());
    }

    #[test]
    fn increasing_bids_warn() {
        let m = menu("odd", &[(1, "0.40"), (2, "0.50")], &[]);
        let findings = check_subadditivity(&m);
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].severity, Severity::Warn);
    }

    #[test]
    fn single_k_menu_is_vacuous() {
        let m = menu("solo", &[(1, "0.40")], &[]);
        assert!(check_subadditivity(&m).is_empty());
    }

    #[test]
    fn banned_fields_reject() {
        let raw = serde_json::json!({
            "id": "repatha",
            "bids": {"exclusive": "0.65"},
            "bundled_rebate_total": "80000000"
        });
        let findings = check_linear_basis(&raw);
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].rule, RuleId::NonlinearBasis);
        assert_eq!(findings[0].drug_id, "repatha");
    }

    #[test]
    fn market_share_tiers_reject() {
        let raw = serde_json::json!({
            "id": "x",
            "bids": {"exclusive": "0.65"},
            "market_share_tiers": [{"at_least": "0.5", "rate": "0.7"}]
        });
        assert_eq!(check_linear_basis(&raw).len(), 1);
    }

    #[test]
    fn plain_menu_passes_linear_check() {
        let raw = serde_json::json!({
            "id": "x",
            "manufacturer": "m",
            "wac_per_unit": "100",
            "bids": {"exclusive": "0.65", "shared_1_of_2": "0.60"}
        });
        assert!(check_linear_basis(&raw).is_empty());
    }

    #[test]
    fn dominated_bundle_rejects() {
        let offer = BundleOffer {
            bundled_rebate_total: "80000000".parse().unwrap(),
            tying_drug: "repatha".into(),
            tied_drugs: vec!["enbrel".into(), "otezla".into()],
            market_gross: "900000000".parse().unwrap(),
            pbm_share: rate("0.1527"),
            expected_winning_rate: rate("0.70"),
        };
        let cmp = bundle_counterfactual(&offer);
        assert_eq!(cmp.standard_proceeds, "96201000".parse().unwrap());
        let finding = cmp.finding.unwrap();
        assert_eq!(finding.rule, RuleId::BundleDominated);
    }

    #[test]
    fn genuinely_larger_bundle_passes() {
        let offer = BundleOffer {
            bundled_rebate_total: "200000000".parse().unwrap(),
            tying_drug: "repatha".into(),
            tied_drugs: vec![],
            market_gross: "900000000".parse().unwrap(),
            pbm_share: rate("0.1527"),
            expected_winning_rate: rate("0.70"),
        };
        assert!(bundle_counterfactual(&offer).finding.is_none());
    }

    #[test]
    fn proceeds_across_the_feasible_rate_band() {
        let offer = |r: &str| BundleOffer {
            bundled_rebate_total: "80000000".parse().unwrap(),
            tying_drug: "repatha".into(),
            tied_drugs: vec![],
            market_gross: "900000000".parse().unwrap(),
            pbm_share: rate("0.1527"),
            expected_winning_rate: rate(r),
        };
        let low = bundle_counterfactual(&offer("0.70"));
        let high = bundle_counterfactual(&offer("0.85"));
        assert_eq!(low.standard_proceeds, "96201000".parse().unwrap());
        assert_eq!(high.standard_proceeds, "116815500".parse().unwrap());
    }
}
