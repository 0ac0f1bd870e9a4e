//! Therapeutic-class scenarios and position assignments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::domain::menu::{BidMenu, FormularyStatus};
use crate::domain::rate::Rate;
use crate::domain::DrugId;

/// Policy knobs a plan sponsor (or regulator) turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    /// Maximum permitted relative bid-down on an incumbent's shared rates.
    pub bid_down_limit: Rate,
    /// Expected market share a Tier-3 drug garners (feeds the LD minimum).
    pub tier3_share: Rate,
    /// Whether administrative fees count toward sponsor cost. They are PBM
    /// revenue by default.
    pub count_admin_fee_in_cost: bool,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            bid_down_limit: Rate::from_basis_points(1000).unwrap(),
            tier3_share: Rate::from_basis_points(1000).unwrap(),
            count_admin_fee_in_cost: false,
        }
    }
}

/// Objective-shaping knobs. A positive `gross_rebate_weight` subtracts
/// `weight * gross_rebates` from sponsor cost when ranking assignments;
/// it defaults to zero and exists to quantify that practice, not endorse it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveConfig {
    pub gross_rebate_weight: Rate,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            gross_rebate_weight: Rate::ZERO,
        }
    }
}

/// How expected demand splits across drugs for a given assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShareModel {
    /// Explicit per-assignment shares keyed by canonical assignment key
    /// (see [`Assignment::share_key`]).
    Table(BTreeMap<String, BTreeMap<DrugId, Rate>>),
    /// Tier-3 drugs each take `tier3_share`; preferred drugs split the
    /// remainder in proportion to their standalone weights.
    Proportional {
        weights: BTreeMap<DrugId, Rate>,
        tier3_share: Rate,
    },
}

/// A validated therapeutic-class market: total demand, every bid menu,
/// the share model, and policy. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub class_name: String,
    pub total_units: u64,
    pub menus: Vec<BidMenu>,
    pub share_model: ShareModel,
    pub policy: Policy,
    pub objective: ObjectiveConfig,
}

impl Scenario {
    pub fn menu(&self, id: &DrugId) -> Option<&BidMenu> {
        self.menus.iter().find(|m| &m.drug_id == id)
    }

    pub fn drug_ids(&self) -> Vec<DrugId> {
        self.menus.iter().map(|m| m.drug_id.clone()).collect()
    }
}

/// A drug's slot in an assignment, before the preferred count is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Position {
    Preferred,
    Tier3,
    Excluded,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Preferred => f.write_str("PREFERRED"),
            Position::Tier3 => f.write_str("TIER3"),
            Position::Excluded => f.write_str("EXCLUDED"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssignmentError {
    #[error("assignment must place at least one drug in a preferred position")]
    NoPreferredDrug,
    #[error("assignment names unknown drug {0}")]
    UnknownDrug(DrugId),
    #[error("assignment must place every scenario drug exactly once (missing {0})")]
    MissingDrug(DrugId),
    #[error("exclusionary option {index} on {drug} does not exist")]
    NoSuchOption { drug: DrugId, index: usize },
    #[error("exclusionary option {index} on {drug} requires the bidder to be preferred")]
    OptionBidderNotPreferred { drug: DrugId, index: usize },
    #[error("exclusionary option {index} on {drug} requires {competitor} to be excluded")]
    OptionCompetitorNotExcluded {
        drug: DrugId,
        index: usize,
        competitor: DrugId,
    },
}

/// A status decision per drug plus the set of accepted exclusionary options,
/// identified as (bidder drug, option index).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Assignment {
    positions: BTreeMap<DrugId, Position>,
    active_options: BTreeSet<(DrugId, usize)>,
}

impl Assignment {
    /// Build and check the assignment invariants against a scenario:
    /// every drug placed, at least one preferred, and each active option's
    /// bidder preferred with all named competitors excluded.
    pub fn new(
        scenario: &Scenario,
        positions: BTreeMap<DrugId, Position>,
        active_options: BTreeSet<(DrugId, usize)>,
    ) -> Result<Assignment, AssignmentError> {
        for id in positions.keys() {
            if scenario.menu(id).is_none() {
                return Err(AssignmentError::UnknownDrug(id.clone()));
            }
        }
        for menu in &scenario.menus {
            if !positions.contains_key(&menu.drug_id) {
                return Err(AssignmentError::MissingDrug(menu.drug_id.clone()));
            }
        }
        let assignment = Assignment {
            positions,
            active_options,
        };
        if assignment.preferred_count() == 0 {
            return Err(AssignmentError::NoPreferredDrug);
        }
        for (drug, index) in &assignment.active_options {
            let menu = scenario
                .menu(drug)
                .ok_or_else(|| AssignmentError::UnknownDrug(drug.clone()))?;
            let option = menu.exclusionary_options.get(*index).ok_or_else(|| {
                AssignmentError::NoSuchOption {
                    drug: drug.clone(),
                    index: *index,
                }
            })?;
            if assignment.positions.get(drug) != Some(&Position::Preferred) {
                return Err(AssignmentError::OptionBidderNotPreferred {
                    drug: drug.clone(),
                    index: *index,
                });
            }
            for competitor in &option.excludes {
                if assignment.positions.get(competitor) != Some(&Position::Excluded) {
                    return Err(AssignmentError::OptionCompetitorNotExcluded {
                        drug: drug.clone(),
                        index: *index,
                        competitor: competitor.clone(),
                    });
                }
            }
        }
        Ok(assignment)
    }

    pub fn positions(&self) -> &BTreeMap<DrugId, Position> {
        &self.positions
    }

    pub fn active_options(&self) -> &BTreeSet<(DrugId, usize)> {
        &self.active_options
    }

    pub fn active_options_for(&self, drug: &DrugId) -> Vec<usize> {
        self.active_options
            .iter()
            .filter(|(d, _)| d == drug)
            .map(|(_, i)| *i)
            .collect()
    }

    pub fn preferred_count(&self) -> usize {
        self.positions
            .values()
            .filter(|p| **p == Position::Preferred)
            .count()
    }

    pub fn tier3_count(&self) -> usize {
        self.positions
            .values()
            .filter(|p| **p == Position::Tier3)
            .count()
    }

    pub fn preferred_drugs(&self) -> Vec<DrugId> {
        self.positions
            .iter()
            .filter(|(_, p)| **p == Position::Preferred)
            .map(|(d, _)| d.clone())
            .collect()
    }

    /// Realized status of one drug; preferred drugs all share the same k.
    pub fn status_of(&self, drug: &DrugId) -> Option<FormularyStatus> {
        self.positions.get(drug).map(|p| match p {
            Position::Preferred => FormularyStatus::Preferred(self.preferred_count()),
            Position::Tier3 => FormularyStatus::Tier3,
            Position::Excluded => FormularyStatus::Excluded,
        })
    }

    /// Canonical key over statuses only (option activations do not move
    /// demand): drug ids sorted, `id=POSITION`, comma-joined.
    pub fn share_key(&self) -> String {
        self.positions
            .iter()
            .map(|(d, p)| format!("{d}={p}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Full identity key: the share key plus active option markers, used for
    /// deterministic final tie-breaking and report labels.
    pub fn canonical_key(&self) -> String {
        let mut key = self.share_key();
        for (drug, index) in &self.active_options {
            key.push_str(&format!(",{drug}+ld{index}"));
        }
        key
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::menu::ExclusionaryOption;
    use crate::domain::ManufacturerId;
    use std::collections::BTreeMap;

    fn two_drug_scenario() -> Scenario {
        let menu = |id: &str, mfr: &str, options: Vec<ExclusionaryOption>| BidMenu {
            drug_id: DrugId::new(id),
            manufacturer_id: ManufacturerId::new(mfr),
            wac_per_unit: "100".parse().unwrap(),
            preferred_rates: BTreeMap::from([
                (1, "0.5".parse().unwrap()),
                (2, "0.4".parse().unwrap()),
            ]),
            tier3_rate: None,
            admin_fee: None,
            price_protection: None,
            exclusionary_options: options,
        };
        Scenario {
            class_name: "test".into(),
            total_units: 100,
            menus: vec![
                menu(
                    "a",
                    "mfr-a",
                    vec![ExclusionaryOption {
                        excludes: BTreeSet::from([DrugId::new("b")]),
                        incremental_rate: "0.1".parse().unwrap(),
                    }],
                ),
                menu("b", "mfr-b", vec![]),
            ],
            share_model: ShareModel::Proportional {
                weights: BTreeMap::from([
                    (DrugId::new("a"), "0.5".parse().unwrap()),
                    (DrugId::new("b"), "0.5".parse().unwrap()),
                ]),
                tier3_share: "0.1".parse().unwrap(),
            },
            policy: Policy::default(),
            objective: ObjectiveConfig::default(),
        }
    }

    fn positions(pairs: &[(&str, Position)]) -> BTreeMap<DrugId, Position> {
        pairs.iter().map(|(id, p)| (DrugId::new(*id), *p)).collect()
    }

    #[test]
    fn requires_a_preferred_drug() {
        let s = two_drug_scenario();
        let err = Assignment::new(
            &s,
            positions(&[("a", Position::Excluded), ("b", Position::Excluded)]),
            BTreeSet::new(),
        )
        .unwrap_err();
        assert_eq!(err, AssignmentError::NoPreferredDrug);
    }

    #[test]
    fn option_requires_competitor_excluded() {
        let s = two_drug_scenario();
        let err = Assignment::new(
            &s,
            positions(&[("a", Position::Preferred), ("b", Position::Preferred)]),
            BTreeSet::from([(DrugId::new("a"), 0)]),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            AssignmentError::OptionCompetitorNotExcluded { .. }
        ));
    }

    #[test]
    fn status_carries_realized_k() {
        let s = two_drug_scenario();
        let a = Assignment::new(
            &s,
            positions(&[("a", Position::Preferred), ("b", Position::Preferred)]),
            BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(
            a.status_of(&DrugId::new("a")),
            Some(FormularyStatus::Preferred(2))
        );
        assert_eq!(a.share_key(), "a=PREFERRED,b=PREFERRED");
    }

    #[test]
    fn canonical_key_includes_options() {
        let s = two_drug_scenario();
        let a = Assignment::new(
            &s,
            positions(&[("a", Position::Preferred), ("b", Position::Excluded)]),
            BTreeSet::from([(DrugId::new("a"), 0)]),
        )
        .unwrap();
        assert_eq!(a.canonical_key(), "a=PREFERRED,b=EXCLUDED,a+ld0");
    }
}
