//! Exhaustive, duplicate-free enumeration of feasible assignments.
//!
//! Realistic therapeutic classes hold a handful of drugs, so the status
//! space (at most 3^n) is enumerated directly rather than fed to a solver.
//! A hard cap guards against accidental blowup.

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::scenario::{Assignment, Position, Scenario};
use crate::engine::{EngineError, SolveOptions};

const POSITIONS: [Position; 3] = [Position::Preferred, Position::Tier3, Position::Excluded];

/// Cap on the total number of exclusionary options across all menus;
/// each activatable subset multiplies the assignment count.
pub const MAX_TOTAL_OPTIONS: usize = 16;

/// Every mapping of drugs to positions with at least one preferred drug,
/// where each preferred drug bids on the realized 1-of-k position, each
/// Tier-3 drug has a Tier-3 rate, and every consistent subset of
/// activatable exclusionary options is its own assignment.
///
/// Order is deterministic: drugs in id order, positions cycling
/// preferred/tier3/excluded from the last drug, option subsets in ascending
/// bitmask order.
pub fn enumerate_assignments(
    scenario: &Scenario,
    options: &SolveOptions,
) -> Result<Vec<Assignment>, EngineError> {
    let n = scenario.menus.len();
    if n > options.max_drugs {
        return Err(EngineError::TooLarge {
            drugs: n,
            cap: options.max_drugs,
        });
    }
    let total_options: usize = scenario
        .menus
        .iter()
        .map(|m| m.exclusionary_options.len())
        .sum();
    if total_options > MAX_TOTAL_OPTIONS {
        return Err(EngineError::TooManyOptions {
            options: total_options,
            cap: MAX_TOTAL_OPTIONS,
        });
    }

    let mut assignments = Vec::new();
    let mut counters = vec![0usize; n];
    loop {
        let combo: Vec<Position> = counters.iter().map(|&c| POSITIONS[c]).collect();
        if let Some(positions) = feasible_positions(scenario, &combo) {
            push_option_subsets(scenario, positions, &mut assignments);
        }

        // mixed-radix increment, most significant digit first
        let mut digit = n;
        loop {
            if digit == 0 {
                if assignments.is_empty() {
                    return Err(EngineError::NoFeasibleAssignment);
                }
                return Ok(assignments);
            }
            digit -= 1;
            counters[digit] += 1;
            if counters[digit] < POSITIONS.len() {
                break;
            }
            counters[digit] = 0;
        }
    }
}

/// Check menu feasibility of one status combination.
fn feasible_positions(
    scenario: &Scenario,
    combo: &[Position],
) -> Option<BTreeMap<crate::domain::DrugId, Position>> {
    let preferred_count = combo.iter().filter(|p| **p == Position::Preferred).count();
    if preferred_count == 0 {
        return None;
    }
    for (menu, position) in scenario.menus.iter().zip(combo) {
        match position {
            Position::Preferred => {
                if !menu.preferred_rates.contains_key(&preferred_count) {
                    return None;
                }
            }
            Position::Tier3 => {
                menu.tier3_rate?;
            }
            Position::Excluded => {}
        }
    }
    Some(
        scenario
            .menus
            .iter()
            .zip(combo)
            .map(|(m, p)| (m.drug_id.clone(), *p))
            .collect(),
    )
}

fn push_option_subsets(
    scenario: &Scenario,
    positions: BTreeMap<crate::domain::DrugId, Position>,
    out: &mut Vec<Assignment>,
) {
    // Options activatable here: bidder preferred, all named competitors excluded.
    let mut activatable = Vec::new();
    for menu in &scenario.menus {
        if positions.get(&menu.drug_id) != Some(&Position::Preferred) {
            continue;
        }
        for (index, option) in menu.exclusionary_options.iter().enumerate() {
            let all_excluded = option
                .excludes
                .iter()
                .all(|c| positions.get(c) == Some(&Position::Excluded));
            if all_excluded {
                activatable.push((menu.drug_id.clone(), index));
            }
        }
    }

    for mask in 0..(1u32 << activatable.len()) {
        let active: BTreeSet<_> = activatable
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, opt)| opt.clone())
            .collect();
        let assignment = Assignment::new(scenario, positions.clone(), active)
            .expect("enumerated assignments satisfy the assignment invariants");
        out.push(assignment);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::menu::{BidMenu, ExclusionaryOption};
    use crate::domain::rate::Rate;
    use crate::domain::scenario::{ObjectiveConfig, Policy, ShareModel};
    use crate::domain::{DrugId, ManufacturerId};

    fn rate(s: &str) -> Rate {
        s.parse().unwrap()
    }

    fn menu(id: &str, ks: &[usize], tier3: bool) -> BidMenu {
        BidMenu {
            drug_id: DrugId::new(id),
            manufacturer_id: ManufacturerId::new(format!("mfr-{id}")),
            wac_per_unit: "100".parse().unwrap(),
            preferred_rates: ks.iter().map(|k| (*k, rate("0.4"))).collect(),
            tier3_rate: tier3.then(|| rate("0.1")),
            admin_fee: None,
            price_protection: None,
            exclusionary_options: vec![],
        }
    }

    fn scenario(menus: Vec<BidMenu>) -> Scenario {
        let weights = menus
            .iter()
            .map(|m| (m.drug_id.clone(), rate("0.5")))
            .collect();
        Scenario {
            class_name: "test".into(),
            total_units: 1000,
            menus,
            share_model: ShareModel::Proportional {
                weights,
                tier3_share: rate("0.1"),
            },
            policy: Policy::default(),
            objective: ObjectiveConfig::default(),
        }
    }

    #[test]
    fn two_drugs_no_tier3_no_options() {
        let s = scenario(vec![menu("a", &[1, 2], false), menu("b", &[1, 2], false)]);
        let assignments = enumerate_assignments(&s, &SolveOptions::default()).unwrap();
        let keys: Vec<String> = assignments.iter().map(|a| a.canonical_key()).collect();
        assert_eq!(
            keys,
            vec![
                "a=PREFERRED,b=PREFERRED",
                "a=PREFERRED,b=EXCLUDED",
                "a=EXCLUDED,b=PREFERRED",
            ]
        );
    }

    #[test]
    fn exclusionary_option_splits_the_exclusive_branch() {
        let mut incumbent = menu("a", &[1, 2], false);
        incumbent.exclusionary_options.push(ExclusionaryOption {
            excludes: [DrugId::new("b")].into(),
            incremental_rate: rate("0.15"),
        });
        let s = scenario(vec![incumbent, menu("b", &[1, 2], false)]);
        let assignments = enumerate_assignments(&s, &SolveOptions::default()).unwrap();
        let keys: Vec<String> = assignments.iter().map(|a| a.canonical_key()).collect();
        assert_eq!(
            keys,
            vec![
                "a=PREFERRED,b=PREFERRED",
                "a=PREFERRED,b=EXCLUDED",
                "a=PREFERRED,b=EXCLUDED,a+ld0",
                "a=EXCLUDED,b=PREFERRED",
            ]
        );
    }

    #[test]
    fn three_full_menus_yield_19_assignments() {
        let s = scenario(vec![
            menu("a", &[1, 2, 3], true),
            menu("b", &[1, 2, 3], true),
            menu("c", &[1, 2, 3], true),
        ]);
        let assignments = enumerate_assignments(&s, &SolveOptions::default()).unwrap();
        // 3^3 status maps minus the 2^3 with no preferred drug
        assert_eq!(assignments.len(), 19);
        let unique: std::collections::BTreeSet<String> =
            assignments.iter().map(|a| a.canonical_key()).collect();
        assert_eq!(unique.len(), 19);
    }

    #[test]
    fn drug_without_tier3_rate_cannot_sit_in_tier3() {
        let s = scenario(vec![menu("a", &[1], false), menu("b", &[1], false)]);
        let assignments = enumerate_assignments(&s, &SolveOptions::default()).unwrap();
        // Only the two exclusive-vs-excluded splits; no shared rate, no tier3.
        assert_eq!(assignments.len(), 2);
    }

    #[test]
    fn no_feasible_assignment_is_an_error() {
        // a bids only 1-of-2, b and c bid only 1-of-3: no k is ever realized.
        let s = scenario(vec![
            menu("a", &[2], false),
            menu("b", &[3], false),
            menu("c", &[3], false),
        ]);
        let err = enumerate_assignments(&s, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, EngineError::NoFeasibleAssignment));
    }

    #[test]
    fn drug_cap_guards_blowup() {
        let menus: Vec<BidMenu> = (0..13)
            .map(|i| menu(&format!("d{i:02}"), &[1], false))
            .collect();
        let s = scenario(menus);
        let err = enumerate_assignments(&s, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, EngineError::TooLarge { drugs: 13, cap: 12 }));
    }
}
