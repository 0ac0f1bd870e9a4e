//! Shared test support: an independently coded brute-force solver used as
//! the oracle for the engine, and a seeded random scenario generator.
//!
//! The oracle deliberately avoids every `engine::` entry point. It walks
//! the status space recursively, prices assignments with direct decimal
//! arithmetic, and re-implements the share contract (table lookup;
//! proportional basis-point quotas by largest remainder) from scratch.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::Rng;

use formulary_wdp::decimal::Decimal;
use formulary_wdp::domain::validate::{
    validate_scenario, RawExclusionaryOption, RawMenu, RawScenario, RawShareModel,
};
use formulary_wdp::domain::{BidMenu, DrugId, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Pref,
    T3,
    Out,
}

/// Minimum objective value over every feasible assignment, or None when no
/// assignment is feasible. Also returns the number of feasible assignments.
pub fn brute_force_min_objective(scenario: &Scenario) -> (Option<Decimal>, usize) {
    let menus: Vec<&BidMenu> = scenario.menus.iter().collect();
    let mut slots = vec![Slot::Out; menus.len()];
    let mut best: Option<Decimal> = None;
    let mut count = 0usize;
    walk_statuses(scenario, &menus, &mut slots, 0, &mut best, &mut count);
    (best, count)
}

fn walk_statuses(
    scenario: &Scenario,
    menus: &[&BidMenu],
    slots: &mut Vec<Slot>,
    depth: usize,
    best: &mut Option<Decimal>,
    count: &mut usize,
) {
    if depth == menus.len() {
        score_combo(scenario, menus, slots, best, count);
        return;
    }
    for slot in [Slot::Pref, Slot::T3, Slot::Out] {
        slots[depth] = slot;
        walk_statuses(scenario, menus, slots, depth + 1, best, count);
    }
    slots[depth] = Slot::Out;
}

fn score_combo(
    scenario: &Scenario,
    menus: &[&BidMenu],
    slots: &[Slot],
    best: &mut Option<Decimal>,
    count: &mut usize,
) {
    let k = slots.iter().filter(|s| **s == Slot::Pref).count();
    if k == 0 {
        return;
    }
    for (menu, slot) in menus.iter().zip(slots) {
        match slot {
            Slot::Pref if !menu.preferred_rates.contains_key(&k) => return,
            Slot::T3 if menu.tier3_rate.is_none() => return,
            _ => {}
        }
    }

    let shares = match oracle_shares(scenario, menus, slots, k) {
        Some(s) => s,
        None => return,
    };

    // Options that may be accepted here; recurse over accept/decline.
    let mut available: Vec<(usize, usize)> = Vec::new();
    for (i, (menu, slot)) in menus.iter().zip(slots).enumerate() {
        if *slot != Slot::Pref {
            continue;
        }
        for (j, option) in menu.exclusionary_options.iter().enumerate() {
            let all_out = option.excludes.iter().all(|c| {
                menus
                    .iter()
                    .position(|m| &m.drug_id == c)
                    .map(|pos| slots[pos] == Slot::Out)
                    .unwrap_or(false)
            });
            if all_out {
                available.push((i, j));
            }
        }
    }
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    walk_options(
        scenario,
        menus,
        slots,
        &shares,
        k,
        &available,
        0,
        &mut chosen,
        best,
        count,
    );
}

#[allow(clippy::too_many_arguments)]
fn walk_options(
    scenario: &Scenario,
    menus: &[&BidMenu],
    slots: &[Slot],
    shares: &[Decimal],
    k: usize,
    available: &[(usize, usize)],
    depth: usize,
    chosen: &mut Vec<(usize, usize)>,
    best: &mut Option<Decimal>,
    count: &mut usize,
) {
    if depth == available.len() {
        let objective = price_assignment(scenario, menus, slots, shares, k, chosen);
        *count += 1;
        match best {
            Some(b) if *b <= objective => {}
            _ => *best = Some(objective),
        }
        return;
    }
    walk_options(
        scenario,
        menus,
        slots,
        shares,
        k,
        available,
        depth + 1,
        chosen,
        best,
        count,
    );
    chosen.push(available[depth]);
    walk_options(
        scenario,
        menus,
        slots,
        shares,
        k,
        available,
        depth + 1,
        chosen,
        best,
        count,
    );
    chosen.pop();
}

fn oracle_shares(
    scenario: &Scenario,
    menus: &[&BidMenu],
    slots: &[Slot],
    _k: usize,
) -> Option<Vec<Decimal>> {
    use formulary_wdp::domain::ShareModel;
    match &scenario.share_model {
        ShareModel::Table(entries) => {
            let mut parts: Vec<String> = menus
                .iter()
                .zip(slots)
                .map(|(m, s)| {
                    let status = match s {
                        Slot::Pref => "PREFERRED",
                        Slot::T3 => "TIER3",
                        Slot::Out => "EXCLUDED",
                    };
                    format!("{}={status}", m.drug_id)
                })
                .collect();
            parts.sort();
            let entry = entries.get(&parts.join(","))?;
            Some(
                menus
                    .iter()
                    .map(|m| {
                        entry
                            .get(&m.drug_id)
                            .map(|r| r.as_decimal())
                            .unwrap_or(Decimal::ZERO)
                    })
                    .collect(),
            )
        }
        ShareModel::Proportional {
            weights,
            tier3_share,
        } => {
            let t3_count = slots.iter().filter(|s| **s == Slot::T3).count() as i128;
            let remainder_bp = 10_000i128 - tier3_share.basis_points() as i128 * t3_count;
            if remainder_bp <= 0 {
                return None;
            }
            let pref: Vec<usize> = (0..menus.len())
                .filter(|i| slots[*i] == Slot::Pref)
                .collect();
            let total_weight: i128 = pref
                .iter()
                .map(|i| weights[&menus[*i].drug_id].basis_points() as i128)
                .sum();
            if total_weight == 0 {
                return None;
            }
            // floor quotas, then hand out leftover basis points by largest
            // remainder, ties to the smaller drug id
            let mut quota: BTreeMap<usize, i128> = BTreeMap::new();
            let mut rema: Vec<(i128, &DrugId, usize)> = Vec::new();
            let mut floor_sum = 0i128;
            for i in &pref {
                let w = weights[&menus[*i].drug_id].basis_points() as i128;
                let num = remainder_bp * w;
                quota.insert(*i, num / total_weight);
                floor_sum += num / total_weight;
                rema.push((num % total_weight, &menus[*i].drug_id, *i));
            }
            rema.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
            let mut leftover = remainder_bp - floor_sum;
            for (_, _, i) in rema {
                if leftover == 0 {
                    break;
                }
                *quota.get_mut(&i).unwrap() += 1;
                leftover -= 1;
            }
            Some(
                (0..menus.len())
                    .map(|i| match slots[i] {
                        Slot::Pref => Decimal::new(quota[&i], 4),
                        Slot::T3 => tier3_share.as_decimal(),
                        Slot::Out => Decimal::ZERO,
                    })
                    .collect(),
            )
        }
    }
}

fn price_assignment(
    scenario: &Scenario,
    menus: &[&BidMenu],
    slots: &[Slot],
    shares: &[Decimal],
    k: usize,
    chosen: &[(usize, usize)],
) -> Decimal {
    let t = Decimal::from_u64(scenario.total_units);
    let mut cost = Decimal::ZERO;
    let mut rebates = Decimal::ZERO;
    for (i, (menu, slot)) in menus.iter().zip(slots).enumerate() {
        if *slot == Slot::Out {
            continue;
        }
        let base = match slot {
            Slot::Pref => menu.preferred_rates[&k].as_decimal(),
            Slot::T3 => menu.tier3_rate.unwrap().as_decimal(),
            Slot::Out => unreachable!(),
        };
        let mut rate = base;
        for (ci, cj) in chosen {
            if *ci == i {
                rate = rate.add(&menu.exclusionary_options[*cj].incremental_rate.as_decimal());
            }
        }
        if scenario.policy.count_admin_fee_in_cost {
            if let Some(fee) = menu.admin_fee {
                rate = rate.add(&fee.as_decimal());
            }
        }
        let volume_dollars = shares[i].mul(&t).mul(&menu.wac_per_unit.amount());
        cost = cost.add(&volume_dollars.mul(&Decimal::ONE.sub(&rate)));
        rebates = rebates.add(&volume_dollars.mul(&rate));
    }
    cost.sub(
        &scenario
            .objective
            .gross_rebate_weight
            .as_decimal()
            .mul(&rebates),
    )
}

// --- random scenario generation ----------------------------------------

fn bp_string(bp: i64) -> String {
    Decimal::new(bp as i128, 4).to_string()
}

/// A random valid scenario with `n` drugs. Proportional share model;
/// menus carry random subsets of 1-of-k bids, optional tier-3 rates,
/// admin fees, and cross-manufacturer exclusionary options.
pub fn random_scenario(rng: &mut StdRng, n: usize) -> Scenario {
    let ids: Vec<String> = (0..n).map(|i| format!("drug-{i}")).collect();
    let mut drugs = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let mut preferred_bids = Vec::new();
        for k in 1..=n {
            if rng.random_bool(0.6) {
                preferred_bids.push((k, random_rate(rng)));
            }
        }
        if preferred_bids.is_empty() {
            preferred_bids.push((rng.random_range(1..=n), random_rate(rng)));
        }
        let mut exclusionary = Vec::new();
        if n > 1 && rng.random_bool(0.4) {
            let n_opts = rng.random_range(1..=2);
            for _ in 0..n_opts {
                let mut excludes = Vec::new();
                for other in ids.iter().filter(|o| *o != id) {
                    if excludes.is_empty() || rng.random_bool(0.3) {
                        excludes.push(other.clone());
                    }
                }
                exclusionary.push(RawExclusionaryOption {
                    excludes,
                    incremental_rate: random_rate_below(rng, 3000),
                });
            }
        }
        drugs.push(RawMenu {
            id: id.clone(),
            manufacturer: format!("mfr-{i}"),
            wac_per_unit: Some(Decimal::new(rng.random_range(100..=10_000_000) as i128, 4)),
            preferred_bids,
            tier3_bid: rng.random_bool(0.5).then(|| random_rate_below(rng, 4000)),
            admin_fee: rng.random_bool(0.3).then(|| random_rate_below(rng, 600)),
            price_protection: None,
            exclusionary,
        });
    }

    // keep tier-3 slices small enough that preferred drugs always retain share
    let max_t3 = (n - 1).max(1) as i64;
    let tier3_share_bp = rng.random_range(0..(10_000 / max_t3).min(2000));
    let weights = ids
        .iter()
        .map(|id| {
            (
                id.clone(),
                Decimal::new(rng.random_range(1..=10_000) as i128, 4),
            )
        })
        .collect();

    let raw = RawScenario {
        class_name: format!("random-{n}"),
        total_units: rng.random_range(1_000..=10_000_000),
        bid_down_limit: None,
        tier3_share: None,
        count_admin_fee_in_cost: Some(rng.random_bool(0.3)),
        gross_rebate_weight: rng
            .random_bool(0.3)
            .then(|| Decimal::new(rng.random_range(0..=10_000) as i128, 4)),
        share_model: Some(RawShareModel::Proportional {
            weights,
            tier3_share: Some(Decimal::new(tier3_share_bp as i128, 4)),
        }),
        drugs,
    };
    match validate_scenario(raw) {
        Ok(s) => s,
        Err(errors) => panic!("generator produced an invalid scenario: {errors:?}"),
    }
}

fn random_rate(rng: &mut StdRng) -> Decimal {
    Decimal::new(rng.random_range(0..=10_000) as i128, 4)
}

fn random_rate_below(rng: &mut StdRng, cap_bp: i64) -> Decimal {
    Decimal::new(rng.random_range(0..=cap_bp) as i128, 4)
}
