//! Expected demand shares for one assignment under a share model.

use std::collections::BTreeMap;

use crate::domain::rate::Rate;
use crate::domain::scenario::{Assignment, Position, ShareModel};
use crate::domain::DrugId;
use crate::engine::EngineError;

const BP: i128 = 10_000;

/// Shares per drug; exactly 0 for excluded drugs, summing to exactly 1
/// over the rest.
///
/// Table models are an exact lookup by [`Assignment::share_key`].
/// Proportional models give each Tier-3 drug the model's `tier3_share` and
/// split the remainder across preferred drugs in proportion to their
/// weights, quantized to basis points by largest remainder so the total is
/// exact.
pub fn shares_for(
    assignment: &Assignment,
    share_model: &ShareModel,
) -> Result<BTreeMap<DrugId, Rate>, EngineError> {
    match share_model {
        ShareModel::Table(entries) => {
            let key = assignment.share_key();
            let entry = entries
                .get(&key)
                .ok_or(EngineError::ShareKeyMissing { key })?;
            Ok(assignment
                .positions()
                .keys()
                .map(|d| (d.clone(), entry.get(d).copied().unwrap_or(Rate::ZERO)))
                .collect())
        }
        ShareModel::Proportional {
            weights,
            tier3_share,
        } => proportional_shares(assignment, weights, *tier3_share),
    }
}

fn proportional_shares(
    assignment: &Assignment,
    weights: &BTreeMap<DrugId, Rate>,
    tier3_share: Rate,
) -> Result<BTreeMap<DrugId, Rate>, EngineError> {
    let tier3_count = assignment.tier3_count() as i128;
    let remainder_bp = BP - tier3_share.basis_points() as i128 * tier3_count;
    if remainder_bp <= 0 {
        return Err(EngineError::Tier3ShareExhausted {
            key: assignment.share_key(),
        });
    }

    let mut shares: BTreeMap<DrugId, Rate> = BTreeMap::new();
    let mut preferred: Vec<(&DrugId, i128)> = Vec::new();
    for (drug, position) in assignment.positions() {
        match position {
            Position::Excluded => {
                shares.insert(drug.clone(), Rate::ZERO);
            }
            Position::Tier3 => {
                shares.insert(drug.clone(), tier3_share);
            }
            Position::Preferred => {
                let weight = weights
                    .get(drug)
                    .ok_or_else(|| EngineError::MissingWeight { drug: drug.clone() })?;
                preferred.push((drug, weight.basis_points() as i128));
            }
        }
    }

    let weight_sum: i128 = preferred.iter().map(|(_, w)| w).sum();
    if weight_sum == 0 {
        return Err(EngineError::WeightsDegenerate);
    }

    // Integer largest-remainder allocation of remainder_bp basis points.
    let mut quotas: Vec<(&DrugId, i128, i128)> = preferred
        .iter()
        .map(|(drug, w)| {
            let numerator = remainder_bp * w;
            (*drug, numerator / weight_sum, numerator % weight_sum)
        })
        .collect();
    let assigned: i128 = quotas.iter().map(|(_, q, _)| q).sum();
    let mut leftover = remainder_bp - assigned;
    quotas.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(b.0)));
    for quota in quotas.iter_mut() {
        if leftover == 0 {
            break;
        }
        quota.1 += 1;
        leftover -= 1;
    }
    for (drug, bp, _) in quotas {
        shares.insert(
            drug.clone(),
            Rate::from_basis_points(bp as i64).expect("quota within [0, 1]"),
        );
    }
    Ok(shares)
}
