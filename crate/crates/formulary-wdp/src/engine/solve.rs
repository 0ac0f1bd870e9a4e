//! Assignment evaluation, ranking, and the switching analysis.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::decimal::Decimal;
use crate::domain::menu::effective_rebate_rate;
use crate::domain::money::{rebate_dollars, Money};
use crate::domain::rate::Rate;
use crate::domain::scenario::{Assignment, Scenario};
use crate::domain::{DrugId, FormularyStatus};
use crate::engine::enumerate::enumerate_assignments;
use crate::engine::shares::shares_for;
use crate::engine::{EngineError, SolveOptions};

/// One drug's slice of an evaluated assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrugOutcome {
    pub status: FormularyStatus,
    pub share: Rate,
    /// Stacked rebate rate applied to this drug's volume; zero when excluded.
    pub effective_rate: Decimal,
    pub supra_unit: bool,
}

/// An assignment with its expected cost under the share model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentOutcome {
    pub assignment: Assignment,
    pub drugs: BTreeMap<DrugId, DrugOutcome>,
    pub sponsor_cost: Money,
    pub gross_rebate_total: Money,
    /// `sponsor_cost - gross_rebate_weight * gross_rebate_total`.
    pub objective_value: Money,
    pub warnings: Vec<String>,
}

impl AssignmentOutcome {
    pub fn shares(&self) -> BTreeMap<DrugId, Rate> {
        self.drugs
            .iter()
            .map(|(d, o)| (d.clone(), o.share))
            .collect()
    }
}

/// Expected sponsor cost and gross rebates of an assignment given its
/// shares: `cost = sum share * T * wac * (1 - rate)`,
/// `rebates = sum share * T * wac * rate`.
pub fn expected_sponsor_cost(
    scenario: &Scenario,
    assignment: &Assignment,
    shares: &BTreeMap<DrugId, Rate>,
) -> Result<(Money, Money), EngineError> {
    let outcome = evaluate_with_shares(scenario, assignment, shares)?;
    Ok((outcome.sponsor_cost, outcome.gross_rebate_total))
}

/// Evaluate one assignment end to end: shares, per-drug effective rates,
/// cost, rebates, objective.
pub fn evaluate_assignment(
    scenario: &Scenario,
    assignment: &Assignment,
) -> Result<AssignmentOutcome, EngineError> {
    let shares = shares_for(assignment, &scenario.share_model)?;
    evaluate_with_shares(scenario, assignment, &shares)
}

fn evaluate_with_shares(
    scenario: &Scenario,
    assignment: &Assignment,
    shares: &BTreeMap<DrugId, Rate>,
) -> Result<AssignmentOutcome, EngineError> {
    let mut drugs = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut sponsor_cost = Decimal::ZERO;
    let mut rebate_total = Decimal::ZERO;

    for menu in &scenario.menus {
        let drug = &menu.drug_id;
        let status = assignment
            .status_of(drug)
            .expect("assignment covers every scenario drug");
        let share = shares.get(drug).copied().unwrap_or(Rate::ZERO);

        let (effective, supra_unit) = if status == FormularyStatus::Excluded {
            (Decimal::ZERO, false)
        } else {
            let active = assignment.active_options_for(drug);
            let eff = effective_rebate_rate(
                menu,
                status,
                &active,
                scenario.policy.count_admin_fee_in_cost,
            )?;
            (eff.rate, eff.exceeds_unit)
        };
        if supra_unit {
            warnings.push(format!(
                "{drug}: stacked effective rebate rate {} exceeds 1; net unit price is negative",
                effective.format_dp(4)
            ));
        }

        let drug_rebates =
            rebate_dollars(share, scenario.total_units, &menu.wac_per_unit, &effective);
        let gross_volume = rebate_dollars(
            share,
            scenario.total_units,
            &menu.wac_per_unit,
            &Decimal::ONE,
        );
        sponsor_cost = sponsor_cost.add(&gross_volume.amount().sub(&drug_rebates.amount()));
        rebate_total = rebate_total.add(&drug_rebates.amount());

        drugs.insert(
            drug.clone(),
            DrugOutcome {
                status,
                share,
                effective_rate: effective,
                supra_unit,
            },
        );
    }

    let alpha = scenario.objective.gross_rebate_weight.as_decimal();
    let objective = sponsor_cost.sub(&alpha.mul(&rebate_total));

    Ok(AssignmentOutcome {
        assignment: assignment.clone(),
        drugs,
        sponsor_cost: Money::from_decimal(sponsor_cost),
        gross_rebate_total: Money::from_decimal(rebate_total),
        objective_value: Money::from_decimal(objective),
        warnings,
    })
}

/// Ranking order: lowest objective first; ties break toward more preferred
/// drugs, then the lexicographically smallest preferred id list, then fewer
/// accepted exclusionary options, then the canonical key. The final step
/// makes the order total, so ranking is deterministic however the
/// enumeration was produced.
pub fn outcome_order(a: &AssignmentOutcome, b: &AssignmentOutcome) -> Ordering {
    a.objective_value
        .cmp(&b.objective_value)
        .then_with(|| {
            b.assignment
                .preferred_count()
                .cmp(&a.assignment.preferred_count())
        })
        .then_with(|| {
            a.assignment
                .preferred_drugs()
                .cmp(&b.assignment.preferred_drugs())
        })
        .then_with(|| {
            a.assignment
                .active_options()
                .len()
                .cmp(&b.assignment.active_options().len())
        })
        .then_with(|| {
            a.assignment
                .canonical_key()
                .cmp(&b.assignment.canonical_key())
        })
}

/// Per-drug movement between the winner and one alternative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrugDelta {
    pub drug_id: DrugId,
    /// Winner share minus alternative share.
    pub share_delta: Decimal,
    /// Winner effective rate minus alternative effective rate.
    pub rate_delta: Decimal,
}

/// Incremental economics of switching from one alternative to the winner.
/// Money deltas are winner minus alternative, so a negative cost delta
/// means the winner is cheaper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchingDelta {
    pub assignment_key: String,
    pub sponsor_cost_delta: Money,
    pub gross_rebate_delta: Money,
    pub drug_deltas: Vec<DrugDelta>,
}

pub fn switching_delta(
    winner: &AssignmentOutcome,
    alternative: &AssignmentOutcome,
) -> SwitchingDelta {
    let drug_deltas = winner
        .drugs
        .iter()
        .map(|(drug, w)| {
            let a = &alternative.drugs[drug];
            DrugDelta {
                drug_id: drug.clone(),
                share_delta: w.share.as_decimal().sub(&a.share.as_decimal()),
                rate_delta: w.effective_rate.sub(&a.effective_rate),
            }
        })
        .collect();
    SwitchingDelta {
        assignment_key: alternative.assignment.canonical_key(),
        sponsor_cost_delta: winner.sponsor_cost.sub(&alternative.sponsor_cost),
        gross_rebate_delta: winner
            .gross_rebate_total
            .sub(&alternative.gross_rebate_total),
        drug_deltas,
    }
}

/// The full solve: cost-minimizing assignment, every outcome ranked, and
/// the switching analysis against each non-winning assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub winner: AssignmentOutcome,
    pub ranked: Vec<AssignmentOutcome>,
    pub switching: Vec<SwitchingDelta>,
}

pub fn solve(scenario: &Scenario, options: &SolveOptions) -> Result<SolveReport, EngineError> {
    let assignments = enumerate_assignments(scenario, options)?;
    let mut ranked = assignments
        .iter()
        .map(|a| evaluate_assignment(scenario, a))
        .collect::<Result<Vec<_>, _>>()?;
    ranked.sort_by(outcome_order);
    let winner = ranked[0].clone();
    let switching = ranked[1..]
        .iter()
        .map(|alt| switching_delta(&winner, alt))
        .collect();
    Ok(SolveReport {
        winner,
        ranked,
        switching,
    })
}

/// Convenience view of the switching analysis of an existing report.
pub fn switching_analysis(report: &SolveReport) -> &[SwitchingDelta] {
    &report.switching
}
