//! Bid menus: one drug's rate schedule by formulary status.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::decimal::Decimal;
use crate::domain::money::Money;
use crate::domain::rate::Rate;
use crate::domain::{DrugId, ManufacturerId};

/// A drug's realized coverage status. `Preferred(1)` is an exclusive
/// position; `Preferred(k)` for k >= 2 is a shared 1-of-k position.
/// Excluded drugs carry zero share by definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FormularyStatus {
    Preferred(usize),
    Tier3,
    Excluded,
}

impl fmt::Display for FormularyStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormularyStatus::Preferred(1) => write!(f, "EXCLUSIVE"),
            FormularyStatus::Preferred(k) => write!(f, "PREFERRED_1_OF_{k}"),
            FormularyStatus::Tier3 => write!(f, "TIER3"),
            FormularyStatus::Excluded => write!(f, "EXCLUDED"),
        }
    }
}

/// Incremental rebate offered for the outright exclusion of named
/// competing drugs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionaryOption {
    pub excludes: BTreeSet<DrugId>,
    pub incremental_rate: Rate,
}

/// Price protection terms are stored and echoed in reports, never priced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceProtection {
    pub factor: Rate,
    pub baseline_wac_date: String,
}

/// One drug's full rate schedule. `preferred_rates` is keyed by k, the
/// number of drugs sharing the preferred position; k = 1 is exclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BidMenu {
    pub drug_id: DrugId,
    pub manufacturer_id: ManufacturerId,
    pub wac_per_unit: Money,
    pub preferred_rates: BTreeMap<usize, Rate>,
    pub tier3_rate: Option<Rate>,
    pub admin_fee: Option<Rate>,
    pub price_protection: Option<PriceProtection>,
    pub exclusionary_options: Vec<ExclusionaryOption>,
}

impl BidMenu {
    pub fn base_rate(&self, status: FormularyStatus) -> Option<Rate> {
        match status {
            FormularyStatus::Preferred(k) => self.preferred_rates.get(&k).copied(),
            FormularyStatus::Tier3 => self.tier3_rate,
            FormularyStatus::Excluded => None,
        }
    }

    pub fn exclusive_rate(&self) -> Option<Rate> {
        self.preferred_rates.get(&1).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("menu for {drug} offers no rate for status {status}")]
    MissingStatusRate { drug: DrugId, status: String },
    #[error("exclusionary option {index} does not exist on menu for {drug}")]
    NoSuchOption { drug: DrugId, index: usize },
    #[error("exclusionary options cannot stack on a {status} position for {drug}")]
    LdOnNonPreferred { drug: DrugId, status: String },
}

/// The stacked rate applied to a drug's volume: base rate for the realized
/// status, plus every active exclusionary increment, plus the admin fee when
/// policy counts it toward sponsor cost. The sum may exceed 1, in which case
/// `exceeds_unit` is set and the net unit price goes negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectiveRate {
    pub rate: Decimal,
    pub exceeds_unit: bool,
}

pub fn effective_rebate_rate(
    menu: &BidMenu,
    status: FormularyStatus,
    active_options: &[usize],
    count_admin_fee_in_cost: bool,
) -> Result<EffectiveRate, DomainError> {
    let base = menu
        .base_rate(status)
        .ok_or_else(|| DomainError::MissingStatusRate {
            drug: menu.drug_id.clone(),
            status: status.to_string(),
        })?;
    if !active_options.is_empty() && !matches!(status, FormularyStatus::Preferred(_)) {
        return Err(DomainError::LdOnNonPreferred {
            drug: menu.drug_id.clone(),
            status: status.to_string(),
        });
    }
    let mut rate = base.as_decimal();
    for &index in active_options {
        let option =
            menu.exclusionary_options
                .get(index)
                .ok_or_else(|| DomainError::NoSuchOption {
                    drug: menu.drug_id.clone(),
                    index,
                })?;
        rate = rate.add(&option.incremental_rate.as_decimal());
    }
    if count_admin_fee_in_cost {
        if let Some(fee) = menu.admin_fee {
            rate = rate.add(&fee.as_decimal());
        }
    }
    let exceeds_unit = rate > Decimal::ONE;
    Ok(EffectiveRate { rate, exceeds_unit })
}
