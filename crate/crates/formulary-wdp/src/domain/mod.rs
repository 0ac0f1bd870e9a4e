//! Domain types shared by every module: exact rates and money, bid menus,
//! scenarios, assignments, and scenario validation.
//!
//! Everything here is an immutable value object once validated; nothing
//! holds interior mutability, so all types are safe to share across threads.

pub mod menu;
pub mod money;
pub mod rate;
pub mod scenario;
pub mod validate;

use std::fmt;

pub use menu::{
    effective_rebate_rate, BidMenu, DomainError, EffectiveRate, ExclusionaryOption,
    FormularyStatus, PriceProtection,
};
pub use money::{net_unit_price, rebate_dollars, Money, MoneyError};
pub use rate::{parse_rate_arg, Rate, RateError};
pub use scenario::{
    Assignment, AssignmentError, ObjectiveConfig, Policy, Position, Scenario, ShareModel,
};
pub use validate::{
    validate_scenario, RawExclusionaryOption, RawMenu, RawPriceProtection, RawScenario,
    RawShareModel, ValidationError,
};

/// Identifier of one drug within a scenario.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DrugId(String);

impl DrugId {
    pub fn new(id: impl Into<String>) -> DrugId {
        DrugId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DrugId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identifier of a manufacturer; exclusionary options may only name drugs
/// of other manufacturers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ManufacturerId(String);

impl ManufacturerId {
    pub fn new(id: impl Into<String>) -> ManufacturerId {
        ManufacturerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ManufacturerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
