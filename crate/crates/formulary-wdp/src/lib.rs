//! A combinatorial auction engine for pharmacy formulary positions.
//!
//! Pharma manufacturers bid menus of %-off-WAC rebate rates for exclusive
//! and shared formulary positions, optionally with incremental rebates for
//! outright exclusion of named competitors. The PBM's winner determination
//! problem is to pick the assignment minimizing expected total benefit
//! cost: net unit prices weighted by expected demand. This crate solves
//! that problem exactly for desk-scale therapeutic classes and screens bid
//! menus for the anticompetitive patterns a well-designed auction should
//! reject: excessive incumbent bid-downs, underpriced exclusionary
//! options, and non-linear (lump-sum, bundled, market-share) bid bases.
//!
//! Modules:
//! - [`decimal`]: exact fixed-point arithmetic; no floats anywhere.
//! - [`domain`]: rates, money, bid menus, scenarios, assignments, validation.
//! - [`engine`]: exhaustive enumeration and cost-minimizing assignment.
//! - [`duopoly`]: closed forms for the two-bidder model (equalizing share,
//!   bid-down limits, exclusionary-rebate minimum).
//! - [`compliance`]: the screening rules and the bundled-rebate
//!   counterfactual.
//! - [`financials`]: gross-to-net margin translation and bid-down limit
//!   derivation from public margins.
//! - [`io`]: file schemas and deterministic report emission.

pub mod compliance;
pub mod decimal;
pub mod domain;
pub mod duopoly;
pub mod engine;
pub mod financials;
pub mod io;

pub use decimal::Decimal;
pub use domain::{Money, Rate, Scenario};
pub use engine::{solve, SolveOptions, SolveReport};
