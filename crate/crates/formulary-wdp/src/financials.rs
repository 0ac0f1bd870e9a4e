//! Gross-to-net margin translation and the derivation of an incumbent
//! bid-down limit from a manufacturer's published margin structure.
//!
//! Rebate bids are a % off gross (list) prices, while manufacturers report
//! margins on a net-of-rebate basis. Multiplying a net-basis margin line by
//! `1 - gtn_rebate_rate` restates it as a share of gross sales.

use crate::decimal::Decimal;
use crate::domain::rate::Rate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Net,
    Gross,
}

impl Basis {
    pub fn label(&self) -> &'static str {
        match self {
            Basis::Net => "net",
            Basis::Gross => "gross",
        }
    }
}

/// A two-line contribution view of a manufacturer income statement.
/// `cost_of_sales` and `marketing` are shares of sales on `basis`;
/// contribution margin and max unit rebate derive from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginStatement {
    pub basis: Basis,
    pub gtn_rebate_rate: Rate,
    pub cost_of_sales: Rate,
    pub marketing: Rate,
}

impl MarginStatement {
    /// Sales on this basis: 1 on net, `1 - gtn` on gross.
    pub fn sales_share(&self) -> Decimal {
        match self.basis {
            Basis::Net => Decimal::ONE,
            Basis::Gross => Decimal::ONE.sub(&self.gtn_rebate_rate.as_decimal()),
        }
    }

    /// Sales minus cost of sales minus marketing, on this basis.
    pub fn contribution_margin(&self) -> Decimal {
        self.sales_share()
            .sub(&self.cost_of_sales.as_decimal())
            .sub(&self.marketing.as_decimal())
    }

    /// The statement identity `1 - contribution_margin` on this basis.
    pub fn max_unit_rebate(&self) -> Decimal {
        Decimal::ONE.sub(&self.contribution_margin())
    }
}

/// Restate one net-basis margin line as a share of gross sales, at
/// basis-point resolution: `margin_net * (1 - gtn)`.
pub fn to_gross_basis(margin_net: Rate, gtn_rebate_rate: Rate) -> Rate {
    let gross = margin_net
        .as_decimal()
        .mul(&gtn_rebate_rate.complement().as_decimal())
        .round_dp(4);
    Rate::try_from_decimal(&gross).expect("product of [0,1] rates stays in [0,1]")
}

/// Convert a whole net-basis statement to gross basis, line by line.
pub fn margin_statement_gross(statement: &MarginStatement) -> MarginStatement {
    match statement.basis {
        Basis::Gross => statement.clone(),
        Basis::Net => MarginStatement {
            basis: Basis::Gross,
            gtn_rebate_rate: statement.gtn_rebate_rate,
            cost_of_sales: to_gross_basis(statement.cost_of_sales, statement.gtn_rebate_rate),
            marketing: to_gross_basis(statement.marketing, statement.gtn_rebate_rate),
        },
    }
}

/// Fractions of the gross cost-of-sales and marketing margins attributed to
/// the diseconomies of sharing a formulary position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiseconomyFractions {
    pub production_fraction: Rate,
    pub marketing_fraction: Rate,
}

/// Named calibrations of the diseconomy split. On the reference margins
/// shipped in `fixtures/margins/novo_2023.json`, `Table` lands on a
/// 3% + 7% component split and `Text` on 2% + 8%; both total a 10%
/// bid-down limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiseconomyPreset {
    Table,
    Text,
}

impl DiseconomyPreset {
    pub fn fractions(&self) -> DiseconomyFractions {
        let rate = |bp| Rate::from_basis_points(bp).unwrap();
        match self {
            DiseconomyPreset::Table => DiseconomyFractions {
                production_fraction: rate(2962),
                marketing_fraction: rate(4359),
            },
            DiseconomyPreset::Text => DiseconomyFractions {
                production_fraction: rate(1974),
                marketing_fraction: rate(4981),
            },
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DiseconomyPreset::Table => "table",
            DiseconomyPreset::Text => "text",
        }
    }
}

/// Estimated margin loss from moving an exclusive position to a shared one,
/// broken into production and marketing components. The total is the
/// derived incumbent bid-down limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiseconomyEstimate {
    pub production_loss: Rate,
    pub marketing_loss: Rate,
    pub bid_down_limit: Rate,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FinancialsError {
    #[error("bid-down derivation needs a gross-basis statement, got {0}")]
    WrongBasis(&'static str),
    #[error("derived bid-down limit {limit} exceeds the gross max unit rebate {max}")]
    ExceedsMaxRebate { limit: String, max: String },
}

/// Apply diseconomy fractions to a gross-basis statement. Components round
/// to basis points; the limit is their exact sum.
pub fn derive_bid_down_limit(
    statement: &MarginStatement,
    fractions: &DiseconomyFractions,
) -> Result<DiseconomyEstimate, FinancialsError> {
    if statement.basis != Basis::Gross {
        return Err(FinancialsError::WrongBasis(statement.basis.label()));
    }
    let component = |fraction: Rate, margin: Rate| -> Rate {
        let loss = fraction.as_decimal().mul(&margin.as_decimal()).round_dp(4);
        Rate::try_from_decimal(&loss).expect("product of [0,1] rates stays in [0,1]")
    };
    let production_loss = component(fractions.production_fraction, statement.cost_of_sales);
    let marketing_loss = component(fractions.marketing_fraction, statement.marketing);
    let total = production_loss
        .as_decimal()
        .add(&marketing_loss.as_decimal());
    if total > statement.max_unit_rebate() {
        return Err(FinancialsError::ExceedsMaxRebate {
            limit: total.format_dp(4),
            max: statement.max_unit_rebate().format_dp(4),
        });
    }
    let bid_down_limit =
        Rate::try_from_decimal(&total).expect("sum below max unit rebate stays in [0,1]");
    Ok(DiseconomyEstimate {
        production_loss,
        marketing_loss,
        bid_down_limit,
    })
}
