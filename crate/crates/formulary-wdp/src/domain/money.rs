//! Dollar amounts and the unit-price arithmetic shared by every module.

use std::fmt;
use std::str::FromStr;

use crate::decimal::Decimal;
use crate::domain::rate::Rate;

/// An exact dollar amount. Whether it is per-unit (a WAC, a net unit price)
/// or a total is a matter of role; the two are never added together.
/// Negative amounts occur only as net unit prices under supra-unit stacked
/// rebates, which callers flag with a warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Money(Decimal);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoneyError {
    #[error("money literal {0:?} is not a decimal number")]
    Invalid(String),
    #[error("money amount {0} is finer than 4 decimal places")]
    TooPrecise(String),
}

impl Money {
    pub const ZERO: Money = Money(Decimal::ZERO);

    pub fn from_decimal(d: Decimal) -> Money {
        Money(d)
    }

    pub fn amount(&self) -> Decimal {
        self.0
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn add(&self, rhs: &Money) -> Money {
        Money(self.0.add(&rhs.0))
    }

    pub fn sub(&self, rhs: &Money) -> Money {
        Money(self.0.sub(&rhs.0))
    }

    /// Canonical rendering: minimal exact decimal (`42.5`, `57500000`).
    pub fn to_canonical_string(&self) -> String {
        self.0.to_canonical_string()
    }
}

impl FromStr for Money {
    type Err = MoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let d: Decimal = s.parse().map_err(|_| MoneyError::Invalid(s.to_string()))?;
        if d.round_dp(4) != d {
            return Err(MoneyError::TooPrecise(s.to_string()));
        }
        Ok(Money(d))
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

/// Per-unit cost to the sponsor after rebates: `wac * (1 - effective_rate)`.
/// Negative when the effective rate exceeds 1; callers emit a warning.
pub fn net_unit_price(wac: &Money, effective_rate: &Decimal) -> Money {
    let multiplier = Decimal::ONE.sub(effective_rate);
    Money(wac.amount().mul(&multiplier))
}

/// Gross rebate dollars on a slice of the market:
/// `share * total_units * wac * rate`.
pub fn rebate_dollars(share: Rate, total_units: u64, wac: &Money, rate: &Decimal) -> Money {
    let volume = share.as_decimal().mul(&Decimal::from_u64(total_units));
    Money(volume.mul(&wac.amount()).mul(rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn money(s: &str) -> Money {
        s.parse().unwrap()
    }

    fn dec(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn net_unit_price_examples() {
        // wac 100, rate 0.575 -> 42.50
        let p = net_unit_price(&money("100"), &dec("0.575"));
        assert_eq!(p, money("42.50"));
        // zero rebate is the identity
        assert_eq!(net_unit_price(&money("100"), &Decimal::ZERO), money("100"));
        // supra-unit rate goes negative
        let p = net_unit_price(&money("100"), &dec("1.10"));
        assert_eq!(p, money("-10"));
        assert!(p.is_negative());
    }

    #[test]
    fn net_price_plus_rebate_recovers_wac() {
        let wac = money("100");
        for r in ["0", "0.18", "0.575", "1"] {
            let rate = dec(r);
            let net = net_unit_price(&wac, &rate);
            let rebate = wac.amount().mul(&rate);
            assert_eq!(net.amount().add(&rebate), wac.amount());
        }
    }

    #[test]
    fn rebate_dollars_examples() {
        let one: Rate = "1".parse().unwrap();
        let r = rebate_dollars(one, 1_000_000, &money("100"), &dec("0.575"));
        assert_eq!(r, money("57500000"));

        let zero_share = rebate_dollars(Rate::ZERO, 1_000_000, &money("100"), &dec("0.575"));
        assert_eq!(zero_share, Money::ZERO);

        // share 0.1527 of a 900M gross market at 70% off
        let share: Rate = "0.1527".parse().unwrap();
        let r = rebate_dollars(share, 9_000_000, &money("100"), &dec("0.70"));
        assert_eq!(r, money("96201000"));
    }

    #[test]
    fn money_parse_rejects_fine_fractions() {
        assert!(matches!(
            Money::from_str("1.00001"),
            Err(MoneyError::TooPrecise(_))
        ));
        assert!(Money::from_str("abc").is_err());
    }
}
