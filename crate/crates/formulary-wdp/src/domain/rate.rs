//! Rebate rates at basis-point resolution.

use std::fmt;
use std::str::FromStr;

use crate::decimal::Decimal;

const BP_PER_UNIT: i64 = 10_000;

/// A dimensionless rate in `[0, 1]`, stored as whole basis points.
///
/// All bid rates, shares, weights and policy knobs are `Rate`s; anything a
/// computation can push outside `[0, 1]` (stacked effective rebates, margins)
/// is carried as a plain [`Decimal`] instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate {
    basis_points: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RateError {
    #[error("rate {0} is outside [0, 1]")]
    OutOfRange(String),
    #[error("rate {0} is finer than basis-point (4 decimal) resolution")]
    TooPrecise(String),
    #[error("rate literal {0:?} is not a decimal number")]
    Invalid(String),
}

impl Rate {
    pub const ZERO: Rate = Rate { basis_points: 0 };
    pub const ONE: Rate = Rate {
        basis_points: BP_PER_UNIT,
    };

    pub fn from_basis_points(bp: i64) -> Result<Rate, RateError> {
        if !(0..=BP_PER_UNIT).contains(&bp) {
            return Err(RateError::OutOfRange(
                Decimal::new(bp as i128, 4).to_string(),
            ));
        }
        Ok(Rate { basis_points: bp })
    }

    /// Convert an exact decimal. Errors if it is out of range or carries
    /// more than four fractional digits.
    pub fn try_from_decimal(d: &Decimal) -> Result<Rate, RateError> {
        let at_bp = d.round_dp(4);
        if at_bp != *d {
            return Err(RateError::TooPrecise(d.to_string()));
        }
        let scaled = at_bp.mul(&Decimal::from_i64(BP_PER_UNIT));
        let bp = scaled.normalized();
        debug_assert_eq!(bp.scale(), 0);
        let bp = bp.mantissa();
        if !(0..=BP_PER_UNIT as i128).contains(&bp) {
            return Err(RateError::OutOfRange(d.to_string()));
        }
        Ok(Rate {
            basis_points: bp as i64,
        })
    }

    pub fn basis_points(&self) -> i64 {
        self.basis_points
    }

    pub fn as_decimal(&self) -> Decimal {
        Decimal::new(self.basis_points as i128, 4)
    }

    /// `1 - rate`; closed on `[0, 1]`.
    pub fn complement(&self) -> Rate {
        Rate {
            basis_points: BP_PER_UNIT - self.basis_points,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.basis_points == 0
    }
}

impl FromStr for Rate {
    type Err = RateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let d: Decimal = s.parse().map_err(|_| RateError::Invalid(s.to_string()))?;
        Rate::try_from_decimal(&d)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_decimal().format_dp(4))
    }
}

/// Parse a rate given either as a fraction (`0.575`) or a percentage
/// (`57.5%`). Used by the CLI; scenario files take fractions only.
pub fn parse_rate_arg(s: &str) -> Result<Rate, RateError> {
    match s.strip_suffix('%') {
        Some(pct) => {
            let d: Decimal = pct
                .trim()
                .parse()
                .map_err(|_| RateError::Invalid(s.to_string()))?;
            let fraction = d.div_to_scale(&Decimal::new(100, 0), 6);
            if fraction.round_dp(4) != fraction {
                return Err(RateError::TooPrecise(s.to_string()));
            }
            Rate::try_from_decimal(&fraction.round_dp(4))
        }
        None => s.parse(),
    }
}
