//! Exact fixed-point decimal arithmetic on an i128 mantissa.
//!
//! Every quantity in this crate — rates, shares, unit prices, dollar totals —
//! is a finite decimal. Addition, subtraction and multiplication are exact;
//! division rounds to an explicit scale. Comparisons are value comparisons
//! across scales, never bit comparisons, and no binary floating point is
//! involved anywhere.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Most fractional digits an input literal may carry.
pub const MAX_INPUT_SCALE: u32 = 12;

/// Hard ceiling on the scale of any intermediate value. Products of validated
/// inputs stay well below this; hitting it means a caller bypassed validation.
const MAX_SCALE: u32 = 30;

/// An exact decimal: `mantissa * 10^-scale`.
#[derive(Debug, Clone, Copy)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecimalParseError {
    #[error("empty decimal literal")]
    Empty,
    #[error("invalid character in decimal literal {0:?}")]
    InvalidChar(String),
    #[error("too many fractional digits in {0:?} (max {MAX_INPUT_SCALE})")]
    TooPrecise(String),
    #[error("decimal literal {0:?} out of representable range")]
    Overflow(String),
}

fn pow10(exp: u32) -> i128 {
    10i128
        .checked_pow(exp)
        .unwrap_or_else(|| panic!("decimal overflow: 10^{exp}"))
}

impl Decimal {
    pub const ZERO: Decimal = Decimal {
        mantissa: 0,
        scale: 0,
    };
    pub const ONE: Decimal = Decimal {
        mantissa: 1,
        scale: 0,
    };

    pub fn new(mantissa: i128, scale: u32) -> Decimal {
        assert!(scale <= MAX_SCALE, "decimal scale {scale} exceeds maximum");
        Decimal { mantissa, scale }
    }

    pub fn from_u64(v: u64) -> Decimal {
        Decimal {
            mantissa: v as i128,
            scale: 0,
        }
    }

    pub fn from_i64(v: i64) -> Decimal {
        Decimal {
            mantissa: v as i128,
            scale: 0,
        }
    }

    pub fn mantissa(&self) -> i128 {
        self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < 0
    }

    /// Exact rescale to a larger scale.
    fn rescaled(&self, scale: u32) -> Decimal {
        assert!(scale >= self.scale, "rescaled() cannot reduce scale");
        let mantissa = self
            .mantissa
            .checked_mul(pow10(scale - self.scale))
            .expect("decimal overflow in rescale");
        Decimal { mantissa, scale }
    }

    /// Strip trailing fractional zeros; `2.500` becomes `2.5`.
    pub fn normalized(&self) -> Decimal {
        let mut m = self.mantissa;
        let mut s = self.scale;
        while s > 0 && m % 10 == 0 {
            m /= 10;
            s -= 1;
        }
        Decimal {
            mantissa: m,
            scale: s,
        }
    }

    pub fn checked_add(&self, rhs: &Decimal) -> Option<Decimal> {
        let scale = self.scale.max(rhs.scale);
        let a = self.mantissa.checked_mul(pow10(scale - self.scale))?;
        let b = rhs.mantissa.checked_mul(pow10(scale - rhs.scale))?;
        Some(Decimal {
            mantissa: a.checked_add(b)?,
            scale,
        })
    }

    pub fn add(&self, rhs: &Decimal) -> Decimal {
        self.checked_add(rhs).expect("decimal overflow in add")
    }

    pub fn sub(&self, rhs: &Decimal) -> Decimal {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Decimal {
        Decimal {
            mantissa: -self.mantissa,
            scale: self.scale,
        }
    }

    pub fn abs(&self) -> Decimal {
        Decimal {
            mantissa: self.mantissa.abs(),
            scale: self.scale,
        }
    }

    pub fn mul(&self, rhs: &Decimal) -> Decimal {
        let a = self.normalized();
        let b = rhs.normalized();
        let mantissa = a
            .mantissa
            .checked_mul(b.mantissa)
            .expect("decimal overflow in mul");
        let scale = a.scale + b.scale;
        assert!(scale <= MAX_SCALE, "decimal scale overflow in mul");
        Decimal { mantissa, scale }
    }

    /// Quotient rounded half-away-from-zero to `scale` fractional digits.
    /// Panics on a zero divisor; callers guard degenerate denominators.
    pub fn div_to_scale(&self, rhs: &Decimal, scale: u32) -> Decimal {
        assert!(!rhs.is_zero(), "decimal division by zero");
        // self/rhs * 10^scale = mantissa_a * 10^(scale + scale_b - scale_a) / mantissa_b
        let a = self.normalized();
        let b = rhs.normalized();
        let exp = scale as i64 + b.scale as i64 - a.scale as i64;
        let (mut num, mut den) = (a.mantissa, b.mantissa);
        if exp >= 0 {
            num = num
                .checked_mul(pow10(exp as u32))
                .expect("decimal overflow in div");
        } else {
            den = den
                .checked_mul(pow10((-exp) as u32))
                .expect("decimal overflow in div");
        }
        let q = num / den;
        let r = num % den;
        let round_up = 2 * r.abs() >= den.abs();
        let mantissa = if round_up {
            if (num < 0) != (den < 0) {
                q - 1
            } else {
                q + 1
            }
        } else {
            q
        };
        Decimal { mantissa, scale }
    }

    /// Round half-away-from-zero to `dp` fractional digits.
    pub fn round_dp(&self, dp: u32) -> Decimal {
        if self.scale <= dp {
            return *self;
        }
        let factor = pow10(self.scale - dp);
        let q = self.mantissa / factor;
        let r = self.mantissa % factor;
        let mantissa = if 2 * r.abs() >= factor {
            if self.mantissa < 0 {
                q - 1
            } else {
                q + 1
            }
        } else {
            q
        };
        Decimal {
            mantissa,
            scale: dp,
        }
    }

    /// Truncate toward zero to `dp` fractional digits.
    pub fn trunc_dp(&self, dp: u32) -> Decimal {
        if self.scale <= dp {
            return *self;
        }
        Decimal {
            mantissa: self.mantissa / pow10(self.scale - dp),
            scale: dp,
        }
    }

    /// Fixed-width rendering with exactly `dp` fractional digits,
    /// rounding half-away-from-zero if the value is finer.
    pub fn format_dp(&self, dp: u32) -> String {
        let d = self.round_dp(dp).rescaled_or_self(dp);
        d.render()
    }

    fn rescaled_or_self(&self, scale: u32) -> Decimal {
        if self.scale >= scale {
            *self
        } else {
            self.rescaled(scale)
        }
    }

    /// Canonical minimal rendering (trailing zeros stripped).
    pub fn to_canonical_string(&self) -> String {
        self.normalized().render()
    }

    fn render(&self) -> String {
        let neg = self.mantissa < 0;
        let digits = self.mantissa.unsigned_abs().to_string();
        let s = self.scale as usize;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        if s == 0 {
            out.push_str(&digits);
        } else if digits.len() > s {
            let split = digits.len() - s;
            out.push_str(&digits[..split]);
            out.push('.');
            out.push_str(&digits[split..]);
        } else {
            out.push_str("0.");
            for _ in 0..(s - digits.len()) {
                out.push('0');
            }
            out.push_str(&digits);
        }
        out
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Decimal {}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.normalized();
        let b = other.normalized();
        let scale = a.scale.max(b.scale);
        let am = a.rescaled(scale).mantissa;
        let bm = b.rescaled(scale).mantissa;
        am.cmp(&bm)
    }
}

impl FromStr for Decimal {
    type Err = DecimalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(DecimalParseError::Empty);
        }
        let (neg, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        if body.is_empty() {
            return Err(DecimalParseError::InvalidChar(s.to_string()));
        }
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty()
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(DecimalParseError::InvalidChar(s.to_string()));
        }
        if frac_part.len() as u32 > MAX_INPUT_SCALE {
            return Err(DecimalParseError::TooPrecise(s.to_string()));
        }
        let mut mantissa: i128 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add((b - b'0') as i128))
                .ok_or_else(|| DecimalParseError::Overflow(s.to_string()))?;
        }
        if neg {
            mantissa = -mantissa;
        }
        Ok(Decimal {
            mantissa,
            scale: frac_part.len() as u32,
        })
    }
}
