//! Closed-form two-bidder analysis: exclusive-vs-shared favorability, the
//! equalizing market share (unrestricted and bid-down-limited), and the
//! floor on incremental exclusionary rebate bids.
//!
//! The setting is one incumbent holding an exclusive bid, one entrant
//! bidding only for a shared position. The sponsor cost of the exclusive
//! assignment beats the shared assignment exactly when
//! `incumbent_exclusive > incumbent_shared + x * (entrant_shared - incumbent_shared)`
//! where `x` is the entrant's expected shared-position market share.

use crate::decimal::Decimal;
use crate::domain::rate::Rate;

/// Extra precision used for the equalizing-share quotient. Twelve digits is
/// fine enough that comparing a basis-point `x` against the rounded quotient
/// agrees exactly with the sign of the favorability margin.
const SHARE_QUOTIENT_SCALE: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    Exclusive,
    Shared,
}

impl Preference {
    pub fn label(&self) -> &'static str {
        match self {
            Preference::Exclusive => "exclusive",
            Preference::Shared => "shared",
        }
    }
}

/// The two bids plus the entrant's expected shared market share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuopolyBids {
    /// Incumbent's bid for the exclusive position.
    pub incumbent_exclusive: Rate,
    /// Incumbent's (possibly bid-down) rate for a shared position.
    pub incumbent_shared: Rate,
    /// Entrant's rate for a shared position.
    pub entrant_shared: Rate,
    /// Entrant's expected market share in the shared assignment.
    pub entrant_share: Rate,
}

/// Which assignment minimizes expected sponsor cost, and by what margin
/// (in rate units on the full market). A margin of exactly zero resolves
/// to `Shared`, matching the engine's procompetitive tie-break.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Favorability {
    pub preference: Preference,
    pub margin: Decimal,
}

pub fn favors_exclusive(bids: &DuopolyBids) -> Favorability {
    favorability_at(
        &bids.incumbent_exclusive.as_decimal(),
        &bids.incumbent_shared.as_decimal(),
        &bids.entrant_shared.as_decimal(),
        &bids.entrant_share.as_decimal(),
    )
}

/// Decimal-level form of [`favors_exclusive`], for derived shared bids
/// (for example a bid-down floor) that are finer than a basis point.
pub fn favorability_at(
    incumbent_exclusive: &Decimal,
    incumbent_shared: &Decimal,
    entrant_shared: &Decimal,
    entrant_share: &Decimal,
) -> Favorability {
    let blended = incumbent_shared.add(&entrant_share.mul(&entrant_shared.sub(incumbent_shared)));
    let margin = incumbent_exclusive.sub(&blended);
    let preference = if margin > Decimal::ZERO {
        Preference::Exclusive
    } else {
        Preference::Shared
    };
    Favorability { preference, margin }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DuopolyError {
    #[error("degenerate bids: denominator {0} is not positive, no equalizing share exists")]
    DegenerateBids(String),
    #[error("favorability curve needs at least 2 grid points, got {0}")]
    GridTooSmall(usize),
}

/// Annotation attached when the equalizing share falls outside [0, 1]:
/// one assignment then dominates at every feasible share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    SharedAtAllShares,
    ExclusiveAtAllShares,
}

/// The entrant share at which exclusive and shared assignments cost the
/// same. `value` carries twelve decimal places; display rounds to four.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualizingShare {
    pub value: Decimal,
    pub dominance: Option<Dominance>,
}

impl EqualizingShare {
    fn from_ratio(numerator: &Decimal, denominator: &Decimal) -> EqualizingShare {
        let value = numerator.div_to_scale(denominator, SHARE_QUOTIENT_SCALE);
        let dominance = if value < Decimal::ZERO {
            Some(Dominance::SharedAtAllShares)
        } else if value > Decimal::ONE {
            Some(Dominance::ExclusiveAtAllShares)
        } else {
            None
        };
        EqualizingShare { value, dominance }
    }
}

/// `x* = (b_exclusive - b_incumbent_shared) / (b_entrant_shared - b_incumbent_shared)`.
/// Inputs are exact decimals so that derived bids (for example a bid-down
/// floor `0.9 * b1`, which is finer than a basis point) pass through exactly.
pub fn equalizing_share(
    incumbent_exclusive: &Decimal,
    incumbent_shared: &Decimal,
    entrant_shared: &Decimal,
) -> Result<EqualizingShare, DuopolyError> {
    let denominator = entrant_shared.sub(incumbent_shared);
    if denominator <= Decimal::ZERO {
        return Err(DuopolyError::DegenerateBids(denominator.to_string()));
    }
    let numerator = incumbent_exclusive.sub(incumbent_shared);
    Ok(EqualizingShare::from_ratio(&numerator, &denominator))
}

/// Equalizing share when the incumbent's shared bid is pinned to the
/// bid-down limit: `x* = (delta * b1) / (b3 - (1 - delta) * b1)`.
pub fn equalizing_share_limited(
    incumbent_exclusive: &Decimal,
    entrant_shared: &Decimal,
    bid_down_limit: &Decimal,
) -> Result<EqualizingShare, DuopolyError> {
    let floored_shared = Decimal::ONE.sub(bid_down_limit).mul(incumbent_exclusive);
    let denominator = entrant_shared.sub(&floored_shared);
    if denominator <= Decimal::ZERO {
        return Err(DuopolyError::DegenerateBids(denominator.to_string()));
    }
    let numerator = bid_down_limit.mul(incumbent_exclusive);
    Ok(EqualizingShare::from_ratio(&numerator, &denominator))
}

/// Minimum acceptable incremental exclusionary rebate: the Tier-3 rebate
/// volume forgone when the named competitor is excluded outright,
/// `(1 - delta) * b1 * tier3_share`.
pub fn ld_minimum(
    incumbent_exclusive: &Decimal,
    bid_down_limit: &Decimal,
    tier3_share: &Decimal,
) -> Decimal {
    Decimal::ONE
        .sub(bid_down_limit)
        .mul(incumbent_exclusive)
        .mul(tier3_share)
}

/// One sampled point of the favorability curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvePoint {
    pub entrant_share: Decimal,
    pub preference: Preference,
    pub margin: Decimal,
}

/// The incumbent's shared bid for curve sampling: either an explicit
/// bid-down or the floor implied by a bid-down limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharedBidSpec {
    Explicit(Rate),
    LimitFloor(Rate),
}

/// Sample the favorability decision on an evenly spaced share grid over
/// [0, 1] (grid snapped to basis points). The margin's sign change brackets
/// the equalizing share.
pub fn favorability_curve(
    incumbent_exclusive: Rate,
    entrant_shared: Rate,
    shared_bid: SharedBidSpec,
    grid_points: usize,
) -> Result<Vec<CurvePoint>, DuopolyError> {
    if grid_points < 2 {
        return Err(DuopolyError::GridTooSmall(grid_points));
    }
    let incumbent_shared = match shared_bid {
        SharedBidSpec::Explicit(rate) => rate.as_decimal(),
        SharedBidSpec::LimitFloor(limit) => Decimal::ONE
            .sub(&limit.as_decimal())
            .mul(&incumbent_exclusive.as_decimal()),
    };
    let b1 = incumbent_exclusive.as_decimal();
    let b3 = entrant_shared.as_decimal();
    let last = Decimal::from_u64((grid_points - 1) as u64);
    let mut points = Vec::with_capacity(grid_points);
    for i in 0..grid_points {
        let x = Decimal::from_u64(i as u64).div_to_scale(&last, 4);
        let favorability = favorability_at(&b1, &incumbent_shared, &b3, &x);
        points.push(CurvePoint {
            entrant_share: x,
            preference: favorability.preference,
            margin: favorability.margin,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(s: &str) -> Rate {
        s.parse().unwrap()
    }

    fn dec(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn bids(b1: &str, b2: &str, b3: &str, x: &str) -> DuopolyBids {
        DuopolyBids {
            incumbent_exclusive: rate(b1),
            incumbent_shared: rate(b2),
            entrant_shared: rate(b3),
            entrant_share: rate(x),
        }
    }

    #[test]
    fn low_entrant_share_favors_exclusive() {
        let f = favors_exclusive(&bids("0.575", "0.18", "0.90", "0.30"));
        assert_eq!(f.preference, Preference::Exclusive);
        assert_eq!(f.margin, dec("0.179"));
        assert_eq!(f.margin.format_dp(4), "0.1790");
    }

    #[test]
    fn share_just_past_the_boundary_flips_to_shared() {
        let f = favors_exclusive(&bids("0.575", "0.18", "0.90", "0.549"));
        assert_eq!(f.preference, Preference::Shared);
        assert!(f.margin < Decimal::ZERO);
    }

    #[test]
    fn equal_bids_tie_to_shared() {
        let f = favors_exclusive(&bids("0.5", "0.5", "0.5", "0.25"));
        assert_eq!(f.preference, Preference::Shared);
        assert_eq!(f.margin, Decimal::ZERO);
    }

    #[test]
    fn equalizing_share_worked_value() {
        let x = equalizing_share(&dec("0.575"), &dec("0.18"), &dec("0.90")).unwrap();
        assert_eq!(x.value.format_dp(4), "0.5486");
        assert!(x.dominance.is_none());
    }

    #[test]
    fn equalizing_share_zero_numerator() {
        let x = equalizing_share(&dec("0.18"), &dec("0.18"), &dec("0.90")).unwrap();
        assert_eq!(x.value, Decimal::ZERO);
    }

    #[test]
    fn equalizing_share_degenerate() {
        let err = equalizing_share(&dec("0.575"), &dec("0.575"), &dec("0.575")).unwrap_err();
        assert!(matches!(err, DuopolyError::DegenerateBids(_)));
    }

    #[test]
    fn equalizing_share_dominance_note() {
        // Exclusive bid above the entrant's shared bid: exclusive wins at any
        // feasible share, the ratio exceeds 1.
        let x = equalizing_share(&dec("0.95"), &dec("0.18"), &dec("0.90")).unwrap();
        assert_eq!(x.dominance, Some(Dominance::ExclusiveAtAllShares));
        // Incumbent shared above its own exclusive bid: shared dominates.
        let x = equalizing_share(&dec("0.10"), &dec("0.18"), &dec("0.90")).unwrap();
        assert_eq!(x.dominance, Some(Dominance::SharedAtAllShares));
    }

    #[test]
    fn limited_variant_worked_value() {
        let x = equalizing_share_limited(&dec("0.575"), &dec("0.90"), &dec("0.10")).unwrap();
        // 0.0575 / 0.3825
        assert_eq!(x.value.format_dp(4), "0.1503");
    }

    #[test]
    fn limited_variant_zero_incumbent_bid() {
        let x = equalizing_share_limited(&dec("0"), &dec("0.5"), &dec("0.10")).unwrap();
        assert_eq!(x.value, Decimal::ZERO);
    }

    #[test]
    fn limited_variant_boundary_is_degenerate() {
        let err =
            equalizing_share_limited(&dec("0.575"), &dec("0.5175"), &dec("0.10")).unwrap_err();
        assert!(matches!(err, DuopolyError::DegenerateBids(_)));
    }

    #[test]
    fn ld_minimum_band() {
        assert_eq!(
            ld_minimum(&dec("0.50"), &dec("0.10"), &dec("0.10")),
            dec("0.045")
        );
        assert_eq!(
            ld_minimum(&dec("0.60"), &dec("0.10"), &dec("0.10")),
            dec("0.054")
        );
        assert_eq!(
            ld_minimum(&dec("0.77"), &dec("0.10"), &dec("0")),
            Decimal::ZERO
        );
    }

    #[test]
    fn curve_brackets_the_equalizing_share() {
        let points = favorability_curve(
            rate("0.575"),
            rate("0.90"),
            SharedBidSpec::Explicit(rate("0.18")),
            101,
        )
        .unwrap();
        assert_eq!(points.len(), 101);
        let at = |s: &str| points.iter().find(|p| p.entrant_share == dec(s)).unwrap();
        assert_eq!(at("0.54").preference, Preference::Exclusive);
        assert_eq!(at("0.55").preference, Preference::Shared);
    }

    #[test]
    fn curve_under_limit_floor() {
        let points = favorability_curve(
            rate("0.575"),
            rate("0.90"),
            SharedBidSpec::LimitFloor(rate("0.10")),
            101,
        )
        .unwrap();
        let at = |s: &str| points.iter().find(|p| p.entrant_share == dec(s)).unwrap();
        assert_eq!(at("0.15").preference, Preference::Exclusive);
        assert_eq!(at("0.16").preference, Preference::Shared);
    }

    #[test]
    fn flat_curve_when_bids_equal() {
        let points = favorability_curve(
            rate("0.5"),
            rate("0.5"),
            SharedBidSpec::Explicit(rate("0.5")),
            11,
        )
        .unwrap();
        assert!(points.iter().all(|p| p.preference == Preference::Shared));
        assert!(points.iter().all(|p| p.margin == Decimal::ZERO));
    }

    #[test]
    fn grid_too_small() {
        let err = favorability_curve(
            rate("0.5"),
            rate("0.6"),
            SharedBidSpec::Explicit(rate("0.4")),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, DuopolyError::GridTooSmall(1)));
    }
}
