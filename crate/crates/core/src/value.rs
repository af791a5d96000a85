//! Exact arithmetic for costs.
//!
//! All cost accounting runs on `Ratio<i128>`; floats never touch a comparison
//! that decides whether a deviation is profitable. Disconnection is handled
//! lexicographically: a cost carries a count of unreachable peers that
//! dominates any finite sum, so "infinite" distances order correctly without
//! a sentinel magnitude.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used for every finite cost quantity.
pub type Rat = num_rational::Ratio<i128>;

/// Shorthand constructor. Panics if `den == 0`.
pub fn rat(num: i128, den: i128) -> Rat {
    Rat::new(num, den)
}

/// A player's cost, ordered lexicographically: any additional unreachable
/// peer outweighs every finite term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CostValue {
    /// Number of (node, peer) distance terms that are infinite.
    pub unreachable: u32,
    /// Sum of all finite terms (link upkeep plus weighted distances).
    pub finite: Rat,
}

impl CostValue {
    pub fn finite(finite: Rat) -> Self {
        CostValue {
            unreachable: 0,
            finite,
        }
    }

    pub fn zero() -> Self {
        Self::finite(Rat::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.unreachable == 0
    }
}

impl std::ops::Add for CostValue {
    type Output = CostValue;
    fn add(self, rhs: CostValue) -> CostValue {
        CostValue {
            unreachable: self.unreachable + rhs.unreachable,
            finite: self.finite + rhs.finite,
        }
    }
}

impl std::iter::Sum for CostValue {
    fn sum<I: Iterator<Item = CostValue>>(iter: I) -> CostValue {
        iter.fold(CostValue::zero(), |a, b| a + b)
    }
}

impl std::ops::Sub for CostValue {
    type Output = CostDelta;
    /// Change of cost, computed as `self - rhs` = (after) - (before).
    fn sub(self, rhs: CostValue) -> CostDelta {
        CostDelta {
            unreachable: i64::from(self.unreachable) - i64::from(rhs.unreachable),
            finite: self.finite - rhs.finite,
        }
    }
}

impl std::fmt::Display for CostValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.unreachable == 0 {
            write!(f, "{}", render_rational(self.finite))
        } else {
            write!(
                f,
                "{}+inf*{}",
                render_rational(self.finite),
                self.unreachable
            )
        }
    }
}

/// Difference of two [`CostValue`]s, always oriented after-minus-before.
///
/// A deviation is profitable for a player exactly when the player's delta is
/// negative; a delta of zero means the player sticks with the status quo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CostDelta {
    pub unreachable: i64,
    pub finite: Rat,
}

impl CostDelta {
    pub fn zero() -> Self {
        CostDelta {
            unreachable: 0,
            finite: Rat::zero(),
        }
    }

    pub fn finite(finite: Rat) -> Self {
        CostDelta {
            unreachable: 0,
            finite,
        }
    }

    /// Strictly negative delta: the mover ends up better off.
    pub fn is_improvement(&self) -> bool {
        *self < CostDelta::zero()
    }

    /// The delta an actor actually experiences once a monetary `amount` it
    /// pays on top is folded in: money lives on the finite axis.
    pub fn plus_money(self, amount: Rat) -> CostDelta {
        CostDelta {
            unreachable: self.unreachable,
            finite: self.finite + amount,
        }
    }

    /// Smallest monetary payment that makes a player weakly willing to accept
    /// the change. Zero when the change already helps (or is neutral);
    /// otherwise the finite loss.
    ///
    /// Only meaningful for link additions, which can never increase the
    /// unreachable count; pricing an unreachability increase has no finite
    /// answer and panics.
    pub fn compensation(&self) -> Rat {
        if *self <= CostDelta::zero() {
            Rat::zero()
        } else if self.unreachable == 0 {
            self.finite
        } else {
            panic!("no finite payment compensates a connectivity loss");
        }
    }
}

impl std::ops::Add for CostDelta {
    type Output = CostDelta;
    fn add(self, rhs: CostDelta) -> CostDelta {
        CostDelta {
            unreachable: self.unreachable + rhs.unreachable,
            finite: self.finite + rhs.finite,
        }
    }
}

impl std::iter::Sum for CostDelta {
    fn sum<I: Iterator<Item = CostDelta>>(iter: I) -> CostDelta {
        iter.fold(CostDelta::zero(), |a, b| a + b)
    }
}

impl std::fmt::Display for CostDelta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.unreachable == 0 {
            write!(f, "{}", render_rational(self.finite))
        } else {
            write!(
                f,
                "{}+inf*{}",
                render_rational(self.finite),
                self.unreachable
            )
        }
    }
}

/// Parse a rational from `"7"`, `"-3/4"` or `"2.25"`.
pub fn parse_rational(text: &str) -> Result<Rat> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    let bad = |why: &str| Error::Parse(format!("invalid rational {s:?}: {why}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num
            .trim()
            .parse()
            .map_err(|_| bad("numerator is not an integer"))?;
        let d: i128 = den
            .trim()
            .parse()
            .map_err(|_| bad("denominator is not an integer"))?;
        if d == 0 {
            return Err(bad("denominator is zero"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("fractional digits required after the point"));
        }
        let negative = int_part.starts_with('-');
        let whole: i128 = if int_part == "-" || int_part.is_empty() {
            0
        } else {
            int_part
                .parse()
                .map_err(|_| bad("integer part is not an integer"))?
        };
        let frac: i128 = frac_part
            .parse()
            .map_err(|_| bad("fractional part does not fit"))?;
        let scale = 10i128
            .checked_pow(frac_part.len() as u32)
            .ok_or_else(|| bad("too many fractional digits"))?;
        let magnitude = Rat::from_integer(whole.abs()) + Rat::new(frac, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: i128 = s.parse().map_err(|_| bad("not an integer"))?;
    Ok(Rat::from_integer(n))
}

/// Render a rational exactly: integers bare, everything else as `p/q`.
pub fn render_rational(value: Rat) -> String {
    if value.denom() == &1 {
        format!("{}", value.numer())
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Largest integer `k >= 0` with `k*k <= value`. Errors on negative input.
pub fn floor_sqrt(value: Rat) -> Result<i128> {
    if value.is_negative() {
        return Err(Error::InfeasibleParams(format!(
            "floor_sqrt of negative value {}",
            render_rational(value)
        )));
    }
    // floor(sqrt(r)) == isqrt(floor(r)): both squares are integers, so the
    // fractional part of r cannot push the root past the next integer.
    let floored = value.to_integer();
    Ok(floored.isqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integer_fraction_and_decimal_forms() {
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert_eq!(parse_rational("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("2.25").unwrap(), rat(9, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational(" 11/2 ").unwrap(), rat(11, 2));
    }

    #[test]
    fn leading_dot_parses_as_pure_fraction() {
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-.25").unwrap(), rat(-1, 4));
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", "x", "1/0", "1.2.3", "3.", "1/ /2", "2,5"] {
            assert!(parse_rational(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn renders_reduced_forms() {
        assert_eq!(render_rational(rat(4, 2)), "2");
        assert_eq!(render_rational(rat(-3, 6)), "-1/2");
        assert_eq!(render_rational(rat(0, 5)), "0");
    }

    #[test]
    fn unreachable_count_dominates_any_finite_sum() {
        let heavy_finite = CostValue::finite(rat(1_000_000, 1));
        let one_lost_peer = CostValue {
            unreachable: 1,
            finite: rat(-1_000_000, 1),
        };
        assert!(heavy_finite < one_lost_peer);

        let d1 = one_lost_peer - heavy_finite;
        assert!(d1 > CostDelta::zero());
        let d2 = heavy_finite - one_lost_peer;
        assert!(d2.is_improvement());
        assert_eq!(d1 + d2, CostDelta::zero());
    }

    #[test]
    fn compensation_is_positive_part_of_finite_loss() {
        assert_eq!(CostDelta::finite(rat(5, 2)).compensation(), rat(5, 2));
        assert_eq!(CostDelta::finite(rat(-3, 1)).compensation(), rat(0, 1));
        assert_eq!(CostDelta::zero().compensation(), rat(0, 1));
        let reconnects = CostDelta {
            unreachable: -2,
            finite: rat(9, 1),
        };
        assert_eq!(reconnects.compensation(), rat(0, 1));
    }

    #[test]
    fn floor_sqrt_matches_hand_values() {
        assert_eq!(floor_sqrt(rat(0, 1)).unwrap(), 0);
        assert_eq!(floor_sqrt(rat(16, 1)).unwrap(), 4);
        assert_eq!(floor_sqrt(rat(15, 1)).unwrap(), 3);
        assert_eq!(floor_sqrt(rat(9, 2)).unwrap(), 2); // sqrt(4.5)
        assert_eq!(floor_sqrt(rat(12, 5)).unwrap(), 1);
        assert!(floor_sqrt(rat(-1, 1)).is_err());
    }
}
