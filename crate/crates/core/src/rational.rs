//! Exact scalars, utility points and evaluation directions.
//!
//! Everything in the solver is computed over [`Rational`]; there is no
//! floating point anywhere on the solve path.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("malformed rational {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("non-dyadic rational {0:?}: denominator is not a power of two")]
    NonDyadic(String),
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p"` or `"p/q"`.
pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p: BigInt = num
        .parse()
        .map_err(|_| RationalError::Malformed(text.to_string()))?;
    let q: BigInt = den
        .parse()
        .map_err(|_| RationalError::Malformed(text.to_string()))?;
    if q.is_zero() {
        return Err(RationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(p, q))
}

/// Parses a rational and additionally requires a power-of-two denominator.
pub fn parse_dyadic(text: &str) -> Result<Rational, RationalError> {
    let r = parse_rational(text)?;
    if dyadic_exponent(&r).is_none() {
        return Err(RationalError::NonDyadic(text.to_string()));
    }
    Ok(r)
}

/// `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rounded decimal rendering, for human-facing output only.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// The `k` with denominator `2^k`, or `None` when the denominator has an odd
/// factor.
pub fn dyadic_exponent(r: &Rational) -> Option<u64> {
    let d = r.denom();
    let tz = d.trailing_zeros().unwrap_or(0);
    if (d >> tz).is_one() {
        Some(tz)
    } else {
        None
    }
}

/// Bits needed for the larger of numerator and denominator.
pub fn bit_size(r: &Rational) -> u64 {
    r.numer().bits().max(r.denom().bits())
}

/// True when `r * 2^k` is an integer.
pub fn divides_power_of_two(r: &Rational, k: u64) -> bool {
    matches!(dyadic_exponent(r), Some(e) if e <= k)
}

pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

/// A pair of onward utilities `(player 1, player 2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn origin() -> Self {
        Point::new(Rational::zero(), Rational::zero())
    }

    /// The "no feasible point" marker `(-n, -n)`.
    pub fn sentinel(n: usize) -> Self {
        let v = -int(n as i64);
        Point::new(v.clone(), v)
    }

    /// Genuine frontier points are coordinate-wise nonnegative; only the
    /// sentinel is negative.
    pub fn is_sentinel(&self) -> bool {
        self.x.is_negative()
    }

    /// Coordinate by player index (1 or 2).
    pub fn coord(&self, player: usize) -> &Rational {
        match player {
            1 => &self.x,
            2 => &self.y,
            _ => panic!("player index must be 1 or 2, got {player}"),
        }
    }

    pub fn score(&self, dir: &Direction) -> Rational {
        &dir.d1 * &self.x + &dir.d2 * &self.y
    }

    pub fn add(&self, other: &Point) -> Point {
        Point::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn scale(&self, w: &Rational) -> Point {
        Point::new(&self.x * w, &self.y * w)
    }

    /// `w * self + (1 - w) * other`.
    pub fn lerp(&self, other: &Point, w: &Rational) -> Point {
        let rest = Rational::one() - w;
        self.scale(w).add(&other.scale(&rest))
    }

    /// Lexicographic order used for every argmax in the crate: larger
    /// `dir`-score first, then larger `y`, then larger `x`.
    ///
    /// For `dir = (1, 0)` this selects the rightmost-topmost point and for
    /// `dir = (0, 1)` the topmost-rightmost point. The order is linear, so it
    /// decomposes over positively weighted sums of points.
    pub fn cmp_along(&self, other: &Point, dir: &Direction) -> Ordering {
        self.score(dir)
            .cmp(&other.score(dir))
            .then_with(|| self.y.cmp(&other.y))
            .then_with(|| self.x.cmp(&other.x))
    }

    pub fn max_bits(&self) -> u64 {
        bit_size(&self.x).max(bit_size(&self.y))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            format_rational(&self.x),
            format_rational(&self.y)
        )
    }
}

/// A nonnegative direction normalized to unit 1-norm. Because `d2` is
/// determined by `d1`, equality and ordering look only at `d1`.
#[derive(Debug, Clone)]
pub struct Direction {
    pub d1: Rational,
    pub d2: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DirectionError {
    #[error("direction components must be nonnegative")]
    Negative,
    #[error("direction must be nonzero")]
    Zero,
}

impl Direction {
    /// Normalizes `(a, b)` to `a + b = 1`.
    pub fn new(a: Rational, b: Rational) -> Result<Self, DirectionError> {
        if a.is_negative() || b.is_negative() {
            return Err(DirectionError::Negative);
        }
        let sum = &a + &b;
        if sum.is_zero() {
            return Err(DirectionError::Zero);
        }
        Ok(Direction {
            d1: a / &sum,
            d2: b / sum,
        })
    }

    pub fn from_d1(d1: Rational) -> Self {
        let d2 = Rational::one() - &d1;
        debug_assert!(!d1.is_negative() && !d2.is_negative());
        Direction { d1, d2 }
    }

    /// `(1, 0)`: player 1's axis.
    pub fn e1() -> Self {
        Direction::from_d1(Rational::one())
    }

    /// `(0, 1)`: player 2's axis.
    pub fn e2() -> Self {
        Direction::from_d1(Rational::zero())
    }

    /// Unit direction along a player's axis.
    pub fn axis(player: usize) -> Self {
        match player {
            1 => Direction::e1(),
            2 => Direction::e2(),
            _ => panic!("player index must be 1 or 2, got {player}"),
        }
    }

    pub fn midpoint(&self, other: &Direction) -> Direction {
        Direction::from_d1((&self.d1 + &other.d1) / int(2))
    }

    pub fn l1_distance(&self, other: &Direction) -> Rational {
        (&self.d1 - &other.d1).abs() * int(2)
    }

    /// Parses `"d1,d2"`, normalizing to unit 1-norm.
    pub fn parse(text: &str) -> Result<Self, String> {
        let (a, b) = text
            .split_once(',')
            .ok_or_else(|| format!("expected d1,d2 but got {text:?}"))?;
        let a = parse_rational(a).map_err(|e| e.to_string())?;
        let b = parse_rational(b).map_err(|e| e.to_string())?;
        Direction::new(a, b).map_err(|e| e.to_string())
    }

    /// The direction orthogonal to the chord from `upper` to `lower`, where
    /// `upper` lies weakly up-left of `lower`.
    pub fn chord_normal(upper: &Point, lower: &Point) -> Result<Self, DirectionError> {
        Direction::new(&upper.y - &lower.y, &lower.x - &upper.x)
    }
}

impl PartialEq for Direction {
    fn eq(&self, other: &Self) -> bool {
        self.d1 == other.d1
    }
}

impl Eq for Direction {}

impl PartialOrd for Direction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Direction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d1.cmp(&other.d1)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            format_rational(&self.d1),
            format_rational(&self.d2)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/8").unwrap(), ratio(3, 8));
        assert_eq!(parse_rational("-2").unwrap(), int(-2));
        assert_eq!(format_rational(&ratio(6, 4)), "3/2");
        assert_eq!(format_rational(&int(0)), "0");
        assert!(matches!(
            parse_dyadic("1/3"),
            Err(RationalError::NonDyadic(_))
        ));
        assert!(matches!(
            parse_rational("1/0"),
            Err(RationalError::ZeroDenominator(_))
        ));
        assert!(matches!(
            parse_rational("x"),
            Err(RationalError::Malformed(_))
        ));
    }

    #[test]
    fn dyadic_exponents() {
        assert_eq!(dyadic_exponent(&ratio(3, 8)), Some(3));
        assert_eq!(dyadic_exponent(&int(5)), Some(0));
        assert_eq!(dyadic_exponent(&ratio(1, 6)), None);
    }

    #[test]
    fn direction_normalizes_and_compares_by_first_component() {
        let d = Direction::new(int(2), int(2)).unwrap();
        assert_eq!(d, Direction::from_d1(ratio(1, 2)));
        assert_eq!(d.d2, ratio(1, 2));
        assert!(Direction::e2() < Direction::e1());
        assert_eq!(Direction::e1().l1_distance(&Direction::e2()), int(2));
        assert!(Direction::new(int(0), int(0)).is_err());
        assert!(Direction::new(int(-1), int(2)).is_err());
    }

    #[test]
    fn sentinel_scores_below_genuine_points() {
        let s = Point::sentinel(3);
        for d in [
            Direction::e1(),
            Direction::e2(),
            Direction::from_d1(ratio(1, 3)),
        ] {
            assert_eq!(Point::origin().cmp_along(&s, &d), Ordering::Greater);
        }
    }

    #[test]
    fn lexicographic_tie_breaks() {
        let a = Point::new(int(2), ratio(1, 2));
        let b = Point::new(int(1), ratio(3, 2));
        // Equal score along (1/2, 1/2); the larger y wins.
        let half = Direction::from_d1(ratio(1, 2));
        assert_eq!(b.cmp_along(&a, &half), Ordering::Greater);
        let right = Point::new(int(2), int(1));
        assert_eq!(right.cmp_along(&a, &Direction::e1()), Ordering::Greater);
    }

    fn dyadic() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 0u32..12).prop_map(|(p, k)| ratio(p, 1 << k))
    }

    proptest! {
        #[test]
        fn field_identities(a in dyadic(), b in dyadic()) {
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            if !b.is_zero() {
                prop_assert_eq!(&(&a * &b) / &b, a);
            }
        }

        #[test]
        fn format_round_trips(a in dyadic()) {
            prop_assert_eq!(parse_rational(&format_rational(&a)).unwrap(), a);
        }
    }
}
