//! Exact rational scalars.
//!
//! All symbolic arithmetic in this crate is carried out over arbitrary
//! precision rationals; nothing is ever rounded. `num-rational` keeps values
//! in lowest terms with a positive denominator, which is exactly the
//! canonical form we rely on.

use num_bigint::BigInt;
pub use num_rational::BigRational as Rational;
use num_traits::{One, Signed, Zero};

/// Shorthand for `n/d` (`d` must be nonzero).
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for the integer `n` as a rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parse `int` or `int/posint` (underscores not allowed, optional leading `-`).
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = match den {
        Some(d) => d.parse().ok()?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Convert to `f64` (used only by the floating-point oracle).
pub fn to_f64(r: &Rational) -> f64 {
    // Split into integer and fractional parts to stay accurate for
    // values whose numerator/denominator exceed f64 range.
    let (q, rem) = (r.numer() / r.denom(), r.numer() % r.denom());
    let qf = bigint_to_f64(&q);
    let rf = bigint_to_f64(&rem) / bigint_to_f64(r.denom());
    qf + rf
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    let s = b.to_string();
    s.parse::<f64>().unwrap_or(if b.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_canonical_form() {
        assert_eq!(parse_rational("22/45").unwrap(), rat(22, 45));
        assert_eq!(parse_rational("-4/6").unwrap(), rat(-2, 3));
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert_eq!(parse_rational(" -7 / 2 ").unwrap(), rat(-7, 2));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
        // canonical: lowest terms, positive denominator
        let r = rat(4, -6);
        assert_eq!(r, rat(-2, 3));
        assert!(r.denom() > &BigInt::zero());
    }

    #[test]
    fn f64_conversion() {
        assert_eq!(to_f64(&rat(1, 2)), 0.5);
        assert!((to_f64(&rat(22, 45)) - 22.0 / 45.0).abs() < 1e-15);
    }
}
