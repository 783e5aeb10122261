//! Valuations, discrete distributions, extended reals and random streams.

mod dist;
mod extreal;
mod rng;
mod valuation;

pub use dist::{parse_dist_file, sample, DiscreteDist, DistError, SamplingFunction};
pub use extreal::{extreal_sum_weighted, ExtReal};
pub use rng::RngStream;
pub use valuation::{Valuation, ValuationError};

/// Parses `p/q`, an integer, or a decimal such as `0.25` into an exact rational.
pub fn parse_rational(text: &str) -> Option<crate::Rational> {
    use num_bigint::BigInt;
    use num_traits::{One, Zero};
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(crate::Rational::new(p, q));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let mut den = BigInt::one();
    for _ in 0..frac.len() {
        den *= 10;
    }
    let r = crate::Rational::new(num, den);
    Some(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::parse_rational;
    use crate::Rational;

    #[test]
    fn rational_literals() {
        let q = |p: i64, d: i64| Rational::new(p.into(), d.into());
        assert_eq!(parse_rational("3/4"), Some(q(3, 4)));
        assert_eq!(parse_rational("13.5"), Some(q(27, 2)));
        assert_eq!(parse_rational("-2"), Some(q(-2, 1)));
        assert_eq!(parse_rational("0.25"), Some(q(1, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(parse_rational("."), None);
    }
}
