//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact square root of a non-negative rational, if it is the square of a rational.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    // BigRational is always kept in lowest terms with a positive denominator.
    let n = x.numer();
    let d = x.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Rational::new(rn, rd))
    } else {
        None
    }
}

/// Formats as `n` for integers and `p/q` otherwise.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `n`, `-n`, `p/q` (q non-zero). Whitespace around the parts is not accepted.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let num: BigInt = parse_int(num)?;
    let den: BigInt = match den {
        Some(d) => parse_int(d)?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Scales a rational vector to a primitive integer vector (gcd 1) pointing the same way.
/// The zero vector maps to the zero vector.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = scaled.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return scaled;
    }
    scaled.into_iter().map(|x| x / &g).collect()
}

/// Same as [`primitive_integer_vector`] with the first non-zero entry made positive.
pub fn normalized_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let mut out = primitive_integer_vector(v);
    if out
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative())
    {
        for x in out.iter_mut() {
            *x = -x.clone();
        }
    }
    out
}

pub fn gcd_u64(values: impl IntoIterator<Item = u64>) -> u64 {
    values.into_iter().fold(0, |acc, x| acc.gcd(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sqrt_of_squares_and_non_squares() {
        assert_eq!(rational_sqrt(&rat(4)), Some(rat(2)));
        assert_eq!(rational_sqrt(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(rational_sqrt(&ratio(1, 2)), None);
        assert_eq!(rational_sqrt(&rat(2)), None);
        assert_eq!(rational_sqrt(&rat(-4)), None);
        assert_eq!(rational_sqrt(&rat(0)), Some(rat(0)));
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["", "1/0", "a", "1/", "/2", "1.5", " 1", "+1", "--1", "1/-"] {
            assert_eq!(parse_rational(bad), None, "{bad:?}");
        }
        assert_eq!(parse_rational("-3/6"), Some(ratio(-1, 2)));
        assert_eq!(parse_rational("4/-2"), Some(rat(-2)));
    }

    #[test]
    fn primitive_vectors() {
        let v = vec![ratio(1, 2), rat(1), ratio(-3, 2)];
        assert_eq!(
            primitive_integer_vector(&v),
            vec![BigInt::from(1), BigInt::from(2), BigInt::from(-3)]
        );
        let w = vec![rat(0), rat(-4), rat(2)];
        assert_eq!(
            normalized_integer_vector(&w),
            vec![BigInt::from(0), BigInt::from(2), BigInt::from(-1)]
        );
    }

    proptest! {
        #[test]
        fn format_parse_roundtrip(n in -10_000i64..10_000, d in 1i64..500) {
            let x = ratio(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&x)), Some(x));
        }

        #[test]
        fn sqrt_of_square_is_exact(n in 0i64..5000, d in 1i64..200) {
            let x = ratio(n, d);
            prop_assert_eq!(rational_sqrt(&(&x * &x)), Some(x));
        }
    }
}
