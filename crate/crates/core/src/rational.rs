//! Exact rational helpers shared by every module.

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a"` or `"a/b"` with integer `a`, `b`; decimals are rejected.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let err = || Error::ParseRational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Q::new(n, d))
}

/// Canonical string form: `"n"` for integers, `"n/d"` otherwise.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Product that skips gcd normalization when both factors are integers.
pub fn mul_q(a: &Q, b: &Q) -> Q {
    if a.is_integer() && b.is_integer() {
        Q::from_integer(a.numer() * b.numer())
    } else {
        a * b
    }
}

/// `x += c`, skipping gcd normalization for integers.
pub fn add_assign_q(x: &mut Q, c: &Q) {
    if x.is_integer() && c.is_integer() {
        *x = Q::from_integer(x.numer() + c.numer());
    } else {
        *x += c;
    }
}

/// Exponent of `p` in a nonzero integer.
pub fn ord_p_int(n: &BigInt, p: u32) -> i64 {
    debug_assert!(!n.is_zero());
    if p == 2 {
        return n.trailing_zeros().map_or(0, |z| z as i64);
    }
    // strip p^(2^j) while it divides, then walk the powers back down
    let mut powers = vec![BigInt::from(p)];
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (quo, rem) = n.div_rem(powers.last().unwrap());
        if !rem.is_zero() {
            break;
        }
        n = quo;
        k += 1 << (powers.len() - 1);
        let sq = powers.last().unwrap() * powers.last().unwrap();
        powers.push(sq);
    }
    for (j, pw) in powers.iter().enumerate().rev() {
        let (quo, rem) = n.div_rem(pw);
        if rem.is_zero() {
            n = quo;
            k += 1 << j;
        }
    }
    k
}

/// A rational `y` of height below `p^(k - v(x))` with `v(x − y) ≥ k`,
/// for nonzero `x` with `v(x) < k`. The unit part is a centered residue.
pub fn round_p_adic(x: &Q, p: u32, k: i64) -> Q {
    let v = ord_p(x, p);
    debug_assert!(v < k);
    let pb = BigInt::from(p);
    let shift = |e: i64| Q::from_integer(pb.pow(e.unsigned_abs() as u32));
    let unit = if v >= 0 { x / shift(v) } else { x * shift(v) };
    let modulus = pb.pow((k - v) as u32);
    let inv = unit.denom().extended_gcd(&modulus).x;
    let mut res = (unit.numer() * inv).mod_floor(&modulus);
    if &res * 2 > modulus {
        res -= &modulus;
    }
    let res = Q::from_integer(res);
    if v >= 0 {
        res * shift(v)
    } else {
        res / shift(v)
    }
}

/// p-adic valuation of a nonzero rational; identically 0 when `p == 0`.
pub fn ord_p(x: &Q, p: u32) -> i64 {
    if p == 0 {
        return 0;
    }
    ord_p_int(x.numer(), p) - ord_p_int(x.denom(), p)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn midpoint(a: &Q, b: &Q) -> Q {
    (a + b) / q(2)
}

pub fn ceil_to_i64(x: &Q) -> i64 {
    x.ceil().to_integer().to_i64().unwrap_or(i64::MAX)
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Fixed-point decimal rendering, rounding half away from zero.
pub fn to_decimal(x: &Q, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = x * Q::from_integer(scale.clone());
    let rounded = if scaled.is_negative() {
        -((-scaled) + qf(1, 2)).floor().to_integer()
    } else {
        (scaled + qf(1, 2)).floor().to_integer()
    };
    let neg = rounded.sign() == Sign::Minus;
    let abs = rounded.abs();
    let (int, frac) = abs.div_rem(&scale);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if places > 0 {
        out.push('.');
        let f = frac.to_string();
        for _ in f.len()..places as usize {
            out.push('0');
        }
        out.push_str(&f);
    }
    out
}

/// `true` when `x` lies in `(1/k)Z` for some `k` in `1..=max_den`.
pub fn in_fractional_lattice(x: &Q, max_den: usize) -> bool {
    match x.denom().to_usize() {
        Some(d) => d <= max_den,
        None => false,
    }
}

/// `true` when `x` lies in `(1/p^n)Z`.
pub fn in_p_power_lattice(x: &Q, p: u32, n: u32) -> bool {
    let bound = BigInt::from(p).pow(n);
    bound.is_multiple_of(x.denom())
}

pub mod serde_q {
    //! (De)serialize rationals as exact strings; integers are also accepted on input.
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => parse_q(&s).map_err(serde::de::Error::custom),
            Raw::I(i) => Ok(q(i)),
        }
    }
}

pub mod serde_q_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&fmt_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        let raw = Vec::<Raw>::deserialize(d)?;
        raw.into_iter()
            .map(|r| match r {
                Raw::S(s) => parse_q(&s).map_err(serde::de::Error::custom),
                Raw::I(i) => Ok(q(i)),
            })
            .collect()
    }
}
