//! Scalars: primes, residues mod p^N, rational exponents and valuations.

use crate::error::{Error, Result};
use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

pub type Q = Ratio<i64>;

/// Largest p^N we allow, so that sums of products fit comfortably in u128.
pub const MAX_MODULUS: u64 = 1 << 40;

pub fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

pub fn fmt_q(x: &Q) -> String {
    if *x.denom() == 1 {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let bad = || Error::Parse {
        pos: 0,
        msg: format!("not a rational: {s:?}"),
    };
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(a, b))
        }
        None => Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?)),
    }
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

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NonPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Exponent of p in n (n > 0).
    pub fn val_u64(self, mut n: u64) -> u32 {
        let mut v = 0;
        while n > 0 && n.is_multiple_of(self.0) {
            n /= self.0;
            v += 1;
        }
        v
    }

    pub fn pow(self, k: u32) -> u64 {
        self.0.pow(k)
    }

    /// Is d a power of p?
    pub fn is_power(self, mut d: u64) -> bool {
        if d == 0 {
            return false;
        }
        while d.is_multiple_of(self.0) {
            d /= self.0;
        }
        d == 1
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Residues modulo p^N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    pub p: u64,
    pub digits: u32,
    pub value: u64,
}

impl Modulus {
    pub fn new(p: Prime, digits: u32) -> Result<Self> {
        if digits == 0 {
            return Err(Error::BadPrecision("need at least one p-adic digit".into()));
        }
        let mut value: u64 = 1;
        for _ in 0..digits {
            value = value
                .checked_mul(p.get())
                .filter(|v| *v <= MAX_MODULUS)
                .ok_or_else(|| Error::BadPrecision(format!("{}^{} is too large", p, digits)))?;
        }
        Ok(Modulus {
            p: p.get(),
            digits,
            value,
        })
    }

    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.value as i128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.value {
            s - self.value
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.value - b
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.value - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.value as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut k: u64) -> u64 {
        let mut r = 1 % self.value;
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            k >>= 1;
        }
        r
    }

    /// p-adic valuation of a residue; `digits` for zero.
    pub fn val(&self, mut a: u64) -> u32 {
        a %= self.value;
        if a == 0 {
            return self.digits;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.value;
        if a.is_multiple_of(self.p) {
            return None;
        }
        let g = (a as i128).extended_gcd(&(self.value as i128));
        debug_assert_eq!(g.gcd, 1);
        Some(self.reduce_i128(g.x))
    }

    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.digits {
            0
        } else {
            self.p.pow(k)
        }
    }
}

/// Working precision: p-adic digits, tower depth and the total degree cap
/// on auxiliary variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrecisionBudget {
    pub n_digits: u32,
    pub depth: u32,
    #[serde(serialize_with = "ser_q")]
    pub var_degree_cap: Q,
}

impl PrecisionBudget {
    pub fn new(n_digits: u32, depth: u32, var_degree_cap: Q) -> Result<Self> {
        if n_digits == 0 {
            return Err(Error::BadPrecision("n_digits must be positive".into()));
        }
        if var_degree_cap < Q::from_integer(0) {
            return Err(Error::BadPrecision("negative variable degree cap".into()));
        }
        Ok(PrecisionBudget {
            n_digits,
            depth,
            var_degree_cap,
        })
    }
}

/// Exponents of auxiliary variables live in (1/denominator)Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpLattice {
    pub denominator: u64,
}

/// A valuation known up to the working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(Q),
    AbovePrecision,
}

impl Valuation {
    pub fn finite(self) -> Option<Q> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AbovePrecision => None,
        }
    }

    /// Replace ABOVE_PRECISION by the precision itself and cap finite values there.
    pub fn capped(self, precision: Q) -> Q {
        match self {
            Valuation::Finite(v) => v.min(precision),
            Valuation::AbovePrecision => precision,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::AbovePrecision) => Ordering::Less,
            (Valuation::AbovePrecision, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::AbovePrecision, Valuation::AbovePrecision) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{}", fmt_q(v)),
            Valuation::AbovePrecision => write!(f, "ABOVE_PRECISION"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

pub fn ser_opt_q<S: serde::Serializer>(
    x: &Option<Q>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&fmt_q(v)),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(Prime::new(5).is_ok());
        assert_eq!(Prime::new(6), Err(Error::NonPrime(6)));
        assert_eq!(Prime::new(1), Err(Error::NonPrime(1)));
        let p = Prime::new(5).unwrap();
        assert_eq!(p.val_u64(250), 3);
        assert!(p.is_power(125));
        assert!(!p.is_power(50));
    }

    #[test]
    fn modulus_ops() {
        let m = Modulus::new(Prime::new(5).unwrap(), 6).unwrap();
        assert_eq!(m.value, 15625);
        assert_eq!(m.val(0), 6);
        assert_eq!(m.val(250), 3);
        for a in [1u64, 2, 3, 4, 6, 7777, 15624] {
            let b = m.inv(a).unwrap();
            assert_eq!(m.mul(a, b), 1);
        }
        assert_eq!(m.inv(10), None);
        assert_eq!(m.pow(5, 6), 0);
        assert!(Modulus::new(Prime::new(5).unwrap(), 40).is_err());
    }

    #[test]
    fn rationals_roundtrip() {
        for s in ["3/25", "2/5", "1", "0", "7/3"] {
            assert_eq!(fmt_q(&parse_q(s).unwrap()), s);
        }
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn valuation_order() {
        let a = Valuation::Finite(q(1, 5));
        assert!(a < Valuation::AbovePrecision);
        assert_eq!(Valuation::AbovePrecision.capped(q(6, 1)), q(6, 1));
        assert_eq!(Valuation::Finite(q(7, 1)).capped(q(6, 1)), q(6, 1));
    }
}
