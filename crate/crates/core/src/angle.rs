//! Exact rational multiples of pi, their orders, and totient arithmetic.
//!
//! An angle `pi * numer / denom` is always stored in the canonical range
//! `[0, pi]`: reduction modulo `2 pi` and the reflection `b -> -b` happen at
//! construction, because every downstream quantity only depends on the
//! cosine sequence `n -> cos(n b)`, which is invariant under both.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The angle `pi * numer / denom`, canonicalized to `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalAngle {
    numer: u64,
    denom: u64,
    order: u64,
}

impl RationalAngle {
    /// The angle `0`.
    pub const ZERO: RationalAngle = RationalAngle {
        numer: 0,
        denom: 1,
        order: 1,
    };
    /// The angle `pi`.
    pub const PI: RationalAngle = RationalAngle {
        numer: 1,
        denom: 1,
        order: 2,
    };

    pub fn try_new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput(
                "angle denominator must be nonzero".into(),
            ));
        }
        let (mut p, mut q) = (p as i128, q as i128);
        if q < 0 {
            p = -p;
            q = -q;
        }
        let mut r = p.rem_euclid(2 * q);
        if r > q {
            r = 2 * q - r;
        }
        let g = r.gcd(&q);
        let (numer, denom) = if r == 0 {
            (0, 1)
        } else {
            ((r / g) as u64, (q / g) as u64)
        };
        let order = if numer == 0 {
            1
        } else if numer % 2 == 0 {
            denom
        } else {
            2 * denom
        };
        Ok(RationalAngle {
            numer,
            denom,
            order,
        })
    }

    pub fn numer(&self) -> u64 {
        self.numer
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    /// Smallest `u >= 1` with `exp(i u a) = 1`.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.numer == 0
    }

    /// Canonical form of `n * self`.
    pub fn multiple(&self, n: i64) -> RationalAngle {
        let p = (self.numer as i128 * n as i128).rem_euclid(2 * self.denom as i128);
        canonicalize(p as i64, self.denom as i64)
    }

    /// Canonical form of `pi - self`; `cos(pi - b) = -cos(b)`.
    pub fn supplement(&self) -> RationalAngle {
        canonicalize(self.denom as i64 - self.numer as i64, self.denom as i64)
    }

    /// Writes the angle as `2 pi alpha / order` with `gcd(alpha, order) = 1`.
    pub fn primitive_index(&self) -> u64 {
        if self.numer == 0 {
            0
        } else if self.numer.is_multiple_of(2) {
            self.numer / 2
        } else {
            self.numer
        }
    }

    pub fn to_f64(&self) -> f64 {
        std::f64::consts::PI * self.numer as f64 / self.denom as f64
    }

    /// `cos(n * self)` in double precision, reducing `n * numer` exactly first.
    pub fn cos_multiple_f64(&self, n: i64) -> f64 {
        let m = self.multiple(n);
        (std::f64::consts::PI * m.numer as f64 / m.denom as f64).cos()
    }
}

/// Reduces `pi p / q` to the unique angle in `[0, pi]` with the same cosine sequence.
///
/// Panics if `q == 0`; use [`RationalAngle::try_new`] for untrusted input.
pub fn canonicalize(p: i64, q: i64) -> RationalAngle {
    RationalAngle::try_new(p, q).expect("denominator must be nonzero")
}

pub fn order_of(a: &RationalAngle) -> u64 {
    a.order()
}

impl PartialOrd for RationalAngle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalAngle {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.numer as u128 * other.denom as u128;
        let rhs = other.numer as u128 * self.denom as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom == 1 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom)
        }
    }
}

/// Parses `"p/q"` (meaning `pi p / q`) or a bare integer `"p"`, then canonicalizes.
impl FromStr for RationalAngle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse angle {s:?}; expected p/q"));
        let s = s.trim();
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (
                p.trim().parse::<i64>().map_err(|_| bad())?,
                q.trim().parse::<i64>().map_err(|_| bad())?,
            ),
            None => (s.parse::<i64>().map_err(|_| bad())?, 1),
        };
        RationalAngle::try_new(p, q)
    }
}

impl Serialize for RationalAngle {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RationalAngle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Either an exact rational angle or an opaque irrational multiple of pi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolicAngle {
    Rational(RationalAngle),
    /// Carries no approximation; only classification results are available.
    IrrationalMultipleOfPi,
}

/// Euler's totient via the prime factorization product.
pub fn totient(n: u64) -> u64 {
    assert!(n >= 1, "totient is defined for n >= 1");
    factorize(n)
        .into_iter()
        .map(|(p, e)| p.pow(e - 1) * (p - 1))
        .product()
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).first() == Some(&(n, 1))
}

/// Every `n` with `n <= search_bound` satisfies this for totient value `v`.
///
/// `H(n) >= sqrt(n)` for all `n` outside `{2, 6}`, so `n <= v^2` except for
/// those two, both of which lie below `v^2 + v + 1`.
pub fn inverse_totient_search_bound(v: u64) -> u64 {
    v * v + v + 1
}

/// All `n` with `totient(n) = v`, sorted ascending.
///
/// Builds `n` prime by prime from the primes `p` with `(p - 1) | v`, which is
/// equivalent to (and much faster than) scanning `1..=v^2 + v + 1`.
pub fn inverse_totient(v: u64) -> Vec<u64> {
    assert!(v >= 1, "inverse_totient is defined for v >= 1");
    let mut primes: Vec<u64> = divisors(v)
        .into_iter()
        .map(|d| d + 1)
        .filter(|&p| is_prime(p))
        .collect();
    primes.sort_unstable();
    let mut out = Vec::new();
    inverse_totient_rec(v, &primes, 0, 1, &mut out);
    out.sort_unstable();
    out.dedup();
    out
}

fn inverse_totient_rec(v: u64, primes: &[u64], start: usize, acc: u64, out: &mut Vec<u64>) {
    if v == 1 {
        out.push(acc);
    }
    for (i, &p) in primes.iter().enumerate().skip(start) {
        if !v.is_multiple_of(p - 1) {
            continue;
        }
        let mut rest = v / (p - 1);
        let mut pk = p;
        loop {
            inverse_totient_rec(rest, primes, i + 1, acc * pk, out);
            if !rest.is_multiple_of(p) {
                break;
            }
            rest /= p;
            pk *= p;
        }
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// All angles in `[0, pi]` of order exactly `u`, ascending.
pub fn angles_of_order(u: u64) -> Vec<RationalAngle> {
    assert!(u >= 1, "orders start at 1");
    if u == 1 {
        return vec![RationalAngle::ZERO];
    }
    (1..=u / 2)
        .filter(|alpha| alpha.gcd(&u) == 1)
        .map(|alpha| canonicalize(2 * alpha as i64, u as i64))
        .collect()
}

/// All angles in `[0, pi]` with order at most `max_order`, ascending.
pub fn angles_up_to_order(max_order: u64) -> Vec<RationalAngle> {
    let mut out: Vec<RationalAngle> = (1..=max_order).flat_map(angles_of_order).collect();
    out.sort();
    out
}

/// `lcm(a, b)`, or `None` on overflow.
pub fn checked_lcm(a: u64, b: u64) -> Option<u64> {
    (a / a.gcd(&b)).checked_mul(b)
}

/// Inverse of `x` modulo `m` (`m >= 1`); `0` when `m == 1`.
pub fn mod_inverse(x: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let ext = (x as i128).extended_gcd(&(m as i128));
    (ext.gcd == 1).then(|| ext.x.rem_euclid(m as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(s: &str) -> RationalAngle {
        s.parse().unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let x = canonicalize(2, 5);
        assert_eq!((x.numer(), x.denom(), x.order()), (2, 5, 5));
        let x = canonicalize(9, 4);
        assert_eq!((x.numer(), x.denom(), x.order()), (1, 4, 8));
        let x = canonicalize(-1, 3);
        assert_eq!((x.numer(), x.denom(), x.order()), (1, 3, 6));
        assert_eq!(canonicalize(5, 4), canonicalize(3, 4));
        assert_eq!(canonicalize(7, -3), canonicalize(1, 3));
        assert_eq!(canonicalize(6, 3), RationalAngle::ZERO);
        assert!(RationalAngle::try_new(1, 0).is_err());
    }

    #[test]
    fn order_examples() {
        assert_eq!(RationalAngle::ZERO.order(), 1);
        assert_eq!(RationalAngle::PI.order(), 2);
        assert_eq!(canonicalize(2, 3).order(), 3);
        assert_eq!(canonicalize(1, 2).order(), 4);
        assert_eq!(canonicalize(1, 6).order(), 12);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(a("2/5").to_string(), "2/5");
        assert_eq!(a("0").to_string(), "0");
        assert_eq!(a("1").to_string(), "1");
        assert_eq!(a("0/1"), RationalAngle::ZERO);
        assert_eq!(a("5/4").to_string(), "3/4");
        assert!("x/3".parse::<RationalAngle>().is_err());
        assert!("1/0".parse::<RationalAngle>().is_err());
        let json = serde_json::to_string(&a("4/11")).unwrap();
        assert_eq!(json, "\"4/11\"");
        assert_eq!(
            serde_json::from_str::<RationalAngle>(&json).unwrap(),
            a("4/11")
        );
    }

    fn brute_totient(n: u64) -> u64 {
        (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64
    }

    #[test]
    fn totient_examples() {
        assert_eq!(totient(1), 1);
        assert_eq!(totient(12), brute_totient(12));
        assert_eq!(totient(12), 4);
        assert_eq!(totient(11), 10);
    }

    #[test]
    fn inverse_totient_examples() {
        assert_eq!(inverse_totient(2), vec![3, 4, 6]);
        assert_eq!(inverse_totient(1), vec![1, 2]);
        assert!(inverse_totient(14).is_empty());
        let brute: Vec<u64> = (1..=300).filter(|&n| brute_totient(n) == 14).collect();
        assert!(brute.is_empty());
    }

    #[test]
    fn inverse_totient_matches_bounded_search() {
        for v in 1..=60u64 {
            let bound = inverse_totient_search_bound(v);
            let brute: Vec<u64> = (1..=bound).filter(|&n| totient(n) == v).collect();
            assert_eq!(inverse_totient(v), brute, "v = {v}");
        }
    }

    #[test]
    fn angles_of_order_examples() {
        assert_eq!(angles_of_order(1), vec![RationalAngle::ZERO]);
        assert_eq!(angles_of_order(2), vec![RationalAngle::PI]);
        assert_eq!(angles_of_order(5), vec![a("2/5"), a("4/5")]);
        assert_eq!(
            angles_of_order(16),
            vec![a("1/8"), a("3/8"), a("5/8"), a("7/8")]
        );
        for u in 1..=40 {
            assert!(angles_of_order(u).iter().all(|x| x.order() == u));
        }
    }

    #[test]
    fn mod_inverse_works() {
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(mod_inverse(5, 1), Some(0));
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent_and_order_divides(p in -500i64..500, q in 1i64..200) {
            let x = canonicalize(p, q);
            prop_assert_eq!(canonicalize(x.numer() as i64, x.denom() as i64), x);
            prop_assert_eq!((2 * q as u64) % x.order(), 0);
            prop_assert!(x.numer() <= x.denom());
            // cos(n x) = cos(n pi p / q) for all n.
            for n in 0..6i64 {
                let direct = (std::f64::consts::PI * (n * p) as f64 / q as f64).cos();
                prop_assert!((x.cos_multiple_f64(n) - direct).abs() < 1e-9);
            }
        }

        #[test]
        fn order_is_minimal(p in 0i64..200, q in 1i64..100) {
            let x = canonicalize(p, q);
            let u = x.order();
            prop_assert!(x.multiple(u as i64).is_zero());
            for k in 1..u {
                prop_assert!(!x.multiple(k as i64).is_zero());
            }
        }

        #[test]
        fn angle_count_is_half_totient(u in 3u64..400) {
            prop_assert_eq!(angles_of_order(u).len() as u64, totient(u) / 2);
        }

        #[test]
        fn totient_is_multiplicative(m in 1u64..300, n in 1u64..300) {
            prop_assume!(m.gcd(&n) == 1);
            prop_assert_eq!(totient(m * n), totient(m) * totient(n));
        }
    }

    #[test]
    fn inverse_totient_roundtrip_to_ten_thousand() {
        for n in 1..=10_000u64 {
            assert!(
                inverse_totient(totient(n)).binary_search(&n).is_ok(),
                "n = {n}"
            );
        }
    }
}
