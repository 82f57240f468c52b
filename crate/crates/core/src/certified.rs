//! Adjustable-precision interval arithmetic with outward rounding.
//!
//! Endpoints are dyadic rationals `mant * 2^exp` backed by big integers, so
//! every rounding direction is exact and under our control. Transcendental
//! kernels (pi, cos, sin, atan) run in fixed point with a few dozen guard bits
//! and carry an explicit bound on their accumulated truncation error, which
//! is folded into the returned enclosure.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::angle::{canonicalize, RationalAngle};
use crate::error::{Error, Result};
use crate::Config;

/// Rounding direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
}

/// The exact value `mant * 2^exp`, normalized so that `mant` is odd (or zero with `exp = 0`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn shr_round(m: &BigInt, shift: u64, dir: Rounding) -> BigInt {
    match dir {
        // `>>` on BigInt is an arithmetic shift (rounds toward -inf).
        Rounding::Down => m >> shift,
        Rounding::Up => -((-m) >> shift),
    }
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Dyadic { mant, exp: 0 };
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        Dyadic {
            mant: mant >> tz,
            exp: exp + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    /// Exact conversion; panics on non-finite input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "cannot convert {x} to a dyadic");
        let (m, e, s) = num_traits::Float::integer_decode(x);
        Dyadic::new(BigInt::from(m) * s as i64, e as i64)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, i64) {
        let e = self.exp.min(other.exp);
        (
            &self.mant << (self.exp - e) as u64,
            &other.mant << (other.exp - e) as u64,
            e,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    /// Rounds to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Rounding) -> Self {
        let bits = self.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        Dyadic::new(shr_round(&self.mant, shift, dir), self.exp + shift as i64)
    }

    /// `self / other` rounded to `prec` bits; `other` must be nonzero.
    pub fn div(&self, other: &Self, prec: u32, dir: Rounding) -> Self {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let s = (prec as i64 + other.bits() as i64 - self.bits() as i64 + 2).max(0) as u64;
        let num = &self.mant << s;
        let (q, r) = num.div_mod_floor(&other.mant);
        let q = if dir == Rounding::Up && !r.is_zero() {
            q + 1
        } else {
            q
        };
        Dyadic::new(q, self.exp - other.exp - s as i64).round(prec, dir)
    }

    /// Square root of a nonnegative value rounded to `prec` bits.
    pub fn sqrt(&self, prec: u32, dir: Rounding) -> Self {
        assert!(self.signum() >= 0, "square root of a negative value");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let mut s = (2 * prec as i64 + 4 - self.bits() as i64).max(0);
        if (self.exp - s).rem_euclid(2) != 0 {
            s += 1;
        }
        let m = &self.mant << s as u64;
        let r = m.sqrt();
        let r = if dir == Rounding::Up && &r * &r != m {
            r + 1
        } else {
            r
        };
        Dyadic::new(r, (self.exp - s) / 2).round(prec, dir)
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.bits() as i64;
        let (m, e) = if bits > 60 {
            (&self.mant >> (bits - 60) as u64, self.exp + bits - 60)
        } else {
            (self.mant.clone(), self.exp)
        };
        let m = m.to_f64().unwrap_or(0.0);
        m * 2f64.powi(e.clamp(-1100, 1100) as i32)
    }

    /// `floor(self * 2^w)`.
    pub fn to_fixed_floor(&self, w: u32) -> BigInt {
        let e = self.exp + w as i64;
        if e >= 0 {
            &self.mant << e as u64
        } else {
            &self.mant >> (-e) as u64
        }
    }

    /// Exact decimal expansion (dyadic rationals always terminate).
    pub fn to_decimal_string(&self) -> String {
        if self.exp >= 0 {
            return (&self.mant << self.exp as u64).to_string();
        }
        let k = (-self.exp) as usize;
        let digits = (self.mant.abs() * BigInt::from(5).pow(k as u32)).to_string();
        let digits = format!("{digits:0>width$}", width = k + 1);
        let (int, frac) = digits.split_at(digits.len() - k);
        let frac = frac.trim_end_matches('0');
        let sign = if self.signum() < 0 { "-" } else { "" };
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// Parses a decimal string whose value is exactly dyadic.
    pub fn from_decimal_exact(s: &str) -> Option<Dyadic> {
        let (num, den_pow10) = parse_decimal(s).ok()?;
        if den_pow10 < 0 {
            return Some(Dyadic::new(
                num * BigInt::from(10).pow((-den_pow10) as u32),
                0,
            ));
        }
        let five = BigInt::from(5).pow(den_pow10 as u32);
        let (q, r) = num.div_rem(&five);
        r.is_zero().then(|| Dyadic::new(q, -den_pow10))
    }
}

/// Parses `[-]digits[.digits][e[-]digits]` into `(n, k)` meaning `n / 10^k`.
pub fn parse_decimal(s: &str) -> Result<(BigInt, i64)> {
    let bad = || Error::InvalidInput(format!("cannot parse decimal {s:?}"));
    let s = s.trim();
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let mut n: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    Ok((n, frac.len() as i64 - exp10))
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.signum().cmp(&other.signum()) {
            Ordering::Equal => {}
            o => return o,
        }
        self.sub(other).signum().cmp(&0)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

/// Comparison outcome of two enclosures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertOrdering {
    Less,
    Greater,
    Unknown,
}

/// A closed interval `[lo, hi]` certified to contain a real value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertScalar {
    lo: Dyadic,
    hi: Dyadic,
    precision_bits: u32,
    closed_form: Option<ClosedForm>,
}

impl CertScalar {
    pub fn new(lo: Dyadic, hi: Dyadic, precision_bits: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        CertScalar {
            lo,
            hi,
            precision_bits,
            closed_form: None,
        }
    }

    /// Rounds `[lo, hi]` outward to `prec` bits.
    pub fn outward(lo: &Dyadic, hi: &Dyadic, prec: u32) -> Self {
        CertScalar::new(
            lo.round(prec, Rounding::Down),
            hi.round(prec, Rounding::Up),
            prec,
        )
    }

    pub fn exact(value: Dyadic, prec: u32) -> Self {
        CertScalar::outward(&value, &value, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        CertScalar::exact(Dyadic::from_i64(v), prec)
    }

    /// Enclosure of `numer / denom`.
    pub fn from_ratio(numer: &BigInt, denom: &BigInt, prec: u32) -> Self {
        let n = Dyadic::new(numer.clone(), 0);
        let d = Dyadic::new(denom.clone(), 0);
        CertScalar::new(
            n.div(&d, prec, Rounding::Down),
            n.div(&d, prec, Rounding::Up),
            prec,
        )
    }

    /// Enclosure of a decimal literal such as `"1.2"`.
    pub fn from_decimal(s: &str, prec: u32) -> Result<Self> {
        let (n, k) = parse_decimal(s)?;
        if k <= 0 {
            return Ok(CertScalar::exact(
                Dyadic::new(n * BigInt::from(10).pow((-k) as u32), 0),
                prec,
            ));
        }
        Ok(CertScalar::from_ratio(
            &n,
            &BigInt::from(10).pow(k as u32),
            prec,
        ))
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed_form.as_ref()
    }

    pub fn with_closed_form(mut self, cf: Option<ClosedForm>) -> Self {
        self.closed_form = cf;
        self
    }

    pub fn with_precision(mut self, prec: u32) -> Self {
        self.precision_bits = prec;
        self
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64()
    }

    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi).shl(-1)
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.contains(&Dyadic::from_f64(x))
    }

    pub fn overlaps(&self, other: &CertScalar) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    fn prec_with(&self, other: &CertScalar) -> u32 {
        self.precision_bits.max(other.precision_bits)
    }

    pub fn add(&self, other: &CertScalar) -> CertScalar {
        let p = self.prec_with(other);
        CertScalar::outward(&self.lo.add(&other.lo), &self.hi.add(&other.hi), p)
    }

    pub fn sub(&self, other: &CertScalar) -> CertScalar {
        let p = self.prec_with(other);
        CertScalar::outward(&self.lo.sub(&other.hi), &self.hi.sub(&other.lo), p)
    }

    pub fn neg(&self) -> CertScalar {
        CertScalar::new(self.hi.neg(), self.lo.neg(), self.precision_bits)
    }

    pub fn mul(&self, other: &CertScalar) -> CertScalar {
        let p = self.prec_with(other);
        let products = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = products.iter().min().unwrap();
        let hi = products.iter().max().unwrap();
        CertScalar::outward(lo, hi, p)
    }

    pub fn mul_i64(&self, k: i64) -> CertScalar {
        self.mul(&CertScalar::from_i64(k, self.precision_bits))
    }

    /// Exact multiplication by `2^k`.
    pub fn scale_pow2(&self, k: i64) -> CertScalar {
        CertScalar::new(self.lo.shl(k), self.hi.shl(k), self.precision_bits)
    }

    /// `None` when the divisor interval contains zero.
    pub fn checked_div(&self, other: &CertScalar) -> Option<CertScalar> {
        if other.lo.signum() <= 0 && other.hi.signum() >= 0 {
            return None;
        }
        let p = self.prec_with(other);
        let mut lows = Vec::with_capacity(4);
        let mut highs = Vec::with_capacity(4);
        for a in [&self.lo, &self.hi] {
            for b in [&other.lo, &other.hi] {
                lows.push(a.div(b, p, Rounding::Down));
                highs.push(a.div(b, p, Rounding::Up));
            }
        }
        Some(CertScalar::new(
            lows.into_iter().min().unwrap(),
            highs.into_iter().max().unwrap(),
            p,
        ))
    }

    pub fn div(&self, other: &CertScalar) -> CertScalar {
        self.checked_div(other)
            .expect("divisor interval contains zero")
    }

    /// Square root, clamping a slightly negative lower endpoint to zero.
    pub fn sqrt(&self) -> CertScalar {
        assert!(self.hi.signum() >= 0, "square root of a negative interval");
        let p = self.precision_bits;
        let lo = if self.lo.signum() <= 0 {
            Dyadic::zero()
        } else {
            self.lo.sqrt(p, Rounding::Down)
        };
        CertScalar::new(lo, self.hi.sqrt(p, Rounding::Up), p)
    }

    pub fn abs(&self) -> CertScalar {
        let p = self.precision_bits;
        if self.lo.signum() >= 0 {
            CertScalar::new(self.lo.clone(), self.hi.clone(), p)
        } else if self.hi.signum() <= 0 {
            self.neg()
        } else {
            let hi = self.hi.clone().max(self.lo.neg());
            CertScalar::new(Dyadic::zero(), hi, p)
        }
    }

    pub fn max(&self, other: &CertScalar) -> CertScalar {
        CertScalar::new(
            self.lo.clone().max(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
            self.prec_with(other),
        )
    }

    pub fn min(&self, other: &CertScalar) -> CertScalar {
        CertScalar::new(
            self.lo.clone().min(other.lo.clone()),
            self.hi.clone().min(other.hi.clone()),
            self.prec_with(other),
        )
    }

    pub fn hull(&self, other: &CertScalar) -> CertScalar {
        CertScalar::new(
            self.lo.clone().min(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
            self.prec_with(other),
        )
    }

    /// Intersection of two enclosures of the same value; `None` if disjoint.
    pub fn intersect(&self, other: &CertScalar) -> Option<CertScalar> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        (lo <= hi).then(|| CertScalar {
            lo,
            hi,
            precision_bits: self.prec_with(other),
            closed_form: self
                .closed_form
                .clone()
                .or_else(|| other.closed_form.clone()),
        })
    }

    /// Clamps the enclosure into `[lo, hi]` (for values known a priori to lie there).
    pub fn clamp(&self, lo: &Dyadic, hi: &Dyadic) -> CertScalar {
        let l = self.lo.clone().max(lo.clone()).min(hi.clone());
        let h = self.hi.clone().min(hi.clone()).max(lo.clone());
        CertScalar {
            lo: l,
            hi: h,
            precision_bits: self.precision_bits,
            closed_form: self.closed_form.clone(),
        }
    }
}

impl fmt::Display for CertScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.15} (±{:.1e})",
            self.mid_f64(),
            self.width_f64() / 2.0
        )?;
        if let Some(cf) = &self.closed_form {
            write!(f, " = {cf}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CertScalarRepr {
    lo: String,
    hi: String,
    closed_form: Option<String>,
}

impl Serialize for CertScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CertScalarRepr {
            lo: self.lo.to_decimal_string(),
            hi: self.hi.to_decimal_string(),
            closed_form: self.closed_form.as_ref().map(|c| c.to_string()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CertScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = CertScalarRepr::deserialize(deserializer)?;
        let lo = Dyadic::from_decimal_exact(&repr.lo)
            .ok_or_else(|| D::Error::custom("lo is not a dyadic decimal"))?;
        let hi = Dyadic::from_decimal_exact(&repr.hi)
            .ok_or_else(|| D::Error::custom("hi is not a dyadic decimal"))?;
        if lo > hi {
            return Err(D::Error::custom("lo exceeds hi"));
        }
        let prec = (lo.bits().max(hi.bits()) as u32).max(32);
        let closed_form = repr
            .closed_form
            .map(|s| s.parse())
            .transpose()
            .map_err(D::Error::custom)?;
        Ok(CertScalar {
            lo,
            hi,
            precision_bits: prec,
            closed_form,
        })
    }
}

/// `Less` iff `x.hi < y.lo`, `Greater` iff `x.lo > y.hi`, otherwise `Unknown`.
pub fn cmp_certified(x: &CertScalar, y: &CertScalar) -> CertOrdering {
    if x.hi < y.lo {
        CertOrdering::Less
    } else if x.lo > y.hi {
        CertOrdering::Greater
    } else {
        CertOrdering::Unknown
    }
}

// ---------------------------------------------------------------------------
// Fixed-point kernels
// ---------------------------------------------------------------------------

const GUARD_BITS: u32 = 64;

static PI_CACHE: RwLock<Option<(u32, BigInt)>> = RwLock::new(None);

/// `sum_{j>=0} (-1)^j / ((2j+1) k^(2j+1))` scaled by `2^w`; returns (value, terms).
fn atan_inv_fixed(k: u64, w: u32) -> (BigInt, u64) {
    let k2 = BigInt::from(k) * k;
    let mut x = (BigInt::one() << w) / k;
    let mut sum = x.clone();
    let mut j = 1u64;
    loop {
        x = &x / &k2;
        if x.is_zero() {
            break;
        }
        let t = &x / (2 * j + 1);
        if j % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        j += 1;
    }
    (sum, j)
}

/// `floor(pi * 2^w)` up to 3 units in the last place.
fn pi_fixed(w: u32) -> BigInt {
    if let Some((cw, p)) = PI_CACHE.read().unwrap().as_ref() {
        if *cw >= w {
            return p >> (cw - w) as u64;
        }
    }
    let target = w.max(4096 + 2 * GUARD_BITS + 256);
    let guard = 32 + (32 - target.leading_zeros());
    let wg = target + guard;
    let (a5, _) = atan_inv_fixed(5, wg);
    let (a239, _) = atan_inv_fixed(239, wg);
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239); the guard bits absorb the
    // per-term truncation error (at most a few units per term).
    let p: BigInt = (a5 * 16 - a239 * 4) >> guard as u64;
    let mut cache = PI_CACHE.write().unwrap();
    if cache.as_ref().is_none_or(|(cw, _)| *cw < target) {
        *cache = Some((target, p.clone()));
    }
    p >> (target - w) as u64
}

/// Enclosure of pi.
pub fn pi(prec: u32) -> CertScalar {
    let w = prec + GUARD_BITS;
    let p = pi_fixed(w);
    CertScalar::outward(
        &Dyadic::new(&p - 3, -(w as i64)),
        &Dyadic::new(&p + 3, -(w as i64)),
        prec,
    )
}

/// Fixed-point `(cos r, sin r)` at scale `2^w` for `|r| <= 0.8 * 2^w`, with an error bound in ulps.
fn cos_sin_fixed(r: &BigInt, w: u32) -> (BigInt, BigInt, u64) {
    let one = BigInt::one() << w;
    let x2 = (r * r) >> w as u64;
    let mut c = one.clone();
    let mut term = one;
    let mut k = 1u64;
    loop {
        term = ((&term * &x2) >> w as u64) / ((2 * k - 1) * (2 * k));
        if term.is_zero() {
            break;
        }
        if k % 2 == 1 {
            c -= &term;
        } else {
            c += &term;
        }
        k += 1;
    }
    let mut s = r.clone();
    let mut term = r.clone();
    let mut j = 1u64;
    loop {
        term = ((&term * &x2) >> w as u64) / ((2 * j) * (2 * j + 1));
        if term.is_zero() {
            break;
        }
        if j % 2 == 1 {
            s -= &term;
        } else {
            s += &term;
        }
        j += 1;
    }
    let n = k.max(j);
    (c, s, 8 * n + 16)
}

fn fixed_enclosure(v: &BigInt, err: u64, w: u32, prec: u32) -> CertScalar {
    let e = w as i64;
    CertScalar::outward(&Dyadic::new(v - err, -e), &Dyadic::new(v + err, -e), prec)
}

fn unit_clamp(x: CertScalar) -> CertScalar {
    x.clamp(&Dyadic::from_i64(-1), &Dyadic::from_i64(1))
}

/// Enclosures of `(cos x, sin x)` for every real in the thin interval `x`.
pub fn cos_sin(x: &CertScalar, prec: u32) -> (CertScalar, CertScalar) {
    let m = x.mid();
    let rad = x.width().shl(-1);
    let approx = m.to_f64();
    assert!(approx.abs() < 1e15, "argument too large for cos/sin");
    let k = (approx / std::f64::consts::FRAC_PI_2).round() as i64;
    let w = prec + GUARD_BITS + (64 - k.unsigned_abs().leading_zeros());
    let pi_w = pi_fixed(w);
    let r = m.to_fixed_floor(w) - ((&pi_w * k) >> 1u64);
    let reduce_err = 3 + 2 * k.unsigned_abs();
    let (c, s, e) = cos_sin_fixed(&r, w);
    let err = e + reduce_err;
    let (cv, sv) = match k.rem_euclid(4) {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    };
    let widen = |v: &BigInt| {
        let base = fixed_enclosure(v, err, w, prec + 8);
        let pad = CertScalar::new(rad.neg(), rad.clone(), prec + 8);
        let out = base.add(&pad);
        unit_clamp(CertScalar::outward(out.lo(), out.hi(), prec))
    };
    (widen(&cv), widen(&sv))
}

pub fn cos(x: &CertScalar, prec: u32) -> CertScalar {
    cos_sin(x, prec).0
}

pub fn sin(x: &CertScalar, prec: u32) -> CertScalar {
    cos_sin(x, prec).1
}

/// Exact algebraic values of `cos(pi n / d)` for `d <= 6`.
fn cos_pi_small(n: u64, d: u64, prec: u32) -> Option<CertScalar> {
    let p = prec + 8;
    let half = |x: CertScalar| x.scale_pow2(-1);
    let sqrt = |v: i64| CertScalar::from_i64(v, p).sqrt();
    let v = match (n, d) {
        (0, 1) => CertScalar::from_i64(1, p),
        (1, 1) => CertScalar::from_i64(-1, p),
        (1, 2) => CertScalar::from_i64(0, p),
        (1, 3) => half(CertScalar::from_i64(1, p)),
        (2, 3) => half(CertScalar::from_i64(-1, p)),
        (1, 4) => half(sqrt(2)),
        (3, 4) => half(sqrt(2)).neg(),
        (1, 5) => sqrt(5).add(&CertScalar::from_i64(1, p)).scale_pow2(-2),
        (2, 5) => sqrt(5).sub(&CertScalar::from_i64(1, p)).scale_pow2(-2),
        (3, 5) => sqrt(5)
            .sub(&CertScalar::from_i64(1, p))
            .scale_pow2(-2)
            .neg(),
        (4, 5) => sqrt(5)
            .add(&CertScalar::from_i64(1, p))
            .scale_pow2(-2)
            .neg(),
        (1, 6) => half(sqrt(3)),
        (5, 6) => half(sqrt(3)).neg(),
        _ => return None,
    };
    Some(CertScalar::outward(v.lo(), v.hi(), prec))
}

/// Enclosure of `cos(pi p / q)` of width at most `2^(4 - prec)`.
pub fn cos_pi_rational(p: i64, q: u64, prec: u32) -> CertScalar {
    assert!(q >= 1, "denominator must be positive");
    let a = canonicalize(p, q as i64);
    cos_of_angle(&a, prec)
}

/// Enclosure of `cos(a)` for a canonical rational angle.
pub fn cos_of_angle(a: &RationalAngle, prec: u32) -> CertScalar {
    let (n, d) = (a.numer(), a.denom());
    if let Some(v) = cos_pi_small(n, d, prec) {
        return v;
    }
    // Fold to (0, pi/2] and flip the sign for the obtuse half.
    let (n, negate) = if 2 * n > d { (d - n, true) } else { (n, false) };
    let w = prec + GUARD_BITS;
    let pi_w = pi_fixed(w);
    // Above pi/4 evaluate sin(pi/2 - x) = sin(pi (d - 2n) / (2d)) instead.
    let use_sin = 4 * n > d;
    let (num, den) = if use_sin { (d - 2 * n, 2 * d) } else { (n, d) };
    let r = (&pi_w * num) / den;
    let (c, s, e) = cos_sin_fixed(&r, w);
    let v = if use_sin { s } else { c };
    let v = if negate { -v } else { v };
    unit_clamp(fixed_enclosure(&v, e + 4, w, prec))
}

/// `atan(x)` for a thin interval `x`.
pub fn atan(x: &CertScalar, prec: u32) -> CertScalar {
    let p = prec + 16;
    if x.hi().signum() < 0 {
        return atan(&x.neg(), prec).neg();
    }
    if x.lo().signum() < 0 {
        // Straddles zero: atan is 1-Lipschitz and vanishes at 0.
        let r = x.abs().hi().clone();
        return CertScalar::outward(&r.neg(), &r, prec);
    }
    let one = CertScalar::from_i64(1, p);
    if x.lo() > &Dyadic::from_i64(1) {
        let inv = one.div(x);
        return CertScalar::outward(
            pi(p).scale_pow2(-1).sub(&atan(&inv, p)).lo(),
            pi(p).scale_pow2(-1).sub(&atan(&inv, p)).hi(),
            prec,
        );
    }
    // Halve the argument three times: atan(t) = 2 atan(t / (1 + sqrt(1 + t^2))).
    let mut t = CertScalar::outward(x.lo(), x.hi(), p);
    for _ in 0..3 {
        let denom = one.add(&one.add(&t.mul(&t)).sqrt());
        t = t.div(&denom);
    }
    let m = CertScalar::exact(t.mid(), p);
    let rad = t.width().shl(-1);
    let m2 = m.mul(&m);
    let eps = Dyadic::new(BigInt::one(), -(p as i64) - 8);
    let mut sum = m.clone();
    let mut power = m.clone();
    let mut j = 1i64;
    loop {
        power = power.mul(&m2);
        let term = power.div(&CertScalar::from_i64(2 * j + 1, p));
        sum = if j % 2 == 1 {
            sum.sub(&term)
        } else {
            sum.add(&term)
        };
        if term.abs().hi() < &eps {
            // Alternating with decreasing terms: the tail is below the last term.
            let tail = term.abs().hi().clone();
            sum = sum.add(&CertScalar::new(tail.neg(), tail, p));
            break;
        }
        j += 1;
    }
    let sum = sum.add(&CertScalar::new(rad.neg(), rad, p)).scale_pow2(3);
    CertScalar::outward(sum.lo(), sum.hi(), prec)
}

/// `arccos(y)` for a thin interval inside `[-1, 1]`.
pub fn arccos(y: &CertScalar, prec: u32) -> CertScalar {
    let p = prec + 16;
    let one = CertScalar::from_i64(1, p);
    let minus_one = Dyadic::from_i64(-1);
    assert!(
        y.lo() >= &minus_one && y.hi() <= &Dyadic::from_i64(1),
        "arccos argument outside [-1, 1]"
    );
    if y.lo() == &minus_one {
        return pi(prec);
    }
    // arccos(y) = 2 atan(sqrt((1 - y) / (1 + y))), decreasing in y.
    let t = one.sub(y).div(&one.add(y));
    let t = t.clamp(&Dyadic::zero(), t.hi()).sqrt();
    let r = atan(&t, p).scale_pow2(1);
    CertScalar::outward(r.lo(), r.hi(), prec)
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// One signed cosine term `sign * cos(angle)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosTerm {
    pub sign: i8,
    pub angle: RationalAngle,
}

/// Recognized exact constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ClosedForm {
    ThreeHalves,
    Sqrt2,
    Sqrt5Over2,
    EightOver3Sqrt3,
    Two,
    /// `sum of sign * cos(angle)`.
    CosSum(Vec<CosTerm>),
}

impl ClosedForm {
    /// Constants tried by [`ClosedForm::recognize`].
    pub const CATALOG: [ClosedForm; 5] = [
        ClosedForm::Sqrt5Over2,
        ClosedForm::Sqrt2,
        ClosedForm::ThreeHalves,
        ClosedForm::EightOver3Sqrt3,
        ClosedForm::Two,
    ];

    /// Normalized sum: every term rewritten with a `+` sign (`-cos b = cos(pi - b)`),
    /// zero terms dropped, cancelling pairs removed, sorted.
    pub fn cos_sum(terms: impl IntoIterator<Item = CosTerm>) -> ClosedForm {
        let half = canonicalize(1, 2);
        let mut out: Vec<CosTerm> = terms
            .into_iter()
            .map(|t| {
                if t.sign < 0 {
                    CosTerm {
                        sign: 1,
                        angle: t.angle.supplement(),
                    }
                } else {
                    t
                }
            })
            .filter(|t| t.angle != half)
            .collect();
        out.sort();
        // cos(b) + cos(pi - b) = 0
        let mut i = 0;
        while i < out.len() {
            let partner = out[i].angle.supplement();
            if let Some(j) = out
                .iter()
                .enumerate()
                .position(|(j, t)| j != i && t.angle == partner)
            {
                let (a, b) = (i.min(j), i.max(j));
                out.remove(b);
                out.remove(a);
                i = 0;
            } else {
                i += 1;
            }
        }
        ClosedForm::CosSum(out)
    }

    /// `cos(x) + cos(y)` for canonical angles, normalized.
    pub fn cos_pair(x: RationalAngle, y: RationalAngle) -> ClosedForm {
        ClosedForm::cos_sum([CosTerm { sign: 1, angle: x }, CosTerm { sign: 1, angle: y }])
    }

    pub fn eval(&self, prec: u32) -> CertScalar {
        let p = prec + 8;
        let v = match self {
            ClosedForm::ThreeHalves => CertScalar::from_i64(3, p).scale_pow2(-1),
            ClosedForm::Two => CertScalar::from_i64(2, p),
            ClosedForm::Sqrt2 => CertScalar::from_i64(2, p).sqrt(),
            ClosedForm::Sqrt5Over2 => CertScalar::from_i64(5, p).sqrt().scale_pow2(-1),
            ClosedForm::EightOver3Sqrt3 => CertScalar::from_i64(3, p)
                .sqrt()
                .mul_i64(8)
                .div(&CertScalar::from_i64(9, p)),
            ClosedForm::CosSum(terms) => terms.iter().fold(CertScalar::from_i64(0, p), |acc, t| {
                let c = cos_of_angle(&t.angle, p);
                if t.sign < 0 {
                    acc.sub(&c)
                } else {
                    acc.add(&c)
                }
            }),
        };
        CertScalar::outward(v.lo(), v.hi(), prec).with_closed_form(Some(self.clone()))
    }

    /// Exact rational value, when the constant is rational.
    pub fn as_rational(&self) -> Option<(i64, i64)> {
        match self {
            ClosedForm::ThreeHalves => Some((3, 2)),
            ClosedForm::Two => Some((2, 1)),
            ClosedForm::CosSum(t) if t.is_empty() => Some((0, 1)),
            _ => None,
        }
    }

    /// The catalog constant whose enclosure overlaps `x`, provided `x` is
    /// already narrower than `tol_width`. Numeric certification only.
    pub fn recognize(x: &CertScalar, tol_width: f64) -> Option<ClosedForm> {
        if x.width_f64() > tol_width {
            return None;
        }
        ClosedForm::CATALOG.into_iter().find(|c| {
            let e = c.eval(x.precision_bits().max(64));
            e.width_f64() <= tol_width && e.overlaps(x)
        })
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedForm::ThreeHalves => f.write_str("three-halves"),
            ClosedForm::Sqrt2 => f.write_str("sqrt2"),
            ClosedForm::Sqrt5Over2 => f.write_str("sqrt5-over-2"),
            ClosedForm::EightOver3Sqrt3 => f.write_str("eight-over-3sqrt3"),
            ClosedForm::Two => f.write_str("two"),
            ClosedForm::CosSum(terms) => {
                f.write_str("cos-sum(")?;
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}{}", if t.sign < 0 { '-' } else { '+' }, t.angle)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for ClosedForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "three-halves" => ClosedForm::ThreeHalves,
            "sqrt2" => ClosedForm::Sqrt2,
            "sqrt5-over-2" => ClosedForm::Sqrt5Over2,
            "eight-over-3sqrt3" => ClosedForm::EightOver3Sqrt3,
            "two" => ClosedForm::Two,
            other => {
                let inner = other
                    .strip_prefix("cos-sum(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::InvalidInput(format!("unknown closed form {other:?}")))?;
                let mut terms = Vec::new();
                for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    let (sign, rest) = match tok.as_bytes()[0] {
                        b'+' => (1, &tok[1..]),
                        b'-' => (-1, &tok[1..]),
                        _ => (1, tok),
                    };
                    terms.push(CosTerm {
                        sign,
                        angle: rest.parse()?,
                    });
                }
                ClosedForm::CosSum(terms)
            }
        })
    }
}

impl Serialize for ClosedForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClosedForm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

/// Something that can be re-evaluated at a requested precision.
pub trait Computation: Sync {
    fn eval_at(&self, prec: u32) -> Result<CertScalar>;
}

impl<F> Computation for F
where
    F: Fn(u32) -> Result<CertScalar> + Sync,
{
    fn eval_at(&self, prec: u32) -> Result<CertScalar> {
        self(prec)
    }
}

impl Computation for ClosedForm {
    fn eval_at(&self, prec: u32) -> Result<CertScalar> {
        Ok(self.eval(prec))
    }
}

/// A fixed enclosure: re-evaluation returns it unchanged.
impl Computation for CertScalar {
    fn eval_at(&self, _prec: u32) -> Result<CertScalar> {
        Ok(self.clone())
    }
}

fn next_precision(prec: u32, cap: u32) -> Option<u32> {
    (prec < cap).then(|| (prec.saturating_mul(2)).min(cap))
}

/// Re-evaluates, doubling precision, until the width is at most `target_width`.
/// Successive enclosures are intersected so the result never widens.
pub fn refine(comp: &dyn Computation, target_width: f64, cfg: &Config) -> Result<CertScalar> {
    assert!(target_width > 0.0, "target width must be positive");
    let target = Dyadic::from_f64(target_width);
    let mut prec = cfg.precision_bits;
    let mut best: Option<CertScalar> = None;
    loop {
        let x = comp.eval_at(prec)?;
        let x = match best {
            Some(b) => b
                .intersect(&x)
                .ok_or_else(|| Error::InvalidInput("inconsistent enclosures".into()))?,
            None => x,
        };
        if x.width() <= target {
            return Ok(x);
        }
        best = Some(x);
        prec =
            next_precision(prec, cfg.precision_cap).ok_or_else(|| Error::PrecisionExhausted {
                cap: cfg.precision_cap,
                context: format!("refining to width {target_width:e}"),
            })?;
    }
}

/// Certified strict comparison, escalating precision until the enclosures separate.
pub fn compare_refined(x: &dyn Computation, y: &dyn Computation, cfg: &Config) -> Result<Ordering> {
    let mut prec = cfg.precision_bits;
    loop {
        match cmp_certified(&x.eval_at(prec)?, &y.eval_at(prec)?) {
            CertOrdering::Less => return Ok(Ordering::Less),
            CertOrdering::Greater => return Ok(Ordering::Greater),
            CertOrdering::Unknown => {}
        }
        prec =
            next_precision(prec, cfg.precision_cap).ok_or_else(|| Error::PrecisionExhausted {
                cap: cfg.precision_cap,
                context: "separating two enclosures".into(),
            })?;
    }
}

/// Default width for closed-form coincidence checks.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-30;

/// True iff `x` and the closed form `c` both refine below `tol_width` and overlap;
/// false as soon as they are certified disjoint. Numeric certification, not proof.
pub fn matches_closed_form(
    x: &dyn Computation,
    c: &ClosedForm,
    tol_width: f64,
    cfg: &Config,
) -> Result<bool> {
    let tol = Dyadic::from_f64(tol_width);
    let mut prec = cfg.precision_bits;
    loop {
        let xv = x.eval_at(prec)?;
        let cv = c.eval(prec);
        if !xv.overlaps(&cv) {
            return Ok(false);
        }
        if xv.width() <= tol && cv.width() <= tol {
            return Ok(true);
        }
        prec =
            next_precision(prec, cfg.precision_cap).ok_or_else(|| Error::PrecisionExhausted {
                cap: cfg.precision_cap,
                context: format!("matching against {c}"),
            })?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn shift_right_rounds_toward_negative_infinity() {
        assert_eq!(BigInt::from(-5) >> 1u64, BigInt::from(-3));
        assert_eq!(
            shr_round(&BigInt::from(-5), 1, Rounding::Up),
            BigInt::from(-2)
        );
        assert_eq!(
            shr_round(&BigInt::from(5), 1, Rounding::Up),
            BigInt::from(3)
        );
    }

    #[test]
    fn dyadic_arithmetic_and_rounding() {
        let a = Dyadic::from_f64(1.5);
        let b = Dyadic::from_f64(0.25);
        assert_eq!(a.add(&b), Dyadic::from_f64(1.75));
        assert_eq!(a.mul(&b), Dyadic::from_f64(0.375));
        let third_lo = Dyadic::from_i64(1).div(&Dyadic::from_i64(3), 64, Rounding::Down);
        let third_hi = Dyadic::from_i64(1).div(&Dyadic::from_i64(3), 64, Rounding::Up);
        assert!(third_lo < third_hi);
        assert!(third_lo.mul(&Dyadic::from_i64(3)) < Dyadic::from_i64(1));
        assert!(third_hi.mul(&Dyadic::from_i64(3)) > Dyadic::from_i64(1));
        let s_lo = Dyadic::from_i64(2).sqrt(100, Rounding::Down);
        let s_hi = Dyadic::from_i64(2).sqrt(100, Rounding::Up);
        assert!(s_lo.mul(&s_lo) < Dyadic::from_i64(2) && s_hi.mul(&s_hi) > Dyadic::from_i64(2));
        assert_eq!(
            Dyadic::from_i64(9).sqrt(20, Rounding::Up),
            Dyadic::from_i64(3)
        );
    }

    #[test]
    fn decimal_strings_roundtrip() {
        for x in [0.0, 1.5, -0.375, 1e-20, 12345.0625, std::f64::consts::PI] {
            let d = Dyadic::from_f64(x);
            let s = d.to_decimal_string();
            assert_eq!(Dyadic::from_decimal_exact(&s), Some(d), "{s}");
        }
        assert_eq!(Dyadic::from_decimal_exact("0.1"), None);
        assert_eq!(
            Dyadic::from_decimal_exact("2.5e1"),
            Some(Dyadic::from_i64(25))
        );
    }

    #[test]
    fn pi_is_accurate() {
        let p = pi(128);
        assert!(p.contains_f64(std::f64::consts::PI) || p.width_f64() < 1e-30);
        assert!((p.mid_f64() - std::f64::consts::PI).abs() < 1e-15);
        // Cross-check two precisions.
        assert!(pi(1000).overlaps(&p));
        assert!(pi(1000).width_f64() < 1e-290);
    }

    #[test]
    fn cos_pi_rational_examples() {
        let c = cos_pi_rational(1, 3, 64);
        assert!(c.contains(&Dyadic::from_f64(0.5)));
        assert!(c.width_f64() < 1e-15);
        let golden = (1.0 + 5f64.sqrt()) / 4.0;
        let c = cos_pi_rational(1, 5, 64);
        assert!((c.mid_f64() - golden).abs() < 1e-15);
        let c = cos_pi_rational(0, 1, 64);
        assert!(c.is_exact() && c.contains(&Dyadic::from_i64(1)));
    }

    #[test]
    fn cos_pi_rational_golden_identity_against_series() {
        // cos(pi/5) via the general series path (7/35 is not reduced by the caller)
        // must agree with the golden-ratio shortcut.
        let a = RationalAngle::try_new(7, 35).unwrap();
        assert_eq!(a, canonicalize(1, 5));
        let shortcut = cos_of_angle(&a, 200);
        let x = pi(220).div(&CertScalar::from_i64(5, 220));
        let series = cos(&x, 200);
        assert!(shortcut.overlaps(&series));
        assert!(series.width_f64() < 1e-55);
    }

    #[test]
    fn width_bound_holds() {
        for prec in [32u32, 64, 128, 300] {
            for (p, q) in [(1, 7), (3, 11), (22, 23), (5, 12), (1, 1000)] {
                let c = cos_pi_rational(p, q, prec);
                assert!(
                    c.width() <= Dyadic::new(BigInt::one(), 4 - prec as i64),
                    "({p},{q},{prec})"
                );
            }
        }
    }

    #[test]
    fn cos_sin_general_arguments() {
        for x in [0.0, 0.3, 1.0, 2.5, -4.0, 10.0, 100.0, 123.456] {
            let xi = CertScalar::exact(Dyadic::from_f64(x), 128);
            let (c, s) = cos_sin(&xi, 128);
            assert!((c.mid_f64() - x.cos()).abs() < 1e-14, "cos {x}");
            assert!((s.mid_f64() - x.sin()).abs() < 1e-14, "sin {x}");
            assert!(c.width_f64() < 1e-30);
        }
    }

    #[test]
    fn atan_and_arccos() {
        for x in [0.0, 0.1, 0.5, 1.0, 3.0, -2.0] {
            let a = atan(&CertScalar::exact(Dyadic::from_f64(x), 128), 128);
            assert!((a.mid_f64() - f64::atan(x)).abs() < 1e-15, "atan {x}");
            assert!(a.width_f64() < 1e-30);
        }
        let half_pi = arccos(&CertScalar::from_i64(0, 128), 128);
        assert!(half_pi.overlaps(&pi(128).scale_pow2(-1)));
        let third = arccos(&CertScalar::from_decimal("0.5", 128).unwrap(), 128);
        assert!(third.overlaps(&pi(128).div(&CertScalar::from_i64(3, 128))));
        assert!(arccos(&CertScalar::from_i64(1, 128), 128).contains(&Dyadic::zero()));
    }

    #[test]
    fn cmp_examples() {
        let iv = |a: f64, b: f64| CertScalar::new(Dyadic::from_f64(a), Dyadic::from_f64(b), 64);
        assert_eq!(
            cmp_certified(&iv(0.1, 0.2), &iv(0.3, 0.4)),
            CertOrdering::Less
        );
        assert_eq!(
            cmp_certified(&iv(0.1, 0.35), &iv(0.3, 0.4)),
            CertOrdering::Unknown
        );
        assert_eq!(
            cmp_certified(
                &ClosedForm::Sqrt2.eval(64),
                &ClosedForm::ThreeHalves.eval(64)
            ),
            CertOrdering::Less
        );
    }

    #[test]
    fn refine_examples() {
        let c = refine(&ClosedForm::EightOver3Sqrt3, 1e-30, &cfg()).unwrap();
        assert!(c.width_f64() <= 1e-30);
        assert!((c.mid_f64() - 1.539600717839002).abs() < 1e-15);
        let zero = refine(&CertScalar::from_i64(0, 128), 1e-100, &cfg()).unwrap();
        assert!(zero.is_exact());
        let err = compare_refined(
            &ClosedForm::Sqrt2,
            &ClosedForm::Sqrt2,
            &Config {
                precision_cap: 512,
                ..cfg()
            },
        );
        assert!(matches!(err, Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn refine_never_widens() {
        let comp = |p: u32| Ok(cos_pi_rational(3, 17, p));
        let r = refine(&comp, 1e-200, &cfg()).unwrap();
        assert!(r.width_f64() <= 1e-200);
        assert!(
            cos_pi_rational(3, 17, 128).contains(r.lo())
                && cos_pi_rational(3, 17, 128).contains(r.hi())
        );
    }

    #[test]
    fn closed_form_matching() {
        let sum = |p: u32| Ok(cos_pi_rational(1, 5, p).add(&cos_pi_rational(2, 5, p)));
        assert!(matches_closed_form(&sum, &ClosedForm::Sqrt5Over2, 1e-30, &cfg()).unwrap());
        let off = CertScalar::new(
            Dyadic::from_f64(1.4961 - 1e-5),
            Dyadic::from_f64(1.4961 + 1e-5),
            64,
        );
        assert!(!matches_closed_form(&off, &ClosedForm::Sqrt2, 1e-30, &cfg()).unwrap());
        assert_eq!(
            ClosedForm::recognize(&ClosedForm::Sqrt2.eval(128), 1e-30),
            Some(ClosedForm::Sqrt2)
        );
        assert_eq!(
            ClosedForm::recognize(&cos_pi_rational(1, 7, 128), 1e-30),
            None
        );
    }

    #[test]
    fn cos_sum_normalization() {
        let a = |s: &str| s.parse::<RationalAngle>().unwrap();
        // -cos(8pi/11) + cos(24pi/11) = cos(3pi/11) + cos(2pi/11)
        let cf = ClosedForm::cos_sum([
            CosTerm {
                sign: -1,
                angle: a("8/11"),
            },
            CosTerm {
                sign: 1,
                angle: canonicalize(24, 11),
            },
        ]);
        assert_eq!(cf.to_string(), "cos-sum(+2/11,+3/11)");
        assert_eq!(cf.to_string().parse::<ClosedForm>().unwrap(), cf);
        assert!(ClosedForm::cos_pair(a("1/3"), a("2/3")).as_rational() == Some((0, 1)));
        let v = cf.eval(128);
        assert!((v.mid_f64() - 1.4961).abs() < 5e-5);
    }

    #[test]
    fn cert_scalar_json_roundtrip() {
        let x = ClosedForm::Sqrt5Over2.eval(128);
        let s = serde_json::to_string(&x).unwrap();
        let back: CertScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(back.lo(), x.lo());
        assert_eq!(back.hi(), x.hi());
        assert_eq!(back.closed_form(), x.closed_form());
    }

    fn oracle_cos_pi(p: i64, q: u64) -> f64 {
        // Independent: plain f64 after exact reduction modulo 2q.
        let r = p.rem_euclid(2 * q as i64) as f64;
        (std::f64::consts::PI * r / q as f64).cos()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn enclosure_soundness(p in -3000i64..3000, q in 1u64..2000, bits in 32u32..256) {
            let c = cos_pi_rational(p, q, bits);
            let o = oracle_cos_pi(p, q);
            // The f64 oracle carries ~1e-15 error; require containment of its neighbourhood midpoint.
            prop_assert!(c.lo_f64() <= o + 2e-15 && o - 2e-15 <= c.hi_f64());
            let hp = cos_pi_rational(p, q, 512);
            prop_assert!(c.overlaps(&hp));
        }

        #[test]
        fn periodicity(p in -500i64..500, q in 1u64..300) {
            let a = cos_pi_rational(p, q, 128);
            let b = cos_pi_rational(p + 2 * q as i64, q, 128);
            let c = cos_pi_rational(-p, q, 128);
            prop_assert!(a.overlaps(&b) && a.overlaps(&c));
        }

        #[test]
        fn cmp_is_antisymmetric(a in -2.0f64..2.0, b in 0.0f64..0.1, c in -2.0f64..2.0, d in 0.0f64..0.1) {
            let x = CertScalar::new(Dyadic::from_f64(a), Dyadic::from_f64(a + b), 64);
            let y = CertScalar::new(Dyadic::from_f64(c), Dyadic::from_f64(c + d), 64);
            let xy = cmp_certified(&x, &y);
            let yx = cmp_certified(&y, &x);
            match xy {
                CertOrdering::Less => { prop_assert_eq!(yx, CertOrdering::Greater); prop_assert!(x.mid_f64() < y.mid_f64()); }
                CertOrdering::Greater => { prop_assert_eq!(yx, CertOrdering::Less); prop_assert!(x.mid_f64() > y.mid_f64()); }
                CertOrdering::Unknown => prop_assert_eq!(yx, CertOrdering::Unknown),
            }
        }
    }
}
