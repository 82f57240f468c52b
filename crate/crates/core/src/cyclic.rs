//! `sup_{n>=1} |cos(na) - cos(nb)|` for rational angles.
//!
//! For angles of orders `u` and `v` the sequence `n -> (cos na, cos nb)` is
//! periodic with period `lcm(u, v)`, so the supremum is a finite maximum. All
//! `cos(n a)` values are entries of one table of `cos(pi j / L)`.
//!
//! The scan screens candidates in double precision and certifies every index
//! within [`SCREEN_MARGIN`] of the screened maximum with interval arithmetic.
//! The double-precision table error (below `1e-15`) is six orders of
//! magnitude under the margin, so no discarded index can attain the maximum.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::angle::{
    angles_up_to_order, canonicalize, checked_lcm, mod_inverse, RationalAngle, SymbolicAngle,
};
use crate::certified::{
    arccos, cmp_certified, cos_pi_rational, parse_decimal, CertOrdering, CertScalar, ClosedForm,
    CosTerm, Dyadic, CLOSED_FORM_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::par;
use crate::Config;

/// Largest period the cyclic scan accepts.
pub const PERIOD_LIMIT: u64 = 1_000_000;

/// Screening margin for the double-precision pass.
pub const SCREEN_MARGIN: f64 = 1e-9;

/// Minimum table precision; keeps closed-form recognition at `1e-30` possible.
const MIN_TABLE_PRECISION: u32 = 112;

/// Certified supremum with the smallest index attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupResult {
    pub value: CertScalar,
    pub witness_n: u64,
    pub period: u64,
}

/// `cos(pi j / L)` for `j = 0..=L`.
#[derive(Debug, Clone)]
pub struct CosTable {
    l: u64,
    approx: Vec<f64>,
    prec: u32,
}

impl CosTable {
    pub fn new(l: u64, prec: u32) -> Self {
        assert!(l >= 1);
        let approx = (0..=l)
            .map(|j| (std::f64::consts::PI * j as f64 / l as f64).cos())
            .collect();
        CosTable {
            l,
            approx,
            prec: prec.max(MIN_TABLE_PRECISION),
        }
    }

    /// A table on which both angles are exact multiples of `pi / L`.
    pub fn for_angles(a: &RationalAngle, b: &RationalAngle, prec: u32) -> Self {
        CosTable::new(a.denom().lcm(&b.denom()), prec)
    }

    pub fn len(&self) -> u64 {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index `j` with `cos(pi k / L) = cos(pi j / L)`, `0 <= j <= L`.
    fn fold(&self, k: u64) -> u64 {
        let r = k % (2 * self.l);
        if r > self.l {
            2 * self.l - r
        } else {
            r
        }
    }

    fn step(&self, a: &RationalAngle) -> u64 {
        assert!(
            self.l.is_multiple_of(a.denom()),
            "angle {a} is not on the table of size {}",
            self.l
        );
        a.numer() * (self.l / a.denom())
    }

    fn cert(&self, j: u64) -> CertScalar {
        cos_pi_rational(j as i64, self.l, self.prec)
    }
}

/// Double-precision scan of `|cos(n a) - cos(n b)|` for `n = 1..=period` on a table.
fn screen(t: &CosTable, sa: u64, sb: u64, period: u64) -> Vec<(u64, u64, u64, f64)> {
    let two_l = 2 * t.l;
    let mut best = f64::NEG_INFINITY;
    let mut vals = Vec::with_capacity(period as usize);
    let (mut ka, mut kb) = (0u64, 0u64);
    for n in 1..=period {
        ka = (ka + sa) % two_l;
        kb = (kb + sb) % two_l;
        let (ia, ib) = (t.fold(ka), t.fold(kb));
        let d = (t.approx[ia as usize] - t.approx[ib as usize]).abs();
        best = best.max(d);
        vals.push((n, ia, ib, d));
    }
    vals.retain(|v| v.3 >= best - SCREEN_MARGIN);
    vals
}

fn period_of(a: &RationalAngle, b: &RationalAngle) -> Result<u64> {
    let u = checked_lcm(a.order(), b.order()).unwrap_or(u64::MAX);
    if u > PERIOD_LIMIT {
        return Err(Error::PeriodOverflow {
            period: u,
            limit: PERIOD_LIMIT,
        });
    }
    Ok(u)
}

/// `sup_n |cos(na) - cos(nb)|` using a prebuilt table whose size is a multiple of both denominators.
pub fn sup_distance_on(t: &CosTable, a: &RationalAngle, b: &RationalAngle) -> Result<SupResult> {
    let period = period_of(a, b)?;
    if a == b {
        return Ok(SupResult {
            value: CertScalar::from_i64(0, t.prec),
            witness_n: 1,
            period,
        });
    }
    let candidates = screen(t, t.step(a), t.step(b), period);
    // Values depend only on the folded index pair.
    let mut seen = HashSet::new();
    let mut certified: Vec<(u64, CertScalar)> = Vec::new();
    for (n, ia, ib, _) in candidates {
        if seen.insert((ia, ib)) {
            certified.push((n, t.cert(ia).sub(&t.cert(ib)).abs()));
        }
    }
    let value = certified
        .iter()
        .skip(1)
        .fold(certified[0].1.clone(), |acc, (_, d)| acc.max(d));
    // Smallest index not certified strictly below the maximum; enclosures that
    // cannot be separated are treated as ties.
    let witness_n = certified
        .iter()
        .filter(|(_, d)| cmp_certified(d, &value) != CertOrdering::Less)
        .map(|(n, _)| *n)
        .min()
        .expect("the maximum is attained");
    let tag = closed_form_of(&value, a, b, witness_n);
    Ok(SupResult {
        value: value.with_closed_form(tag),
        witness_n,
        period,
    })
}

fn closed_form_of(
    value: &CertScalar,
    a: &RationalAngle,
    b: &RationalAngle,
    n: u64,
) -> Option<ClosedForm> {
    if value.hi().is_zero() {
        return None;
    }
    if let Some(c) = ClosedForm::recognize(value, CLOSED_FORM_TOLERANCE) {
        return Some(c);
    }
    let (x, y) = (a.multiple(n as i64), b.multiple(n as i64));
    // cos(x) - cos(y) with x < y in [0, pi] is the positive difference.
    let (hi, lo) = if x < y { (x, y) } else { (y, x) };
    let cf = ClosedForm::cos_sum([
        CosTerm { sign: 1, angle: hi },
        CosTerm {
            sign: -1,
            angle: lo,
        },
    ]);
    let e = cf.eval(value.precision_bits());
    (e.overlaps(value) && value.width_f64() <= CLOSED_FORM_TOLERANCE).then_some(cf)
}

/// `sup_{n>=1} |cos(na) - cos(nb)|`, attained within one period `lcm(ord a, ord b)`.
pub fn sup_distance(a: &RationalAngle, b: &RationalAngle, cfg: &Config) -> Result<SupResult> {
    period_of(a, b)?;
    sup_distance_on(&CosTable::for_angles(a, b, cfg.precision_bits), a, b)
}

/// `sup_distance(a, 3a)`.
pub fn sup_distance_to_triple(a: &RationalAngle, cfg: &Config) -> Result<SupResult> {
    sup_distance(a, &a.multiple(3), cfg)
}

/// Relation between the orders of a pair of distinct rational angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairCase {
    /// Equal orders `u`: canonical pair `(2 pi / u, 2 pi w / u)`, `2 <= w <= u/2`.
    SameOrder,
    /// `ord b = 3 ord a = 3u`: canonical pair `(2 pi / 3u, 2 pi w / u)`.
    TripleOrder,
    /// `ord a = 3 ord b`, `u = ord a`: canonical pair `(2 pi / u, 6 pi w / u)`.
    ThirdOrder,
    /// Any other relation; the supremum is at least `1 + cos(pi / 5)`.
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReduction {
    pub case: PairCase,
    pub u: u64,
    pub w: Option<u64>,
}

impl PairReduction {
    /// The canonical pair with the same supremum, when one exists.
    pub fn canonical_pair(&self) -> Option<(RationalAngle, RationalAngle)> {
        let (u, w) = (self.u as i64, self.w? as i64);
        Some(match self.case {
            PairCase::SameOrder => (canonicalize(2, u), canonicalize(2 * w, u)),
            PairCase::TripleOrder => (canonicalize(2, 3 * u), canonicalize(2 * w, u)),
            PairCase::ThirdOrder => (canonicalize(2, u), canonicalize(6 * w, u)),
            PairCase::Far => return None,
        })
    }
}

fn fold_half(w: u64, m: u64) -> u64 {
    w.min(m - w)
}

/// Classifies a pair by its orders and returns the canonical `w` via a Bezout multiplier.
///
/// Multiplying `n` by an integer `gamma` coprime to the period permutes the
/// residues, so the supremum is unchanged; `gamma` is chosen to send one angle
/// to its primitive representative.
pub fn reduce_pair(a: &RationalAngle, b: &RationalAngle) -> Result<PairReduction> {
    if a == b {
        return Err(Error::InvalidInput(format!(
            "reduce_pair needs distinct angles, got {a} twice"
        )));
    }
    let (u, v) = (a.order(), b.order());
    let (alpha, beta) = (a.primitive_index(), b.primitive_index());
    let inv = |x: u64, m: u64| mod_inverse(x % m, m).expect("primitive index is a unit");
    if u == v {
        let gamma = inv(alpha, u);
        let w = fold_half(((beta as u128 * gamma as u128) % u as u128) as u64, u);
        Ok(PairReduction {
            case: PairCase::SameOrder,
            u,
            w: Some(w),
        })
    } else if v == 3 * u {
        let gamma = inv(beta, v);
        let w = if u <= 2 {
            1
        } else {
            fold_half(((alpha as u128 * gamma as u128) % u as u128) as u64, u)
        };
        Ok(PairReduction {
            case: PairCase::TripleOrder,
            u,
            w: Some(w),
        })
    } else if u == 3 * v {
        let gamma = inv(alpha, u);
        let w = if v <= 2 {
            1
        } else {
            fold_half(((beta as u128 * gamma as u128) % v as u128) as u64, v)
        };
        Ok(PairReduction {
            case: PairCase::ThirdOrder,
            u,
            w: Some(w),
        })
    } else {
        Ok(PairReduction {
            case: PairCase::Far,
            u,
            w: None,
        })
    }
}

/// A threshold `m`, either an exact decimal or a recognized closed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Threshold {
    /// `numer / 10^pow10`.
    Decimal {
        numer: BigInt,
        pow10: i64,
    },
    Closed(ClosedForm),
}

/// Outcome of a `value <= m` test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub holds: bool,
    /// False when the enclosures overlap and no closed form settles equality.
    pub certified: bool,
}

impl Threshold {
    pub fn closed(c: ClosedForm) -> Self {
        Threshold::Closed(c)
    }

    pub fn decimal(s: &str) -> Result<Self> {
        let (numer, pow10) = parse_decimal(s)?;
        Ok(Threshold::Decimal { numer, pow10 })
    }

    pub fn enclosure(&self, prec: u32) -> CertScalar {
        match self {
            Threshold::Closed(c) => c.eval(prec),
            Threshold::Decimal { numer, pow10 } => {
                if *pow10 <= 0 {
                    CertScalar::exact(
                        Dyadic::new(numer * BigInt::from(10).pow((-pow10) as u32), 0),
                        prec,
                    )
                } else {
                    CertScalar::from_ratio(numer, &BigInt::from(10).pow(*pow10 as u32), prec)
                }
            }
        }
    }

    pub fn approx(&self) -> f64 {
        self.enclosure(64).mid_f64()
    }

    /// True when the threshold is exactly the rational `p / q`.
    fn equals_rational(&self, p: i64, q: i64) -> bool {
        match self {
            Threshold::Closed(c) => c.as_rational() == Some((p, q)),
            Threshold::Decimal { numer, pow10 } => {
                let (lhs, rhs) = if *pow10 >= 0 {
                    (
                        numer * q,
                        BigInt::from(p) * BigInt::from(10).pow(*pow10 as u32),
                    )
                } else {
                    (
                        numer * q * BigInt::from(10).pow((-pow10) as u32),
                        BigInt::from(p),
                    )
                };
                lhs == rhs
            }
        }
    }

    /// Decides `x <= m`. Boundary cases are settled by closed-form coincidence
    /// (numeric certification at `1e-30`), otherwise reported uncertified.
    pub fn decide_le(&self, x: &CertScalar) -> Decision {
        let prec = x.precision_bits().max(MIN_TABLE_PRECISION);
        let m = self.enclosure(prec);
        match cmp_certified(x, &m) {
            CertOrdering::Less => {
                return Decision {
                    holds: true,
                    certified: true,
                }
            }
            CertOrdering::Greater => {
                return Decision {
                    holds: false,
                    certified: true,
                }
            }
            CertOrdering::Unknown => {}
        }
        if let Some((p, q)) = x.closed_form().and_then(ClosedForm::as_rational) {
            if self.equals_rational(p, q) {
                return Decision {
                    holds: true,
                    certified: true,
                };
            }
        }
        if let Threshold::Closed(c) = self {
            if x.closed_form() == Some(c)
                || (x.width_f64() <= CLOSED_FORM_TOLERANCE
                    && m.width_f64() <= CLOSED_FORM_TOLERANCE)
            {
                return Decision {
                    holds: true,
                    certified: true,
                };
            }
        }
        Decision {
            holds: x.mid() <= m.mid(),
            certified: false,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Closed(c) => write!(f, "{c}"),
            Threshold::Decimal { numer, pow10 } => {
                let s = numer.to_string();
                let (sign, digits) = match s.strip_prefix('-') {
                    Some(d) => ("-", d),
                    None => ("", s.as_str()),
                };
                if *pow10 <= 0 {
                    return write!(f, "{sign}{digits}{}", "0".repeat((-pow10) as usize));
                }
                let k = *pow10 as usize;
                let digits = format!("{digits:0>width$}", width = k + 1);
                let (int, frac) = digits.split_at(digits.len() - k);
                write!(f, "{sign}{int}.{frac}")
            }
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with(|c: char| c.is_ascii_alphabetic()) {
            Ok(Threshold::Closed(s.parse()?))
        } else {
            Threshold::decimal(s)
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// `Gamma(base, m)`: angles whose cosine sequence stays within `m` of the base's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleSet {
    pub threshold_m: Threshold,
    pub base: RationalAngle,
    pub members: Vec<RationalAngle>,
    /// False if any membership decision sat on an unresolved boundary.
    pub certified: bool,
}

/// Largest order enumerated for `Gamma(0, m)`.
pub const GAMMA_ORDER_LIMIT: u64 = 100_000;

/// An angle of order `q` has `sup_n |1 - cos(nb)| = 1 + cos(pi/q)` (odd `q`) or `2` (even `q`),
/// so only `q <= pi / arccos(m - 1)` can qualify.
pub fn gamma_order_bound(m: &Threshold) -> Result<u64> {
    let mf = m.approx();
    if !(0.0..2.0).contains(&mf) {
        return Err(Error::InvalidInput(format!(
            "threshold {m} must lie in [0, 2)"
        )));
    }
    if mf <= 1.0 {
        return Ok(2);
    }
    let q = (std::f64::consts::PI / (mf - 1.0).acos()).floor() + 2.0;
    if q > GAMMA_ORDER_LIMIT as f64 {
        return Err(Error::InvalidInput(format!(
            "threshold {m} is too close to 2 to enumerate"
        )));
    }
    Ok(q as u64)
}

fn filter_members(
    base: &RationalAngle,
    candidates: Vec<RationalAngle>,
    m: &Threshold,
    cfg: &Config,
) -> Result<(Vec<RationalAngle>, bool)> {
    let decisions = par::map(cfg.execution, &candidates, |b| {
        sup_distance(base, b, cfg).map(|s| m.decide_le(&s.value))
    });
    let mut members = Vec::new();
    let mut certified = true;
    for (b, d) in candidates.into_iter().zip(decisions) {
        let d = d?;
        certified &= d.certified;
        if d.holds {
            members.push(b);
        }
    }
    members.sort();
    Ok((members, certified))
}

/// `Gamma(0, m)` by enumeration of orders up to [`gamma_order_bound`].
pub fn gamma_zero(m: &Threshold, cfg: &Config) -> Result<AngleSet> {
    let bound = gamma_order_bound(m)?;
    let (members, certified) =
        filter_members(&RationalAngle::ZERO, angles_up_to_order(bound), m, cfg)?;
    Ok(AngleSet {
        threshold_m: m.clone(),
        base: RationalAngle::ZERO,
        members,
        certified,
    })
}

/// `Gamma(a, m)`: if `b` qualifies then `ub` lies in `Gamma(0, m)` for `u = ord a`,
/// so `b = (+-c + 2 k pi) / u` for some member `c`; every lift is then checked.
pub fn gamma(a: &RationalAngle, m: &Threshold, cfg: &Config) -> Result<AngleSet> {
    let zero_set = gamma_zero(m, cfg)?;
    let u = a.order() as i64;
    let mut lifts = BTreeSet::new();
    for c in &zero_set.members {
        let (n, d) = (c.numer() as i64, c.denom() as i64);
        for k in 0..u {
            for sign in [1, -1] {
                lifts.insert(canonicalize(sign * n + 2 * k * d, d * u));
            }
        }
    }
    let (members, certified) = filter_members(a, lifts.into_iter().collect(), m, cfg)?;
    Ok(AngleSet {
        threshold_m: m.clone(),
        base: *a,
        members,
        certified: certified && zero_set.certified,
    })
}

/// [`gamma`] for a possibly irrational base; irrational input is rejected.
pub fn gamma_symbolic(a: &SymbolicAngle, m: &Threshold, cfg: &Config) -> Result<AngleSet> {
    match a {
        SymbolicAngle::Rational(r) => gamma(r, m, cfg),
        SymbolicAngle::IrrationalMultipleOfPi => {
            Err(Error::IrrationalUnsupported("gamma enumeration"))
        }
    }
}

/// Value of the cardinality bound `2 (pi / arccos(m - 1))^7`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum CardBound {
    Finite(CertScalar),
    /// The bound diverges or exceeds the configured cap.
    Unbounded,
}

/// Default cap above which [`gamma_card_bound`] reports [`CardBound::Unbounded`].
pub const CARD_BOUND_CAP: f64 = 1e15;

pub fn gamma_card_bound(m: &CertScalar, cap: f64, cfg: &Config) -> Result<CardBound> {
    let prec = cfg.precision_bits;
    let one = CertScalar::from_i64(1, prec);
    if m.lo() < &Dyadic::zero() {
        return Err(Error::InvalidInput("threshold must be nonnegative".into()));
    }
    if m.hi() >= &Dyadic::from_i64(2) {
        return Ok(CardBound::Unbounded);
    }
    let ac = arccos(&m.sub(&one), prec);
    if ac.lo().signum() <= 0 {
        return Ok(CardBound::Unbounded);
    }
    let ratio = crate::certified::pi(prec).div(&ac);
    let mut p = CertScalar::from_i64(2, prec);
    for _ in 0..7 {
        p = p.mul(&ratio);
    }
    if p.lo_f64() > cap {
        return Ok(CardBound::Unbounded);
    }
    Ok(CardBound::Finite(p))
}

/// Plain double-precision maximum over one period and its first attaining index
/// (within `1e-12`). An oracle independent of the certified path.
pub fn brute_force_sup(a: &RationalAngle, b: &RationalAngle) -> (f64, u64) {
    let u = a.order().lcm(&b.order());
    let vals: Vec<f64> = (1..=u as i64)
        .map(|n| (a.cos_multiple_f64(n) - b.cos_multiple_f64(n)).abs())
        .collect();
    let best = vals.iter().cloned().fold(0.0, f64::max);
    let n = vals.iter().position(|&v| v >= best - 1e-12).unwrap() as u64 + 1;
    (best, n)
}
