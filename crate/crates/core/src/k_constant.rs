//! The rigidity constant `k(a)` and the sets `Omega(m) = {a : k(a) <= m}`.
//!
//! For a rational angle of order `u`,
//! `k = min(sigma(u), theta(u))`, and additionally `sigma(u / 3)` when `3 | u`, where
//! `sigma(u) = min_{w in Delta(u)} sup_n |cos(2 n pi / 3u) - cos(2 n w pi / u)|` and
//! `theta(u) = min_{w in Delta_1(u)} sup_n |cos(2 n pi / u) - cos(2 n w pi / u)|` (`2` if empty).
//! Irrational multiples of pi have `k = 8 / (3 sqrt 3)`.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::angle::{angles_of_order, canonicalize, RationalAngle, SymbolicAngle};
use crate::certified::{
    cmp_certified, matches_closed_form, CertOrdering, CertScalar, ClosedForm, CLOSED_FORM_TOLERANCE,
};
use crate::cyclic::{
    brute_force_sup, sup_distance_on, sup_distance_to_triple, CosTable, SupResult, Threshold,
};
use crate::error::{Error, Result};
use crate::par;
use crate::real_sup::order_threshold;
use crate::Config;

/// `Delta(u)`: `1 <= s <= u/2` with `gcd(s, u) = 1`; `Delta(1) = {1}` by convention.
pub fn delta_set(u: u64) -> Vec<u64> {
    assert!(u >= 1);
    if u == 1 {
        return vec![1];
    }
    (1..=u / 2).filter(|s| s.gcd(&u) == 1).collect()
}

/// `Delta_1(u) = Delta(u) \ {1}`.
pub fn delta1_set(u: u64) -> Vec<u64> {
    delta_set(u).into_iter().filter(|&s| s != 1).collect()
}

/// Minimum of tagged enclosures; the tag of the smallest midpoint is kept.
fn min_tagged(values: Vec<SupResult>) -> CertScalar {
    let best = values
        .iter()
        .min_by(|a, b| a.value.mid().cmp(&b.value.mid()))
        .expect("nonempty")
        .value
        .clone();
    let all = values.iter().fold(best.clone(), |acc, s| acc.min(&s.value));
    all.with_closed_form(best.closed_form().cloned())
}

/// `sigma(u)`, computed on one table of size `3u`.
pub fn sigma(u: u64, cfg: &Config) -> Result<CertScalar> {
    let table = CosTable::new(3 * u, cfg.precision_bits);
    let a = canonicalize(2, 3 * u as i64);
    let sups = delta_set(u)
        .into_iter()
        .map(|w| sup_distance_on(&table, &a, &canonicalize(2 * w as i64, u as i64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(min_tagged(sups))
}

/// `theta(u)`; exactly `2` when `Delta_1(u)` is empty.
pub fn theta(u: u64, cfg: &Config) -> Result<CertScalar> {
    let ws = delta1_set(u);
    if ws.is_empty() {
        return Ok(ClosedForm::Two.eval(cfg.precision_bits));
    }
    let table = CosTable::new(u, cfg.precision_bits);
    let a = canonicalize(2, u as i64);
    let sups = ws
        .into_iter()
        .map(|w| sup_distance_on(&table, &a, &canonicalize(2 * w as i64, u as i64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(min_tagged(sups))
}

/// The constant `k(a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KValue {
    /// `a / pi` irrational: exactly `8 / (3 sqrt 3)`.
    MaxIrrational,
    Certified(CertScalar),
}

impl KValue {
    /// Enclosure of the value (tagged).
    pub fn value(&self, prec: u32) -> CertScalar {
        match self {
            KValue::MaxIrrational => ClosedForm::EightOver3Sqrt3.eval(prec),
            KValue::Certified(c) => c.clone(),
        }
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        match self {
            KValue::MaxIrrational => Some(ClosedForm::EightOver3Sqrt3),
            KValue::Certified(c) => c.closed_form().cloned(),
        }
    }

    pub fn is_irrational(&self) -> bool {
        matches!(self, KValue::MaxIrrational)
    }
}

#[derive(Serialize, Deserialize)]
struct KValueRepr {
    irrational: bool,
    #[serde(flatten)]
    value: CertScalar,
}

impl Serialize for KValue {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        KValueRepr {
            irrational: self.is_irrational(),
            value: self.value(128),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KValue {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let r = KValueRepr::deserialize(deserializer)?;
        Ok(if r.irrational {
            KValue::MaxIrrational
        } else {
            KValue::Certified(r.value)
        })
    }
}

/// `k` for any angle of order `u`.
pub fn k_of_order(u: u64, cfg: &Config) -> Result<KValue> {
    assert!(u >= 1);
    let mut parts = vec![sigma(u, cfg)?, theta(u, cfg)?];
    if u.is_multiple_of(3) {
        parts.push(sigma(u / 3, cfg)?);
    }
    let best = parts
        .iter()
        .min_by(|a, b| a.mid().cmp(&b.mid()))
        .cloned()
        .expect("nonempty");
    let all = parts.iter().fold(best.clone(), |acc, x| acc.min(x));
    Ok(KValue::Certified(
        all.with_closed_form(best.closed_form().cloned()),
    ))
}

pub fn k_of_angle(a: &SymbolicAngle, cfg: &Config) -> Result<KValue> {
    match a {
        SymbolicAngle::IrrationalMultipleOfPi => Ok(KValue::MaxIrrational),
        SymbolicAngle::Rational(r) => k_of_order(r.order(), cfg),
    }
}

/// Independent double-precision `k(a)`: the minimum of the cyclic sup against every
/// other angle of order at most `3 ord(a)` (pairs with other order relations stay
/// above `1.8`). Pairs with period above `3000` are skipped.
pub fn brute_force_k(a: &RationalAngle) -> f64 {
    let u = a.order();
    crate::angle::angles_up_to_order(3 * u)
        .into_iter()
        .filter(|b| b != a && a.order().lcm(&b.order()) <= 3000)
        .map(|b| brute_force_sup(a, &b).0)
        .fold(2.0, f64::min)
}

/// Angles listed by the reference classification of `Omega(3/2)`, as written
/// (one entry, `5/4`, lies outside `[0, 1]`).
pub const REFERENCE_OMEGA_THREE_HALVES: [&str; 43] = [
    "1/5", "2/5", "3/5", "4/5", //
    "1/8", "1/4", "3/8", "5/8", "5/4", "7/8", //
    "1/11", "2/11", "3/11", "4/11", "5/11", "6/11", "7/11", "8/11", "9/11", "10/11", //
    "0", "1/6", "1/3", "1/2", "2/3", "5/6", //
    "1/9", "2/9", "4/9", "5/9", "7/9", "8/9", //
    "1/12", "5/12", "7/12", //
    "1/15", "2/15", "4/15", "7/15", "8/15", "11/15", "13/15", "14/15",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscrepancyKind {
    /// Derived member missing from the reference list.
    PresentButUnlisted,
    /// Reference entry that the derivation excludes.
    ListedButAbsent,
    /// Reference entry outside `[0, pi]`; compared through its canonical form.
    Unlistable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// The angle as written (`p/q`, meaning `pi p / q`).
    pub angle: String,
    pub canonical: RationalAngle,
    pub kind: DiscrepancyKind,
    /// Double-precision `k` from [`brute_force_k`].
    pub oracle_k: f64,
    /// Whether the oracle places the canonical angle in `Omega(m)`.
    pub oracle_member: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaMember {
    pub angle: RationalAngle,
    pub order: u64,
    pub k: KValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaResult {
    pub m: Threshold,
    pub u0: u64,
    pub cutoff_order: u64,
    pub orders: Vec<u64>,
    pub members: Vec<OmegaMember>,
    pub certified: bool,
    pub discrepancies: Vec<Discrepancy>,
}

/// Pairs `(p, q)` whose order thresholds bound the `Omega` cutoff.
pub fn cutoff_pairs() -> Vec<(u64, u64)> {
    let mut pairs: Vec<(u64, u64)> = (2..=6).map(|w| (1, w)).collect();
    for w in 0..=6 {
        pairs.push((3, 3 * w + 1));
        pairs.push((3, 3 * w + 2));
    }
    pairs
}

/// Orders above which [`omega`] refuses to enumerate.
pub const OMEGA_CUTOFF_LIMIT: u64 = 5_000;

/// `Omega(m)` for `m` certified below `8 / (3 sqrt 3)`.
pub fn omega(m: &Threshold, cfg: &Config) -> Result<OmegaResult> {
    let prec = cfg.precision_bits;
    let m_enc = m.enclosure(prec);
    let ceiling = ClosedForm::EightOver3Sqrt3.eval(prec);
    if cmp_certified(&m_enc, &ceiling) != CertOrdering::Less {
        return Err(Error::ThresholdTooHigh(m.to_string()));
    }
    let pairs = cutoff_pairs();
    let thresholds = par::map(cfg.execution, &pairs, |&(p, q)| {
        order_threshold(p, q, &m_enc, cfg)
    });
    let u0 = thresholds
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(1);
    let cutoff_order = 21.max(3 * u0);
    if cutoff_order > OMEGA_CUTOFF_LIMIT {
        return Err(Error::InvalidInput(format!(
            "threshold {m} needs orders up to {cutoff_order}, above the limit {OMEGA_CUTOFF_LIMIT}"
        )));
    }
    let ks = par::map_range(cfg.execution, 1..cutoff_order + 1, |u| k_of_order(u, cfg));
    let mut orders = Vec::new();
    let mut members = Vec::new();
    let mut certified = true;
    for (u, k) in (1..=cutoff_order).zip(ks) {
        let k = k?;
        let d = m.decide_le(&k.value(prec));
        certified &= d.certified;
        if d.holds {
            orders.push(u);
            members.extend(angles_of_order(u).into_iter().map(|angle| OmegaMember {
                angle,
                order: u,
                k: k.clone(),
            }));
        }
    }
    members.sort_by_key(|a| a.angle);
    let discrepancies = if m.decide_le(&ClosedForm::ThreeHalves.eval(prec)).holds
        && Threshold::Closed(ClosedForm::ThreeHalves)
            .decide_le(&m_enc)
            .holds
    {
        three_halves_discrepancies(&members, m)
    } else {
        Vec::new()
    };
    Ok(OmegaResult {
        m: m.clone(),
        u0,
        cutoff_order,
        orders,
        members,
        certified,
        discrepancies,
    })
}

fn three_halves_discrepancies(members: &[OmegaMember], m: &Threshold) -> Vec<Discrepancy> {
    let limit = m.approx() + 1e-9;
    let adjudicate = |angle: String, canonical: RationalAngle, kind| {
        let oracle_k = brute_force_k(&canonical);
        Discrepancy {
            angle,
            canonical,
            kind,
            oracle_k,
            oracle_member: oracle_k <= limit,
        }
    };
    let derived: BTreeSet<RationalAngle> = members.iter().map(|x| x.angle).collect();
    let mut listed = BTreeSet::new();
    let mut out = Vec::new();
    for s in REFERENCE_OMEGA_THREE_HALVES {
        let (p, q) = s.split_once('/').map_or((s, "1"), |x| x);
        let (p, q): (i64, i64) = (p.parse().unwrap(), q.parse().unwrap());
        let c = canonicalize(p, q);
        listed.insert(c);
        if p > q {
            out.push(adjudicate(s.to_string(), c, DiscrepancyKind::Unlistable));
        } else if !derived.contains(&c) {
            out.push(adjudicate(
                s.to_string(),
                c,
                DiscrepancyKind::ListedButAbsent,
            ));
        }
    }
    for a in derived.difference(&listed) {
        out.push(adjudicate(
            a.to_string(),
            *a,
            DiscrepancyKind::PresentButUnlisted,
        ));
    }
    out
}

/// Expected value class of `sup_n |cos(na) - cos(3na)|` by order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "class", content = "closed_form")]
pub enum TripleClass {
    Zero,
    Exact(ClosedForm),
    AboveThreeHalves,
}

impl TripleClass {
    pub fn expected_for_order(u: u64) -> TripleClass {
        match u {
            1 | 2 | 4 => TripleClass::Zero,
            3 | 6 | 9 | 12 | 15 | 18 | 24 | 30 => TripleClass::Exact(ClosedForm::ThreeHalves),
            5 | 10 => TripleClass::Exact(ClosedForm::Sqrt5Over2),
            8 | 16 => TripleClass::Exact(ClosedForm::Sqrt2),
            11 | 22 => TripleClass::Exact(ClosedForm::cos_pair(
                canonicalize(2, 11),
                canonicalize(3, 11),
            )),
            _ => TripleClass::AboveThreeHalves,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleRow {
    pub order: u64,
    pub representative: RationalAngle,
    pub sup: SupResult,
    pub expected: TripleClass,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleReport {
    pub rows: Vec<TripleRow>,
}

impl TripleReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Checks the classification of `sup_n |cos(na) - cos(3na)|` for every order up to
/// `full_to` and the strict bound `> 3/2` for orders `full_to + 1 ..= sample_to`.
pub fn triple_angle_report(full_to: u64, sample_to: u64, cfg: &Config) -> Result<TripleReport> {
    let three_halves = ClosedForm::ThreeHalves.eval(cfg.precision_bits);
    let rows = par::map_range(cfg.execution, 1..sample_to + 1, |u| -> Result<TripleRow> {
        let a = canonicalize(2, u as i64);
        let sup = sup_distance_to_triple(&a, cfg)?;
        let expected = if u <= full_to {
            TripleClass::expected_for_order(u)
        } else {
            TripleClass::AboveThreeHalves
        };
        let pass = match &expected {
            TripleClass::Zero => sup.value.hi().is_zero(),
            TripleClass::Exact(c) => {
                matches_closed_form(&sup.value, c, CLOSED_FORM_TOLERANCE, cfg)?
            }
            TripleClass::AboveThreeHalves => {
                cmp_certified(&sup.value, &three_halves) == CertOrdering::Greater
            }
        };
        Ok(TripleRow {
            order: u,
            representative: a,
            sup,
            expected,
            pass,
        })
    });
    Ok(TripleReport {
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    fn k(u: u64) -> CertScalar {
        k_of_order(u, &cfg()).unwrap().value(128)
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_set(12), vec![1, 5]);
        assert_eq!(delta1_set(12), vec![5]);
        assert_eq!(delta_set(6), vec![1]);
        assert!(delta1_set(6).is_empty());
        assert_eq!(delta_set(1), vec![1]);
        for u in [2, 3, 4, 6] {
            assert!(delta1_set(u).is_empty());
        }
    }

    #[test]
    fn sigma_and_theta_examples() {
        let three_halves = ClosedForm::ThreeHalves;
        for u in [1, 2, 3, 4, 5, 6, 8, 10] {
            assert_eq!(
                sigma(u, &cfg()).unwrap().closed_form(),
                Some(&three_halves),
                "sigma({u})"
            );
        }
        let th = three_halves.eval(128);
        assert_eq!(
            cmp_certified(&sigma(7, &cfg()).unwrap(), &th),
            CertOrdering::Greater
        );
        assert_eq!(
            theta(5, &cfg()).unwrap().closed_form(),
            Some(&ClosedForm::Sqrt5Over2)
        );
        assert_eq!(
            theta(8, &cfg()).unwrap().closed_form(),
            Some(&ClosedForm::Sqrt2)
        );
        assert_eq!(
            theta(4, &cfg()).unwrap().closed_form(),
            Some(&ClosedForm::Two)
        );
        assert!((theta(11, &cfg()).unwrap().mid_f64() - 1.4961).abs() < 5e-5);
    }

    #[test]
    fn k_examples() {
        assert_eq!(k(5).closed_form(), Some(&ClosedForm::Sqrt5Over2));
        assert_eq!(k(16).closed_form(), Some(&ClosedForm::Sqrt2));
        assert_eq!(k(12).closed_form(), Some(&ClosedForm::ThreeHalves));
        let k7 = k(7);
        assert_eq!(
            cmp_certified(&k7, &ClosedForm::ThreeHalves.eval(128)),
            CertOrdering::Greater
        );
        assert_eq!(
            cmp_certified(&k7, &ClosedForm::EightOver3Sqrt3.eval(128)),
            CertOrdering::Less
        );
        assert_eq!(
            k_of_angle(&SymbolicAngle::IrrationalMultipleOfPi, &cfg()).unwrap(),
            KValue::MaxIrrational
        );
        for (p, q) in [(0, 1), (1, 2)] {
            let v = k_of_angle(&SymbolicAngle::Rational(canonicalize(p, q)), &cfg()).unwrap();
            assert_eq!(v.closed_form(), Some(ClosedForm::ThreeHalves));
        }
    }

    #[test]
    fn k_matches_brute_force() {
        for u in 1..=40u64 {
            let a = canonicalize(2, u as i64);
            let oracle = brute_force_k(&a);
            let v = k(u);
            assert!(
                v.lo_f64() - 1e-9 <= oracle && oracle <= v.hi_f64() + 1e-9,
                "u={u}: {oracle} vs {v}"
            );
        }
    }

    #[test]
    fn kvalue_json_roundtrip() {
        for v in [KValue::MaxIrrational, k_of_order(8, &cfg()).unwrap()] {
            let s = serde_json::to_string(&v).unwrap();
            let back: KValue = serde_json::from_str(&s).unwrap();
            assert_eq!(back.is_irrational(), v.is_irrational());
            assert_eq!(back.value(128).lo(), v.value(128).lo());
            assert_eq!(back.closed_form(), v.closed_form());
        }
    }

    #[test]
    fn omega_small_thresholds() {
        let o = omega(&"1.2".parse().unwrap(), &cfg()).unwrap();
        let angles: Vec<String> = o.members.iter().map(|m| m.angle.to_string()).collect();
        assert_eq!(angles, vec!["1/5", "2/5", "3/5", "4/5"]);
        assert!(o.discrepancies.is_empty());
        assert!(omega(&"1.0".parse().unwrap(), &cfg())
            .unwrap()
            .members
            .is_empty());
        assert!(matches!(
            omega(&"1.54".parse().unwrap(), &cfg()),
            Err(Error::ThresholdTooHigh(_))
        ));
    }

    #[test]
    fn triple_report_small() {
        let r = triple_angle_report(34, 40, &cfg()).unwrap();
        assert!(
            r.all_pass(),
            "{:?}",
            r.rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| r.order)
                .collect::<Vec<_>>()
        );
    }
}
