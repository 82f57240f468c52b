//! Certified `sup_x |cos(px) - cos(qx)|` over the real line and the order
//! thresholds derived from it.
//!
//! The function is even and `2 pi`-periodic, so the search runs on `[0, pi]`
//! (slightly enlarged to the upper endpoint of a pi enclosure). Each box
//! `[c - h, c + h]` is bounded above by the Taylor-Lagrange estimate
//! `|g(c)| + |g'(c)| h + (p^2 + q^2) h^2 / 2`, and boxes are explored best-first.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::certified::{cos_sin, pi, CertScalar, ClosedForm, Dyadic, Rounding};
use crate::error::{Error, Result};
use crate::par;
use crate::Config;

/// Default target width of [`trig_diff_sup`].
pub const DEFAULT_TARGET_WIDTH: f64 = 1e-12;

/// Boxes narrower than `2^-40 * 2 pi` are not split further.
const MIN_BOX_LOG2: i64 = -40 + 3;

/// Evaluation budget before giving up.
const MAX_EVALUATIONS: u64 = 2_000_000;

/// `x -> |cos(px) - cos(qx)|` with the global bound `|g''| <= p^2 + q^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrigSupProblem {
    pub p: u64,
    pub q: u64,
    pub second_derivative_bound: u64,
}

impl TrigSupProblem {
    pub fn new(p: u64, q: u64) -> Self {
        assert!(p >= 1 && q >= 1, "frequencies must be positive");
        TrigSupProblem {
            p,
            q,
            second_derivative_bound: p * p + q * q,
        }
    }

    pub fn gcd(&self) -> u64 {
        self.p.gcd(&self.q)
    }

    /// `(g(x), g'(x))` for the exact point `x`.
    fn eval(&self, x: &Dyadic, prec: u32) -> (CertScalar, CertScalar) {
        let xi = CertScalar::exact(x.clone(), prec);
        let (cp, sp) = cos_sin(&xi.mul_i64(self.p as i64), prec);
        let (cq, sq) = cos_sin(&xi.mul_i64(self.q as i64), prec);
        let g = cp.sub(&cq);
        let gd = sq.mul_i64(self.q as i64).sub(&sp.mul_i64(self.p as i64));
        (g, gd)
    }

    /// `|g(pi)| = |(-1)^p - (-1)^q|`, exact.
    fn value_at_pi(&self) -> i64 {
        if (self.p + self.q) % 2 == 1 {
            2
        } else {
            0
        }
    }
}

/// Where the supremum was located.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "x")]
pub enum WitnessPoint {
    /// The endpoint `x = pi`.
    Pi,
    /// An exact dyadic point, as a decimal string.
    Point(String),
}

impl WitnessPoint {
    pub fn to_f64(&self) -> f64 {
        match self {
            WitnessPoint::Pi => std::f64::consts::PI,
            WitnessPoint::Point(s) => {
                Dyadic::from_decimal_exact(s).map_or(f64::NAN, |d| d.to_f64())
            }
        }
    }
}

/// Certified supremum over the real line with a point attaining the lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSupResult {
    pub p: u64,
    pub q: u64,
    pub value: CertScalar,
    pub witness: WitnessPoint,
    pub evaluations: u64,
}

struct Node {
    left: Dyadic,
    right: Dyadic,
    upper: Dyadic,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap: largest upper bound first, then smallest left endpoint.
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .cmp(&other.upper)
            .then_with(|| other.left.cmp(&self.left))
    }
}

/// Certified enclosure of `sup_x |cos(px) - cos(qx)|` of width at most `target_width`.
pub fn trig_diff_sup(p: u64, q: u64, target_width: f64, cfg: &Config) -> Result<RealSupResult> {
    assert!(target_width > 0.0, "target width must be positive");
    let prob = TrigSupProblem::new(p, q);
    let prec = cfg.precision_bits;
    if p == q {
        return Ok(RealSupResult {
            p,
            q,
            value: CertScalar::from_i64(0, prec),
            witness: WitnessPoint::Point("0".into()),
            evaluations: 0,
        });
    }
    let half_delta = Dyadic::new(BigInt::from(prob.second_derivative_bound), -1);
    let two = Dyadic::from_i64(2);
    let target = Dyadic::from_f64(target_width);

    let mut best_lo = Dyadic::from_i64(prob.value_at_pi());
    let mut witness = WitnessPoint::Pi;
    let mut evaluations = 0u64;

    let bound =
        |left: Dyadic, right: Dyadic, best_lo: &mut Dyadic, witness: &mut WitnessPoint| -> Node {
            let c = left.add(&right).shl(-1);
            let h = right.sub(&left).shl(-1);
            let (g, gd) = prob.eval(&c, prec);
            let (g, gd) = (g.abs(), gd.abs());
            if g.lo() > best_lo {
                *best_lo = g.lo().clone();
                *witness = WitnessPoint::Point(c.to_decimal_string());
            }
            let upper = g
                .hi()
                .add(&gd.hi().mul(&h))
                .add(&half_delta.mul(&h).mul(&h));
            let upper = upper.round(prec, Rounding::Up).min(two.clone());
            Node { left, right, upper }
        };

    let mut heap = BinaryHeap::new();
    let mut finished: Vec<Dyadic> = Vec::new();
    heap.push(bound(
        Dyadic::zero(),
        pi(prec).hi().clone(),
        &mut best_lo,
        &mut witness,
    ));
    evaluations += 1;
    let remaining_max = loop {
        let Some(top) = heap.pop() else {
            break None;
        };
        if top.upper <= best_lo.add(&target) {
            break Some(top.upper);
        }
        let width = top.right.sub(&top.left);
        if width.bits() as i64 + width.exponent() <= MIN_BOX_LOG2 {
            finished.push(top.upper);
            continue;
        }
        if evaluations > MAX_EVALUATIONS {
            return Err(Error::PrecisionExhausted {
                cap: prec,
                context: format!(
                    "branch-and-bound for |cos({p}x) - cos({q}x)| exceeded its evaluation budget"
                ),
            });
        }
        let mid = top.left.add(&top.right).shl(-1);
        for (l, r) in [(top.left.clone(), mid.clone()), (mid, top.right)] {
            let node = bound(l, r, &mut best_lo, &mut witness);
            evaluations += 1;
            if node.upper > best_lo {
                heap.push(node);
            }
        }
    };
    let hi = finished
        .into_iter()
        .chain(remaining_max)
        .fold(best_lo.clone(), |acc, u| acc.max(u));
    let value = CertScalar::new(best_lo, hi, prec);
    if value.width() > target {
        return Err(Error::PrecisionExhausted {
            cap: prec,
            context: format!(
                "sup of |cos({p}x) - cos({q}x)| stalled at width {:e}",
                value.width_f64()
            ),
        });
    }
    let tag = if value.lo() == &two {
        Some(ClosedForm::Two)
    } else if q == 3 * p || p == 3 * q {
        // The triple family attains 8/(3 sqrt 3); tag only if the enclosure agrees.
        ClosedForm::EightOver3Sqrt3
            .eval(prec)
            .overlaps(&value)
            .then_some(ClosedForm::EightOver3Sqrt3)
    } else {
        None
    };
    Ok(RealSupResult {
        p,
        q,
        value: value.with_closed_form(tag),
        witness,
        evaluations,
    })
}

/// A certified interval `[c - t, c + t]` on which `|cos(px) - cos(qx)| > m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub center: WitnessPoint,
    pub half_length: CertScalar,
    pub length: CertScalar,
}

/// Expands around the supremum witness using the Taylor-Lagrange bound
/// `|g(x)| >= |g(c)| - |g'(c)| t - (p^2 + q^2) t^2 / 2` for `|x - c| <= t`.
pub fn exceedance_interval(p: u64, q: u64, m: &CertScalar, cfg: &Config) -> Result<Exceedance> {
    let prec = cfg.precision_bits;
    let sup = trig_diff_sup(p, q, DEFAULT_TARGET_WIDTH, cfg)?;
    if m.hi() >= sup.value.lo() {
        return Err(Error::ThresholdAboveSup {
            threshold: m.to_string(),
            sup: sup.value.to_string(),
        });
    }
    let prob = TrigSupProblem::new(p, q);
    let (g0, g1) = match &sup.witness {
        WitnessPoint::Pi => (
            CertScalar::from_i64(prob.value_at_pi(), prec),
            CertScalar::from_i64(0, prec),
        ),
        WitnessPoint::Point(s) => {
            let c = Dyadic::from_decimal_exact(s).expect("witness is dyadic");
            let (g, gd) = prob.eval(&c, prec);
            (g.abs(), gd.abs())
        }
    };
    let half_delta = CertScalar::exact(
        Dyadic::new(BigInt::from(prob.second_derivative_bound), -1),
        prec,
    );
    let margin = g0.lo_f64() - m.hi_f64();
    let (a, b) = (half_delta.mid_f64(), g1.hi_f64());
    let mut t = (-b + (b * b + 4.0 * a * margin).sqrt()) / (2.0 * a) * (1.0 - 2f64.powi(-30));
    for _ in 0..60 {
        let td = CertScalar::exact(Dyadic::from_f64(t), prec);
        let low = CertScalar::exact(g0.lo().clone(), prec)
            .sub(&CertScalar::exact(g1.hi().clone(), prec).mul(&td))
            .sub(&half_delta.mul(&td).mul(&td));
        if t > 0.0 && low.lo() > m.hi() {
            return Ok(Exceedance {
                center: sup.witness,
                length: td.scale_pow2(1),
                half_length: td,
            });
        }
        t *= 1.0 - 2f64.powi(-20);
    }
    Err(Error::PrecisionExhausted {
        cap: prec,
        context: format!("certifying an exceedance interval for ({p}, {q})"),
    })
}

/// Smallest `u` with `2 pi / u` below the certified exceedance length: every angle
/// of order at least `u` then has `sup_n |cos(npa) - cos(nqa)| > m`.
pub fn order_threshold(p: u64, q: u64, m: &CertScalar, cfg: &Config) -> Result<u64> {
    let e = exceedance_interval(p, q, m, cfg)?;
    Ok(threshold_from_half_length(
        &e.half_length,
        cfg.precision_bits,
    ))
}

fn threshold_from_half_length(t: &CertScalar, prec: u32) -> u64 {
    let ratio = pi(prec).div(t);
    ratio.hi_f64().floor() as u64 + 1
}

/// The two table families: `f_s = cos x - cos sx` and `g_s = cos 3x - cos sx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    F,
    G,
}

impl Family {
    pub fn p(self) -> u64 {
        match self {
            Family::F => 1,
            Family::G => 3,
        }
    }
}

/// Reference thresholds `(s, u_s)` for the f-family at `m = 1.5`.
pub const REFERENCE_F_THRESHOLDS: [(u64, u64); 4] = [(2, 8), (4, 13), (5, 21), (6, 20)];

/// Reference thresholds `(s, u_s)` for the g-family at `m = 1.5`.
pub const REFERENCE_G_THRESHOLDS: [(u64, u64); 13] = [
    (2, 12),
    (4, 16),
    (5, 22),
    (7, 27),
    (8, 27),
    (10, 33),
    (11, 40),
    (13, 44),
    (14, 45),
    (16, 53),
    (17, 56),
    (19, 65),
    (20, 64),
];

/// One row of a threshold table at `m = 1.5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorRow {
    pub family: Family,
    pub s: u64,
    pub theta_s: CertScalar,
    pub delta_s: CertScalar,
    pub l_s: CertScalar,
    pub u_s: u64,
    pub reference_u_s: u64,
}

impl TaylorRow {
    /// `u_s <= reference_u_s`.
    pub fn within_reference(&self) -> bool {
        self.u_s <= self.reference_u_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorTables {
    pub f_rows: Vec<TaylorRow>,
    pub g_rows: Vec<TaylorRow>,
}

fn taylor_row(family: Family, s: u64, reference_u_s: u64, cfg: &Config) -> Result<TaylorRow> {
    let p = family.p();
    let prec = cfg.precision_bits;
    let m = CertScalar::from_i64(3, prec).scale_pow2(-1);
    let theta = trig_diff_sup(p, s, DEFAULT_TARGET_WIDTH, cfg)?;
    let e = exceedance_interval(p, s, &m, cfg)?;
    Ok(TaylorRow {
        family,
        s,
        theta_s: theta.value,
        delta_s: CertScalar::from_i64((p * p + s * s) as i64, prec),
        u_s: threshold_from_half_length(&e.half_length, prec),
        l_s: e.half_length,
        reference_u_s,
    })
}

/// Recomputes both threshold tables at `m = 1.5`.
pub fn taylor_tables(cfg: &Config) -> Result<TaylorTables> {
    let jobs: Vec<(Family, u64, u64)> = REFERENCE_F_THRESHOLDS
        .iter()
        .map(|&(s, u)| (Family::F, s, u))
        .chain(
            REFERENCE_G_THRESHOLDS
                .iter()
                .map(|&(s, u)| (Family::G, s, u)),
        )
        .collect();
    let rows = par::map(cfg.execution, &jobs, |&(f, s, u)| taylor_row(f, s, u, cfg));
    let mut f_rows = Vec::new();
    let mut g_rows = Vec::new();
    for row in rows {
        let row = row?;
        match row.family {
            Family::F => f_rows.push(row),
            Family::G => g_rows.push(row),
        }
    }
    Ok(TaylorTables { f_rows, g_rows })
}
