//! Finite-dimensional cosine sequences `C(n) = sum_j cos(n b_j) p_j`.
//!
//! Matrices stand in for a general unital algebra: the idempotents `p_j` are
//! complex matrices, decomposition goes through an eigendecomposition of
//! `C(1)` (Chebyshev calculus: `C(n) = T_n(C(1))`), and norms are spectral
//! norms.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::angle::{angles_up_to_order, canonicalize, checked_lcm, RationalAngle, SymbolicAngle};
use crate::certified::{
    matches_closed_form, CertScalar, ClosedForm, Dyadic, CLOSED_FORM_TOLERANCE,
};
use crate::cyclic::{sup_distance, SupResult, PERIOD_LIMIT};
use crate::error::{Error, Result};
use crate::k_constant::{delta1_set, k_of_order, KValue};
use crate::par;
use crate::Config;

pub type CMatrix = DMatrix<Complex64>;

/// Default tolerance for idempotent-family validation.
pub const IDEMPOTENT_TOLERANCE: f64 = 1e-12;

/// Eigenvalues closer than this are merged into one cluster.
const CLUSTER_RADIUS: f64 = 1e-7;

/// Distinct eigenvalues must be at least this far apart.
pub const MIN_SEPARATION: f64 = 1e-6;

/// Deflation threshold for the Schur iteration. Machine epsilon itself can
/// stall on clustered eigenvalues, so a slightly looser value is used.
const SCHUR_EPSILON: f64 = 1e-15;
const SCHUR_MAX_ITERATIONS: usize = 1_000;

/// Largest denominator tried when recognizing `arccos(lambda) / pi`.
const MAX_RECOGNIZED_DENOMINATOR: u64 = 1000;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Anything indexed by `n` with matrix values.
pub trait CosineSequence: Sync {
    fn dim(&self) -> usize;
    fn at(&self, n: i64) -> CMatrix;
}

/// One spectral part `(b_j, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPart {
    pub angle: RationalAngle,
    pub idempotent: CMatrix,
}

/// A cosine sequence given by distinct angles and a resolution of the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCosine {
    dim: usize,
    parts: Vec<SpectralPart>,
}

impl SpectralCosine {
    /// Validates `sum p_j = I`, `p_j^2 = p_j`, `p_i p_j = 0`, distinct angles.
    /// Residuals are measured relative to `1 + |p_i| |p_j|`.
    pub fn build(parts: Vec<(RationalAngle, CMatrix)>) -> Result<Self> {
        SpectralCosine::build_with_tolerance(parts, IDEMPOTENT_TOLERANCE)
    }

    pub fn build_with_tolerance(parts: Vec<(RationalAngle, CMatrix)>, tol: f64) -> Result<Self> {
        let bad = |s: String| Err(Error::InvalidIdempotents(s));
        let Some(first) = parts.first() else {
            return bad("no parts".into());
        };
        let dim = first.1.nrows();
        if dim == 0 {
            return bad("dimension must be positive".into());
        }
        let mut seen = BTreeSet::new();
        for (a, p) in &parts {
            if p.nrows() != dim || p.ncols() != dim {
                return bad(format!("idempotent for {a} is not {dim}x{dim}"));
            }
            if !seen.insert(*a) {
                return bad(format!("angle {a} appears twice"));
            }
        }
        let norms: Vec<f64> = parts.iter().map(|(_, p)| spectral_norm(p)).collect();
        for (i, (a, p)) in parts.iter().enumerate() {
            let r = spectral_norm(&(p * p - p));
            if r > tol * (1.0 + norms[i] * norms[i]) {
                return bad(format!("part {a} is not idempotent (residual {r:e})"));
            }
            for (j, (b, q)) in parts.iter().enumerate().skip(i + 1) {
                let r = spectral_norm(&(p * q)).max(spectral_norm(&(q * p)));
                if r > tol * (1.0 + norms[i] * norms[j]) {
                    return bad(format!(
                        "parts {a} and {b} are not orthogonal (residual {r:e})"
                    ));
                }
            }
        }
        let sum = parts
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, (_, p)| acc + p);
        let r = spectral_norm(&(sum - CMatrix::identity(dim, dim)));
        let scale = 1.0 + norms.iter().sum::<f64>();
        if r > tol * scale {
            return bad(format!(
                "idempotents do not sum to the identity (residual {r:e})"
            ));
        }
        let parts = parts
            .into_iter()
            .map(|(angle, idempotent)| SpectralPart { angle, idempotent })
            .collect();
        Ok(SpectralCosine { dim, parts })
    }

    /// The scalar sequence `cos(n a)` in dimension one.
    pub fn scalar(a: RationalAngle) -> Self {
        SpectralCosine::build(vec![(a, CMatrix::identity(1, 1))])
            .expect("identity is a valid family")
    }

    /// Diagonal sequence: coordinate `i` carries `angles[i]` (repeats are merged).
    pub fn diagonal(angles: &[RationalAngle]) -> Result<Self> {
        let dim = angles.len();
        let mut groups: BTreeMap<RationalAngle, CMatrix> = BTreeMap::new();
        for (i, a) in angles.iter().enumerate() {
            groups.entry(*a).or_insert_with(|| CMatrix::zeros(dim, dim))[(i, i)] = c(1.0);
        }
        SpectralCosine::build(groups.into_iter().collect())
    }

    /// `S p_j S^-1` for every part.
    pub fn conjugated(&self, s: &CMatrix, s_inv: &CMatrix) -> Result<Self> {
        SpectralCosine::build(
            self.parts
                .iter()
                .map(|p| (p.angle, s * &p.idempotent * s_inv))
                .collect(),
        )
    }

    pub fn parts(&self) -> &[SpectralPart] {
        &self.parts
    }

    pub fn angles(&self) -> Vec<RationalAngle> {
        self.parts.iter().map(|p| p.angle).collect()
    }

    pub fn is_scalar(&self) -> bool {
        self.parts.len() == 1
    }

    /// True when every idempotent is self-adjoint (an orthogonal projection).
    pub fn is_normal(&self) -> bool {
        self.parts.iter().all(|p| {
            spectral_norm(&(&p.idempotent - p.idempotent.adjoint())) <= IDEMPOTENT_TOLERANCE
        })
    }
}

impl CosineSequence for SpectralCosine {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, n: i64) -> CMatrix {
        self.parts
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, p| {
                acc + &p.idempotent * c(p.angle.cos_multiple_f64(n))
            })
    }
}

/// A sequence with `noise` added at `n = +-index`.
pub struct Perturbed<'a> {
    pub base: &'a dyn CosineSequence,
    pub index: i64,
    pub noise: CMatrix,
}

impl CosineSequence for Perturbed<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn at(&self, n: i64) -> CMatrix {
        let v = self.base.at(n);
        if n.abs() == self.index {
            v + &self.noise
        } else {
            v
        }
    }
}

/// `max_{|m|, |n| <= horizon} |C(m+n) + C(m-n) - 2 C(m) C(n)|`.
pub fn dalembert_residual(seq: &dyn CosineSequence, horizon: u64, exec: crate::Execution) -> f64 {
    let h = horizon as i64;
    let values: Vec<CMatrix> = (-2 * h..=2 * h).map(|k| seq.at(k)).collect();
    let at = |k: i64| &values[(k + 2 * h) as usize];
    let rows = par::map_range(exec, 0..(2 * h + 1) as u64, |i| {
        let m = i as i64 - h;
        (-h..=h)
            .map(|n| {
                let r = at(m + n) + at(m - n) - at(m) * at(n) * c(2.0);
                // Frobenius bounds the spectral norm; refine only when it matters.
                let f = r.norm();
                if f < 1e-14 {
                    f
                } else {
                    spectral_norm(&r)
                }
            })
            .fold(0.0, f64::max)
    });
    rows.into_iter().fold(0.0, f64::max)
}

pub fn check_dalembert(seq: &dyn CosineSequence, horizon: u64, tol: f64) -> bool {
    assert!(horizon >= 1);
    dalembert_residual(seq, horizon, crate::Execution::default()) <= tol
}

/// `T_n(x)` evaluated at a matrix by the three-term recurrence.
pub fn chebyshev(c1: &CMatrix, n: u64) -> CMatrix {
    let d = c1.nrows();
    let (mut prev, mut cur) = (CMatrix::identity(d, d), c1.clone());
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = c1 * &cur * c(2.0) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Smallest-denominator rational `p/q` (`q <= 1000`) with `|cos(pi p / q) - lambda| < 1e-9`.
pub fn recognize_angle(lambda: f64) -> Option<RationalAngle> {
    let x = lambda.clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
    (1..=MAX_RECOGNIZED_DENOMINATOR).find_map(|q| {
        let p = (x * q as f64).round() as i64;
        let a = canonicalize(p, q as i64);
        ((a.to_f64().cos() - lambda).abs() < 1e-9).then_some(a)
    })
}

/// Recovers angles and spectral projections from `C(1)`.
pub fn decompose(c1: &CMatrix) -> Result<SpectralCosine> {
    let bad = |s: String| Err(Error::NotCosineGenerator(s));
    let d = c1.nrows();
    if d == 0 || c1.ncols() != d {
        return bad("matrix must be square and nonempty".into());
    }
    let Some(eig) =
        nalgebra::linalg::Schur::try_new(c1.clone(), SCHUR_EPSILON, SCHUR_MAX_ITERATIONS)
            .and_then(|s| s.eigenvalues())
    else {
        return bad("Schur iteration did not converge".into());
    };
    let mut lams: Vec<f64> = Vec::with_capacity(d);
    for z in eig.iter() {
        if z.im.abs() > 1e-9 || z.re.abs() > 1.0 + 1e-9 {
            return bad(format!("eigenvalue {z} is outside [-1, 1]"));
        }
        lams.push(z.re);
    }
    lams.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for l in lams {
        match clusters.last_mut() {
            Some(cl) if l - cl[cl.len() - 1] <= CLUSTER_RADIUS => cl.push(l),
            _ => clusters.push(vec![l]),
        }
    }
    let centers: Vec<f64> = clusters
        .iter()
        .map(|cl| cl.iter().sum::<f64>() / cl.len() as f64)
        .collect();
    if centers.windows(2).any(|w| w[1] - w[0] < MIN_SEPARATION) {
        return bad(format!("eigenvalue separation below {MIN_SEPARATION:e}"));
    }
    let id = CMatrix::identity(d, d);
    let mut parts = Vec::with_capacity(centers.len());
    for (j, &lj) in centers.iter().enumerate() {
        let mut p = id.clone();
        for (k, &lk) in centers.iter().enumerate() {
            if k != j {
                p *= (c1 - &id * c(lk)) * c(1.0 / (lj - lk));
            }
        }
        let Some(angle) = recognize_angle(lj) else {
            return bad(format!(
                "eigenvalue {lj} is not the cosine of a rational angle"
            ));
        };
        parts.push((angle, p));
    }
    let recon = parts
        .iter()
        .zip(&centers)
        .fold(CMatrix::zeros(d, d), |acc, ((_, p), &l)| acc + p * c(l));
    let r = spectral_norm(&(recon - c1));
    if r > 1e-7 * (1.0 + spectral_norm(c1)) {
        return bad(format!(
            "matrix is not diagonalizable (reconstruction residual {r:e})"
        ));
    }
    SpectralCosine::build_with_tolerance(parts, 1e-9)
        .map_err(|e| Error::NotCosineGenerator(format!("spectral projections are invalid ({e})")))
}

/// `S = U diag(sigma) V*` with Haar-like unitaries and singular values in `[1, 10]`,
/// returned with its exact inverse `V diag(1/sigma) U*`. Condition number at most 10.
pub fn random_similarity(dim: usize, rng: &mut impl Rng) -> (CMatrix, CMatrix) {
    let unitary = |rng: &mut dyn rand::RngCore| {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        });
        g.qr().q()
    };
    let u = unitary(rng);
    let v = unitary(rng);
    let sig: Vec<f64> = (0..dim).map(|_| rng.gen_range(1.0..=10.0)).collect();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        sig.iter().map(|&x| c(x)),
    ));
    let d_inv = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        sig.iter().map(|&x| c(1.0 / x)),
    ));
    (&u * d * v.adjoint(), &v * d_inv * u.adjoint())
}

/// Random spectral cosine of dimension `dim` using every angle in `angles`
/// (each at least once), optionally conjugated by [`random_similarity`].
pub fn random_spectral_cosine(
    dim: usize,
    angles: &[RationalAngle],
    conjugate: bool,
    rng: &mut impl Rng,
) -> Result<SpectralCosine> {
    if angles.is_empty() || angles.len() > dim {
        return Err(Error::InvalidInput(format!(
            "need between 1 and {dim} angles, got {}",
            angles.len()
        )));
    }
    let mut coords: Vec<RationalAngle> = angles.to_vec();
    while coords.len() < dim {
        coords.push(angles[rng.gen_range(0..angles.len())]);
    }
    let diag = SpectralCosine::diagonal(&coords)?;
    if conjugate {
        let (s, s_inv) = random_similarity(dim, rng);
        diag.conjugated(&s, &s_inv)
    } else {
        Ok(diag)
    }
}

/// `sup_n |C(n) - cos(na) I|` over one full period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarDistance {
    pub sup: SupResult,
    /// True when computed from certified cyclic suprema (self-adjoint parts);
    /// false for a padded double-precision scan.
    pub exact: bool,
}

/// Padding applied to double-precision operator-norm maxima.
const NORM_PADDING: f64 = 1e-9;

pub fn sup_distance_to_scalar(
    seq: &SpectralCosine,
    a: &RationalAngle,
    cfg: &Config,
) -> Result<ScalarDistance> {
    let period = seq.parts.iter().try_fold(a.order(), |acc, p| {
        checked_lcm(acc, p.angle.order())
            .filter(|&u| u <= PERIOD_LIMIT)
            .ok_or(Error::PeriodOverflow {
                period: acc.saturating_mul(p.angle.order()),
                limit: PERIOD_LIMIT,
            })
    })?;
    if seq.is_normal() {
        // |sum_j (cos n b_j - cos n a) p_j| = max_j |cos n b_j - cos n a| for orthogonal projections.
        let sups = seq
            .parts
            .iter()
            .map(|p| sup_distance(&p.angle, a, cfg))
            .collect::<Result<Vec<_>>>()?;
        let value = sups
            .iter()
            .skip(1)
            .fold(sups[0].value.clone(), |acc, s| acc.max(&s.value));
        let tops: Vec<&SupResult> = sups
            .iter()
            .filter(|s| {
                crate::certified::cmp_certified(&s.value, &value) != crate::CertOrdering::Less
            })
            .collect();
        let witness_n = tops.iter().map(|s| s.witness_n).min().expect("nonempty");
        let tag = tops.iter().find_map(|s| s.value.closed_form().cloned());
        return Ok(ScalarDistance {
            sup: SupResult {
                value: value.with_closed_form(tag),
                witness_n,
                period,
            },
            exact: true,
        });
    }
    let id = CMatrix::identity(seq.dim, seq.dim);
    let norms = par::map_range(cfg.execution, 1..period + 1, |n| {
        spectral_norm(&(seq.at(n as i64) - &id * c(a.cos_multiple_f64(n as i64))))
    });
    let best = norms.iter().cloned().fold(0.0, f64::max);
    let witness_n = norms.iter().position(|&x| x >= best - 1e-12).unwrap() as u64 + 1;
    let pad = NORM_PADDING * (1.0 + best);
    let value = CertScalar::outward(
        &Dyadic::from_f64((best - pad).max(0.0)),
        &Dyadic::from_f64(best + pad),
        cfg.precision_bits,
    );
    Ok(ScalarDistance {
        sup: SupResult {
            value,
            witness_n,
            period,
        },
        exact: false,
    })
}

/// [`sup_distance_to_scalar`] for a possibly irrational target; irrational input is rejected.
pub fn sup_distance_to_symbolic(
    seq: &SpectralCosine,
    a: &SymbolicAngle,
    cfg: &Config,
) -> Result<ScalarDistance> {
    match a {
        SymbolicAngle::Rational(r) => sup_distance_to_scalar(seq, r, cfg),
        SymbolicAngle::IrrationalMultipleOfPi => Err(Error::IrrationalUnsupported(
            "sup distance to a scalar sequence",
        )),
    }
}

/// The family `C(g) = diag(cos(2 pi g_m / 3))` on `(Z/3Z)^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prop25Family {
    n: usize,
}

/// Largest `N` enumerated exhaustively; above it the coordinatewise maximum is used
/// (the norm of a diagonal matrix is the maximum over coordinates).
pub const PROP25_EXHAUSTIVE_MAX: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop25Report {
    pub n: usize,
    pub elements_checked: u64,
    pub exhaustive: bool,
    pub sup: CertScalar,
    pub sup_is_three_halves: bool,
    pub idempotents_recovered: usize,
    pub separates_coordinates: bool,
    pub subset_identities_hold: bool,
}

impl Prop25Family {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=20).contains(&n) {
            return Err(Error::InvalidInput(format!(
                "N must lie in 1..=20, got {n}"
            )));
        }
        Ok(Prop25Family { n })
    }

    /// `2 cos(2 pi k / 3)` as an integer: `2` or `-1`.
    fn twice_cos(k: u8) -> i64 {
        if k.is_multiple_of(3) {
            2
        } else {
            -1
        }
    }

    pub fn element(&self, g: &[u8]) -> DMatrix<f64> {
        assert_eq!(g.len(), self.n);
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.n,
            g.iter().map(|&k| Self::twice_cos(k) as f64 / 2.0),
        ))
    }

    /// `(2/3)(I - C(g))` computed exactly: each diagonal entry is `0` or `1`.
    pub fn idempotent(&self, g: &[u8]) -> Vec<u8> {
        g.iter()
            .map(|&k| ((2 - Self::twice_cos(k)) / 3) as u8)
            .collect()
    }

    /// `|I - C(g)|` for diagonal `C(g)`, exactly: `max_m (2 - 2 cos) / 2`.
    fn deviation_halves(g: &[u8]) -> i64 {
        g.iter().map(|&k| 2 - Self::twice_cos(k)).max().unwrap_or(0)
    }

    pub fn report(&self, prec: u32) -> Prop25Report {
        let n = self.n;
        let exhaustive = n <= PROP25_EXHAUSTIVE_MAX;
        let (halves, checked) = if exhaustive {
            let total = 3u64.pow(n as u32);
            let mut g = vec![0u8; n];
            let mut best = 0;
            for idx in 0..total {
                let mut x = idx;
                for slot in g.iter_mut() {
                    *slot = (x % 3) as u8;
                    x /= 3;
                }
                best = best.max(Self::deviation_halves(&g));
            }
            (best, total)
        } else {
            let best = (0..n)
                .map(|_| {
                    (0..3u8)
                        .map(|k| Self::deviation_halves(&[k]))
                        .max()
                        .unwrap()
                })
                .max()
                .unwrap();
            (best, 3 * n as u64)
        };
        let sup = CertScalar::from_i64(halves, prec).scale_pow2(-1);
        let sup_is_three_halves = halves == 3;
        let sup = sup.with_closed_form(sup_is_three_halves.then_some(ClosedForm::ThreeHalves));

        let unit = |m: usize| -> Vec<u8> { (0..n).map(|i| u8::from(i == m)).collect() };
        let recovered: Vec<Vec<u8>> = (0..n).map(|m| self.idempotent(&unit(m))).collect();
        let separates_coordinates = recovered.iter().enumerate().all(|(m, p)| p == &unit(m))
            && (0..n).all(|i| recovered.iter().map(|p| p[i] as u32).sum::<u32>() == 1);
        // phi_S = (2/3)(I - C(g_S)) is the indicator of S for every g with support S.
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let subset_identities_hold = (0..64).all(|_| {
            let g: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3u8)).collect();
            self.idempotent(&g)
                .iter()
                .zip(&g)
                .all(|(&e, &k)| e == u8::from(k != 0))
        });
        Prop25Report {
            n,
            elements_checked: checked,
            exhaustive,
            sup,
            sup_is_three_halves,
            idempotents_recovered: recovered.len(),
            separates_coordinates,
            subset_identities_hold,
        }
    }
}

pub fn prop25_truncation(n: usize) -> Result<Prop25Family> {
    Prop25Family::new(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub dim: usize,
    pub angles: Vec<RationalAngle>,
    pub target: RationalAngle,
    pub conjugated: bool,
    pub sup: CertScalar,
    pub k: CertScalar,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub angles: Vec<RationalAngle>,
    pub target: RationalAngle,
    pub sup: CertScalar,
    pub k: KValue,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub trials: u64,
    pub seed: u64,
    /// Smallest observed `sup - k` (never below `-1e-12` when the law holds).
    pub min_gap: f64,
    pub violations: Vec<TrialRecord>,
    pub witnesses: Vec<WitnessCheck>,
    pub pass: bool,
}

/// Largest order of random angles in the harness.
const HARNESS_MAX_ORDER: u64 = 30;
const HARNESS_MAX_PERIOD: u64 = 5_000;

fn harness_trial(
    trial: u64,
    seed: u64,
    pool: &[RationalAngle],
    cfg: &Config,
) -> Result<TrialRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let dim = rng.gen_range(2..=6usize);
    let k_angles = rng.gen_range(2..=dim.min(4));
    // Redraw until the joint period stays small enough for the matrix scan.
    let (angles, target) = loop {
        let mut chosen = BTreeSet::new();
        while chosen.len() < k_angles {
            chosen.insert(pool[rng.gen_range(0..pool.len())]);
        }
        let target = pool[rng.gen_range(0..pool.len())];
        let period = chosen
            .iter()
            .try_fold(target.order(), |acc, a| checked_lcm(acc, a.order()));
        if period.is_some_and(|p| p <= HARNESS_MAX_PERIOD) {
            break (chosen.into_iter().collect::<Vec<_>>(), target);
        }
    };
    let conjugated = rng.gen_bool(0.5);
    let seq = random_spectral_cosine(dim, &angles, conjugated, &mut rng)?;
    let sup = sup_distance_to_scalar(&seq, &target, cfg)?.sup.value;
    let k = k_of_order(target.order(), cfg)?.value(cfg.precision_bits);
    let holds = sup.hi_f64() >= k.lo_f64() - 1e-12;
    Ok(TrialRecord {
        trial,
        dim,
        angles,
        target,
        conjugated,
        sup,
        k,
        holds,
    })
}

/// The pair realizing `k` for orders 5, 8 and 11: `(a, b)` with `sup = k(a)`.
pub fn optimality_witnesses(cfg: &Config) -> Result<Vec<(RationalAngle, RationalAngle)>> {
    let mut out = Vec::new();
    for u in [5u64, 8, 11] {
        let a = canonicalize(2, u as i64);
        let k = k_of_order(u, cfg)?.value(cfg.precision_bits);
        let best = delta1_set(u)
            .into_iter()
            .map(|w| canonicalize(2 * w as i64, u as i64))
            .find(|b| {
                sup_distance(&a, b, cfg)
                    .map(|s| s.value.overlaps(&k))
                    .unwrap_or(false)
            })
            .ok_or_else(|| Error::InvalidInput(format!("no same-order witness for order {u}")))?;
        out.push((a, best));
    }
    Ok(out)
}

/// Randomized check that non-scalar sequences never come closer than `k(a)` to `cos(na)`,
/// plus exact equality for the optimality witnesses.
pub fn zero_law_harness(trials: u64, seed: u64, cfg: &Config) -> Result<HarnessReport> {
    let pool = angles_up_to_order(HARNESS_MAX_ORDER);
    let records = par::map_range(cfg.execution, 0..trials, |t| {
        harness_trial(t, seed, &pool, cfg)
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let min_gap = records
        .iter()
        .map(|r| r.sup.mid_f64() - r.k.mid_f64())
        .fold(f64::INFINITY, f64::min);
    let violations: Vec<TrialRecord> = records.into_iter().filter(|r| !r.holds).collect();
    let mut witnesses = Vec::new();
    for (a, b) in optimality_witnesses(cfg)? {
        let seq = SpectralCosine::diagonal(&[a, b])?;
        let sup = sup_distance_to_scalar(&seq, &a, cfg)?.sup.value;
        let k = k_of_order(a.order(), cfg)?;
        let equal = match k.closed_form() {
            Some(cf) => matches_closed_form(&sup, &cf, CLOSED_FORM_TOLERANCE, cfg)?,
            None => false,
        };
        witnesses.push(WitnessCheck {
            angles: vec![a, b],
            target: a,
            sup,
            k,
            equal,
        });
    }
    let pass = violations.is_empty() && witnesses.iter().all(|w| w.equal);
    Ok(HarnessReport {
        trials,
        seed,
        min_gap,
        violations,
        witnesses,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub dim: usize,
    pub seed: u64,
    pub angles: Vec<RationalAngle>,
    pub target: RationalAngle,
    pub dalembert_residual: f64,
    pub recovered_angles: Vec<RationalAngle>,
    pub chebyshev_residual: f64,
    pub distance: ScalarDistance,
    pub k: KValue,
    /// `sup >= k(target)` or the sequence is scalar and equal to `cos(n target)`.
    pub law_holds: bool,
}

/// Builds a conjugated sequence from `angles`, checks it, decomposes `C(1)` and
/// measures the distance to `cos(n target)`.
pub fn simulate(
    angles: &[RationalAngle],
    target: &RationalAngle,
    dim: usize,
    seed: u64,
    cfg: &Config,
) -> Result<SimulationReport> {
    let distinct: Vec<RationalAngle> = angles
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq = random_spectral_cosine(dim, &distinct, true, &mut rng)?;
    let dalembert_residual = dalembert_residual(&seq, 50, cfg.execution);
    let c1 = seq.at(1);
    let dec = decompose(&c1)?;
    let mut recovered_angles = dec.angles();
    recovered_angles.sort();
    let chebyshev_residual = (0..=100u64)
        .map(|n| spectral_norm(&(dec.at(n as i64) - chebyshev(&c1, n))))
        .fold(0.0, f64::max);
    let distance = sup_distance_to_scalar(&seq, target, cfg)?;
    let k = k_of_order(target.order(), cfg)?;
    let law_holds = if seq.is_scalar() {
        true
    } else {
        distance.sup.value.hi_f64() >= k.value(cfg.precision_bits).lo_f64() - 1e-12
    };
    Ok(SimulationReport {
        dim,
        seed,
        angles: distinct,
        target: *target,
        dalembert_residual,
        recovered_angles,
        chebyshev_residual,
        distance,
        k,
        law_holds,
    })
}

/// Orders of all parts, for period bookkeeping.
pub fn part_orders(seq: &SpectralCosine) -> Vec<u64> {
    seq.parts.iter().map(|p| p.angle.order()).collect()
}

/// `lcm` of the target order and every part order.
pub fn scalar_period(seq: &SpectralCosine, a: &RationalAngle) -> u64 {
    part_orders(seq)
        .into_iter()
        .fold(a.order(), |acc, o| acc.lcm(&o))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> RationalAngle {
        s.parse().unwrap()
    }

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn scalar_and_diagonal_builds() {
        let s = SpectralCosine::scalar(a("2/7"));
        assert!((s.at(3)[(0, 0)].re - (6.0 * std::f64::consts::PI / 7.0).cos()).abs() < 1e-15);
        let d = SpectralCosine::diagonal(&[a("2/5"), a("4/5")]).unwrap();
        let c1 = d.at(1);
        assert!((c1[(0, 0)].re - (0.4 * std::f64::consts::PI).cos()).abs() < 1e-15);
        assert!((c1[(1, 1)].re - (0.8 * std::f64::consts::PI).cos()).abs() < 1e-15);
        assert!(c1[(0, 1)].norm() == 0.0);
    }

    #[test]
    fn conjugated_build_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let seq =
            random_spectral_cosine(3, &[a("1/3"), a("1/2"), a("2/9")], true, &mut rng).unwrap();
        for n in [0i64, 1, 2, 5, -4] {
            let direct = seq.parts().iter().fold(CMatrix::zeros(3, 3), |acc, p| {
                acc + &p.idempotent * c(p.angle.to_f64().mul_add(n as f64, 0.0).cos())
            });
            assert!(spectral_norm(&(seq.at(n) - direct)) < 1e-10);
        }
        assert!(!seq.is_normal());
    }

    #[test]
    fn invalid_families_are_rejected() {
        let half = CMatrix::identity(2, 2) * c(0.5);
        assert!(matches!(
            SpectralCosine::build(vec![(a("1/3"), half.clone()), (a("1/2"), half)]),
            Err(Error::InvalidIdempotents(_))
        ));
        let p = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0)]));
        assert!(SpectralCosine::build(vec![
            (a("1/3"), p.clone()),
            (a("1/3"), CMatrix::identity(2, 2) - p)
        ])
        .is_err());
    }

    #[test]
    fn dalembert_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let seq = random_spectral_cosine(4, &[a("2/5"), a("1/7"), a("1")], true, &mut rng).unwrap();
        assert!(check_dalembert(&seq, 50, 1e-10));
        assert!(check_dalembert(
            &SpectralCosine::scalar(a("3/11")),
            50,
            1e-10
        ));
        let noise = CMatrix::from_fn(4, 4, |i, j| c(if i == j { 1e-3 } else { 0.0 }));
        let bad = Perturbed {
            base: &seq,
            index: 2,
            noise,
        };
        assert!(!check_dalembert(&bad, 50, 1e-10));
    }

    #[test]
    fn decompose_examples() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c((std::f64::consts::PI / 6.0).cos()),
            c(0.0),
        ]));
        let dec = decompose(&d).unwrap();
        let mut angles = dec.angles();
        angles.sort();
        assert_eq!(angles, vec![a("1/6"), a("1/2")]);
        let scalar = CMatrix::identity(3, 3) * c((0.4 * std::f64::consts::PI).cos());
        let dec = decompose(&scalar).unwrap();
        assert_eq!(dec.angles(), vec![a("2/5")]);
        assert!(spectral_norm(&(&dec.parts()[0].idempotent - CMatrix::identity(3, 3))) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seq =
            random_spectral_cosine(3, &[a("2/7"), a("4/7"), a("6/7")], true, &mut rng).unwrap();
        let dec = decompose(&seq.at(1)).unwrap();
        let mut got = dec.angles();
        got.sort();
        assert_eq!(got, vec![a("2/7"), a("4/7"), a("6/7")]);
        for n in [0u64, 1, 7, 50, 100] {
            assert!(spectral_norm(&(dec.at(n as i64) - chebyshev(&seq.at(1), n))) < 1e-9);
        }
    }

    #[test]
    fn decompose_rejects_bad_input() {
        let out = CMatrix::identity(2, 2) * c(1.5);
        assert!(matches!(decompose(&out), Err(Error::NotCosineGenerator(_))));
        let close =
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5), c(0.5 + 5e-7)]));
        assert!(matches!(
            decompose(&close),
            Err(Error::NotCosineGenerator(_))
        ));
        let jordan = CMatrix::from_row_slice(2, 2, &[c(0.5), c(1.0), c(0.0), c(0.5)]);
        assert!(matches!(
            decompose(&jordan),
            Err(Error::NotCosineGenerator(_))
        ));
    }

    #[test]
    fn distance_examples() {
        let s = SpectralCosine::scalar(a("2/5"));
        assert!(sup_distance_to_scalar(&s, &a("2/5"), &cfg())
            .unwrap()
            .sup
            .value
            .hi()
            .is_zero());
        let d = SpectralCosine::diagonal(&[a("2/5"), a("4/5")]).unwrap();
        let r = sup_distance_to_scalar(&d, &a("2/5"), &cfg()).unwrap();
        assert!(r.exact);
        assert_eq!(r.sup.value.closed_form(), Some(&ClosedForm::Sqrt5Over2));
        assert!(matches!(
            sup_distance_to_symbolic(&d, &SymbolicAngle::IrrationalMultipleOfPi, &cfg()),
            Err(Error::IrrationalUnsupported(_))
        ));
    }

    #[test]
    fn conjugated_distance_dominates_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let diag = SpectralCosine::diagonal(&[a("2/5"), a("4/5"), a("2/5")]).unwrap();
        let (s, s_inv) = random_similarity(3, &mut rng);
        let conj = diag.conjugated(&s, &s_inv).unwrap();
        let exact = sup_distance_to_scalar(&diag, &a("2/5"), &cfg()).unwrap();
        let padded = sup_distance_to_scalar(&conj, &a("2/5"), &cfg()).unwrap();
        assert!(!padded.exact);
        assert!(padded.sup.value.hi_f64() >= exact.sup.value.lo_f64());
    }

    #[test]
    fn prop25_examples() {
        let r = prop25_truncation(1).unwrap().report(128);
        assert!(r.sup_is_three_halves && r.idempotents_recovered == 1);
        let fam = prop25_truncation(3).unwrap();
        assert_eq!(fam.idempotent(&[1, 0, 0]), vec![1, 0, 0]);
        let r = prop25_truncation(5).unwrap().report(128);
        assert!(
            r.separates_coordinates && r.idempotents_recovered == 5 && r.subset_identities_hold
        );
        let r = prop25_truncation(15).unwrap().report(128);
        assert!(!r.exhaustive && r.sup_is_three_halves);
        assert!(prop25_truncation(21).is_err());
    }

    #[test]
    fn harness_small() {
        let r = zero_law_harness(40, 5, &cfg()).unwrap();
        assert!(r.pass, "{:?}", r.violations);
        assert!(r.min_gap >= -1e-12);
        assert_eq!(r.witnesses.len(), 3);
        let again = zero_law_harness(40, 5, &cfg().sequential()).unwrap();
        assert_eq!(again.min_gap, r.min_gap);
    }
}
