//! Self-check suite behind the `verify` command.
//!
//! Each entry is keyed by the statement it checks. Entries never panic; a
//! computation error becomes a failing entry carrying the error text.

use std::collections::BTreeSet;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    check_dalembert, decompose, optimality_witnesses, prop25_truncation, random_spectral_cosine,
    sup_distance_to_scalar, CosineSequence, SpectralCosine,
};
use crate::angle::{angles_up_to_order, canonicalize, inverse_totient, totient, RationalAngle};
use crate::certified::{
    cmp_certified, matches_closed_form, CertOrdering, ClosedForm, CLOSED_FORM_TOLERANCE,
};
use crate::cyclic::{brute_force_sup, gamma, gamma_zero, sup_distance, Threshold};
use crate::error::{Error, Result};
use crate::k_constant::{
    k_of_order, omega, triple_angle_report, DiscrepancyKind, REFERENCE_OMEGA_THREE_HALVES,
};
use crate::real_sup::{taylor_tables, trig_diff_sup, Family};
use crate::Config;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub key: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    pub entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    /// First error that aborted a check, if it was a precision failure.
    pub fn precision_failure(&self) -> Option<&LedgerEntry> {
        self.entries
            .iter()
            .find(|e| !e.pass && e.detail.starts_with("precision exhausted"))
    }
}

struct Builder {
    entries: Vec<LedgerEntry>,
}

impl Builder {
    fn check(&mut self, key: &str, run: impl FnOnce() -> Result<(bool, String)>) {
        let (pass, detail) = match run() {
            Ok(x) => x,
            Err(e) => (false, e.to_string()),
        };
        self.entries.push(LedgerEntry {
            key: key.to_string(),
            pass,
            detail,
        });
    }
}

fn k_is(u: u64, c: &ClosedForm, cfg: &Config) -> Result<bool> {
    let cfg = *cfg;
    let comp = move |prec: u32| {
        Ok(k_of_order(
            u,
            &Config {
                precision_bits: prec,
                ..cfg
            },
        )?
        .value(prec))
    };
    matches_closed_form(&comp, c, CLOSED_FORM_TOLERANCE, &cfg)
}

fn angle(s: &str) -> RationalAngle {
    s.parse().expect("literal angle")
}

fn unmet(what: String) -> Result<(bool, String)> {
    Ok((false, what))
}

/// Runs every check. `seed` drives the randomized entries.
pub fn run(cfg: &Config, seed: u64) -> Ledger {
    let mut b = Builder {
        entries: Vec::new(),
    };
    let prec = cfg.precision_bits;

    for (key, u, c) in [
        ("k: order 5 gives sqrt5/2", 5, ClosedForm::Sqrt5Over2),
        ("k: order 8 gives sqrt2", 8, ClosedForm::Sqrt2),
        ("k: order 16 gives sqrt2", 16, ClosedForm::Sqrt2),
        (
            "k: order 11 gives cos(2pi/11)+cos(3pi/11)",
            11,
            ClosedForm::cos_pair(angle("2/11"), angle("3/11")),
        ),
        ("k: order 1 gives 3/2", 1, ClosedForm::ThreeHalves),
        ("k: order 4 gives 3/2", 4, ClosedForm::ThreeHalves),
        ("k: order 12 gives 3/2", 12, ClosedForm::ThreeHalves),
    ] {
        b.check(key, || Ok((k_is(u, &c, cfg)?, c.to_string())));
    }
    b.check("k: sqrt5/2 floor for orders up to 200", || {
        let floor = ClosedForm::Sqrt5Over2.eval(prec);
        for u in 1..=200 {
            let k = k_of_order(u, cfg)?.value(prec);
            if cmp_certified(&k, &floor) != CertOrdering::Greater
                && !k_is(u, &ClosedForm::Sqrt5Over2, cfg)?
            {
                return unmet(format!("order {u}"));
            }
        }
        Ok((true, "orders 1..=200".into()))
    });

    b.check("real sup: (1,3) attains 8/(3 sqrt3)", || {
        let r = trig_diff_sup(1, 3, 1e-10, cfg)?;
        Ok((
            r.value.closed_form() == Some(&ClosedForm::EightOver3Sqrt3)
                && r.value.width_f64() <= 1e-10,
            format!("{}", r.value),
        ))
    });
    b.check("real sup: (1,2) is exactly 2", || {
        let r = trig_diff_sup(1, 2, 1e-10, cfg)?;
        Ok((
            r.value.is_exact() && r.value.lo_f64() == 2.0,
            format!("{}", r.value),
        ))
    });
    b.check(
        "real sup: odd coprime p<q<=21, q != 3p exceed 8/(3 sqrt3)",
        || {
            let ceiling = ClosedForm::EightOver3Sqrt3.eval(prec);
            for q in (3..=21u64).step_by(2) {
                for p in (1..q).step_by(2).filter(|p| p.gcd(&q) == 1 && q != 3 * p) {
                    if cmp_certified(&trig_diff_sup(p, q, 1e-8, cfg)?.value, &ceiling)
                        != CertOrdering::Greater
                    {
                        return unmet(format!("({p},{q})"));
                    }
                }
            }
            Ok((true, "46 pairs".into()))
        },
    );

    b.check(
        "triple angle: classification for orders up to 34, above 3/2 to 60",
        || {
            let r = triple_angle_report(34, 60, cfg)?;
            let bad: Vec<u64> = r.rows.iter().filter(|x| !x.pass).map(|x| x.order).collect();
            Ok((
                bad.is_empty(),
                if bad.is_empty() {
                    "60 orders".into()
                } else {
                    format!("failing orders {bad:?}")
                },
            ))
        },
    );

    match taylor_tables(cfg) {
        Ok(t) => {
            for row in t.f_rows.iter().chain(&t.g_rows) {
                let name = match row.family {
                    Family::F => "cos x - cos sx",
                    Family::G => "cos 3x - cos sx",
                };
                b.check(&format!("tables: {name}, s = {}", row.s), || {
                    Ok((
                        row.within_reference(),
                        format!("u_s = {} (reference {})", row.u_s, row.reference_u_s),
                    ))
                });
            }
        }
        Err(e) => b.entries.push(LedgerEntry {
            key: "tables".into(),
            pass: false,
            detail: e.to_string(),
        }),
    }

    b.check("omega: 1.2 is the four angles k pi/5", || {
        let o = omega(&Threshold::decimal("1.2")?, cfg)?;
        let got: Vec<String> = o.members.iter().map(|m| m.angle.to_string()).collect();
        Ok((got == ["1/5", "2/5", "3/5", "4/5"], got.join(",")))
    });
    b.check("omega: 1.0 is empty", || {
        Ok((
            omega(&Threshold::decimal("1.0")?, cfg)?.members.is_empty(),
            String::new(),
        ))
    });
    b.check(
        "omega: three-halves order classes and discrepancies",
        || {
            let o = omega(&Threshold::closed(ClosedForm::ThreeHalves), cfg)?;
            let orders_ok =
                o.orders == [1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12, 15, 16, 18, 22, 24, 30];
            let members: BTreeSet<RationalAngle> = o.members.iter().map(|m| m.angle).collect();
            let listed_ok = REFERENCE_OMEGA_THREE_HALVES.iter().all(|s| {
                let (p, q) = s.split_once('/').unwrap_or((s, "1"));
                members.contains(&canonicalize(p.parse().unwrap(), q.parse().unwrap()))
            });
            let mut disc: Vec<(String, DiscrepancyKind)> = o
                .discrepancies
                .iter()
                .map(|d| (d.angle.clone(), d.kind))
                .collect();
            disc.sort();
            let disc_ok =
                disc == [
                    ("1".to_string(), DiscrepancyKind::PresentButUnlisted),
                    ("11/12".to_string(), DiscrepancyKind::PresentButUnlisted),
                    ("5/4".to_string(), DiscrepancyKind::Unlistable),
                ] && o.discrepancies.iter().all(|d| d.oracle_member);
            Ok((
                o.certified && orders_ok && listed_ok && disc_ok,
                format!(
                    "{} members, {} discrepancies",
                    o.members.len(),
                    o.discrepancies.len()
                ),
            ))
        },
    );

    b.check("gamma: zero at 1.5", || {
        let g = gamma_zero(&Threshold::decimal("1.5")?, cfg)?;
        Ok((
            g.members == [angle("0"), angle("2/3")],
            format!(
                "{:?}",
                g.members.iter().map(|x| x.to_string()).collect::<Vec<_>>()
            ),
        ))
    });
    b.check("gamma: 2pi/5 at 1.2", || {
        let g = gamma(&angle("2/5"), &Threshold::decimal("1.2")?, cfg)?;
        Ok((g.members == [angle("2/5"), angle("4/5")], String::new()))
    });
    b.check("gamma: random thresholds against brute force", || {
        let pool = angles_up_to_order(60);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..25 {
            let base = pool[rng.gen_range(0..pool.len())];
            let milli: u64 = rng.gen_range(500..=1800);
            let text = format!("{}.{:03}", milli / 1000, milli % 1000);
            let m = milli as f64 / 1000.0;
            let set: BTreeSet<RationalAngle> = gamma(&base, &Threshold::decimal(&text)?, cfg)?
                .members
                .into_iter()
                .collect();
            for x in &pool {
                let (s, _) = brute_force_sup(&base, x);
                if (s - m).abs() > 1e-9 && set.contains(x) != (s < m) {
                    return unmet(format!("gamma({base}, {text}) at {x}"));
                }
            }
        }
        Ok((true, "25 cases".into()))
    });

    b.check("totient: brute force to 10000 and inverse of 2", || {
        let ok = (1..=10_000u64)
            .all(|n| totient(n) == (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64);
        Ok((ok && inverse_totient(2) == [3, 4, 6], String::new()))
    });

    b.check(
        "simulator: d'Alembert and decomposition for 100 random builds",
        || {
            let pool = angles_up_to_order(30);
            for t in 0..100u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t));
                let dim = rng.gen_range(1..=6usize);
                let count = rng.gen_range(1..=dim);
                let mut chosen = BTreeSet::new();
                while chosen.len() < count {
                    chosen.insert(pool[rng.gen_range(0..pool.len())]);
                }
                let angles: Vec<RationalAngle> = chosen.into_iter().collect();
                let seq = random_spectral_cosine(dim, &angles, t % 4 != 0, &mut rng)?;
                if !check_dalembert(&seq, 50, 1e-10) {
                    return unmet(format!("build {t}: d'Alembert"));
                }
                let mut got = decompose(&seq.at(1))?.angles();
                got.sort();
                if got != angles {
                    return unmet(format!("build {t}: recovered {got:?}"));
                }
            }
            Ok((true, "100 builds".into()))
        },
    );
    b.check(
        "simulator: truncated idempotent family for N up to 10",
        || {
            for n in 1..=10 {
                let r = prop25_truncation(n)?.report(prec);
                if !(r.sup_is_three_halves
                    && r.idempotents_recovered == n
                    && r.separates_coordinates
                    && r.subset_identities_hold)
                {
                    return unmet(format!("N = {n}"));
                }
            }
            Ok((true, "sup = 3/2 exactly".into()))
        },
    );
    b.check(
        "simulator: optimality witnesses for orders 5, 8, 11",
        || {
            for (x, y) in optimality_witnesses(cfg)? {
                let sup = sup_distance_to_scalar(&SpectralCosine::diagonal(&[x, y])?, &x, cfg)?
                    .sup
                    .value;
                let cf = k_of_order(x.order(), cfg)?
                    .closed_form()
                    .ok_or(Error::InvalidInput("k without closed form".into()))?;
                if !matches_closed_form(&sup, &cf, CLOSED_FORM_TOLERANCE, cfg)? {
                    return unmet(format!("({x}, {y})"));
                }
            }
            Ok((true, String::new()))
        },
    );
    b.check("cyclic sup: 2pi/5 against 4pi/5 is sqrt5/2", || {
        let s = sup_distance(&angle("2/5"), &angle("4/5"), cfg)?;
        Ok((
            s.value.closed_form() == Some(&ClosedForm::Sqrt5Over2),
            format!("witness n = {}", s.witness_n),
        ))
    });

    Ledger { entries: b.entries }
}
