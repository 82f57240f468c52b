//! Cross-checks of certified results against independent double-precision oracles.

use proptest::prelude::*;

use cosrigid::angle::{angles_of_order, angles_up_to_order, canonicalize};
use cosrigid::cyclic::{brute_force_sup, gamma, sup_distance, Threshold};
use cosrigid::k_constant::{brute_force_k, k_of_order, omega};
use cosrigid::real_sup::trig_diff_sup;
use cosrigid::{CertScalar, Config, Execution, RationalAngle};

fn cfg() -> Config {
    Config::default()
}

fn angle() -> impl Strategy<Value = RationalAngle> {
    (1i64..=90, 0i64..=180).prop_map(|(q, p)| canonicalize(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cyclic_sup_matches_brute_force(a in angle(), b in angle()) {
        prop_assume!(a.order().saturating_mul(b.order()) <= 20_000);
        let s = sup_distance(&a, &b, &cfg()).unwrap();
        let (oracle, n) = brute_force_sup(&a, &b);
        prop_assert!(s.value.lo_f64() - 1e-12 <= oracle && oracle <= s.value.hi_f64() + 1e-12);
        let at_witness = (a.cos_multiple_f64(s.witness_n as i64) - b.cos_multiple_f64(s.witness_n as i64)).abs();
        prop_assert!((at_witness - oracle).abs() < 1e-9);
        prop_assert!(s.witness_n <= n);
    }

    #[test]
    fn sup_is_symmetric(a in angle(), b in angle()) {
        prop_assume!(a.order().saturating_mul(b.order()) <= 10_000);
        let x = sup_distance(&a, &b, &cfg()).unwrap();
        let y = sup_distance(&b, &a, &cfg()).unwrap();
        prop_assert!(x.value.overlaps(&y.value));
        prop_assert_eq!(x.period, y.period);
    }
}

#[test]
fn k_matches_brute_force_for_small_orders() {
    for u in 1..=30u64 {
        let k = k_of_order(u, &cfg()).unwrap().value(128);
        let a = angles_of_order(u)[0];
        let oracle = brute_force_k(&a);
        assert!(
            (k.mid_f64() - oracle).abs() < 1e-9,
            "order {u}: {} vs {oracle}",
            k.mid_f64()
        );
    }
}

#[test]
fn omega_members_have_small_brute_force_k() {
    let o = omega(&Threshold::decimal("1.45").unwrap(), &cfg()).unwrap();
    let members: Vec<RationalAngle> = o.members.iter().map(|m| m.angle).collect();
    for u in 1..=30 {
        // k depends only on the order.
        let k = brute_force_k(&angles_of_order(u)[0]);
        for a in angles_of_order(u) {
            if (k - 1.45).abs() > 1e-9 {
                assert_eq!(members.contains(&a), k < 1.45, "{a}: oracle k = {k}");
            }
        }
    }
    assert!(members.iter().all(|a| a.order() <= 30));
}

#[test]
fn gamma_is_symmetric_in_membership() {
    let m = Threshold::decimal("1.3").unwrap();
    for a in angles_up_to_order(12) {
        for b in gamma(&a, &m, &cfg()).unwrap().members {
            let back = gamma(&b, &m, &cfg()).unwrap();
            assert!(back.members.contains(&a), "{a} in Gamma({b})");
        }
    }
}

#[test]
fn real_sup_dominates_cyclic_sups() {
    // sup over x in R bounds sup over x = 2 pi k / u.
    for (p, q) in [(1u64, 2u64), (1, 3), (3, 5), (2, 7), (3, 11)] {
        let r = trig_diff_sup(p, q, 1e-9, &cfg()).unwrap();
        for u in [7u64, 11, 30, 97] {
            let a = canonicalize(2, u as i64);
            let s = sup_distance(&a.multiple(p as i64), &a.multiple(q as i64), &cfg()).unwrap();
            assert!(
                s.value.lo_f64() <= r.value.hi_f64() + 1e-12,
                "({p},{q}) at order {u}"
            );
        }
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let seq = cfg().sequential();
    let par = Config {
        execution: Execution::Parallel,
        ..cfg()
    };
    let m = Threshold::decimal("1.5").unwrap();
    assert_eq!(omega(&m, &seq).unwrap(), omega(&m, &par).unwrap());
    let a = canonicalize(2, 9);
    assert_eq!(gamma(&a, &m, &seq).unwrap(), gamma(&a, &m, &par).unwrap());
}

#[test]
fn reports_round_trip_through_json() {
    let s = sup_distance(&canonicalize(2, 11), &canonicalize(6, 11), &cfg()).unwrap();
    let back: cosrigid::cyclic::SupResult =
        serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(s, back);
    let o = omega(&Threshold::decimal("1.2").unwrap(), &cfg()).unwrap();
    let back: cosrigid::k_constant::OmegaResult =
        serde_json::from_str(&serde_json::to_string(&o).unwrap()).unwrap();
    assert_eq!(o, back);
    let x = CertScalar::from_decimal("1.4961", 128).unwrap();
    let back: CertScalar = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
    assert_eq!(x, back);
}
