use proptest::prelude::*;
use tiltlab_core::arith::{q, Prime};
use tiltlab_core::layer::{layer_make, LayerElem, LayerRing};
use tiltlab_core::monoidal::{sharp, LiftMode};
use tiltlab_core::ramified::{delta_table, semigroup_conductor, KummerCoverSpec};
use tiltlab_core::syntax::layer_elem;
use tiltlab_core::tilt::small_tilt;
use tiltlab_core::tower::{build_tower, TowerHandle, TowerSpec};

fn ring() -> LayerRing {
    layer_make(Prime::new(5).unwrap(), 4, 10, 0, q(1, 1)).unwrap()
}

fn elem(r: &LayerRing, coords: &[u64]) -> LayerElem {
    r.from_coords(coords)
}

fn coords(r: &LayerRing) -> impl Strategy<Value = Vec<u64>> {
    let md = r.modulus().value;
    prop::collection::vec(0..md, r.rank())
}

fn pure3() -> TowerHandle {
    build_tower(&TowerSpec::pure(5, 6, 3).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn layer_is_a_commutative_ring(a in coords(&ring()), b in coords(&ring()), c in coords(&ring())) {
        let r = ring();
        let (x, y, z) = (elem(&r, &a), elem(&r, &b), elem(&r, &c));
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y.add(&z).unwrap()).unwrap(), x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&r.one()).unwrap(), x.clone());
    }

    #[test]
    fn valuation_is_additive_below_precision(a in coords(&ring()), b in coords(&ring())) {
        let r = ring();
        let (x, y) = (elem(&r, &a), elem(&r, &b));
        if let (Some(vx), Some(vy)) = (x.valuation().finite(), y.valuation().finite()) {
            if vx + vy < r.precision() {
                prop_assert_eq!(x.mul(&y).unwrap().valuation().finite(), Some(vx + vy));
            }
        }
    }

    #[test]
    fn text_round_trips(a in coords(&ring())) {
        let r = ring();
        let x = elem(&r, &a);
        prop_assert_eq!(layer_elem(&r, &x.to_string()).unwrap(), x);
    }

    #[test]
    fn transition_is_a_ring_map(a in prop::collection::vec(0u64..5, 25), b in prop::collection::vec(0u64..5, 25)) {
        let h = pure3();
        let sp = h.quot(2).unwrap();
        let (x, y) = (sp.from_coeffs(a[..sp.dim()].to_vec()), sp.from_coeffs(b[..sp.dim()].to_vec()));
        let tx = h.quot_transition(2, &x).unwrap();
        let ty = h.quot_transition(2, &y).unwrap();
        prop_assert_eq!(h.quot_transition(2, &x.mul(&y).unwrap()).unwrap(), tx.mul(&ty).unwrap());
        prop_assert_eq!(h.quot_transition(2, &x.add(&y).unwrap()).unwrap(), tx.add(&ty).unwrap());
    }

    #[test]
    fn frobenius_projection_undoes_transition_up_to_frobenius(a in prop::collection::vec(0u64..5, 25)) {
        let h = pure3();
        let sp = h.quot(2).unwrap();
        let x = sp.from_coeffs(a[..sp.dim()].to_vec());
        let up = h.quot_transition(2, &x).unwrap();
        prop_assert_eq!(h.frob_projection(2, &up).unwrap(), x.frobenius());
    }

    #[test]
    fn sharp_is_multiplicative(a in prop::collection::vec(0u64..5, 125), b in prop::collection::vec(0u64..5, 125)) {
        let h = pure3();
        let pres = small_tilt(&h, 0, 3).unwrap();
        let x = pres.element(pres.deepest.from_coeffs(a)).unwrap();
        let y = pres.element(pres.deepest.from_coeffs(b)).unwrap();
        let sx = sharp(&h, &x, LiftMode::Canonical).unwrap();
        let sy = sharp(&h, &y, LiftMode::Canonical).unwrap();
        let sxy = sharp(&h, &pres.mul(&x, &y).unwrap(), LiftMode::Canonical).unwrap();
        let prec = sx.effective_precision.min(sy.effective_precision).min(sxy.effective_precision);
        let diff = sx.elem.mul(&sy.elem).unwrap().sub(&sxy.elem).unwrap();
        prop_assert!(diff.valuation().capped(sxy.elem.ring().precision()) >= prec);
    }

    #[test]
    fn two_generator_conductor(a in 2u64..12, b in 2u64..12) {
        prop_assume!(num_integer::gcd(a, b) == 1);
        prop_assert_eq!(semigroup_conductor(&[a, b]), Some((a - 1) * (b - 1)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn delta_matches_closed_form(p in prop::sample::select(vec![2u64, 3, 5]), m in 2u64..5) {
        prop_assume!(m % p != 0);
        let table = delta_table(&KummerCoverSpec::new(p, m, 4, 2).unwrap()).unwrap();
        for r in &table.rows {
            let closed = q(((m - 1) * (p - 1)) as i64, (m * p.pow(r.n + 1)) as i64);
            prop_assert_eq!(r.delta, closed);
            prop_assert_eq!(r.semigroup_exponent, r.elimination_exponent);
        }
    }
}
