use num::{BigInt, Zero};
use proptest::prelude::*;

use nadir_core::module::{RadiiKind, RadiiMultiset};
use nadir_core::polyhedral::UnimodularMatrix;
use nadir_core::pw_affine::{Affine, Envelope, PiecewiseAffine};
use nadir_core::rational::{ord_p, q, qf, round_p_adic};
use nadir_core::transforms::frob_push;
use nadir_core::twisted::TwistedPoly;
use nadir_core::valued::{LaurentElement, ValuationConfig, ValuationValue};
use nadir_core::Q;

fn rational() -> impl Strategy<Value = Q> {
    (-60i64..=60, 1i64..=24).prop_map(|(n, d)| qf(n, d))
}

fn nonzero() -> impl Strategy<Value = Q> {
    rational().prop_filter("nonzero", |x| !x.is_zero())
}

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

fn laurent(cfg: ValuationConfig) -> impl Strategy<Value = LaurentElement> {
    prop::collection::vec((nonzero(), -4i64..=4), 1..4).prop_map(move |terms| {
        terms.iter().fold(LaurentElement::zero_for(&cfg), |acc, (c, e)| {
            acc.add(&LaurentElement::t_power(&cfg, c.clone(), 0, *e))
        })
    })
}

proptest! {
    #[test]
    fn p_adic_rounding_is_close(x in nonzero(), p in prime(), extra in 1i64..8) {
        let k = ord_p(&x, p) + extra;
        let y = round_p_adic(&x, p, k);
        prop_assert_eq!(ord_p(&y, p), ord_p(&x, p));
        let d = &x - &y;
        prop_assert!(d.is_zero() || ord_p(&d, p) >= k);
    }

    #[test]
    fn gauss_valuation_is_multiplicative(
        p in prime(),
        r in rational(),
        (x, y) in (laurent(ValuationConfig::geometric(2)), laurent(ValuationConfig::geometric(2))),
    ) {
        let cfg = ValuationConfig::geometric(p);
        prop_assume!(!x.is_zero() && !y.is_zero());
        let rv = [r];
        let vx = x.gauss_valuation(&cfg, &rv).unwrap();
        let vy = y.gauss_valuation(&cfg, &rv).unwrap();
        let vxy = x.mul(&y).gauss_valuation(&cfg, &rv).unwrap();
        match (vx, vy, vxy) {
            (ValuationValue::Finite(a), ValuationValue::Finite(b), ValuationValue::Finite(c)) => prop_assert_eq!(a + b, c),
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn commutative_polygons_add(
        p in prime(),
        r in rational(),
        roots in prop::collection::vec((nonzero(), -3i64..=3), 1..4),
    ) {
        let cfg = ValuationConfig::geometric(p);
        let lin = |c: &Q, e: i64| TwistedPoly::from_coeffs(
            None,
            &cfg,
            vec![LaurentElement::t_power(&cfg, -c.clone(), 0, e), LaurentElement::one_for(&cfg)],
        );
        let prod = roots[1..].iter().fold(lin(&roots[0].0, roots[0].1), |acc, (c, e)| acc.mul(&lin(c, *e)).unwrap());
        let got = prod.newton_polygon(&cfg, std::slice::from_ref(&r)).unwrap().paper_slopes();
        // the slopes are the valuations of the roots
        let mut want: Vec<Q> = roots.iter().map(|(c, e)| q(ord_p(c, p)) + &r * q(*e)).collect();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn push_multiplies_rank(values in prop::collection::vec((0i64..=40, 1i64..=8), 1..5), p in prime()) {
        let fs: Vec<Q> = values.iter().map(|(n, d)| qf(*n, *d)).collect();
        let out = frob_push(&RadiiMultiset::from_values(RadiiKind::Intrinsic, &fs), p).unwrap();
        prop_assert_eq!(out.rank(), fs.len() * p as usize);
    }

    #[test]
    fn completion_is_unimodular(a in -30i64..=30, b in -30i64..=30, c in -30i64..=30) {
        let g = num::integer::gcd(num::integer::gcd(a, b), c);
        prop_assume!(g == 1);
        let m = UnimodularMatrix::complete(&[a, b, c]).unwrap();
        prop_assert_eq!(m.rows()[0].clone(), vec![a, b, c]);
        let r = vec![qf(a, 3), qf(b, 5), q(c)];
        prop_assert_eq!(m.fiber_preimage(&m.fiber(&r)), r);
    }

    #[test]
    fn max_envelope_dominates(
        lines in prop::collection::vec((-5i64..=5, rational()), 1..6),
        x in 0i64..=100,
    ) {
        let ls: Vec<Affine> = lines.iter().map(|(s, c)| Affine::new(q(*s), c.clone())).collect();
        let env = PiecewiseAffine::envelope(q(-2), q(3), &ls, Envelope::Max).unwrap();
        let at = q(-2) + qf(x, 20);
        let best = ls.iter().map(|l| l.eval(&at)).max().unwrap();
        prop_assert_eq!(env.eval(&at), best);
        prop_assert!(env.is_convex());
    }
}

#[test]
fn rounding_keeps_heights_small() {
    let x = Q::new(BigInt::from(7).pow(40) + 1, BigInt::from(11).pow(30));
    let y = round_p_adic(&x, 2, 16);
    assert!(y.numer().bits() <= 17 && y.denom() == &BigInt::from(1));
}
