use num_bigint::BigInt;
use wachfam_core::lab::{classify_reduction_label, congruence_check, specialize, ReductionLabel};
use wachfam_core::lambda::{q_n, q_series};
use wachfam_core::series::{
    compose, evaluate_x, frobenius, gamma_act, in_ring_r, invert_unit, reduce_mod_p,
};
use wachfam_core::wach::standard_gammas;
use wachfam_core::{
    binomial, Error, FamilySeries, GammaElement, LambdaEngine, PadicScalar, PiSeries,
    PrecisionProfile, RingElement, Valuation, WachFamily,
};

const REL: u32 = 20;

fn s(p: u32, n: i64) -> PadicScalar {
    PadicScalar::from_i64(p, n, REL)
}

fn ser(p: u32, n: usize, vals: &[i64]) -> PiSeries {
    PiSeries::from_i64s(p, n, vals, REL)
}

fn eq(a: &PiSeries, b: &PiSeries) -> bool {
    a.sub_ref(b).is_zero_mod(12)
}

#[test]
fn scalar_arithmetic() {
    let q = s(3, 12).div(&s(3, 3)).unwrap();
    assert!(q.sub(&s(3, 4)).is_zero_mod(12));
    assert_eq!(q.valuation(), Valuation::Exact(0));
    assert!(PadicScalar::zero(5).mul(&s(5, 17)).is_exact_zero());
    assert_eq!(s(5, 5).mul(&s(5, 25)).valuation(), Valuation::Exact(3));
    assert!(matches!(
        s(5, 1).div(&PadicScalar::zero(5)),
        Err(Error::DivisionByZero)
    ));
}

#[test]
fn valuations() {
    assert_eq!(s(3, 9).valuation(), Valuation::Exact(2));
    assert_eq!(PadicScalar::zero(3).valuation(), Valuation::Infinite);
    let third = PadicScalar::from_ratio(3, &BigInt::from(1), &BigInt::from(3), REL).unwrap();
    assert_eq!(third.valuation(), Valuation::Exact(-1));
}

#[test]
fn binomials() {
    assert!(binomial(&s(7, 4), 2).unwrap().sub(&s(7, 6)).is_zero_mod(12));
    assert!(binomial(&s(7, 12345), 0)
        .unwrap()
        .sub(&s(7, 1))
        .is_zero_mod(12));
    assert_eq!(
        binomial(&s(3, 3), 1).unwrap().valuation(),
        Valuation::Exact(1)
    );
    assert_eq!(
        binomial(&s(3, 3), 2).unwrap().valuation(),
        Valuation::Exact(1)
    );
}

#[test]
fn profile_rules() {
    assert!(matches!(
        PrecisionProfile::new(2, 5, 5, 1),
        Err(Error::InvalidPrime(_))
    ));
    assert!(PrecisionProfile::new(9, 5, 5, 1).is_err());
    assert!(PrecisionProfile::new(3, 0, 5, 1).is_err());
    assert!(PrecisionProfile::new(3, 5, 0, 1).is_err());
    assert!(PrecisionProfile::new(3, 5, 5, 0).is_err());
}

#[test]
fn composition() {
    let p = 5;
    let n = 6;
    let g = ser(p, n, &[0, 2, 3]);
    assert!(eq(&compose(&ser(p, n, &[0, 1]), &g).unwrap(), &g));
    assert!(eq(
        &compose(&ser(p, n, &[0, 0, 1]), &ser(p, n, &[0, 2])).unwrap(),
        &ser(p, n, &[0, 0, 4])
    ));
    assert!(eq(
        &compose(&ser(p, n, &[1, 1]), &ser(p, n, &[0, 1, 1])).unwrap(),
        &ser(p, n, &[1, 1, 1])
    ));
    assert!(matches!(
        compose(&g, &ser(p, n, &[1, 1])),
        Err(Error::NonzeroConstantTerm)
    ));
}

#[test]
fn frobenius_examples() {
    let f = frobenius(&ser(3, 6, &[0, 1]));
    assert!(eq(&f.truncated(2), &ser(3, 2, &[0, 3])));
    assert!(eq(&frobenius(&ser(5, 6, &[7])), &ser(5, 6, &[7])));
}

#[test]
fn gamma_examples() {
    let f = ser(5, 6, &[1, 2, 3, 4]);
    let id = GammaElement::from_i64(5, 1, REL).unwrap();
    assert!(eq(&gamma_act(&id, &f).unwrap(), &f));
    let two = GammaElement::from_i64(5, 2, REL).unwrap();
    assert!(eq(
        &gamma_act(&two, &ser(5, 6, &[0, 1])).unwrap(),
        &ser(5, 6, &[0, 2, 1])
    ));
    let four = GammaElement::from_i64(3, 4, REL).unwrap();
    assert!(eq(
        &gamma_act(&four, &ser(3, 6, &[0, 1])).unwrap().truncated(2),
        &ser(3, 2, &[0, 4])
    ));
    assert!(GammaElement::from_i64(3, 6, REL).is_err());
}

#[test]
fn inversion_examples() {
    assert!(eq(
        &invert_unit(&ser(3, 6, &[1])).unwrap(),
        &ser(3, 6, &[1])
    ));
    assert!(eq(
        &invert_unit(&ser(3, 6, &[1, 1])).unwrap(),
        &ser(3, 6, &[1, -1, 1, -1, 1, -1])
    ));
    let inv_q = invert_unit(&ser(3, 6, &[3, 3, 1])).unwrap();
    assert_eq!(inv_q.coeff(0).valuation(), Valuation::Exact(-1));
}

#[test]
fn ring_r_examples() {
    for p in [3u32, 5, 7] {
        let inv_p = PadicScalar::p_power(p, -1, REL);
        let mut edge = PiSeries::zero(p, 10);
        edge.set_coeff(p as usize - 1, inv_p.clone());
        assert!(in_ring_r(&edge));
        let mut below = PiSeries::zero(p, 10);
        below.set_coeff(p as usize - 2, inv_p);
        assert!(!in_ring_r(&below));
        assert!(in_ring_r(&ser(p, 10, &[4, 9, 1, 2])));
    }
}

#[test]
fn evaluation_examples() {
    let p = 3;
    let z = ser(p, 5, &[3, 1, 2]);
    let zero = PiSeries::zero(p, 5);
    let xz = FamilySeries::from_columns(&[zero.clone(), z.clone(), zero]).unwrap();
    assert!(eq(
        &evaluate_x(&xz, &PadicScalar::zero(p)).unwrap(),
        &PiSeries::zero(p, 5)
    ));
    assert!(evaluate_x(&xz, &s(p, 3))
        .unwrap()
        .sub_ref(&z.scale(&s(p, 3)))
        .is_zero_mod(3));
    let flat = FamilySeries::from_pi_series(&z, 3);
    assert!(evaluate_x(&flat, &s(p, 9))
        .unwrap()
        .sub_ref(&z)
        .is_zero_mod(6));
    assert!(evaluate_x(&xz, &s(p, 2)).is_err());
}

#[test]
fn reduction_examples() {
    let p = 5;
    let g = ser(p, 6, &[1, 2, 3]);
    assert_eq!(reduce_mod_p(&g.scale(&s(p, 5))).unwrap(), vec![0; 6]);
    let q = q_series(p, 6, REL);
    assert_eq!(reduce_mod_p(&q).unwrap(), vec![0, 0, 0, 0, 1, 0]);
    assert_eq!(reduce_mod_p(&ser(p, 3, &[1, 5])).unwrap(), vec![1, 0, 0]);
}

#[test]
fn q_examples() {
    assert!(eq(&q_series(3, 6, REL), &ser(3, 6, &[3, 3, 1])));
    for p in [3u32, 5, 7] {
        for n in 1..4 {
            assert!(q_n(p, n, 8, REL)
                .unwrap()
                .coeff(0)
                .sub(&s(p, i64::from(p)))
                .is_zero_mod(12));
        }
        assert!(eq(
            &q_n(p, 2, 8, REL).unwrap(),
            &frobenius(&q_n(p, 1, 8, REL).unwrap())
        ));
    }
}

#[test]
fn lambda_examples() {
    let engine = LambdaEngine::new(PrecisionProfile::new(3, 10, 40, 4).unwrap()).unwrap();
    assert!(engine.check_identities().all());
    let id = wachfam_core::lambda::gamma_element(engine.profile(), 1).unwrap();
    let r = engine.ratio_gamma(engine.lambda_plus(), &id).unwrap();
    assert!(r.sub_ref(&PiSeries::one(3, 40, REL)).is_zero_mod(10));
    let z2 = engine.standard_z(2).unwrap();
    assert_eq!(z2.m, 0);
    assert!(z2.z.coeff(0).sub(&s(3, 1)).is_zero_mod(10));
    assert!(z2.z.coeffs()[1..].iter().all(PadicScalar::is_exact_zero));
    assert_eq!(engine.minimal_m(2).unwrap(), 0);
    assert_eq!(engine.minimal_m(4).unwrap(), 0);
    assert!(engine.minimal_m(5).unwrap() <= 1);
}

#[test]
fn family_examples() {
    let p = 3;
    let profile = PrecisionProfile::new(p, 8, 20, 3).unwrap();
    let engine = LambdaEngine::new(profile).unwrap();
    let gammas = standard_gammas(&profile).unwrap();
    let family = WachFamily::build(&engine, 4, &gammas).unwrap();
    assert_eq!(family.m(), 1);
    assert!(family.z().coeff(0).sub(&s(p, 3)).is_zero_mod(8));
    let pm = family.p_matrix().to_mat();
    assert!(pm.e[0][0].is_zero_mod(8));
    assert!(pm.e[0][1]
        .add_ref(&FamilySeries::from_pi_series(&PiSeries::one(p, 20, REL), 3))
        .is_zero_mod(8));
    let det = family.p_matrix().det();
    let q3 = FamilySeries::from_pi_series(&q_series(p, 20, REL).pow(3, REL), 3);
    assert!(det.sub_ref(&q3).is_zero_mod(8));
    let (g, eta) = (&gammas[0], &gammas[1]);
    assert!(family.check_cocycle(g, eta).unwrap());
    assert!(family.check_cocycle(g, g).unwrap());

    let alpha = s(p, 3);
    let module = specialize(&family, &alpha).unwrap();
    let pa = module.p_alpha();
    assert!(pa.e[1][1].coeff(0).sub(&s(p, 9)).is_zero_mod(3));
    assert!(pa.e[1][0].coeff(0).sub(&s(p, 27)).is_zero_mod(8));
    for (_, g) in module.gammas() {
        assert!(g.e[0][0].coeff(0).sub(&s(p, 1)).is_zero_mod(3));
        assert!(g.e[0][1].coeff(0).is_zero_mod(3));
    }
    assert!(congruence_check(&family, &s(p, 3), &s(p, 3 + 27), 3).unwrap());
    assert!(congruence_check(&family, &alpha, &alpha, 3).unwrap());
    assert!(congruence_check(&family, &alpha, &PadicScalar::zero(p), 1).unwrap());
}

#[test]
fn reduction_labels() {
    assert_eq!(
        classify_reduction_label(3, 4),
        ReductionLabel::Irreducible { exponent: 3 }
    );
    assert_eq!(
        classify_reduction_label(3, 5),
        ReductionLabel::Split { twist: 1 }
    );
    assert_eq!(
        classify_reduction_label(5, 2),
        ReductionLabel::Irreducible { exponent: 1 }
    );
}
