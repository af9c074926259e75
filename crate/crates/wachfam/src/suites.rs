//! Verification suites: each turns one group of library checks into
//! certificate rows.

use rayon::prelude::*;
use wachfam_core::claims;
use wachfam_core::lab::{bound_row, congruence_check, specialize_unchecked, BoundRow, FilBasis};
use wachfam_core::lambda::{standard_m, ZOutcome};
use wachfam_core::wach::identity_mod_pi;
use wachfam_core::{GammaElement, LambdaEngine, PadicScalar, RingElement, WachFamily};

use crate::format::{LoadedFamily, ProfileHeader};
use crate::report::{Certificate, Report};

/// λ± identities and the γ-ratio condition for each γ.
pub fn lambda_suite(engine: &LambdaEngine, gammas: &[GammaElement]) -> Vec<Certificate> {
    let h = ProfileHeader::from(engine.profile());
    let checks = engine.check_identities();
    let pair = engine.pair();
    let mut out = vec![
        Certificate::new(claims::LAMBDA_STABILIZED, h, "", true)
            .with_detail(format!("{} factors", pair.factors_used)),
        Certificate::new(claims::LAMBDA_CONSTANT_TERMS, h, "", checks.constant_terms),
        Certificate::new(claims::LAMBDA_RING_R, h, "", checks.ring_r),
        Certificate::new(
            claims::LAMBDA_FROBENIUS,
            h,
            "",
            checks.frobenius_minus && checks.frobenius_plus,
        ),
    ];
    for gamma in gammas {
        let subject = format!("chi={}", gamma.key());
        out.push(match engine.ratio_pair(gamma) {
            Ok(_) => Certificate::new(claims::LAMBDA_GAMMA_RATIO, h, subject, true),
            Err(e) => Certificate::from_error(claims::LAMBDA_GAMMA_RATIO, h, subject, e),
        });
    }
    out
}

/// z is integral at the standard m and minimal_m stays below it.
pub fn z_row(engine: &LambdaEngine, k: u32) -> Vec<Certificate> {
    let h = ProfileHeader::from(engine.profile());
    let p = engine.profile().p();
    let m = standard_m(p, k);
    let subject = format!("k={k} m={m}");
    let mut out = Vec::new();
    out.push(match engine.compute_z(k, m) {
        Ok(ZOutcome::Integral(_)) => Certificate::new(claims::Z_INTEGRAL, h, &subject, true),
        Ok(ZOutcome::NonIntegral { index, valuation }) => {
            Certificate::new(claims::Z_INTEGRAL, h, &subject, false)
                .with_detail(format!("z_{index} has valuation {valuation}"))
        }
        Err(e) => Certificate::from_error(claims::Z_INTEGRAL, h, &subject, e),
    });
    out.push(match engine.minimal_m(k) {
        Ok(mm) => {
            let ok = mm <= m && (k != p + 1 || mm == 0);
            Certificate::new(claims::Z_MINIMAL_M, h, &subject, ok)
                .with_detail(format!("minimal m = {mm}"))
        }
        Err(e) => Certificate::from_error(claims::Z_MINIMAL_M, h, &subject, e),
    });
    out
}

/// Rows of the bound table, with one certificate for the whole table.
pub fn bound_table(engine: &LambdaEngine, k_max: u32) -> (Vec<BoundRow>, Vec<Certificate>) {
    let h = ProfileHeader::from(engine.profile());
    let p = engine.profile().p();
    let rows: Vec<_> = (2..=k_max)
        .into_par_iter()
        .map(|k| (k, bound_row(engine, k)))
        .collect();
    let mut table = Vec::new();
    let mut certs = Vec::new();
    let mut ok = true;
    for (k, row) in rows {
        match row {
            Ok(r) => {
                let want = if k <= p + 1 {
                    Some(0)
                } else if k <= 2 * p - 1 {
                    Some(1)
                } else if k <= 3 * p - 2 {
                    Some(2)
                } else {
                    None
                };
                ok &= want.is_none_or(|w| r.reduction_bound == w) && r.minimal_m <= r.standard_m;
                table.push(r);
            }
            Err(e) => certs.push(Certificate::from_error(
                claims::BOUND_TABLE,
                h,
                format!("k={k}"),
                e,
            )),
        }
    }
    certs.push(Certificate::new(
        claims::BOUND_TABLE,
        h,
        format!("k=2..{k_max}"),
        ok,
    ));
    (table, certs)
}

fn subject_gamma(family: &WachFamily, gamma: &GammaElement) -> String {
    format!("k={} chi={}", family.k(), gamma.key())
}

/// X-level checks on a stored family.
pub fn family_suite(loaded: &LoadedFamily, engine: &LambdaEngine) -> Vec<Certificate> {
    let family = &loaded.family;
    let h = ProfileHeader::from(family.profile());
    let n = i64::from(family.profile().cap_p());
    let k = family.k();
    let mut out = Vec::new();

    let sp = &loaded.stored_p;
    let shape = sp.e[0][0].is_zero_mod(n)
        && sp.e[0][1]
            .add_ref(&one_like(&sp.e[0][1], n as u32))
            .is_zero_mod(n)
        && sp.e[1][0].is_x_independent(n);
    out.push(match family.check_p_display() {
        Ok(ok) => Certificate::new(claims::FAMILY_P, h, format!("k={k}"), ok && shape),
        Err(e) => Certificate::from_error(claims::FAMILY_P, h, format!("k={k}"), e),
    });

    out.push(match engine.compute_z(k, family.m()) {
        Ok(ZOutcome::Integral(z)) => Certificate::new(
            claims::Z_STORED,
            h,
            format!("k={k} m={}", family.m()),
            z.z.sub_ref(family.z()).is_zero_mod(n),
        ),
        Ok(other) => Certificate::new(claims::Z_STORED, h, format!("k={k}"), false)
            .with_detail(format!("{other:?}")),
        Err(e) => Certificate::from_error(claims::Z_STORED, h, format!("k={k}"), e),
    });

    let per_gamma: Vec<Vec<Certificate>> = family
        .gammas()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(gamma, g)| {
            let s = subject_gamma(family, gamma);
            let cert = |claim: &str, r: wachfam_core::Result<bool>| match r {
                Ok(ok) => Certificate::new(claim, h, &s, ok),
                Err(e) => Certificate::from_error(claim, h, &s, e),
            };
            vec![
                cert(claims::LIFT_COMMUTATION, family.check_commutation(gamma)),
                cert(
                    claims::LIFT_INTEGRAL,
                    Ok(g.entries().all(|f| f.is_integral() != Some(false))),
                ),
                cert(claims::LIFT_SHAPE, Ok(identity_mod_pi(g, n))),
                cert(
                    claims::DET_INVARIANT,
                    family.check_det_invariant(gamma, engine),
                ),
            ]
        })
        .collect();
    out.extend(per_gamma.into_iter().flatten());

    for (a, b) in cocycle_pairs(family) {
        let s = format!("k={k} chi={},{}", a.key(), b.key());
        out.push(match family.check_cocycle(&a, &b) {
            Ok(ok) => Certificate::new(claims::COCYCLE, h, s, ok),
            Err(e) => Certificate::from_error(claims::COCYCLE, h, s, e),
        });
    }
    out
}

fn one_like(f: &wachfam_core::FamilySeries, rel: u32) -> wachfam_core::FamilySeries {
    let one = wachfam_core::PiSeries::one(f.p(), f.cap_pi(), rel);
    wachfam_core::FamilySeries::from_pi_series(&one, f.cap_x())
}

/// Ordered pairs (γ, η) of stored elements with γη stored too.
pub fn cocycle_pairs(family: &WachFamily) -> Vec<(GammaElement, GammaElement)> {
    let all: Vec<_> = family.gammas().map(|(g, _)| g.clone()).collect();
    let mut out = Vec::new();
    for a in &all {
        for b in &all {
            if family.get(&a.compose(b)).is_some() {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Checks on the specialization at one α.
pub fn alpha_suite(family: &WachFamily, alpha: &PadicScalar) -> Vec<Certificate> {
    let h = ProfileHeader::from(family.profile());
    let k = family.k();
    let subject = format!("k={k} alpha={alpha}");
    let module = match specialize_unchecked(family, alpha) {
        Ok(m) => m,
        Err(e) => return vec![Certificate::from_error(claims::SPECIALIZE, h, subject, e)],
    };
    let mut out = Vec::new();
    for (gamma, _) in module.gammas() {
        let s = format!("{subject} chi={}", gamma.key());
        out.push(match module.check_commutation(gamma) {
            Ok(ok) => Certificate::new(claims::SPECIALIZE, h, s, ok),
            Err(e) => Certificate::from_error(claims::SPECIALIZE, h, s, e),
        });
    }
    for (a, b) in module.cocycle_pairs() {
        let s = format!("{subject} chi={},{}", a.key(), b.key());
        out.push(match module.check_cocycle(&a, &b) {
            Ok(ok) => Certificate::new(claims::COCYCLE, h, s, ok),
            Err(e) => Certificate::from_error(claims::COCYCLE, h, s, e),
        });
    }

    let top = (i64::from(k) + 2).min(family.profile().cap_pi() as i64 - 1);
    let fil: Result<Vec<FilBasis>, _> = (0..=top).map(|i| module.fil_basis(i)).collect();
    out.push(match fil {
        Ok(bases) => {
            let ok = bases.iter().all(|b| {
                FilBasis {
                    witnesses: b.witnesses,
                    ..FilBasis::expected(b.i, k)
                } == *b
            });
            Certificate::new(claims::FIL_BASIS, h, format!("{subject} i=0..{top}"), ok)
        }
        Err(e) => Certificate::from_error(claims::FIL_BASIS, h, &subject, e),
    });
    out.push(match module.dcris() {
        Ok(d) => Certificate::new(claims::DCRIS_FORM, h, &subject, true).with_detail(d.to_string()),
        Err(e) => Certificate::from_error(claims::DCRIS_FORM, h, &subject, e),
    });

    let p = family.p();
    let zero = PadicScalar::zero(p);
    out.push(match congruence_check(family, alpha, &zero, 1) {
        Ok(ok) => Certificate::new(claims::CONGRUENCE_MOD_P, h, &subject, ok),
        Err(e) => Certificate::from_error(claims::CONGRUENCE_MOD_P, h, &subject, e),
    });
    let rel = family.context().digits();
    let other = alpha.add(&PadicScalar::p_power(p, 3, rel));
    let reach = module.precision().min(3);
    for i in 1..=reach {
        let s = format!("{subject} vs {other} i={i}");
        out.push(match congruence_check(family, alpha, &other, i) {
            Ok(ok) => Certificate::new(claims::CONGRUENCE_MOD_P_I, h, s, ok),
            Err(e) => Certificate::from_error(claims::CONGRUENCE_MOD_P_I, h, s, e),
        });
    }
    out
}

/// Family checks plus the α suites, in a fixed order.
pub fn verify(loaded: &LoadedFamily, engine: &LambdaEngine, alphas: &[PadicScalar]) -> Report {
    let mut report = Report::default();
    report.extend(family_suite(loaded, engine));
    let per_alpha: Vec<Vec<Certificate>> = alphas
        .par_iter()
        .map(|a| alpha_suite(&loaded.family, a))
        .collect();
    report.extend(per_alpha.into_iter().flatten());
    report
}
