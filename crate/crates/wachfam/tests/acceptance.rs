//! The nine acceptance criteria on the reference grid: p in {3, 5, 7},
//! k in 2..=2p+3, cap_p 12, cap_pi 60, cap_x 5.

use std::sync::Mutex;

use rayon::prelude::*;
use wachfam::build_family;
use wachfam::format::FamilyFile;
use wachfam::suites::bound_table;
use wachfam_core::lab::{congruence_check, specialize_unchecked, FilBasis};
use wachfam_core::lambda::{standard_m, ZOutcome};
use wachfam_core::wach::{identity_mod_pi, standard_gammas};
use wachfam_core::{
    FamilySeries, GammaElement, LambdaEngine, LiftContext, Mat2, PadicScalar, PiSeries,
    PrecisionProfile, Valuation, WachFamily,
};

const PRIMES: [u32; 3] = [3, 5, 7];
const CAP_P: u32 = 12;
const CAP_PI: usize = 60;
const CAP_X: usize = 5;

const NAMES: [&str; 9] = [
    "lambda identities",
    "z integrality",
    "seed residual shape",
    "lift convergence and uniqueness",
    "cocycle law",
    "determinant invariant",
    "filtration and D_cris",
    "congruences and bound table",
    "determinism and serialization",
];

#[derive(Default)]
struct Tally {
    checks: [usize; 9],
    failures: [Vec<String>; 9],
}

struct Ledger(Mutex<Tally>);

impl Ledger {
    fn record(&self, criterion: usize, ok: bool, what: impl FnOnce() -> String) {
        let mut t = self.0.lock().unwrap();
        t.checks[criterion - 1] += 1;
        if !ok {
            t.failures[criterion - 1].push(what());
        }
    }

    fn result<T>(&self, criterion: usize, r: wachfam_core::Result<T>, what: &str) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.record(criterion, false, || format!("{what}: {e}"));
                None
            }
        }
    }
}

fn profile(p: u32) -> PrecisionProfile {
    PrecisionProfile::new(p, CAP_P, CAP_PI, CAP_X).unwrap()
}

fn alphas(p: u32, rel: u32) -> Vec<PadicScalar> {
    let p = i64::from(p);
    [0, p, p * p, p + p * p]
        .iter()
        .map(|&a| PadicScalar::from_i64(p as u32, a, rel))
        .collect()
}

fn lambda_checks(ledger: &Ledger, engine: &LambdaEngine, gammas: &[GammaElement]) {
    let p = engine.profile().p();
    let n = i64::from(CAP_P);
    let c = engine.check_identities();
    ledger.record(1, c.all(), || format!("p={p}: {c:?}"));
    for gamma in gammas {
        let Some((rm, rp)) = ledger.result(
            1,
            engine.ratio_pair(gamma),
            &format!("p={p} chi={}", gamma.key()),
        ) else {
            continue;
        };
        for r in [rm, rp] {
            let one_mod_pi = r.coeff(0).sub(&PadicScalar::one(p, CAP_P)).is_zero_mod(n);
            ledger.record(1, one_mod_pi && r.is_integral() != Some(false), || {
                format!("p={p} chi={}: ratio not in 1 + pi Z_p[[pi]]", gamma.key())
            });
        }
    }
}

fn z_checks(ledger: &Ledger, engine: &LambdaEngine, k: u32) {
    let p = engine.profile().p();
    let m = standard_m(p, k);
    let z = engine.compute_z(k, m);
    ledger.record(2, matches!(z, Ok(ZOutcome::Integral(_))), || {
        format!("p={p} k={k} m={m}: {z:?}")
    });
    if let Some(mm) = ledger.result(2, engine.minimal_m(k), &format!("p={p} k={k} minimal_m")) {
        ledger.record(2, mm <= m, || format!("p={p} k={k}: minimal m {mm} > {m}"));
        if k == p + 1 {
            ledger.record(2, mm == 0, || format!("p={p} k={k}: minimal m {mm} != 0"));
        }
    }
}

fn p_pi_identity(p: u32, rel: u32) -> Mat2<FamilySeries> {
    let s = FamilySeries::from_pi_series(
        &PiSeries::from_i64s(p, CAP_PI, &[0, i64::from(p)], rel),
        CAP_X,
    );
    let zero = FamilySeries::zero(p, CAP_PI, CAP_X);
    Mat2::new(s.clone(), zero.clone(), zero, s)
}

fn pi_k_corner(p: u32, k: u32, rel: u32) -> Mat2<FamilySeries> {
    let mut coeffs = vec![0i64; k as usize + 1];
    coeffs[k as usize] = 1;
    let s = FamilySeries::from_pi_series(&PiSeries::from_i64s(p, CAP_PI, &coeffs, rel), CAP_X)
        .shift_x();
    let zero = FamilySeries::zero(p, CAP_PI, CAP_X);
    Mat2::new(zero.clone(), s, zero.clone(), zero)
}

/// Lift every γ step by step, checking seed shape and stability on the way,
/// then assemble the family.
fn lift_checks(
    ledger: &Ledger,
    engine: &LambdaEngine,
    k: u32,
    gammas: &[GammaElement],
) -> Option<WachFamily> {
    let p = engine.profile().p();
    let tag = format!("p={p} k={k}");
    let n = i64::from(CAP_P);
    let zdata = ledger.result(4, engine.standard_z(k), &tag)?;
    let ctx = ledger.result(4, LiftContext::new(*engine.profile(), &zdata), &tag)?;
    let unipotent = [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
    let mut lifts = Vec::new();
    for gamma in gammas {
        let tag = format!("{tag} chi={}", gamma.key());
        let table = ledger.result(3, ctx.gamma_table(gamma), &tag)?;
        let ratios = ledger.result(3, ctx.gamma_ratios(gamma), &tag)?;
        let shape = ctx.seed_shape(&ctx.seed(&ratios), &table);
        ledger.record(3, shape.holds(), || format!("{tag}: {shape:?}"));

        let mut lifter = ledger.result(4, ctx.lifter(gamma), &tag)?;
        let mut first = true;
        while !lifter.is_done() {
            let before = lifter.g().clone();
            let rec = ledger.result(4, lifter.step(), &tag)?;
            let level = rec.level;
            let stable = lifter
                .g()
                .sub(&before)
                .entries()
                .all(|f| f.pi_order(n) >= level - 1);
            ledger.record(4, stable, || {
                format!("{tag}: G moved below pi^{} at level {level}", level - 1)
            });
            ledger.record(4, rec.residual_order >= level, || {
                format!(
                    "{tag}: residual order {} at level {level}",
                    rec.residual_order
                )
            });
            if first {
                ledger.record(
                    4,
                    level == k as usize && rec.operator_mod_p_x == unipotent,
                    || format!("{tag}: level {level} operator {:?}", rec.operator_mod_p_x),
                );
                first = false;
            }
        }
        let order = lifter.residual_order();
        ledger.record(4, order >= CAP_PI, || {
            format!("{tag}: final residual order {order}")
        });
        let g = lifter.into_g();
        ledger.record(
            4,
            ctx.commutes(&g, &table) && identity_mod_pi(&g, n),
            || format!("{tag}: lift does not commute"),
        );
        lifts.push((gamma.clone(), g));
    }
    let family = ledger.result(4, WachFamily::assemble(ctx, lifts), &tag)?;
    let rel = family.context().digits();
    for gamma in gammas {
        for (name, pert) in [
            ("p pi Id", p_pi_identity(p, rel)),
            ("pi^k X E12", pi_k_corner(p, k, rel)),
        ] {
            let caught = family.check_uniqueness(gamma, &pert);
            ledger.record(4, matches!(caught, Ok(true)), || {
                format!("{tag} chi={}: {name} not caught: {caught:?}", gamma.key())
            });
        }
    }
    Some(family)
}

fn family_checks(ledger: &Ledger, engine: &LambdaEngine, family: &WachFamily) {
    let (p, k) = (family.p(), family.k());
    let stored: Vec<GammaElement> = family.gammas().map(|(g, _)| g.clone()).collect();
    for a in &stored {
        for b in &stored {
            if family.get(&a.compose(b)).is_some() {
                let r = family.check_cocycle(a, b);
                ledger.record(5, matches!(r, Ok(true)), || {
                    format!("p={p} k={k} chi={},{}: {r:?}", a.key(), b.key())
                });
            }
        }
        let r = family.check_det_invariant(a, engine);
        ledger.record(6, matches!(r, Ok(true)), || {
            format!("p={p} k={k} chi={}: {r:?}", a.key())
        });
    }
}

fn alpha_checks(ledger: &Ledger, family: &WachFamily, alpha: &PadicScalar) {
    let (p, k) = (family.p(), family.k());
    let tag = format!("p={p} k={k} alpha={alpha}");
    let Some(module) = ledger.result(5, specialize_unchecked(family, alpha), &tag) else {
        return;
    };
    for (a, b) in module.cocycle_pairs() {
        let r = module.check_cocycle(&a, &b);
        ledger.record(5, matches!(r, Ok(true)), || {
            format!("{tag} chi={},{}: {r:?}", a.key(), b.key())
        });
    }

    for i in 0..=i64::from(k) + 2 {
        let Some(basis) = ledger.result(7, module.fil_basis(i), &format!("{tag} i={i}")) else {
            continue;
        };
        let witnesses = usize::from(i >= 1) + usize::from(i >= i64::from(k));
        let want = FilBasis {
            witnesses,
            ..FilBasis::expected(i, k)
        };
        ledger.record(7, basis == want, || format!("{tag} i={i}: {basis:?}"));
    }
    if let Some(d) = ledger.result(7, module.dcris(), &tag) {
        let n = module.precision();
        let ap = PadicScalar::p_power(p, i64::from(module.m()), CAP_P).mul(alpha);
        let entries = &d.frobenius_matrix.e;
        let form = entries[0][0].is_zero_mod(n)
            && entries[0][1]
                .add(&PadicScalar::one(p, CAP_P))
                .is_zero_mod(n)
            && entries[1][0]
                .sub(&PadicScalar::p_power(p, i64::from(k) - 1, CAP_P))
                .is_zero_mod(n)
            && entries[1][1].sub(&ap).is_zero_mod(n);
        let balance = d.det().valuation() == Valuation::Exact(i64::from(k) - 1)
            && d.jumps.iter().sum::<i64>() == i64::from(k) - 1;
        ledger.record(
            7,
            form && d.jumps == [0, i64::from(k) - 1] && balance && d.weakly_admissible(),
            || format!("{tag}: {d}"),
        );
    }

    let zero = PadicScalar::zero(p);
    let r = congruence_check(family, alpha, &zero, 1);
    ledger.record(8, matches!(r, Ok(true)), || {
        format!("{tag} vs 0 mod p: {r:?}")
    });
    for i in 1..=3 {
        let other = alpha.add(&PadicScalar::p_power(p, i, CAP_P));
        let r = congruence_check(family, alpha, &other, i);
        ledger.record(8, matches!(r, Ok(true)), || {
            format!("{tag} vs {other} mod p^{i}: {r:?}")
        });
    }
}

fn bound_checks(ledger: &Ledger, engine: &LambdaEngine) {
    let p = engine.profile().p();
    let k_max = (2 * p + 3).max(3 * p - 2);
    let (rows, certs) = bound_table(engine, k_max);
    for c in &certs {
        ledger.record(8, c.passed, || format!("p={p}: {c:?}"));
    }
    for r in rows {
        let want = if r.k <= p + 1 {
            Some(0)
        } else if r.k <= 2 * p - 1 {
            Some(1)
        } else if r.k <= 3 * p - 2 {
            Some(2)
        } else {
            None
        };
        if let Some(w) = want {
            ledger.record(8, r.reduction_bound == w, || {
                format!("p={p}: {r:?}, expected bound {w}")
            });
        }
    }
}

fn serialization_checks(
    ledger: &Ledger,
    engine: &LambdaEngine,
    family: &WachFamily,
    gammas: &[GammaElement],
) {
    let (p, k) = (family.p(), family.k());
    let json = FamilyFile::from_family(family).to_json();
    match build_family(engine, k, gammas) {
        Ok((again, _)) => {
            let same = FamilyFile::from_family(&again).to_json() == json;
            ledger.record(9, same, || format!("p={p} k={k}: rebuilt file differs"));
        }
        Err(e) => ledger.record(9, false, || format!("p={p} k={k}: rebuild: {e}")),
    }
    match FamilyFile::from_json(&json).and_then(|f| f.load()) {
        Ok(loaded) => {
            let back = &loaded.family;
            let same_text = FamilyFile::from_family(back).to_json() == json;
            let same_data = back.z() == family.z()
                && back.p_matrix() == family.p_matrix()
                && back.gammas().eq(family.gammas());
            ledger.record(9, same_text && same_data, || {
                format!("p={p} k={k}: round trip is lossy")
            });
        }
        Err(e) => ledger.record(9, false, || format!("p={p} k={k}: reload: {e}")),
    }
}

fn main() {
    let ledger = Ledger(Mutex::new(Tally::default()));
    PRIMES.par_iter().for_each(|&p| {
        let profile = profile(p);
        let engine = LambdaEngine::new(profile).expect("lambda engine");
        let gammas = standard_gammas(&profile).expect("standard gammas");
        lambda_checks(&ledger, &engine, &gammas);
        bound_checks(&ledger, &engine);
        (2..=2 * p + 3).into_par_iter().for_each(|k| {
            z_checks(&ledger, &engine, k);
            let Some(family) = lift_checks(&ledger, &engine, k, &gammas) else {
                return;
            };
            family_checks(&ledger, &engine, &family);
            let rel = family.context().digits();
            alphas(p, rel)
                .par_iter()
                .for_each(|a| alpha_checks(&ledger, &family, a));
            serialization_checks(&ledger, &engine, &family, &gammas);
        });
    });

    let tally = ledger.0.into_inner().unwrap();
    let mut failed = Vec::new();
    for (i, name) in NAMES.iter().enumerate() {
        let fails = &tally.failures[i];
        let verdict = if fails.is_empty() && tally.checks[i] > 0 {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "criterion {} {name}: {verdict} ({} checks, {} failed)",
            i + 1,
            tally.checks[i],
            fails.len()
        );
        for f in fails.iter().take(5) {
            println!("    {f}");
        }
        if verdict == "FAIL" {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
