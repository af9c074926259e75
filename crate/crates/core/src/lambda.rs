//! The series q, q_n, the products λ±, their Γ-ratios and the truncation z.

use alloc::format;
use num_bigint::BigInt;

use crate::claims;
use crate::error::{Error, Result};
use crate::matrix::RingElement;
use crate::padic::{binomial, factorial_valuation, PadicScalar, PrecisionProfile};
use crate::series::{in_ring_r, invert_unit, GammaElement, PiPoly, PiSeries, Substitution};

/// Factor budget for the infinite products; stabilization normally needs
/// about `working_digits` factors.
pub const DEFAULT_FACTOR_BUDGET: usize = 1024;

/// q = φ(π)/π = ((1+π)^p − 1)/π.
pub fn q_series(p: u32, cap_pi: usize, rel: u32) -> PiSeries {
    let mut q = PiSeries::zero(p, cap_pi);
    let mut c = BigInt::from(1);
    for i in 1..=(p as usize) {
        c = c * BigInt::from(p as usize + 1 - i) / BigInt::from(i);
        if i - 1 < cap_pi {
            q.set_coeff(i - 1, PadicScalar::from_bigint(p, &c, rel));
        }
    }
    q
}

/// q_n = φ^{n−1}(q) for n ≥ 1.
pub fn q_n(p: u32, n: u32, cap_pi: usize, rel: u32) -> Result<PiSeries> {
    if n == 0 {
        return Err(Error::Precondition("q_n is defined for n >= 1"));
    }
    let frob = Substitution::frobenius(p, cap_pi, rel);
    let mut q = q_series(p, cap_pi, rel);
    for _ in 1..n {
        q = frob.apply(&q);
    }
    Ok(q)
}

/// Relative precision given to χ(γ), so that the binomials C(χ, i) for
/// i < cap_pi still carry `working_digits` digits.
pub fn gamma_precision(profile: &PrecisionProfile) -> u32 {
    profile.working_digits() + factorial_valuation(profile.p(), profile.cap_pi() as u32)
}

/// A Γ-element with χ(γ) = `chi`, carried at the precision the engine needs.
pub fn gamma_element(profile: &PrecisionProfile, chi: i64) -> Result<GammaElement> {
    GammaElement::from_i64(profile.p(), chi, gamma_precision(profile))
}

/// True when every coefficient is provably ≡ 0 mod p^n.
fn vanishes(f: &PiSeries, n: i64) -> bool {
    f.is_zero_mod(n)
}

/// λ+ = ∏_{n≥1} q_{2n}/p and λ− = ∏_{n≥1} q_{2n−1}/p, truncated once the
/// next factor is 1 to the working precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaPair {
    pub lambda_plus: PiSeries,
    pub lambda_minus: PiSeries,
    pub factors_used: usize,
}

/// Outcome of the built-in identity checks on a λ pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LambdaChecks {
    /// λ±(0) = 1.
    pub constant_terms: bool,
    /// λ± ∈ R.
    pub ring_r: bool,
    /// φ(λ−) = λ+.
    pub frobenius_minus: bool,
    /// φ(λ+)·q/p = λ−.
    pub frobenius_plus: bool,
}

impl LambdaChecks {
    pub fn all(&self) -> bool {
        self.constant_terms && self.ring_r && self.frobenius_minus && self.frobenius_plus
    }
}

/// The truncation z of p^m (λ−/λ+)^{k−1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZData {
    pub k: u32,
    pub m: u32,
    /// z_0 + … + z_{k−2} π^{k−2}, exact zeros beyond, digits capped at the
    /// lifting precision.
    pub z: PiSeries,
    pub full_ratio: PiSeries,
}

impl ZData {
    /// z as an untruncated polynomial.
    pub fn z_poly(&self) -> PiPoly {
        PiPoly::new(
            self.z.p(),
            self.z.coeffs()[..(self.k as usize - 1)].to_vec(),
        )
    }
}

/// Either z, or the first coefficient that is not integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZOutcome {
    Integral(ZData),
    NonIntegral { index: usize, valuation: i64 },
}

/// Computes and caches λ± for one precision profile.
#[derive(Clone, Debug)]
pub struct LambdaEngine {
    profile: PrecisionProfile,
    q: PiSeries,
    frob: Substitution,
    pair: LambdaPair,
}

impl LambdaEngine {
    pub fn new(profile: PrecisionProfile) -> Result<Self> {
        Self::with_budget(profile, DEFAULT_FACTOR_BUDGET)
    }

    pub fn with_budget(profile: PrecisionProfile, budget: usize) -> Result<Self> {
        let (q, frob) = Self::tables(&profile);
        let pair = compute_pair(&profile, &q, &frob, budget)?;
        let engine = LambdaEngine {
            profile,
            q,
            frob,
            pair,
        };
        engine.validate()?;
        Ok(engine)
    }

    /// Rebuild around a previously computed pair (e.g. from a cache); the
    /// constant terms and the growth condition are re-checked.
    pub fn from_pair(profile: PrecisionProfile, pair: LambdaPair) -> Result<Self> {
        let n = profile.cap_pi();
        if pair.lambda_plus.cap_pi() != n || pair.lambda_minus.cap_pi() != n {
            return Err(Error::ShapeMismatch);
        }
        if pair.lambda_plus.p() != profile.p() || pair.lambda_minus.p() != profile.p() {
            return Err(Error::ShapeMismatch);
        }
        let (q, frob) = Self::tables(&profile);
        let engine = LambdaEngine {
            profile,
            q,
            frob,
            pair,
        };
        engine.validate()?;
        Ok(engine)
    }

    fn tables(profile: &PrecisionProfile) -> (PiSeries, Substitution) {
        let w = profile.working_digits();
        let q = q_series(profile.p(), profile.cap_pi(), w);
        let frob = Substitution::frobenius(profile.p(), profile.cap_pi(), w);
        (q, frob)
    }

    fn validate(&self) -> Result<()> {
        let floor = self.profile.valuation_floor();
        let w = i64::from(self.profile.p() - 1);
        for lam in [&self.pair.lambda_plus, &self.pair.lambda_minus] {
            for (i, c) in lam.coeffs().iter().enumerate() {
                if let Some(v) = c.valuation_bound() {
                    if v < floor || w * v + (i as i64) < 0 {
                        return Err(Error::BelowValuationFloor {
                            index: i,
                            valuation: v,
                            floor,
                        });
                    }
                }
            }
            let c0 = lam
                .coeff(0)
                .sub(&PadicScalar::one(self.profile.p(), self.digits()));
            if !c0.is_zero_mod(i64::from(self.profile.cap_p())) {
                return Err(Error::CheckFailed {
                    claim: claims::LAMBDA_CONSTANT_TERMS,
                    detail: format!("constant term {}", lam.coeff(0)),
                });
            }
        }
        Ok(())
    }

    pub fn profile(&self) -> &PrecisionProfile {
        &self.profile
    }

    pub fn pair(&self) -> &LambdaPair {
        &self.pair
    }

    pub fn lambda_plus(&self) -> &PiSeries {
        &self.pair.lambda_plus
    }

    pub fn lambda_minus(&self) -> &PiSeries {
        &self.pair.lambda_minus
    }

    pub fn q(&self) -> &PiSeries {
        &self.q
    }

    pub fn digits(&self) -> u32 {
        self.profile.working_digits()
    }

    pub fn frobenius(&self, f: &PiSeries) -> PiSeries {
        self.frob.apply(f)
    }

    /// Runs the constant-term, growth and Frobenius checks.
    pub fn check_identities(&self) -> LambdaChecks {
        let p = self.profile.p();
        let n = i64::from(self.profile.cap_p());
        let one = PadicScalar::one(p, self.digits());
        let (lp, lm) = (&self.pair.lambda_plus, &self.pair.lambda_minus);
        let constant_terms = [lp, lm].iter().all(|l| l.coeff(0).sub(&one).is_zero_mod(n));
        let ring_r = in_ring_r(lp) && in_ring_r(lm);
        let frobenius_minus = vanishes(&self.frobenius(lm).sub_ref(lp), n);
        let q_over_p = self.q.scale(&PadicScalar::p_power(p, -1, self.digits()));
        let frobenius_plus = vanishes(&self.frobenius(lp).mul_ref(&q_over_p).sub_ref(lm), n);
        LambdaChecks {
            constant_terms,
            ring_r,
            frobenius_minus,
            frobenius_plus,
        }
    }

    pub fn gamma_table(&self, gamma: &GammaElement) -> Result<Substitution> {
        Substitution::gamma_at(gamma, self.profile.cap_pi(), self.digits())
    }

    /// λ/γ(λ) for a series with unit constant term, checked to lie in
    /// 1 + πZ_p[[π]].
    pub fn ratio_gamma(&self, lambda: &PiSeries, gamma: &GammaElement) -> Result<PiSeries> {
        self.ratio_with_table(lambda, &self.gamma_table(gamma)?)
    }

    pub fn ratio_with_table(&self, lambda: &PiSeries, table: &Substitution) -> Result<PiSeries> {
        if !lambda.coeff(0).is_unit() {
            return Err(Error::Precondition(
                "ratio_gamma needs a unit constant term",
            ));
        }
        let r = lambda.mul_ref(&invert_unit(&table.apply(lambda))?);
        let n = i64::from(self.profile.cap_p());
        let one = PadicScalar::one(self.profile.p(), self.digits());
        if r.is_integral() != Some(true) || !r.coeff(0).sub(&one).is_zero_mod(n) {
            return Err(Error::CheckFailed {
                claim: claims::LAMBDA_GAMMA_RATIO,
                detail: format!(
                    "λ/γ(λ) not in 1 + πZ_p[[π]] for χ = {}",
                    table.image().coeff(1)
                ),
            });
        }
        Ok(r)
    }

    /// (λ+/γ(λ+), λ−/γ(λ−)) by direct division.
    pub fn ratio_pair(&self, gamma: &GammaElement) -> Result<(PiSeries, PiSeries)> {
        let table = self.gamma_table(gamma)?;
        Ok((
            self.ratio_with_table(&self.pair.lambda_plus, &table)?,
            self.ratio_with_table(&self.pair.lambda_minus, &table)?,
        ))
    }

    /// p^m (λ−/λ+)^{k−1} and its degree-(k−2) truncation, if integral.
    pub fn compute_z(&self, k: u32, m: u32) -> Result<ZOutcome> {
        if k < 2 {
            return Err(Error::Precondition("k must be at least 2"));
        }
        let n = self.profile.cap_pi();
        if n < k as usize - 1 {
            return Err(Error::InvalidCap("cap_pi must be at least k - 1"));
        }
        let p = self.profile.p();
        let w = self.digits();
        let ratio = self
            .pair
            .lambda_minus
            .mul_ref(&invert_unit(&self.pair.lambda_plus)?);
        let full = ratio
            .pow(k - 1, w)
            .scale(&PadicScalar::p_power(p, i64::from(m), w));
        let scale = i64::from(p - 1);
        for (i, c) in full.coeffs().iter().enumerate() {
            if let Some(v) = c.valuation_bound() {
                if scale * v + (i as i64) < scale * i64::from(m) {
                    return Err(Error::CheckFailed {
                        claim: claims::Z_GROWTH,
                        detail: format!("coefficient {i} of p^m (λ−/λ+)^(k−1) has valuation {v}"),
                    });
                }
            }
        }
        let lift = i64::from(self.profile.lift_digits());
        let mut z = PiSeries::zero(p, n);
        for i in 0..(k as usize - 1) {
            let c = full.coeff(i);
            match c.is_integral() {
                Some(true) => z.set_coeff(i, c.with_abs_cap(lift)),
                Some(false) => {
                    let valuation = c.valuation_bound().expect("nonzero");
                    return Ok(ZOutcome::NonIntegral {
                        index: i,
                        valuation,
                    });
                }
                None => return Err(Error::PrecisionExhausted),
            }
        }
        Ok(ZOutcome::Integral(ZData {
            k,
            m,
            z,
            full_ratio: full,
        }))
    }

    /// z for the standard exponent m = ⌊(k−2)/(p−1)⌋; failure is an error.
    pub fn standard_z(&self, k: u32) -> Result<ZData> {
        let m = standard_m(self.profile.p(), k);
        match self.compute_z(k, m)? {
            ZOutcome::Integral(z) => Ok(z),
            ZOutcome::NonIntegral { index, valuation } => Err(Error::CheckFailed {
                claim: claims::Z_INTEGRAL,
                detail: format!("k = {k}, m = {m}: z_{index} has valuation {valuation}"),
            }),
        }
    }

    /// Smallest m ≥ 0 for which z is integral.
    pub fn minimal_m(&self, k: u32) -> Result<u32> {
        let bound = standard_m(self.profile.p(), k);
        for m in 0..=bound {
            if let ZOutcome::Integral(_) = self.compute_z(k, m)? {
                return Ok(m);
            }
        }
        Err(Error::CheckFailed {
            claim: claims::Z_MINIMAL_M,
            detail: format!("no m <= {bound} makes z integral for k = {k}"),
        })
    }
}

/// m = ⌊(k−2)/(p−1)⌋.
pub fn standard_m(p: u32, k: u32) -> u32 {
    k.saturating_sub(2) / (p - 1)
}

fn compute_pair(
    profile: &PrecisionProfile,
    q: &PiSeries,
    frob: &Substitution,
    budget: usize,
) -> Result<LambdaPair> {
    let p = profile.p();
    let w = profile.working_digits();
    let n = profile.cap_pi();
    let inv_p = PadicScalar::p_power(p, -1, w);
    let one = PiSeries::one(p, n, w);
    let threshold = i64::from(p - 1) * i64::from(w);
    let (mut plus, mut minus) = (one.clone(), one.clone());
    let mut qn = q.clone();
    for idx in 1..=budget {
        let factor = qn.scale(&inv_p);
        let settled = factor
            .sub_ref(&one)
            .scaled_r_valuation()
            .is_none_or(|v| v >= threshold);
        if settled {
            return Ok(LambdaPair {
                lambda_plus: plus,
                lambda_minus: minus,
                factors_used: idx - 1,
            });
        }
        if idx % 2 == 1 {
            minus = minus.mul_ref(&factor);
        } else {
            plus = plus.mul_ref(&factor);
        }
        qn = frob.apply(&qn);
    }
    Err(Error::StabilizationNotReached { factors: budget })
}

/// u = q/γ(q), computed without division by non-units as e/φ(e) with
/// e = γ(π)/π = Σ C(χ, i+1) π^i.
pub fn unit_u(gamma: &GammaElement, frob: &Substitution, digits: u32) -> Result<PiSeries> {
    let p = gamma.p();
    let n = frob.cap_pi();
    let abs = i64::from(digits);
    let mut e = PiSeries::zero(p, n);
    for i in 0..n {
        e.set_coeff(i, binomial(gamma.chi(), i as u32 + 1)?.with_abs_cap(abs));
    }
    Ok(e.mul_ref(&invert_unit(&frob.apply(&e))?).with_abs_cap(abs))
}

/// The Γ-ratios of λ± computed independently of λ± themselves:
/// λ+/γ(λ+) = ∏ φ^{2n+1}(u) and λ−/γ(λ−) = ∏ φ^{2n}(u).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaRatios {
    pub plus: PiSeries,
    pub minus: PiSeries,
    pub u: PiSeries,
    pub factors_used: usize,
}

/// Builds [`GammaRatios`] at `digits` absolute digits using a Frobenius
/// table of the same length.
pub fn gamma_ratios_by_products(
    gamma: &GammaElement,
    frob: &Substitution,
    digits: u32,
    budget: usize,
) -> Result<GammaRatios> {
    let p = gamma.p();
    let n = frob.cap_pi();
    let abs = i64::from(digits);
    let u = unit_u(gamma, frob, digits)?;
    let one = PiSeries::one(p, n, digits);
    let (mut plus, mut minus) = (one.clone(), one.clone());
    let mut factor = u.clone();
    for idx in 0..budget {
        if factor.sub_ref(&one).is_zero_mod(abs) {
            return Ok(GammaRatios {
                plus: plus.with_abs_cap(abs),
                minus: minus.with_abs_cap(abs),
                u,
                factors_used: idx,
            });
        }
        if idx % 2 == 0 {
            minus = minus.mul_ref(&factor).with_abs_cap(abs);
        } else {
            plus = plus.mul_ref(&factor).with_abs_cap(abs);
        }
        factor = frob.apply(&factor).with_abs_cap(abs);
    }
    Err(Error::StabilizationNotReached { factors: budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine(p: u32) -> LambdaEngine {
        LambdaEngine::new(PrecisionProfile::new(p, 8, 24, 3).unwrap()).unwrap()
    }

    #[test]
    fn q_examples() {
        let q = q_series(3, 6, 20);
        let expect = PiSeries::from_i64s(3, 6, &[3, 3, 1], 20);
        assert!(q.sub_ref(&expect).is_zero_mod(20));
        for p in [3, 5, 7] {
            for n in 1..4 {
                let qn = q_n(p, n, 10, 20).unwrap();
                assert!(qn
                    .coeff(0)
                    .sub(&PadicScalar::from_i64(p, p as i64, 20))
                    .is_zero_mod(20));
            }
            let frob = Substitution::frobenius(p, 10, 20);
            let q1 = q_n(p, 1, 10, 20).unwrap();
            assert!(frob
                .apply(&q1)
                .sub_ref(&q_n(p, 2, 10, 20).unwrap())
                .is_zero_mod(20));
        }
        assert!(q_n(3, 0, 4, 4).is_err());
    }

    #[test]
    fn lambda_identities_hold() {
        for p in [3, 5, 7] {
            let e = engine(p);
            assert!(e.check_identities().all(), "p = {p}");
            assert!(e.pair().factors_used > 0);
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let profile = PrecisionProfile::new(3, 8, 24, 3).unwrap();
        assert_eq!(
            LambdaEngine::with_budget(profile, 3).unwrap_err(),
            Error::StabilizationNotReached { factors: 3 }
        );
    }

    #[test]
    fn trivial_gamma_gives_unit_ratio() {
        let e = engine(5);
        let id = gamma_element(e.profile(), 1).unwrap();
        let r = e.ratio_gamma(e.lambda_plus(), &id).unwrap();
        let one = PiSeries::one(5, 24, 30);
        assert!(r.sub_ref(&one).is_zero_mod(8));
    }

    #[test]
    fn both_ratio_routes_agree() {
        for p in [3, 5] {
            let e = engine(p);
            let g = gamma_element(e.profile(), 2).unwrap();
            let (rp, rm) = e.ratio_pair(&g).unwrap();
            let digits = e.profile().lift_digits();
            let frob = Substitution::frobenius(p, 24, digits);
            let prod = gamma_ratios_by_products(&g, &frob, digits, 200).unwrap();
            assert!(rp.sub_ref(&prod.plus).is_zero_mod(8));
            assert!(rm.sub_ref(&prod.minus).is_zero_mod(8));
        }
    }

    #[test]
    fn z_examples() {
        for p in [3, 5, 7] {
            let e = engine(p);
            for k in 2..=(2 * p + 3).min(20) {
                let z = e.standard_z(k).unwrap();
                let pm = PadicScalar::p_power(p, i64::from(z.m), 30);
                assert!(
                    z.z.coeff(0).sub(&pm).is_zero_mod(8),
                    "z_0 = p^m for p = {p}, k = {k}"
                );
                assert!(e.minimal_m(k).unwrap() <= standard_m(p, k));
            }
            assert_eq!(e.minimal_m(p + 1).unwrap(), 0);
            assert_eq!(e.minimal_m(2).unwrap(), 0);
            let z2 = e.standard_z(2).unwrap();
            assert_eq!(z2.m, 0);
            assert!(z2.z.coeffs()[1..].iter().all(PadicScalar::is_exact_zero));
        }
    }

    #[test]
    fn minimal_m_for_p_plus_two_matches_direct_scan() {
        for p in [3, 5, 7] {
            let e = engine(p);
            let k = p + 2;
            let ratio = e
                .lambda_minus()
                .mul_ref(&invert_unit(e.lambda_plus()).unwrap());
            let full = ratio.pow(k - 1, e.digits());
            // integrality scan of the first k−1 coefficients over m = 0, 1
            let needed = (0..(k as usize - 1))
                .map(|i| -full.coeff(i).valuation_bound().unwrap_or(0))
                .max()
                .unwrap()
                .max(0);
            assert!(needed <= 1);
            assert_eq!(i64::from(e.minimal_m(k).unwrap()), needed);
        }
    }
}
