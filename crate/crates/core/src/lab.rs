//! Specialization of a family at X = α and the crystalline data read off
//! from it: the filtration, the filtered φ-module, congruences between
//! specializations and the reduction labels.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::claims;
use crate::error::{Error, Result};
use crate::lambda::{standard_m, LambdaEngine};
use crate::matrix::{Mat2, RingElement};
use crate::padic::{PadicScalar, Valuation};
use crate::series::{evaluate_x, FamilySeries, GammaElement, PiPoly, PiSeries, Substitution};
use crate::wach::{commutation_residual, FrobeniusMatrix, WachFamily};

fn as_family(m: &Mat2<PiSeries>) -> Mat2<FamilySeries> {
    m.map(|s| FamilySeries::from_pi_series(s, 1))
}

fn mat_zero_mod(m: &Mat2<PiSeries>, n: i64) -> bool {
    m.entries().all(|s| s.is_zero_mod(n))
}

/// The deterministic evaluation points used by the property suites:
/// 0, p, p², p + p², (p−1)p.
pub fn sample_alphas(p: u32, rel: u32) -> Vec<PadicScalar> {
    let p64 = i64::from(p);
    [0, p64, p64 * p64, p64 + p64 * p64, (p64 - 1) * p64]
        .iter()
        .map(|&a| PadicScalar::from_i64(p, a, rel))
        .collect()
}

/// The module N_{k,α}: P and the stored G_γ evaluated at X = α.
#[derive(Clone, Debug)]
pub struct SpecializedWachModule {
    p: u32,
    k: u32,
    m: u32,
    alpha: PadicScalar,
    a_p: PadicScalar,
    precision: i64,
    cap_pi: usize,
    digits: u32,
    z: PiSeries,
    frobenius: FrobeniusMatrix,
    g: BTreeMap<String, (GammaElement, Mat2<PiSeries>)>,
}

/// Evaluate a family at α ∈ pZ_p and re-check commutation and cocycle
/// relations at the precision the X-truncation leaves.
pub fn specialize(family: &WachFamily, alpha: &PadicScalar) -> Result<SpecializedWachModule> {
    let module = specialize_unchecked(family, alpha)?;
    module.check_relations()?;
    Ok(module)
}

/// [`specialize`] without the relation checks.
pub fn specialize_unchecked(
    family: &WachFamily,
    alpha: &PadicScalar,
) -> Result<SpecializedWachModule> {
    let p = family.p();
    let profile = family.profile();
    let cap_p = i64::from(profile.cap_p());
    let precision = match alpha.valuation() {
        Valuation::Infinite => cap_p,
        Valuation::Exact(v) | Valuation::AtLeast(v) if v >= 1 => {
            cap_p.min(profile.cap_x() as i64 * v)
        }
        _ => return Err(Error::Precondition("α must lie in pZ_p")),
    };
    let frobenius = family.p_matrix().evaluate_x(alpha)?;
    let mut g = BTreeMap::new();
    for (gamma, mat) in family.gammas() {
        g.insert(
            gamma.key(),
            (gamma.clone(), mat.try_map(|f| evaluate_x(f, alpha))?),
        );
    }
    let digits = family.context().digits();
    let a_p = alpha.mul(&PadicScalar::p_power(p, i64::from(family.m()), digits));
    Ok(SpecializedWachModule {
        p,
        k: family.k(),
        m: family.m(),
        alpha: alpha.clone(),
        a_p,
        precision,
        cap_pi: profile.cap_pi(),
        digits,
        z: family.z().clone(),
        frobenius,
        g,
    })
}

impl SpecializedWachModule {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn alpha(&self) -> &PadicScalar {
        &self.alpha
    }

    /// a_p = p^m α.
    pub fn a_p(&self) -> &PadicScalar {
        &self.a_p
    }

    /// Digits to which the specialized matrices are certified: cap_p, or
    /// cap_x · v_p(α) when the dropped X-tail is coarser.
    pub fn precision(&self) -> i64 {
        self.precision
    }

    pub fn p_alpha(&self) -> Mat2<PiSeries> {
        self.frobenius.to_mat().map(|f| f.column(0))
    }

    pub fn frobenius_matrix(&self) -> &FrobeniusMatrix {
        &self.frobenius
    }

    pub fn gammas(&self) -> impl Iterator<Item = (&GammaElement, &Mat2<PiSeries>)> {
        self.g.values().map(|(g, m)| (g, m))
    }

    pub fn g(&self, gamma: &GammaElement) -> Option<&Mat2<PiSeries>> {
        self.g.get(&gamma.key()).map(|(_, m)| m)
    }

    fn tables(&self, gamma: &GammaElement) -> Result<(Substitution, Substitution)> {
        Ok((
            Substitution::frobenius(self.p, self.cap_pi, self.digits),
            Substitution::gamma_at(gamma, self.cap_pi, self.digits)?,
        ))
    }

    /// P_α φ(G_α) = G_α γ(P_α) for every stored γ, and G_{γη} = G_γ γ(G_η)
    /// whenever γη is stored, all mod p^precision.
    pub fn check_relations(&self) -> Result<()> {
        for (gamma, _) in self.gammas() {
            if !self.check_commutation(gamma)? {
                return Err(Error::CheckFailed {
                    claim: claims::SPECIALIZE,
                    detail: format!(
                        "commutation fails at α = {} for χ = {}",
                        self.alpha,
                        gamma.key()
                    ),
                });
            }
        }
        for (a, b) in self.cocycle_pairs() {
            if !self.check_cocycle(&a, &b)? {
                return Err(Error::CheckFailed {
                    claim: claims::COCYCLE,
                    detail: format!(
                        "cocycle fails at α = {} for ({}, {})",
                        self.alpha,
                        a.key(),
                        b.key()
                    ),
                });
            }
        }
        Ok(())
    }

    /// P_α φ(G_α) = G_α γ(P_α) mod p^precision.
    pub fn check_commutation(&self, gamma: &GammaElement) -> Result<bool> {
        let g = self
            .g(gamma)
            .ok_or(Error::Precondition("γ is not stored in this module"))?;
        let (frob, table) = self.tables(gamma)?;
        let s = commutation_residual(
            &self.frobenius,
            &as_family(g),
            &frob,
            &table,
            i64::from(self.digits),
        );
        let ok = s.entries().all(|f| f.is_zero_mod(self.precision));
        Ok(ok)
    }

    /// All ordered pairs of stored elements whose product is also stored.
    pub fn cocycle_pairs(&self) -> Vec<(GammaElement, GammaElement)> {
        let mut out = Vec::new();
        for (a, _) in self.gammas() {
            for (b, _) in self.gammas() {
                if self.g.contains_key(&a.compose(b).key()) {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    pub fn check_cocycle(&self, gamma: &GammaElement, eta: &GammaElement) -> Result<bool> {
        let missing = Error::Precondition("γ is not stored in this module");
        let prod = self.g(&gamma.compose(eta)).ok_or(missing.clone())?;
        let gg = self.g(gamma).ok_or(missing.clone())?;
        let ge = self.g(eta).ok_or(missing)?;
        let table = Substitution::gamma_at(gamma, self.cap_pi, self.digits)?;
        let rhs = gg.mul(&ge.map(|s| table.apply(s)));
        Ok(mat_zero_mod(&prod.sub(&rhs), self.precision))
    }

    fn q_poly(&self) -> PiPoly {
        PiPoly::new(
            self.p,
            crate::lambda::q_series(self.p, self.p as usize, self.digits)
                .coeffs()
                .to_vec(),
        )
    }

    /// Coordinates of φ(π^shift n_j) as exact polynomials, j ∈ {1, 2}.
    fn phi_image(&self, j: u8, shift: u32) -> [PiPoly; 2] {
        let q = self.q_poly();
        let phi_pi = PiPoly::from_i64s(self.p, &[0, 1], self.digits)
            .mul(&q)
            .pow(shift, self.digits);
        let zero = PiPoly::new(self.p, Vec::new());
        if j == 1 {
            [zero, phi_pi.mul(&q.pow(self.k - 1, self.digits))]
        } else {
            let z = PiPoly::new(self.p, self.z.coeffs()[..(self.k as usize - 1)].to_vec());
            let az = z.mul(&PiPoly::new(self.p, vec![self.alpha.clone()]));
            [phi_pi.neg(), phi_pi.mul(&az)]
        }
    }

    /// Same coordinates computed from the truncated P_α.
    fn phi_image_series(&self, j: u8, shift: u32) -> [PiSeries; 2] {
        let frob = Substitution::frobenius(self.p, self.cap_pi, self.digits);
        let pi_a = PiSeries::pi(self.p, self.cap_pi, self.digits).pow(shift, self.digits);
        let col = frob.apply(&pi_a);
        let pa = self.p_alpha();
        let c = (j - 1) as usize;
        [pa.e[0][c].mul_ref(&col), pa.e[1][c].mul_ref(&col)]
    }

    /// Whether φ(π^shift n_j) ∈ q^i N: `Some(true)` if both remainders
    /// vanish mod p^{precision}, `Some(false)` if one is provably nonzero,
    /// `None` if the precision cannot decide.
    fn membership(&self, j: u8, shift: u32, i: i64) -> Result<Option<bool>> {
        if i <= 0 {
            return Ok(Some(true));
        }
        let qi = self.q_poly().pow(i as u32, self.digits);
        let mut all_zero = true;
        for coord in self.phi_image(j, shift) {
            let (_, rem) = coord.divrem(&qi)?;
            for c in rem.coeffs() {
                // coordinates carry their own precision, so a known-nonzero
                // remainder is conclusive
                if let Valuation::Exact(_) = c.valuation() {
                    return Ok(Some(false));
                }
                if !c.is_zero_mod(self.precision) {
                    all_zero = false;
                }
            }
        }
        Ok(if all_zero { Some(true) } else { None })
    }

    /// The basis of Fil^i N, verified by membership of both basis vectors
    /// and non-membership of the vectors just outside.
    pub fn fil_basis(&self, i: i64) -> Result<FilBasis> {
        if i >= self.cap_pi as i64 {
            return Err(Error::Precondition("filtration index must be below cap_pi"));
        }
        let k = i64::from(self.k);
        let basis = FilBasis::expected(i, self.k);
        let fail = |what: String| Error::CheckFailed {
            claim: claims::FIL_BASIS,
            detail: format!("i = {i}: {what}"),
        };
        for (j, shift) in [(1u8, basis.n1_shift), (2u8, basis.n2_shift)] {
            if self.membership(j, shift, i)? != Some(true) {
                return Err(fail(format!("π^{shift} n{j} is not in Fil^i")));
            }
            let poly = self.phi_image(j, shift);
            let series = self.phi_image_series(j, shift);
            for (a, b) in poly.iter().zip(&series) {
                if !a
                    .to_series(self.cap_pi)
                    .sub_ref(b)
                    .is_zero_mod(self.precision)
                {
                    return Err(fail(format!("φ(π^{shift} n{j}) disagrees with P_α")));
                }
            }
        }
        let mut witnesses = Vec::new();
        if i >= 1 {
            witnesses.push((2u8, (i - 1) as u32));
        }
        if i >= k {
            witnesses.push((1u8, (i - k) as u32));
        }
        for &(j, shift) in &witnesses {
            if self.membership(j, shift, i)? != Some(false) {
                return Err(fail(format!("witness π^{shift} n{j} is not excluded")));
            }
        }
        Ok(FilBasis {
            witnesses: witnesses.len(),
            ..basis
        })
    }

    /// D = N/πN with the induced filtration.
    pub fn dcris(&self) -> Result<FilteredPhiModule> {
        let k = i64::from(self.k);
        if k + 1 > self.cap_pi as i64 {
            return Err(Error::InvalidCap(
                "cap_pi must exceed k to read the filtration",
            ));
        }
        let dims: Vec<usize> = (0..=k)
            .map(|i| self.fil_basis(i).map(|b| b.dim_mod_pi()))
            .collect::<Result<_>>()?;
        let mut jumps = Vec::new();
        let mut prev = 2usize;
        for (i, &d) in dims.iter().enumerate() {
            // jump at i − 1 when the dimension drops between i − 1 and i
            for _ in d..prev {
                jumps.push(i as i64 - 1);
            }
            prev = d;
        }
        let pa = self.p_alpha();
        let frobenius_matrix = pa.map(|s| s.coeff(0).clone());
        let module = FilteredPhiModule {
            frobenius_matrix,
            jumps,
        };
        let expected = FilteredPhiModule::expected(self.p, self.k, &self.a_p, self.digits);
        let n = self.precision;
        let form_ok = module
            .frobenius_matrix
            .zip_all(&expected.frobenius_matrix, |a, b| a.sub(b).is_zero_mod(n))
            && module.jumps == expected.jumps
            && module.weakly_admissible();
        if !form_ok {
            return Err(Error::CheckFailed {
                claim: claims::DCRIS_FORM,
                detail: format!("{module}"),
            });
        }
        Ok(module)
    }
}

/// Fil^i N = π^{n1_shift} n1 ⊕ π^{n2_shift} n2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FilBasis {
    pub i: i64,
    pub n1_shift: u32,
    pub n2_shift: u32,
    /// Number of vectors just outside Fil^i shown to be excluded.
    pub witnesses: usize,
}

impl FilBasis {
    /// The basis predicted for weight k.
    pub fn expected(i: i64, k: u32) -> Self {
        let k = i64::from(k);
        let (a, b) = if i <= 0 {
            (0, 0)
        } else if i <= k - 1 {
            (0, i)
        } else {
            (i - (k - 1), i)
        };
        FilBasis {
            i,
            n1_shift: a as u32,
            n2_shift: b as u32,
            witnesses: 0,
        }
    }

    /// Dimension of the image of Fil^i N in N/πN.
    pub fn dim_mod_pi(&self) -> usize {
        usize::from(self.n1_shift == 0) + usize::from(self.n2_shift == 0)
    }
}

impl fmt::Display for FilBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |s: u32, n: &str| match s {
            0 => String::from(n),
            1 => format!("pi {n}"),
            s => format!("pi^{s} {n}"),
        };
        write!(
            f,
            "({}, {})",
            part(self.n1_shift, "n1"),
            part(self.n2_shift, "n2")
        )
    }
}

/// A rank-2 filtered φ-module: Frobenius matrix and filtration jumps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredPhiModule {
    pub frobenius_matrix: Mat2<PadicScalar>,
    pub jumps: Vec<i64>,
}

impl FilteredPhiModule {
    /// [[0, −1], [p^{k−1}, a_p]] with jumps {0, k−1}.
    pub fn expected(p: u32, k: u32, a_p: &PadicScalar, rel: u32) -> Self {
        FilteredPhiModule {
            frobenius_matrix: Mat2::new(
                PadicScalar::zero(p),
                PadicScalar::from_i64(p, -1, rel),
                PadicScalar::p_power(p, i64::from(k) - 1, rel),
                a_p.clone(),
            ),
            jumps: vec![0, i64::from(k) - 1],
        }
    }

    pub fn trace(&self) -> PadicScalar {
        self.frobenius_matrix.e[0][0].add(&self.frobenius_matrix.e[1][1])
    }

    pub fn det(&self) -> PadicScalar {
        self.frobenius_matrix.det()
    }

    /// v_p(det φ) equals the sum of the jumps.
    pub fn weakly_admissible(&self) -> bool {
        match self.det().valuation() {
            Valuation::Exact(v) => v == self.jumps.iter().sum::<i64>(),
            _ => false,
        }
    }
}

impl fmt::Display for FilteredPhiModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "phi = {}, jumps = {:?}",
            self.frobenius_matrix, self.jumps
        )
    }
}

/// Whether two specializations agree mod p^i on P and every stored G.
pub fn congruent(a: &SpecializedWachModule, b: &SpecializedWachModule, i: i64) -> Result<bool> {
    if a.p != b.p || a.k != b.k || a.m != b.m {
        return Err(Error::ShapeMismatch);
    }
    if a.precision.min(b.precision) < i {
        return Err(Error::Precondition(
            "specializations are not known to the requested precision",
        ));
    }
    let mut same = mat_zero_mod(&a.p_alpha().sub(&b.p_alpha()), i);
    for (gamma, ga) in a.gammas() {
        let gb = b.g(gamma).ok_or(Error::Precondition("γ sets differ"))?;
        same &= mat_zero_mod(&ga.sub(gb), i);
    }
    Ok(same)
}

/// Specialize at α1 and α2 (requires v_p(α1 − α2) ≥ i ≥ 1) and compare
/// mod p^i.
pub fn congruence_check(
    family: &WachFamily,
    alpha1: &PadicScalar,
    alpha2: &PadicScalar,
    i: i64,
) -> Result<bool> {
    if i < 1 {
        return Err(Error::Precondition("congruence level must be at least 1"));
    }
    if !alpha1.sub(alpha2).is_zero_mod(i) {
        return Err(Error::Precondition("v_p(α1 − α2) must be at least i"));
    }
    congruent(
        &specialize_unchecked(family, alpha1)?,
        &specialize_unchecked(family, alpha2)?,
        i,
    )
}

/// Mod-p reduction of a specialized matrix, entry-wise and π-major.
pub fn reduce_matrix(m: &Mat2<PiSeries>) -> Result<Mat2<Vec<u32>>> {
    m.try_map(crate::series::reduce_mod_p)
}

/// One row of the bound table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundRow {
    pub k: u32,
    /// ⌊(k−2)/(p−1)⌋.
    pub standard_m: u32,
    pub minimal_m: u32,
    /// Valuation bound beyond which the reduction is that of a_p = 0:
    /// the standard exponent, lowered to 0 at k = p+1.
    pub reduction_bound: u32,
}

pub fn bound_row(engine: &LambdaEngine, k: u32) -> Result<BoundRow> {
    let p = engine.profile().p();
    let standard = standard_m(p, k);
    let minimal = engine.minimal_m(k)?;
    let reduction_bound = if k == p + 1 {
        minimal.min(standard)
    } else {
        standard
    };
    Ok(BoundRow {
        k,
        standard_m: standard,
        minimal_m: minimal,
        reduction_bound,
    })
}

pub fn valuation_bound_table(engine: &LambdaEngine, k_max: u32) -> Result<Vec<BoundRow>> {
    (2..=k_max).map(|k| bound_row(engine, k)).collect()
}

/// Symbolic label of the mod-p reduction of the a_p = 0 representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionLabel {
    /// ind(ω2^{k−1}), when (p+1) ∤ (k−1).
    Irreducible { exponent: u32 },
    /// (μ_{√−1} ⊕ μ_{−√−1}) ⊗ χ^{twist}, when (p+1) | (k−1).
    Split { twist: u32 },
}

pub fn classify_reduction_label(p: u32, k: u32) -> ReductionLabel {
    let e = k - 1;
    if e % (p + 1) == 0 {
        ReductionLabel::Split { twist: e / (p + 1) }
    } else {
        ReductionLabel::Irreducible { exponent: e }
    }
}

impl fmt::Display for ReductionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionLabel::Irreducible { exponent } => write!(f, "ind(omega2^({exponent}))"),
            ReductionLabel::Split { twist } => {
                write!(f, "(mu_sqrt(-1) + mu_-sqrt(-1)) x chi^({twist})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PrecisionProfile;
    use crate::wach::standard_gammas;
    use alloc::string::ToString;

    fn family(p: u32, k: u32) -> WachFamily {
        let profile = PrecisionProfile::new(p, 8, 24, 3).unwrap();
        let engine = LambdaEngine::new(profile).unwrap();
        WachFamily::build(&engine, k, &standard_gammas(&profile).unwrap()).unwrap()
    }

    #[test]
    fn labels() {
        assert_eq!(
            classify_reduction_label(3, 4).to_string(),
            "ind(omega2^(3))"
        );
        assert_eq!(
            classify_reduction_label(3, 5),
            ReductionLabel::Split { twist: 1 }
        );
        assert_eq!(
            classify_reduction_label(3, 2),
            ReductionLabel::Irreducible { exponent: 1 }
        );
    }

    #[test]
    fn specialization_and_filtration() {
        for (p, k) in [(3u32, 4u32), (5, 3), (3, 2)] {
            let fam = family(p, k);
            for alpha in sample_alphas(p, 16) {
                let module = specialize(&fam, &alpha).unwrap();
                assert!(module.precision() >= 3);
                for i in 0..=(i64::from(k) + 2) {
                    let b = module.fil_basis(i).unwrap();
                    assert_eq!(
                        b,
                        FilBasis {
                            witnesses: b.witnesses,
                            ..FilBasis::expected(i, k)
                        }
                    );
                }
                let d = module.dcris().unwrap();
                assert_eq!(d.jumps, vec![0, i64::from(k) - 1]);
                assert!(d.weakly_admissible());
                if alpha.is_exact_zero() {
                    assert!(d.trace().is_zero_mod(8));
                }
            }
        }
    }

    #[test]
    fn dcris_depends_only_on_a_p() {
        let (p, k) = (3u32, 4u32);
        let profile = PrecisionProfile::new(p, 8, 24, 3).unwrap();
        let engine = LambdaEngine::new(profile).unwrap();
        let gammas = standard_gammas(&profile).unwrap();
        let build = |m: u32| {
            let zdata = match engine.compute_z(k, m).unwrap() {
                crate::lambda::ZOutcome::Integral(z) => z,
                other => panic!("{other:?}"),
            };
            let ctx = crate::wach::LiftContext::new(profile, &zdata).unwrap();
            let lifts = gammas
                .iter()
                .map(|g| (g.clone(), ctx.lift_full(g).unwrap().g))
                .collect();
            WachFamily::assemble(ctx, lifts).unwrap()
        };
        let (low, high) = (build(0), build(1));
        let a = specialize(&low, &PadicScalar::from_i64(p, 9, 16)).unwrap();
        let b = specialize(&high, &PadicScalar::from_i64(p, 3, 16)).unwrap();
        assert!(a.a_p().sub(b.a_p()).is_zero_mod(8));
        let (da, db) = (a.dcris().unwrap(), b.dcris().unwrap());
        let n = a.precision().min(b.precision());
        assert!(da
            .frobenius_matrix
            .zip_all(&db.frobenius_matrix, |x, y| x.sub(y).is_zero_mod(n)));
        assert_eq!(da.jumps, db.jumps);
    }

    #[test]
    fn slopes_of_specializations() {
        use crate::wach::newton_slopes;
        assert_eq!(newton_slopes(5, None), [(2, 1), (2, 1)]);
        assert_eq!(newton_slopes(4, Some(1)), [(1, 1), (2, 1)]);
        assert_eq!(newton_slopes(4, Some(2)), [(3, 2), (3, 2)]);
    }

    #[test]
    fn basis_display() {
        assert_eq!(FilBasis::expected(0, 4).to_string(), "(n1, n2)");
        assert_eq!(FilBasis::expected(3, 4).to_string(), "(n1, pi^3 n2)");
        assert_eq!(FilBasis::expected(4, 4).to_string(), "(pi n1, pi^4 n2)");
    }

    #[test]
    fn congruences() {
        let p = 3;
        let fam = family(p, 4);
        let a = PadicScalar::from_i64(p, 3, 16);
        let b = PadicScalar::from_i64(p, 3 + 27, 16);
        assert!(congruence_check(&fam, &a, &b, 3).unwrap());
        assert!(congruence_check(&fam, &a, &a, 3).unwrap());
        assert!(congruence_check(&fam, &a, &PadicScalar::zero(p), 1).unwrap());
        assert!(congruence_check(&fam, &a, &b, 4).is_err());
    }

    #[test]
    fn bound_table_rows() {
        let profile = PrecisionProfile::new(5, 8, 24, 3).unwrap();
        let engine = LambdaEngine::new(profile).unwrap();
        for row in valuation_bound_table(&engine, 13).unwrap() {
            let want = if row.k <= 6 {
                0
            } else if row.k <= 9 {
                1
            } else {
                2
            };
            assert_eq!(row.reduction_bound, want, "k = {}", row.k);
        }
    }
}
