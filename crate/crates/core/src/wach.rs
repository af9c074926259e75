//! The Frobenius matrix P(X), the Γ-matrices G_γ(X) and the π-adic lifting
//! that produces them from the diagonal seed.
//!
//! The lift keeps the integral defect ρ = G − P φ(G) γ(P)^{−1} up to date
//! instead of recomputing the residual: adding π^{ℓ−1} H to G changes ρ by
//! π^{ℓ−1} (H − q^{ℓ−k} u^{k−1} P H adj γ(P)) with u = q/γ(q), so each step
//! costs a handful of X-polynomial products per entry.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::claims;
use crate::error::{Error, Result};
use crate::lambda::{
    gamma_element, gamma_ratios_by_products, GammaRatios, LambdaEngine, ZData,
    DEFAULT_FACTOR_BUDGET,
};
use crate::matrix::{Mat2, RingElement};
use crate::padic::{PadicScalar, PrecisionProfile};
use crate::series::{evaluate_x, FamilySeries, GammaElement, PiSeries, Substitution, XPoly};

fn family_zero(p: u32, cap_pi: usize, cap_x: usize) -> FamilySeries {
    FamilySeries::zero(p, cap_pi, cap_x)
}

fn is_exact_zero_family(f: &FamilySeries) -> bool {
    f.flat().iter().all(PadicScalar::is_exact_zero)
}

fn cap_mat(m: &Mat2<FamilySeries>, abs: i64) -> Mat2<FamilySeries> {
    m.map(|f| f.with_abs_cap(abs))
}

/// Lowest π-order at which some entry is not ≡ 0 mod p^n.
pub fn residual_order(m: &Mat2<FamilySeries>, n: i64) -> usize {
    m.entries()
        .map(|f| f.pi_order(n))
        .min()
        .expect("four entries")
}

/// True when every entry is ≡ 0 mod (p^n, π^{cap_pi}, X^{cap_x}).
pub fn mat_vanishes(m: &Mat2<FamilySeries>, n: i64) -> bool {
    m.entries().all(|f| f.is_zero_mod(n))
}

/// The identity as a matrix of families.
pub fn identity(p: u32, cap_pi: usize, cap_x: usize, rel: u32) -> Mat2<FamilySeries> {
    let one = FamilySeries::from_pi_series(&PiSeries::one(p, cap_pi, rel), cap_x);
    let zero = family_zero(p, cap_pi, cap_x);
    Mat2::new(one.clone(), zero.clone(), zero, one)
}

// ---------------------------------------------------------------------------

/// A matrix of the shape [[0, −1], [c, d]]: P(X) itself (c = q^{k−1},
/// d = X z), a specialization (d = α z) or a Γ/φ-image of either.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusMatrix {
    c: PiSeries,
    d: FamilySeries,
    rel: u32,
}

impl FrobeniusMatrix {
    pub fn new(c: PiSeries, d: FamilySeries, rel: u32) -> Result<Self> {
        if c.cap_pi() != d.cap_pi() || c.p() != d.p() {
            return Err(Error::ShapeMismatch);
        }
        Ok(FrobeniusMatrix { c, d, rel })
    }

    pub fn p(&self) -> u32 {
        self.c.p()
    }

    pub fn c(&self) -> &PiSeries {
        &self.c
    }

    pub fn d(&self) -> &FamilySeries {
        &self.d
    }

    pub fn cap_pi(&self) -> usize {
        self.c.cap_pi()
    }

    pub fn cap_x(&self) -> usize {
        self.d.cap_x()
    }

    pub fn to_mat(&self) -> Mat2<FamilySeries> {
        let (p, n, m) = (self.p(), self.cap_pi(), self.cap_x());
        let minus_one = FamilySeries::from_pi_series(
            &PiSeries::constant(PadicScalar::from_i64(p, -1, self.rel), n),
            m,
        );
        Mat2::new(
            family_zero(p, n, m),
            minus_one,
            FamilySeries::from_pi_series(&self.c, m),
            self.d.clone(),
        )
    }

    /// det = c.
    pub fn det(&self) -> FamilySeries {
        FamilySeries::from_pi_series(&self.c, self.cap_x())
    }

    /// self · g.
    pub fn left_mul(&self, g: &Mat2<FamilySeries>) -> Mat2<FamilySeries> {
        let e = &g.e;
        Mat2::new(
            e[1][0].neg_ref(),
            e[1][1].neg_ref(),
            e[0][0].mul_pi(&self.c).add_ref(&e[1][0].mul_ref(&self.d)),
            e[0][1].mul_pi(&self.c).add_ref(&e[1][1].mul_ref(&self.d)),
        )
    }

    /// g · self.
    pub fn right_mul(&self, g: &Mat2<FamilySeries>) -> Mat2<FamilySeries> {
        let e = &g.e;
        Mat2::new(
            e[0][1].mul_pi(&self.c),
            e[0][1].mul_ref(&self.d).sub_ref(&e[0][0]),
            e[1][1].mul_pi(&self.c),
            e[1][1].mul_ref(&self.d).sub_ref(&e[1][0]),
        )
    }

    /// The image under a substitution (φ or γ) acting on π.
    pub fn substitute(&self, table: &Substitution) -> Self {
        FrobeniusMatrix {
            c: table.apply(&self.c),
            d: table.apply_family(&self.d),
            rel: self.rel,
        }
    }

    /// Reduction modulo π.
    pub fn mod_pi(&self) -> Mat2<XPoly> {
        let (p, m) = (self.p(), self.cap_x());
        Mat2::new(
            XPoly::zero(p, m),
            XPoly::constant(PadicScalar::from_i64(p, -1, self.rel), m),
            XPoly::constant(self.c.coeff(0).clone(), m),
            self.d.pi_coeff(0),
        )
    }

    /// X := α in the d-slot.
    pub fn evaluate_x(&self, alpha: &PadicScalar) -> Result<Self> {
        let d = FamilySeries::from_pi_series(&evaluate_x(&self.d, alpha)?, 1);
        FrobeniusMatrix::new(self.c.clone(), d, self.rel)
    }
}

// ---------------------------------------------------------------------------

fn flatten(h: &Mat2<XPoly>) -> [XPoly; 4] {
    [
        h.e[0][0].clone(),
        h.e[0][1].clone(),
        h.e[1][0].clone(),
        h.e[1][1].clone(),
    ]
}

fn unflatten(h: [XPoly; 4]) -> Mat2<XPoly> {
    let [a, b, c, d] = h;
    Mat2::new(a, b, c, d)
}

/// P0 = P mod π = [[0, −1], [p^{k−1}, d_0]] with d_0 = X p^m (or α p^m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct P0Matrix {
    p: u32,
    k: u32,
    d0: XPoly,
    rel: u32,
}

impl P0Matrix {
    pub fn new(p: u32, k: u32, d0: XPoly, rel: u32) -> Self {
        P0Matrix { p, k, d0, rel }
    }

    pub fn cap_x(&self) -> usize {
        self.d0.cap_x()
    }

    pub fn mat(&self) -> Mat2<XPoly> {
        let m = self.cap_x();
        Mat2::new(
            XPoly::zero(self.p, m),
            XPoly::constant(PadicScalar::from_i64(self.p, -1, self.rel), m),
            XPoly::constant(
                PadicScalar::p_power(self.p, i64::from(self.k) - 1, self.rel),
                m,
            ),
            self.d0.clone(),
        )
    }

    pub fn det(&self) -> XPoly {
        self.mat().det()
    }

    /// The map H ↦ H − p^{ℓ−k} P0 H adj(P0), i.e. (H P0 − p^{ℓ−1} P0 H) P0^{−1}:
    /// the linear map solved at lifting level ℓ.
    pub fn solve_operator(&self, level: u32) -> Result<LinearOperator4> {
        if level < self.k {
            return Err(Error::Precondition("lifting levels start at k"));
        }
        let c = PadicScalar::p_power(self.p, i64::from(level - self.k), self.rel);
        let p0 = self.mat();
        let adj = p0.adjugate();
        Ok(LinearOperator4::from_fn(
            self.p,
            self.cap_x(),
            |i, j, a, b| {
                let t = p0.e[i][a].mul_ref(&adj.e[b][j]).scale(&c).neg_ref();
                if i == a && j == b {
                    t.add_ref(&XPoly::constant(
                        PadicScalar::one(self.p, self.rel),
                        self.cap_x(),
                    ))
                } else {
                    t
                }
            },
        ))
    }

    /// The map H ↦ H P0 − p^e P0 H.
    pub fn sylvester_operator(&self, e: u32) -> LinearOperator4 {
        let c = PadicScalar::p_power(self.p, i64::from(e), self.rel);
        let p0 = self.mat();
        let m = self.cap_x();
        LinearOperator4::from_fn(self.p, m, |i, j, a, b| {
            // (H P0)_{ij} = Σ_b H_{ib} P0_{bj};  (P0 H)_{ij} = Σ_a P0_{ia} H_{aj}
            let mut t = XPoly::zero(self.p, m);
            if a == i {
                t = t.add_ref(&p0.e[b][j]);
            }
            if b == j {
                t = t.sub_ref(&p0.e[i][a].scale(&c));
            }
            t
        })
    }
}

/// A linear map on 2×2 matrices over Z_p[X]/(X^m), as a 4×4 matrix acting
/// on (h11, h12, h21, h22).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearOperator4 {
    p: u32,
    cap_x: usize,
    m: Vec<XPoly>,
}

impl LinearOperator4 {
    /// `f(i, j, a, b)` is the coefficient of H_{ab} in the image's (i, j) entry.
    fn from_fn(
        p: u32,
        cap_x: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> XPoly,
    ) -> Self {
        let mut m = Vec::with_capacity(16);
        for r in 0..4 {
            for c in 0..4 {
                m.push(f(r / 2, r % 2, c / 2, c % 2));
            }
        }
        LinearOperator4 { p, cap_x, m }
    }

    pub fn entry(&self, row: usize, col: usize) -> &XPoly {
        &self.m[row * 4 + col]
    }

    pub fn apply(&self, h: &Mat2<XPoly>) -> Mat2<XPoly> {
        let v = flatten(h);
        let out: [XPoly; 4] = core::array::from_fn(|r| {
            (0..4).fold(XPoly::zero(self.p, self.cap_x), |acc, c| {
                acc.add_ref(&self.entry(r, c).mul_ref(&v[c]))
            })
        });
        unflatten(out)
    }

    pub fn det(&self) -> XPoly {
        det_n(&self.m, 4)
    }

    /// Reduction modulo (p, X).
    pub fn reduce_mod_p_x(&self) -> Result<[[u32; 4]; 4]> {
        let mut out = [[0u32; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = self.entry(r, c).coeff(0).reduce_mod_p()?;
            }
        }
        Ok(out)
    }

    /// Solve `self(H) = rhs` modulo p^digits by lifting the inverse modulo
    /// (p, X): H ← H + N (rhs − self(H)) gains one (p, X)-adic order per pass.
    pub fn solve(&self, rhs: &Mat2<XPoly>, digits: u32, level: usize) -> Result<Mat2<XPoly>> {
        let inv = invert_mod_p(&self.reduce_mod_p_x()?, self.p)
            .ok_or(Error::SolveNotInvertible { level })?;
        let p = self.p;
        let n: Vec<PadicScalar> = inv
            .iter()
            .flatten()
            .map(|&x| PadicScalar::from_i64(p, i64::from(x), digits))
            .collect();
        let abs = i64::from(digits);
        let mut h = unflatten(core::array::from_fn(|_| XPoly::zero(p, self.cap_x)));
        let passes = digits as usize + self.cap_x + 2;
        for _ in 0..passes {
            let err = flatten(&rhs.sub(&self.apply(&h)).map(|x| x.with_abs_cap(abs)));
            if err.iter().all(|x| x.is_zero_mod(abs)) {
                return Ok(h);
            }
            let step: [XPoly; 4] = core::array::from_fn(|r| {
                (0..4).fold(XPoly::zero(p, self.cap_x), |acc, c| {
                    acc.add_ref(&err[c].scale(&n[r * 4 + c]))
                })
            });
            h = h.add(&unflatten(step)).map(|x| x.with_abs_cap(abs));
        }
        Err(Error::SolveNotInvertible { level })
    }
}

fn det_n<T: RingElement>(m: &[T], n: usize) -> T {
    if n == 1 {
        return m[0].clone();
    }
    let mut acc = m[0].zero_like();
    for col in 0..n {
        let minor: Vec<T> = (1..n)
            .flat_map(|r| (0..n).filter(move |&c| c != col).map(move |c| (r, c)))
            .map(|(r, c)| m[r * n + c].clone())
            .collect();
        let term = m[col].mul_ref(&det_n(&minor, n - 1));
        acc = if col % 2 == 0 {
            acc.add_ref(&term)
        } else {
            acc.sub_ref(&term)
        };
    }
    acc
}

/// Inverse of a 4×4 matrix over F_p by Gauss–Jordan elimination.
pub fn invert_mod_p(a: &[[u32; 4]; 4], p: u32) -> Option<[[u32; 4]; 4]> {
    let p = u64::from(p);
    let mut m = [[0u64; 8]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = u64::from(a[r][c]) % p;
        }
        m[r][4 + r] = 1;
    }
    let inv = |x: u64| -> u64 {
        // x^(p−2)
        let (mut base, mut e, mut acc) = (x % p, p - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc
    };
    for col in 0..4 {
        let pivot = (col..4).find(|&r| m[r][col] != 0)?;
        m.swap(col, pivot);
        let s = inv(m[col][col]);
        for x in m[col].iter_mut() {
            *x = *x * s % p;
        }
        for r in 0..4 {
            if r != col && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..8 {
                    m[r][c] = (m[r][c] + p * p - f * m[col][c] % p) % p;
                }
            }
        }
    }
    let mut out = [[0u32; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = m[r][4 + c] as u32;
        }
    }
    Some(out)
}

// ---------------------------------------------------------------------------

/// Shape of the residual at the diagonal seed: S11 exactly zero, S12 and
/// S21 zero at precision, S22 divisible by π^{k−1} with integral cofactor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedShape {
    pub s11_exact_zero: bool,
    pub s12_zero: bool,
    pub s21_zero: bool,
    pub s22_pi_order: usize,
    pub s22_integral: bool,
    pub k: u32,
}

impl SeedShape {
    pub fn holds(&self) -> bool {
        self.s11_exact_zero
            && self.s12_zero
            && self.s21_zero
            && self.s22_pi_order >= self.k as usize - 1
            && self.s22_integral
    }
}

/// One pass of the lifting loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub level: usize,
    pub h: Mat2<XPoly>,
    /// The solve operator reduced modulo (p, X).
    pub operator_mod_p_x: [[u32; 4]; 4],
    pub residual_order: usize,
}

/// A finished lift: G_γ(X) with the per-level record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lift {
    pub gamma: GammaElement,
    pub g: Mat2<FamilySeries>,
    pub steps: Vec<StepRecord>,
    pub residual_order: usize,
}

/// Everything shared by the lifts of one (k, z, d) across Γ-elements.
#[derive(Clone, Debug)]
pub struct LiftContext {
    profile: PrecisionProfile,
    k: u32,
    m: u32,
    digits: u32,
    q: PiSeries,
    z: PiSeries,
    pm: FrobeniusMatrix,
    p0: P0Matrix,
    frob: Substitution,
}

impl LiftContext {
    /// The X-family: d = X z, truncated at the profile's X-cap.
    pub fn new(profile: PrecisionProfile, zdata: &ZData) -> Result<Self> {
        let m = profile.cap_x();
        let mut cols = vec![PiSeries::zero(profile.p(), profile.cap_pi()); m];
        if m > 1 {
            cols[1] = zdata.z.clone();
        }
        let d = FamilySeries::from_columns(&cols)?;
        Self::with_d(profile, zdata, d)
    }

    /// The single module with a_p = p^m α: d = α z, no X.
    pub fn specialized(
        profile: PrecisionProfile,
        zdata: &ZData,
        alpha: &PadicScalar,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let profile = profile.with_cap_x(1)?;
        let d = FamilySeries::from_pi_series(&zdata.z.scale(alpha), 1);
        Self::with_d(profile, zdata, d)
    }

    /// Rebuild around stored data, taking P as given rather than recomputing it.
    pub fn from_parts(
        profile: PrecisionProfile,
        k: u32,
        m: u32,
        z: PiSeries,
        pm: FrobeniusMatrix,
    ) -> Result<Self> {
        let (p, n) = (profile.p(), profile.cap_pi());
        if k < 2 {
            return Err(Error::Precondition("k must be at least 2"));
        }
        if n < k as usize {
            return Err(Error::InvalidCap("cap_pi must be at least k"));
        }
        if z.cap_pi() != n
            || z.p() != p
            || pm.p() != p
            || pm.cap_pi() != n
            || pm.cap_x() != profile.cap_x()
        {
            return Err(Error::ShapeMismatch);
        }
        let digits = profile.lift_digits();
        let q = crate::lambda::q_series(p, n, digits);
        let p0 = P0Matrix::new(p, k, pm.d().pi_coeff(0), digits);
        let frob = Substitution::frobenius(p, n, digits);
        Ok(LiftContext {
            profile,
            k,
            m,
            digits,
            q,
            z,
            pm,
            p0,
            frob,
        })
    }

    /// P rebuilt from k and z: [[0, −1], [q^{k−1}, X z]].
    pub fn expected_p(&self) -> Result<FrobeniusMatrix> {
        let zdata = ZData {
            k: self.k,
            m: self.m,
            z: self.z.clone(),
            full_ratio: self.z.clone(),
        };
        Ok(LiftContext::new(self.profile, &zdata)?.pm)
    }

    fn with_d(profile: PrecisionProfile, zdata: &ZData, d: FamilySeries) -> Result<Self> {
        let (p, n) = (profile.p(), profile.cap_pi());
        if zdata.k < 2 {
            return Err(Error::Precondition("k must be at least 2"));
        }
        if n < zdata.k as usize {
            return Err(Error::InvalidCap("cap_pi must be at least k"));
        }
        if zdata.z.cap_pi() != n || zdata.z.p() != p {
            return Err(Error::ShapeMismatch);
        }
        let digits = profile.lift_digits();
        let abs = i64::from(digits);
        let q = crate::lambda::q_series(p, n, digits);
        // relative precision, so the constant term p^{k−1} keeps a valuation
        let c = q.pow(zdata.k - 1, digits);
        let d = d.with_abs_cap(abs);
        let p0 = P0Matrix::new(p, zdata.k, d.pi_coeff(0), digits);
        let pm = FrobeniusMatrix::new(c, d, digits)?;
        let frob = Substitution::frobenius(p, n, digits);
        Ok(LiftContext {
            profile,
            k: zdata.k,
            m: zdata.m,
            digits,
            q,
            z: zdata.z.clone(),
            pm,
            p0,
            frob,
        })
    }

    pub fn profile(&self) -> &PrecisionProfile {
        &self.profile
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn z(&self) -> &PiSeries {
        &self.z
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn frobenius_matrix(&self) -> &FrobeniusMatrix {
        &self.pm
    }

    pub fn p0(&self) -> &P0Matrix {
        &self.p0
    }

    pub fn frobenius_table(&self) -> &Substitution {
        &self.frob
    }

    fn certify(&self) -> i64 {
        i64::from(self.profile.cap_p())
    }

    pub fn gamma_table(&self, gamma: &GammaElement) -> Result<Substitution> {
        Substitution::gamma_at(gamma, self.profile.cap_pi(), self.digits)
    }

    pub fn gamma_ratios(&self, gamma: &GammaElement) -> Result<GammaRatios> {
        gamma_ratios_by_products(gamma, &self.frob, self.digits, DEFAULT_FACTOR_BUDGET)
    }

    /// diag((λ+/γλ+)^{k−1}, (λ−/γλ−)^{k−1}).
    pub fn seed(&self, ratios: &GammaRatios) -> Mat2<FamilySeries> {
        let (p, n, mx) = (
            self.profile.p(),
            self.profile.cap_pi(),
            self.profile.cap_x(),
        );
        let abs = i64::from(self.digits);
        let g1 = ratios.plus.pow(self.k - 1, self.digits).with_abs_cap(abs);
        let g2 = ratios.minus.pow(self.k - 1, self.digits).with_abs_cap(abs);
        let zero = family_zero(p, n, mx);
        Mat2::new(
            FamilySeries::from_pi_series(&g1, mx),
            zero.clone(),
            zero,
            FamilySeries::from_pi_series(&g2, mx),
        )
    }

    /// S = P φ(G) − G γ(P), from scratch.
    pub fn residual(
        &self,
        g: &Mat2<FamilySeries>,
        gamma_table: &Substitution,
    ) -> Mat2<FamilySeries> {
        commutation_residual(&self.pm, g, &self.frob, gamma_table, i64::from(self.digits))
    }

    pub fn commutes(&self, g: &Mat2<FamilySeries>, gamma_table: &Substitution) -> bool {
        mat_vanishes(&self.residual(g, gamma_table), self.certify())
    }

    pub fn seed_shape(&self, seed: &Mat2<FamilySeries>, gamma_table: &Substitution) -> SeedShape {
        let s = self.residual(seed, gamma_table);
        let n = self.certify();
        SeedShape {
            s11_exact_zero: is_exact_zero_family(&s.e[0][0]),
            s12_zero: s.e[0][1].is_zero_mod(n),
            s21_zero: s.e[1][0].is_zero_mod(n),
            s22_pi_order: s.e[1][1].pi_order(n),
            s22_integral: s.e[1][1].is_integral() == Some(true),
            k: self.k,
        }
    }

    pub fn lifter(&self, gamma: &GammaElement) -> Result<Lifter<'_>> {
        Lifter::new(self, gamma)
    }

    /// Runs every level k..=cap_pi and certifies the result from scratch.
    pub fn lift_full(&self, gamma: &GammaElement) -> Result<Lift> {
        let mut lifter = self.lifter(gamma)?;
        let mut steps = Vec::new();
        while !lifter.is_done() {
            steps.push(lifter.step()?);
        }
        let residual_order = lifter.residual_order();
        let g = lifter.into_g();
        self.certify_lift(&g, &lifter_table(self, gamma)?)?;
        Ok(Lift {
            gamma: gamma.clone(),
            g,
            steps,
            residual_order,
        })
    }

    fn certify_lift(&self, g: &Mat2<FamilySeries>, table: &Substitution) -> Result<()> {
        let n = self.certify();
        if !self.commutes(g, table) {
            return Err(Error::CheckFailed {
                claim: claims::LIFT_COMMUTATION,
                detail: format!("P φ(G) ≠ G γ(P) mod p^{n} for k = {}", self.k),
            });
        }
        if g.entries().any(|f| f.is_integral() != Some(true)) {
            return Err(Error::CheckFailed {
                claim: claims::LIFT_INTEGRAL,
                detail: String::from("G has a non-integral entry"),
            });
        }
        if !identity_mod_pi(g, n) {
            return Err(Error::CheckFailed {
                claim: claims::LIFT_SHAPE,
                detail: String::from("G is not ≡ Id mod π"),
            });
        }
        Ok(())
    }
}

fn lifter_table(ctx: &LiftContext, gamma: &GammaElement) -> Result<Substitution> {
    ctx.gamma_table(gamma)
}

/// S = P φ(G) − G γ(P) for a matrix P of Frobenius shape, capped at p^abs.
pub fn commutation_residual(
    pm: &FrobeniusMatrix,
    g: &Mat2<FamilySeries>,
    frob: &Substitution,
    gamma_table: &Substitution,
    abs: i64,
) -> Mat2<FamilySeries> {
    let left = pm.left_mul(&frob.apply_mat(g));
    let right = pm.substitute(gamma_table).right_mul(g);
    cap_mat(&left.sub(&right), abs)
}

/// G ≡ Id mod π, checked mod p^n.
pub fn identity_mod_pi(g: &Mat2<FamilySeries>, n: i64) -> bool {
    let p = g.e[0][0].p();
    let m = g.e[0][0].cap_x();
    let one = XPoly::constant(PadicScalar::one(p, n.max(1) as u32), m);
    let zero = XPoly::zero(p, m);
    [(0, 0, &one), (0, 1, &zero), (1, 0, &zero), (1, 1, &one)]
        .iter()
        .all(|&(i, j, want)| g.e[i][j].pi_coeff(0).sub_ref(want).is_zero_mod(n))
}

fn check_alpha(alpha: &PadicScalar) -> Result<()> {
    if alpha.valuation_bound().is_some_and(|v| v < 1) {
        return Err(Error::Precondition("α must lie in pZ_p"));
    }
    Ok(())
}

/// The level-by-level lifting state for one γ.
#[derive(Clone, Debug)]
pub struct Lifter<'a> {
    ctx: &'a LiftContext,
    level: usize,
    g: Mat2<FamilySeries>,
    rho: Mat2<FamilySeries>,
    /// q^{ℓ−k} u^{k−1} P_{ia} adj(γP)_{bj}, index ((i·2 + a)·2 + b)·2 + j,
    /// truncated to the π-orders still to be corrected.
    kernel: Vec<FamilySeries>,
}

impl<'a> Lifter<'a> {
    fn new(ctx: &'a LiftContext, gamma: &GammaElement) -> Result<Self> {
        let (p, n, mx) = (ctx.profile.p(), ctx.profile.cap_pi(), ctx.profile.cap_x());
        let k = ctx.k;
        let abs = i64::from(ctx.digits);
        let table = ctx.gamma_table(gamma)?;
        let ratios = ctx.gamma_ratios(gamma)?;
        let g = ctx.seed(&ratios);
        let shape = ctx.seed_shape(&g, &table);
        if !shape.holds() {
            return Err(Error::CheckFailed {
                claim: claims::SEED_SHAPE,
                detail: format!("{shape:?}"),
            });
        }

        let fam = |s: &PiSeries| FamilySeries::from_pi_series(s, mx);
        let u_pow = fam(&ratios.u.pow(k - 1, ctx.digits).with_abs_cap(abs));
        let (g1, g2) = (&g.e[0][0], &g.e[1][1]);
        let (phi_g1, phi_g2) = (ctx.frob.apply_family(g1), ctx.frob.apply_family(g2));
        let d = ctx.pm.d();
        let gamma_pm = ctx.pm.substitute(&table);
        let gamma_d = gamma_pm.d();
        let u_phi_g1 = u_pow.mul_ref(&phi_g1);
        let rho = cap_mat(
            &Mat2::new(
                g1.sub_ref(&phi_g2),
                family_zero(p, n, mx),
                d.mul_ref(&phi_g2).sub_ref(&u_phi_g1.mul_ref(gamma_d)),
                g2.sub_ref(&u_phi_g1),
            ),
            abs,
        );
        if residual_order(&rho, i64::from(ctx.profile.cap_p())) < k as usize - 1 {
            return Err(Error::CheckFailed {
                claim: claims::SEED_SHAPE,
                detail: String::from("seed defect below π^(k−1)"),
            });
        }

        let pmat = ctx.pm.to_mat();
        let adj = gamma_pm.to_mat().adjugate();
        let left: Vec<FamilySeries> = pmat.entries().map(|x| u_pow.mul_ref(x)).collect();
        let mut kernel = Vec::with_capacity(16);
        for i in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    for j in 0..2 {
                        let l = &left[i * 2 + a];
                        let r = &adj.e[b][j];
                        let t = if is_exact_zero_family(l) || is_exact_zero_family(r) {
                            family_zero(p, n, mx)
                        } else {
                            l.mul_ref(r).with_abs_cap(abs)
                        };
                        // only orders ≥ k−1 of the correction matter from level k on
                        kernel.push(t.truncated(n - (k as usize - 1)));
                    }
                }
            }
        }
        Ok(Lifter {
            ctx,
            level: k as usize,
            g,
            rho,
            kernel,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn is_done(&self) -> bool {
        self.level > self.ctx.profile.cap_pi()
    }

    pub fn g(&self) -> &Mat2<FamilySeries> {
        &self.g
    }

    pub fn into_g(self) -> Mat2<FamilySeries> {
        self.g
    }

    /// The running defect ρ = G − P φ(G) γ(P)^{−1}.
    pub fn defect(&self) -> &Mat2<FamilySeries> {
        &self.rho
    }

    pub fn residual_order(&self) -> usize {
        residual_order(&self.rho, i64::from(self.ctx.profile.cap_p()))
    }

    /// Solve at the current level ℓ and clear the π^{ℓ−1} coefficient.
    pub fn step(&mut self) -> Result<StepRecord> {
        let ctx = self.ctx;
        let (p, n, mx) = (ctx.profile.p(), ctx.profile.cap_pi(), ctx.profile.cap_x());
        let level = self.level;
        if level > n {
            return Err(Error::Precondition("lift already complete"));
        }
        let abs = i64::from(ctx.digits);
        let op = ctx.p0.solve_operator(level as u32)?;
        let det = op.det();
        if !det.coeff(0).is_unit() {
            return Err(Error::SolveNotInvertible { level });
        }
        let operator_mod_p_x = op.reduce_mod_p_x()?;
        let rhs = self.rho.map(|f| f.pi_coeff(level - 1).neg_ref());
        let h = op.solve(&rhs, ctx.digits, level)?;

        let rem = n - level + 1;
        for i in 0..2 {
            for j in 0..2 {
                self.g.e[i][j].add_at_pi(level - 1, &h.e[i][j]);
                let mut corr = family_zero(p, rem, mx);
                corr.add_at_pi(0, &h.e[i][j]);
                for a in 0..2 {
                    for b in 0..2 {
                        let t = &self.kernel[((i * 2 + a) * 2 + b) * 2 + j];
                        if !is_exact_zero_family(t) {
                            corr = corr.sub_ref(&t.truncated(rem).mul_x(&h.e[a][b]));
                        }
                    }
                }
                let corr = corr.with_abs_cap(abs);
                for t in 0..rem {
                    self.rho.e[i][j].add_at_pi(level - 1 + t, &corr.pi_coeff(t));
                }
                self.g.e[i][j] = self.g.e[i][j].with_abs_cap(abs);
            }
        }
        self.rho = cap_mat(&self.rho, abs);
        let residual_order = self.residual_order();
        if residual_order < level {
            return Err(Error::CheckFailed {
                claim: claims::LIFT_MONOTONE,
                detail: format!("defect order {residual_order} after level {level}"),
            });
        }
        if rem > 1 {
            let q = &ctx.q;
            for t in &mut self.kernel {
                if !is_exact_zero_family(t) {
                    *t = t
                        .truncated(rem)
                        .mul_pi(q)
                        .truncated(rem - 1)
                        .with_abs_cap(abs);
                }
            }
        }
        self.level += 1;
        Ok(StepRecord {
            level,
            h,
            operator_mod_p_x,
            residual_order,
        })
    }
}

// ---------------------------------------------------------------------------

/// Smallest primitive root modulo p², a topological generator of Z_p^*.
pub fn default_generator(p: u32) -> u32 {
    let p2 = u64::from(p) * u64::from(p);
    let order = |g: u64| {
        let (mut x, mut n) = (g % p2, 1u64);
        while x != 1 {
            x = x * g % p2;
            n += 1;
        }
        n
    };
    let target = u64::from(p) * u64::from(p - 1);
    (2..p2)
        .find(|&g| g % u64::from(p) != 0 && order(g) == target)
        .expect("primitive roots exist mod p^2") as u32
}

/// The stored Γ-elements: the generator g, 1+p, and the products g(1+p),
/// g², (1+p)² used by the cocycle checks.
pub fn standard_gammas(profile: &PrecisionProfile) -> Result<Vec<GammaElement>> {
    let p = profile.p();
    let g = gamma_element(profile, i64::from(default_generator(p)))?;
    let h = gamma_element(profile, i64::from(p) + 1)?;
    Ok(vec![
        g.clone(),
        h.clone(),
        g.compose(&h),
        g.compose(&g),
        h.compose(&h),
    ])
}

/// Pairs (γ, η) among [`standard_gammas`] whose product is also stored.
pub fn standard_cocycle_pairs(
    profile: &PrecisionProfile,
) -> Result<Vec<(GammaElement, GammaElement)>> {
    let s = standard_gammas(profile)?;
    Ok(vec![
        (s[0].clone(), s[1].clone()),
        (s[1].clone(), s[0].clone()),
        (s[0].clone(), s[0].clone()),
        (s[1].clone(), s[1].clone()),
    ])
}

/// Valuations of the roots of T² − a T + p^{k−1} from its Newton polygon,
/// as fractions (num, den), ascending. `trace_valuation` is v_p(a) (None
/// for a = 0).
pub fn newton_slopes(k: u32, trace_valuation: Option<i64>) -> [(i64, i64); 2] {
    let top = i64::from(k) - 1;
    match trace_valuation {
        Some(v) if 2 * v < top => [(v, 1), (top - v, 1)],
        _ => {
            let half = if top % 2 == 0 { (top / 2, 1) } else { (top, 2) };
            [half, half]
        }
    }
}

/// The assembled family: P(X) and G_γ(X) for each stored γ.
#[derive(Clone, Debug)]
pub struct WachFamily {
    ctx: LiftContext,
    gammas: BTreeMap<String, (GammaElement, Mat2<FamilySeries>)>,
}

impl WachFamily {
    /// Lift every γ in turn; see [`WachFamily::assemble`] for parallel use.
    pub fn build(engine: &LambdaEngine, k: u32, gammas: &[GammaElement]) -> Result<Self> {
        let zdata = engine.standard_z(k)?;
        let ctx = LiftContext::new(*engine.profile(), &zdata)?;
        let lifts = gammas
            .iter()
            .map(|g| ctx.lift_full(g))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(ctx, lifts.into_iter().map(|l| (l.gamma, l.g)).collect())
    }

    /// Collect independently computed G_γ under one context.
    pub fn assemble(
        ctx: LiftContext,
        lifts: Vec<(GammaElement, Mat2<FamilySeries>)>,
    ) -> Result<Self> {
        let (n, mx) = (ctx.profile.cap_pi(), ctx.profile.cap_x());
        let mut gammas = BTreeMap::new();
        for (gamma, g) in lifts {
            if g.entries().any(|f| f.cap_pi() != n || f.cap_x() != mx) {
                return Err(Error::ShapeMismatch);
            }
            gammas.insert(gamma.key(), (gamma, g));
        }
        Ok(WachFamily { ctx, gammas })
    }

    pub fn context(&self) -> &LiftContext {
        &self.ctx
    }

    pub fn profile(&self) -> &PrecisionProfile {
        &self.ctx.profile
    }

    pub fn p(&self) -> u32 {
        self.ctx.profile.p()
    }

    pub fn k(&self) -> u32 {
        self.ctx.k
    }

    pub fn m(&self) -> u32 {
        self.ctx.m
    }

    pub fn z(&self) -> &PiSeries {
        &self.ctx.z
    }

    pub fn p_matrix(&self) -> &FrobeniusMatrix {
        &self.ctx.pm
    }

    pub fn gammas(&self) -> impl Iterator<Item = (&GammaElement, &Mat2<FamilySeries>)> {
        self.gammas.values().map(|(g, m)| (g, m))
    }

    pub fn get(&self, gamma: &GammaElement) -> Option<&Mat2<FamilySeries>> {
        self.gammas.get(&gamma.key()).map(|(_, m)| m)
    }

    fn require(&self, gamma: &GammaElement) -> Result<&Mat2<FamilySeries>> {
        self.get(gamma)
            .ok_or(Error::Precondition("γ is not stored in this family"))
    }

    fn certify(&self) -> i64 {
        i64::from(self.ctx.profile.cap_p())
    }

    pub fn residual(&self, gamma: &GammaElement) -> Result<Mat2<FamilySeries>> {
        let g = self.require(gamma)?;
        Ok(self.ctx.residual(g, &self.ctx.gamma_table(gamma)?))
    }

    /// P φ(G_γ) = G_γ γ(P) mod p^{cap_p}.
    pub fn check_commutation(&self, gamma: &GammaElement) -> Result<bool> {
        Ok(mat_vanishes(&self.residual(gamma)?, self.certify()))
    }

    /// G_{γη} = G_γ · γ(G_η) mod p^{cap_p}.
    pub fn check_cocycle(&self, gamma: &GammaElement, eta: &GammaElement) -> Result<bool> {
        let prod = self.require(&gamma.compose(eta))?;
        let rhs = self
            .require(gamma)?
            .mul(&self.ctx.gamma_table(gamma)?.apply_mat(self.require(eta)?));
        Ok(mat_vanishes(&prod.sub(&rhs), self.certify()))
    }

    /// The stored P agrees with the one rebuilt from (k, z) mod p^{cap_p}.
    pub fn check_p_display(&self) -> Result<bool> {
        let want = self.ctx.expected_p()?.to_mat();
        Ok(mat_vanishes(
            &self.ctx.pm.to_mat().sub(&want),
            self.certify(),
        ))
    }

    /// True iff G_γ + perturbation violates the commutation relation.
    pub fn check_uniqueness(
        &self,
        gamma: &GammaElement,
        perturbation: &Mat2<FamilySeries>,
    ) -> Result<bool> {
        if !identity_mod_pi(
            &perturbation.add(&identity(
                self.p(),
                self.ctx.profile.cap_pi(),
                self.ctx.profile.cap_x(),
                self.ctx.digits,
            )),
            self.certify(),
        ) {
            return Err(Error::Precondition("perturbation must vanish mod π"));
        }
        let g = self.require(gamma)?.add(perturbation);
        Ok(!self.ctx.commutes(&g, &self.ctx.gamma_table(gamma)?))
    }

    /// det G_γ is X-independent and equals ((λ+λ−)/γ(λ+λ−))^{k−1} computed
    /// by the λ-engine.
    pub fn check_det_invariant(&self, gamma: &GammaElement, engine: &LambdaEngine) -> Result<bool> {
        let n = self.certify();
        let det = self.require(gamma)?.det();
        let product = engine.lambda_plus().mul_ref(engine.lambda_minus());
        let oracle = engine
            .ratio_gamma(&product, gamma)?
            .pow(self.k() - 1, engine.digits());
        Ok(det.is_x_independent(n) && det.column(0).sub_ref(&oracle).is_zero_mod(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators() {
        assert_eq!(default_generator(3), 2);
        assert_eq!(default_generator(5), 2);
        assert_eq!(default_generator(7), 3);
        assert_eq!(default_generator(29), 2);
    }

    #[test]
    fn newton_polygon() {
        assert_eq!(newton_slopes(4, None), [(3, 2), (3, 2)]);
        assert_eq!(newton_slopes(5, Some(2)), [(2, 1), (2, 1)]);
        assert_eq!(newton_slopes(13, Some(2)), [(2, 1), (10, 1)]);
    }

    #[test]
    fn mod_p_inverse() {
        let a = [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
        let inv = invert_mod_p(&a, 5).unwrap();
        assert_eq!(
            inv,
            [[1, 0, 0, 0], [0, 1, 4, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
        );
        assert!(invert_mod_p(&[[0; 4]; 4], 5).is_none());
    }

    #[test]
    fn solve_operator_at_k_is_the_unipotent_map() {
        for p in [3u32, 5, 7] {
            for k in [2u32, 3, 6] {
                let m = 1;
                let d0 = XPoly::from_coeffs(
                    p,
                    3,
                    vec![PadicScalar::zero(p), PadicScalar::p_power(p, m, 16)],
                );
                let p0 = P0Matrix::new(p, k, d0, 16);
                let op = p0.solve_operator(k).unwrap();
                assert_eq!(
                    op.reduce_mod_p_x().unwrap(),
                    [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
                );
                let later = p0.solve_operator(k + 1).unwrap();
                assert_eq!(
                    later.reduce_mod_p_x().unwrap(),
                    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
                );
                // M(H) P0 = H P0 − p^{ℓ−1} P0 H
                let h = Mat2::new(
                    XPoly::constant(PadicScalar::from_i64(p, 2, 16), 3),
                    XPoly::constant(PadicScalar::from_i64(p, 7, 16), 3),
                    XPoly::constant(PadicScalar::from_i64(p, 1, 16), 3),
                    XPoly::constant(PadicScalar::from_i64(p, 4, 16), 3),
                );
                let lhs = op.apply(&h).mul(&p0.mat());
                let rhs = p0.sylvester_operator(k - 1).apply(&h);
                assert!(lhs.zip_all(&rhs, |a, b| a.sub_ref(b).is_zero_mod(12)));
                let rhs_target = op.apply(&h);
                let solved = op.solve(&rhs_target, 16, k as usize).unwrap();
                assert!(solved.zip_all(&h, |a, b| a.sub_ref(b).is_zero_mod(16)));
            }
        }
    }

    fn family(p: u32, k: u32) -> (LambdaEngine, WachFamily) {
        let profile = PrecisionProfile::new(p, 8, 20, 3).unwrap();
        let engine = LambdaEngine::new(profile).unwrap();
        let fam = WachFamily::build(&engine, k, &standard_gammas(&profile).unwrap()).unwrap();
        (engine, fam)
    }

    #[test]
    fn small_family_satisfies_all_relations() {
        for (p, k) in [(3, 2), (3, 4), (5, 7), (7, 3)] {
            let (engine, fam) = family(p, k);
            for (gamma, g) in fam.gammas() {
                assert!(fam.check_commutation(gamma).unwrap());
                assert!(
                    fam.check_det_invariant(gamma, &engine).unwrap(),
                    "det p={p} k={k}"
                );
                assert!(identity_mod_pi(g, 8));
            }
            for (a, b) in standard_cocycle_pairs(fam.profile()).unwrap() {
                assert!(fam.check_cocycle(&a, &b).unwrap(), "cocycle p={p} k={k}");
            }
        }
    }

    #[test]
    fn trivial_gamma_lifts_to_identity() {
        let profile = PrecisionProfile::new(5, 8, 16, 2).unwrap();
        let engine = LambdaEngine::new(profile).unwrap();
        let ctx = LiftContext::new(profile, &engine.standard_z(6).unwrap()).unwrap();
        let id = gamma_element(&profile, 1).unwrap();
        let lift = ctx.lift_full(&id).unwrap();
        let want = identity(5, 16, 2, 16);
        assert!(lift.g.zip_all(&want, |a, b| a.sub_ref(b).is_zero_mod(8)));
    }

    #[test]
    fn perturbation_breaks_commutation() {
        let (_, fam) = family(3, 4);
        let gamma = standard_gammas(fam.profile()).unwrap()[0].clone();
        let (n, mx) = (fam.profile().cap_pi(), fam.profile().cap_x());
        let zero = Mat2::new(
            family_zero(3, n, mx),
            family_zero(3, n, mx),
            family_zero(3, n, mx),
            family_zero(3, n, mx),
        );
        assert!(!fam.check_uniqueness(&gamma, &zero).unwrap());
        let pi = FamilySeries::from_pi_series(
            &PiSeries::pi(3, n, 16).scale(&PadicScalar::from_i64(3, 3, 16)),
            mx,
        );
        let pert = Mat2::new(pi.clone(), family_zero(3, n, mx), family_zero(3, n, mx), pi);
        assert!(fam.check_uniqueness(&gamma, &pert).unwrap());
    }
}
