//! Truncated power series in π over Q_p, their X-families, and the
//! Frobenius / Γ substitutions acting on them.
//!
//! Truncation is uniform: a `PiSeries` of length n is known modulo π^n and
//! a `FamilySeries` modulo (π^n, X^m). X is an exact polynomial variable on
//! which φ and Γ act trivially.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{Mat2, RingElement};
use crate::padic::{binomial, PadicScalar};

impl RingElement for PadicScalar {
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn zero_like(&self) -> Self {
        PadicScalar::zero(self.p())
    }
}

fn exact_zeros(p: u32, n: usize) -> Vec<PadicScalar> {
    vec![PadicScalar::zero(p); n]
}

fn nonzero_indices(c: &[PadicScalar]) -> Vec<usize> {
    (0..c.len()).filter(|&i| !c[i].is_exact_zero()).collect()
}

/// Truncated product of two coefficient sequences, keeping `n` terms.
fn convolve(p: u32, a: &[PadicScalar], b: &[PadicScalar], n: usize) -> Vec<PadicScalar> {
    let mut out = exact_zeros(p, n);
    let nb = nonzero_indices(b);
    for (i, ai) in a.iter().enumerate().take(n) {
        if ai.is_exact_zero() {
            continue;
        }
        for &j in &nb {
            if i + j >= n {
                break;
            }
            out[i + j] = out[i + j].add(&ai.mul(&b[j]));
        }
    }
    out
}

fn all_integral(c: &[PadicScalar]) -> Option<bool> {
    let mut undecided = false;
    for x in c {
        match x.is_integral() {
            Some(false) => return Some(false),
            None => undecided = true,
            Some(true) => {}
        }
    }
    if undecided {
        None
    } else {
        Some(true)
    }
}

// ---------------------------------------------------------------------------

/// A power series in π over Q_p known modulo π^n, n = `cap_pi()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiSeries {
    p: u32,
    coeffs: Vec<PadicScalar>,
}

impl PiSeries {
    pub fn zero(p: u32, cap_pi: usize) -> Self {
        PiSeries {
            p,
            coeffs: exact_zeros(p, cap_pi),
        }
    }

    pub fn constant(c: PadicScalar, cap_pi: usize) -> Self {
        let p = c.p();
        let mut s = Self::zero(p, cap_pi);
        if cap_pi > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    pub fn one(p: u32, cap_pi: usize, rel: u32) -> Self {
        Self::constant(PadicScalar::one(p, rel), cap_pi)
    }

    /// The variable π itself.
    pub fn pi(p: u32, cap_pi: usize, rel: u32) -> Self {
        Self::from_i64s(p, cap_pi, &[0, 1], rel)
    }

    /// Pads with exact zeros or truncates to `cap_pi` terms.
    pub fn from_coeffs(p: u32, cap_pi: usize, mut coeffs: Vec<PadicScalar>) -> Self {
        coeffs.resize(cap_pi, PadicScalar::zero(p));
        PiSeries { p, coeffs }
    }

    pub fn from_i64s(p: u32, cap_pi: usize, values: &[i64], rel: u32) -> Self {
        let coeffs = values
            .iter()
            .map(|&v| PadicScalar::from_i64(p, v, rel))
            .collect();
        Self::from_coeffs(p, cap_pi, coeffs)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn cap_pi(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> &PadicScalar {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, i: usize, c: PadicScalar) {
        self.coeffs[i] = c;
    }

    /// The same series viewed modulo π^n for `n <= cap_pi`.
    pub fn truncated(&self, n: usize) -> Self {
        assert!(n <= self.cap_pi(), "cannot extend a truncated series");
        PiSeries {
            p: self.p,
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        PiSeries {
            p: self.p,
            coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect(),
        }
    }

    /// Multiply by π^s.
    pub fn shift(&self, s: usize) -> Self {
        let n = self.cap_pi();
        let mut coeffs = exact_zeros(self.p, n);
        for i in 0..n.saturating_sub(s) {
            coeffs[i + s] = self.coeffs[i].clone();
        }
        PiSeries { p: self.p, coeffs }
    }

    pub fn pow(&self, e: u32, rel: u32) -> Self {
        let mut acc = Self::one(self.p, self.cap_pi(), rel);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    pub fn with_abs_cap(&self, n: i64) -> Self {
        PiSeries {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c.with_abs_cap(n)).collect(),
        }
    }

    pub fn is_integral(&self) -> Option<bool> {
        all_integral(&self.coeffs)
    }

    /// True when every coefficient is provably divisible by `p^n`.
    pub fn is_zero_mod(&self, n: i64) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_mod(n))
    }

    /// Index of the first coefficient not provably divisible by `p^n`
    /// (`cap_pi` when there is none): the π-adic order of the series
    /// modulo `p^n`.
    pub fn pi_order(&self, n: i64) -> usize {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero_mod(n))
            .unwrap_or(self.cap_pi())
    }

    /// Smallest absolute precision among the coefficients (`None` if all exact).
    pub fn min_abs_precision(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| c.abs_precision()).min()
    }

    /// `min_i ((p-1) v_p(a_i) + i)`, i.e. `(p-1)` times the ring-R
    /// valuation; `None` for a series of exact zeros.
    pub fn scaled_r_valuation(&self) -> Option<i64> {
        let w = i64::from(self.p - 1);
        self.coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.valuation_bound().map(|v| w * v + i as i64))
            .min()
    }

    pub fn to_poly(&self) -> PiPoly {
        PiPoly::new(self.p, self.coeffs.clone())
    }
}

impl RingElement for PiSeries {
    fn add_ref(&self, other: &Self) -> Self {
        debug_assert_eq!(self.cap_pi(), other.cap_pi());
        PiSeries {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }
    fn sub_ref(&self, other: &Self) -> Self {
        debug_assert_eq!(self.cap_pi(), other.cap_pi());
        PiSeries {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        debug_assert_eq!(self.cap_pi(), other.cap_pi());
        PiSeries {
            p: self.p,
            coeffs: convolve(self.p, &self.coeffs, &other.coeffs, self.cap_pi()),
        }
    }
    fn neg_ref(&self) -> Self {
        PiSeries {
            p: self.p,
            coeffs: self.coeffs.iter().map(PadicScalar::neg).collect(),
        }
    }
    fn zero_like(&self) -> Self {
        Self::zero(self.p, self.cap_pi())
    }
}

// ---------------------------------------------------------------------------

/// A polynomial in X over Q_p known modulo X^m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XPoly {
    p: u32,
    coeffs: Vec<PadicScalar>,
}

impl XPoly {
    pub fn zero(p: u32, cap_x: usize) -> Self {
        XPoly {
            p,
            coeffs: exact_zeros(p, cap_x),
        }
    }

    pub fn constant(c: PadicScalar, cap_x: usize) -> Self {
        let mut x = Self::zero(c.p(), cap_x);
        x.coeffs[0] = c;
        x
    }

    pub fn from_coeffs(p: u32, cap_x: usize, mut coeffs: Vec<PadicScalar>) -> Self {
        coeffs.resize(cap_x, PadicScalar::zero(p));
        XPoly { p, coeffs }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn cap_x(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, j: usize) -> &PadicScalar {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        XPoly {
            p: self.p,
            coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect(),
        }
    }

    /// Multiply by X.
    pub fn shift_x(&self) -> Self {
        let mut coeffs = exact_zeros(self.p, self.cap_x());
        for j in 1..self.cap_x() {
            coeffs[j] = self.coeffs[j - 1].clone();
        }
        XPoly { p: self.p, coeffs }
    }

    pub fn is_zero_mod(&self, n: i64) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_mod(n))
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.iter().all(PadicScalar::is_exact_zero)
    }

    pub fn with_abs_cap(&self, n: i64) -> Self {
        XPoly {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c.with_abs_cap(n)).collect(),
        }
    }

    /// Inverse in Q_p[X]/(X^m); the constant term must be invertible.
    pub fn inv(&self) -> Result<Self> {
        let c0 = self.coeffs[0].inv()?;
        let m = self.cap_x();
        let mut out = exact_zeros(self.p, m);
        out[0] = c0.clone();
        for n in 1..m {
            let mut acc = PadicScalar::zero(self.p);
            for j in 1..=n {
                acc = acc.add(&self.coeffs[j].mul(&out[n - j]));
            }
            out[n] = acc.mul(&c0).neg();
        }
        Ok(XPoly {
            p: self.p,
            coeffs: out,
        })
    }

    /// Substitute `X := α`, with no truncation adjustment.
    pub fn evaluate(&self, alpha: &PadicScalar) -> PadicScalar {
        let mut acc = PadicScalar::zero(self.p);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(alpha).add(c);
        }
        acc
    }
}

impl RingElement for XPoly {
    fn add_ref(&self, other: &Self) -> Self {
        XPoly {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }
    fn sub_ref(&self, other: &Self) -> Self {
        XPoly {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        XPoly {
            p: self.p,
            coeffs: convolve(self.p, &self.coeffs, &other.coeffs, self.cap_x()),
        }
    }
    fn neg_ref(&self) -> Self {
        XPoly {
            p: self.p,
            coeffs: self.coeffs.iter().map(PadicScalar::neg).collect(),
        }
    }
    fn zero_like(&self) -> Self {
        Self::zero(self.p, self.cap_x())
    }
}

// ---------------------------------------------------------------------------

/// A series in π whose coefficients are X-polynomials: an element of
/// Q_p[[π, X]] known modulo (π^n, X^m). Stored π-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySeries {
    p: u32,
    cap_x: usize,
    coeffs: Vec<PadicScalar>,
}

impl FamilySeries {
    pub fn zero(p: u32, cap_pi: usize, cap_x: usize) -> Self {
        FamilySeries {
            p,
            cap_x,
            coeffs: exact_zeros(p, cap_pi * cap_x),
        }
    }

    /// A series independent of X.
    pub fn from_pi_series(s: &PiSeries, cap_x: usize) -> Self {
        let mut f = Self::zero(s.p(), s.cap_pi(), cap_x);
        for (i, c) in s.coeffs().iter().enumerate() {
            f.coeffs[i * cap_x] = c.clone();
        }
        f
    }

    /// Assemble from X-columns: `columns[j]` is the coefficient of X^j.
    pub fn from_columns(columns: &[PiSeries]) -> Result<Self> {
        let first = columns.first().ok_or(Error::ShapeMismatch)?;
        let (p, cap_pi, cap_x) = (first.p(), first.cap_pi(), columns.len());
        if columns.iter().any(|c| c.cap_pi() != cap_pi || c.p() != p) {
            return Err(Error::ShapeMismatch);
        }
        let mut f = Self::zero(p, cap_pi, cap_x);
        for (j, col) in columns.iter().enumerate() {
            for (i, c) in col.coeffs().iter().enumerate() {
                f.coeffs[i * cap_x + j] = c.clone();
            }
        }
        Ok(f)
    }

    /// `π^i X^j` coefficients as a flat π-major list.
    pub fn from_flat(
        p: u32,
        cap_pi: usize,
        cap_x: usize,
        coeffs: Vec<PadicScalar>,
    ) -> Result<Self> {
        if coeffs.len() != cap_pi * cap_x {
            return Err(Error::ShapeMismatch);
        }
        Ok(FamilySeries { p, cap_x, coeffs })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn cap_pi(&self) -> usize {
        self.coeffs.len() / self.cap_x
    }

    pub fn cap_x(&self) -> usize {
        self.cap_x
    }

    pub fn coeff(&self, i: usize, j: usize) -> &PadicScalar {
        &self.coeffs[i * self.cap_x + j]
    }

    pub fn flat(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    pub fn column(&self, j: usize) -> PiSeries {
        let coeffs = (0..self.cap_pi())
            .map(|i| self.coeff(i, j).clone())
            .collect();
        PiSeries { p: self.p, coeffs }
    }

    pub fn columns(&self) -> Vec<PiSeries> {
        (0..self.cap_x).map(|j| self.column(j)).collect()
    }

    /// Coefficient of π^i as an X-polynomial.
    pub fn pi_coeff(&self, i: usize) -> XPoly {
        let start = i * self.cap_x;
        XPoly {
            p: self.p,
            coeffs: self.coeffs[start..start + self.cap_x].to_vec(),
        }
    }

    /// Add `c · π^i` in place.
    pub fn add_at_pi(&mut self, i: usize, c: &XPoly) {
        debug_assert_eq!(c.cap_x(), self.cap_x);
        for j in 0..self.cap_x {
            let k = i * self.cap_x + j;
            self.coeffs[k] = self.coeffs[k].add(c.coeff(j));
        }
    }

    pub fn truncated(&self, n: usize) -> Self {
        assert!(n <= self.cap_pi(), "cannot extend a truncated series");
        FamilySeries {
            p: self.p,
            cap_x: self.cap_x,
            coeffs: self.coeffs[..n * self.cap_x].to_vec(),
        }
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        FamilySeries {
            p: self.p,
            cap_x: self.cap_x,
            coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect(),
        }
    }

    /// Multiply by X.
    pub fn shift_x(&self) -> Self {
        let mut out = Self::zero(self.p, self.cap_pi(), self.cap_x);
        for i in 0..self.cap_pi() {
            for j in 1..self.cap_x {
                out.coeffs[i * self.cap_x + j] = self.coeff(i, j - 1).clone();
            }
        }
        out
    }

    /// Multiply by a series independent of X.
    pub fn mul_pi(&self, s: &PiSeries) -> Self {
        debug_assert!(s.cap_pi() >= self.cap_pi());
        let n = self.cap_pi();
        let cols: Vec<PiSeries> = self
            .columns()
            .into_iter()
            .map(|c| PiSeries {
                p: self.p,
                coeffs: convolve(self.p, &c.coeffs, &s.coeffs, n),
            })
            .collect();
        Self::from_columns(&cols).expect("columns share a shape")
    }

    /// Multiply by a polynomial in X independent of π.
    pub fn mul_x(&self, x: &XPoly) -> Self {
        let m = self.cap_x;
        let mut out = Self::zero(self.p, self.cap_pi(), m);
        let nx = nonzero_indices(x.coeffs());
        for i in 0..self.cap_pi() {
            let row = &self.coeffs[i * m..(i + 1) * m];
            let prod = if nx.is_empty() {
                exact_zeros(self.p, m)
            } else {
                convolve(self.p, row, x.coeffs(), m)
            };
            out.coeffs[i * m..(i + 1) * m].clone_from_slice(&prod);
        }
        out
    }

    pub fn with_abs_cap(&self, n: i64) -> Self {
        FamilySeries {
            p: self.p,
            cap_x: self.cap_x,
            coeffs: self.coeffs.iter().map(|c| c.with_abs_cap(n)).collect(),
        }
    }

    pub fn is_integral(&self) -> Option<bool> {
        all_integral(&self.coeffs)
    }

    pub fn is_zero_mod(&self, n: i64) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_mod(n))
    }

    /// First π-index whose X-polynomial is not provably ≡ 0 mod `p^n`.
    pub fn pi_order(&self, n: i64) -> usize {
        (0..self.cap_pi())
            .find(|&i| !self.pi_coeff(i).is_zero_mod(n))
            .unwrap_or(self.cap_pi())
    }

    /// True when every coefficient of X^j, j ≥ 1, is provably ≡ 0 mod `p^n`.
    pub fn is_x_independent(&self, n: i64) -> bool {
        (0..self.cap_pi()).all(|i| (1..self.cap_x).all(|j| self.coeff(i, j).is_zero_mod(n)))
    }

    pub fn min_abs_precision(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| c.abs_precision()).min()
    }
}

impl RingElement for FamilySeries {
    fn add_ref(&self, other: &Self) -> Self {
        debug_assert_eq!((self.cap_pi(), self.cap_x), (other.cap_pi(), other.cap_x));
        FamilySeries {
            p: self.p,
            cap_x: self.cap_x,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }
    fn sub_ref(&self, other: &Self) -> Self {
        debug_assert_eq!((self.cap_pi(), self.cap_x), (other.cap_pi(), other.cap_x));
        FamilySeries {
            p: self.p,
            cap_x: self.cap_x,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        debug_assert_eq!((self.cap_pi(), self.cap_x), (other.cap_pi(), other.cap_x));
        let (n, m) = (self.cap_pi(), self.cap_x);
        let mut out = Self::zero(self.p, n, m);
        let nz_b: Vec<(usize, usize)> = nonzero_indices(&other.coeffs)
            .into_iter()
            .map(|k| (k / m, k % m))
            .collect();
        for (k, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            let (i1, j1) = (k / m, k % m);
            for &(i2, j2) in &nz_b {
                if i1 + i2 >= n {
                    break;
                }
                if j1 + j2 >= m {
                    continue;
                }
                let t = (i1 + i2) * m + j1 + j2;
                out.coeffs[t] = out.coeffs[t].add(&a.mul(&other.coeffs[i2 * m + j2]));
            }
        }
        out
    }
    fn neg_ref(&self) -> Self {
        FamilySeries {
            p: self.p,
            cap_x: self.cap_x,
            coeffs: self.coeffs.iter().map(PadicScalar::neg).collect(),
        }
    }
    fn zero_like(&self) -> Self {
        Self::zero(self.p, self.cap_pi(), self.cap_x)
    }
}

// ---------------------------------------------------------------------------

/// An element γ of Γ, recorded through the value χ(γ) ∈ Z_p^*.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaElement {
    chi: PadicScalar,
}

impl GammaElement {
    pub fn new(chi: PadicScalar) -> Result<Self> {
        if !chi.is_unit() {
            return Err(Error::Precondition("χ(γ) must be a p-adic unit"));
        }
        Ok(GammaElement { chi })
    }

    pub fn from_i64(p: u32, chi: i64, rel: u32) -> Result<Self> {
        Self::new(PadicScalar::from_i64(p, chi, rel))
    }

    pub fn chi(&self) -> &PadicScalar {
        &self.chi
    }

    pub fn p(&self) -> u32 {
        self.chi.p()
    }

    /// The element γη, with χ(γη) = χ(γ)χ(η).
    pub fn compose(&self, other: &GammaElement) -> GammaElement {
        GammaElement {
            chi: self.chi.mul(&other.chi),
        }
    }

    /// Decimal string of the least nonnegative representative of χ(γ).
    pub fn key(&self) -> String {
        self.chi
            .to_integer()
            .map(|n| n.to_string())
            .unwrap_or_default()
    }

    pub fn is_identity(&self) -> bool {
        let one = PadicScalar::one(self.p(), self.chi.rel_precision());
        self.chi
            .sub(&one)
            .is_zero_mod(i64::from(self.chi.rel_precision()))
    }
}

/// Precomputed powers of a substituted series `g` (with `g(0) = 0`), so that
/// `f ↦ f(g)` costs one pass over the table.
#[derive(Clone, Debug)]
pub struct Substitution {
    powers: Vec<PiSeries>,
}

impl Substitution {
    /// Table for `f ↦ f(g)`; `rel` is the precision given to `g^0 = 1`.
    pub fn new(g: &PiSeries, rel: u32) -> Result<Self> {
        if !g.coeff(0).is_exact_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let n = g.cap_pi();
        let mut powers = Vec::with_capacity(n);
        powers.push(PiSeries::one(g.p(), n, rel));
        for j in 1..n {
            let next = powers[j - 1].mul_ref(g);
            powers.push(next);
        }
        Ok(Substitution { powers })
    }

    /// φ: π ↦ (1+π)^p − 1.
    pub fn frobenius(p: u32, cap_pi: usize, rel: u32) -> Self {
        let mut g = PiSeries::zero(p, cap_pi);
        let mut c = num_bigint::BigInt::from(1);
        for i in 1..=(p as usize) {
            c = c * num_bigint::BigInt::from(p as usize + 1 - i) / num_bigint::BigInt::from(i);
            if i < cap_pi {
                g.coeffs[i] = PadicScalar::from_bigint(p, &c, rel);
            }
        }
        Self::new(&g, rel).expect("zero constant term")
    }

    /// γ: π ↦ (1+π)^χ(γ) − 1.
    pub fn gamma(gamma: &GammaElement, cap_pi: usize) -> Result<Self> {
        let p = gamma.p();
        let mut g = PiSeries::zero(p, cap_pi);
        for i in 1..cap_pi {
            g.coeffs[i] = binomial(gamma.chi(), i as u32)?;
        }
        Self::new(&g, gamma.chi().rel_precision())
    }

    /// γ with the image series capped at `digits` absolute digits, which is
    /// all an integral computation at that precision can use.
    pub fn gamma_at(gamma: &GammaElement, cap_pi: usize, digits: u32) -> Result<Self> {
        let p = gamma.p();
        let abs = i64::from(digits);
        let mut g = PiSeries::zero(p, cap_pi);
        for i in 1..cap_pi {
            g.coeffs[i] = binomial(gamma.chi(), i as u32)?.with_abs_cap(abs);
        }
        let mut sub = Self::new(&g, digits)?;
        for pw in &mut sub.powers {
            *pw = pw.with_abs_cap(abs);
        }
        Ok(sub)
    }

    pub fn cap_pi(&self) -> usize {
        self.powers.len()
    }

    /// The substituted series g.
    pub fn image(&self) -> &PiSeries {
        &self.powers[1.min(self.powers.len() - 1)]
    }

    /// `f(g)`, for `f` truncated at most as far as the table.
    pub fn apply(&self, f: &PiSeries) -> PiSeries {
        let n = f.cap_pi();
        assert!(n <= self.cap_pi(), "substitution table too short");
        let p = f.p();
        let mut out = exact_zeros(p, n);
        for (j, fj) in f.coeffs().iter().enumerate() {
            if fj.is_exact_zero() {
                continue;
            }
            let pw = &self.powers[j];
            for i in j..n {
                let c = pw.coeff(i);
                if !c.is_exact_zero() {
                    out[i] = out[i].add(&fj.mul(c));
                }
            }
        }
        PiSeries { p, coeffs: out }
    }

    /// Apply to each X-coefficient; φ and Γ fix X.
    pub fn apply_family(&self, f: &FamilySeries) -> FamilySeries {
        let cols: Vec<PiSeries> = f.columns().iter().map(|c| self.apply(c)).collect();
        FamilySeries::from_columns(&cols).expect("columns share a shape")
    }

    pub fn apply_mat(&self, m: &Mat2<FamilySeries>) -> Mat2<FamilySeries> {
        m.map(|f| self.apply_family(f))
    }
}

/// `f(g(π))` modulo π^n; `g` must have an exact zero constant term.
pub fn compose(f: &PiSeries, g: &PiSeries) -> Result<PiSeries> {
    let rel = f
        .coeffs()
        .iter()
        .map(PadicScalar::rel_precision)
        .max()
        .unwrap_or(1)
        .max(1);
    Ok(Substitution::new(g, rel)?.apply(f))
}

/// φ(f) = f((1+π)^p − 1).
pub fn frobenius(f: &PiSeries) -> PiSeries {
    let rel = f
        .coeffs()
        .iter()
        .map(PadicScalar::rel_precision)
        .max()
        .unwrap_or(1)
        .max(1);
    Substitution::frobenius(f.p(), f.cap_pi(), rel).apply(f)
}

/// γ(f) = f((1+π)^χ(γ) − 1).
pub fn gamma_act(gamma: &GammaElement, f: &PiSeries) -> Result<PiSeries> {
    Ok(Substitution::gamma(gamma, f.cap_pi())?.apply(f))
}

/// Inverse of a series whose constant term is invertible in Q_p.
pub fn invert_unit(f: &PiSeries) -> Result<PiSeries> {
    let c0 = f.coeff(0).inv()?;
    let n = f.cap_pi();
    let p = f.p();
    let mut out = exact_zeros(p, n);
    out[0] = c0.clone();
    let nz = nonzero_indices(f.coeffs());
    for m in 1..n {
        let mut acc = PadicScalar::zero(p);
        for &j in nz.iter().filter(|&&j| j >= 1 && j <= m) {
            acc = acc.add(&f.coeff(j).mul(&out[m - j]));
        }
        out[m] = acc.mul(&c0).neg();
    }
    Ok(PiSeries { p, coeffs: out })
}

/// Inverse in Q_p[X]/(X^m)[[π]]; the π^0 coefficient must be invertible.
pub fn invert_unit_family(f: &FamilySeries) -> Result<FamilySeries> {
    let c0 = f.pi_coeff(0).inv()?;
    let (n, m, p) = (f.cap_pi(), f.cap_x(), f.p());
    let mut out = FamilySeries::zero(p, n, m);
    out.add_at_pi(0, &c0);
    for k in 1..n {
        let mut acc = XPoly::zero(p, m);
        for j in 1..=k {
            acc = acc.add_ref(&f.pi_coeff(j).mul_ref(&out.pi_coeff(k - j)));
        }
        out.add_at_pi(k, &acc.mul_ref(&c0).neg_ref());
    }
    Ok(out)
}

/// Membership in R = { Σ a_i π^i : v_p(a_i) + i/(p−1) ≥ 0 }, certified on
/// every tracked coefficient.
pub fn in_ring_r(f: &PiSeries) -> bool {
    let w = i64::from(f.p() - 1);
    f.coeffs()
        .iter()
        .enumerate()
        .all(|(i, c)| c.valuation_bound().is_none_or(|v| w * v + i as i64 >= 0))
}

/// Substitute X := α with v_p(α) ≥ 1. The discarded X-tail bounds the
/// precision of the result by `cap_x · v_p(α)` (shifted by the lowest
/// coefficient valuation of `f` when that is negative).
pub fn evaluate_x(f: &FamilySeries, alpha: &PadicScalar) -> Result<PiSeries> {
    let p = f.p();
    let n = f.cap_pi();
    if alpha.is_exact_zero() {
        return Ok(f.column(0));
    }
    let va = alpha.valuation_bound().expect("not an exact zero");
    if va < 1 {
        return Err(Error::Precondition("evaluation point must lie in pZ_p"));
    }
    let floor = f
        .flat()
        .iter()
        .filter_map(|c| c.valuation_bound())
        .min()
        .unwrap_or(0)
        .min(0);
    let tail = f.cap_x() as i64 * va + floor;
    let coeffs = (0..n)
        .map(|i| f.pi_coeff(i).evaluate(alpha).with_abs_cap(tail))
        .collect();
    Ok(PiSeries { p, coeffs })
}

/// Coefficientwise reduction of an integral series to F_p.
pub fn reduce_mod_p(f: &PiSeries) -> Result<Vec<u32>> {
    f.coeffs().iter().map(PadicScalar::reduce_mod_p).collect()
}

/// Coefficientwise reduction of an integral family, π-major.
pub fn reduce_family_mod_p(f: &FamilySeries) -> Result<Vec<u32>> {
    f.flat().iter().map(PadicScalar::reduce_mod_p).collect()
}

// ---------------------------------------------------------------------------

/// An untruncated polynomial in π over Q_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiPoly {
    p: u32,
    coeffs: Vec<PadicScalar>,
}

impl PiPoly {
    pub fn new(p: u32, mut coeffs: Vec<PadicScalar>) -> Self {
        while coeffs.last().is_some_and(PadicScalar::is_exact_zero) {
            coeffs.pop();
        }
        PiPoly { p, coeffs }
    }

    pub fn from_i64s(p: u32, values: &[i64], rel: u32) -> Self {
        Self::new(
            p,
            values
                .iter()
                .map(|&v| PadicScalar::from_i64(p, v, rel))
                .collect(),
        )
    }

    pub fn monomial(c: PadicScalar, degree: usize) -> Self {
        let p = c.p();
        let mut coeffs = exact_zeros(p, degree + 1);
        coeffs[degree] = c;
        Self::new(p, coeffs)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    /// Degree of the exact support (`None` for the zero polynomial).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = PadicScalar::zero(self.p);
        let coeffs = (0..n)
            .map(|i| {
                self.coeffs
                    .get(i)
                    .unwrap_or(&zero)
                    .add(other.coeffs.get(i).unwrap_or(&zero))
            })
            .collect();
        Self::new(self.p, coeffs)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.p, self.coeffs.iter().map(PadicScalar::neg).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::new(self.p, Vec::new());
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        Self::new(self.p, convolve(self.p, &self.coeffs, &other.coeffs, n))
    }

    pub fn pow(&self, e: u32, rel: u32) -> Self {
        let mut acc = Self::new(self.p, alloc::vec![PadicScalar::one(self.p, rel)]);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// φ applied to a polynomial: an exact polynomial of degree p·deg.
    pub fn frobenius(&self, rel: u32) -> Self {
        let p = self.p;
        let phi_pi = {
            let mut c = num_bigint::BigInt::from(1);
            let mut coeffs = exact_zeros(p, p as usize + 1);
            for i in 1..=(p as usize) {
                c = c * num_bigint::BigInt::from(p as usize + 1 - i) / num_bigint::BigInt::from(i);
                coeffs[i] = PadicScalar::from_bigint(p, &c, rel);
            }
            Self::new(p, coeffs)
        };
        let mut acc = Self::new(p, Vec::new());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&phi_pi).add(&Self::new(p, alloc::vec![c.clone()]));
        }
        acc
    }

    /// Euclidean division by a polynomial whose leading coefficient is a
    /// p-adic unit. Both quotient and remainder stay integral for integral
    /// inputs, so no precision is lost to denominators.
    pub fn divrem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let d = divisor.degree().ok_or(Error::DivisionByZero)?;
        let lead = &divisor.coeffs[d];
        if !lead.is_unit() {
            return Err(Error::Precondition(
                "divisor must have a unit leading coefficient",
            ));
        }
        let lead_inv = lead.inv()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((Self::new(self.p, Vec::new()), self.clone()));
        }
        let mut quot = exact_zeros(self.p, rem.len() - d);
        for k in (0..quot.len()).rev() {
            let c = rem[k + d].mul(&lead_inv);
            if c.is_exact_zero() {
                continue;
            }
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + i] = rem[k + i].sub(&c.mul(dc));
            }
            quot[k] = c;
        }
        rem.truncate(d);
        Ok((Self::new(self.p, quot), Self::new(self.p, rem)))
    }

    /// Truncate into a series modulo π^n.
    pub fn to_series(&self, n: usize) -> PiSeries {
        PiSeries::from_coeffs(self.p, n, self.coeffs.iter().take(n).cloned().collect())
    }
}
