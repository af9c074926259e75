//! p-adic scalars with explicit precision bookkeeping.
//!
//! A nonzero scalar is stored as `unit * p^val` where the unit is known
//! modulo `p^rel`; its absolute precision is `val + rel`. Zeros come in two
//! flavours: an exact zero, and a zero known only modulo `p^abs`. Every
//! operation computes the precision of its result pessimistically, so no
//! digit is ever claimed that the inputs do not determine.

use alloc::format;
use core::cmp::{max, min};
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Extra digits carried on top of `cap_p` so that every integral output
/// still holds `cap_p` digits after the losses of the λ-products.
pub const GUARD_DIGITS: u32 = 4;

fn is_odd_prime(p: u32) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let p = u64::from(p);
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The three truncation windows of a computation: p-adic digits, the
/// π-adic order and the X-adic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrecisionProfile {
    p: u32,
    cap_p: u32,
    cap_pi: usize,
    cap_x: usize,
}

impl PrecisionProfile {
    pub fn new(p: u32, cap_p: u32, cap_pi: usize, cap_x: usize) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        if cap_p == 0 {
            return Err(Error::InvalidCap("cap_p must be at least 1"));
        }
        if cap_pi == 0 {
            return Err(Error::InvalidCap("cap_pi must be at least 1"));
        }
        if cap_x == 0 {
            return Err(Error::InvalidCap("cap_x must be at least 1"));
        }
        Ok(PrecisionProfile {
            p,
            cap_p,
            cap_pi,
            cap_x,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn cap_p(&self) -> u32 {
        self.cap_p
    }

    pub fn cap_pi(&self) -> usize {
        self.cap_pi
    }

    pub fn cap_x(&self) -> usize {
        self.cap_x
    }

    pub fn with_cap_x(self, cap_x: usize) -> Result<Self> {
        Self::new(self.p, self.cap_p, self.cap_pi, cap_x)
    }

    /// Relative digits carried by the λ-engine. Coefficient `i` of a series
    /// in the ring R may have valuation as low as `-i/(p-1)`, so that many
    /// extra digits are needed for integral quotients to keep `cap_p`.
    pub fn working_digits(&self) -> u32 {
        let spread = (self.cap_pi as u32).saturating_sub(1).div_ceil(self.p - 1);
        self.cap_p + spread + GUARD_DIGITS
    }

    /// Absolute digits carried through the (purely integral) lifting loop.
    pub fn lift_digits(&self) -> u32 {
        self.cap_p + GUARD_DIGITS
    }

    /// Lowest valuation admitted for coefficients of ring-R series.
    pub fn valuation_floor(&self) -> i64 {
        -((self.cap_pi / (self.p as usize - 1)) as i64)
    }
}

// ---------------------------------------------------------------------------
// residues modulo p^e

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Residue {
    Word(u64),
    Big(BigUint),
}

impl Residue {
    fn is_zero(&self) -> bool {
        match self {
            Residue::Word(x) => *x == 0,
            Residue::Big(b) => b.is_zero(),
        }
    }

    fn to_biguint(&self) -> BigUint {
        match self {
            Residue::Word(x) => BigUint::from(*x),
            Residue::Big(b) => b.clone(),
        }
    }

    /// p-adic valuation of a nonzero residue.
    fn p_valuation(&self, p: u32) -> u32 {
        match self {
            Residue::Word(x) => {
                let (mut x, p, mut t) = (*x, u64::from(p), 0);
                while x % p == 0 {
                    x /= p;
                    t += 1;
                }
                t
            }
            Residue::Big(b) => {
                let mut b = b.clone();
                let mut t = 0;
                loop {
                    let (q, r) = b.div_rem(&BigUint::from(p));
                    if !r.is_zero() {
                        return t;
                    }
                    b = q;
                    t += 1;
                }
            }
        }
    }

    fn div_p_pow(&self, p: u32, t: u32) -> Residue {
        if t == 0 {
            return self.clone();
        }
        match self {
            Residue::Word(x) => Residue::Word(x / u64::from(p).pow(t)),
            Residue::Big(b) => Residue::Big(b / BigUint::from(p).pow(t)),
        }
    }
}

#[derive(Clone, Debug)]
struct Modulus {
    p: u32,
    e: u32,
    kind: ModKind,
}

#[derive(Clone, Debug)]
enum ModKind {
    Word(u64),
    Big(BigUint),
}

impl Modulus {
    fn new(p: u32, e: u32) -> Self {
        let kind = match u64::from(p).checked_pow(e) {
            Some(m) => ModKind::Word(m),
            None => ModKind::Big(BigUint::from(p).pow(e)),
        };
        Modulus { p, e, kind }
    }

    fn canon(&self, r: &Residue) -> Residue {
        match (&self.kind, r) {
            (ModKind::Word(m), Residue::Word(x)) => Residue::Word(x % m),
            (ModKind::Word(m), Residue::Big(b)) => {
                Residue::Word((b % m).to_u64().expect("reduced below a word modulus"))
            }
            (ModKind::Big(_), Residue::Word(x)) => Residue::Big(BigUint::from(*x)),
            (ModKind::Big(m), Residue::Big(b)) => Residue::Big(b % m),
        }
    }

    fn from_big(&self, v: BigUint) -> Residue {
        self.canon(&Residue::Big(v))
    }

    fn add(&self, a: &Residue, b: &Residue) -> Residue {
        let (a, b) = (self.canon(a), self.canon(b));
        match (&self.kind, a, b) {
            (ModKind::Word(m), Residue::Word(x), Residue::Word(y)) => {
                Residue::Word(((u128::from(x) + u128::from(y)) % u128::from(*m)) as u64)
            }
            (ModKind::Big(m), Residue::Big(x), Residue::Big(y)) => Residue::Big((x + y) % m),
            _ => unreachable!("canonical residues match the modulus kind"),
        }
    }

    fn neg(&self, a: &Residue) -> Residue {
        let a = self.canon(a);
        if a.is_zero() {
            return a;
        }
        match (&self.kind, a) {
            (ModKind::Word(m), Residue::Word(x)) => Residue::Word(m - x),
            (ModKind::Big(m), Residue::Big(x)) => Residue::Big(m - x),
            _ => unreachable!("canonical residues match the modulus kind"),
        }
    }

    fn mul(&self, a: &Residue, b: &Residue) -> Residue {
        let (a, b) = (self.canon(a), self.canon(b));
        match (&self.kind, a, b) {
            (ModKind::Word(m), Residue::Word(x), Residue::Word(y)) => {
                Residue::Word(((u128::from(x) * u128::from(y)) % u128::from(*m)) as u64)
            }
            (ModKind::Big(m), Residue::Big(x), Residue::Big(y)) => Residue::Big((x * y) % m),
            _ => unreachable!("canonical residues match the modulus kind"),
        }
    }

    /// Inverse of a unit residue.
    fn inv(&self, a: &Residue) -> Residue {
        let a = self.canon(a);
        match (&self.kind, a) {
            (ModKind::Word(m), Residue::Word(x)) => {
                let (mut r0, mut r1) = (i128::from(*m), i128::from(x));
                let (mut t0, mut t1) = (0i128, 1i128);
                while r1 != 0 {
                    let q = r0 / r1;
                    (r0, r1) = (r1, r0 - q * r1);
                    (t0, t1) = (t1, t0 - q * t1);
                }
                debug_assert_eq!(r0, 1, "inverse of a non-unit residue");
                Residue::Word(t0.rem_euclid(i128::from(*m)) as u64)
            }
            (ModKind::Big(m), Residue::Big(x)) => {
                // Euler: x^(phi(m) - 1) with phi(p^e) = p^(e-1) (p - 1)
                let phi = BigUint::from(self.p).pow(self.e - 1) * BigUint::from(self.p - 1);
                Residue::Big(x.modpow(&(phi - 1u32), m))
            }
            _ => unreachable!("canonical residues match the modulus kind"),
        }
    }

    /// `p^d` as a residue, zero once `d >= e`.
    fn p_pow(&self, d: u32) -> Residue {
        if d >= self.e {
            return self.canon(&Residue::Word(0));
        }
        match u64::from(self.p).checked_pow(d) {
            Some(x) => self.canon(&Residue::Word(x)),
            None => self.from_big(BigUint::from(self.p).pow(d)),
        }
    }
}

// ---------------------------------------------------------------------------
// scalars

/// Valuation of a scalar, honest about what the precision determines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    /// Exact zero.
    Infinite,
    /// A nonzero value with this valuation.
    Exact(i64),
    /// A zero known modulo `p^n`: the true valuation is at least `n`.
    AtLeast(i64),
}

impl Valuation {
    /// `None` stands for +∞.
    pub fn lower_bound(self) -> Option<i64> {
        match self {
            Valuation::Infinite => None,
            Valuation::Exact(v) | Valuation::AtLeast(v) => Some(v),
        }
    }
}

/// An element of Q_p known to finite precision (or an exact zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    p: u32,
    repr: Repr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    ExactZero,
    Zero { abs: i64 },
    Unit { val: i64, rel: u32, unit: Residue },
}

impl PadicScalar {
    pub fn zero(p: u32) -> Self {
        PadicScalar {
            p,
            repr: Repr::ExactZero,
        }
    }

    /// A zero known only modulo `p^abs`.
    pub fn zero_mod(p: u32, abs: i64) -> Self {
        PadicScalar {
            p,
            repr: Repr::Zero { abs },
        }
    }

    pub fn one(p: u32, rel: u32) -> Self {
        Self::from_i64(p, 1, rel)
    }

    pub fn from_i64(p: u32, n: i64, rel: u32) -> Self {
        Self::from_bigint(p, &BigInt::from(n), rel)
    }

    /// An integer known to `rel` significant digits. Zero is exact.
    pub fn from_bigint(p: u32, n: &BigInt, rel: u32) -> Self {
        if n.is_zero() {
            return Self::zero(p);
        }
        let mag = n.magnitude();
        let t = Residue::Big(mag.clone()).p_valuation(p);
        let val = i64::from(t);
        if rel == 0 {
            return Self::zero_mod(p, val);
        }
        let modulus = Modulus::new(p, rel);
        let u = modulus.from_big(mag / BigUint::from(p).pow(t));
        let unit = if n.sign() == Sign::Minus {
            modulus.neg(&u)
        } else {
            u
        };
        PadicScalar {
            p,
            repr: Repr::Unit { val, rel, unit },
        }
    }

    /// `num / den` known to `rel` significant digits.
    pub fn from_ratio(p: u32, num: &BigInt, den: &BigInt, rel: u32) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = Self::from_bigint(p, num, rel);
        let d = Self::from_bigint(p, den, rel);
        n.div(&d)
    }

    /// `p^e` known to `rel` significant digits.
    pub fn p_power(p: u32, e: i64, rel: u32) -> Self {
        if rel == 0 {
            return Self::zero_mod(p, e);
        }
        let modulus = Modulus::new(p, rel);
        PadicScalar {
            p,
            repr: Repr::Unit {
                val: e,
                rel,
                unit: modulus.canon(&Residue::Word(1)),
            },
        }
    }

    /// `unit * p^val` known modulo `p^abs`; the unit need not be reduced but
    /// must be prime to p.
    pub fn from_unit_parts(p: u32, unit: &BigUint, val: i64, abs: i64) -> Result<Self> {
        if (unit % BigUint::from(p)).is_zero() {
            return Err(Error::Parse(format!("{unit} is not a unit modulo {p}")));
        }
        if abs <= val {
            return Ok(Self::zero_mod(p, abs));
        }
        let rel = u32::try_from(abs - val).map_err(|_| Error::InvalidCap("relative precision"))?;
        let modulus = Modulus::new(p, rel);
        Ok(PadicScalar {
            p,
            repr: Repr::Unit {
                val,
                rel,
                unit: modulus.from_big(unit.clone()),
            },
        })
    }

    fn from_residue(p: u32, low: i64, width: u32, s: Residue) -> Self {
        if s.is_zero() {
            return Self::zero_mod(p, low + i64::from(width));
        }
        let t = s.p_valuation(p);
        let rel = width - t;
        let modulus = Modulus::new(p, rel);
        let unit = modulus.canon(&s.div_p_pow(p, t));
        PadicScalar {
            p,
            repr: Repr::Unit {
                val: low + i64::from(t),
                rel,
                unit,
            },
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::ExactZero)
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::ExactZero => Valuation::Infinite,
            Repr::Zero { abs } => Valuation::AtLeast(*abs),
            Repr::Unit { val, .. } => Valuation::Exact(*val),
        }
    }

    /// Lower bound on the valuation (`None` = +∞).
    pub fn valuation_bound(&self) -> Option<i64> {
        self.valuation().lower_bound()
    }

    /// Absolute precision: the value is known modulo `p^n`. `None` when exact.
    pub fn abs_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::ExactZero => None,
            Repr::Zero { abs } => Some(*abs),
            Repr::Unit { val, rel, .. } => Some(val + i64::from(*rel)),
        }
    }

    pub fn rel_precision(&self) -> u32 {
        match &self.repr {
            Repr::Unit { rel, .. } => *rel,
            _ => 0,
        }
    }

    /// Unit part as the least nonnegative residue modulo `p^rel`, if nonzero.
    pub fn unit_residue(&self) -> Option<BigUint> {
        match &self.repr {
            Repr::Unit { unit, .. } => Some(unit.to_biguint()),
            _ => None,
        }
    }

    /// True when the value is provably divisible by `p^n`.
    pub fn is_zero_mod(&self, n: i64) -> bool {
        self.valuation_bound().is_none_or(|v| v >= n)
    }

    /// `Some(true)` when provably in Z_p, `Some(false)` when provably not,
    /// `None` when the known digits cannot decide.
    pub fn is_integral(&self) -> Option<bool> {
        match &self.repr {
            Repr::ExactZero => Some(true),
            Repr::Zero { abs } => (*abs >= 0).then_some(true),
            Repr::Unit { val, .. } => Some(*val >= 0),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.repr, Repr::Unit { val: 0, .. })
    }

    /// Forget every digit at or beyond `p^n`.
    pub fn with_abs_cap(&self, n: i64) -> Self {
        match &self.repr {
            Repr::ExactZero => self.clone(),
            Repr::Zero { abs } => Self::zero_mod(self.p, min(*abs, n)),
            Repr::Unit { val, rel, unit } => {
                if *val >= n {
                    Self::zero_mod(self.p, n)
                } else if val + i64::from(*rel) <= n {
                    self.clone()
                } else {
                    let rel = (n - val) as u32;
                    let unit = Modulus::new(self.p, rel).canon(unit);
                    PadicScalar {
                        p: self.p,
                        repr: Repr::Unit {
                            val: *val,
                            rel,
                            unit,
                        },
                    }
                }
            }
        }
    }

    /// Keep at most `rel` significant digits.
    pub fn with_rel_cap(&self, rel: u32) -> Self {
        match &self.repr {
            Repr::Unit { val, .. } => self.with_abs_cap(val + i64::from(rel)),
            _ => self.clone(),
        }
    }

    /// Least nonnegative integer representative of an integral value,
    /// modulo `p^abs`.
    pub fn to_integer(&self) -> Result<BigUint> {
        match &self.repr {
            Repr::ExactZero => Ok(BigUint::zero()),
            Repr::Zero { abs } if *abs >= 0 => Ok(BigUint::zero()),
            Repr::Zero { .. } => Err(Error::PrecisionExhausted),
            Repr::Unit { val, unit, .. } if *val >= 0 => {
                Ok(unit.to_biguint() * BigUint::from(self.p).pow(*val as u32))
            }
            Repr::Unit { .. } => Err(Error::NonIntegral {
                context: "integer representative",
            }),
        }
    }

    /// Image in F_p of an integral value.
    pub fn reduce_mod_p(&self) -> Result<u32> {
        match &self.repr {
            Repr::ExactZero => Ok(0),
            Repr::Zero { abs } if *abs >= 1 => Ok(0),
            Repr::Zero { .. } => Err(Error::PrecisionExhausted),
            Repr::Unit { val, .. } if *val >= 1 => Ok(0),
            Repr::Unit { val: 0, unit, .. } => Ok((unit.to_biguint() % BigUint::from(self.p))
                .to_u32()
                .expect("below p")),
            Repr::Unit { .. } => Err(Error::NonIntegral {
                context: "reduction mod p",
            }),
        }
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Unit { val, rel, unit } => {
                let unit = Modulus::new(self.p, *rel).neg(unit);
                PadicScalar {
                    p: self.p,
                    repr: Repr::Unit {
                        val: *val,
                        rel: *rel,
                        unit,
                    },
                }
            }
            _ => self.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p, "mixed primes");
        let (abs_a, abs_b) = match (self.abs_precision(), other.abs_precision()) {
            (None, _) => return other.clone(),
            (_, None) => return self.clone(),
            (Some(a), Some(b)) => (a, b),
        };
        let abs = min(abs_a, abs_b);
        match (&self.repr, &other.repr) {
            (Repr::Zero { .. }, Repr::Zero { .. }) => Self::zero_mod(self.p, abs),
            (Repr::Zero { .. }, _) => other.with_abs_cap(abs),
            (_, Repr::Zero { .. }) => self.with_abs_cap(abs),
            (
                Repr::Unit {
                    val: va, unit: ua, ..
                },
                Repr::Unit {
                    val: vb, unit: ub, ..
                },
            ) => {
                let low = min(*va, *vb);
                if low >= abs {
                    return Self::zero_mod(self.p, abs);
                }
                let width = (abs - low) as u32;
                let modulus = Modulus::new(self.p, width);
                let shift = |u: &Residue, v: i64| {
                    let d = (v - low) as u64;
                    if d >= u64::from(width) {
                        modulus.canon(&Residue::Word(0))
                    } else if d == 0 {
                        modulus.canon(u)
                    } else {
                        modulus.mul(u, &modulus.p_pow(d as u32))
                    }
                };
                let s = modulus.add(&shift(ua, *va), &shift(ub, *vb));
                Self::from_residue(self.p, low, width, s)
            }
            _ => unreachable!("exact zeros handled above"),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p, "mixed primes");
        match (&self.repr, &other.repr) {
            (Repr::ExactZero, _) | (_, Repr::ExactZero) => Self::zero(self.p),
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => Self::zero_mod(self.p, a + b),
            (Repr::Zero { abs }, Repr::Unit { val, .. })
            | (Repr::Unit { val, .. }, Repr::Zero { abs }) => Self::zero_mod(self.p, abs + val),
            (
                Repr::Unit {
                    val: va,
                    rel: ra,
                    unit: ua,
                },
                Repr::Unit {
                    val: vb,
                    rel: rb,
                    unit: ub,
                },
            ) => {
                let rel = min(*ra, *rb);
                let unit = Modulus::new(self.p, rel).mul(ua, ub);
                PadicScalar {
                    p: self.p,
                    repr: Repr::Unit {
                        val: va + vb,
                        rel,
                        unit,
                    },
                }
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match &self.repr {
            Repr::ExactZero => Err(Error::DivisionByZero),
            Repr::Zero { .. } => Err(Error::PrecisionExhausted),
            Repr::Unit { val, rel, unit } => {
                let unit = Modulus::new(self.p, *rel).inv(unit);
                Ok(PadicScalar {
                    p: self.p,
                    repr: Repr::Unit {
                        val: -val,
                        rel: *rel,
                        unit,
                    },
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        match (&self.repr, &other.repr) {
            (_, Repr::ExactZero) => Err(Error::DivisionByZero),
            (_, Repr::Zero { .. }) => Err(Error::PrecisionExhausted),
            (Repr::ExactZero, _) => Ok(Self::zero(self.p)),
            (Repr::Zero { abs }, Repr::Unit { val, .. }) => Ok(Self::zero_mod(self.p, abs - val)),
            _ => Ok(self.mul(&other.inv()?)),
        }
    }

    /// `self^e`. For `e = 0` the result is 1 carrying the relative precision
    /// of `self` (one digit for zeros).
    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return Self::one(self.p, max(self.rel_precision(), 1));
        }
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc.expect("e > 0")
    }

    /// Parse `u*p^v`, `u*p^v (mod p^w)`, a plain integer, or `0`. Inputs
    /// without a modulus get `default_rel` significant digits.
    pub fn parse_with(s: &str, p: u32, default_rel: u32) -> Result<Self> {
        let s = s.trim();
        let (body, modulus) = match s.find("(mod") {
            Some(i) => (s[..i].trim(), Some(s[i..].trim())),
            None => (s, None),
        };
        let abs = match modulus {
            None => None,
            Some(m) => {
                let inner = m
                    .strip_prefix("(mod")
                    .and_then(|m| m.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("malformed modulus in {s:?}")))?;
                let (base, exp) = parse_power(inner.trim())?;
                check_base(base, p, s)?;
                Some(exp)
            }
        };
        let (coeff, shift) = match body.split_once('*') {
            Some((u, pw)) => {
                let (base, exp) = parse_power(pw.trim())?;
                check_base(base, p, s)?;
                (u.trim(), exp)
            }
            None => (body, 0),
        };
        let u: BigInt = coeff
            .parse()
            .map_err(|_| Error::Parse(format!("bad integer {coeff:?} in {s:?}")))?;
        if u.is_zero() {
            return Ok(match abs {
                Some(a) => Self::zero_mod(p, a),
                None => Self::zero(p),
            });
        }
        let t = i64::from(Residue::Big(u.magnitude().clone()).p_valuation(p));
        let val = shift + t;
        let abs = abs.unwrap_or(val + i64::from(default_rel));
        if abs <= val {
            return Ok(Self::zero_mod(p, abs));
        }
        let unit = Self::from_bigint(p, &u, (abs - val) as u32);
        Ok(match unit.repr {
            Repr::Unit { rel, unit, .. } => PadicScalar {
                p,
                repr: Repr::Unit { val, rel, unit },
            },
            _ => unreachable!("nonzero integer"),
        })
    }
}

fn parse_power(s: &str) -> Result<(u32, i64)> {
    let (b, e) = s
        .split_once('^')
        .ok_or_else(|| Error::Parse(format!("expected b^e, got {s:?}")))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad base in {s:?}")))?;
    let e = e
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
    Ok((b, e))
}

fn check_base(base: u32, p: u32, s: &str) -> Result<()> {
    if base != p {
        return Err(Error::Parse(format!(
            "{s:?} is written in base {base}, expected {p}"
        )));
    }
    Ok(())
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.p;
        match &self.repr {
            Repr::ExactZero => write!(f, "0"),
            Repr::Zero { abs } => write!(f, "0 (mod {p}^{abs})"),
            Repr::Unit { val, rel, unit } => {
                write!(
                    f,
                    "{}*{p}^{val} (mod {p}^{})",
                    unit.to_biguint(),
                    val + i64::from(*rel)
                )
            }
        }
    }
}

/// Parses the serialized form `u*p^v (mod p^w)` (or `0`, `0 (mod p^w)`).
impl FromStr for PadicScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let p = if s == "0" {
            return Err(Error::Parse(
                "an exact zero does not name its prime; use parse_with".into(),
            ));
        } else {
            let i = s
                .find("(mod")
                .ok_or_else(|| Error::Parse(format!("missing modulus in {s:?}")))?;
            let inner = s[i + 4..].trim().trim_end_matches(')');
            parse_power(inner)?.0
        };
        Self::parse_with(s, p, 0)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&PadicScalar> for &PadicScalar {
            type Output = PadicScalar;
            fn $method(self, rhs: &PadicScalar) -> PadicScalar {
                PadicScalar::$method(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        PadicScalar::neg(self)
    }
}

/// `v_p(n!)` by Legendre's formula.
pub fn factorial_valuation(p: u32, n: u32) -> u32 {
    let mut total = 0;
    let mut q = n;
    while q > 0 {
        q /= p;
        total += q;
    }
    total
}

/// Generalized binomial coefficient `C(a, i) = a (a-1) ... (a-i+1) / i!` of a
/// p-adic integer. The falling factorial is formed exactly on an integer
/// representative; the result loses `v_p(i!)` digits of absolute precision.
pub fn binomial(a: &PadicScalar, i: u32) -> Result<PadicScalar> {
    let p = a.p();
    if a.is_integral() != Some(true) {
        return Err(Error::NonIntegral {
            context: "binomial argument",
        });
    }
    let abs = match a.abs_precision() {
        // C(0, i) vanishes exactly for i > 0
        None if i > 0 => return Ok(PadicScalar::zero(p)),
        None => return Ok(PadicScalar::one(p, 1)),
        Some(abs) => abs,
    };
    let target = abs - i64::from(factorial_valuation(p, i));
    if i == 0 {
        return Ok(PadicScalar::one(p, max(abs, 1) as u32));
    }
    let c = BigInt::from(a.to_integer()?);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..i {
        num *= &c - BigInt::from(j);
        den *= BigInt::from(j + 1);
    }
    let value = num / den;
    if value.is_zero() {
        return Ok(PadicScalar::zero_mod(p, target));
    }
    let v = i64::from(Residue::Big(value.magnitude().clone()).p_valuation(p));
    if target <= v {
        return Ok(PadicScalar::zero_mod(p, target));
    }
    Ok(PadicScalar::from_bigint(p, &value, (target - v) as u32))
}
