//! 2×2 matrices over the coefficient and series rings.

use core::fmt;

/// Minimal ring interface shared by scalars, X-polynomials and series.
pub trait RingElement: Clone {
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// The additive identity of the same shape, as an exact zero.
    fn zero_like(&self) -> Self;
}

/// A 2×2 matrix, indexed `[row][col]` from zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat2<T> {
    pub e: [[T; 2]; 2],
}

impl<T> Mat2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Mat2 {
            e: [[a11, a12], [a21, a22]],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.e[row][col]
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Mat2<U> {
        Mat2::new(
            f(&self.e[0][0]),
            f(&self.e[0][1]),
            f(&self.e[1][0]),
            f(&self.e[1][1]),
        )
    }

    pub fn try_map<U, E>(&self, mut f: impl FnMut(&T) -> Result<U, E>) -> Result<Mat2<U>, E> {
        Ok(Mat2::new(
            f(&self.e[0][0])?,
            f(&self.e[0][1])?,
            f(&self.e[1][0])?,
            f(&self.e[1][1])?,
        ))
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.e.iter().flat_map(|row| row.iter())
    }

    pub fn zip_all(&self, other: &Self, mut pred: impl FnMut(&T, &T) -> bool) -> bool {
        self.entries().zip(other.entries()).all(|(a, b)| pred(a, b))
    }
}

impl<T: RingElement> Mat2<T> {
    pub fn add(&self, other: &Self) -> Self {
        Mat2::new(
            self.e[0][0].add_ref(&other.e[0][0]),
            self.e[0][1].add_ref(&other.e[0][1]),
            self.e[1][0].add_ref(&other.e[1][0]),
            self.e[1][1].add_ref(&other.e[1][1]),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Mat2::new(
            self.e[0][0].sub_ref(&other.e[0][0]),
            self.e[0][1].sub_ref(&other.e[0][1]),
            self.e[1][0].sub_ref(&other.e[1][0]),
            self.e[1][1].sub_ref(&other.e[1][1]),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let entry = |i: usize, j: usize| {
            self.e[i][0]
                .mul_ref(&other.e[0][j])
                .add_ref(&self.e[i][1].mul_ref(&other.e[1][j]))
        };
        Mat2::new(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1))
    }

    pub fn det(&self) -> T {
        self.e[0][0]
            .mul_ref(&self.e[1][1])
            .sub_ref(&self.e[0][1].mul_ref(&self.e[1][0]))
    }

    /// Adjugate: `A · adj(A) = det(A) · Id`.
    pub fn adjugate(&self) -> Self {
        Mat2::new(
            self.e[1][1].clone(),
            self.e[0][1].neg_ref(),
            self.e[1][0].neg_ref(),
            self.e[0][0].clone(),
        )
    }
}

impl<T: fmt::Display> fmt::Display for Mat2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.e[0][0], self.e[0][1], self.e[1][0], self.e[1][1]
        )
    }
}
