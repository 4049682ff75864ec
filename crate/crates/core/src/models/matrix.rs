use std::ops::Mul;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{GroupElement, TreeModel};
use crate::{Error, Result};

/// An exact 2×2 integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat2(pub [[BigInt; 2]; 2]);

impl Mat2 {
    pub fn from_i64(m: [[i64; 2]; 2]) -> Self {
        Mat2([
            [BigInt::from(m[0][0]), BigInt::from(m[0][1])],
            [BigInt::from(m[1][0]), BigInt::from(m[1][1])],
        ])
    }

    pub fn identity() -> Self {
        Self::from_i64([[1, 0], [0, 1]])
    }

    /// Equal to `±I`, i.e. trivial in `PSL(2, Z)`.
    pub fn is_projective_identity(&self) -> bool {
        let m = &self.0;
        m[0][1].is_zero() && m[1][0].is_zero() && m[0][0] == m[1][1] && m[0][0].abs().is_one()
    }

    pub fn trace(&self) -> BigInt {
        &self.0[0][0] + &self.0[1][1]
    }

    /// Equality in `PSL(2, Z)`.
    pub fn projectively_eq(&self, other: &Mat2) -> bool {
        let neg = Mat2([
            [-&other.0[0][0], -&other.0[0][1]],
            [-&other.0[1][0], -&other.0[1][1]],
        ]);
        *self == *other || *self == neg
    }

    pub fn pow(&self, n: u32) -> Mat2 {
        (0..n).fold(Mat2::identity(), |acc, _| &acc * self)
    }
}

impl Mul for &Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [&a[0][0] * &b[0][0] + &a[0][1] * &b[1][0], &a[0][0] * &b[0][1] + &a[0][1] * &b[1][1]],
            [&a[1][0] * &b[0][0] + &a[1][1] * &b[1][0], &a[1][0] * &b[0][1] + &a[1][1] * &b[1][1]],
        ])
    }
}

impl TreeModel {
    /// Image in `SL(2, Z)` (defined up to sign) under
    /// `s ↦ [[0,−1],[1,0]]`, `t ↦ [[0,−1],[1,−1]]`.
    ///
    /// Only the `Z/2 * Z/3` model carries this representation; it is
    /// faithful on `PSL(2, Z)` and serves as an oracle independent of
    /// normal forms.
    pub fn matrix_eval(&self, g: &GroupElement) -> Result<Mat2> {
        if !self.is_modular() {
            return Err(Error::Unsupported("matrix evaluation needs the Z/2 * Z/3 model".into()));
        }
        self.check(g)?;
        let s = Mat2::from_i64([[0, -1], [1, 0]]);
        let t = Mat2::from_i64([[0, -1], [1, -1]]);
        let mut acc = Mat2::identity();
        for syl in g.syllables() {
            let base = if syl.gen == 0 { &s } else { &t };
            acc = &acc * &base.pow(syl.exp.rem_euclid(6) as u32);
        }
        Ok(acc)
    }
}
