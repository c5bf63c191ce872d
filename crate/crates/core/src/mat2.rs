//! 2×2 real matrices and their closed-form singular values.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A real 2×2 matrix, typically a deformation gradient.
///
/// Serialized as the row-major array `[a11, a12, a21, a22]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl From<[f64; 4]> for Mat2 {
    fn from(a: [f64; 4]) -> Self {
        Mat2::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Mat2> for [f64; 4] {
    fn from(m: Mat2) -> Self {
        m.to_array()
    }
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, b)
    }

    pub fn scaled_identity(s: f64) -> Self {
        Mat2::diag(s, s)
    }

    /// Planar rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    /// Outer product `a ⊗ b`, i.e. entries `a_i b_j`.
    pub fn outer(a: [f64; 2], b: [f64; 2]) -> Self {
        Mat2::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    /// Entry by flat row-major index 0..4.
    pub fn get(&self, k: usize) -> f64 {
        match k {
            0 => self.a11,
            1 => self.a12,
            2 => self.a21,
            3 => self.a22,
            _ => panic!("Mat2 index {k} out of range"),
        }
    }

    pub fn set(&mut self, k: usize, v: f64) {
        match k {
            0 => self.a11 = v,
            1 => self.a12 = v,
            2 => self.a21 = v,
            3 => self.a22 = v,
            _ => panic!("Mat2 index {k} out of range"),
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Squared Frobenius norm ‖F‖².
    pub fn norm_sq(&self) -> f64 {
        self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Cofactor matrix, the derivative of `det` with respect to the entries.
    pub fn cofactor(&self) -> Self {
        Mat2::new(self.a22, -self.a21, -self.a12, self.a11)
    }

    /// Frobenius inner product `⟨A, B⟩ = tr(AᵀB)`.
    pub fn dot(&self, other: &Mat2) -> f64 {
        self.a11 * other.a11 + self.a12 * other.a12 + self.a21 * other.a21 + self.a22 * other.a22
    }

    pub fn matmul(&self, o: &Mat2) -> Self {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * x[0] + self.a12 * x[1],
            self.a21 * x[0] + self.a22 * x[1],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// The quadratic form `‖F‖² + 2 det F = (F₁₁+F₂₂)² + (F₁₂−F₂₁)²`.
    ///
    /// Always nonnegative; equals `(λ₁+λ₂)²` on `det F ≥ 0` and `(λ₁−λ₂)²` otherwise.
    pub fn conformal_sq(&self) -> f64 {
        let s = self.a11 + self.a22;
        let d = self.a12 - self.a21;
        s * s + d * d
    }

    pub fn singular_values(&self) -> SingularPair {
        singular_values(self)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.a11, self.a12, self.a21, self.a22
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl SubAssign for Mat2 {
    fn sub_assign(&mut self, o: Mat2) {
        *self = *self - o;
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }
}

impl Mul<Mat2> for f64 {
    type Output = Mat2;
    fn mul(self, m: Mat2) -> Mat2 {
        m * self
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        self.matmul(&o)
    }
}

/// Singular values `λ₁ ≥ λ₂ ≥ 0` of a 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularPair {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SingularPair {
    pub fn sum(&self) -> f64 {
        self.lambda1 + self.lambda2
    }

    pub fn gap(&self) -> f64 {
        self.lambda1 - self.lambda2
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.lambda1, self.lambda2]
    }
}

/// Closed-form singular values via
/// `λ₁,₂ = ½(√(‖F‖²+2|det F|) ± √(‖F‖²−2|det F|))`.
pub fn singular_values(f: &Mat2) -> SingularPair {
    let n = f.norm_sq();
    let d = f.det().abs();
    let sum = (n + 2.0 * d).max(0.0).sqrt();
    let gap = (n - 2.0 * d).max(0.0).sqrt();
    SingularPair {
        lambda1: 0.5 * (sum + gap),
        lambda2: (0.5 * (sum - gap)).max(0.0),
    }
}

/// Derivatives of `λ₁+λ₂` and `λ₁−λ₂` with respect to `F`.
///
/// Returns `(d_sum, d_gap)`; either is `None` where the corresponding quantity
/// vanishes. At `det F = 0` the sign is taken from the `det F > 0` side.
pub(crate) fn singular_sum_gap_derivatives(f: &Mat2) -> (Option<Mat2>, Option<Mat2>) {
    let sp = singular_values(f);
    let sign = if f.det() >= 0.0 { 1.0 } else { -1.0 };
    let cof = f.cofactor();
    let sum = sp.sum();
    let gap = sp.gap();
    let d_sum = (sum > 0.0).then(|| (*f + cof * sign) * (1.0 / sum));
    let d_gap = (gap > 0.0).then(|| (*f - cof * sign) * (1.0 / gap));
    (d_sum, d_gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_singular_values() {
        let sp = singular_values(&Mat2::IDENTITY);
        assert_eq!(sp.as_array(), [1.0, 1.0]);
    }

    #[test]
    fn reflection_has_unit_singular_values() {
        let sp = singular_values(&Mat2::diag(1.0, -1.0));
        assert!((sp.lambda1 - 1.0).abs() < 1e-15);
        assert!((sp.lambda2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_shear_singular_values_are_golden_ratio_pair() {
        let sp = singular_values(&Mat2::new(1.0, 1.0, 0.0, 1.0));
        let r5 = 5f64.sqrt();
        assert!((sp.lambda1 - (r5 + 1.0) / 2.0).abs() < 1e-14);
        assert!((sp.lambda2 - (r5 - 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_matrix() {
        let sp = singular_values(&Mat2::new(3.0, 0.0, 4.0, 0.0));
        assert!((sp.lambda1 - 5.0).abs() < 1e-14);
        assert_eq!(sp.lambda2, 0.0);
    }

    #[test]
    fn conformal_form_matches_definition() {
        let f = Mat2::new(0.3, -1.2, 2.1, 0.7);
        let direct = f.norm_sq() + 2.0 * f.det();
        assert!((f.conformal_sq() - direct).abs() < 1e-14);
    }

    #[test]
    fn serde_is_row_major_array() {
        let f = Mat2::new(1.0, 2.0, 3.0, 4.0);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, "[1.0,2.0,3.0,4.0]");
        let back: Mat2 = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
