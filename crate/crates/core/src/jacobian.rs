use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// 2x2 Jacobian `d_ij = ∂Φ^i/∂x_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2<T> {
    pub d11: T,
    pub d12: T,
    pub d21: T,
    pub d22: T,
}

impl<T: Scalar> Jacobian2<T> {
    pub fn new(d11: T, d12: T, d21: T, d22: T) -> Self {
        Self { d11, d12, d21, d22 }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn det(&self) -> T {
        self.d11 * self.d22 - self.d12 * self.d21
    }

    #[inline]
    pub fn entries(&self) -> [T; 4] {
        [self.d11, self.d12, self.d21, self.d22]
    }

    /// Sum of squared entries.
    #[inline]
    pub fn frobenius_sq(&self) -> T {
        self.d11 * self.d11 + self.d12 * self.d12 + self.d21 * self.d21 + self.d22 * self.d22
    }

    #[inline]
    pub fn frobenius(&self) -> T {
        self.frobenius_sq().sqrt()
    }

    /// Half the squared Frobenius norm.
    #[inline]
    pub fn energy_density(&self) -> T {
        T::half() * self.frobenius_sq()
    }

    /// Entrywise (Frobenius) inner product.
    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.d11 * other.d11 + self.d12 * other.d12 + self.d21 * other.d21 + self.d22 * other.d22
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        Self::new(self.d11 * s, self.d12 * s, self.d21 * s, self.d22 * s)
    }

    #[inline]
    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.d11 + other.d11,
            self.d12 + other.d12,
            self.d21 + other.d21,
            self.d22 + other.d22,
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries()
            .iter()
            .zip(other.entries())
            .fold(T::zero(), |m, (a, b)| m.max((*a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|v| v.is_finite())
    }
}

impl<T: Scalar> Mul for Jacobian2<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.d11 * rhs.d11 + self.d12 * rhs.d21,
            self.d11 * rhs.d12 + self.d12 * rhs.d22,
            self.d21 * rhs.d11 + self.d22 * rhs.d21,
            self.d21 * rhs.d12 + self.d22 * rhs.d22,
        )
    }
}
