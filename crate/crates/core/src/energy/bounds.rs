use serde::Serialize;

use super::separator::min_separator_length;
use crate::error::{domain, Result};
use crate::mixing::validate_kappa;
use crate::scalar::Scalar;

/// `2 − √2`: boundary length per unit radius forced when a circle of radius
/// `r > ε/√2` around `y` must cross the boundary twice.
pub fn two_crossing_constant<T: Scalar>() -> T {
    T::lit(2.0) - T::SQRT_2()
}

/// Constants feeding the energy lower bound `E(Φ) ≥ C/ε²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundConstants<T> {
    pub kappa: T,
    pub kappa_prime: T,
    /// `m′_κ`, the orthogonal-arc separator length per unit radius.
    pub m_prime: T,
    /// `m_κ = min(m′_κ, 2 − √2)`
    pub m: T,
    /// `C = (1/24)·(κ′·m_κ/(8π))²`
    pub c: T,
}

impl<T: Scalar> BoundConstants<T> {
    /// `C/ε²`, the lower bound on the total energy.
    pub fn energy_bound(&self, eps: T) -> T {
        self.c / (eps * eps)
    }

    /// `(1/48)·(κ′·m_κ/(8πε))²`, the lower bound on the energy over `A`
    /// (and over its complement).
    pub fn half_energy_bound(&self, eps: T) -> T {
        let q = self.kappa_prime * self.m / (T::lit(8.0) * T::PI() * eps);
        q * q / T::lit(48.0)
    }

    /// `κ′·m_κ/(4πε)·(1/2 − 2s)`, the lower bound on `l(s) + l(1/2 − s)`.
    pub fn slice_pair_bound(&self, eps: T, s: T) -> T {
        self.kappa_prime * self.m / (T::lit(4.0) * T::PI() * eps) * (T::half() - T::lit(2.0) * s)
    }
}

pub fn validate_kappa_prime<T: Scalar>(kappa_prime: T) -> Result<()> {
    if !(kappa_prime > T::zero() && kappa_prime <= T::one()) {
        return Err(domain(format!("κ′ must lie in (0, 1], got {kappa_prime}")));
    }
    Ok(())
}

pub fn bound_constant<T: Scalar>(kappa: T, kappa_prime: T) -> Result<BoundConstants<T>> {
    validate_kappa(kappa)?;
    validate_kappa_prime(kappa_prime)?;
    let m_prime = min_separator_length(kappa)?;
    let m = m_prime.min(two_crossing_constant());
    let q = kappa_prime * m / (T::lit(8.0) * T::PI());
    Ok(BoundConstants {
        kappa,
        kappa_prime,
        m_prime,
        m,
        c: q * q / T::lit(24.0),
    })
}
