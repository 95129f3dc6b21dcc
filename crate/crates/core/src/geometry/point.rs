use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// A point of the torus, stored in the fundamental domain `[0,1)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint<T> {
    x1: T,
    x2: T,
}

impl<T: Scalar> TorusPoint<T> {
    /// Wraps raw coordinates onto the torus.
    pub fn new(x1: T, x2: T) -> Result<Self> {
        wrap(x1, x2)
    }

    /// Wraps coordinates that are already known to be finite.
    #[inline]
    pub(crate) fn wrapped(x1: T, x2: T) -> Self {
        Self {
            x1: wrap_coord(x1),
            x2: wrap_coord(x2),
        }
    }

    #[inline]
    pub fn x1(&self) -> T {
        self.x1
    }

    #[inline]
    pub fn x2(&self) -> T {
        self.x2
    }

    /// Membership in the reference half-torus `{0 <= x2 < 1/2}`.
    #[inline]
    pub fn in_lower_half(&self) -> bool {
        self.x2 < T::half()
    }
}

/// Reduces a finite coordinate into `[0,1)`.
#[inline]
pub fn wrap_coord<T: Scalar>(x: T) -> T {
    let r = x - x.floor();
    // x = -tiny rounds to exactly 1.0
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// Reduces each coordinate mod 1.
pub fn wrap<T: Scalar>(x1: T, x2: T) -> Result<TorusPoint<T>> {
    if !x1.is_finite() || !x2.is_finite() {
        return Err(domain(format!("non-finite coordinates ({x1}, {x2})")));
    }
    Ok(TorusPoint::wrapped(x1, x2))
}

#[inline]
fn wrapped_diff<T: Scalar>(a: T, b: T) -> T {
    let mut d = a - b;
    let h = T::half();
    if d >= h {
        d = d - T::one();
    } else if d < -h {
        d = d + T::one();
    }
    d
}

/// Signed displacement `p - q` of the nearest integer translate, each
/// component in `[-1/2, 1/2)`.
#[inline]
pub fn torus_delta<T: Scalar>(p: &TorusPoint<T>, q: &TorusPoint<T>) -> (T, T) {
    (wrapped_diff(p.x1, q.x1), wrapped_diff(p.x2, q.x2))
}

/// Flat torus metric: Euclidean distance minimised over integer translates.
#[inline]
pub fn torus_dist<T: Scalar>(p: &TorusPoint<T>, q: &TorusPoint<T>) -> T {
    let (d1, d2) = torus_delta(p, q);
    d1.hypot(d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(a: f64, b: f64) -> TorusPoint<f64> {
        wrap(a, b).unwrap()
    }

    #[test]
    fn wrap_examples() {
        let p = pt(1.25, -0.1);
        assert!((p.x1() - 0.25).abs() < 1e-15);
        assert!((p.x2() - 0.9).abs() < 1e-15);
        assert_eq!(pt(0.5, 0.5), TorusPoint { x1: 0.5, x2: 0.5 });
        assert_eq!(pt(2.0, 3.0), TorusPoint { x1: 0.0, x2: 0.0 });
        assert_eq!(pt(-1e-20, 0.0).x1(), 0.0);
    }

    #[test]
    fn wrap_rejects_non_finite() {
        assert!(wrap(f64::NAN, 0.0).is_err());
        assert!(wrap(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn dist_examples() {
        assert!((torus_dist(&pt(0.9, 0.1), &pt(0.1, 0.1)) - 0.2).abs() < 1e-15);
        assert_eq!(torus_dist(&pt(0.3, 0.7), &pt(0.3, 0.7)), 0.0);
        let far = torus_dist(&pt(0.0, 0.0), &pt(0.5, 0.5));
        assert!((far - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let p = pt(a, b);
            prop_assert!(p.x1() >= 0.0 && p.x1() < 1.0);
            prop_assert!(p.x2() >= 0.0 && p.x2() < 1.0);
            prop_assert_eq!(wrap(p.x1(), p.x2()).unwrap(), p);
        }

        #[test]
        fn metric_axioms(a in 0f64..1.0, b in 0f64..1.0, c in 0f64..1.0,
                         d in 0f64..1.0, e in 0f64..1.0, f in 0f64..1.0) {
            let (p, q, r) = (pt(a, b), pt(c, d), pt(e, f));
            let pq = torus_dist(&p, &q);
            prop_assert!((pq - torus_dist(&q, &p)).abs() <= 1e-12);
            prop_assert!(pq <= torus_dist(&p, &r) + torus_dist(&r, &q) + 1e-12);
            prop_assert!(pq <= std::f64::consts::FRAC_1_SQRT_2 + 1e-15);
        }
    }
}
