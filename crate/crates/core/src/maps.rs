//! Analytic area-preserving diffeomorphisms of the torus.
//!
//! A [`MapDescriptor`] is a composition of primitive stages, each with a
//! closed-form forward map, inverse and Jacobian. Stages are applied left to
//! right and the point is wrapped after each one.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{torus_delta, TorusPoint};
use crate::jacobian::Jacobian2;
use crate::scalar::Scalar;

/// Default finite-difference step for [`jacobian_numeric`].
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// One primitive diffeomorphism of the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Stage<T> {
    Identity,
    /// `x ← M x` with an integer matrix of determinant ±1.
    #[serde(rename = "linear")]
    IntegerLinear { matrix: [[i64; 2]; 2] },
    /// `x1 ← x1 + a·sin(2πk·x2)`
    #[serde(rename = "hsine")]
    HorizontalSineShear { a: T, k: u32 },
    /// `x2 ← x2 + a·sin(2πk·x1)`
    #[serde(rename = "vsine")]
    VerticalSineShear { a: T, k: u32 },
    /// `x1 ← x1 + n·x2`
    #[serde(rename = "hshear")]
    HorizontalLinearShear { n: i64 },
    /// `x2 ← x2 + n·x1`
    #[serde(rename = "vshear")]
    VerticalLinearShear { n: i64 },
}

fn int<T: Scalar>(n: i64) -> T {
    T::from_i64(n).expect("integer fits in scalar")
}

impl<T: Scalar> Stage<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Stage::IntegerLinear { matrix: [[a, b], [c, d]] } => {
                let det = a * d - b * c;
                if det.abs() != 1 {
                    return Err(domain(format!(
                        "integer-linear stage must have determinant ±1, got {det}"
                    )));
                }
            }
            Stage::HorizontalSineShear { a, k } | Stage::VerticalSineShear { a, k } => {
                if !a.is_finite() {
                    return Err(domain(format!("sine-shear amplitude must be finite, got {a}")));
                }
                if *k == 0 {
                    return Err(domain("sine-shear frequency must be a positive integer"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn phase(k: u32, x: T) -> T {
        T::two_pi() * T::from_u32(k).expect("frequency fits") * x
    }

    /// Forward map before wrapping.
    fn forward_raw(&self, p: &TorusPoint<T>) -> (T, T) {
        let (x1, x2) = (p.x1(), p.x2());
        match *self {
            Stage::Identity => (x1, x2),
            Stage::IntegerLinear { matrix: [[a, b], [c, d]] } => (
                int::<T>(a) * x1 + int::<T>(b) * x2,
                int::<T>(c) * x1 + int::<T>(d) * x2,
            ),
            Stage::HorizontalSineShear { a, k } => (x1 + a * Self::phase(k, x2).sin(), x2),
            Stage::VerticalSineShear { a, k } => (x1, x2 + a * Self::phase(k, x1).sin()),
            Stage::HorizontalLinearShear { n } => (x1 + int::<T>(n) * x2, x2),
            Stage::VerticalLinearShear { n } => (x1, x2 + int::<T>(n) * x1),
        }
    }

    pub fn apply(&self, p: &TorusPoint<T>) -> TorusPoint<T> {
        let (y1, y2) = self.forward_raw(p);
        TorusPoint::wrapped(y1, y2)
    }

    /// The inverse stage, itself a zoo stage.
    pub fn inverse_stage(&self) -> Stage<T> {
        match *self {
            Stage::Identity => Stage::Identity,
            Stage::IntegerLinear { matrix: [[a, b], [c, d]] } => {
                let det = a * d - b * c;
                Stage::IntegerLinear {
                    matrix: [[det * d, -det * b], [-det * c, det * a]],
                }
            }
            Stage::HorizontalSineShear { a, k } => Stage::HorizontalSineShear { a: -a, k },
            Stage::VerticalSineShear { a, k } => Stage::VerticalSineShear { a: -a, k },
            Stage::HorizontalLinearShear { n } => Stage::HorizontalLinearShear { n: -n },
            Stage::VerticalLinearShear { n } => Stage::VerticalLinearShear { n: -n },
        }
    }

    pub fn jacobian(&self, p: &TorusPoint<T>) -> Jacobian2<T> {
        let (o, z) = (T::one(), T::zero());
        match *self {
            Stage::Identity => Jacobian2::identity(),
            Stage::IntegerLinear { matrix: [[a, b], [c, d]] } => {
                Jacobian2::new(int(a), int(b), int(c), int(d))
            }
            Stage::HorizontalSineShear { a, k } => {
                let kk = T::from_u32(k).expect("frequency fits");
                Jacobian2::new(o, T::two_pi() * a * kk * Self::phase(k, p.x2()).cos(), z, o)
            }
            Stage::VerticalSineShear { a, k } => {
                let kk = T::from_u32(k).expect("frequency fits");
                Jacobian2::new(o, z, T::two_pi() * a * kk * Self::phase(k, p.x1()).cos(), o)
            }
            Stage::HorizontalLinearShear { n } => Jacobian2::new(o, int(n), z, o),
            Stage::VerticalLinearShear { n } => Jacobian2::new(o, z, int(n), o),
        }
    }

    pub fn is_orientation_reversing(&self) -> bool {
        matches!(self, Stage::IntegerLinear { matrix: [[a, b], [c, d]] } if a * d - b * c < 0)
    }
}

/// Anything that acts as a diffeomorphism of the torus: closed-form maps and
/// time-1 maps of flows.
pub trait Rearrangement<T: Scalar>: Sync {
    fn apply(&self, p: TorusPoint<T>) -> Result<TorusPoint<T>>;

    fn inverse(&self, p: TorusPoint<T>) -> Result<TorusPoint<T>>;

    fn jacobian(&self, p: TorusPoint<T>) -> Result<Jacobian2<T>>;

    /// Image point and Jacobian in one pass.
    fn apply_with_jacobian(&self, p: TorusPoint<T>) -> Result<(TorusPoint<T>, Jacobian2<T>)> {
        Ok((self.apply(p)?, self.jacobian(p)?))
    }

    /// `p ∈ Φ(A)` for the half-torus `A = {0 <= x2 < 1/2}`.
    fn image_contains(&self, p: TorusPoint<T>) -> Result<bool> {
        Ok(self.inverse(p)?.in_lower_half())
    }

    /// `p ∈ Φ(A_s)` for the strip `A_s = {s <= x2 <= 1/2 - s}`.
    fn image_of_strip_contains(&self, p: TorusPoint<T>, s: T) -> Result<bool> {
        let x2 = self.inverse(p)?.x2();
        Ok(x2 >= s && x2 <= T::half() - s)
    }

    /// Whether the map reverses orientation, when known in closed form.
    fn is_orientation_reversing(&self) -> bool {
        false
    }
}

/// Composite of zoo stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDescriptor<T> {
    #[serde(rename = "stage", default = "Vec::new")]
    stages: Vec<Stage<T>>,
}

impl<T: Scalar> MapDescriptor<T> {
    pub fn new(stages: Vec<Stage<T>>) -> Result<Self> {
        let map = Self { stages };
        map.validate()?;
        Ok(map)
    }

    pub fn identity() -> Self {
        Self { stages: vec![Stage::Identity] }
    }

    pub fn single(stage: Stage<T>) -> Result<Self> {
        Self::new(vec![stage])
    }

    pub fn validate(&self) -> Result<()> {
        self.stages.iter().try_for_each(Stage::validate)
    }

    pub fn stages(&self) -> &[Stage<T>] {
        &self.stages
    }

    /// Forward map: stages left to right, wrapped after each.
    pub fn forward(&self, p: TorusPoint<T>) -> TorusPoint<T> {
        self.stages.iter().fold(p, |q, s| s.apply(&q))
    }

    /// Closed-form inverse: stage inverses in reverse order.
    pub fn backward(&self, p: TorusPoint<T>) -> TorusPoint<T> {
        self.stages
            .iter()
            .rev()
            .fold(p, |q, s| s.inverse_stage().apply(&q))
    }

    /// Chain-rule product of stage Jacobians along the running image point.
    pub fn forward_with_jacobian(&self, p: TorusPoint<T>) -> (TorusPoint<T>, Jacobian2<T>) {
        self.stages.iter().fold((p, Jacobian2::identity()), |(q, jac), s| {
            (s.apply(&q), s.jacobian(&q) * jac)
        })
    }

    pub fn analytic_jacobian(&self, p: TorusPoint<T>) -> Jacobian2<T> {
        self.forward_with_jacobian(p).1
    }

    /// The composite inverse as a descriptor.
    pub fn inverse_descriptor(&self) -> Self {
        Self {
            stages: self.stages.iter().rev().map(Stage::inverse_stage).collect(),
        }
    }

    /// `p ∈ Φ(A)` via the closed-form inverse.
    pub fn membership_in_image(&self, p: TorusPoint<T>) -> bool {
        self.backward(p).in_lower_half()
    }
}

impl<T: Scalar> Rearrangement<T> for MapDescriptor<T> {
    fn apply(&self, p: TorusPoint<T>) -> Result<TorusPoint<T>> {
        Ok(self.forward(p))
    }

    fn inverse(&self, p: TorusPoint<T>) -> Result<TorusPoint<T>> {
        Ok(self.backward(p))
    }

    fn jacobian(&self, p: TorusPoint<T>) -> Result<Jacobian2<T>> {
        Ok(self.analytic_jacobian(p))
    }

    fn apply_with_jacobian(&self, p: TorusPoint<T>) -> Result<(TorusPoint<T>, Jacobian2<T>)> {
        Ok(self.forward_with_jacobian(p))
    }

    fn image_contains(&self, p: TorusPoint<T>) -> Result<bool> {
        Ok(self.membership_in_image(p))
    }

    fn is_orientation_reversing(&self) -> bool {
        self.stages.iter().filter(|s| s.is_orientation_reversing()).count() % 2 == 1
    }
}

/// Central-difference Jacobian. Each image is moved to the branch nearest
/// `Φ(p)` before differencing, so wrapping does not corrupt the quotient.
pub fn jacobian_numeric<T, M>(map: &M, p: TorusPoint<T>, h: T) -> Result<Jacobian2<T>>
where
    T: Scalar,
    M: Rearrangement<T> + ?Sized,
{
    if !(h > T::zero() && h <= T::lit(1e-3)) {
        return Err(domain(format!("finite-difference step must lie in (0, 1e-3], got {h}")));
    }
    let centre = map.apply(p)?;
    let column = |e1: T, e2: T| -> Result<(T, T)> {
        let plus = map.apply(TorusPoint::new(p.x1() + e1, p.x2() + e2)?)?;
        let minus = map.apply(TorusPoint::new(p.x1() - e1, p.x2() - e2)?)?;
        let (p1, p2) = torus_delta(&plus, &centre);
        let (m1, m2) = torus_delta(&minus, &centre);
        let two_h = h + h;
        Ok(((p1 - m1) / two_h, (p2 - m2) / two_h))
    };
    let (d11, d21) = column(h, T::zero())?;
    let (d12, d22) = column(T::zero(), h)?;
    Ok(Jacobian2::new(d11, d12, d21, d22))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{torus_dist, wrap};
    use std::f64::consts::PI;

    fn pt(a: f64, b: f64) -> TorusPoint<f64> {
        wrap(a, b).unwrap()
    }

    fn single(s: Stage<f64>) -> MapDescriptor<f64> {
        MapDescriptor::single(s).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(MapDescriptor::identity().forward(pt(0.3, 0.7)), pt(0.3, 0.7));
        let v5 = single(Stage::VerticalLinearShear { n: 5 }).forward(pt(0.1, 0.2));
        assert!(torus_dist(&v5, &pt(0.1, 0.7)) < 1e-15);
        let hs = single(Stage::HorizontalSineShear { a: 0.25, k: 1 }).forward(pt(0.0, 0.25));
        assert!(torus_dist(&hs, &pt(0.25, 0.25)) < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let v3 = single(Stage::VerticalLinearShear { n: 3 });
        let p = pt(0.12, 0.34);
        assert!(torus_dist(&v3.backward(v3.forward(p)), &p) < 1e-14);
        assert_eq!(MapDescriptor::identity().backward(pt(0.9, 0.9)), pt(0.9, 0.9));
        let hs = single(Stage::HorizontalSineShear { a: 0.25, k: 1 });
        assert!(torus_dist(&hs.backward(pt(0.25, 0.25)), &pt(0.0, 0.25)) < 1e-15);
    }

    #[test]
    fn jacobian_examples() {
        assert_eq!(
            MapDescriptor::identity().analytic_jacobian(pt(0.4, 0.1)),
            Jacobian2::identity()
        );
        let j = single(Stage::HorizontalSineShear { a: 0.25, k: 1 }).analytic_jacobian(pt(0.3, 0.0));
        assert!(j.max_abs_diff(&Jacobian2::new(1.0, 2.0 * PI * 0.25, 0.0, 1.0)) < 1e-15);
        let h1 = single(Stage::HorizontalLinearShear { n: 1 }).analytic_jacobian(pt(0.8, 0.6));
        assert_eq!(h1, Jacobian2::new(1.0, 1.0, 0.0, 1.0));
    }

    #[test]
    fn numeric_jacobian_examples() {
        let id = jacobian_numeric(&MapDescriptor::identity(), pt(0.999999, 0.5), 1e-5).unwrap();
        assert!(id.max_abs_diff(&Jacobian2::identity()) < 1e-9);
        let v10 = single(Stage::VerticalLinearShear { n: 10 });
        let j = jacobian_numeric(&v10, pt(0.37, 0.91), 1e-5).unwrap();
        assert!(j.max_abs_diff(&Jacobian2::new(1.0, 0.0, 10.0, 1.0)) < 1e-8);
        assert!(jacobian_numeric(&v10, pt(0.1, 0.1), 1e-2).is_err());
        assert!(jacobian_numeric(&v10, pt(0.1, 0.1), 0.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let id = MapDescriptor::identity();
        assert!(id.membership_in_image(pt(0.5, 0.25)));
        assert!(!id.membership_in_image(pt(0.5, 0.75)));
        let v10 = single(Stage::VerticalLinearShear { n: 10 });
        assert!(v10.membership_in_image(pt(0.06, 0.0)));
    }

    #[test]
    fn stage_validation() {
        assert!(MapDescriptor::<f64>::single(Stage::IntegerLinear { matrix: [[2, 0], [0, 1]] }).is_err());
        assert!(MapDescriptor::<f64>::single(Stage::HorizontalSineShear { a: 0.1, k: 0 }).is_err());
        assert!(MapDescriptor::single(Stage::HorizontalSineShear { a: f64::NAN, k: 1 }).is_err());
        let flip = single(Stage::IntegerLinear { matrix: [[0, 1], [1, 0]] });
        assert!(flip.is_orientation_reversing());
        assert!(!single(Stage::IntegerLinear { matrix: [[2, 1], [1, 1]] }).is_orientation_reversing());
    }

    #[test]
    fn integer_linear_inverse_by_adjugate() {
        let cat = single(Stage::IntegerLinear { matrix: [[2, 1], [1, 1]] });
        assert_eq!(
            cat.inverse_descriptor().stages(),
            &[Stage::IntegerLinear { matrix: [[1, -1], [-1, 2]] }]
        );
        let p = pt(0.123, 0.456);
        assert!(torus_dist(&cat.backward(cat.forward(p)), &p) < 1e-14);
    }

    #[test]
    fn generic_over_f32() {
        let m = MapDescriptor::<f32>::single(Stage::HorizontalSineShear { a: 0.25, k: 1 }).unwrap();
        let p = TorusPoint::new(0.0f32, 0.25).unwrap();
        assert!((m.forward(p).x1() - 0.25).abs() < 1e-6);
    }
}
