//! Time-dependent divergence-free vector fields on the torus, their flows,
//! and the variational equation `∂_t ∇Φ_t = ∇F(t, Φ_t) ∇Φ_t`.
//!
//! Every zoo field is piecewise steady in time. Each fixed RK4 step selects
//! the piece active at its midpoint, so switch times that fall on the step
//! grid are resolved exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{cell_center, TorusPoint};
use crate::jacobian::Jacobian2;
use crate::maps::Rearrangement;
use crate::scalar::{CompensatedSum, Scalar};

pub const DEFAULT_STEPS: usize = 200;
pub const MIN_STEPS: usize = 16;

/// Analytic vector fields `F(t, x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorField<T> {
    Zero,
    Constant { u: T, v: T },
    /// `F = (u·sin(2πk·x2), 0)`
    #[serde(rename = "shear-x")]
    SteadySineShearX { u: T, k: u32 },
    /// `F = (0, v·sin(2πk·x1))`
    #[serde(rename = "shear-y")]
    SteadySineShearY { v: T, k: u32 },
    /// x-shear on even half-periods, y-shear on odd ones, both with
    /// amplitude `u`.
    #[serde(rename = "alternating")]
    AlternatingSineShear { u: T, k: u32, period: T },
}

/// A time-independent piece of a zoo field, possibly negated for reverse
/// time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SteadyPiece<T> {
    Zero,
    Constant(T, T),
    ShearX(T, u32),
    ShearY(T, u32),
}

impl<T: Scalar> SteadyPiece<T> {
    fn wave(k: u32) -> T {
        T::two_pi() * T::from_u32(k).expect("frequency fits")
    }

    #[inline]
    pub fn velocity(&self, x1: T, x2: T) -> (T, T) {
        match *self {
            SteadyPiece::Zero => (T::zero(), T::zero()),
            SteadyPiece::Constant(u, v) => (u, v),
            SteadyPiece::ShearX(u, k) => (u * (Self::wave(k) * x2).sin(), T::zero()),
            SteadyPiece::ShearY(v, k) => (T::zero(), v * (Self::wave(k) * x1).sin()),
        }
    }

    /// `∇F` with entries `∂F^i/∂x_j`.
    #[inline]
    pub fn gradient(&self, x1: T, x2: T) -> Jacobian2<T> {
        let z = T::zero();
        match *self {
            SteadyPiece::Zero | SteadyPiece::Constant(..) => Jacobian2::zero(),
            SteadyPiece::ShearX(u, k) => {
                let w = Self::wave(k);
                Jacobian2::new(z, u * w * (w * x2).cos(), z, z)
            }
            SteadyPiece::ShearY(v, k) => {
                let w = Self::wave(k);
                Jacobian2::new(z, z, v * w * (w * x1).cos(), z)
            }
        }
    }

    fn negated(self) -> Self {
        match self {
            SteadyPiece::Zero => SteadyPiece::Zero,
            SteadyPiece::Constant(u, v) => SteadyPiece::Constant(-u, -v),
            SteadyPiece::ShearX(u, k) => SteadyPiece::ShearX(-u, k),
            SteadyPiece::ShearY(v, k) => SteadyPiece::ShearY(-v, k),
        }
    }
}

impl<T: Scalar> VectorField<T> {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: T| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("field parameter {name} must be finite, got {v}")))
            }
        };
        let freq = |k: u32| {
            if k == 0 {
                Err(domain("field frequency must be a positive integer"))
            } else {
                Ok(())
            }
        };
        match *self {
            VectorField::Zero => Ok(()),
            VectorField::Constant { u, v } => finite("u", u).and(finite("v", v)),
            VectorField::SteadySineShearX { u, k } => finite("u", u).and(freq(k)),
            VectorField::SteadySineShearY { v, k } => finite("v", v).and(freq(k)),
            VectorField::AlternatingSineShear { u, k, period } => {
                finite("u", u)?;
                freq(k)?;
                if !(period.is_finite() && period > T::zero()) {
                    return Err(domain(format!("alternating period must be positive, got {period}")));
                }
                Ok(())
            }
        }
    }

    /// Piece active at time `t`.
    pub fn piece_at(&self, t: T) -> SteadyPiece<T> {
        match *self {
            VectorField::Zero => SteadyPiece::Zero,
            VectorField::Constant { u, v } => SteadyPiece::Constant(u, v),
            VectorField::SteadySineShearX { u, k } => SteadyPiece::ShearX(u, k),
            VectorField::SteadySineShearY { v, k } => SteadyPiece::ShearY(v, k),
            VectorField::AlternatingSineShear { u, k, period } => {
                let half = period * T::half();
                let idx = (t / half).floor().to_i64().unwrap_or(0);
                if idx.rem_euclid(2) == 0 {
                    SteadyPiece::ShearX(u, k)
                } else {
                    SteadyPiece::ShearY(u, k)
                }
            }
        }
    }

    pub fn velocity(&self, t: T, p: &TorusPoint<T>) -> (T, T) {
        self.piece_at(t).velocity(p.x1(), p.x2())
    }

    pub fn gradient(&self, t: T, p: &TorusPoint<T>) -> Jacobian2<T> {
        self.piece_at(t).gradient(p.x1(), p.x2())
    }

    /// `|∇F|`, the Frobenius norm.
    pub fn gradient_norm(&self, t: T, p: &TorusPoint<T>) -> T {
        self.gradient(t, p).frobenius()
    }

    /// `∂x1 F¹ + ∂x2 F²`.
    pub fn divergence(&self, t: T, p: &TorusPoint<T>) -> T {
        let g = self.gradient(t, p);
        g.d11 + g.d22
    }
}

/// A vector field plus fixed-step integration control over `t ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec<T> {
    pub field: VectorField<T>,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

/// Direction of integration over `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    /// Integrates `-F(1 - t, x)`, i.e. runs the original flow backwards from
    /// `t = 1` to `t = 0`.
    Reverse,
}

/// State of the augmented system at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowState<T> {
    pub t: T,
    pub pos: TorusPoint<T>,
    /// `∇_x Φ_t`
    pub grad: Jacobian2<T>,
    pub det_j: T,
}

impl<T: Scalar> FlowState<T> {
    fn initial(x0: TorusPoint<T>) -> Self {
        Self {
            t: T::zero(),
            pos: x0,
            grad: Jacobian2::identity(),
            det_j: T::one(),
        }
    }

    pub fn energy_density(&self) -> T {
        self.grad.energy_density()
    }
}

/// One RK4 step as seen by an observer: the state at both ends and the
/// field piece that drove the step.
#[derive(Clone, Copy, Debug)]
pub struct StepRecord<T> {
    pub index: usize,
    pub h: T,
    pub start: FlowState<T>,
    pub end: FlowState<T>,
    pub piece: SteadyPiece<T>,
}

impl<T: Scalar> FlowSpec<T> {
    pub fn new(field: VectorField<T>, steps: usize) -> Result<Self> {
        let spec = Self { field, steps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        if self.steps < MIN_STEPS {
            return Err(domain(format!(
                "flow needs at least {MIN_STEPS} steps, got {}",
                self.steps
            )));
        }
        Ok(())
    }

    pub fn step_size(&self) -> T {
        T::one() / T::from_count(self.steps)
    }

    /// Time of step node `n`.
    pub fn node_time(&self, n: usize) -> T {
        T::from_count(n) / T::from_count(self.steps)
    }

    /// Piece driving step `n` in the given direction.
    pub fn step_piece(&self, n: usize, direction: Direction) -> SteadyPiece<T> {
        let mid = T::from_count(2 * n + 1) / T::from_count(2 * self.steps);
        match direction {
            Direction::Forward => self.field.piece_at(mid),
            Direction::Reverse => self.field.piece_at(T::one() - mid).negated(),
        }
    }

    /// Integrates from `x0`, reporting every step to `observer`. When
    /// `carry_grad` is false only the trajectory is advanced and `grad`
    /// stays the identity.
    pub fn integrate_observed<F>(
        &self,
        x0: TorusPoint<T>,
        direction: Direction,
        carry_grad: bool,
        mut observer: F,
    ) -> Result<FlowState<T>>
    where
        F: FnMut(&StepRecord<T>),
    {
        self.validate()?;
        let h = self.step_size();
        let half_h = h * T::half();
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        let mut state = FlowState::initial(x0);

        for n in 0..self.steps {
            let piece = self.step_piece(n, direction);
            let (x1, x2) = (state.pos.x1(), state.pos.x2());
            let g = state.grad;

            let (a1, a2) = piece.velocity(x1, x2);
            let (b1, b2) = piece.velocity(x1 + half_h * a1, x2 + half_h * a2);
            let (c1, c2) = piece.velocity(x1 + half_h * b1, x2 + half_h * b2);
            let (d1, d2) = piece.velocity(x1 + h * c1, x2 + h * c2);
            let y1 = x1 + sixth * (a1 + two * b1 + two * c1 + d1);
            let y2 = x2 + sixth * (a2 + two * b2 + two * c2 + d2);

            let grad = if carry_grad {
                let ka = piece.gradient(x1, x2) * g;
                let kb = piece.gradient(x1 + half_h * a1, x2 + half_h * a2) * g.add(&ka.scale(half_h));
                let kc = piece.gradient(x1 + half_h * b1, x2 + half_h * b2) * g.add(&kb.scale(half_h));
                let kd = piece.gradient(x1 + h * c1, x2 + h * c2) * g.add(&kc.scale(h));
                let incr = ka.add(&kb.scale(two)).add(&kc.scale(two)).add(&kd);
                g.add(&incr.scale(sixth))
            } else {
                g
            };

            if !y1.is_finite() || !y2.is_finite() || !grad.is_finite() {
                return Err(Error::Integration(format!(
                    "non-finite state at step {n} from ({}, {})",
                    x0.x1(),
                    x0.x2()
                )));
            }
            let next = FlowState {
                t: self.node_time(n + 1),
                pos: TorusPoint::wrapped(y1, y2),
                grad,
                det_j: grad.det(),
            };
            observer(&StepRecord {
                index: n,
                h,
                start: state,
                end: next,
                piece,
            });
            state = next;
        }
        Ok(state)
    }

    /// Final state at `t = 1` of the augmented (position + gradient) system.
    pub fn integrate_flow(&self, x0: TorusPoint<T>) -> Result<FlowState<T>> {
        self.integrate_observed(x0, Direction::Forward, true, |_| {})
    }

    pub fn time1_map(&self) -> Result<Time1Map<T>> {
        self.validate()?;
        Ok(Time1Map { spec: self.clone() })
    }

    /// `p ∈ Φ₁(A)`: reverse-integrate `p` to `t = 0` and test `x2 < 1/2`.
    pub fn flow_membership_in_image(&self, p: TorusPoint<T>) -> Result<bool> {
        let back = self.integrate_observed(p, Direction::Reverse, false, |_| {})?;
        Ok(back.pos.in_lower_half())
    }

    /// Samples `|det ∇Φ_t|` from every cell center of a `grid_res²` grid at
    /// `t_samples` uniform times in `(0, 1]`.
    pub fn check_near_incompressible(
        &self,
        grid_res: usize,
        t_samples: usize,
    ) -> Result<NearIncompressibility<T>> {
        if grid_res < 16 {
            return Err(domain(format!("incompressibility grid must be >= 16, got {grid_res}")));
        }
        if t_samples == 0 || t_samples > self.steps {
            return Err(domain(format!(
                "t_samples must lie in 1..={}, got {t_samples}",
                self.steps
            )));
        }
        let sample_nodes: Vec<usize> = (1..=t_samples)
            .map(|k| ((k * self.steps) as f64 / t_samples as f64).round() as usize)
            .collect();
        let extrema = (0..grid_res * grid_res)
            .into_par_iter()
            .map(|c| {
                let x0 = cell_center(c % grid_res, c / grid_res, grid_res, grid_res);
                let mut lo = T::infinity();
                let mut hi = T::zero();
                self.integrate_observed(x0, Direction::Forward, true, |rec| {
                    if sample_nodes.contains(&(rec.index + 1)) {
                        let d = rec.end.det_j.abs();
                        lo = lo.min(d);
                        hi = hi.max(d);
                    }
                })?;
                Ok((lo, hi))
            })
            .collect::<Result<Vec<(T, T)>>>()?;
        let (min_abs_det, max_abs_det) = extrema
            .iter()
            .fold((T::infinity(), T::zero()), |(lo, hi), &(a, b)| (lo.min(a), hi.max(b)));
        Ok(NearIncompressibility {
            min_abs_det,
            max_abs_det,
            grid_res,
            t_samples,
        })
    }

    /// Pointwise Grönwall residual along the trajectory of `x0`, plus the
    /// integrated bound `e(Φ₁) ≤ exp(√6 ∫|∇F(t, Φ_t)| dt)`.
    pub fn gronwall_check(&self, x0: TorusPoint<T>) -> Result<GronwallReport<T>> {
        let sqrt6 = T::lit(6.0).sqrt();
        let mut worst = T::neg_infinity();
        let mut norm_integral = CompensatedSum::new();
        let mut failure = None;
        let residual_at = |state: &FlowState<T>, piece: &SteadyPiece<T>| -> T {
            let (x1, x2) = (state.pos.x1(), state.pos.x2());
            let df = piece.gradient(x1, x2);
            let e = state.grad.energy_density();
            // ∂_t e = Σ (∂Φ^j/∂x_i)(∂_t ∂Φ^j/∂x_i) with ∂_t ∇Φ = ∇F ∇Φ
            let de_dt = state.grad.dot(&(df * state.grad));
            de_dt / e - sqrt6 * df.frobenius()
        };
        let end = self.integrate_observed(x0, Direction::Forward, true, |rec| {
            let r = residual_at(&rec.start, &rec.piece);
            if !r.is_finite() && failure.is_none() {
                failure = Some(rec.index);
            }
            worst = worst.max(r);
            if rec.index + 1 == self.steps {
                worst = worst.max(residual_at(&rec.end, &rec.piece));
            }
            let n0 = rec.piece.gradient(rec.start.pos.x1(), rec.start.pos.x2()).frobenius();
            let n1 = rec.piece.gradient(rec.end.pos.x1(), rec.end.pos.x2()).frobenius();
            norm_integral.add(rec.h * T::half() * (n0 + n1));
        })?;
        if let Some(n) = failure {
            return Err(Error::Integration(format!("non-finite Grönwall residual at step {n}")));
        }
        let integral = norm_integral.total();
        let final_energy = end.energy_density();
        let bound = (sqrt6 * integral).exp();
        Ok(GronwallReport {
            max_residual: worst,
            final_energy_density: final_energy,
            grad_norm_integral: integral,
            integrated_bound: bound,
            integrated_margin: bound - final_energy,
        })
    }

    /// Per-node trace: `t, x1, x2, d11..d22, detJ, e, |∇F|`.
    pub fn trace(&self, x0: TorusPoint<T>) -> Result<Vec<TraceRow<T>>> {
        let mut rows = Vec::with_capacity(self.steps + 1);
        let row = |s: &FlowState<T>, piece: &SteadyPiece<T>| TraceRow {
            t: s.t,
            x1: s.pos.x1(),
            x2: s.pos.x2(),
            grad: s.grad,
            det_j: s.det_j,
            energy_density: s.energy_density(),
            grad_norm: piece.gradient(s.pos.x1(), s.pos.x2()).frobenius(),
        };
        self.integrate_observed(x0, Direction::Forward, true, |rec| {
            rows.push(row(&rec.start, &rec.piece));
            if rec.index + 1 == self.steps {
                rows.push(row(&rec.end, &rec.piece));
            }
        })?;
        Ok(rows)
    }
}

/// Extremes of `|det ∇Φ_t|` over the sampled grid and times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NearIncompressibility<T> {
    pub min_abs_det: T,
    pub max_abs_det: T,
    pub grid_res: usize,
    pub t_samples: usize,
}

impl<T: Scalar> NearIncompressibility<T> {
    /// `min |det| ≥ κ′` up to `tol` (the integrator's determinant drift).
    pub fn passes(&self, kappa_prime: T, tol: T) -> bool {
        self.min_abs_det >= kappa_prime - tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GronwallReport<T> {
    /// `max_t [∂_t e / e − √6 |∇F|]`; the differential inequality holds iff
    /// this is `≤` the tolerance.
    pub max_residual: T,
    pub final_energy_density: T,
    /// Trapezoid rule for `∫₀¹ |∇F(t, Φ_t)| dt`.
    pub grad_norm_integral: T,
    pub integrated_bound: T,
    pub integrated_margin: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow<T> {
    pub t: T,
    pub x1: T,
    pub x2: T,
    pub grad: Jacobian2<T>,
    pub det_j: T,
    pub energy_density: T,
    pub grad_norm: T,
}

/// The time-1 map `Φ = Φ₁` of a flow, usable wherever a closed-form map is.
#[derive(Clone, Debug, PartialEq)]
pub struct Time1Map<T> {
    spec: FlowSpec<T>,
}

impl<T: Scalar> Time1Map<T> {
    pub fn spec(&self) -> &FlowSpec<T> {
        &self.spec
    }

    /// Largest `torus_dist(Φ⁻¹(Φ(p)), p)` over the given points.
    pub fn round_trip_error(&self, points: &[TorusPoint<T>]) -> Result<T> {
        points.iter().try_fold(T::zero(), |worst, &p| {
            let back = self.inverse(self.apply(p)?)?;
            Ok(worst.max(crate::geometry::torus_dist(&back, &p)))
        })
    }
}

impl<T: Scalar> Rearrangement<T> for Time1Map<T> {
    fn apply(&self, p: TorusPoint<T>) -> Result<TorusPoint<T>> {
        Ok(self.spec.integrate_observed(p, Direction::Forward, false, |_| {})?.pos)
    }

    fn inverse(&self, p: TorusPoint<T>) -> Result<TorusPoint<T>> {
        Ok(self.spec.integrate_observed(p, Direction::Reverse, false, |_| {})?.pos)
    }

    fn jacobian(&self, p: TorusPoint<T>) -> Result<Jacobian2<T>> {
        Ok(self.spec.integrate_flow(p)?.grad)
    }

    fn apply_with_jacobian(&self, p: TorusPoint<T>) -> Result<(TorusPoint<T>, Jacobian2<T>)> {
        let s = self.spec.integrate_flow(p)?;
        Ok((s.pos, s.grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{torus_dist, wrap};
    use crate::maps::{MapDescriptor, Stage};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn pt(a: f64, b: f64) -> TorusPoint<f64> {
        wrap(a, b).unwrap()
    }

    fn spec(field: VectorField<f64>) -> FlowSpec<f64> {
        FlowSpec::new(field, DEFAULT_STEPS).unwrap()
    }

    fn random_points(n: usize, seed: u64) -> Vec<TorusPoint<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| pt(rng.gen(), rng.gen())).collect()
    }

    #[test]
    fn integrate_examples() {
        let s = spec(VectorField::Zero).integrate_flow(pt(0.3, 0.3)).unwrap();
        assert_eq!(s.pos, pt(0.3, 0.3));
        assert_eq!(s.grad, Jacobian2::identity());
        assert_eq!(s.det_j, 1.0);

        let s = spec(VectorField::Constant { u: 0.0, v: 0.3 }).integrate_flow(pt(0.1, 0.5)).unwrap();
        assert!(torus_dist(&s.pos, &pt(0.1, 0.8)) < 1e-13);
        assert_eq!(s.grad, Jacobian2::identity());

        let s = spec(VectorField::SteadySineShearX { u: 1.0, k: 1 })
            .integrate_flow(pt(0.0, 0.25))
            .unwrap();
        assert!(torus_dist(&s.pos, &pt(0.0, 0.25)) < 1e-13);
        assert!(s.grad.max_abs_diff(&Jacobian2::identity()) < 1e-13);
    }

    #[test]
    fn steps_and_parameters_validated() {
        assert!(FlowSpec::new(VectorField::<f64>::Zero, 8).is_err());
        assert!(FlowSpec::new(VectorField::SteadySineShearX { u: 1.0, k: 0 }, 200).is_err());
        assert!(FlowSpec::new(
            VectorField::AlternatingSineShear { u: 1.0, k: 1, period: 0.0 },
            200
        )
        .is_err());
        assert!(FlowSpec::new(VectorField::Constant { u: f64::NAN, v: 0.0 }, 200).is_err());
    }

    #[test]
    fn overflow_is_an_integration_error() {
        let s = FlowSpec::new(VectorField::Constant { u: f64::MAX, v: 0.0 }, 16).unwrap();
        assert!(matches!(s.integrate_flow(pt(0.5, 0.5)), Err(Error::Integration(_))));
    }

    #[test]
    fn zoo_fields_are_divergence_free() {
        let fields = [
            VectorField::Constant { u: 0.3, v: -0.2 },
            VectorField::SteadySineShearX { u: 1.0, k: 2 },
            VectorField::SteadySineShearY { v: 0.7, k: 3 },
            VectorField::AlternatingSineShear { u: 0.4, k: 1, period: 0.25 },
        ];
        for f in &fields {
            for (i, p) in random_points(50, 3).iter().enumerate() {
                assert_eq!(f.divergence(i as f64 / 50.0, p), 0.0);
            }
        }
    }

    #[test]
    fn alternating_pieces() {
        let f = VectorField::AlternatingSineShear { u: 0.4, k: 1, period: 0.25 };
        assert_eq!(f.piece_at(0.01), SteadyPiece::ShearX(0.4, 1));
        assert_eq!(f.piece_at(0.13), SteadyPiece::ShearY(0.4, 1));
        assert_eq!(f.piece_at(0.26), SteadyPiece::ShearX(0.4, 1));
        let s = spec(f);
        assert_eq!(s.step_piece(0, Direction::Reverse), SteadyPiece::ShearY(-0.4, 1));
        assert_eq!(s.step_piece(24, Direction::Forward), SteadyPiece::ShearX(0.4, 1));
        assert_eq!(s.step_piece(25, Direction::Forward), SteadyPiece::ShearY(0.4, 1));
    }

    #[test]
    fn time1_map_of_zero_field_is_identity() {
        let m = spec(VectorField::Zero).time1_map().unwrap();
        for p in random_points(100, 1) {
            assert!(torus_dist(&m.apply(p).unwrap(), &p) < 1e-12);
            assert!(torus_dist(&m.inverse(p).unwrap(), &p) < 1e-12);
        }
    }

    #[test]
    fn steady_shear_time1_map_matches_closed_form() {
        for (u, k) in [(1.0, 1), (0.37, 2)] {
            let m = spec(VectorField::SteadySineShearX { u, k }).time1_map().unwrap();
            let exact = MapDescriptor::single(Stage::HorizontalSineShear { a: u, k }).unwrap();
            for p in random_points(100, 2) {
                let err = torus_dist(&m.apply(p).unwrap(), &exact.forward(p));
                assert!(err < 1e-10, "error {err}");
                let j = m.jacobian(p).unwrap();
                assert!(j.max_abs_diff(&exact.analytic_jacobian(p)) < 1e-10);
            }
        }
    }

    #[test]
    fn alternating_round_trip() {
        let m = spec(VectorField::AlternatingSineShear { u: 0.4, k: 1, period: 0.25 })
            .time1_map()
            .unwrap();
        assert!(m.round_trip_error(&random_points(100, 4)).unwrap() < 1e-8);
    }

    #[test]
    fn near_incompressibility_examples() {
        let z = spec(VectorField::Zero).check_near_incompressible(16, 4).unwrap();
        assert_eq!((z.min_abs_det, z.max_abs_det), (1.0, 1.0));
        let c = spec(VectorField::Constant { u: 0.2, v: 0.1 }).check_near_incompressible(16, 4).unwrap();
        assert_eq!((c.min_abs_det, c.max_abs_det), (1.0, 1.0));
        let a = spec(VectorField::AlternatingSineShear { u: 0.4, k: 1, period: 0.25 })
            .check_near_incompressible(16, 10)
            .unwrap();
        assert!((a.min_abs_det - 1.0).abs() < 1e-6 && (a.max_abs_det - 1.0).abs() < 1e-6);
        assert!(a.passes(1.0, 1e-6));
        assert!(!a.passes(1.5, 1e-6));
        assert!(spec(VectorField::Zero).check_near_incompressible(8, 4).is_err());
    }

    #[test]
    fn gronwall_examples() {
        let z = spec(VectorField::Zero).gronwall_check(pt(0.2, 0.3)).unwrap();
        assert_eq!(z.max_residual, 0.0);
        let c = spec(VectorField::Constant { u: 0.3, v: 0.4 }).gronwall_check(pt(0.2, 0.3)).unwrap();
        assert_eq!(c.max_residual, 0.0);
        assert_eq!(c.grad_norm_integral, 0.0);
        let s = spec(VectorField::SteadySineShearX { u: 1.0, k: 1 }).gronwall_check(pt(0.1, 0.1)).unwrap();
        assert!(s.max_residual <= 1e-6);
        assert!(s.integrated_margin >= -1e-6);
    }

    #[test]
    fn gronwall_closed_form_along_steady_shear() {
        // x2 is constant, so ∇Φ_t = [[1, t·c], [0, 1]] with c = 2πu·cos(2πx2):
        // e = 1 + t²c²/2, ∂_t e = t c², |∇F| = |c|.
        let (u, x2) = (1.0, 0.1);
        let c: f64 = TAU * u * (TAU * x2).cos();
        let exact_worst = (0..=200)
            .map(|n| {
                let t = n as f64 / 200.0;
                t * c * c / (1.0 + 0.5 * t * t * c * c) - 6f64.sqrt() * c.abs()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let r = spec(VectorField::SteadySineShearX { u, k: 1 }).gronwall_check(pt(0.1, x2)).unwrap();
        assert!((r.max_residual - exact_worst).abs() < 1e-9);
        assert!((r.final_energy_density - (1.0 + 0.5 * c * c)).abs() < 1e-12);
        assert!((r.grad_norm_integral - c.abs()).abs() < 1e-12);
    }

    #[test]
    fn membership_examples() {
        let z = spec(VectorField::Zero);
        assert!(!z.flow_membership_in_image(pt(0.2, 0.6)).unwrap());
        assert!(z.flow_membership_in_image(pt(0.2, 0.2)).unwrap());

        let (u, k) = (0.8, 1);
        let flow = spec(VectorField::SteadySineShearX { u, k });
        let exact = MapDescriptor::single(Stage::HorizontalSineShear { a: u, k }).unwrap();
        let mut disagreements = 0;
        for p in random_points(1000, 5) {
            let near_edge = p.x2() < 1e-6 || (p.x2() - 0.5).abs() < 1e-6 || p.x2() > 1.0 - 1e-6;
            if !near_edge && flow.flow_membership_in_image(p).unwrap() != exact.membership_in_image(p) {
                disagreements += 1;
            }
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn trace_has_one_row_per_node() {
        let rows = spec(VectorField::SteadySineShearX { u: 1.0, k: 1 }).trace(pt(0.1, 0.1)).unwrap();
        assert_eq!(rows.len(), DEFAULT_STEPS + 1);
        assert_eq!(rows[0].t, 0.0);
        assert_eq!(rows[DEFAULT_STEPS].t, 1.0);
        for r in &rows {
            assert!(r.energy_density >= r.det_j.abs());
        }
    }
}
