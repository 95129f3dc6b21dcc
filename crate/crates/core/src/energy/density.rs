use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::{cell_center, integrate, ScalarField, TorusPoint};
use crate::maps::Rearrangement;
use crate::scalar::{compensated_mean, compensated_sum, Scalar};

pub const MIN_ENERGY_RES: usize = 64;
pub const MIN_QUAD_POINTS: usize = 128;

/// `e(Φ)(p) = ½ Σ (∂Φ^i/∂x_j)²`.
pub fn energy_density<T: Scalar, R: Rearrangement<T> + ?Sized>(map: &R, p: TorusPoint<T>) -> Result<T> {
    Ok(map.jacobian(p)?.energy_density())
}

/// Energy density and Jacobian determinant sampled on one grid.
#[derive(Clone, Debug)]
pub struct EnergyFields<T> {
    pub density: ScalarField<T>,
    pub det: ScalarField<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergySummary<T> {
    pub grid_res: usize,
    /// `E(Φ) = ∫ e(Φ) dσ`
    pub energy: T,
    /// `∫_A e(Φ) dσ` over the half-torus `A`.
    pub energy_on_a: T,
    /// `∫_{T²∖A} e(Φ) dσ`
    pub energy_off_a: T,
    pub det_min: T,
    pub det_max: T,
    pub abs_det_min: T,
    /// `min (e − |det|)`, non-negative by AM–GM.
    pub amgm_margin: T,
}

impl<T: Scalar> EnergyFields<T> {
    pub fn sample<R: Rearrangement<T> + ?Sized>(map: &R, grid_res: usize) -> Result<Self> {
        if grid_res < MIN_ENERGY_RES {
            return Err(domain(format!("energy grid must be >= {MIN_ENERGY_RES}, got {grid_res}")));
        }
        let n = grid_res;
        let pairs = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let j = map.jacobian(cell_center(k % n, k / n, n, n))?;
                Ok((j.energy_density(), j.det()))
            })
            .collect::<Result<Vec<(T, T)>>>()?;
        let (e, d): (Vec<T>, Vec<T>) = pairs.into_iter().unzip();
        Ok(Self {
            density: ScalarField::from_samples(n, n, e)?,
            det: ScalarField::from_samples(n, n, d)?,
        })
    }

    pub fn summary(&self) -> Result<EnergySummary<T>> {
        let n = self.density.n1();
        let energy = integrate(&self.density)?;
        // rows j < n/2 have centers with x2 < 1/2
        let half = n / 2;
        let split = half * n;
        let cells = T::from_count(n * n);
        let on_a = compensated_sum(&self.density.samples()[..split]) / cells;
        let off_a = compensated_sum(&self.density.samples()[split..]) / cells;
        let (det_min, det_max) = self.det.range();
        let abs_det_min = self
            .det
            .samples()
            .iter()
            .fold(T::infinity(), |m, d| m.min(d.abs()));
        let amgm_margin = self
            .density
            .samples()
            .iter()
            .zip(self.det.samples())
            .fold(T::infinity(), |m, (e, d)| m.min(*e - d.abs()));
        Ok(EnergySummary {
            grid_res: n,
            energy,
            energy_on_a: on_a,
            energy_off_a: off_a,
            det_min,
            det_max,
            abs_det_min,
            amgm_margin,
        })
    }
}

/// `E(Φ)` by midpoint quadrature on a `grid_res²` grid.
pub fn total_energy<T: Scalar, R: Rearrangement<T> + ?Sized>(map: &R, grid_res: usize) -> Result<T> {
    integrate(&EnergyFields::sample(map, grid_res)?.density)
}

/// Quadrature data for the image of the horizontal circle `x2 = s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceProfile<T> {
    pub s: T,
    /// `l(s) = ∫₀¹ |∂_{x1}Φ(x1, s)| dx1`
    pub length: T,
    /// `∫₀¹ |∂_{x1}Φ(x1, s)|² dx1`
    pub speed_sq_integral: T,
    /// `∫ |∂_{x1}Φ|² − l(s)²`, computed as `∫ (|∂_{x1}Φ| − l(s))²` so it is
    /// non-negative and vanishes exactly for constant speed.
    pub hoelder_residual: T,
}

pub fn slice_profile<T: Scalar, R: Rearrangement<T> + ?Sized>(
    map: &R,
    s: T,
    quad_points: usize,
) -> Result<SliceProfile<T>> {
    if !(s >= T::zero() && s < T::one()) {
        return Err(domain(format!("slice height must lie in [0, 1), got {s}")));
    }
    if quad_points < MIN_QUAD_POINTS {
        return Err(domain(format!(
            "slice quadrature needs >= {MIN_QUAD_POINTS} points, got {quad_points}"
        )));
    }
    let speeds = (0..quad_points)
        .into_par_iter()
        .map(|i| {
            let x1 = T::from_count(2 * i + 1) / T::from_count(2 * quad_points);
            let j = map.jacobian(TorusPoint::new(x1, s)?)?;
            Ok(j.d11.hypot(j.d21))
        })
        .collect::<Result<Vec<T>>>()?;
    let length = compensated_mean(&speeds);
    let sq: Vec<T> = speeds.iter().map(|v| *v * *v).collect();
    let dev: Vec<T> = speeds.iter().map(|v| (*v - length) * (*v - length)).collect();
    Ok(SliceProfile {
        s,
        length,
        speed_sq_integral: compensated_mean(&sq),
        hoelder_residual: compensated_mean(&dev),
    })
}

/// Length of the image curve `Φ(·, s)`.
pub fn slice_length<T: Scalar, R: Rearrangement<T> + ?Sized>(
    map: &R,
    s: T,
    quad_points: usize,
) -> Result<T> {
    slice_profile(map, s, quad_points).map(|p| p.length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::wrap;
    use crate::maps::{MapDescriptor, Stage};
    use std::f64::consts::PI;

    fn single(s: Stage<f64>) -> MapDescriptor<f64> {
        MapDescriptor::single(s).unwrap()
    }

    #[test]
    fn density_examples() {
        let p = wrap(0.37, 0.0).unwrap();
        assert_eq!(energy_density(&MapDescriptor::identity(), p).unwrap(), 1.0);
        assert_eq!(energy_density(&single(Stage::HorizontalLinearShear { n: 1 }), p).unwrap(), 1.5);
        let e = energy_density(&single(Stage::HorizontalSineShear { a: 0.25, k: 1 }), p).unwrap();
        assert!((e - (1.0 + 2.0 * PI * PI * 0.0625)).abs() < 1e-12);
    }

    #[test]
    fn total_energy_examples() {
        assert!((total_energy::<f64, _>(&MapDescriptor::identity(), 64).unwrap() - 1.0).abs() < 1e-12);
        let v10 = single(Stage::VerticalLinearShear { n: 10 });
        assert!((total_energy(&v10, 64).unwrap() - 51.0).abs() < 1e-12);
        let hs = single(Stage::HorizontalSineShear { a: 0.25, k: 1 });
        assert!((total_energy(&hs, 512).unwrap() - (1.0 + PI * PI / 16.0)).abs() < 1e-6);
        assert!(total_energy(&hs, 32).is_err());
    }

    #[test]
    fn summary_splits_energy_over_a() {
        let hs = single(Stage::VerticalSineShear { a: 0.2, k: 1 });
        let s = EnergyFields::sample(&hs, 128).unwrap().summary().unwrap();
        assert!((s.energy_on_a + s.energy_off_a - s.energy).abs() < 1e-12);
        assert!(s.amgm_margin >= 0.0);
        assert!((s.det_min - 1.0).abs() < 1e-12 && (s.det_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slice_examples() {
        let id = MapDescriptor::identity();
        assert_eq!(slice_length(&id, 0.3, 128).unwrap(), 1.0);
        let v5 = single(Stage::VerticalLinearShear { n: 5 });
        assert!((slice_length(&v5, 0.1, 256).unwrap() - 26f64.sqrt()).abs() < 1e-12);
        let h3 = single(Stage::HorizontalLinearShear { n: 3 });
        assert_eq!(slice_length(&h3, 0.7, 128).unwrap(), 1.0);
        assert!(slice_length(&id, 1.0, 128).is_err());
        assert!(slice_length(&id, 0.5, 64).is_err());
    }

    #[test]
    fn hoelder_residual_zero_for_constant_speed() {
        for m in [
            MapDescriptor::identity(),
            single(Stage::VerticalLinearShear { n: 10 }),
            single(Stage::HorizontalLinearShear { n: 2 }),
        ] {
            for s in [0.01, 0.13, 0.24] {
                assert_eq!(slice_profile(&m, s, 1024).unwrap().hoelder_residual, 0.0);
            }
        }
        let vs = single(Stage::VerticalSineShear { a: 0.3, k: 2 });
        let p = slice_profile(&vs, 0.2, 512).unwrap();
        assert!(p.hoelder_residual > 0.0);
        let direct = p.speed_sq_integral - p.length * p.length;
        assert!((direct - p.hoelder_residual).abs() < 1e-9 * p.speed_sq_integral);
    }
}
