//! The mixing-up-to-scale-ε predicate and mixing-scale estimation.
//!
//! `Φ` mixes `A` up to scale `ε` when every ball `B_ε(x)` satisfies
//! `κ·Area(B) ≤ Area(B ∩ Φ(A)) ≤ (1−κ)·Area(B)`. Centers are sampled on a
//! lattice of pitch at most `ε/4`; since the fraction is Lipschitz in the
//! center with constant `2/(πε)`, the lattice test misses at most
//! `pitch·√2/(πε) ≈ 0.11` of slack between lattice points.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::{Ball, BallCount, BallCounter, IndicatorField, TorusPoint};
use crate::scalar::Scalar;

pub const DEFAULT_GRID_RES: usize = 1024;
pub const MIN_GRID_RES: usize = 64;
/// Tolerance on the predicate's inequalities, in units of `1/grid_res`.
pub const PREDICATE_TOL_CELLS: f64 = 10.0;
/// Default ratio between consecutive scales of the ε scan, `2^(-1/4)`.
pub const DEFAULT_EPS_RATIO: f64 = 0.840_896_415_253_714_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixingParams<T> {
    pub kappa: T,
    pub epsilon: T,
    /// Lattice pitch for ball centers; `ε/4` when `None`.
    pub center_spacing: Option<T>,
}

impl<T: Scalar> MixingParams<T> {
    pub fn new(kappa: T, epsilon: T) -> Result<Self> {
        let p = Self { kappa, epsilon, center_spacing: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        validate_kappa(self.kappa)?;
        if !(self.epsilon > T::zero() && self.epsilon <= T::lit(0.25)) {
            return Err(domain(format!("ε must lie in (0, 1/4], got {}", self.epsilon)));
        }
        let pitch = self.pitch();
        if !(pitch > T::zero() && pitch <= self.epsilon * T::half()) {
            return Err(domain(format!(
                "center spacing must lie in (0, ε/2], got {pitch} for ε = {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn pitch(&self) -> T {
        self.center_spacing.unwrap_or(self.epsilon / T::lit(4.0))
    }

    /// Centers per axis: the smallest lattice with pitch no larger than
    /// requested.
    pub fn centers_per_axis(&self) -> usize {
        (T::one() / self.pitch()).ceil().to_usize().unwrap_or(1).max(1)
    }
}

pub fn validate_kappa<T: Scalar>(kappa: T) -> Result<()> {
    if !(kappa > T::zero() && kappa < T::half()) {
        return Err(domain(format!("κ must lie in (0, 1/2), got {kappa}")));
    }
    Ok(())
}

/// Predicate tolerance `10/grid_res` for a field.
pub fn predicate_tolerance<T: Scalar>(field: &IndicatorField) -> T {
    T::lit(PREDICATE_TOL_CELLS) / T::from_count(field.n1().min(field.n2()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CenterFraction<T> {
    pub x1: T,
    pub x2: T,
    pub fraction: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixingVerdict<T> {
    pub passed: bool,
    pub kappa: T,
    pub epsilon: T,
    pub tolerance: T,
    pub worst_low: CenterFraction<T>,
    pub worst_high: CenterFraction<T>,
    pub centers_tested: usize,
}

impl<T: Scalar> MixingVerdict<T> {
    /// `worst_low − κ`; the lower inequality holds when `≥ −tolerance`.
    pub fn low_margin(&self) -> T {
        self.worst_low.fraction - self.kappa
    }

    /// `(1−κ) − worst_high`.
    pub fn high_margin(&self) -> T {
        T::one() - self.kappa - self.worst_high.fraction
    }
}

/// Samples a membership test `p ∈ Φ(A)` on a `grid_res²` grid.
pub fn build_image_indicator<T, F>(membership: F, grid_res: usize) -> Result<IndicatorField>
where
    T: Scalar,
    F: Fn(TorusPoint<T>) -> Result<bool> + Sync,
{
    if grid_res < MIN_GRID_RES {
        return Err(domain(format!(
            "image indicator needs grid_res >= {MIN_GRID_RES}, got {grid_res}"
        )));
    }
    IndicatorField::try_from_fn(grid_res, grid_res, membership)
}

/// Evaluates the mixing predicate on the full center lattice.
pub fn mixes_at_scale<T: Scalar>(
    field: &IndicatorField,
    params: &MixingParams<T>,
) -> Result<MixingVerdict<T>> {
    mixes_at_scale_with(&BallCounter::new(field), params)
}

/// As [`mixes_at_scale`], reusing the prefix sums of `counter`.
pub fn mixes_at_scale_with<T: Scalar>(
    counter: &BallCounter<'_>,
    params: &MixingParams<T>,
) -> Result<MixingVerdict<T>> {
    params.validate()?;
    let m = params.centers_per_axis();
    let mf = T::from_count(m);
    // lexicographic (x1, x2) order
    let center = |c: usize| -> TorusPoint<T> {
        TorusPoint::new(T::from_count(c / m) / mf, T::from_count(c % m) / mf)
            .expect("lattice point is finite")
    };
    let counts: Vec<BallCount> = (0..m * m)
        .into_par_iter()
        .map(|c| counter.checked_count(&Ball::new(center(c), params.epsilon)?))
        .collect::<Result<_>>()?;

    let mut low = (0usize, counts[0].fraction::<T>());
    let mut high = low;
    let mut worst_minority = T::infinity();
    for (c, count) in counts.iter().enumerate() {
        let f: T = count.fraction();
        if f < low.1 {
            low = (c, f);
        }
        if f > high.1 {
            high = (c, f);
        }
        let minority = T::from_count(count.minority()) / T::from_count(count.total);
        worst_minority = worst_minority.min(minority);
    }
    let tolerance = predicate_tolerance(counter.field());
    let as_center = |(c, fraction): (usize, T)| {
        let p = center(c);
        CenterFraction { x1: p.x1(), x2: p.x2(), fraction }
    };
    Ok(MixingVerdict {
        passed: worst_minority >= params.kappa - tolerance,
        kappa: params.kappa,
        epsilon: params.epsilon,
        tolerance,
        worst_low: as_center(low),
        worst_high: as_center(high),
        centers_tested: m * m,
    })
}

/// Geometric sequence `eps_max, eps_max·ratio, …` down to `eps_min`
/// (inclusive within rounding), descending.
pub fn geometric_eps_grid<T: Scalar>(eps_max: T, eps_min: T, ratio: T) -> Result<Vec<T>> {
    if !(eps_max > T::zero() && eps_max <= T::lit(0.25)) {
        return Err(domain(format!("eps_max must lie in (0, 1/4], got {eps_max}")));
    }
    if !(eps_min > T::zero() && eps_min <= eps_max) {
        return Err(domain(format!("eps_min must lie in (0, eps_max], got {eps_min}")));
    }
    if !(ratio > T::zero() && ratio < T::one()) {
        return Err(domain(format!("eps ratio must lie in (0, 1), got {ratio}")));
    }
    let mut grid = Vec::new();
    let mut k = 0i32;
    loop {
        let eps = eps_max * ratio.powi(k);
        if eps < eps_min * (T::one() - T::lit(1e-12)) {
            break;
        }
        grid.push(eps);
        k += 1;
    }
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult<T> {
    pub kappa: T,
    /// One verdict per tested ε, in the order given.
    pub rows: Vec<MixingVerdict<T>>,
    /// Smallest ε that passes with every larger tested ε also passing.
    pub certified_eps: Option<T>,
}

/// Runs the predicate at every ε independently; no monotonicity in ε is
/// assumed.
pub fn mixing_scale_scan<T: Scalar>(
    field: &IndicatorField,
    kappa: T,
    eps_grid: &[T],
    center_spacing_factor: Option<T>,
) -> Result<ScanResult<T>> {
    validate_kappa(kappa)?;
    if eps_grid.is_empty() {
        return Err(domain("ε grid is empty"));
    }
    let ascending = eps_grid.windows(2).all(|w| w[0] < w[1]);
    let descending = eps_grid.windows(2).all(|w| w[0] > w[1]);
    if !(ascending || descending) {
        return Err(domain("ε grid must be strictly sorted"));
    }
    let counter = BallCounter::new(field);
    let rows = eps_grid
        .iter()
        .map(|&epsilon| {
            let params = MixingParams {
                kappa,
                epsilon,
                center_spacing: center_spacing_factor.map(|f| f * epsilon),
            };
            mixes_at_scale_with(&counter, &params)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut by_eps: Vec<&MixingVerdict<T>> = rows.iter().collect();
    by_eps.sort_by(|a, b| b.epsilon.partial_cmp(&a.epsilon).expect("finite ε"));
    let certified_eps = by_eps
        .iter()
        .take_while(|v| v.passed)
        .last()
        .map(|v| v.epsilon);
    Ok(ScanResult { kappa, rows, certified_eps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cell_center, torus_dist};
    use crate::maps::{MapDescriptor, Stage};

    fn v10_field(n: usize) -> IndicatorField {
        let m = MapDescriptor::single(Stage::VerticalLinearShear { n: 10 }).unwrap();
        build_image_indicator(|p: TorusPoint<f64>| Ok(m.membership_in_image(p)), n).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(MixingParams::new(0.0, 0.1).is_err());
        assert!(MixingParams::new(0.5, 0.1).is_err());
        assert!(MixingParams::new(0.3, 0.3).is_err());
        let mut p = MixingParams::new(0.3, 0.1).unwrap();
        p.center_spacing = Some(0.06);
        assert!(p.validate().is_err());
        assert_eq!(MixingParams::new(0.3, 0.1).unwrap().centers_per_axis(), 40);
    }

    #[test]
    fn image_indicator_examples() {
        let id = MapDescriptor::<f64>::identity();
        let f = build_image_indicator(|p| Ok(id.membership_in_image(p)), 64).unwrap();
        assert_eq!(f, IndicatorField::half_torus(64).unwrap());
        let none = build_image_indicator(|_p: TorusPoint<f64>| Ok(false), 64).unwrap();
        assert_eq!(none.count_true(), 0);
        assert!(build_image_indicator(|_p: TorusPoint<f64>| Ok(false), 32).is_err());
        let v = v10_field(256);
        assert!((v.true_fraction::<f64>() - 0.5).abs() <= 2.0 / 256.0);
    }

    #[test]
    fn identity_fails_with_full_ball_at_quarter_height() {
        let f = IndicatorField::half_torus(1024).unwrap();
        let v = mixes_at_scale(&f, &MixingParams::new(0.3, 0.1).unwrap()).unwrap();
        assert!(!v.passed);
        assert_eq!(v.worst_high.fraction, 1.0);
        assert_eq!(v.worst_low.fraction, 0.0);
        // first maximiser in lexicographic order sits on the x1 = 0 column
        assert_eq!(v.worst_high.x1, 0.0);
    }

    #[test]
    fn v10_mixes_at_fifth_and_kappa_monotone() {
        let f = v10_field(1024);
        for kappa in [0.3, 0.2, 0.01] {
            let v = mixes_at_scale(&f, &MixingParams::new(kappa, 0.2).unwrap()).unwrap();
            assert!(v.passed, "κ = {kappa}");
            assert!(v.worst_low.fraction <= 0.5 && v.worst_high.fraction >= 0.5);
        }
    }

    #[test]
    fn lattice_verdict_matches_brute_force_oracle() {
        // independent oracle: direct enumeration of every cell for every center
        let n = 128;
        let f = v10_field(n);
        let (kappa, eps) = (0.3, 0.15);
        let params = MixingParams::new(kappa, eps).unwrap();
        let v = mixes_at_scale(&f, &params).unwrap();
        let m = params.centers_per_axis();
        let mut lo: f64 = 1.0;
        let mut hi: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                let c = TorusPoint::new(a as f64 / m as f64, b as f64 / m as f64).unwrap();
                let (mut inside, mut total) = (0usize, 0usize);
                for j in 0..n {
                    for i in 0..n {
                        if torus_dist(&cell_center::<f64>(i, j, n, n), &c) < eps {
                            total += 1;
                            inside += f.get(i, j) as usize;
                        }
                    }
                }
                let fr = inside as f64 / total as f64;
                lo = lo.min(fr);
                hi = hi.max(fr);
            }
        }
        assert_eq!(v.worst_low.fraction, lo);
        assert_eq!(v.worst_high.fraction, hi);
        let tol = 10.0 / n as f64;
        assert_eq!(v.passed, lo >= kappa - tol && hi <= 1.0 - kappa + tol);
    }

    #[test]
    fn complement_gives_identical_verdicts() {
        let f = v10_field(512);
        let g = f.complement();
        let grid = geometric_eps_grid(0.25, 0.02, DEFAULT_EPS_RATIO).unwrap();
        let a = mixing_scale_scan(&f, 0.3, &grid, None).unwrap();
        let b = mixing_scale_scan(&g, 0.3, &grid, None).unwrap();
        assert_eq!(a.certified_eps, b.certified_eps);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.passed, y.passed);
            assert!((x.worst_low.fraction - (1.0 - y.worst_high.fraction)).abs() < 1e-15);
            assert!((x.worst_high.fraction - (1.0 - y.worst_low.fraction)).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_never_certifies() {
        let f = IndicatorField::half_torus(1024).unwrap();
        let grid = geometric_eps_grid(0.25, 0.01, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!((grid[1] - 0.1767767).abs() < 1e-6);
        let scan = mixing_scale_scan(&f, 0.3, &grid, None).unwrap();
        assert_eq!(scan.certified_eps, None);
        assert!(scan.rows.iter().all(|r| !r.passed));
    }

    #[test]
    fn scan_certifies_top_run_only() {
        let f = v10_field(512);
        let grid = geometric_eps_grid(0.25, 0.02, DEFAULT_EPS_RATIO).unwrap();
        let scan = mixing_scale_scan(&f, 0.3, &grid, None).unwrap();
        let star = scan.certified_eps.unwrap();
        for r in &scan.rows {
            if r.epsilon >= star {
                assert!(r.passed);
            }
        }
        // ascending order gives the same answer
        let rev: Vec<f64> = grid.iter().rev().copied().collect();
        let scan_up = mixing_scale_scan(&f, 0.3, &rev, None).unwrap();
        assert_eq!(scan_up.certified_eps, Some(star));
        assert!(mixing_scale_scan(&f, 0.3, &[0.1, 0.2, 0.15], None).is_err());
    }

    #[test]
    fn refinement_changes_fractions_little() {
        let coarse = v10_field(256);
        let fine = v10_field(512);
        let p: MixingParams<f64> = MixingParams::new(0.3, 0.15).unwrap();
        let a = mixes_at_scale(&coarse, &p).unwrap();
        let b = mixes_at_scale(&fine, &p).unwrap();
        assert!((a.worst_low.fraction - b.worst_low.fraction).abs() < 5.0 / 256.0);
        assert!((a.worst_high.fraction - b.worst_high.fraction).abs() < 5.0 / 256.0);
    }

    #[test]
    fn geometric_grid_shape() {
        let g = geometric_eps_grid(0.25, 0.01, DEFAULT_EPS_RATIO).unwrap();
        assert_eq!(g[0], 0.25);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
        assert!(*g.last().unwrap() >= 0.01 * (1.0 - 1e-12));
        assert_eq!(g.len(), 19);
        assert!(geometric_eps_grid(0.3, 0.01, 0.5).is_err());
        assert!(geometric_eps_grid(0.25, 0.01, 1.0).is_err());
    }
}
