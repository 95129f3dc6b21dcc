use rayon::prelude::*;

use super::point::TorusPoint;
use crate::error::{domain, Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Center of cell `(i, j)` on an `n1 x n2` grid: `((i+1/2)/n1, (j+1/2)/n2)`.
#[inline]
pub fn cell_center<T: Scalar>(i: usize, j: usize, n1: usize, n2: usize) -> TorusPoint<T> {
    TorusPoint::wrapped(
        T::from_count(2 * i + 1) / T::from_count(2 * n1),
        T::from_count(2 * j + 1) / T::from_count(2 * n2),
    )
}

fn check_resolution(n1: usize, n2: usize) -> Result<()> {
    if n1 == 0 || n2 == 0 {
        return Err(domain(format!("grid resolution must be positive, got {n1}x{n2}")));
    }
    Ok(())
}

/// Boolean samples of a set at cell centers, stored row-major
/// (`index = j * n1 + i`, `i` along `x1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorField {
    n1: usize,
    n2: usize,
    samples: Vec<bool>,
}

impl IndicatorField {
    pub fn from_samples(n1: usize, n2: usize, samples: Vec<bool>) -> Result<Self> {
        check_resolution(n1, n2)?;
        if samples.len() != n1 * n2 {
            return Err(domain(format!(
                "expected {} samples for a {n1}x{n2} grid, got {}",
                n1 * n2,
                samples.len()
            )));
        }
        Ok(Self { n1, n2, samples })
    }

    /// Samples `membership` at every cell center, in parallel.
    pub fn try_from_fn<T, F>(n1: usize, n2: usize, membership: F) -> Result<Self>
    where
        T: Scalar,
        F: Fn(TorusPoint<T>) -> Result<bool> + Sync,
    {
        check_resolution(n1, n2)?;
        let samples = (0..n1 * n2)
            .into_par_iter()
            .map(|k| membership(cell_center(k % n1, k / n1, n1, n2)))
            .collect::<Result<Vec<bool>>>()?;
        Ok(Self { n1, n2, samples })
    }

    pub fn from_fn<T, F>(n1: usize, n2: usize, membership: F) -> Result<Self>
    where
        T: Scalar,
        F: Fn(TorusPoint<T>) -> bool + Sync,
    {
        Self::try_from_fn(n1, n2, |p: TorusPoint<T>| Ok(membership(p)))
    }

    /// Indicator of the half-torus `A = {0 <= x2 < 1/2}`.
    pub fn half_torus(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |p: TorusPoint<f64>| p.in_lower_half())
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.n1
    }

    #[inline]
    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.samples[j * self.n1 + i]
    }

    pub fn samples(&self) -> &[bool] {
        &self.samples
    }

    pub fn count_true(&self) -> usize {
        self.samples.iter().filter(|&&b| b).count()
    }

    /// Area of the sampled set: true cells times cell area.
    pub fn true_fraction<T: Scalar>(&self) -> T {
        T::from_count(self.count_true()) / T::from_count(self.samples.len())
    }

    pub fn complement(&self) -> Self {
        Self {
            n1: self.n1,
            n2: self.n2,
            samples: self.samples.iter().map(|b| !b).collect(),
        }
    }

    /// Flat CSV: `n1,n2` header, the two sizes, then one line of `0`/`1`
    /// values per grid row.
    pub fn to_csv(&self) -> String {
        let mut out = format!("n1,n2\n{},{}\n", self.n1, self.n2);
        for row in self.samples.chunks(self.n1) {
            let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (n1, n2, values) = parse_grid_csv(text)?;
        let samples = values
            .iter()
            .map(|v| match v.as_str() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(domain(format!("indicator value must be 0 or 1, got {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_samples(n1, n2, samples)
    }

    pub fn to_scalar<T: Scalar>(&self) -> ScalarField<T> {
        ScalarField {
            n1: self.n1,
            n2: self.n2,
            samples: self
                .samples
                .iter()
                .map(|&b| if b { T::one() } else { T::zero() })
                .collect(),
        }
    }
}

/// Real samples at cell centers, row-major like [`IndicatorField`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    n1: usize,
    n2: usize,
    samples: Vec<T>,
}

impl<T: Scalar> ScalarField<T> {
    pub fn from_samples(n1: usize, n2: usize, samples: Vec<T>) -> Result<Self> {
        check_resolution(n1, n2)?;
        if samples.len() != n1 * n2 {
            return Err(domain(format!(
                "expected {} samples for a {n1}x{n2} grid, got {}",
                n1 * n2,
                samples.len()
            )));
        }
        Ok(Self { n1, n2, samples })
    }

    pub fn try_from_fn<F>(n1: usize, n2: usize, f: F) -> Result<Self>
    where
        F: Fn(TorusPoint<T>) -> Result<T> + Sync,
    {
        check_resolution(n1, n2)?;
        let samples = (0..n1 * n2)
            .into_par_iter()
            .map(|k| f(cell_center(k % n1, k / n1, n1, n2)))
            .collect::<Result<Vec<T>>>()?;
        Ok(Self { n1, n2, samples })
    }

    pub fn from_fn<F>(n1: usize, n2: usize, f: F) -> Result<Self>
    where
        F: Fn(TorusPoint<T>) -> T + Sync,
    {
        Self::try_from_fn(n1, n2, |p| Ok(f(p)))
    }

    pub fn constant(n1: usize, n2: usize, value: T) -> Result<Self> {
        Self::from_samples(n1, n2, vec![value; n1 * n2])
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.n1
    }

    #[inline]
    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.samples[j * self.n1 + i]
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    /// Pointwise `a*self + b*other` on matching grids.
    pub fn affine_combination(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.n1 != other.n1 || self.n2 != other.n2 {
            return Err(domain("fields live on different grids"));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(Self { n1: self.n1, n2: self.n2, samples })
    }

    /// `(min, max)` over finite samples.
    pub fn range(&self) -> (T, T) {
        self.samples.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("n1,n2\n{},{}\n", self.n1, self.n2);
        for row in self.samples.chunks(self.n1) {
            let line: Vec<String> = row.iter().map(|v| format!("{}", v.as_f64())).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (n1, n2, values) = parse_grid_csv(text)?;
        let samples = values
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| domain(format!("not a number: {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_samples(n1, n2, samples)
    }
}

fn parse_grid_csv(text: &str) -> Result<(usize, usize, Vec<String>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| domain("empty field CSV"))?;
    if header.replace(' ', "") != "n1,n2" {
        return Err(domain(format!("field CSV header must be `n1,n2`, got {header:?}")));
    }
    let sizes = lines.next().ok_or_else(|| domain("field CSV missing sizes"))?;
    let dims: Vec<usize> = sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| domain(format!("bad field sizes {sizes:?}")))?;
    let [n1, n2] = dims[..] else {
        return Err(domain(format!("bad field sizes {sizes:?}")));
    };
    let values: Vec<String> = lines
        .flat_map(|l| l.split(',').map(|s| s.trim().to_owned()).collect::<Vec<_>>())
        .collect();
    Ok((n1, n2, values))
}

/// Midpoint rule over the torus: compensated row-major sum times cell area.
pub fn integrate<T: Scalar>(field: &ScalarField<T>) -> Result<T> {
    let mut acc = CompensatedSum::new();
    for (k, &v) in field.samples.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite sample {v} at cell ({}, {})",
                k % field.n1,
                k / field.n1
            )));
        }
        acc.add(v);
    }
    Ok(acc.total() / T::from_count(field.samples.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn integrate_examples() {
        let one = ScalarField::<f64>::constant(64, 64, 1.0).unwrap();
        assert_eq!(integrate(&one).unwrap(), 1.0);
        let zero = ScalarField::<f64>::constant(64, 64, 0.0).unwrap();
        assert_eq!(integrate(&zero).unwrap(), 0.0);
        let s = ScalarField::from_fn(512, 512, |p: TorusPoint<f64>| {
            (std::f64::consts::TAU * p.x2()).sin().powi(2)
        })
        .unwrap();
        assert!((integrate(&s).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn integrate_rejects_non_finite() {
        let mut v = vec![1.0; 16];
        v[5] = f64::NAN;
        let f = ScalarField::from_samples(4, 4, v).unwrap();
        assert!(matches!(integrate(&f), Err(Error::Domain(_))));
    }

    #[test]
    fn sample_count_and_cell_area() {
        let f = IndicatorField::half_torus(64).unwrap();
        assert_eq!(f.samples().len(), 64 * 64);
        assert_eq!(f.true_fraction::<f64>(), 0.5);
        assert!(IndicatorField::from_samples(2, 2, vec![true; 3]).is_err());
        assert!(IndicatorField::from_samples(0, 2, vec![]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let f = IndicatorField::half_torus(8).unwrap();
        assert_eq!(IndicatorField::from_csv(&f.to_csv()).unwrap(), f);
        let s = ScalarField::from_fn(5, 3, |p: TorusPoint<f64>| p.x1() * 3.0 + p.x2()).unwrap();
        assert_eq!(ScalarField::<f64>::from_csv(&s.to_csv()).unwrap(), s);
        assert!(IndicatorField::from_csv("a,b\n1,1\n1").is_err());
        assert!(IndicatorField::from_csv("n1,n2\n1,1\n2").is_err());
    }

    proptest! {
        #[test]
        fn integrate_is_linear(a in -10f64..10.0, b in -10f64..10.0, k in 1u32..5) {
            let f = ScalarField::from_fn(32, 32, |p: TorusPoint<f64>| (p.x1() * k as f64).sin()).unwrap();
            let g = ScalarField::from_fn(32, 32, |p: TorusPoint<f64>| p.x2() * p.x2() + 1.0).unwrap();
            let lhs = integrate(&f.affine_combination(a, &g, b).unwrap()).unwrap();
            let rhs = a * integrate(&f).unwrap() + b * integrate(&g).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
