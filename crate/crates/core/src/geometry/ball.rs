use super::field::{cell_center, IndicatorField};
use super::point::{torus_dist, TorusPoint};
use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Fewest grid cells a ball must contain before its area fraction is trusted.
pub const MIN_CELLS_PER_BALL: usize = 50;

/// Open ball `B_eps(center)` with `0 < eps <= 1/4`, so it embeds in a
/// fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball<T> {
    center: TorusPoint<T>,
    radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn new(center: TorusPoint<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero() && radius <= T::lit(0.25)) {
            return Err(domain(format!("ball radius must lie in (0, 1/4], got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> TorusPoint<T> {
        self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// Smallest square grid resolution giving [`MIN_CELLS_PER_BALL`] cells.
    pub fn required_resolution(&self) -> usize {
        let r = self.radius.as_f64();
        ((MIN_CELLS_PER_BALL as f64 / std::f64::consts::PI).sqrt() / r).ceil() as usize + 1
    }
}

/// Cell counts of one ball: cells whose center lies inside, and how many of
/// those are in the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BallCount {
    pub inside: usize,
    pub total: usize,
}

impl BallCount {
    pub fn fraction<T: Scalar>(&self) -> T {
        T::from_count(self.inside) / T::from_count(self.total)
    }

    /// `min(inside, total - inside)`; symmetric under complementing the set.
    pub fn minority(&self) -> usize {
        self.inside.min(self.total - self.inside)
    }
}

/// Row prefix sums of an indicator field for `O(rows)` ball counting.
///
/// Counts exactly the cells whose center satisfies `torus_dist < radius`,
/// the same set a brute-force scan would select.
#[derive(Clone, Debug)]
pub struct BallCounter<'a> {
    field: &'a IndicatorField,
    prefix: Vec<u32>,
}

impl<'a> BallCounter<'a> {
    pub fn new(field: &'a IndicatorField) -> Self {
        let n1 = field.n1();
        let mut prefix = Vec::with_capacity((n1 + 1) * field.n2());
        for row in field.samples().chunks(n1) {
            let mut acc = 0u32;
            prefix.push(0);
            for &b in row {
                acc += b as u32;
                prefix.push(acc);
            }
        }
        Self { field, prefix }
    }

    pub fn field(&self) -> &IndicatorField {
        self.field
    }

    #[inline]
    fn row_count(&self, j: usize, lo: usize, hi_excl: usize) -> usize {
        let base = j * (self.field.n1() + 1);
        (self.prefix[base + hi_excl] - self.prefix[base + lo]) as usize
    }

    /// True cells in columns `lo..=hi` of row `j`, where `lo`/`hi` are
    /// unwrapped column indices spanning at most one period.
    fn wrapped_row_count(&self, j: usize, lo: i64, hi: i64) -> usize {
        let n1 = self.field.n1() as i64;
        let a = lo.rem_euclid(n1) as usize;
        let len = (hi - lo + 1) as usize;
        let end = a + len;
        if end <= n1 as usize {
            self.row_count(j, a, end)
        } else {
            self.row_count(j, a, n1 as usize) + self.row_count(j, 0, end - n1 as usize)
        }
    }

    /// Visits the exact column span `[lo, hi]` (unwrapped) of each grid row
    /// meeting the ball; stops early when `visit` returns `false`.
    fn for_each_row<T: Scalar>(
        &self,
        center: &TorusPoint<T>,
        radius: T,
        mut visit: impl FnMut(usize, i64, i64) -> bool,
    ) {
        let (n1, n2) = (self.field.n1(), self.field.n2());
        let n1i = n1 as i64;
        let n2f = T::from_count(n2);
        let n1f = T::from_count(n1);
        let inside_ball = |i: i64, j: usize| {
            let c = cell_center::<T>(i.rem_euclid(n1i) as usize, j, n1, n2);
            torus_dist(&c, center) < radius
        };

        // rows whose centers may lie within `radius` of the center in x2
        let pad = T::lit(2.0) / n2f;
        let j_lo = ((center.x2() - radius - pad) * n2f - T::half()).floor().to_i64().unwrap_or(0);
        let j_hi = ((center.x2() + radius + pad) * n2f - T::half()).ceil().to_i64().unwrap_or(0);
        let span = (j_hi - j_lo + 1).min(n2 as i64);

        for jj in j_lo..j_lo + span {
            let j = jj.rem_euclid(n2 as i64) as usize;
            let y = cell_center::<T>(0, j, n1, n2).x2();
            let mut dy = (y - center.x2()).abs();
            dy = dy.min(T::one() - dy);
            if dy > radius {
                continue;
            }
            let w = (radius * radius - dy * dy).max(T::zero()).sqrt();
            let mut lo = ((center.x1() - w) * n1f - T::half()).ceil().to_i64().unwrap_or(0);
            let mut hi = ((center.x1() + w) * n1f - T::half()).floor().to_i64().unwrap_or(0);
            // snap the analytic span to the exact predicate
            while hi - lo + 1 < n1i && inside_ball(lo - 1, j) {
                lo -= 1;
            }
            while lo <= hi && !inside_ball(lo, j) {
                lo += 1;
            }
            while hi - lo + 1 < n1i && inside_ball(hi + 1, j) {
                hi += 1;
            }
            while hi >= lo && !inside_ball(hi, j) {
                hi -= 1;
            }
            if hi >= lo && !visit(j, lo, hi) {
                return;
            }
        }
    }

    /// Counts cells of the ball without the resolution check.
    pub fn count<T: Scalar>(&self, center: &TorusPoint<T>, radius: T) -> BallCount {
        let mut inside = 0;
        let mut total = 0;
        self.for_each_row(center, radius, |j, lo, hi| {
            total += (hi - lo + 1) as usize;
            inside += self.wrapped_row_count(j, lo, hi);
            true
        });
        BallCount { inside, total }
    }

    /// Whether any `true` cell lies in the ball; stops at the first one.
    pub fn any_inside<T: Scalar>(&self, center: &TorusPoint<T>, radius: T) -> bool {
        let mut found = false;
        self.for_each_row(center, radius, |j, lo, hi| {
            found = self.wrapped_row_count(j, lo, hi) > 0;
            !found
        });
        found
    }

    /// Counts with the [`MIN_CELLS_PER_BALL`] precision check.
    pub fn checked_count<T: Scalar>(&self, ball: &Ball<T>) -> Result<BallCount> {
        let count = self.count(&ball.center(), ball.radius());
        if count.total < MIN_CELLS_PER_BALL {
            return Err(Error::Precision {
                what: format!(
                    "ball of radius {} covers {} cells of a {}x{} grid (< {MIN_CELLS_PER_BALL})",
                    ball.radius(),
                    count.total,
                    self.field.n1(),
                    self.field.n2()
                ),
                required_resolution: ball.required_resolution(),
            });
        }
        Ok(count)
    }
}

/// `Area(B ∩ S) / Area(B)` by counting cell centers inside the ball.
pub fn ball_fraction<T: Scalar>(field: &IndicatorField, ball: &Ball<T>) -> Result<T> {
    BallCounter::new(field).checked_count(ball).map(|c| c.fraction())
}
