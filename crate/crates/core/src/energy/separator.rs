//! Shortest curve cutting a fixed area fraction from the unit disk.
//!
//! The minimiser is a circular arc meeting the boundary circle at right
//! angles. For an arc of radius `r` centered at distance `d = √(1+r²)`,
//! with `α = arctan r` and `β = arctan(1/r)`, the cut-off lens has area
//! `(α − sinα·cosα) + r²(β − sinβ·cosβ)` and the arc has length `2βr`.
//! Orthogonality gives `α + β = π/2` and `r = cot β`, so the solver
//! bisects on `β ∈ [0, π/2]`; `β = 0` is the diameter.

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Absolute tolerance on the lens area when solving for the arc.
pub const AREA_TOLERANCE: f64 = 1e-10;

/// `(2x − sin 2x)/2 = x − sin x·cos x`, with a series near zero.
fn segment_term<T: Scalar>(x: T) -> T {
    let y = x + x;
    if y < T::lit(1e-3) {
        let y3 = y * y * y;
        (y3 / T::lit(6.0) - y3 * y * y / T::lit(120.0)) * T::half()
    } else {
        (y - y.sin()) * T::half()
    }
}

/// Lens area cut from the unit disk by the orthogonal arc of radius `r`.
pub fn lens_area<T: Scalar>(r: T) -> T {
    let alpha = r.atan2(T::one());
    let beta = T::one().atan2(r);
    segment_term(alpha) + r * r * segment_term(beta)
}

/// Length of the orthogonal arc of radius `r` inside the unit disk.
pub fn arc_length<T: Scalar>(r: T) -> T {
    T::lit(2.0) * T::one().atan2(r) * r
}

/// Lens area as a function of the arc's half-angle `β` (`r = cot β`).
fn lens_area_by_angle<T: Scalar>(beta: T) -> T {
    let alpha = T::FRAC_PI_2() - beta;
    if beta <= T::zero() {
        return T::FRAC_PI_2();
    }
    let cot = beta.cos() / beta.sin();
    segment_term(alpha) + cot * cot * segment_term(beta)
}

fn arc_length_by_angle<T: Scalar>(beta: T) -> T {
    if beta <= T::zero() {
        return T::lit(2.0);
    }
    T::lit(2.0) * beta * beta.cos() / beta.sin()
}

/// Orthogonal arc solving `lens_area = κπ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparatorArc<T> {
    /// Arc radius; infinite for the diameter (`κ = 1/2`).
    pub radius: T,
    pub half_angle: T,
    pub length: T,
    pub area: T,
}

pub fn solve_separator_arc<T: Scalar>(kappa: T) -> Result<SeparatorArc<T>> {
    if !(kappa > T::zero() && kappa <= T::half()) {
        return Err(domain(format!("separator κ must lie in (0, 1/2], got {kappa}")));
    }
    let target = kappa * T::PI();
    let tol = T::lit(AREA_TOLERANCE);
    // area decreases from π/2 at β = 0 to 0 at β = π/2
    let (mut lo, mut hi) = (T::zero(), T::FRAC_PI_2());
    let mut beta = lo;
    if (lens_area_by_angle(lo) - target).abs() > tol {
        for _ in 0..200 {
            beta = (lo + hi) * T::half();
            let a = lens_area_by_angle(beta);
            if (a - target).abs() <= tol || hi - lo <= T::epsilon() {
                break;
            }
            if a > target {
                lo = beta;
            } else {
                hi = beta;
            }
        }
    }
    let radius = if beta > T::zero() {
        beta.cos() / beta.sin()
    } else {
        T::infinity()
    };
    Ok(SeparatorArc {
        radius,
        half_angle: beta,
        length: arc_length_by_angle(beta),
        area: lens_area_by_angle(beta),
    })
}

/// `m′_κ`: length per unit radius of the shortest curve splitting a disk
/// into area fractions `κ` and `1 − κ`.
pub fn min_separator_length<T: Scalar>(kappa: T) -> Result<T> {
    solve_separator_arc(kappa).map(|arc| arc.length)
}
