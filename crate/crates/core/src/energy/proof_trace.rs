use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{bound_constant, BoundConstants};
use super::density::{slice_profile, EnergyFields, EnergySummary};
use crate::error::{domain, Result};
use crate::geometry::{cell_center, torus_delta, BallCounter, IndicatorField, TorusPoint};
use crate::maps::Rearrangement;
use crate::mixing::{mixes_at_scale_with, MixingParams, MixingVerdict};
use crate::scalar::Scalar;
use crate::tolerances::{
    AREA_TOL_PER_LENGTH, DET_HYPOTHESIS_TOL, FINAL_TOL_CELLS, HOELDER_REL_TOL, LENGTH_TOL_CELLS,
    PACKING_AREA_RES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMode {
    /// Hypotheses certified at ε: every step is checked.
    Conditional,
    /// Hypotheses not certified: only the Hölder, area and packing steps,
    /// which hold for any map, are gated.
    Unconditional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofTraceParams<T> {
    pub kappa: T,
    pub kappa_prime: T,
    pub eps: T,
    pub s_samples: usize,
    /// Resolution of the preimage grid, the strip indicators and the slice
    /// quadrature.
    pub grid_res: usize,
    /// Resolution of the energy quadrature for `∫_A e`.
    pub energy_res: usize,
}

/// Maximal `2ε`-separated subset of a point cloud, built farthest-first.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyPacking<T> {
    pub centers: Vec<TorusPoint<T>>,
    /// Smallest pairwise distance between centers.
    pub min_separation: Option<T>,
    /// Largest distance from a point of the cloud to its nearest center.
    pub covering_radius: T,
}

fn dist_sq<T: Scalar>(a: &TorusPoint<T>, b: &TorusPoint<T>) -> T {
    let (d1, d2) = torus_delta(a, b);
    d1 * d1 + d2 * d2
}

/// Farthest-first traversal seeded at `points[0]`: repeatedly adds the point
/// farthest from the current centers until none is farther than `2ε`. The
/// result is `2ε`-separated and covers the cloud at radius `2ε`.
pub fn greedy_packing<T: Scalar>(points: &[TorusPoint<T>], eps: T) -> GreedyPacking<T> {
    let Some(first) = points.first() else {
        return GreedyPacking { centers: vec![], min_separation: None, covering_radius: T::zero() };
    };
    let limit = (T::lit(2.0) * eps).powi(2);
    let mut centers = vec![*first];
    let mut nearest: Vec<T> = points.par_iter().map(|p| dist_sq(p, first)).collect();
    let mut min_sep_sq: Option<T> = None;
    loop {
        let (idx, far) = nearest
            .par_iter()
            .enumerate()
            .map(|(i, d)| (i, *d))
            .reduce(
                || (usize::MAX, -T::one()),
                |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
            );
        if far <= limit {
            return GreedyPacking {
                centers,
                min_separation: min_sep_sq.map(|d| d.sqrt()),
                covering_radius: far.max(T::zero()).sqrt(),
            };
        }
        let c = points[idx];
        let sep = centers.iter().map(|q| dist_sq(q, &c)).fold(T::infinity(), T::min);
        min_sep_sq = Some(min_sep_sq.map_or(sep, |m| m.min(sep)));
        centers.push(c);
        nearest.par_iter_mut().zip(points.par_iter()).for_each(|(d, p)| {
            *d = d.min(dist_sq(p, &c));
        });
    }
}

/// Tolerances applied to the per-slice margins, echoed into the trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceTolerances<T> {
    pub hoelder_rel: T,
    pub area_per_length: T,
    pub length_cells: T,
    pub final_cells: T,
    pub det_hypothesis: T,
    pub packing_area_res: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceRecord<T> {
    pub s: T,
    pub l_s: T,
    pub l_half_minus_s: T,
    /// Smaller of the two Hölder residuals `∫|∂₁Φ|² − l²`.
    pub hoelder_residual: T,
    /// `Area(Φ(A_s))`
    pub image_area: T,
    pub n_pack: usize,
    /// Smallest center separation minus `2ε`; must be positive.
    pub packing_margin: Option<T>,
    /// `Area(N_ε(Φ(A_s))) − n·πε²`
    pub packing_area_margin: T,
    /// `4πε²·n − Area(Φ(A_s))`
    pub covering_margin: T,
    /// `Area(Φ(A_s)) − κ′(1/2 − 2s)`
    pub area_margin: T,
    /// `l(s) + l(1/2 − s) − m_κ·n·ε`, conditional only.
    pub length_margin: Option<T>,
    /// `l(s) + l(1/2 − s) − κ′m_κ/(4πε)·(1/2 − 2s)`, conditional only.
    pub pair_bound_margin: Option<T>,
    pub ok: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FinalRecord<T> {
    pub energy_on_a: T,
    pub half_bound: T,
    /// `∫_A e − (1/48)(κ′m_κ/(8πε))²`
    pub margin: T,
    /// `∫_A e − (1/4)∫₀^{1/4}(l(s) + l(1/2 − s))² ds` by midpoint over the
    /// sampled slices; reported, not gated.
    pub slice_chain_margin: T,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofTrace<T> {
    pub mode: TraceMode,
    pub eps: T,
    pub grid_res: usize,
    pub constants: BoundConstants<T>,
    pub energy: EnergySummary<T>,
    pub mixing: MixingVerdict<T>,
    pub tolerances: TraceTolerances<T>,
    pub slices: Vec<SliceRecord<T>>,
    /// Present in conditional mode only.
    pub r#final: Option<FinalRecord<T>>,
    pub all_ok: bool,
}

fn preimage_heights<T, R>(map: &R, n: usize) -> Result<Vec<T>>
where
    T: Scalar,
    R: Rearrangement<T> + ?Sized,
{
    (0..n * n)
        .into_par_iter()
        .map(|k| map.inverse(cell_center(k % n, k / n, n, n)).map(|q| q.x2()))
        .collect()
}

fn strip_indicator<T: Scalar>(heights: &[T], n: usize, s: T) -> Result<IndicatorField> {
    let hi = T::half() - s;
    IndicatorField::from_samples(n, n, heights.iter().map(|h| *h >= s && *h <= hi).collect())
}

/// Re-derives each step of the energy lower bound at a single scale `ε`,
/// for `s` sampled at the midpoints of `s_samples` cells of `(0, 1/4)`.
pub fn proof_trace<T, R>(map: &R, params: &ProofTraceParams<T>) -> Result<ProofTrace<T>>
where
    T: Scalar,
    R: Rearrangement<T> + ?Sized,
{
    let constants = bound_constant(params.kappa, params.kappa_prime)?;
    let eps = params.eps;
    if params.s_samples == 0 {
        return Err(domain("s_samples must be positive"));
    }
    let n = params.grid_res;
    let energy = EnergyFields::sample(map, params.energy_res)?.summary()?;
    let heights = preimage_heights(map, n)?;
    let image = IndicatorField::from_samples(n, n, heights.iter().map(|h| *h < T::half()).collect())?;
    let mixing = mixes_at_scale_with(&BallCounter::new(&image), &MixingParams::new(params.kappa, eps)?)?;
    let det_ok = energy.abs_det_min >= params.kappa_prime - T::lit(DET_HYPOTHESIS_TOL);
    let mode = if det_ok && mixing.passed { TraceMode::Conditional } else { TraceMode::Unconditional };

    let coarse = n.min(PACKING_AREA_RES);
    let coarse_heights = if coarse == n { heights.clone() } else { preimage_heights(map, coarse)? };

    let tolerances = TraceTolerances {
        hoelder_rel: T::lit(HOELDER_REL_TOL),
        area_per_length: T::lit(AREA_TOL_PER_LENGTH),
        length_cells: T::lit(LENGTH_TOL_CELLS),
        final_cells: T::lit(FINAL_TOL_CELLS),
        det_hypothesis: T::lit(DET_HYPOTHESIS_TOL),
        packing_area_res: coarse,
    };
    let nf = T::from_count(n);
    let cf = T::from_count(coarse);
    let pi = T::PI();
    let conditional = mode == TraceMode::Conditional;

    let mut slices = Vec::with_capacity(params.s_samples);
    for k in 0..params.s_samples {
        let s = T::from_count(2 * k + 1) / T::from_count(8 * params.s_samples);
        let lo = slice_profile(map, s, n)?;
        let hi = slice_profile(map, T::half() - s, n)?;
        let pair = lo.length + hi.length;
        let hoelder_residual = lo.hoelder_residual.min(hi.hoelder_residual);
        let hoelder_ok = [lo, hi]
            .iter()
            .all(|p| p.hoelder_residual >= -tolerances.hoelder_rel * p.speed_sq_integral);

        let strip = strip_indicator(&heights, n, s)?;
        let image_area = strip.true_fraction();
        let points: Vec<TorusPoint<T>> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| strip.get(i, j))
            .map(|(i, j)| cell_center(i, j, n, n))
            .collect();
        let packing = greedy_packing(&points, eps);
        let n_pack = packing.centers.len();
        let np = T::from_count(n_pack);
        let packing_margin = packing.min_separation.map(|d| d - T::lit(2.0) * eps);
        let separated = packing_margin.is_none_or(|m| m > T::zero());
        let covered = packing.covering_radius <= T::lit(2.0) * eps;

        let coarse_strip = strip_indicator(&coarse_heights, coarse, s)?;
        let counter = BallCounter::new(&coarse_strip);
        let dilated = (0..coarse * coarse)
            .into_par_iter()
            .filter(|&c| {
                let i = c % coarse;
                let j = c / coarse;
                coarse_strip.get(i, j) || counter.any_inside(&cell_center(i, j, coarse, coarse), eps)
            })
            .count();
        let packing_area_margin = T::from_count(dilated) / cf / cf - np * pi * eps * eps;
        let packing_area_tol = tolerances.area_per_length * (pair + T::lit(2.0) * pi * eps * np) / cf;

        let covering_margin = T::lit(4.0) * pi * eps * eps * np - image_area;
        let covering_tol = tolerances.area_per_length * T::lit(2.0) * pi * eps * np / nf;
        let area_margin = image_area - params.kappa_prime * (T::half() - T::lit(2.0) * s);
        let area_tol = tolerances.area_per_length * pair / nf;

        let length_tol = tolerances.length_cells * pair / nf;
        let length_margin = conditional.then(|| pair - constants.m * np * eps);
        let pair_bound_margin = conditional.then(|| pair - constants.slice_pair_bound(eps, s));

        let ok = hoelder_ok
            && separated
            && covered
            && packing_area_margin >= -packing_area_tol
            && covering_margin >= -covering_tol
            && area_margin >= -area_tol
            && length_margin.is_none_or(|m| m >= -length_tol)
            && pair_bound_margin.is_none_or(|m| m >= -length_tol);
        slices.push(SliceRecord {
            s,
            l_s: lo.length,
            l_half_minus_s: hi.length,
            hoelder_residual,
            image_area,
            n_pack,
            packing_margin,
            packing_area_margin,
            covering_margin,
            area_margin,
            length_margin,
            pair_bound_margin,
            ok,
        });
    }

    let r#final = conditional.then(|| {
        let half_bound = constants.half_energy_bound(eps);
        let margin = energy.energy_on_a - half_bound;
        let tol = tolerances.final_cells * energy.energy_on_a / T::from_count(params.energy_res);
        let mean_sq = slices
            .iter()
            .map(|r| (r.l_s + r.l_half_minus_s).powi(2))
            .fold(T::zero(), |a, b| a + b)
            / T::from_count(slices.len());
        FinalRecord {
            energy_on_a: energy.energy_on_a,
            half_bound,
            margin,
            slice_chain_margin: energy.energy_on_a - mean_sq / T::lit(16.0),
            ok: margin >= -tol,
        }
    });
    let all_ok = slices.iter().all(|r| r.ok) && r#final.map_or(true, |f| f.ok);
    Ok(ProofTrace {
        mode,
        eps,
        grid_res: n,
        constants,
        energy,
        mixing,
        tolerances,
        slices,
        r#final,
        all_ok,
    })
}
