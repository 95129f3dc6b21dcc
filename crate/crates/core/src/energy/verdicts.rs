use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{bound_constant, BoundConstants};
use super::density::{EnergyFields, EnergySummary, MIN_ENERGY_RES};
use crate::error::{domain, Result};
use crate::flow::{Direction, FlowSpec, NearIncompressibility};
use crate::geometry::{cell_center, integrate, IndicatorField, ScalarField};
use crate::maps::Rearrangement;
use crate::mixing::{build_image_indicator, mixing_scale_scan, ScanResult};
use crate::scalar::{CompensatedSum, Scalar};
use crate::tolerances::{DET_HYPOTHESIS_TOL, ENERGY_REL_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    /// Hypotheses certified and the inequality holds.
    Holds,
    /// No mixing scale was certified; the statement is vacuous.
    Vacuous,
    /// The determinant hypothesis failed on the sampled grid.
    HypothesesUnmet,
    /// Hypotheses certified and the inequality fails beyond tolerance.
    Violated,
}

impl VerdictStatus {
    pub fn is_violation(&self) -> bool {
        matches!(self, VerdictStatus::Violated)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremParams<T> {
    pub kappa: T,
    pub kappa_prime: T,
    /// Resolution of the image indicator used by the mixing scan.
    pub grid_res: usize,
    /// Resolution of the energy quadrature.
    pub energy_res: usize,
    pub eps_grid: Vec<T>,
    /// Center pitch as a multiple of ε; `1/4` when `None`.
    pub center_spacing_factor: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport<T> {
    pub constants: BoundConstants<T>,
    pub energy: EnergySummary<T>,
    pub hypotheses_met: bool,
    pub orientation_reversing: bool,
    pub scan: ScanResult<T>,
    pub eps_star: Option<T>,
    /// `C/ε*²`
    pub bound: Option<T>,
    /// `E − C/ε*²`
    pub margin: Option<T>,
    pub status: VerdictStatus,
}

/// Verdict for `E(Φ) ≥ C/ε*²` from precomputed pieces.
pub fn assess_theorem<T: Scalar>(
    constants: BoundConstants<T>,
    energy: EnergySummary<T>,
    scan: ScanResult<T>,
    orientation_reversing: bool,
) -> TheoremReport<T> {
    let hypotheses_met = energy.abs_det_min >= constants.kappa_prime - T::lit(DET_HYPOTHESIS_TOL);
    let eps_star = scan.certified_eps;
    let bound = eps_star.map(|e| constants.energy_bound(e));
    let margin = bound.map(|b| energy.energy - b);
    let status = match (hypotheses_met, margin) {
        (false, _) => VerdictStatus::HypothesesUnmet,
        (true, None) => VerdictStatus::Vacuous,
        (true, Some(m)) => {
            if m >= -T::lit(ENERGY_REL_TOL) * energy.energy.abs().max(T::one()) {
                VerdictStatus::Holds
            } else {
                VerdictStatus::Violated
            }
        }
    };
    TheoremReport {
        constants,
        energy,
        hypotheses_met,
        orientation_reversing,
        scan,
        eps_star,
        bound,
        margin,
        status,
    }
}

/// Certifies a mixing scale for `Φ`, computes `E(Φ)` and compares it with
/// `C(κ, κ′)/ε*²`.
pub fn theorem_verdict<T, R>(map: &R, params: &TheoremParams<T>) -> Result<TheoremReport<T>>
where
    T: Scalar,
    R: Rearrangement<T>,
{
    let constants = bound_constant(params.kappa, params.kappa_prime)?;
    let energy = EnergyFields::sample(map, params.energy_res)?.summary()?;
    let image = build_image_indicator(|p| map.image_contains(p), params.grid_res)?;
    let scan = mixing_scale_scan(&image, params.kappa, &params.eps_grid, params.center_spacing_factor)?;
    Ok(assess_theorem(constants, energy, scan, map.is_orientation_reversing()))
}

/// Lagrangian sweep of a flow from every cell center: time-1 energy fields
/// and the composed integrands of the flow-energy chain.
#[derive(Clone, Debug)]
pub struct FlowSweep<T> {
    pub fields: EnergyFields<T>,
    /// `∫₀¹ exp(√6|∇F(t, Φ_t(x))|) dt` per starting cell.
    pub composed_exp: ScalarField<T>,
    /// `∫₀¹ exp(√6|∇F(t, Φ_t(x))|)·|det ∇Φ_t(x)|⁻¹ dt` per starting cell.
    pub composed_exp_over_det: ScalarField<T>,
    /// `∫₀¹ |∇F(t, Φ_t(x))| dt` per starting cell.
    pub composed_grad_norm: ScalarField<T>,
}

impl<T: Scalar> FlowSweep<T> {
    pub fn run(spec: &FlowSpec<T>, grid_res: usize) -> Result<Self> {
        if grid_res < MIN_ENERGY_RES {
            return Err(domain(format!("energy grid must be >= {MIN_ENERGY_RES}, got {grid_res}")));
        }
        let n = grid_res;
        let sqrt6 = T::lit(6.0).sqrt();
        let rows = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let mut exp_int = CompensatedSum::new();
                let mut exp_det_int = CompensatedSum::new();
                let mut norm_int = CompensatedSum::new();
                let end = spec.integrate_observed(cell_center(k % n, k / n, n, n), Direction::Forward, true, |rec| {
                    let n0 = rec.piece.gradient(rec.start.pos.x1(), rec.start.pos.x2()).frobenius();
                    let n1 = rec.piece.gradient(rec.end.pos.x1(), rec.end.pos.x2()).frobenius();
                    let (w0, w1) = ((sqrt6 * n0).exp(), (sqrt6 * n1).exp());
                    let hh = rec.h * T::half();
                    exp_int.add(hh * (w0 + w1));
                    exp_det_int.add(hh * (w0 / rec.start.det_j.abs() + w1 / rec.end.det_j.abs()));
                    norm_int.add(hh * (n0 + n1));
                })?;
                Ok([
                    end.grad.energy_density(),
                    end.det_j,
                    exp_int.total(),
                    exp_det_int.total(),
                    norm_int.total(),
                ])
            })
            .collect::<Result<Vec<[T; 5]>>>()?;
        let column = |c: usize| ScalarField::from_samples(n, n, rows.iter().map(|r| r[c]).collect());
        Ok(Self {
            fields: EnergyFields { density: column(0)?, det: column(1)? },
            composed_exp: column(2)?,
            composed_exp_over_det: column(3)?,
            composed_grad_norm: column(4)?,
        })
    }
}

/// Space-time average of `g(|∇F(t, x)|)`: midpoint in space on a
/// `grid_res²` grid, trapezoid over `t_samples` intervals in time.
fn eulerian_average<T, G>(spec: &FlowSpec<T>, grid_res: usize, t_samples: usize, g: G) -> Result<T>
where
    T: Scalar,
    G: Fn(T) -> T + Sync,
{
    if grid_res == 0 || t_samples == 0 {
        return Err(domain("quadrature needs positive grid_res and t_samples"));
    }
    spec.validate()?;
    let slices = (0..=t_samples)
        .map(|k| {
            let t = T::from_count(k) / T::from_count(t_samples);
            let f = ScalarField::from_fn(grid_res, grid_res, |p| g(spec.field.gradient_norm(t, &p)))?;
            let mut acc = CompensatedSum::new();
            f.samples().iter().for_each(|v| acc.add(*v));
            Ok(acc.total() / T::from_count(grid_res * grid_res))
        })
        .collect::<Result<Vec<T>>>()?;
    let mut acc = CompensatedSum::new();
    for (k, v) in slices.iter().enumerate() {
        let w = if k == 0 || k == t_samples { T::half() } else { T::one() };
        acc.add(w * *v);
    }
    Ok(acc.total() / T::from_count(t_samples))
}

/// `∫₀¹∫ exp(√6|∇F(t, x)|) dσ dt`; `+∞` if the integrand overflows.
pub fn corollary_rhs<T: Scalar>(spec: &FlowSpec<T>, grid_res: usize, t_samples: usize) -> Result<T> {
    let sqrt6 = T::lit(6.0).sqrt();
    eulerian_average(spec, grid_res, t_samples, |n| (sqrt6 * n).exp())
}

/// `∫₀¹∫ |∇F| dσ dt`, the left side of the open log-ε conjecture.
pub fn grad_norm_integral<T: Scalar>(spec: &FlowSpec<T>, grid_res: usize, t_samples: usize) -> Result<T> {
    eulerian_average(spec, grid_res, t_samples, |n| n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConjectureDiagnostic<T> {
    pub grad_norm_integral: T,
    pub abs_log_eps: Option<T>,
    /// `∫∫|∇F| / |log ε*|`; no verdict is attached.
    pub ratio: Option<T>,
}

pub fn conjecture_diagnostic<T: Scalar>(
    spec: &FlowSpec<T>,
    grid_res: usize,
    t_samples: usize,
    eps_star: Option<T>,
) -> Result<ConjectureDiagnostic<T>> {
    let integral = grad_norm_integral(spec, grid_res, t_samples)?;
    let abs_log_eps = eps_star.map(|e| e.ln().abs());
    Ok(ConjectureDiagnostic {
        grad_norm_integral: integral,
        abs_log_eps,
        ratio: abs_log_eps.map(|l| integral / l),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorollaryParams<T> {
    pub theorem: TheoremParams<T>,
    pub t_samples: usize,
    pub incompressibility_res: usize,
}

/// The four quantities of the chain
/// `∫e(Φ₁) ≤ ∫∫e^{√6|∇F∘Φ_t|} ≤ ∫∫e^{√6|∇F∘Φ_t|}|det∇Φ_t|⁻¹ ≤ (1/κ′)∫∫e^{√6|∇F|}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorollaryChain<T> {
    pub energy: T,
    pub composed_exp: T,
    pub composed_exp_over_det: T,
    pub rhs_over_kappa_prime: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorollaryMargins<T> {
    /// `composed_exp − energy` (Grönwall + Jensen).
    pub jensen: T,
    /// `composed_exp_over_det − composed_exp`; needs `|det| ≤ 1`, which the
    /// hypotheses do not imply, so a negative value is flagged only.
    pub det_weight: T,
    /// `rhs/κ′ − composed_exp_over_det` (change of variables).
    pub change_of_variables: T,
    /// `rhs − C/ε*²`, the acceptance target.
    pub outer: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryReport<T> {
    pub constants: BoundConstants<T>,
    pub near_incompressibility: NearIncompressibility<T>,
    pub hypotheses_met: bool,
    pub scan: ScanResult<T>,
    pub eps_star: Option<T>,
    pub bound: Option<T>,
    /// `None` when the integrand overflowed (treated as `+∞`).
    pub rhs: Option<T>,
    pub rhs_overflow: bool,
    pub chain: CorollaryChain<T>,
    pub margins: CorollaryMargins<T>,
    pub flags: Vec<String>,
    pub status: VerdictStatus,
}

/// Verdict for `C/ε*² ≤ ∫∫exp(√6|∇F|)` from precomputed pieces.
pub fn assess_corollary<T: Scalar>(
    constants: BoundConstants<T>,
    near_incompressibility: NearIncompressibility<T>,
    scan: ScanResult<T>,
    sweep: &FlowSweep<T>,
    rhs: T,
) -> Result<CorollaryReport<T>> {
    let hypotheses_met =
        near_incompressibility.passes(constants.kappa_prime, T::lit(DET_HYPOTHESIS_TOL));
    let eps_star = scan.certified_eps;
    let bound = eps_star.map(|e| constants.energy_bound(e));
    let rhs_overflow = !rhs.is_finite();
    let chain = CorollaryChain {
        energy: integrate(&sweep.fields.density)?,
        composed_exp: integrate(&sweep.composed_exp)?,
        composed_exp_over_det: integrate(&sweep.composed_exp_over_det)?,
        rhs_over_kappa_prime: rhs / constants.kappa_prime,
    };
    let tol = |scale: T| T::lit(ENERGY_REL_TOL) * scale.abs().max(T::one());
    let margins = CorollaryMargins {
        jensen: chain.composed_exp - chain.energy,
        det_weight: chain.composed_exp_over_det - chain.composed_exp,
        change_of_variables: chain.rhs_over_kappa_prime - chain.composed_exp_over_det,
        outer: bound.map(|b| rhs - b),
    };
    let mut flags = Vec::new();
    if margins.jensen < -tol(chain.composed_exp) {
        flags.push(format!("jensen step margin negative: {}", margins.jensen));
    }
    if margins.det_weight < -tol(chain.composed_exp_over_det) {
        flags.push(format!(
            "det-weight step margin negative: {} (requires |det ∇Φ_t| <= 1)",
            margins.det_weight
        ));
    }
    if !rhs_overflow && margins.change_of_variables < -tol(chain.rhs_over_kappa_prime) {
        flags.push(format!(
            "change-of-variables step margin negative: {} (quadrature)",
            margins.change_of_variables
        ));
    }
    let status = match (hypotheses_met, margins.outer) {
        (false, _) => VerdictStatus::HypothesesUnmet,
        (true, None) => VerdictStatus::Vacuous,
        (true, Some(m)) => {
            if rhs_overflow || m >= -tol(rhs) {
                VerdictStatus::Holds
            } else {
                VerdictStatus::Violated
            }
        }
    };
    Ok(CorollaryReport {
        constants,
        near_incompressibility,
        hypotheses_met,
        scan,
        eps_star,
        bound,
        rhs: if rhs_overflow { None } else { Some(rhs) },
        rhs_overflow,
        chain,
        margins,
        flags,
        status,
    })
}

/// Certifies `ε*` for `Φ₁`, checks near-incompressibility and evaluates the
/// flow-energy chain.
pub fn corollary_verdict<T: Scalar>(
    spec: &FlowSpec<T>,
    params: &CorollaryParams<T>,
) -> Result<CorollaryReport<T>> {
    let tp = &params.theorem;
    let constants = bound_constant(tp.kappa, tp.kappa_prime)?;
    let near = spec.check_near_incompressible(params.incompressibility_res, params.t_samples)?;
    let image: IndicatorField =
        build_image_indicator(|p| spec.flow_membership_in_image(p), tp.grid_res)?;
    let scan = mixing_scale_scan(&image, tp.kappa, &tp.eps_grid, tp.center_spacing_factor)?;
    let sweep = FlowSweep::run(spec, tp.energy_res)?;
    let rhs = corollary_rhs(spec, tp.grid_res, params.t_samples)?;
    assess_corollary(constants, near, scan, &sweep, rhs)
}
