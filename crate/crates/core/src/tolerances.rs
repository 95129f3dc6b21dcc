//! Numerical tolerances used by verdicts and traces. Reports echo these
//! values so every pass/fail can be re-derived.

/// Slack on the determinant hypothesis `|det ∇Φ| ≥ κ′`. RK4 drift of the
/// determinant for the bundled flows stays below this at 200 steps.
pub const DET_HYPOTHESIS_TOL: f64 = 1e-6;

/// Relative slack on energy inequalities `E ≥ C/ε²` and the flow bound's
/// outer inequality.
pub const ENERGY_REL_TOL: f64 = 1e-9;

/// Pointwise Grönwall residual and integrated-bound slack.
pub const GRONWALL_TOL: f64 = 1e-6;

/// Relative slack for the Hölder step `∫|∂₁Φ|² ≥ l(s)²`.
pub const HOELDER_REL_TOL: f64 = 1e-9;

/// Area counting error per unit boundary length, in units of `1/grid_res`.
/// A curve of length `L` meets at most about `√2·L·n` cells of an `n²` grid,
/// each worth `1/n²`; the factor 2 covers both sides of the curve.
pub const AREA_TOL_PER_LENGTH: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Proof-trace slice-length slack, in units of `L/grid_res`.
pub const LENGTH_TOL_CELLS: f64 = 1.0;

/// Relative slack on the final `∫_A e ≥ (1/48)(κ′m/(8πε))²`, in units of
/// `1/energy_res`.
pub const FINAL_TOL_CELLS: f64 = 1.0;

/// Coarsest grid used for the ε-neighbourhood area in the packing check.
pub const PACKING_AREA_RES: usize = 256;
