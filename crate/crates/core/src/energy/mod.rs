//! Energy of rearrangements and the constants, verdicts and proof traces of
//! the energy lower bound.

mod bounds;
mod density;
mod proof_trace;
mod separator;
mod verdicts;

pub use bounds::{bound_constant, two_crossing_constant, validate_kappa_prime, BoundConstants};
pub use density::{
    energy_density, slice_length, slice_profile, total_energy, EnergyFields, EnergySummary, SliceProfile,
    MIN_ENERGY_RES, MIN_QUAD_POINTS,
};
pub use proof_trace::{
    greedy_packing, proof_trace, FinalRecord, GreedyPacking, ProofTrace, ProofTraceParams, SliceRecord,
    TraceMode, TraceTolerances,
};
pub use separator::{
    arc_length, lens_area, min_separator_length, solve_separator_arc, SeparatorArc, AREA_TOLERANCE,
};
pub use verdicts::{
    assess_corollary, assess_theorem, conjecture_diagnostic, corollary_rhs, corollary_verdict,
    grad_norm_integral, theorem_verdict, ConjectureDiagnostic, CorollaryChain, CorollaryMargins,
    CorollaryParams, CorollaryReport, FlowSweep, TheoremParams, TheoremReport, VerdictStatus,
};
