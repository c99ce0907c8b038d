//! Truncated particle system: windows, Monte Carlo counts, exact laws and
//! their statistics.

pub mod clt;
pub mod law;
pub mod plan;
pub mod sim;
pub mod stats;

pub use clt::{clt_diagnostic, CltDiagnostic};
pub use law::{exact_cumulants, exact_law, exact_law_shifted, tv_to_poisson, CountingCumulants, CountingLaw};
pub use plan::{plan_truncation, plan_truncation_with, TailRule, TruncationPlan, DEFAULT_BUDGET};
pub use sim::{simulate_counts, simulate_poisson_initial, CountingSample};
pub use stats::{empirical_numvar, EmpiricalNumVar, KsResult};
