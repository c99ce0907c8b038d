//! Gaussian-limit diagnostics for counts.

use serde::{Deserialize, Serialize};

use super::law::CountingCumulants;
use super::sim::CountingSample;
use super::stats::{ks_discrete_normal, KsResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltDiagnostic {
    pub ks: KsResult,
    pub skew_ratio: Option<f64>,
}

/// KS distance of counts standardized by `(L/a, V)` and, when cumulants
/// are supplied, the ratio `c3 / c2^{3/2}`.
pub fn clt_diagnostic(sample: &CountingSample, v: f64, cumulants: Option<&CountingCumulants>) -> Result<CltDiagnostic> {
    if !(v > 0.0) {
        return Err(Error::DegenerateLaw("CLT diagnostic needs a positive variance".into()));
    }
    let mean = sample.l / sample.config.a;
    Ok(CltDiagnostic {
        ks: ks_discrete_normal(&sample.counts, mean, v.sqrt()),
        skew_ratio: cumulants.map(|c| c.skew_ratio()),
    })
}
