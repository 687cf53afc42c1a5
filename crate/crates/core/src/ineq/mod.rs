//! Empirical checks of the operator and scalar inequalities: magnetic
//! Lieb–Thirring, local Coulomb stability, pull-out, BKS, the arithmetic
//! kinetic bounds, Hardy/Kato and the IMS localization formula.

mod crit;
mod ims;
mod lemmas;
mod lt;

pub use crit::{crit_stability_check, eta, hardy_kato_check, small_beta_check, CritSpec, HardyKatoReport};
pub use ims::{ims_check, ImsReport, Partition};
pub use lemmas::{
    bks_check, lemma_ensemble, pull_out_check, random_partition, random_psd, scalar_kinetic_bounds, LemmaSummary, C0,
};
pub use lt::{lt_check, lt_ensemble, LtEnsemble, LtInstance, LtOptions};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub seed: u64,
    pub params: serde_json::Value,
    pub lhs: f64,
    pub rhs_terms: Vec<f64>,
    /// For the Lieb–Thirring type bounds |LHS_−|/Σ RHS; for the lemmas the
    /// ratio that must stay ≤ 1 (or the violation size for pull-out).
    pub empirical_constant: f64,
    pub pass: bool,
}

impl InequalityReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("serializable report")
    }
}

/// JSON lines, one report per line.
pub fn to_jsonl(reports: &[InequalityReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&r.to_json_line());
        s.push('\n');
    }
    s
}

/// Hex SHA-256 of a byte payload.
pub fn report_hash(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}
