//! Machine-readable reports.

use gpc_core::gpc::{Completeness, GPCTable, PinningReport, PinningTolerances};
use gpc_core::rdm::NaturalOrbitalFrame;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisInfo {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintInfo {
    pub label: String,
    pub kappa0: i64,
    pub kappa: Vec<i64>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableInfo {
    pub n: usize,
    pub m: usize,
    pub complete: bool,
    pub constraints: Vec<ConstraintInfo>,
}

impl From<&GPCTable> for TableInfo {
    fn from(t: &GPCTable) -> Self {
        Self {
            n: t.n,
            m: t.m,
            complete: t.completeness == Completeness::Complete,
            constraints: t
                .constraints
                .iter()
                .map(|c| ConstraintInfo {
                    label: c.label.clone(),
                    kappa0: c.kappa0,
                    kappa: c.kappa.clone(),
                    text: c.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintValue {
    pub label: String,
    pub value: f64,
    pub status: String,
    /// Decimal exponent of `|value|`, absent for zero.
    pub scale: Option<i32>,
}

pub fn constraint_values(report: &PinningReport) -> Vec<ConstraintValue> {
    report
        .entries
        .iter()
        .map(|e| ConstraintValue {
            label: e.label.clone(),
            value: e.value,
            status: e.status.as_str().to_string(),
            scale: e.scale,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceInfo {
    pub pin: f64,
    pub quasi: f64,
    pub violation: f64,
}

impl From<&PinningTolerances> for ToleranceInfo {
    fn from(t: &PinningTolerances) -> Self {
        Self {
            pin: t.pin,
            quasi: t.quasi,
            violation: t.violation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub input_sha256: String,
    /// Norm of the vector as read, before renormalization.
    pub input_norm: f64,
    pub basis: BasisInfo,
    pub occupations: Vec<f64>,
    /// 1-based source orbital of each sorted occupation.
    pub permutation: Vec<usize>,
    pub table: TableInfo,
    pub tolerances: ToleranceInfo,
    pub constraints: Vec<ConstraintValue>,
    pub degenerate: bool,
    /// `degeneracy_flags[i]` marks `n_{i+1} ≈ n_{i+2}`.
    pub degeneracy_flags: Vec<bool>,
    /// Weight per excitation order `0..=n` in the natural-orbital basis.
    pub excitation_norms: Vec<f64>,
    pub any_violated: bool,
}

impl AnalysisReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        input_sha256: String,
        input_norm: f64,
        frame: &NaturalOrbitalFrame,
        table: &GPCTable,
        tolerances: &PinningTolerances,
        pinning: &PinningReport,
        excitation_norms: Vec<f64>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            input_sha256,
            input_norm,
            basis: BasisInfo {
                n: table.n,
                m: table.m,
            },
            occupations: frame.spectrum.values.clone(),
            permutation: frame.spectrum.permutation.clone(),
            table: table.into(),
            tolerances: tolerances.into(),
            constraints: constraint_values(pinning),
            degenerate: frame.any_degenerate(),
            degeneracy_flags: frame.degeneracy_flags.clone(),
            excitation_norms,
            any_violated: pinning.any_violated(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub line: usize,
    pub occupations: Vec<f64>,
    pub resorted: bool,
    pub degenerate: bool,
    pub constraints: Vec<ConstraintValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub schema_version: u32,
    pub table: TableInfo,
    pub tolerances: ToleranceInfo,
    pub spectra: Vec<SpectrumEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDeterminant {
    pub orbitals: Vec<usize>,
    pub excitation_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveReport {
    pub schema_version: u32,
    pub basis: BasisInfo,
    pub saturated: Vec<String>,
    pub twice_sz: Option<i32>,
    pub determinants: Vec<EffectiveDeterminant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub schema_version: u32,
    pub rank: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub degenerate_trials: usize,
    pub max_odd_norm: f64,
    pub max_bd_residual: f64,
    pub theorem_failures: usize,
    /// Table used for the membership check, if one exists for `(3, rank)`.
    pub membership_table: Option<String>,
    pub min_constraint_value: Option<f64>,
    pub membership_failures: usize,
    pub passed: bool,
}
