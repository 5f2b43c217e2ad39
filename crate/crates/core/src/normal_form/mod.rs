//! Variable coefficients `c(t, ξ) = Σ_j c_j(t) p_j(ξ) dt_j`: the decomposition
//! `c = c_{ξ0} + d_t 𝒞_ξ`, condition 𝒟, the conjugating map `Ψ` and the
//! growth classification of decoupled systems.

mod classify;
mod condition_d;
pub mod examples;
mod profile;
mod psi;
mod trig_poly;

pub use classify::{classify_decoupled, ClassifierReport, JCondition, JReport, SignCheck};
pub use condition_d::{check_condition_d, ConditionDEntry, ConditionDForm, ConditionDOptions, ConditionDReport, ConditionDVerdict};
pub use profile::{apply_variable, check_closedness, decompose, CoefficientEntry, CoefficientProfile, NormalForm, NormalFormSlice};
pub use psi::{
    psi_apply, random_form, reduction_smoke, verify_conjugation, ConjugationOptions, ConjugationReport, ConjugationTrial,
    PsiCap, PsiDirection, PsiOptions, ReductionReport,
};
pub use trig_poly::TrigPoly;
