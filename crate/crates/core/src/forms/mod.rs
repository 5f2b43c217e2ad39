//! Exterior algebra of constant forms and of forms with trig-polynomial
//! coefficients on `T^{n+N}`.

mod const_form;
mod multi_index;
mod trig_form;

pub use const_form::ConstPForm;
pub use multi_index::{merge_sign, wedge_sign, MultiIndex, MAX_DIM};
pub use trig_form::{eta_form, int_json, int_vec, ExactnessCertificate, ExactnessFailure, Freq, FrequencyBox, TrigPForm};

use crate::error::Result;
use crate::scalar::Scalar;

/// Exterior product of constant forms.
pub fn wedge<S: Scalar>(a: &ConstPForm<S>, b: &ConstPForm<S>) -> Result<ConstPForm<S>> {
    a.wedge(b)
}

pub fn exterior_derivative<S: Scalar>(u: &TrigPForm<S>) -> TrigPForm<S> {
    u.exterior_derivative()
}
