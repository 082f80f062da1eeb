// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;

use thiserror::Error;

use crate::model::ValidationReport;

/// Errors raised by the model layer, the simulators and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("model failed validation: {0}")]
    InvalidModel(ValidationReport),

    #[error("derivative of order {order} is not available for {kind} rate functions")]
    UnsupportedOrder { kind: &'static str, order: u8 },

    #[error("first variations need analytically differentiable rate functions, {0} is not")]
    NotDifferentiable(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("thinning bound violated: {which}({at}) = {value} exceeds declared sup {sup}")]
    BoundViolated { which: &'static str, at: f64, value: f64, sup: f64 },

    #[error("non-finite state at step {step} (t = {t})")]
    NonFinite { step: u64, t: f64 },

    #[error("test function `{0}` carries no declared sup-norms")]
    MissingNorms(String),

    #[error("test function `{name}` does not provide derivatives of order {order}")]
    DerivativeOrder { name: String, order: u8 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
