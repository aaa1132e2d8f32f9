use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("dimension error in {op}: {lhs} has shape {lhs_shape:?}, {rhs} has shape {rhs_shape:?}")]
    Dimension {
        op: &'static str,
        lhs: &'static str,
        lhs_shape: Vec<usize>,
        rhs: &'static str,
        rhs_shape: Vec<usize>,
    },
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },
    #[error("contract violated in {op}: {msg}")]
    Contract { op: &'static str, msg: String },
    #[error("non-finite input to {op}")]
    NonFinite { op: &'static str },
    #[error("non-finite gradient for parameter `{param}`")]
    NonFiniteGradient { param: String },
}

impl NumError {
    pub(crate) fn dim(
        op: &'static str,
        lhs: &'static str,
        lhs_shape: &[usize],
        rhs: &'static str,
        rhs_shape: &[usize],
    ) -> Self {
        NumError::Dimension {
            op,
            lhs,
            lhs_shape: lhs_shape.to_vec(),
            rhs,
            rhs_shape: rhs_shape.to_vec(),
        }
    }

    pub(crate) fn contract(op: &'static str, msg: impl Into<String>) -> Self {
        NumError::Contract { op, msg: msg.into() }
    }
}

pub type NumResult<T> = Result<T, NumError>;
