use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("invalid shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: String },
    #[error("kernel {kernel}x{kernel} larger than input {height}x{width}")]
    KernelTooLarge {
        kernel: usize,
        height: usize,
        width: usize,
    },
    #[error("pool window {window}x{window} larger than input {height}x{width}")]
    WindowTooLarge {
        window: usize,
        height: usize,
        width: usize,
    },
    #[error("concat needs at least one part")]
    EmptyConcat,
    #[error("backward called before forward on {layer} layer")]
    BackwardBeforeForward { layer: &'static str },
    #[error("label {label} outside 0..{classes}")]
    InvalidLabel { label: usize, classes: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
    #[error("malformed tensor data: {0}")]
    Format(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),
}

impl Error {
    pub(crate) fn field(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-friendly tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::InvalidShape { .. } => "invalid_shape",
            Error::KernelTooLarge { .. } => "kernel_too_large",
            Error::WindowTooLarge { .. } => "window_too_large",
            Error::EmptyConcat => "empty_concat",
            Error::BackwardBeforeForward { .. } => "backward_before_forward",
            Error::InvalidLabel { .. } => "invalid_label",
            Error::InvalidConfig(_) => "invalid_config",
            Error::EmptyDataset => "empty_dataset",
            Error::NonFiniteLoss { .. } => "non_finite_loss",
            Error::InvalidField { .. } => "invalid_field",
            Error::Format(_) => "format",
            Error::Model(_) => "model",
            Error::NotImplemented(_) => "not_implemented",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
