use thiserror::Error;

/// Errors raised by the library. Each variant maps to a distinct CLI exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller supplied arguments outside an operation's domain.
    #[error("usage error: {0}")]
    Usage(String),

    /// A size guard was exceeded; the message names the limiting quantity.
    #[error("{guard} guard: {detail}")]
    Size { guard: &'static str, detail: String },

    /// The generator set does not reach every group element.
    #[error("generating set does not generate the group: element {element} is unreachable")]
    NotGenerating { element: String },

    /// Two distinct points were mapped to the same image, or a metric vanished off the diagonal.
    #[error("degenerate map: {0}")]
    Degenerate(String),

    /// An identity that must hold exactly was violated beyond tolerance.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
