use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A computation would exceed a configured size limit.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// The arc is glued to the same triangle on both sides.
    #[error("flip undefined at arc {0}: both sides lie in one triangle")]
    FlipUndefined(usize),
    /// A path passes through a marker or is otherwise degenerate.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// Transported vanishing data at the two ends of a path do not match.
    #[error("not a matching path: {0}")]
    NotMatching(String),
    /// Malformed textual or JSON input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
