//! Type-2 computability workbench: stream realizers, represented spaces, exact
//! algebraic numbers, register machines over real structures, and executable
//! Weihrauch reduction witnesses checked against omniscient oracles.

pub mod algebra;
pub mod machine;
pub mod problems;
pub mod reductions;
pub mod spaces;
pub mod stream;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ParseError(pub String);

impl ParseError {
    pub fn new(msg: impl Into<String>) -> Self {
        ParseError(msg.into())
    }
}
