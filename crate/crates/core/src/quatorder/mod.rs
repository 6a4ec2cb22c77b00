//! Definite quaternion algebras, maximal orders, ideal class sets and Brandt matrices.

pub mod algebra;
pub mod classset;
pub mod enumerate;
pub mod lattice;
pub mod order;

pub use algebra::{Elem, QuaternionAlgebra};
pub use classset::{ClassSet, IdealClass};
pub use lattice::Lattice;
pub use order::MaximalOrder;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum QuatError {
    #[error("level {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("level {0} has an even number of prime factors")]
    Parity(u64),
    #[error("no presentation found for level {0}")]
    NoPresentation(u64),
    #[error("integer overflow in lattice arithmetic")]
    Overflow,
    #[error("generators do not span a full-rank lattice")]
    RankDeficient,
    #[error("scaled norm form is not integral")]
    NonIntegralForm,
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("no optimal embedding of discriminant {0}")]
    EmbeddingNotFound(i64),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
}
