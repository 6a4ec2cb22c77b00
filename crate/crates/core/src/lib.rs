#![allow(
    clippy::needless_range_loop,
    clippy::too_many_arguments,
    clippy::neg_cmp_op_on_partial_ord
)]

pub mod arith;
pub mod geomside;
pub mod harness;
pub mod heckemeasure;
pub mod lfunc;
pub mod qfield;
pub mod quatorder;
pub mod spectralside;
pub mod torusmap;
