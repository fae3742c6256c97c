// negated comparisons below are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod lab;
pub mod profile;
pub mod spectral;
