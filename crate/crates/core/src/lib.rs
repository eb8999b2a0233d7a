#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod complexfn;
pub mod error;
pub mod hermite_price;
pub mod inversion;
pub mod mc;
pub mod normalize;
pub mod quad;
pub mod result;
pub mod tables;
pub mod transform;
pub mod yor;
