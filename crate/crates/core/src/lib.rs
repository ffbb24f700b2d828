#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dataio;
pub mod mcd;
pub mod metrics;
pub mod numkit;
pub mod resample;
pub mod simbench;
