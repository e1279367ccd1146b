//! Formal solutions of `w′ = t^r A(t) w` near an irregular singular point at
//! infinity, and integration of the mollified systems built from them.

// `!(x > 0.0)` is used throughout so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod companion;
pub mod error;
pub mod expansion;
pub mod format;
pub mod integrate;
pub mod mollify;
pub mod numerics;
pub mod par;
pub mod symbolic;
