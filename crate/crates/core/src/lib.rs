#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod cli;
pub mod error;
pub mod freud;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod orthopoly;
pub mod painleve2;
pub mod psi_cp;
pub mod quad;
pub mod semiclassics;
pub mod table;
