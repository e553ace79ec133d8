// NaN must fail validation, hence `!(x > 0.0)` rather than `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod liouvillian;
pub mod model;
pub mod spectral;
pub mod steadystate;
pub mod transport;

/// The guide's code samples, compiled as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    pub struct Model;
    #[doc = include_str!("../../../book/src/liouvillian.md")]
    pub struct Liouvillian;
    #[doc = include_str!("../../../book/src/steady_state.md")]
    pub struct SteadyState;
    #[doc = include_str!("../../../book/src/spectrum.md")]
    pub struct Spectrum;
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub struct Dynamics;
    #[doc = include_str!("../../../book/src/transport.md")]
    pub struct Transport;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
