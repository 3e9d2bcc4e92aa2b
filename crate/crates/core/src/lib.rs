// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compat;
pub mod delay_ode;
pub mod delayed_exp;
pub mod energy;
pub mod error;
pub mod field;
pub mod funcspec;
pub mod heat_delay;
pub mod heat_nodelay;
pub mod oracle_fd;
pub mod paths;
pub mod problem;
pub mod quadrature;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/delayed-exponential.md")]
    mod delayed_exponential {}
    #[doc = include_str!("../../../book/src/delay-ode.md")]
    mod delay_ode {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/heat-nodelay.md")]
    mod heat_nodelay {}
    #[doc = include_str!("../../../book/src/heat-delay.md")]
    mod heat_delay {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/compat.md")]
    mod compat {}
    #[doc = include_str!("../../../book/src/funcspec.md")]
    mod funcspec {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
