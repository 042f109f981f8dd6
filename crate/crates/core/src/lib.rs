//! Solvers and diagnostics for the nonsymmetric Keyfitz-Kranzer balance
//! system
//!
//! ```text
//! rho_t + (rho phi)_x = f,   m_t + (m phi)_x = g,   phi = Phi(m / rho) - P(rho)
//! ```
//!
//! [`model`] holds the pluggable laws and their audit, [`characteristics`]
//! the eigenstructure and invariant regions, [`viscous`] and [`fv`] the two
//! solvers, [`entropy`], [`compactness`] and [`young`] the diagnostics, and
//! [`sweep`] ties them together over a list of viscosities.
//!
//! ```
//! use kk_core::{ModelSpec, State};
//! use kk_core::characteristics::riemann_invariants;
//!
//! let gc = ModelSpec::gc(1.0, 0.5);
//! let (w_inv, z_inv) = riemann_invariants(&gc, State::from_rho_w(4.0, 2.0).unwrap()).unwrap();
//! assert_eq!((w_inv, z_inv), (1.5, 2.0));
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod compactness;
pub mod diff;
pub mod entropy;
pub mod error;
pub mod fv;
pub mod grid;
pub mod io;
pub mod model;
pub mod profile;
pub mod scenario;
pub mod state;
pub mod svg;
pub mod sweep;
pub mod testfn;
pub mod viscous;
pub mod young;

pub use error::{Error, Result};
pub use model::{ModelConfig, ModelSpec};
pub use state::State;

// Book chapters are compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/characteristics.md")]
    mod characteristics {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/young.md")]
    mod young {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
