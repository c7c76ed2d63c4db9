//! Shooting solver and verifier for sign-changing radial solutions of
//! `Δu + K(|x|) f(u) = 0` outside a ball, with `f` singular at `u = 0`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod ivp;
pub mod linear_oracle;
pub mod nonlinearity;
pub mod quadrature;
pub mod roots;
pub mod shooting;
pub mod transform;

pub use error::{Error, Result};
