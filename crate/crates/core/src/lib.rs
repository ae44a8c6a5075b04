#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod banded;
pub mod beam;
pub mod config;
pub mod constitutive;
pub mod coupled;
pub mod deformation;
pub mod diagnostics;
pub mod error;
pub mod galerkin;
pub mod grid;
pub mod initial;
pub mod mms;
pub mod newton;
pub mod output;
pub mod pore;
pub mod runner;
pub mod verify;
pub mod scenarios;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book;
