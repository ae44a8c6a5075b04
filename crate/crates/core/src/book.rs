#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/material.md")]
mod material {}
#[doc = include_str!("../../../book/src/beam.md")]
mod beam {}
#[doc = include_str!("../../../book/src/pore.md")]
mod pore {}
#[doc = include_str!("../../../book/src/coupling.md")]
mod coupling {}
#[doc = include_str!("../../../book/src/diagnostics.md")]
mod diagnostics {}
#[doc = include_str!("../../../book/src/galerkin.md")]
mod galerkin {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
