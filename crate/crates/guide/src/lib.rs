//! The book's chapters, compiled so their code listings run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/hamiltonians.md")]
pub mod hamiltonians {}

#[doc = include_str!("../../../book/src/adiabatic.md")]
pub mod adiabatic {}

#[doc = include_str!("../../../book/src/readout.md")]
pub mod readout {}

#[doc = include_str!("../../../book/src/ipea.md")]
pub mod ipea {}

#[doc = include_str!("../../../book/src/noise.md")]
pub mod noise {}

#[doc = include_str!("../../../book/src/pulses.md")]
pub mod pulses {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
