// SPDX-License-Identifier: Apache-2.0

//! Gate-level workbench for comparing two's-complement and sign-magnitude
//! multipliers under a fan-out-weighted switching-activity power model.
//!
//! The crate is organised bottom-up:
//!
//! * [`formats`]: signed encodings and golden arithmetic models.
//! * [`netlist`]: cell-level circuits, cost table, evaluation.
//! * [`generators`]: encoder and multiplier constructors, exhaustive verification.
//! * [`sim`]: clipped-Gaussian stimuli and switching-activity estimation.
//! * [`aig`], [`mapper`], [`rewrite`]: and-inverter graphs, technology mapping
//!   and the function-preserving recipe catalogue.
//! * [`search`]: guided random-walk design-space exploration.
//! * [`config`]: the A–E encoder/multiplier configurations and their reports.

pub mod aig;
pub mod config;
pub mod error;
pub mod formats;
pub mod generators;
pub mod mapper;
pub mod netlist;
pub mod rewrite;
pub mod search;
pub mod sim;
pub mod truth;

pub use error::{Error, Result};
