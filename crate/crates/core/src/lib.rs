//! Dual-structured (BD / BDS) linear precoding for dual-polarized massive
//! MIMO downlinks under imperfect CSIT.
//!
//! The pipeline is: long-term statistics ([`corrstats`]) → channel draws
//! ([`channel`]) → outer/inner precoders ([`precode`]) → SINR and Monte Carlo
//! ([`metrics`]). [`rmt`] gives the large-system deterministic equivalents,
//! [`modeswitch`] picks BD or BDS, [`scene3d`] handles elevation regions, and
//! [`cli`] parses scenario files and writes CSV rows.

pub mod channel;
pub mod cli;
pub mod corrstats;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod modeswitch;
pub mod precode;
pub mod rmt;
pub mod scenario;
pub mod scene3d;

pub use error::{Error, Result};
pub use scenario::{BdsRegularizer, ChiModel, CsitModel, GroupScenario, ScenarioSpec, Scheme};
