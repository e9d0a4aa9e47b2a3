//! Dual-pathway semantic reward synthesis for driving reinforcement learning.
//!
//! The crate bundles everything needed to train and evaluate a small driving
//! policy against language-grounded rewards, entirely on one desk:
//!
//! - [`embedding`] — a deterministic synthetic embedding space standing in
//!   for a contrastive vision-language encoder, plus the contrasting-goal
//!   static reward.
//! - [`world`] — a seeded 2D corridor micro-simulator with heterogeneous
//!   scripted traffic, collisions and termination rules.
//! - [`gate`] — a configurable-noise object-detector stand-in and the binary
//!   attention gate that decides when deep risk reasoning runs.
//! - [`reasoner`] — causal temporal windows and a template describer that
//!   turns windowed scene dynamics into risk descriptions, plus the gated
//!   dynamic reward.
//! - [`synthesis`] — fusion, normalization and multiplicative vehicle-state
//!   shaping into the final per-step reward.
//! - [`pipeline`] — replay buffer with deferred reward annotation and the
//!   three-worker training loop (deterministic or concurrent scheduling).
//! - [`learner`] — a compact soft actor-critic on hand-rolled feedforward
//!   networks with exact analytic gradients.
//! - [`harness`] — metrics, experiment orchestration, configuration files,
//!   checkpoints and CSV reports.

pub mod apparatus;
pub mod embedding;
pub mod gate;
pub mod reasoner;
pub mod synthesis;
pub mod world;
pub mod error;

pub use apparatus::ApparatusCounter;
pub use error::{Error, Result};
