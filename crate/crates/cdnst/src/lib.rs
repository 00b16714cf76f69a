//! Cross-domain novelty-seeking trait mining for sequential recommendation.
//!
//! This crate models a user's appetite for novel choices from timestamped
//! consumption logs in two domains, transfers that trait across domains
//! through a shared latent level distribution, and ships an experiment
//! harness that measures the recommendation gain and its temporal
//! precondition on synthetic and real logs.
//!
//! The pieces, bottom-up:
//!
//! - [`domain`]: catalogs, keywords, timestamped action sequences.
//! - [`dcn`]: the per-user dynamic choice novelty rank matrix.
//! - [`genmodel`]: the action function, conditional likelihoods, the trait
//!   summary, and the forward generative process.
//! - [`gibbs`]: the pointwise Gibbs sampler (with a Metropolis-within-Gibbs
//!   step for the non-conjugate utility conditionals).
//! - [`baselines`]: frequency, Markov-chain, and pooled single-domain
//!   comparison recommenders.
//! - [`metrics`]: MRR, nDCG@k, precision@k over ranked lists.
//! - [`relatedness`]: directed temporal relatedness between domains from
//!   keyword embeddings.
//! - [`harness`]: synthetic populations, next-item evaluation, timestamp
//!   shifting, and report assembly.
//! - [`store`] and [`cli`]: on-disk stores, run manifests, and the `cdnst`
//!   command-line entry point.
//!
//! See the crate examples for one runnable walkthrough per capability.

pub mod baselines;
pub mod cli;
pub mod dcn;
pub mod domain;
pub mod error;
pub mod genmodel;
pub mod gibbs;
pub mod harness;
pub mod metrics;
pub mod relatedness;
pub mod rng;
pub mod store;

pub use error::{Error, Result};
