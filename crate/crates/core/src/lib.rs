//! Benchmark toolkit for topic popularity prediction on social-network
//! message corpora.
//!
//! The crate is organised around the pipeline it implements:
//!
//! * [`model`]: messages, interaction and follower graphs, time bucketing,
//!   per-topic snapshots and popularity series.
//! * [`ingest`]: line-delimited JSON corpora and follower edge lists.
//! * [`features`]: the 68-dimension feature space (content, user, hashtag,
//!   network, meme and time-series features).
//! * [`predict`]: labeling, denoising, the logistic feature classifier, the
//!   latent-feature relation baseline and stratified cross validation.
//! * [`metrics`]: precision/recall/F1, macro/micro F1, RMSE, scorecards.
//! * [`ranking`]: risk-matrix weights and MinDis scenario ranking.
//! * [`reference`]: published scorecards, weights and rankings of the
//!   surveyed methods.
//! * [`ablation`]: per-feature relative contribution.
//! * [`synth`]: seeded synthetic social network and cascade generator.

pub mod ablation;
pub mod digest;
pub mod error;
pub mod features;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod predict;
pub mod ranking;
pub mod reference;
pub mod synth;
pub mod text;

mod par;

pub use error::{Error, Result};
