//! Labeling, denoising, learners and cross validation.

pub mod cv;
pub mod labeling;
pub mod latent;
pub mod linear;

pub use cv::{cross_validate, stratified_folds, CvConfig, CvResult};
pub use labeling::{denoise_ts, label_topics, LabelingPolicy, Labels};
pub use latent::{latent_features, latent_matrix, LatentFeatures};
pub use linear::{predict, Learner, LinearModel, LogisticConfig, LogisticRegression, Scorer};
