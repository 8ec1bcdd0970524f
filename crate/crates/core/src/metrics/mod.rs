//! Confusion-matrix metrics, PCA projection and cluster separation.

mod confusion;
mod pca;
mod silhouette;

pub use confusion::{metrics, Averages, ClassMetrics, ConfusionMatrix, EvalReport};
pub use pca::{pca_project, PcaResult, PCA_MAX_ITERATIONS, PCA_TOLERANCE};
pub use silhouette::mean_silhouette;
