//! Regression from weight vectors to proxy loss, and the search for the
//! weights with the lowest predicted loss.

mod gbrt;
mod landscape;
mod report;
mod search;

pub use gbrt::{fit_boosted_trees, fit_regressor, BoostedTrees, FitMetadata, Regressor, RegressorHyper, MIN_RECORDS};
pub use landscape::{pca_landscape, Landscape, LandscapePoint};
pub use report::{rank_weights, read_weights_file, write_weights_file, RankedWeight, WeightReport};
pub use search::{search_optimal, Candidate, SearchConfig, SearchOutcome};
