//! Spatial clustering analysis for areal time series: contiguity weights, local and global
//! autocorrelation statistics with conditional permutation inference, cluster labels, and
//! cross-method agreement colors.

pub mod agreement_aggregation;
pub mod cluster_assignment;
pub mod data_model;
pub mod error;
pub mod lisa_statistics;
pub mod permutation_engine;
pub mod pipeline;
pub mod spatial_weights;
pub mod synthetic;
