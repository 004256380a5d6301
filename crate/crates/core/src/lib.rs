//! Smoothing as preprocessing for benchmark time series classifiers.
//!
//! The crate covers the whole experimental loop: archive ingestion and
//! stratified resampling ([`dataset`]), six smoothing filters ([`smoothing`]),
//! the 1-NN Euclidean / 1-NN DTW / rotation forest benchmarks
//! ([`classifiers`]), cross-validated smoother selection ([`tuning`]),
//! rank statistics and critical difference diagrams ([`evaluation`]) and the
//! resumable experiment runner ([`experiment`]).

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod seed;
pub mod smoothing;
pub mod tuning;

pub use error::{Error, Result};
