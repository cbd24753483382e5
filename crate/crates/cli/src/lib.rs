//! Experiment runner for the Hermite–Fourier integrators: JSON configs, presets, CSV output
//! and gnuplot scripts.

pub mod check;
pub mod config;
pub mod output;
pub mod plot;
pub mod presets;
pub mod runner;
