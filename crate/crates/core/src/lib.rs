//! Simulator for one-dimensional frequency-modulated multi-resonator cavity
//! optomechanical lattices: effective SSH / Kitaev-analog Hamiltonians in
//! four parameter regimes, their spectra and edge states, single-excitation
//! quantum walks, and direct integration of the full time-dependent model.

pub mod model;
pub mod special;
pub mod spectral;
pub mod config;
pub mod dynamics;
pub mod runner;
