//! # ousum
//!
//! Sums of Ornstein-Uhlenbeck processes (ΣOU) and the distinguished-particle
//! dynamics of bead-spring networks.
//!
//! A ΣOU process is a Brownian motion plus a weighted sum of independent OU
//! modes,
//!
//! ```text
//! x(t) = σ c₀ B₀(t) + Σ_k c_k z_k(t),     dz_k = −λ_k z_k dt + σ dB_k,   z_k(0) = 0.
//! ```
//!
//! A single bead in a network of beads joined by Hookean springs is exactly
//! such a process: the rates λ_k are the eigenvalues of −L for the network's
//! Laplacian L, and every mode carries coefficient 1/√n. The crate builds the
//! networks ([`graph`]), their diffusive spectra ([`spectrum`]), the process
//! models ([`model`]), evaluates finite-n and limiting MSD curves exactly
//! ([`analytic`]), samples paths exactly in law ([`simulate`]) and fits
//! anomalous exponents ([`estimate`]).
//!
//! ```
//! use ousum::{analytic, estimate, graph, model};
//!
//! let chain = graph::rouse_cycle(1024, 1.0).unwrap();
//! let m = model::distinguished_model(&chain, 1.0, 1).unwrap();
//! let w = estimate::default_windows(&m).unwrap();
//! let win = w.intermediate.unwrap();
//! let curve = analytic::msd_finite(&m, &win.grid(40)).unwrap();
//! let fit = estimate::fit_exponent(&curve, win).unwrap();
//! assert!((fit.nu - 0.5).abs() < 0.03);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod report;
pub mod simulate;
pub mod spectrum;

pub use error::{Error, Result};

/// Tool name and version embedded in every emitted artifact.
pub const TOOL: &str = concat!("ousum ", env!("CARGO_PKG_VERSION"));
