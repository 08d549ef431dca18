//! Simultaneous synchronization and topology identification for networks of
//! scalar agents coupled through an unknown signed (repelling) Laplacian.
//!
//! The crate is organised bottom-up:
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | signed graphs, complete-graph edge space, incidence, Laplacians, spectra |
//! | [`protocol`] | excitation generator, auxiliary system, control input, adaptation law |
//! | [`dynamics`] | node maps, plant, error-coordinate system, coordinate cross-check |
//! | [`sim`] | RK4 co-integration, trajectories, CSV |
//! | [`excitation`] | windowed Gram matrices and (δ-)persistency-of-excitation checks |
//! | [`analysis`] | Lyapunov monitoring, convergence metrics, topology recovery |
//! | [`config`] | TOML run configuration and graph files |
//! | [`commands`] | the experiment commands behind the `signet` binary |
//!
//! ```
//! use signet_id::graph::{laplacian_direct, spectral_report, SignedGraph};
//!
//! let g = SignedGraph::complete(3, -1.0).unwrap();
//! let report = spectral_report(&laplacian_direct(&g)).unwrap();
//! assert!((report.lambda_min + 3.0).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod commands;
pub mod config;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod excitation;
pub mod graph;
pub mod protocol;
pub mod reference;
pub mod sim;

pub use error::{Error, Result};
