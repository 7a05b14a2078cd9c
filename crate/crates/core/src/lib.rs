//! Broad-sense heritability estimation with kernel ridge regression.
//!
//! The crate covers the whole pipeline: simulating or reading genotypes,
//! building phenotypes with a known signal, forming kernel matrices, fitting
//! the ridge estimator over a grid of penalties, spectral diagnostics of a
//! fit, and a Monte Carlo harness that aggregates many repetitions.

pub mod error;
pub mod genotypes;
pub mod harness;
pub mod io;
pub mod kernels;
pub mod krr;
pub mod linalg;
pub mod phenosim;
pub mod presets;
pub mod rng;
pub mod spectra;

pub use error::{Error, ErrorKind, Result};
pub use genotypes::{Design, GenotypeCoding, GenotypeMatrix, MafLaw, RowSelection};
pub use harness::{GenotypeSource, McConfig, McResultTable, McRow};
pub use kernels::{KernelKind, KernelMatrix};
pub use krr::{CovariateMatrix, KrrFit};
pub use linalg::{EigenDecomposition, SymMatrix};
pub use phenosim::{Family, Population, SimulationSpec};
pub use presets::{Dimensionality, Preset, Scale, Scenario};
pub use spectra::{BoundReport, ConditionReport, Interval, SignalSource, TermDecomposition};
