//! Spectral computations for one-dimensional Dirac systems with
//! matrix-valued complex potentials under periodic and antiperiodic
//! boundary conditions.
//!
//! The crate covers both directions of the problem:
//!
//! * [`forward`]: transfer-matrix propagation across a sampled potential,
//!   monodromy matrices, characteristic determinants, and eigenvalue pair
//!   localization by contour counting near each lattice point `2n + theta`.
//! * [`determinant`]: the regularized infinite product attached to a
//!   spectrum table, its lattice residuals, and comparison against closed
//!   forms.
//! * [`admissibility`]: averaged-offset diagnostics that separate spectra
//!   of genuine potentials from impostors, plus the dyadic family showing
//!   the bound is attained.
//! * [`construction`]: from an admissible half-trace candidate to node
//!   systems, Floquet multipliers, weights, and an interpolated half-trace.
//! * [`glm`]: the reconstruction kernel built from node/weight rows,
//!   Nystrom discretizations of `I + K_x`, and solvability scans.
//! * [`io`]: versioned JSON documents for potentials, spectrum tables, and
//!   construction data.
//!
//! Everything numeric is generic over the scalar through [`Real`]
//! (instantiated in practice as `f64`; `f32` works for smoke-level
//! precision). Complex numbers come from [`num_complex`] and the handful of
//! dense matrix factorizations from [`nalgebra`].

pub mod admissibility;
pub mod construction;
pub mod determinant;
pub mod error;
pub mod forward;
pub mod glm;
pub mod io;
pub mod scalar;
mod series;
pub mod types;

pub use error::{Error, Result};
pub use scalar::Real;
pub use types::{
    free_solution, BoundaryKind, Mat2, Monodromy, PotentialGrid, SpectrumTable,
    Tolerances,
};

pub use admissibility::{
    average, dyadic_spectrum, linearization_split, offset_summary,
    summability_report, verify_dyadic, DyadicRow, LinearizationSplit,
    OffsetSummary, SummabilityReport, Verdict,
};
pub use construction::{
    admissible_threshold, build, floquet_multipliers, ConstructionData,
    DiskWarning, NodeSystem, VerificationReport,
};
pub use determinant::{
    free_determinant, free_determinant_product, DeterminantModel,
    LatticeResiduals,
};
pub use forward::{
    char_det, count_zeros_in_disk, locate_spectrum, propagate,
    refinement_defect, wronskian_defect, Localization,
};
pub use glm::{
    min_singular_value, parseval_defect, solvability_scan, KernelData,
    SolvabilityRow,
};

/// Complex double: the working scalar of the command-line tools.
pub type C64 = num_complex::Complex<f64>;
/// Complex single, for callers trading precision for footprint.
pub type C32 = num_complex::Complex<f32>;
