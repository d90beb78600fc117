//! Thermodynamic formalism for locally constant GL(2,R) cocycles over
//! mixing subshifts of finite type.
//!
//! The crate computes subadditive and additive pressures, Lyapunov
//! exponents, canonical holonomies and equilibrium states, and classifies a
//! cocycle as typical, conformal, reducible with a unique equilibrium state,
//! reducible with two ergodic equilibrium states, or undetermined.

pub mod cocycle;
pub mod equilibrium;
pub mod error;
pub mod holonomy;
pub mod linalg2;
pub mod markov;
pub mod pressure;
pub mod problem;
pub mod qm;
pub mod shift_space;
pub mod typicality;

use serde::{Deserialize, Serialize};

pub use cocycle::{Cocycle, LocalTable, TriangularCocycle, WordNorm};
pub use equilibrium::{
    bundle_consistency, classify, classify_triangular, gibbs_weights, livsic_test, markov_equilibrium, straighten,
    Branch, ClassificationResult, ClassifyBounds, CohomologyVerdict, CylinderMeasure, EquilibriumState, GibbsReport,
    LineField,
};
pub use error::{Error, Result};
pub use holonomy::{
    holonomy_loop, holonomy_rectangle, stable_holonomy, unstable_holonomy, HolonomyResult,
};
pub use linalg2::{angular_distance, Direction, EigenClass, EigenData, Mat2, SvdData};
pub use markov::MarkovMeasure;
pub use pressure::{
    additive_pressure, lyapunov_monte_carlo, lyapunov_periodic, subadditive_pressure,
    triangular_pressures, AdditivePressure, MonteCarloEstimate, Potential, PressureEstimate, QmConstants,
    TriangularPressures,
};
pub use problem::{load, Generator, Problem, ProblemError, ProblemErrorKind, ProblemSpec};
pub use qm::{best_connector, default_k_max, qm_scan, Connector, QmReport};
pub use shift_space::{Point, PointSpec, ShiftSpace, Symbol, Word};
pub use typicality::{
    equal_modulus_scan, irreducibility_witness, is_typical, EqualModulus, TypicalityCertificate, TypicalityOutcome,
    Witness,
};

/// Numerical thresholds below which strict inequalities are not asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Matrices with `|det|` at or below this are treated as singular.
    pub det_tol: f64,
    /// Relative eigenvalue-modulus gap required for pinching.
    pub gap_tol: f64,
    /// Angular margin required for twisting and irreducibility witnesses.
    pub twist_tol: f64,
    /// Periodic Birkhoff-sum discrepancy that counts as non-cohomologous.
    pub coh_tol: f64,
    /// Pressure differences at or below this count as equal.
    pub pressure_eq_tol: f64,
    /// Pressure differences above this count as distinct; in between is undetermined.
    pub pressure_gap_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            det_tol: 1e-12,
            gap_tol: 1e-9,
            twist_tol: 1e-8,
            coh_tol: 1e-9,
            pressure_eq_tol: 1e-9,
            pressure_gap_tol: 1e-6,
        }
    }
}
