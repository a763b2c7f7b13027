//! Toolkit for the single-qubit nonclassicality test built on a pair of
//! positive observables `A` and `B` with `<B> > <A> > 0` for every state.
//!
//! The exact layer ([`qubit`], [`witness`], [`source`]) is generic over the
//! scalar type through [`Real`]; the stochastic layer ([`sim`], [`tally`])
//! and the parameter search ([`optimize`]) work in `f64`. Concrete `f64`
//! aliases for the generic types live at the crate root.

pub mod error;
pub mod optimize;
pub mod qubit;
pub mod scalar;
pub mod sim;
pub mod source;
pub mod stats;
pub mod tally;
pub mod witness;

pub use error::{Error, Result};
pub use optimize::{optimize, Interval, OptimizerSettings, Optimum, SearchBounds, StateSearch};
pub use qubit::{
    build_a, build_b, decompose_b, expectation, expectation_sq, min_eigenvalue, projector,
    Eigen2, HermitianOp2, ObservableParams, ProjectorDecomposition, QubitState,
};
pub use scalar::Real;
pub use sim::{purity_run, simulate_run, MeasuredPurity, PurityRunConfig, RawTally, RunConfig, SimulatedRun};
pub use source::{
    fit_source, purity_stats, theta_given_n, theta_given_n_binomial, ClickProbabilities,
    DetectionModel, PhotonNumberDist, PurityStats, SourceDiagnosis, SourceVerdict,
};
pub use stats::{binomial_uncertainty, format_with_uncertainty, EstimateWithUncertainty};
pub use tally::{estimate_from_tallies, RunResult, SettingTally};
pub use witness::{
    classify, d_minus_closed_form, feasibility_window, predict, significance, FeasibilityWindow,
    TestPrediction, Verdict,
};

pub type State = QubitState<f64>;
pub type Operator = HermitianOp2<f64>;
pub type Params = ObservableParams<f64>;
pub type Prediction = TestPrediction<f64>;
pub type Window = FeasibilityWindow<f64>;
pub type Detection = DetectionModel<f64>;
pub type SourceDist = PhotonNumberDist<f64>;
pub type Purity = PurityStats<f64>;
pub type Estimate = EstimateWithUncertainty<f64>;
