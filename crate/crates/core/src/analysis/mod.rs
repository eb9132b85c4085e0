//! Post-processing of simulation output.

mod average;
mod compare;
mod enhancement;
mod fit;
mod spatial;
mod spectrum;

pub use average::{ensemble_average, EnsembleAverage};
pub use compare::{
    compare_runs, interpolate, ComparisonReport, ObservableComparison, COMPARED_POPULATIONS, STEADY_FRACTION,
    TIE_TOLERANCE,
};
pub use enhancement::{decay_enhancement, decay_enhancement_dipole, phasor};
pub use fit::{
    disorder_model, fit_disorder_onset, fit_logistic, logistic, FitParam, FitResult, DISORDER_PARAMS,
    LOGISTIC_PARAMS,
};
pub use spatial::sign_correlation_length;
pub use spectrum::{windowed_spectrum, Spectrum, MIN_WINDOW_SAMPLES};
