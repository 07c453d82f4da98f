//! wasm-bindgen bindings behind `www/index.html`.
//!
//! Each export returns a JSON document (or an error message) so the page can
//! stay plain JavaScript.

use ctxprob::io::to_canonical_json;
use ctxprob::oracles::{qubit_statistics, synthesize_statistics, QubitModel, SyntheticModel};
use ctxprob::sampling::{estimate_lambda, estimate_statistics, simulate_from_statistics, LambdaEstimate, SampleSizes};
use ctxprob::{
    check_double_stochastic, classify_theory, lambda_from_statistics, lift_to_amplitudes, phase_parametrization,
    AmplitudePair, BalanceReport, ContextStatistics, DegeneracyPolicy, LambdaPair, PhasePair, ProbabilityPair,
    TheoryClass, TransitionMatrix, EPS_CLASS_DEFAULT, TOL_EXACT,
};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Debug, Serialize)]
struct ContextView {
    statistics: ContextStatistics,
    classical_outcome: [f64; 2],
    lambda: LambdaPair,
    phases: PhasePair,
    theory_class: TheoryClass,
    balance: BalanceReport,
    amplitudes: Option<AmplitudePair>,
}

fn view(stats: ContextStatistics) -> ctxprob::Result<ContextView> {
    let lambda = lambda_from_statistics(&stats, DegeneracyPolicy::default())?;
    let phases = phase_parametrization(&lambda);
    let theory_class = classify_theory(&lambda, EPS_CLASS_DEFAULT);
    let amplitudes = if theory_class.admits_amplitudes() { lift_to_amplitudes(&stats, &phases).ok() } else { None };
    Ok(ContextView {
        classical_outcome: ctxprob::total_probability(&stats.prior, &stats.transition).0,
        balance: check_double_stochastic(&stats.transition, TOL_EXACT),
        statistics: stats,
        lambda,
        phases,
        theory_class,
        amplitudes,
    })
}

fn json<T: Serialize>(value: ctxprob::Result<T>) -> Result<String, String> {
    value.and_then(|v| to_canonical_json(&v)).map_err(|e| e.to_string())
}

/// Pushes `lambda1` (with its normalizing companion) through the forward map.
#[wasm_bindgen]
pub fn explore_coefficients(p1: f64, p11: f64, p21: f64, lambda1: f64) -> Result<String, String> {
    json((|| {
        let model = SyntheticModel::with_companion(
            ProbabilityPair::from_first(p1)?,
            TransitionMatrix::new([[p11, 1.0 - p11], [p21, 1.0 - p21]])?,
            lambda1,
        )?;
        view(synthesize_statistics(&model)?)
    })())
}

/// Born-rule statistics of a qubit and everything derived from them.
#[wasm_bindgen]
pub fn qubit_context(alpha: f64, phi: f64, b_rotation: f64, b_phase: f64) -> Result<String, String> {
    json(qubit_statistics(&QubitModel { alpha, phi, b_rotation, b_phase }).and_then(view))
}

#[derive(Debug, Serialize)]
struct SampledView {
    truth: LambdaPair,
    estimate: LambdaEstimate,
    frequencies: ContextStatistics,
}

/// Simulates the qubit experiments at ensemble size `n` and bootstraps the coefficients.
#[wasm_bindgen]
pub fn sample_qubit(
    alpha: f64,
    phi: f64,
    b_rotation: f64,
    b_phase: f64,
    n: u32,
    replicates: u32,
    seed: u32,
) -> Result<String, String> {
    json((|| {
        let stats = qubit_statistics(&QubitModel { alpha, phi, b_rotation, b_phase })?;
        let truth = lambda_from_statistics(&stats, DegeneracyPolicy::Reject)?;
        let counts = simulate_from_statistics(&stats, SampleSizes::uniform(u64::from(n)), u64::from(seed))?;
        let est = estimate_statistics(&counts)?;
        let estimate = estimate_lambda(&est, replicates as usize, u64::from(seed))?;
        Ok(SampledView { truth, estimate, frequencies: est.point })
    })())
}
