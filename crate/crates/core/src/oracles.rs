//! Ground-truth generators for [`ContextStatistics`].
//!
//! Three families: finite Kolmogorov spaces (conditioning by Bayes' formula,
//! so the coefficients vanish), a qubit measured in two bases (Born rule,
//! doubly stochastic transitions, trigonometric coefficients), and synthetic
//! instances built by pushing target coefficients through the forward map.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    predict_outcome, ContextStatistics, LambdaPair, ProbabilityPair, TransitionMatrix, TOL_DEGENERATE, TOL_EXACT,
};
use crate::error::{Error, Result};
use crate::rng::{substream, tag};

/// Rejection bound for the synthetic generators.
pub const MAX_GENERATION_RETRIES: usize = 10_000;
/// Largest point count drawn by [`random_model`] for the classical family.
pub const MAX_KOLMOGOROV_POINTS: usize = 16;

/// Elementary event with its weight and the (1-based) outcomes of `A` and `B` on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementaryEvent {
    pub weight: f64,
    pub a: u8,
    pub b: u8,
}

/// A finite probability space carrying two dichotomic random variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovModel {
    pub points: Vec<ElementaryEvent>,
}

impl KolmogorovModel {
    pub fn new(points: Vec<ElementaryEvent>) -> Result<Self> {
        let model = Self { points };
        model.validate()?;
        Ok(model)
    }

    /// Checks weights and labels. Empty filtrations are reported by [`classical_statistics`].
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidInput("Kolmogorov model has no points".into()));
        }
        for p in &self.points {
            if !p.weight.is_finite() || p.weight < 0.0 {
                return Err(Error::InvalidInput(format!("negative or non-finite weight {}", p.weight)));
            }
            if !(1..=2).contains(&p.a) || !(1..=2).contains(&p.b) {
                return Err(Error::InvalidInput(format!("outcome labels ({}, {}) must be 1 or 2", p.a, p.b)));
            }
        }
        let total: f64 = self.points.iter().map(|p| p.weight).sum();
        if (total - 1.0).abs() > TOL_EXACT {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    /// The four-point model with prior (0.3, 0.7) and rows (0.2, 0.8), (0.6, 0.4).
    pub fn preset_e2() -> Self {
        let ev = |weight, a, b| ElementaryEvent { weight, a, b };
        Self { points: vec![ev(0.06, 1, 1), ev(0.24, 2, 1), ev(0.42, 1, 2), ev(0.28, 2, 2)] }
    }
}

/// Pure qubit state `cos(alpha)|a1> + e^{i phi} sin(alpha)|a2>` measured in the
/// `A` basis and in the `B` basis
/// `b1 = cos(r)|a1> + e^{i s} sin(r)|a2>`, `b2 = -e^{-i s} sin(r)|a1> + cos(r)|a2>`
/// with `r = b_rotation` and `s = b_phase`. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitModel {
    pub alpha: f64,
    pub phi: f64,
    pub b_rotation: f64,
    pub b_phase: f64,
}

impl QubitModel {
    pub fn validate(&self) -> Result<()> {
        if [self.alpha, self.phi, self.b_rotation, self.b_phase].iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput("qubit angles must be finite".into()))
        }
    }

    fn state(&self) -> [Complex64; 2] {
        [Complex64::new(self.alpha.cos(), 0.0), Complex64::from_polar(self.alpha.sin(), self.phi)]
    }

    fn b_basis(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.b_rotation.sin_cos();
        [
            [Complex64::new(c, 0.0), Complex64::from_polar(s, self.b_phase)],
            [-Complex64::from_polar(s, -self.b_phase), Complex64::new(c, 0.0)],
        ]
    }
}

/// Prior, transition and target coefficients; the outcome comes from the forward map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticModel {
    pub prior: ProbabilityPair,
    pub transition: TransitionMatrix,
    pub target_lambda: LambdaPair,
}

impl SyntheticModel {
    /// Picks `lambda_2` so that the predicted outcome is normalized.
    pub fn with_companion(prior: ProbabilityPair, transition: TransitionMatrix, lambda1: f64) -> Result<Self> {
        let w1 = (prior.0[0] * prior.0[1] * transition.0[0][0] * transition.0[1][0]).sqrt();
        let w2 = (prior.0[0] * prior.0[1] * transition.0[0][1] * transition.0[1][1]).sqrt();
        let lambda2 = if w2 > TOL_DEGENERATE {
            -lambda1 * w1 / w2
        } else if (w1 * lambda1).abs() <= TOL_DEGENERATE {
            0.0
        } else {
            return Err(Error::Inconsistent(format!(
                "no companion coefficient normalizes lambda_1 = {lambda1}: second interference weight vanishes"
            )));
        };
        Ok(Self { prior, transition, target_lambda: LambdaPair::new(lambda1, lambda2)? })
    }
}

/// Serializable description of any oracle instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelDescriptor {
    Classical(KolmogorovModel),
    Qubit(QubitModel),
    Synthetic(SyntheticModel),
}

impl ModelDescriptor {
    /// Exact statistics of the model.
    pub fn statistics(&self) -> Result<ContextStatistics> {
        match self {
            ModelDescriptor::Classical(m) => classical_statistics(m),
            ModelDescriptor::Qubit(m) => qubit_statistics(m),
            ModelDescriptor::Synthetic(m) => synthesize_statistics(m),
        }
    }
}

/// Families accepted by [`random_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Classical,
    Qubit,
    SyntheticTrigonometric,
    SyntheticHyperbolic,
}

fn pair_from_sums(first: f64, second: f64) -> ProbabilityPair {
    let total = first + second;
    ProbabilityPair([first / total, second / total])
}

/// Statistics of a finite Kolmogorov model: `p_i = P(B = b_i)`,
/// `p_ij = P(A = a_j, B = b_i) / P(B = b_i)` and `p_j^a = P(A = a_j)`.
pub fn classical_statistics(model: &KolmogorovModel) -> Result<ContextStatistics> {
    model.validate()?;
    let mut joint = [[0.0f64; 2]; 2];
    let mut marginal_a = [0.0f64; 2];
    for p in &model.points {
        let (i, j) = (usize::from(p.b - 1), usize::from(p.a - 1));
        joint[i][j] += p.weight;
        marginal_a[j] += p.weight;
    }
    let marginal_b = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    for (i, &m) in marginal_b.iter().enumerate() {
        if m <= 0.0 {
            return Err(Error::ZeroFiltration(i + 1));
        }
    }
    let rows = [0, 1].map(|i| [joint[i][0] / marginal_b[i], joint[i][1] / marginal_b[i]]);
    ContextStatistics::new(
        pair_from_sums(marginal_b[0], marginal_b[1]),
        TransitionMatrix::new(rows)?,
        pair_from_sums(marginal_a[0], marginal_a[1]),
    )
}

fn inner(v: &[Complex64; 2], w: &[Complex64; 2]) -> Complex64 {
    v[0].conj() * w[0] + v[1].conj() * w[1]
}

/// Born-rule statistics: `p_j^a = |<a_j|psi>|^2`, `p_i = |<b_i|psi>|^2`, `p_ij = |<a_j|b_i>|^2`.
pub fn qubit_statistics(model: &QubitModel) -> Result<ContextStatistics> {
    model.validate()?;
    let psi = model.state();
    let basis_b = model.b_basis();
    let basis_a = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    let prior = basis_b.map(|b| inner(&b, &psi).norm_sqr());
    let outcome = basis_a.map(|a| inner(&a, &psi).norm_sqr());
    let rows = basis_b.map(|b| basis_a.map(|a| inner(&a, &b).norm_sqr()));
    ContextStatistics::new(
        pair_from_sums(prior[0], prior[1]),
        TransitionMatrix::new(rows)?,
        pair_from_sums(outcome[0], outcome[1]),
    )
}

/// Pushes the target coefficients through the forward map.
pub fn synthesize_statistics(model: &SyntheticModel) -> Result<ContextStatistics> {
    let outcome = predict_outcome(&model.prior, &model.transition, &model.target_lambda).map_err(|e| match e {
        Error::OutOfRange { component, value } => Error::InfeasibleLambda { component, value },
        other => other,
    })?;
    let residual = (outcome.0[0] + outcome.0[1] - 1.0).abs();
    if residual > TOL_EXACT {
        return Err(Error::Inconsistent(format!(
            "target coefficients {:?} give an outcome summing to {}",
            model.target_lambda.0,
            outcome.0[0] + outcome.0[1]
        )));
    }
    ContextStatistics::new(model.prior, model.transition, outcome)
}

/// Deterministic draw from a model family.
pub fn random_model(kind: ModelKind, seed: u64) -> Result<ModelDescriptor> {
    let mut rng = substream(seed, tag::MODEL);
    match kind {
        ModelKind::Classical => Ok(ModelDescriptor::Classical(random_kolmogorov(&mut rng))),
        ModelKind::Qubit => Ok(ModelDescriptor::Qubit(QubitModel {
            alpha: rng.random_range(0.0..=FRAC_PI_2),
            phi: rng.random_range(0.0..2.0 * PI),
            b_rotation: rng.random_range(0.0..=FRAC_PI_2),
            b_phase: rng.random_range(0.0..2.0 * PI),
        })),
        ModelKind::SyntheticTrigonometric => random_synthetic(&mut rng, false).map(ModelDescriptor::Synthetic),
        ModelKind::SyntheticHyperbolic => random_synthetic(&mut rng, true).map(ModelDescriptor::Synthetic),
    }
}

fn random_kolmogorov<R: Rng>(rng: &mut R) -> KolmogorovModel {
    let n = rng.random_range(2..=MAX_KOLMOGOROV_POINTS);
    // Weights in (0, 1] before normalization.
    let raw: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let mut points: Vec<ElementaryEvent> = raw
        .iter()
        .map(|w| ElementaryEvent { weight: w / total, a: rng.random_range(1..=2), b: rng.random_range(1..=2) })
        .collect();
    // Both filtrations must be nonempty.
    while points.iter().all(|p| p.b == points[0].b) {
        for p in points.iter_mut() {
            p.b = rng.random_range(1..=2);
        }
    }
    KolmogorovModel { points }
}

fn random_synthetic<R: Rng>(rng: &mut R, hyperbolic: bool) -> Result<SyntheticModel> {
    for _ in 0..MAX_GENERATION_RETRIES {
        let prior = ProbabilityPair::from_first(rng.random_range(0.01..0.99))?;
        let transition = TransitionMatrix::new([0, 1].map(|_| {
            let p = rng.random_range(0.01..0.99);
            [p, 1.0 - p]
        }))?;
        let magnitude = if hyperbolic { rng.random_range(1.0..4.0) } else { rng.random_range(0.0..=1.0) };
        let lambda1 = if rng.random::<bool>() { magnitude } else { -magnitude };
        let Ok(model) = SyntheticModel::with_companion(prior, transition, lambda1) else { continue };
        let lambda2 = model.target_lambda.0[1].abs();
        let in_family = if hyperbolic { lambda1.abs() > 1.0 && lambda2 > 1.0 } else { lambda2 <= 1.0 };
        if in_family && synthesize_statistics(&model).is_ok() {
            return Ok(model);
        }
    }
    Err(Error::GenerationExhausted(MAX_GENERATION_RETRIES))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{
        check_double_stochastic, classify_theory, lambda_from_statistics, total_probability, DegeneracyPolicy,
        TheoryClass,
    };
    use std::f64::consts::FRAC_PI_4;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn bayes_on_four_points() {
        let stats = classical_statistics(&KolmogorovModel::preset_e2()).unwrap();
        for (got, want) in stats.prior.0.iter().zip([0.3, 0.7]) {
            assert!(close(*got, want, 1e-15));
        }
        let want_rows = [[0.2, 0.8], [0.6, 0.4]];
        for (got, want) in stats.transition.0.iter().flatten().zip(want_rows.iter().flatten()) {
            assert!(close(*got, *want, 1e-15));
        }
        assert!(close(stats.outcome.0[0], 0.48, 1e-15) && close(stats.outcome.0[1], 0.52, 1e-15));
        let lambda = lambda_from_statistics(&stats, DegeneracyPolicy::default()).unwrap();
        assert!(lambda.0.iter().all(|l| l.abs() <= 1e-12));
    }

    #[test]
    fn empty_filtration_is_reported() {
        let ev = |weight, a, b| ElementaryEvent { weight, a, b };
        let model = KolmogorovModel::new(vec![ev(1.0, 1, 1), ev(0.0, 2, 2)]).unwrap();
        assert_eq!(classical_statistics(&model).unwrap_err(), Error::ZeroFiltration(2));
    }

    #[test]
    fn deterministic_coupling() {
        let ev = |weight, a, b| ElementaryEvent { weight, a, b };
        let stats = classical_statistics(&KolmogorovModel::new(vec![ev(0.5, 1, 1), ev(0.5, 2, 2)]).unwrap()).unwrap();
        assert_eq!(stats.prior.0, [0.5, 0.5]);
        assert_eq!(stats.transition.0, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(stats.outcome.0, [0.5, 0.5]);
    }

    #[test]
    fn qubit_e1() {
        let m = QubitModel { alpha: PI / 6.0, phi: FRAC_PI_2, b_rotation: FRAC_PI_4, b_phase: 0.0 };
        let stats = qubit_statistics(&m).unwrap();
        assert!(stats.prior.0.iter().all(|p| close(*p, 0.5, 1e-15)));
        assert!(stats.transition.0.iter().flatten().all(|p| close(*p, 0.5, 1e-15)));
        assert!(close(stats.outcome.0[0], 0.75, 1e-15) && close(stats.outcome.0[1], 0.25, 1e-15));
        let lambda = lambda_from_statistics(&stats, DegeneracyPolicy::default()).unwrap();
        assert!(close(lambda.0[0], 0.5, 1e-12) && close(lambda.0[1], -0.5, 1e-12), "{lambda:?}");
    }

    #[test]
    fn qubit_aligned_bases_are_degenerate() {
        let m = QubitModel { alpha: 0.4, phi: 1.0, b_rotation: 0.0, b_phase: 0.0 };
        let stats = qubit_statistics(&m).unwrap();
        assert_eq!(stats.transition.0, [[1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(
            lambda_from_statistics(&stats, DegeneracyPolicy::Reject),
            Err(Error::DegenerateContext { .. })
        ));
        // Outcome equals the prior-weighted rows here, so the default policy yields zero.
        assert_eq!(lambda_from_statistics(&stats, DegeneracyPolicy::ZeroLambda).unwrap(), LambdaPair::ZERO);
    }

    #[test]
    fn qubit_pure_state_is_extremal() {
        for phase in [0.0, 0.7, 2.5] {
            let m = QubitModel { alpha: 0.0, phi: 0.3, b_rotation: FRAC_PI_4, b_phase: phase };
            let stats = qubit_statistics(&m).unwrap();
            assert_eq!(stats.outcome.0, [1.0, 0.0]);
            let lambda = lambda_from_statistics(&stats, DegeneracyPolicy::default()).unwrap();
            assert!(close(lambda.0[0], 1.0, 1e-12) && close(lambda.0[1], -1.0, 1e-12), "{lambda:?}");
        }
    }

    #[test]
    fn synthesize_examples() {
        let prior = ProbabilityPair::new(0.5, 0.5).unwrap();
        let transition = TransitionMatrix::new([[0.8, 0.2], [0.2, 0.8]]).unwrap();
        let model = SyntheticModel { prior, transition, target_lambda: LambdaPair([1.25, -1.25]) };
        let stats = synthesize_statistics(&model).unwrap();
        assert!(close(stats.outcome.0[0], 1.0, 1e-15) && close(stats.outcome.0[1], 0.0, 1e-15));
        let lambda = lambda_from_statistics(&stats, DegeneracyPolicy::default()).unwrap();
        assert_eq!(classify_theory(&lambda, 1e-9), TheoryClass::Hyperbolic);

        let model = SyntheticModel { target_lambda: LambdaPair([2.0, -2.0]), ..model };
        assert!(matches!(
            synthesize_statistics(&model),
            Err(Error::InfeasibleLambda { component: 1, value }) if close(value, 1.3, 1e-12)
        ));

        let model = SyntheticModel { target_lambda: LambdaPair::ZERO, ..model };
        assert_eq!(synthesize_statistics(&model).unwrap().outcome, total_probability(&prior, &transition));
    }

    #[test]
    fn synthesize_rejects_unnormalized_targets() {
        let prior = ProbabilityPair::new(0.5, 0.5).unwrap();
        let transition = TransitionMatrix::new([[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let model = SyntheticModel { prior, transition, target_lambda: LambdaPair([0.5, 0.5]) };
        assert!(matches!(synthesize_statistics(&model), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn companion_normalizes() {
        let prior = ProbabilityPair::new(0.3, 0.7).unwrap();
        let transition = TransitionMatrix::new([[0.2, 0.8], [0.6, 0.4]]).unwrap();
        let model = SyntheticModel::with_companion(prior, transition, 0.5).unwrap();
        let stats = synthesize_statistics(&model).unwrap();
        assert!((stats.outcome.0[0] + stats.outcome.0[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_model_is_deterministic() {
        for kind in [ModelKind::Classical, ModelKind::Qubit, ModelKind::SyntheticTrigonometric, ModelKind::SyntheticHyperbolic] {
            assert_eq!(random_model(kind, 42).unwrap(), random_model(kind, 42).unwrap());
        }
        assert_ne!(random_model(ModelKind::Qubit, 1).unwrap(), random_model(ModelKind::Qubit, 2).unwrap());
    }

    #[test]
    fn random_classical_respects_family_invariants() {
        for seed in 0..500 {
            let ModelDescriptor::Classical(m) = random_model(ModelKind::Classical, seed).unwrap() else {
                unreachable!()
            };
            assert!(m.points.len() <= MAX_KOLMOGOROV_POINTS);
            m.validate().unwrap();
            classical_statistics(&m).unwrap();
        }
    }

    #[test]
    fn random_qubit_is_balanced() {
        for seed in 0..2_000 {
            let stats = random_model(ModelKind::Qubit, seed).unwrap().statistics().unwrap();
            let report = check_double_stochastic(&stats.transition, 1e-12);
            assert!(report.is_double_stochastic, "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn random_hyperbolic_never_classical() {
        for seed in 0..300 {
            let stats = random_model(ModelKind::SyntheticHyperbolic, seed).unwrap().statistics().unwrap();
            let lambda = lambda_from_statistics(&stats, DegeneracyPolicy::default()).unwrap();
            let class = classify_theory(&lambda, 1e-6);
            assert!(matches!(class, TheoryClass::Hyperbolic | TheoryClass::Boundary { .. }), "seed {seed}: {class:?}");
        }
    }
}
