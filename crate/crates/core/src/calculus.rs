//! Transformation of probabilities under a change of context.
//!
//! The outcome probabilities of a dichotomic observable `A` in a context `S`
//! are related to the filtration probabilities `p_i` of a second observable
//! `B` and to the transition matrix `p_ij = P(A = a_j | S_i^b)` through
//!
//! ```text
//! p_j^a = p_1 p_1j + p_2 p_2j + 2 sqrt(p_1 p_2 p_1j p_2j) * lambda_j
//! ```
//!
//! where `lambda_j` is the context-transition coefficient. `lambda = 0` is the
//! classical formula of total probability; `|lambda| <= 1` admits a cosine
//! parametrization and `|lambda| > 1` a hyperbolic cosine one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for checks on analytic (non-sampled) inputs.
pub const TOL_EXACT: f64 = 1e-9;
/// Cutoff below which an interference weight counts as zero.
pub const TOL_DEGENERATE: f64 = 1e-12;
/// Default classification band for analytic coefficients.
pub const EPS_CLASS_DEFAULT: f64 = 1e-6;

fn check_probability(what: &str, p: f64) -> Result<()> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("{what} = {p} is not a probability")));
    }
    Ok(())
}

/// A dichotomic observable with its two outcome labels, in index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DichotomicObservable {
    pub name: String,
    pub value_labels: [String; 2],
}

impl DichotomicObservable {
    pub fn new(name: impl Into<String>, first: impl Into<String>, second: impl Into<String>) -> Result<Self> {
        let obs = Self { name: name.into(), value_labels: [first.into(), second.into()] };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.value_labels[0] == self.value_labels[1] {
            return Err(Error::InvalidInput(format!(
                "observable '{}' has duplicate label '{}'",
                self.name, self.value_labels[0]
            )));
        }
        Ok(())
    }
}

/// Two probabilities of complementary alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityPair(pub [f64; 2]);

impl ProbabilityPair {
    /// Validates that both entries are probabilities summing to one within [`TOL_EXACT`].
    pub fn new(first: f64, second: f64) -> Result<Self> {
        let pair = Self([first, second]);
        pair.validate(TOL_EXACT)?;
        Ok(pair)
    }

    /// The pair `(p, 1 - p)`.
    pub fn from_first(p: f64) -> Result<Self> {
        Self::new(p, 1.0 - p)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        check_probability("probability", self.0[0])?;
        check_probability("probability", self.0[1])?;
        let residual = (self.0[0] + self.0[1] - 1.0).abs();
        if residual > tol {
            return Err(Error::InvalidInput(format!(
                "pair ({}, {}) does not sum to 1 (residual {residual})",
                self.0[0], self.0[1]
            )));
        }
        Ok(())
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }
}

/// 2x2 matrix `p_ij`: row `i` is the filtered context `S_i^b`, column `j` the `A` outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransitionMatrix(pub [[f64; 2]; 2]);

impl TransitionMatrix {
    /// Entries in [0, 1] and both rows summing to one within [`TOL_EXACT`].
    pub fn new(rows: [[f64; 2]; 2]) -> Result<Self> {
        let m = Self::raw(rows)?;
        let report = check_row_stochastic(&m, TOL_EXACT);
        if !report.is_stochastic {
            return Err(Error::InvalidInput(format!(
                "transition matrix rows do not sum to 1 (residuals {:?})",
                report.row_residuals
            )));
        }
        Ok(m)
    }

    /// Only checks that every entry lies in [0, 1]; rows may fail to sum to one.
    pub fn raw(rows: [[f64; 2]; 2]) -> Result<Self> {
        for row in &rows {
            for &p in row {
                check_probability("transition entry", p)?;
            }
        }
        Ok(Self(rows))
    }

    /// `[[p, 1-p], [1-q, q]]`.
    pub fn from_diagonal(p: f64, q: f64) -> Result<Self> {
        Self::new([[p, 1.0 - p], [1.0 - q, q]])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn rows(&self) -> &[[f64; 2]; 2] {
        &self.0
    }
}

/// Complete probability data for one (context, A, B) triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextStatistics {
    pub prior: ProbabilityPair,
    pub transition: TransitionMatrix,
    pub outcome: ProbabilityPair,
}

impl ContextStatistics {
    pub fn new(prior: ProbabilityPair, transition: TransitionMatrix, outcome: ProbabilityPair) -> Result<Self> {
        let stats = Self { prior, transition, outcome };
        stats.validate(TOL_EXACT)?;
        Ok(stats)
    }

    pub fn from_parts(prior: [f64; 2], rows: [[f64; 2]; 2], outcome: [f64; 2]) -> Result<Self> {
        Self::new(
            ProbabilityPair::new(prior[0], prior[1])?,
            TransitionMatrix::new(rows)?,
            ProbabilityPair::new(outcome[0], outcome[1])?,
        )
    }

    /// Re-checks every invariant with the given normalization tolerance.
    pub fn validate(&self, tol: f64) -> Result<()> {
        self.prior.validate(tol)?;
        self.outcome.validate(tol)?;
        TransitionMatrix::raw(self.transition.0)?;
        let report = check_row_stochastic(&self.transition, tol);
        if !report.is_stochastic {
            return Err(Error::InvalidInput(format!(
                "transition matrix rows do not sum to 1 (residuals {:?})",
                report.row_residuals
            )));
        }
        Ok(())
    }

    /// `sqrt(p_1 p_2 p_1j p_2j)`, half the coefficient of `lambda_j`.
    pub fn interference_weight(&self, j: usize) -> f64 {
        interference_weight(&self.prior, &self.transition, j)
    }
}

/// Context-transition coefficients `(lambda_1, lambda_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LambdaPair(pub [f64; 2]);

impl LambdaPair {
    pub const ZERO: LambdaPair = LambdaPair([0.0, 0.0]);

    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        if !l1.is_finite() || !l2.is_finite() {
            return Err(Error::InvalidInput(format!("lambda ({l1}, {l2}) is not finite")));
        }
        Ok(Self([l1, l2]))
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }
}

/// What `lambda_from_statistics` does when both numerator and denominator vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyPolicy {
    /// `lambda_j := 0`; a vanishing interference weight carries no information.
    #[default]
    ZeroLambda,
    /// Report `DegenerateContext` even for 0/0.
    Reject,
}

/// Sign of a hyperbolic coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// One phase component: `lambda = cos(theta)` or `lambda = sign * cosh(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phase {
    /// `theta` in `[0, pi]`.
    Trig { theta: f64 },
    /// `theta >= 0`.
    Hyper { sign: Sign, theta: f64 },
}

impl Phase {
    /// The coefficient this phase encodes.
    pub fn lambda(&self) -> f64 {
        match *self {
            Phase::Trig { theta } => theta.cos(),
            Phase::Hyper { sign, theta } => sign.value() * theta.cosh(),
        }
    }

    pub fn theta(&self) -> f64 {
        match *self {
            Phase::Trig { theta } | Phase::Hyper { theta, .. } => theta,
        }
    }

    pub fn is_trigonometric(&self) -> bool {
        matches!(self, Phase::Trig { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhasePair(pub [Phase; 2]);

impl PhasePair {
    pub fn trig(theta1: f64, theta2: f64) -> Self {
        Self([Phase::Trig { theta: theta1 }, Phase::Trig { theta: theta2 }])
    }

    pub fn lambda(&self) -> LambdaPair {
        LambdaPair([self.0[0].lambda(), self.0[1].lambda()])
    }
}

/// Verdict of [`classify_theory`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TheoryClass {
    Classical,
    Trigonometric,
    Hyperbolic,
    /// One component trigonometric, the other (`hyperbolic_component`, 1-based) hyperbolic.
    HyperTrigonometric { hyperbolic_component: usize },
    /// Components (1-based) lying within the band around `|lambda| = 1`.
    Boundary { components: Vec<usize> },
}

impl TheoryClass {
    pub fn name(&self) -> &'static str {
        match self {
            TheoryClass::Classical => "Classical",
            TheoryClass::Trigonometric => "Trigonometric",
            TheoryClass::Hyperbolic => "Hyperbolic",
            TheoryClass::HyperTrigonometric { .. } => "HyperTrigonometric",
            TheoryClass::Boundary { .. } => "Boundary",
        }
    }

    /// Classes whose coefficients admit a cosine parametrization.
    pub fn admits_amplitudes(&self) -> bool {
        matches!(self, TheoryClass::Classical | TheoryClass::Trigonometric)
    }
}

/// Row-sum check of a transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub row_residuals: [f64; 2],
    pub is_stochastic: bool,
    pub tolerance: f64,
}

/// Row and column sum check of a transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub row_residuals: [f64; 2],
    pub column_residuals: [f64; 2],
    pub is_stochastic: bool,
    pub is_double_stochastic: bool,
    pub tolerance: f64,
}

impl BalanceReport {
    pub fn max_column_residual(&self) -> f64 {
        self.column_residuals[0].max(self.column_residuals[1])
    }
}

fn interference_weight(prior: &ProbabilityPair, transition: &TransitionMatrix, j: usize) -> f64 {
    (prior.0[0] * prior.0[1] * transition.0[0][j] * transition.0[1][j]).sqrt()
}

fn classical_term(prior: &ProbabilityPair, transition: &TransitionMatrix, j: usize) -> f64 {
    prior.0[0] * transition.0[0][j] + prior.0[1] * transition.0[1][j]
}

/// Snaps values within [`TOL_EXACT`] of [0, 1] onto the interval; `None` if further out.
fn snap_probability(value: f64) -> Option<f64> {
    if !(-TOL_EXACT..=1.0 + TOL_EXACT).contains(&value) {
        None
    } else {
        Some(value.clamp(0.0, 1.0))
    }
}

/// Outcome probabilities predicted from the prior, the transition matrix and `lambda`.
pub fn predict_outcome(
    prior: &ProbabilityPair,
    transition: &TransitionMatrix,
    lambda: &LambdaPair,
) -> Result<ProbabilityPair> {
    let mut out = [0.0; 2];
    for (j, slot) in out.iter_mut().enumerate() {
        let value = classical_term(prior, transition, j)
            + 2.0 * interference_weight(prior, transition, j) * lambda.0[j];
        *slot = snap_probability(value).ok_or(Error::OutOfRange { component: j + 1, value })?;
    }
    Ok(ProbabilityPair(out))
}

/// Formula of total probability, the `lambda = 0` case of [`predict_outcome`].
pub fn total_probability(prior: &ProbabilityPair, transition: &TransitionMatrix) -> ProbabilityPair {
    ProbabilityPair([0, 1].map(|j| classical_term(prior, transition, j).clamp(0.0, 1.0)))
}

/// Inverts [`predict_outcome`] for the coefficients explaining `stats.outcome`.
pub fn lambda_from_statistics(stats: &ContextStatistics, policy: DegeneracyPolicy) -> Result<LambdaPair> {
    let mut lambda = [0.0; 2];
    for (j, slot) in lambda.iter_mut().enumerate() {
        let numerator = stats.outcome.0[j] - classical_term(&stats.prior, &stats.transition, j);
        let denominator = 2.0 * stats.interference_weight(j);
        *slot = if denominator > TOL_DEGENERATE {
            numerator / denominator
        } else if numerator.abs() > TOL_DEGENERATE || policy == DegeneracyPolicy::Reject {
            return Err(Error::DegenerateContext { component: j + 1, numerator });
        } else {
            0.0
        };
    }
    Ok(LambdaPair(lambda))
}

/// Classifies a coefficient pair as classical, trigonometric, hyperbolic, mixed or boundary.
pub fn classify_theory(lambda: &LambdaPair, eps_class: f64) -> TheoryClass {
    let abs = lambda.0.map(f64::abs);
    if abs[0].max(abs[1]) <= eps_class {
        return TheoryClass::Classical;
    }
    let small = abs.map(|a| a <= 1.0 - eps_class);
    let large = abs.map(|a| a >= 1.0 + eps_class);
    match (small, large) {
        ([true, true], _) => TheoryClass::Trigonometric,
        (_, [true, true]) => TheoryClass::Hyperbolic,
        ([true, false], [false, true]) => TheoryClass::HyperTrigonometric { hyperbolic_component: 2 },
        ([false, true], [true, false]) => TheoryClass::HyperTrigonometric { hyperbolic_component: 1 },
        _ => TheoryClass::Boundary {
            components: (0..2).filter(|&j| (abs[j] - 1.0).abs() < eps_class).map(|j| j + 1).collect(),
        },
    }
}

pub fn check_row_stochastic(transition: &TransitionMatrix, tol: f64) -> RowReport {
    let m = transition.0;
    let row_residuals = [(m[0][0] + m[0][1] - 1.0).abs(), (m[1][0] + m[1][1] - 1.0).abs()];
    RowReport { row_residuals, is_stochastic: row_residuals.iter().all(|&r| r <= tol), tolerance: tol }
}

pub fn check_double_stochastic(transition: &TransitionMatrix, tol: f64) -> BalanceReport {
    let rows = check_row_stochastic(transition, tol);
    let m = transition.0;
    let column_residuals = [(m[0][0] + m[1][0] - 1.0).abs(), (m[0][1] + m[1][1] - 1.0).abs()];
    let columns_ok = column_residuals.iter().all(|&r| r <= tol);
    BalanceReport {
        row_residuals: rows.row_residuals,
        column_residuals,
        is_stochastic: rows.is_stochastic,
        is_double_stochastic: rows.is_stochastic && columns_ok,
        tolerance: tol,
    }
}

fn phase_of(lambda: f64) -> Phase {
    // Coefficients within TOL_EXACT of +-1 stay on the trigonometric branch.
    if lambda.abs() <= 1.0 + TOL_EXACT {
        Phase::Trig { theta: lambda.clamp(-1.0, 1.0).acos() }
    } else {
        let sign = if lambda > 0.0 { Sign::Plus } else { Sign::Minus };
        Phase::Hyper { sign, theta: lambda.abs().acosh() }
    }
}

/// Principal-branch phases: `theta = arccos(lambda)` in `[0, pi]`, or `arccosh|lambda|` with sign.
pub fn phase_parametrization(lambda: &LambdaPair) -> PhasePair {
    PhasePair(lambda.0.map(phase_of))
}

/// `sqrt(p1 p2 p11 p21) lambda_1 + sqrt(p1 p2 p12 p22) lambda_2`.
///
/// Outcome normalization together with row stochasticity forces this to zero
/// for any self-consistent statistics.
pub fn normalization_residual(stats: &ContextStatistics, lambda: &LambdaPair) -> f64 {
    stats.interference_weight(0) * lambda.0[0] + stats.interference_weight(1) * lambda.0[1]
}
