//! Lift of trigonometric statistics to complex amplitudes.
//!
//! With `a^2 = p_1 p_1j`, `b^2 = p_2 p_2j` and `c^2 = p_j^a`, the cosine form of
//! the transformation is the parallelogram identity `c^2 = a^2 + b^2 + 2ab cos(theta)`,
//! so `psi_j = a + e^{i theta_j} b` satisfies `|psi_j|^2 = p_j^a`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{check_double_stochastic, ContextStatistics, Phase, PhasePair, ProbabilityPair};
use crate::error::{Error, Result};

/// Amplitudes `(psi_1, psi_2)`, one per `A` outcome, and the phases used to build them.
///
/// The first term of each amplitude is real and nonnegative, which fixes the global phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePair {
    pub psi: [Complex64; 2],
    pub theta: [f64; 2],
}

impl AmplitudePair {
    pub fn probabilities(&self) -> [f64; 2] {
        self.psi.map(|z| z.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi[0].norm_sqr() + self.psi[1].norm_sqr()
    }
}

fn trig_thetas(phases: &PhasePair) -> Result<[f64; 2]> {
    let mut theta = [0.0; 2];
    for (j, phase) in phases.0.iter().enumerate() {
        match *phase {
            Phase::Trig { theta: t } => theta[j] = t,
            Phase::Hyper { .. } => return Err(Error::NonTrigonometric(j + 1)),
        }
    }
    Ok(theta)
}

pub fn lift_to_amplitudes(stats: &ContextStatistics, phases: &PhasePair) -> Result<AmplitudePair> {
    let theta = trig_thetas(phases)?;
    let (p, t) = (stats.prior.0, stats.transition.0);
    let psi = [0, 1].map(|j| {
        let a = (p[0] * t[0][j]).sqrt();
        let b = (p[1] * t[1][j]).sqrt();
        Complex64::new(a, 0.0) + Complex64::from_polar(b, theta[j])
    });
    Ok(AmplitudePair { psi, theta })
}

/// `max_j | |psi_j|^2 - p_j^a |`.
pub fn born_residual(amplitudes: &AmplitudePair, outcome: &ProbabilityPair) -> f64 {
    let probs = amplitudes.probabilities();
    (probs[0] - outcome.0[0]).abs().max((probs[1] - outcome.0[1]).abs())
}

/// Residual `|cos(theta_1) + cos(theta_2)|` of the phase constraint for balanced statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConstraint {
    pub residual: f64,
    pub holds: bool,
}

/// Double stochasticity makes both interference weights equal, so consistent
/// trigonometric phases must satisfy `cos(theta_1) = -cos(theta_2)`.
pub fn balance_phase_constraint(stats: &ContextStatistics, phases: &PhasePair, tol: f64) -> Result<PhaseConstraint> {
    let balance = check_double_stochastic(&stats.transition, tol);
    if !balance.is_double_stochastic {
        return Err(Error::NotBalanced(balance.max_column_residual()));
    }
    let theta = trig_thetas(phases)?;
    let residual = (theta[0].cos() + theta[1].cos()).abs();
    Ok(PhaseConstraint { residual, holds: residual <= tol })
}
