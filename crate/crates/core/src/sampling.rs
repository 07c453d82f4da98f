//! Finite-ensemble simulation of the three contextual experiments and
//! inference on the context-transition coefficients.
//!
//! A run measures `A` on an ensemble prepared under `S`, `B` on a second
//! ensemble prepared under `S`, and `A` on one ensemble per filtered context
//! `S_i^b`. The ensembles are independent; no sample is reused across contexts.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::calculus::{
    classify_theory, lambda_from_statistics, ContextStatistics, DegeneracyPolicy, LambdaPair, ProbabilityPair,
    TheoryClass, TransitionMatrix,
};
use crate::error::{Error, Result};
use crate::oracles::ModelDescriptor;
use crate::rng::{derive_seed, substream, tag};

/// Default number of bootstrap replicates.
pub const DEFAULT_REPLICATES: usize = 1000;
/// Two-sided level of the percentile intervals.
pub const CONFIDENCE_LEVEL: f64 = 0.95;

/// Ensemble sizes for the four experiments of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSizes {
    pub context: u64,
    pub filtration: u64,
    pub filtered: [u64; 2],
}

impl SampleSizes {
    pub fn uniform(n: u64) -> Self {
        Self { context: n, filtration: n, filtered: [n, n] }
    }
}

/// Tallies of `A` outcomes on one filtered ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredCounts {
    pub n: u64,
    pub a_counts: [u64; 2],
}

/// Raw tallies of one simulated or recorded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub n_context: u64,
    pub a_counts: [u64; 2],
    pub n_filtration: u64,
    pub b_counts: [u64; 2],
    pub filtered: [FilteredCounts; 2],
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDescriptor>,
}

impl CountsRecord {
    pub fn validate(&self) -> Result<()> {
        let check = |what: &str, n: u64, counts: [u64; 2]| {
            if counts[0].checked_add(counts[1]) != Some(n) {
                return Err(Error::InvalidInput(format!("{what} tallies {counts:?} do not sum to {n}")));
            }
            Ok(())
        };
        check("context", self.n_context, self.a_counts)?;
        check("filtration", self.n_filtration, self.b_counts)?;
        check("filtered 1", self.filtered[0].n, self.filtered[0].a_counts)?;
        check("filtered 2", self.filtered[1].n, self.filtered[1].a_counts)
    }

    pub fn sizes(&self) -> SampleSizes {
        SampleSizes {
            context: self.n_context,
            filtration: self.n_filtration,
            filtered: [self.filtered[0].n, self.filtered[1].n],
        }
    }
}

/// Binomial standard errors matching the layout of [`ContextStatistics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub prior: [f64; 2],
    pub transition: [[f64; 2]; 2],
    pub outcome: [f64; 2],
}

/// Relative frequencies and their binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedStatistics {
    pub point: ContextStatistics,
    pub stderr: StandardErrors,
    pub sizes: SampleSizes,
}

/// Bootstrap settings recorded alongside an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapMethod {
    pub replicates: usize,
    pub seed: u64,
    /// Replicates whose resampled statistics were degenerate.
    pub failed_replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub lambda_hat: LambdaPair,
    pub ci_low: [f64; 2],
    pub ci_high: [f64; 2],
    /// Standard deviation of the bootstrap replicates.
    pub bootstrap_stderr: [f64; 2],
    pub method: BootstrapMethod,
    pub eps_class: f64,
    pub classification: TheoryClass,
}

impl LambdaEstimate {
    pub fn half_width(&self) -> [f64; 2] {
        [0, 1].map(|j| 0.5 * (self.ci_high[j] - self.ci_low[j]))
    }
}

fn binomial_pair<R: Rng>(rng: &mut R, n: u64, p: f64) -> [u64; 2] {
    // p is a validated probability, so construction cannot fail.
    let k = Binomial::new(n, p.clamp(0.0, 1.0)).expect("probability in [0, 1]").sample(rng);
    [k, n - k]
}

/// Draws tallies for the four experiments from the model's exact statistics.
pub fn simulate_counts(model: &ModelDescriptor, sizes: SampleSizes, seed: u64) -> Result<CountsRecord> {
    let stats = model.statistics()?;
    let mut record = simulate_from_statistics(&stats, sizes, seed)?;
    record.model = Some(model.clone());
    Ok(record)
}

/// Same as [`simulate_counts`] for statistics without a model descriptor.
pub fn simulate_from_statistics(stats: &ContextStatistics, sizes: SampleSizes, seed: u64) -> Result<CountsRecord> {
    for (what, n) in [
        ("context", sizes.context),
        ("filtration", sizes.filtration),
        ("filtered 1", sizes.filtered[0]),
        ("filtered 2", sizes.filtered[1]),
    ] {
        if n == 0 {
            return Err(Error::InvalidInput(format!("{what} ensemble size must be at least 1")));
        }
    }
    let a_counts = binomial_pair(&mut substream(seed, tag::CONTEXT), sizes.context, stats.outcome.0[0]);
    let b_counts = binomial_pair(&mut substream(seed, tag::FILTRATION), sizes.filtration, stats.prior.0[0]);
    let filtered = [(0, tag::FILTERED_1), (1, tag::FILTERED_2)].map(|(i, t)| FilteredCounts {
        n: sizes.filtered[i],
        a_counts: binomial_pair(&mut substream(seed, t), sizes.filtered[i], stats.transition.0[i][0]),
    });
    Ok(CountsRecord { n_context: sizes.context, a_counts, n_filtration: sizes.filtration, b_counts, filtered, seed, model: None })
}

fn frequencies(what: &str, n: u64, counts: [u64; 2]) -> Result<([f64; 2], [f64; 2])> {
    if n == 0 {
        return Err(Error::EmptyEnsemble(what.to_string()));
    }
    let nf = n as f64;
    let p = counts.map(|k| k as f64 / nf);
    let se = p.map(|q| (q * (1.0 - q) / nf).sqrt());
    Ok((p, se))
}

/// Relative frequencies with binomial standard errors `sqrt(p(1-p)/n)`.
pub fn estimate_statistics(counts: &CountsRecord) -> Result<EstimatedStatistics> {
    let (prior, prior_se) = frequencies("filtration", counts.n_filtration, counts.b_counts)?;
    let (row1, row1_se) = frequencies("filtered 1", counts.filtered[0].n, counts.filtered[0].a_counts)?;
    let (row2, row2_se) = frequencies("filtered 2", counts.filtered[1].n, counts.filtered[1].a_counts)?;
    let (outcome, outcome_se) = frequencies("context", counts.n_context, counts.a_counts)?;
    counts.validate()?;
    let point = ContextStatistics::new(
        ProbabilityPair::new(prior[0], prior[1])?,
        TransitionMatrix::new([row1, row2])?,
        ProbabilityPair::new(outcome[0], outcome[1])?,
    )?;
    Ok(EstimatedStatistics {
        point,
        stderr: StandardErrors { prior: prior_se, transition: [row1_se, row2_se], outcome: outcome_se },
        sizes: counts.sizes(),
    })
}

fn resample<R: Rng>(rng: &mut R, est: &EstimatedStatistics) -> Result<ContextStatistics> {
    let p = &est.point;
    let freq = |c: [u64; 2], n: u64| ProbabilityPair([c[0] as f64 / n as f64, c[1] as f64 / n as f64]);
    let outcome = freq(binomial_pair(rng, est.sizes.context, p.outcome.0[0]), est.sizes.context);
    let prior = freq(binomial_pair(rng, est.sizes.filtration, p.prior.0[0]), est.sizes.filtration);
    let rows = [0, 1].map(|i| {
        freq(binomial_pair(rng, est.sizes.filtered[i], p.transition.0[i][0]), est.sizes.filtered[i]).0
    });
    ContextStatistics::new(prior, TransitionMatrix::new(rows)?, outcome)
}

fn bootstrap_replicate(est: &EstimatedStatistics, seed: u64, r: usize) -> Option<LambdaPair> {
    let mut rng = substream(seed, tag::BOOTSTRAP + r as u64);
    let stats = resample(&mut rng, est).ok()?;
    lambda_from_statistics(&stats, DegeneracyPolicy::default()).ok()
}

fn run_replicates(est: &EstimatedStatistics, replicates: usize, seed: u64) -> Vec<Option<LambdaPair>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..replicates).into_par_iter().map(|r| bootstrap_replicate(est, seed, r)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..replicates).map(|r| bootstrap_replicate(est, seed, r)).collect()
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Point estimate with percentile-bootstrap intervals.
///
/// Every tally is resampled from its binomial with the observed frequency.
/// The classification band is the larger interval half-width, so a component
/// whose interval straddles `|lambda| = 1` is reported as `Boundary`.
pub fn estimate_lambda(est: &EstimatedStatistics, replicates: usize, seed: u64) -> Result<LambdaEstimate> {
    let lambda_hat = lambda_from_statistics(&est.point, DegeneracyPolicy::default())?;
    if replicates < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 bootstrap replicates, got {replicates}")));
    }
    let draws = run_replicates(est, replicates, seed);
    let ok: Vec<LambdaPair> = draws.iter().flatten().copied().collect();
    let failed_replicates = draws.len() - ok.len();
    if ok.len() < 2 {
        return Err(Error::DegenerateContext { component: 0, numerator: f64::NAN });
    }
    let alpha = 1.0 - CONFIDENCE_LEVEL;
    let mut ci_low = [0.0; 2];
    let mut ci_high = [0.0; 2];
    let mut bootstrap_stderr = [0.0; 2];
    for j in 0..2 {
        let mut xs: Vec<f64> = ok.iter().map(|l| l.0[j]).collect();
        xs.sort_by(f64::total_cmp);
        // Widen to contain the point estimate when the replicate distribution is skewed past it.
        ci_low[j] = quantile(&xs, alpha / 2.0).min(lambda_hat.0[j]);
        ci_high[j] = quantile(&xs, 1.0 - alpha / 2.0).max(lambda_hat.0[j]);
        bootstrap_stderr[j] = std_dev(&xs);
    }
    let eps_class = (0..2).map(|j| 0.5 * (ci_high[j] - ci_low[j])).fold(0.0, f64::max);
    Ok(LambdaEstimate {
        lambda_hat,
        ci_low,
        ci_high,
        bootstrap_stderr,
        method: BootstrapMethod { replicates, seed, failed_replicates },
        eps_class,
        classification: classify_theory(&lambda_hat, eps_class),
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    /// Mean of `|lambda_hat_j - lambda_j|` over the seeds.
    pub mean_abs_error: [f64; 2],
    /// Standard error of that mean.
    pub stderr: [f64; 2],
}

fn point_error(stats: &ContextStatistics, truth: &LambdaPair, n: u64, seed: u64) -> Result<[f64; 2]> {
    let counts = simulate_from_statistics(stats, SampleSizes::uniform(n), seed)?;
    let est = estimate_statistics(&counts)?;
    let lambda = lambda_from_statistics(&est.point, DegeneracyPolicy::default())?;
    Ok([0, 1].map(|j| (lambda.0[j] - truth.0[j]).abs()))
}

/// Mean absolute estimation error of the coefficients across a grid of ensemble sizes.
pub fn convergence_study(
    model: &ModelDescriptor,
    n_grid: &[u64],
    seeds_per_size: usize,
    base_seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    if n_grid.is_empty() || seeds_per_size == 0 {
        return Err(Error::InvalidInput("convergence study needs a nonempty grid and at least one seed".into()));
    }
    let stats = model.statistics()?;
    let truth = lambda_from_statistics(&stats, DegeneracyPolicy::Reject)?;
    let mut rows = Vec::with_capacity(n_grid.len());
    for (k, &n) in n_grid.iter().enumerate() {
        let seeds: Vec<u64> = (0..seeds_per_size)
            .map(|s| derive_seed(base_seed, tag::RUN_SEED + (k * seeds_per_size + s) as u64))
            .collect();
        #[cfg(feature = "parallel")]
        let errors: Result<Vec<[f64; 2]>> = {
            use rayon::prelude::*;
            seeds.par_iter().map(|&seed| point_error(&stats, &truth, n, seed)).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let errors: Result<Vec<[f64; 2]>> = seeds.iter().map(|&seed| point_error(&stats, &truth, n, seed)).collect();
        let errors = errors?;
        let count = errors.len() as f64;
        let mut mean_abs_error = [0.0; 2];
        let mut stderr = [0.0; 2];
        for j in 0..2 {
            let xs: Vec<f64> = errors.iter().map(|e| e[j]).collect();
            mean_abs_error[j] = xs.iter().sum::<f64>() / count;
            stderr[j] = std_dev(&xs) / count.sqrt();
        }
        rows.push(ConvergenceRow { n, mean_abs_error, stderr });
    }
    Ok(rows)
}
