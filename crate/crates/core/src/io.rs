//! Experiment files, analysis reports and sweep tables.
//!
//! JSON output is canonical: object keys sorted, floats written as the
//! shortest decimal that round-trips to the same double. Sweep tables are CSV
//! with a fixed header.

use serde::{Deserialize, Serialize};

use crate::calculus::{
    check_double_stochastic, classify_theory, lambda_from_statistics, normalization_residual, phase_parametrization,
    BalanceReport, ContextStatistics, DegeneracyPolicy, DichotomicObservable, LambdaPair, PhasePair, ProbabilityPair,
    TheoryClass, TransitionMatrix, EPS_CLASS_DEFAULT, TOL_EXACT,
};
use crate::error::{Error, Result};
use crate::lift::{balance_phase_constraint, born_residual, lift_to_amplitudes, AmplitudePair, PhaseConstraint};
use crate::oracles::{qubit_statistics, synthesize_statistics, ModelDescriptor, QubitModel, SyntheticModel};
use crate::rng::{derive_seed, tag};
use crate::sampling::{
    estimate_lambda, estimate_statistics, simulate_from_statistics, CountsRecord, LambdaEstimate, SampleSizes,
    DEFAULT_REPLICATES,
};

pub const FORMAT_VERSION: u32 = 1;

/// Serializes any value as canonical pretty-printed JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&tree).map_err(|e| Error::InvalidInput(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// On-disk experiment: observables plus either exact statistics or raw counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentFile {
    pub format_version: u32,
    pub observables: [DichotomicObservable; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<CountsRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ContextStatistics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Default observable descriptors `A = a1, a2` and `B = b1, b2`.
pub fn default_observables() -> [DichotomicObservable; 2] {
    [
        DichotomicObservable { name: "A".into(), value_labels: ["a1".into(), "a2".into()] },
        DichotomicObservable { name: "B".into(), value_labels: ["b1".into(), "b2".into()] },
    ]
}

impl ExperimentFile {
    pub fn exact(stats: ContextStatistics) -> Self {
        Self { format_version: FORMAT_VERSION, observables: default_observables(), counts: None, exact: Some(stats), model: None, note: None }
    }

    pub fn with_counts(counts: CountsRecord) -> Self {
        Self { format_version: FORMAT_VERSION, observables: default_observables(), counts: Some(counts), exact: None, model: None, note: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::InvalidInput(format!("unsupported format_version {}", self.format_version)));
        }
        for obs in &self.observables {
            obs.validate()?;
        }
        match (&self.counts, &self.exact) {
            (Some(counts), None) => counts.validate(),
            (None, Some(stats)) => stats.validate(TOL_EXACT),
            _ => Err(Error::InvalidInput("exactly one of 'counts' and 'exact' must be present".into())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed experiment file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        to_canonical_json(self)
    }
}

/// Knobs for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSettings {
    /// Tolerance for the balance and phase checks on exact statistics.
    pub tolerance: f64,
    /// Overrides the classification band; defaults to [`EPS_CLASS_DEFAULT`]
    /// for exact data and to the bootstrap half-width for counts.
    pub eps_class: Option<f64>,
    pub bootstrap_replicates: usize,
    pub seed: u64,
    pub policy: DegeneracyPolicy,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self { tolerance: TOL_EXACT, eps_class: None, bootstrap_replicates: DEFAULT_REPLICATES, seed: 0, policy: DegeneracyPolicy::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Exact,
    Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub source: DataSource,
    pub statistics: ContextStatistics,
    pub lambda: LambdaPair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<LambdaEstimate>,
    pub phases: PhasePair,
    pub eps_class: f64,
    pub theory_class: TheoryClass,
    pub balance: BalanceReport,
    pub normalization_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_constraint: Option<PhaseConstraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<AmplitudePair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub born_residual: Option<f64>,
}

/// Column-sum tolerance for estimated transitions: three combined standard errors.
fn sampled_balance_tolerance(se: &[[f64; 2]; 2], floor: f64) -> f64 {
    let column = |j: usize| (se[0][j].powi(2) + se[1][j].powi(2)).sqrt();
    floor.max(3.0 * column(0).max(column(1)))
}

/// Full analysis of an experiment file.
pub fn analyze(file: &ExperimentFile, settings: &AnalysisSettings) -> Result<AnalysisReport> {
    file.validate()?;
    let (source, stats, estimate, tolerance) = match (&file.exact, &file.counts) {
        (Some(stats), _) => (DataSource::Exact, *stats, None, settings.tolerance),
        (None, Some(counts)) => {
            let est = estimate_statistics(counts)?;
            let lambda = estimate_lambda(&est, settings.bootstrap_replicates, settings.seed)?;
            let tol = sampled_balance_tolerance(&est.stderr.transition, settings.tolerance);
            (DataSource::Counts, est.point, Some(lambda), tol)
        }
        (None, None) => unreachable!("validated"),
    };
    let lambda = match &estimate {
        Some(e) => e.lambda_hat,
        None => lambda_from_statistics(&stats, settings.policy)?,
    };
    let residual = normalization_residual(&stats, &lambda);
    if source == DataSource::Exact && residual.abs() > settings.tolerance {
        return Err(Error::Inconsistent(format!("normalization residual {residual} exceeds {}", settings.tolerance)));
    }
    let eps_class = settings
        .eps_class
        .or(estimate.as_ref().map(|e| e.eps_class))
        .unwrap_or(EPS_CLASS_DEFAULT);
    let theory_class = classify_theory(&lambda, eps_class);
    let phases = phase_parametrization(&lambda);
    let balance = check_double_stochastic(&stats.transition, tolerance);
    let phase_constraint = if balance.is_double_stochastic && phases.0.iter().all(|p| p.is_trigonometric()) {
        Some(balance_phase_constraint(&stats, &phases, tolerance)?)
    } else {
        None
    };
    let amplitudes = if theory_class.admits_amplitudes() {
        Some(lift_to_amplitudes(&stats, &phases).map_err(|e| {
            Error::Inconsistent(format!("{e} although the verdict is {}", theory_class.name()))
        })?)
    } else {
        None
    };
    let born = amplitudes.as_ref().map(|a| born_residual(a, &stats.outcome));
    Ok(AnalysisReport {
        source,
        statistics: stats,
        lambda,
        estimate,
        phases,
        eps_class,
        theory_class,
        balance,
        normalization_residual: residual,
        phase_constraint,
        amplitudes,
        born_residual: born,
    })
}

/// Output of the amplitude-only reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub lambda: LambdaPair,
    pub phases: PhasePair,
    pub amplitudes: AmplitudePair,
    pub born_residual: f64,
    pub norm_sqr: f64,
}

/// Lift of an exact experiment file to amplitudes.
pub fn reconstruct(file: &ExperimentFile, policy: DegeneracyPolicy) -> Result<Reconstruction> {
    file.validate()?;
    let stats = file
        .exact
        .ok_or_else(|| Error::InvalidInput("reconstruction needs exact statistics".into()))?;
    let lambda = lambda_from_statistics(&stats, policy)?;
    let phases = phase_parametrization(&lambda);
    let amplitudes = lift_to_amplitudes(&stats, &phases)?;
    Ok(Reconstruction {
        lambda,
        phases,
        born_residual: born_residual(&amplitudes, &stats.outcome),
        norm_sqr: amplitudes.norm_sqr(),
        amplitudes,
    })
}

/// Row and column checks on the (exact or estimated) transition matrix of a file.
pub fn balance(file: &ExperimentFile, tolerance: f64) -> Result<BalanceReport> {
    file.validate()?;
    let transition = match (&file.exact, &file.counts) {
        (Some(stats), _) => stats.transition,
        (None, Some(counts)) => estimate_statistics(counts)?.point.transition,
        (None, None) => unreachable!("validated"),
    };
    Ok(check_double_stochastic(&transition, tolerance))
}

/// Simulated experiment file with the model embedded.
pub fn simulate_file(model: &ModelDescriptor, sizes: SampleSizes, seed: u64) -> Result<ExperimentFile> {
    let stats = model.statistics()?;
    // A model whose coefficients cannot be recovered is rejected before sampling.
    lambda_from_statistics(&stats, DegeneracyPolicy::Reject)?;
    let counts = simulate_from_statistics(&stats, sizes, seed)?;
    let mut file = ExperimentFile::with_counts(counts);
    file.model = Some(model.clone());
    Ok(file)
}

/// Parses `v1,v2,...` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::InvalidInput(format!("grid '{text}': {msg}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("'{s}' {e}")));
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(bad("expected start:stop:count".into()));
        };
        let (start, stop) = (number(start)?, number(stop)?);
        let count: usize = count.trim().parse().map_err(|e| bad(format!("count {e}")))?;
        match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect(),
        }
    } else if text.trim().is_empty() {
        Vec::new()
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(bad("empty grid".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite value".into()));
    }
    Ok(values)
}

/// Model family and parameter grid for [`run_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub enum SweepSpec {
    Qubit { alpha: Vec<f64>, phi: Vec<f64>, b_rotation: Vec<f64>, b_phase: Vec<f64> },
    /// `lambda_2` is the normalizing companion of each `lambda_1`.
    Synthetic { prior: ProbabilityPair, transition: TransitionMatrix, lambda1: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub eps_class: f64,
    /// When set, each grid point is simulated at this ensemble size and the
    /// row reports estimated statistics.
    pub sample_size: Option<u64>,
    pub seed: u64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { eps_class: EPS_CLASS_DEFAULT, sample_size: None, seed: 0 }
    }
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "p1", "p2", "p11", "p12", "p21", "p22", "p1a", "p2a", "lambda1", "lambda2", "theta1", "theta2", "class",
    "col_residual_max",
];

/// Parameter values of one grid point and its exact statistics.
type GridPoint = (Vec<f64>, Result<ContextStatistics>);

fn fmt(x: f64) -> String {
    format!("{x:?}")
}

/// CSV with one row per grid point: parameters, then [`SWEEP_COLUMNS`].
pub fn run_sweep(spec: &SweepSpec, settings: &SweepSettings) -> Result<String> {
    let (params, models): (Vec<&str>, Vec<GridPoint>) = match spec {
        SweepSpec::Qubit { alpha, phi, b_rotation, b_phase } => {
            if [alpha, phi, b_rotation, b_phase].iter().any(|g| g.is_empty()) {
                return Err(Error::InvalidInput("sweep grid is empty".into()));
            }
            let mut rows = Vec::new();
            for &a in alpha {
                for &p in phi {
                    for &r in b_rotation {
                        for &s in b_phase {
                            let model = QubitModel { alpha: a, phi: p, b_rotation: r, b_phase: s };
                            rows.push((vec![a, p, r, s], qubit_statistics(&model)));
                        }
                    }
                }
            }
            (vec!["alpha", "phi", "b_rotation", "b_phase"], rows)
        }
        SweepSpec::Synthetic { prior, transition, lambda1 } => {
            if lambda1.is_empty() {
                return Err(Error::InvalidInput("sweep grid is empty".into()));
            }
            let rows = lambda1
                .iter()
                .map(|&l| match SyntheticModel::with_companion(*prior, *transition, l) {
                    Ok(m) => (m.target_lambda.0.to_vec(), synthesize_statistics(&m)),
                    Err(e) => (vec![l, f64::NAN], Err(e)),
                })
                .collect();
            (vec!["target_lambda1", "target_lambda2"], rows)
        }
    };

    let mut writer = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = params.iter().copied().chain(SWEEP_COLUMNS).collect();
    writer.write_record(&header).map_err(|e| Error::InvalidInput(e.to_string()))?;
    for (index, (values, stats)) in models.into_iter().enumerate() {
        let mut stats = stats?;
        if let Some(n) = settings.sample_size {
            let seed = derive_seed(settings.seed, tag::RUN_SEED + index as u64);
            stats = estimate_statistics(&simulate_from_statistics(&stats, SampleSizes::uniform(n), seed)?)?.point;
        }
        let lambda = lambda_from_statistics(&stats, DegeneracyPolicy::default())?;
        let phases = phase_parametrization(&lambda);
        let class = classify_theory(&lambda, settings.eps_class);
        let balance = check_double_stochastic(&stats.transition, TOL_EXACT);
        let t = stats.transition.0;
        let mut record: Vec<String> = values.iter().map(|&v| fmt(v)).collect();
        record.extend(
            [
                stats.prior.0[0], stats.prior.0[1], t[0][0], t[0][1], t[1][0], t[1][1], stats.outcome.0[0],
                stats.outcome.0[1], lambda.0[0], lambda.0[1], phases.0[0].theta(), phases.0[1].theta(),
            ]
            .map(fmt),
        );
        record.push(class.name().to_string());
        record.push(fmt(balance.max_column_residual()));
        writer.write_record(&record).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::KolmogorovModel;

    fn e1() -> ContextStatistics {
        ContextStatistics::from_parts([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], [0.75, 0.25]).unwrap()
    }

    #[test]
    fn exact_e1_analysis() {
        let report = analyze(&ExperimentFile::exact(e1()), &AnalysisSettings::default()).unwrap();
        assert_eq!(report.lambda.0, [0.5, -0.5]);
        assert_eq!(report.theory_class, TheoryClass::Trigonometric);
        assert!(report.balance.is_double_stochastic);
        assert!(report.amplitudes.is_some());
        assert!(report.phase_constraint.unwrap().holds);
    }

    #[test]
    fn exact_e2_and_e3_analysis() {
        let e2 = ContextStatistics::from_parts([0.3, 0.7], [[0.2, 0.8], [0.6, 0.4]], [0.48, 0.52]).unwrap();
        let report = analyze(&ExperimentFile::exact(e2), &AnalysisSettings::default()).unwrap();
        assert_eq!(report.theory_class, TheoryClass::Classical);
        assert!(!report.balance.is_double_stochastic);
        assert!(report.amplitudes.is_some() && report.phase_constraint.is_none());

        let e3 = ContextStatistics::from_parts([0.5, 0.5], [[0.8, 0.2], [0.2, 0.8]], [1.0, 0.0]).unwrap();
        let report = analyze(&ExperimentFile::exact(e3), &AnalysisSettings::default()).unwrap();
        assert_eq!(report.theory_class, TheoryClass::Hyperbolic);
        assert!(report.amplitudes.is_none());
    }

    #[test]
    fn file_must_carry_exactly_one_payload() {
        let mut file = ExperimentFile::exact(e1());
        file.counts = Some(simulate_from_statistics(&e1(), SampleSizes::uniform(10), 1).unwrap());
        assert!(matches!(file.validate(), Err(Error::InvalidInput(_))));
        file.counts = None;
        file.exact = None;
        assert!(matches!(file.validate(), Err(Error::InvalidInput(_))));
        let mut file = ExperimentFile::exact(e1());
        file.format_version = 2;
        assert!(file.validate().is_err());
    }

    #[test]
    fn malformed_json_is_invalid_input() {
        let err = ExperimentFile::from_json("{ not json").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let json = ExperimentFile::exact(e1()).to_json().unwrap();
        let exact = json.find("\"exact\"").unwrap();
        let format = json.find("\"format_version\"").unwrap();
        let observables = json.find("\"observables\"").unwrap();
        assert!(exact < format && format < observables);
        assert!(json.contains("0.75"));
    }

    #[test]
    fn simulated_file_embeds_model() {
        let model = ModelDescriptor::Classical(KolmogorovModel::preset_e2());
        let file = simulate_file(&model, SampleSizes::uniform(100), 1).unwrap();
        assert_eq!(file.model, Some(model));
        assert!(file.counts.as_ref().unwrap().model.is_none());
        let back = ExperimentFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn degenerate_model_cannot_be_simulated() {
        let model = ModelDescriptor::Qubit(QubitModel { alpha: 0.3, phi: 0.0, b_rotation: 0.0, b_phase: 0.0 });
        assert_eq!(simulate_file(&model, SampleSizes::uniform(10), 1).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn reconstruct_requires_trigonometric_exact_data() {
        let r = reconstruct(&ExperimentFile::exact(e1()), DegeneracyPolicy::default()).unwrap();
        assert!(r.born_residual <= 1e-12 && (r.norm_sqr - 1.0).abs() <= 1e-12);
        let e3 = ContextStatistics::from_parts([0.5, 0.5], [[0.8, 0.2], [0.2, 0.8]], [1.0, 0.0]).unwrap();
        assert_eq!(reconstruct(&ExperimentFile::exact(e3), DegeneracyPolicy::default()).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0,0.5,1.25").unwrap(), vec![0.0, 0.5, 1.25]);
        assert_eq!(parse_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn synthetic_sweep_classes() {
        let spec = SweepSpec::Synthetic {
            prior: ProbabilityPair::new(0.5, 0.5).unwrap(),
            transition: TransitionMatrix::new([[0.8, 0.2], [0.2, 0.8]]).unwrap(),
            lambda1: vec![0.0, 0.5, 1.25],
        };
        let csv = run_sweep(&spec, &SweepSettings::default()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "target_lambda1,target_lambda2,p1,p2,p11,p12,p21,p22,p1a,p2a,lambda1,lambda2,theta1,theta2,class,col_residual_max"
        );
        let classes: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(14).unwrap()).collect();
        assert_eq!(classes, ["Classical", "Trigonometric", "Hyperbolic"]);
    }

    #[test]
    fn empty_sweep_grid_is_invalid() {
        let spec = SweepSpec::Qubit { alpha: vec![], phi: vec![0.0], b_rotation: vec![0.5], b_phase: vec![0.0] };
        assert_eq!(run_sweep(&spec, &SweepSettings::default()).unwrap_err().exit_code(), 1);
    }
}
