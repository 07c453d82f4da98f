use thiserror::Error;

/// Errors raised by the calculus, the oracles, the sampler and the file layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("predicted outcome probability p{component}^a = {value} lies outside [0, 1]")]
    OutOfRange { component: usize, value: f64 },

    #[error("degenerate context on component {component}: interference weight vanishes but deviation is {numerator}")]
    DegenerateContext { component: usize, numerator: f64 },

    #[error("filtration b{0} has zero probability")]
    ZeroFiltration(usize),

    #[error("target coefficients are infeasible: p{component}^a = {value}")]
    InfeasibleLambda { component: usize, value: f64 },

    #[error("inconsistent statistics: {0}")]
    Inconsistent(String),

    #[error("phase component {0} is hyperbolic; amplitude lift needs trigonometric phases")]
    NonTrigonometric(usize),

    #[error("transition matrix is not doubly stochastic (max column residual {0})")]
    NotBalanced(f64),

    #[error("ensemble '{0}' is empty")]
    EmptyEnsemble(String),

    #[error("model generation gave up after {0} rejected draws")]
    GenerationExhausted(usize),
}

impl Error {
    /// Process exit code for this error category.
    ///
    /// 1: invalid input or flags, 2: degenerate statistics or model,
    /// 3: infeasible or inconsistent data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 1,
            Error::DegenerateContext { .. } | Error::ZeroFiltration(_) | Error::EmptyEnsemble(_) => 2,
            Error::OutOfRange { .. }
            | Error::InfeasibleLambda { .. }
            | Error::Inconsistent(_)
            | Error::NonTrigonometric(_)
            | Error::NotBalanced(_)
            | Error::GenerationExhausted(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
