use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series centers differ ({0} vs {1})")]
    CenterMismatch(f64, f64),
    #[error("vanishing leading coefficient")]
    VanishingCoefficient,
    #[error("constant term {0} not allowed here")]
    BadConstantTerm(f64),
    #[error("constraint {0} violated")]
    Constraint(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("result overflows: {0}")]
    Overflow(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("root bracketing failed: {0}")]
    Bracket(String),
    #[error("singular linear system")]
    Singular,
    #[error("numerically unstable: {0}")]
    Unstable(String),
    #[error("need {need} coefficients, have {have}")]
    Insufficient { need: usize, have: usize },
    #[error("model error: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;
