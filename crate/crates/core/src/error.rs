use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeylError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("operand has an hbar^-1 sector; use the graded commutator")]
    NegativeHbarSector,
    #[error("result leaves the admitted hbar^-1 sector (power {0})")]
    HbarUnderflow(i32),
    #[error("hbar^-1 sector must be scalar (multiple of the identity matrix)")]
    NonScalarHbarInverse,
    #[error("term violates the degree bounds: {0}")]
    DegreeBound(String),
    #[error("automorphism is not multiplicative: relation {relation} fails at degree {degree}")]
    NotMultiplicative { relation: String, degree: i32 },
    #[error("automorphism does not act as the identity on the center mod hbar ({0})")]
    CenterNotIdentity(String),
    #[error("automorphism is not unipotent: generator {generator} moves at degree {degree}")]
    NotUnipotent { generator: String, degree: i32 },
    #[error("conjugator construction did not converge: {0}")]
    NoConjugator(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChartError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("omega is not antisymmetric at entry ({i},{j})")]
    OmegaNotAntisymmetric { i: usize, j: usize },
    #[error("omega is degenerate at the base point")]
    OmegaDegenerate,
    #[error("d(omega) != 0 at component {component:?}, jet order {jet_order}")]
    OmegaNotClosed { component: (usize, usize, usize), jet_order: usize },
    #[error("Gamma is not symmetric in its lower indices at ({k},{i},{j}), jet order {jet_order}")]
    GammaNotSymmetric { k: usize, i: usize, j: usize, jet_order: usize },
    #[error("connection does not preserve omega at ({m},{k},{l}), jet order {jet_order}")]
    GammaNotSymplectic { m: usize, k: usize, l: usize, jet_order: usize },
    #[error("theta_{t} is not closed at component {component:?}, jet order {jet_order}")]
    ThetaNotClosed { t: usize, component: (usize, usize, usize), jet_order: usize },
    #[error("theta_{t} is not antisymmetric at ({i},{j})")]
    ThetaNotAntisymmetric { t: usize, i: usize, j: usize },
    #[error("jet order {jet} too small for Fedosov degree {degree} (need >= degree + 2)")]
    JetBudget { jet: usize, degree: i32 },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclicError {
    #[error("structure constants are not associative at basis triple ({0},{1},{2})")]
    NotAssociative(usize, usize, usize),
    #[error("unit law fails for basis element {0}")]
    NotUnital(usize),
    #[error("differential is not a graded derivation at ({0},{1})")]
    NotDerivation(usize, usize),
    #[error("differential does not square to zero on basis element {0}")]
    DifferentialNotNilpotent(usize),
    #[error("functional is not unital: l(1) = {0}")]
    NonUnitalFunctional(String),
    #[error("matrix is not idempotent; residual p^2 - p has {0} nonzero entries")]
    NotIdempotent(usize),
    #[error("malformed algebra: {0}")]
    Malformed(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharClassError {
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("support margin violated: |value| = {value:e} at ({x:.3},{xi:.3}) exceeds tolerance {tol:e}")]
    SupportMargin { value: f64, x: f64, xi: f64, tol: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}
