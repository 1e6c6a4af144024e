use thiserror::Error;

/// Errors raised by the geometric and analytic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular evaluation at `{node}`: {reason}")]
    SingularEvaluation { node: String, reason: String },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("variable `{name}` is not among the declared variables {declared:?}")]
    UndeclaredVariable { name: String, declared: Vec<String> },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("pole on contour: non-finite integrand at node {node} (λ = {at}); try a different radius")]
    PoleOnContour { node: usize, at: String },

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("derivative order {requested} exceeds the jet truncation {bound} in `{var}`")]
    TruncationExceeded { var: String, requested: u32, bound: u32 },

    #[error("degenerate tetrad: coframe inversion failed")]
    DegenerateTetrad,

    #[error("degenerate metric: not invertible at the sample point")]
    DegenerateMetric,

    #[error("not a linearized solution: wave-operator residual {residual:e} exceeds {tolerance:e}")]
    NotLinearizedSolution { residual: f64, tolerance: f64 },

    #[error("inconsistent system: least-squares residual {residual:e} exceeds {tolerance:e}")]
    InconsistentSystem { residual: f64, tolerance: f64 },

    #[error("ansatz insufficient: {0}")]
    AnsatzInsufficient(String),

    #[error("tail coefficients not determined: requested order {requested}, at most {max} available")]
    UndeterminedTail { requested: usize, max: usize },

    #[error("Legendre inversion failed: {0}")]
    LegendreInversionFailed(String),

    #[error("degenerate Legendre transform: Hessian determinant {0:e}")]
    DegenerateLegendre(f64),

    #[error("degenerate GH potential: ψ vanishes")]
    DegenerateGhPotential,

    #[error("point is off the surface: |∂F/∂t⁴| = {0:e}")]
    OffSurface(f64),

    #[error("M degenerate: (F01)² − F00·F11 = {0:e}")]
    MDegenerate(f64),

    #[error("off constraint surface: max constraint {0:e}")]
    OffConstraintSurface(f64),

    #[error("degenerate two-form: {0}")]
    DegenerateTwoForm(String),

    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: i32, found: i32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("branch point: {0}")]
    BranchPoint(String),

    #[error("degenerate elliptic curve: discriminant {0:e}")]
    DegenerateEllipticCurve(f64),

    #[error("limit selection ambiguous: {0}")]
    AmbiguousLimit(String),

    #[error("root finding did not converge: {0}")]
    RootFinding(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
