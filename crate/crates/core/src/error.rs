use thiserror::Error;

use crate::report::ConditionSetReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("power of a negative constant with non-integer exponent: {0}")]
    NonRealPower(String),
    #[error("exponent must be a rational constant, found `{0}`")]
    SymbolicExponent(String),
    #[error("parse error at byte {pos}: {msg} (near `{token}`)")]
    Parse {
        pos: usize,
        token: String,
        msg: String,
    },
    #[error("invalid jet context: {0}")]
    InvalidContext(String),
    #[error("variable `{0}` is not legal in this jet context")]
    IllegalVariable(String),
    #[error("jet context is already extended")]
    AlreadyExtended,
    #[error("derivative `{var}` exceeds the maximal jet order {max}")]
    OrderOverflow { var: String, max: usize },
    #[error("no pole-free sample point found in {attempts} attempts")]
    PoleExhaustion { attempts: usize },
    #[error("expression has jet order {order}, a first-order function was required")]
    NotFirstOrder { order: usize },
    #[error("expression e{j} has jet order {order}, at most 2 is supported")]
    OrderTooHigh { j: usize, order: usize },
    #[error("e{j} is not affine in the second-order variable `{var}`")]
    NonlinearSecondOrder { j: usize, var: String },
    #[error("principal part is not symmetric: coefficient of `{var}` in e{j} differs from the transposed one in e{jp}")]
    AsymmetryUnrepairable { j: usize, jp: usize, var: String },
    #[error("not a null Lagrangian: e{j}[f] = {residual} is nonzero")]
    NotNullLagrangian { j: usize, residual: String },
    #[error("no closed form: {0}")]
    NotClosedFormIntegrable(String),
    #[error("residual of e{j} is not linear in the variations: {residual}")]
    MalformedResidual { j: usize, residual: String },
    #[error("wrong shape: {0}")]
    WrongShape(String),
    #[error("the skew correction G is required for m = 2 data with non-constant F12 entries")]
    MissingG,
    #[error("solvability conditions failed: {}", .0.failed_ids().join(", "))]
    ConditionsFailed(Box<ConditionSetReport>),
    #[error("no skew correction of polynomial degree <= {degree} satisfies the level-set equation")]
    AnsatzFailed { degree: usize },
    #[error("second derivatives do not match the prescribed Hessian entry {0}")]
    IncompatibleHessian(String),
    #[error("potential does not reproduce its defining equation: {0}")]
    PotentialVerificationFailed(String),
    #[error("invalid reference function: {0}")]
    InvalidReference(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}
