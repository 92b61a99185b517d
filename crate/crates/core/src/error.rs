use thiserror::Error;

/// Condition that makes a requested signature or free-product type unrealizable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Infeasibility {
    /// The Riemann-Hurwitz identity fails for the requested data.
    RiemannHurwitz,
    /// The q-gon count numerator m0 is negative.
    M0Negative,
    /// m0 is not a multiple of q - 2.
    M0NotMultiple,
    /// Kurosh realization: 2f + pi2 + v_q - 2 is not positive (odd q).
    KuroshPositivity,
    /// Kurosh realization: no admissible split t of the order-2 factors (even q).
    KuroshNoSplit,
}

impl std::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Infeasibility::RiemannHurwitz => "riemann-hurwitz",
            Infeasibility::M0Negative => "m0-negative",
            Infeasibility::M0NotMultiple => "m0-not-multiple",
            Infeasibility::KuroshPositivity => "kurosh-positivity",
            Infeasibility::KuroshNoSplit => "kurosh-no-split",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("values come from different number fields")]
    ContextMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("quotient is not an algebraic integer")]
    NotDivisible,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("matrix is not a member of the Hecke group")]
    NotMember,
    #[error("endpoints do not bound an even line")]
    NotAnEvenLine,
    #[error("no reduced form found within {0} steps")]
    NotReducedWithinBudget(usize),
    #[error("corrupt symbol: {0}")]
    CorruptSymbol(String),
    #[error("tile budget of {0} triangles exceeded")]
    TileBudgetExceeded(usize),
    #[error("oracle inconsistent: {0}")]
    OracleInconsistent(String),
    #[error("infeasible: {0}")]
    Infeasible(Infeasibility),
    #[error("explicit family: {0}")]
    ExplicitFamily(String),
    #[error("permutation action is not regular")]
    NotRegular,
    #[error("permutation group is not transitive")]
    NotTransitive,
    #[error("operation only supported for q = 3, got q = {0}")]
    UnsupportedQ(u32),
}

impl Error {
    /// True for errors caused by malformed user input rather than by the mathematics.
    pub fn is_malformed_input(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::InvalidInput(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
