use alloc::string::String;
use core::fmt;

/// Errors surfaced by the engine. `Infeasible` is an expected outcome for
/// contradictory instances; the `Internal*` variants signal broken invariants
/// and are never expected on valid inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A set refers to elements outside the matroid's ground set.
    ElementOutOfGround,
    /// A nonempty ground set was required.
    EmptyGround,
    /// Ground sets that must be disjoint overlap.
    OverlappingGrounds,
    /// The padding set for a free extension has the wrong size.
    WrongPadSize,
    /// Subset enumeration was requested over a ground set above the cap.
    GroundTooLarge { size: usize, cap: usize },
    /// A constructed input is not a valid matroid or instance.
    Invalid(String),
    /// The LP relaxation is infeasible.
    Infeasible,
    /// No matroid or knapsack satisfied the drop condition; violates the
    /// termination argument and indicates a bug.
    NoDroppableConstraint,
    /// A 2-matroid intersection LP produced a fractional vertex.
    FractionalVertex,
    /// Any other broken internal invariant.
    Internal(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ElementOutOfGround => write!(f, "set contains elements outside the ground set"),
            Error::EmptyGround => write!(f, "ground set must be nonempty"),
            Error::OverlappingGrounds => write!(f, "ground sets must be disjoint"),
            Error::WrongPadSize => write!(f, "padding set size must equal the matroid rank"),
            Error::GroundTooLarge { size, cap } => {
                write!(f, "ground set of size {size} exceeds enumeration cap {cap}")
            }
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::Infeasible => write!(f, "LP relaxation is infeasible"),
            Error::NoDroppableConstraint => {
                write!(f, "internal error: no droppable constraint found")
            }
            Error::FractionalVertex => {
                write!(f, "internal error: intersection LP returned a fractional vertex")
            }
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

impl core::error::Error for Error {}
