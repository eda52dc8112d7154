use std::fmt;

use linked_twist::Error;

/// Why a command stopped; each kind has its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// A checked claim does not hold.
    Violation(String),
    /// Bad arguments, configuration or input files.
    Usage(String),
    /// The numerics gave out: seams, budgets, non-finite values.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Violation(m) | Failure::Usage(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::CentreSingularity | Error::DegenerateTriangle(_) => Failure::Usage(e.to_string()),
            Error::SeamEncounter { .. } => Failure::Numerical(format!(
                "{e}, and every reseed of that orbit met a seam too; rerun with a different --seed"
            )),
            Error::PointBudgetExceeded(_) => {
                Failure::Numerical(format!("{e}; lower --iters, raise --tol, or measure with --method tangent"))
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}
