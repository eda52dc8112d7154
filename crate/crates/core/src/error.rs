use std::fmt;

use thiserror::Error;

/// Where along a piecewise-smooth evaluation a seam was hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeamSite {
    /// Angle within tolerance of an internal boundary of the ψ branches.
    PsiAngle,
    /// Torus ordinate within tolerance of ±r0 or ±r1.
    PsiInverseOrdinate,
    /// Abscissa within tolerance of r0 or r1, where F switches to the identity.
    TwistSupport,
    /// Point within tolerance of the switching set of Ω or Ω⁻¹.
    OmegaSwitch,
}

/// Stage of the chain H = Ω⁻¹∘F⁻¹∘Ω∘F (or of its inverse) at which a derivative failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainStage {
    Single,
    F,
    Omega,
    FInverse,
    OmegaInverse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seam {
    pub site: SeamSite,
    pub stage: ChainStage,
    pub x: f64,
    pub y: f64,
}

impl Seam {
    pub(crate) fn new(site: SeamSite, x: f64, y: f64) -> Self {
        Seam { site, stage: ChainStage::Single, x, y }
    }

    pub(crate) fn at_stage(mut self, stage: ChainStage) -> Self {
        self.stage = stage;
        self
    }
}

impl fmt::Display for Seam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} seam at ({}, {}) in stage {:?}", self.site, self.x, self.y, self.stage)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chart centre singularity: angle undefined at radius 0")]
    CentreSingularity,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("derivative requested on a seam: {0}")]
    SeamDerivative(Seam),
    #[error("orbit did not return to S within {0} iterations")]
    NoReturnWithinBudget(usize),
    #[error("lift ambiguity at index {index}: step {step} exceeds threshold")]
    LiftAmbiguity { index: usize, step: f64 },
    #[error("degenerate triangle: |cos α| = {0} ≥ 1")]
    DegenerateTriangle(f64),
    #[error("orbit came within seam tolerance at step {step}")]
    SeamEncounter { step: usize },
    #[error("non-finite value accumulated at step {step}")]
    NonFiniteAccumulation { step: usize },
    #[error("curve refinement exceeded the point budget of {0}")]
    PointBudgetExceeded(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
