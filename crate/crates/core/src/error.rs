use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(&'static str),
    #[error("curvature norm {norm} exceeds bound {bound}")]
    CurvatureBound { norm: f64, bound: f64 },
    #[error("state dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("line {id}: endpoint behind the camera (depth {depth})")]
    NotVisible { id: u32, depth: f64 },
    #[error("line {id}: endpoints project to the same image point")]
    DegenerateLine { id: u32 },
    #[error("feature plane has d = 0")]
    DegeneratePlane,
    #[error("feature set is empty")]
    EmptyFeatures,
    #[error("feature sets do not correspond (id {0})")]
    Correspondence(u32),
    #[error("camera attitude is at the pitch singularity")]
    DegenerateAttitude,
    #[error("decoupling vector does not exist (Q L^+ L = 0)")]
    DecouplingInfeasible,
    #[error("series is empty")]
    EmptySeries,
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: alloc::boxed::Box::new(self),
        }
    }
}
