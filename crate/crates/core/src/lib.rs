//! Accelerated primal–dual methods with backtracking for convex conic
//! programs and QCQPs.

pub mod diagnostics;
pub mod egm;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod geometry;
pub mod linalg;
pub mod problem;
pub mod restart;
pub mod rng;
pub mod subsolve;

pub use engine::{Apdb, ApdbConfig, AverageState, StepState, TraceRecord};
pub use error::{Error, Result};
pub use geometry::{Cone, DualBall, DualDomain, SimpleSet};
pub use restart::{RestartPoint, RestartPolicy, RunOptions};
pub use problem::{Iterate, LipschitzConstants, Mode, ProblemInstance};
