//! Motion generators, subdivision-bound calculators and an independent
//! certifier for folding convex polyhedral linkages: continuous flattening
//! through a spiky ball, turning equilateral linkages inside-out, and
//! logarithmic push-through motions for tall tetrahedra.

pub mod certify;
pub mod error;
pub mod flatten;
pub mod geom;
pub mod io;
pub mod linkage;
pub mod motion;
pub mod noneq;
pub mod reverse;

pub use certify::{certify_motion, certify_sampled, Certificate, CertifyProfile, TerminalCheck};
pub use geom::{Plane3, Point3, Segment3};
pub use linkage::{build_shape, BuiltShape, Linkage, ShapeSpec, State};
pub use motion::{MotionStage, MotionTrace, SampledTrace};
