//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,
    #[error("axis direction is not unit length (|axis| = {norm})")]
    NonUnitAxis { norm: f64 },
    #[error("plane normal is not unit length (|n| = {norm})")]
    NonUnitNormal { norm: f64 },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
}

#[derive(Debug, Error)]
pub enum LinkageError {
    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),
    #[error("edge ({0}, {1}) is not in the linkage")]
    NoSuchEdge(usize, usize),
    #[error("split fraction {0} outside (0, 1)")]
    BadFraction(f64),
    #[error("vertex set is not a face of the linkage")]
    NotAFace,
    #[error("state violates edge lengths: edge ({i}, {j}) has length {actual}, expected {expected}")]
    LengthViolation { i: usize, j: usize, actual: f64, expected: f64 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("model violation: only {found} vertex-disjoint paths found (expected 3); input graph is not 3-connected")]
    NotThreeConnected { found: usize },
    #[error("no contiguous three-arc grouping separates the path vertices in layer {layer}")]
    InfeasibleGrouping { layer: usize },
    #[error("geodesic offset {0} breaks strict convexity")]
    ConvexityBroken(f64),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("sample count must be at least 2 (got {0})")]
    TooFewSamples(usize),
    #[error("generator bug: edge ({i}, {j}) length error {err} at t = {t}")]
    LengthViolation { i: usize, j: usize, err: f64, t: f64 },
    #[error("cannot concatenate: traces are over different linkages")]
    LinkageMismatch,
    #[error("cannot concatenate: endpoint states differ by {0} (> 1e-9)")]
    EndpointMismatch(f64),
    #[error("trace has no stages")]
    Empty,
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("center must lie strictly inside the hull or inside a face (violation: {0})")]
    BadCenter(String),
    #[error("linkage is not a midpoint subdivision of the base linkage")]
    NotMidpointSubdivided,
    #[error("pyramid condition violated: {0}")]
    PyramidCondition(String),
    #[error("prism height {h} outside the admissible interval ({lo}, {hi})")]
    PrismHeight { h: f64, lo: f64, hi: f64 },
    #[error("stage `{stage}`: {detail}")]
    Stage { stage: String, detail: String },
    #[error("schedule infeasible: {0}")]
    Schedule(String),
    #[error(transparent)]
    Linkage(#[from] LinkageError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("edge length {l} shorter than clearance unit {c}")]
    EdgeTooShort { l: f64, c: f64 },
    #[error("degenerate query: dist(e,f) + circumf(f)/2 must be positive")]
    ZeroRadius,
    #[error("n must be an even integer >= 4 realizable as a triangulated polyhedron (got {0})")]
    BadTriangleCount(i64),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Linkage(#[from] LinkageError),
}
