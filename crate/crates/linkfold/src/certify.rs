//! Independent verifier for generated motions: length preservation,
//! positive clearance outside declared contacts, continuity, contact
//! stickiness, and terminal conditions (flat / collinear / mirror).
//!
//! The certifier only ever looks at sampled frames, so a trace loaded from
//! disk certifies exactly like the trace that produced it.

use serde::{Deserialize, Serialize};

use crate::geom::{
    fit_line, fit_plane, reflect_across_plane, rigid_align_rms, segment_min_distance,
    signed_volume, Plane3, Point3, Segment3,
};
use crate::linkage::State;
use crate::motion::{ContactSet, Frame, MotionTrace, SampledTrace};

/// Default number of certification samples per stage.
pub const DEFAULT_SAMPLES_PER_STAGE: usize = 1_000;
/// Two bars closer than this are considered touching.
pub const TOUCH_TOL: f64 = 1e-7;

/// What the final state of a motion must satisfy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TerminalCheck {
    None,
    Flat { tol: f64 },
    Collinear { tol: f64 },
    Mirror { plane: Plane3, tol: f64 },
}

/// Tolerances and sampling density for one certification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyProfile {
    pub samples_per_stage: usize,
    pub tol_length: f64,
    pub min_clearance: f64,
    pub terminal: TerminalCheck,
}

impl CertifyProfile {
    pub fn new(min_clearance: f64, terminal: TerminalCheck) -> Self {
        CertifyProfile {
            samples_per_stage: DEFAULT_SAMPLES_PER_STAGE,
            tol_length: 1e-9,
            min_clearance,
            terminal,
        }
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples_per_stage = n;
        self
    }
}

/// Location of a worst case: time plus the offending edge pair or vertex.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_pair: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex: Option<usize>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Worst-case measured value (error for upper-bounded checks, minimum
    /// clearance for lower-bounded ones).
    pub worst_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckResult {
    fn passing(name: &str, margin: f64) -> Self {
        CheckResult { name: name.into(), pass: true, worst_margin: margin, witness: None }
    }

    fn failing(name: &str, margin: f64, witness: Witness) -> Self {
        CheckResult { name: name.into(), pass: false, worst_margin: margin, witness: Some(witness) }
    }
}

/// Pass/fail report with per-check worst-case margins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub pass: bool,
    pub sampling_n: usize,
    pub tol_length: f64,
    pub min_clearance: f64,
    pub checks: Vec<CheckResult>,
}

impl Certificate {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Worst bar-length error over all frames.
pub fn check_lengths(st: &SampledTrace, tol: f64) -> CheckResult {
    let mut worst = 0.0f64;
    let mut witness = None;
    for frame in &st.frames {
        for (k, &(i, j)) in st.linkage.edges().iter().enumerate() {
            let err =
                (frame.positions[i].dist(frame.positions[j]) - st.linkage.lengths()[k]).abs();
            if err > worst {
                worst = err;
                witness = Some(Witness {
                    t: Some(frame.t),
                    edge_pair: Some((i, j)),
                    vertex: None,
                    detail: format!("edge ({i},{j})"),
                });
            }
        }
    }
    if worst <= tol {
        CheckResult::passing("lengths", worst)
    } else {
        CheckResult::failing("lengths", worst, witness.unwrap_or_default())
    }
}

/// Minimum clearance over all frames between non-adjacent bars not declared
/// as contacts in the frame's stage. A brute-force all-pairs scan.
pub fn check_clearance(st: &SampledTrace, delta: f64) -> CheckResult {
    let (min, witness) = clearance_scan(st);
    if min >= delta {
        CheckResult::passing("clearance", min)
    } else {
        CheckResult::failing("clearance", min, witness.unwrap_or_default())
    }
}

fn clearance_scan(st: &SampledTrace) -> (f64, Option<Witness>) {
    let edges = st.linkage.edges();
    let mut min = f64::INFINITY;
    let mut witness = None;
    for frame in &st.frames {
        let contacts = &st.stages[frame.stage].contacts;
        if matches!(contacts, ContactSet::All) {
            continue;
        }
        for e in 0..edges.len() {
            let se = seg(frame, edges[e]);
            for f in (e + 1)..edges.len() {
                if st.linkage.bars_adjacent(e, f) || contacts.contains(e, f) {
                    continue;
                }
                let d = segment_min_distance(&se, &seg(frame, edges[f]));
                if d < min {
                    min = d;
                    witness = Some(Witness {
                        t: Some(frame.t),
                        edge_pair: Some((e, f)),
                        vertex: None,
                        detail: format!(
                            "bars {:?} and {:?} in stage `{}`",
                            edges[e], edges[f], st.stages[frame.stage].name
                        ),
                    });
                }
            }
        }
    }
    (min, witness)
}

fn seg(frame: &Frame, (i, j): (usize, usize)) -> Segment3 {
    Segment3 { a: frame.positions[i], b: frame.positions[j] }
}

/// Per-frame minimum clearance (for the CSV timeline).
pub fn clearance_timeline(st: &SampledTrace) -> Vec<(f64, f64, (usize, usize))> {
    let edges = st.linkage.edges();
    let mut rows = Vec::new();
    for frame in &st.frames {
        let contacts = &st.stages[frame.stage].contacts;
        if matches!(contacts, ContactSet::All) {
            continue;
        }
        let mut min = f64::INFINITY;
        let mut pair = (0, 0);
        for e in 0..edges.len() {
            let se = seg(frame, edges[e]);
            for f in (e + 1)..edges.len() {
                if st.linkage.bars_adjacent(e, f) || contacts.contains(e, f) {
                    continue;
                }
                let d = segment_min_distance(&se, &seg(frame, edges[f]));
                if d < min {
                    min = d;
                    pair = (e, f);
                }
            }
        }
        if min.is_finite() {
            rows.push((frame.t, min, pair));
        }
    }
    rows
}

/// No teleporting: within each stage, the largest per-vertex step between
/// consecutive uniform frames must not exceed 10x the vertex's mean step.
pub fn check_continuity(st: &SampledTrace) -> CheckResult {
    let n_vertices = st.linkage.vertex_count();
    let mut worst_ratio = 0.0f64;
    let mut witness = None;
    for (stage_idx, _) in st.stages.iter().enumerate() {
        let frames: Vec<&Frame> = st
            .frames
            .iter()
            .filter(|f| f.stage == stage_idx)
            .collect();
        if frames.len() < 2 {
            continue;
        }
        let intervals = (frames.len() - 1) as f64;
        for v in 0..n_vertices {
            let mut path = 0.0;
            let mut max_step = 0.0f64;
            let mut max_t = 0.0;
            for w in frames.windows(2) {
                let step = w[0].positions[v].dist(w[1].positions[v]);
                path += step;
                if step > max_step {
                    max_step = step;
                    max_t = w[1].t;
                }
            }
            if path < 1e-12 {
                continue;
            }
            let bound = 10.0 * path / intervals;
            let ratio = max_step / bound;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                witness = Some(Witness {
                    t: Some(max_t),
                    edge_pair: None,
                    vertex: Some(v),
                    detail: format!(
                        "vertex {v} steps {max_step:.3e} vs bound {bound:.3e} in stage `{}`",
                        st.stages[stage_idx].name
                    ),
                });
            }
        }
    }
    if worst_ratio <= 1.0 {
        CheckResult::passing("continuity", worst_ratio)
    } else {
        CheckResult::failing("continuity", worst_ratio, witness.unwrap_or_default())
    }
}

/// Sticky model: within a maximal run of stages where a pair is declared,
/// once the pair touches it must remain touching.
pub fn check_contacts(st: &SampledTrace) -> CheckResult {
    let edges = st.linkage.edges();
    let mut worst = 0.0f64;
    let mut witness = None;
    // Candidate pairs: declared somewhere and not adjacent.
    let mut pairs = std::collections::BTreeSet::new();
    for meta in &st.stages {
        match &meta.contacts {
            ContactSet::None => {}
            ContactSet::Pairs(set) => {
                pairs.extend(set.iter().copied());
            }
            ContactSet::All => {
                for e in 0..edges.len() {
                    for f in (e + 1)..edges.len() {
                        if !st.linkage.bars_adjacent(e, f) {
                            pairs.insert((e, f));
                        }
                    }
                }
            }
        }
    }
    // Subsample frames: stickiness is a topological condition, a coarse walk
    // over the uniform frames suffices (and keeps the All case affordable).
    let stride = (st.frames.len() / (st.stages.len() * 50).max(1)).max(1);
    for &(e, f) in &pairs {
        let mut touched = false;
        for frame in st.frames.iter().step_by(stride) {
            let declared = st.stages[frame.stage].contacts.contains(e, f);
            if !declared {
                touched = false;
                continue;
            }
            let d = segment_min_distance(&seg(frame, edges[e]), &seg(frame, edges[f]));
            if d <= TOUCH_TOL {
                touched = true;
            } else if touched && d > worst {
                worst = d;
                witness = Some(Witness {
                    t: Some(frame.t),
                    edge_pair: Some((e, f)),
                    vertex: None,
                    detail: format!("declared contact separated to {d:.3e}"),
                });
            }
        }
    }
    if worst <= TOUCH_TOL {
        CheckResult::passing("contacts", worst)
    } else {
        CheckResult::failing("contacts", worst, witness.unwrap_or_default())
    }
}

/// Best-fit plane residual of a state.
pub fn check_flat(state: &State, tol: f64) -> CheckResult {
    let (_, resid) = fit_plane(&state.positions);
    if resid <= tol {
        CheckResult::passing("flat", resid)
    } else {
        CheckResult::failing(
            "flat",
            resid,
            Witness { detail: format!("plane residual {resid:.3e}"), ..Default::default() },
        )
    }
}

/// Best-fit line residual of a state.
pub fn check_collinear(state: &State, tol: f64) -> CheckResult {
    let (_, _, resid) = fit_line(&state.positions);
    if resid <= tol {
        CheckResult::passing("collinear", resid)
    } else {
        CheckResult::failing(
            "collinear",
            resid,
            Witness { detail: format!("line residual {resid:.3e}"), ..Default::default() },
        )
    }
}

/// Mirror congruence: reflect `initial` through `plane`, rigidly align onto
/// `final_state` (label-respecting) and compare; also requires the signed
/// volume of a non-coplanar labeled quadruple to flip sign.
pub fn check_mirror(initial: &State, final_state: &State, plane: &Plane3, tol: f64) -> CheckResult {
    let reflected: Vec<Point3> = initial
        .positions
        .iter()
        .map(|p| reflect_across_plane(*p, plane))
        .collect();
    let rms = rigid_align_rms(&reflected, &final_state.positions);
    let mut pass = rms <= tol;
    let mut detail = String::new();
    match non_coplanar_quadruple(&initial.positions) {
        Some([a, b, c, d]) => {
            let v0 = signed_volume(
                initial.positions[a],
                initial.positions[b],
                initial.positions[c],
                initial.positions[d],
            );
            let v1 = signed_volume(
                final_state.positions[a],
                final_state.positions[b],
                final_state.positions[c],
                final_state.positions[d],
            );
            if v0 * v1 >= 0.0 {
                pass = false;
                detail = format!("orientation did not flip (volumes {v0:.3e}, {v1:.3e})");
            }
        }
        None => {
            detail = "orientation check skipped: all quadruples coplanar".into();
        }
    }
    if pass {
        CheckResult { name: "mirror".into(), pass: true, worst_margin: rms, witness: None }
    } else {
        CheckResult::failing(
            "mirror",
            rms,
            Witness { detail: if detail.is_empty() { format!("rms {rms:.3e}") } else { detail }, ..Default::default() },
        )
    }
}

fn non_coplanar_quadruple(points: &[Point3]) -> Option<[usize; 4]> {
    let n = points.len();
    if n < 4 {
        return None;
    }
    // Greedy: a far pair, the point maximizing area, then volume.
    for a in 0..n.min(4) {
        for b in (a + 1)..n {
            let ab = points[b].sub(points[a]);
            if ab.norm() < 1e-9 {
                continue;
            }
            for c in (b + 1)..n {
                let area = ab.cross(points[c].sub(points[a])).norm();
                if area < 1e-9 {
                    continue;
                }
                for d in (c + 1)..n {
                    if signed_volume(points[a], points[b], points[c], points[d]).abs() > 1e-9 {
                        return Some([a, b, c, d]);
                    }
                }
            }
        }
    }
    None
}

/// Run the whole bundle and assemble a certificate.
pub fn certify_sampled(st: &SampledTrace, profile: &CertifyProfile) -> Certificate {
    let mut checks = vec![
        check_lengths(st, profile.tol_length),
        check_clearance(st, profile.min_clearance),
        check_continuity(st),
        check_contacts(st),
    ];
    let final_state = st.final_state();
    match &profile.terminal {
        TerminalCheck::None => {}
        TerminalCheck::Flat { tol } => checks.push(check_flat(&final_state, *tol)),
        TerminalCheck::Collinear { tol } => checks.push(check_collinear(&final_state, *tol)),
        TerminalCheck::Mirror { plane, tol } => {
            checks.push(check_mirror(&st.initial(), &final_state, plane, *tol))
        }
    }
    Certificate {
        pass: checks.iter().all(|c| c.pass),
        sampling_n: profile.samples_per_stage,
        tol_length: profile.tol_length,
        min_clearance: profile.min_clearance,
        checks,
    }
}

/// Sample a motion and certify it. The returned sampled trace includes a
/// refinement pass (10x density around the worst 1% of clearance times), so
/// writing it to disk and re-certifying reproduces this certificate.
pub fn certify_motion(
    trace: &MotionTrace,
    profile: &CertifyProfile,
) -> Result<(Certificate, SampledTrace), crate::error::MotionError> {
    let mut sampled = trace.sample_per_stage(profile.samples_per_stage)?;
    refine_worst_clearance(trace, &mut sampled);
    Ok((certify_sampled(&sampled, profile), sampled))
}

/// Insert extra frames at 10x density around the 1% of uniform frames with
/// the smallest clearance, guarding against sampling artifacts.
fn refine_worst_clearance(trace: &MotionTrace, sampled: &mut SampledTrace) {
    let edges = sampled.linkage.edges();
    let mut scored: Vec<(f64, usize)> = Vec::new();
    for (idx, frame) in sampled.frames.iter().enumerate() {
        let contacts = &sampled.stages[frame.stage].contacts;
        if matches!(contacts, ContactSet::All) {
            continue;
        }
        let mut min = f64::INFINITY;
        for e in 0..edges.len() {
            let se = seg(frame, edges[e]);
            for f in (e + 1)..edges.len() {
                if sampled.linkage.bars_adjacent(e, f) || contacts.contains(e, f) {
                    continue;
                }
                min = min.min(segment_min_distance(&se, &seg(frame, edges[f])));
            }
        }
        if min.is_finite() {
            scored.push((min, idx));
        }
    }
    if scored.is_empty() {
        return;
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let keep = (scored.len() / 100).max(1);
    let mut extra = Vec::new();
    for &(_, idx) in scored.iter().take(keep) {
        let frame = &sampled.frames[idx];
        let stage = frame.stage;
        let (t0, t1) = (sampled.stages[stage].t0, sampled.stages[stage].t1);
        if t1 <= t0 {
            continue;
        }
        let local = (frame.t - t0) / (t1 - t0);
        let half = 1.0 / (profile_samples(sampled, stage) as f64);
        for k in 1..10 {
            let l = (local - half + (2.0 * half) * k as f64 / 10.0).clamp(0.0, 1.0);
            let state = trace.stages()[stage].state_at(l);
            extra.push(Frame { t: t0 + (t1 - t0) * l, stage, positions: state.positions });
        }
    }
    sampled.frames.extend(extra);
    // Keep frames ordered in time; the continuity check and the initial /
    // final accessors rely on it.
    sampled
        .frames
        .sort_by(|a, b| (a.stage, a.t).partial_cmp(&(b.stage, b.t)).unwrap());
}

fn profile_samples(st: &SampledTrace, stage: usize) -> usize {
    st.frames.iter().filter(|f| f.stage == stage).count().max(2) - 1
}
