//! Continuous flattening of a convex polyhedral linkage after midpoint
//! subdivision: shrink everything toward a center into a spiky ball, then
//! rotate the spikes one by one into a plane, and optionally onto a line.

use crate::error::GenerateError;
use crate::geom::{
    orthonormal_to, rotate_vec, segment_min_distance, slerp_unit, Plane3, Point3, Segment3, Vec3,
};
use crate::linkage::{BuiltShape, State, Subdivided};
use crate::motion::{ContactSet, MotionStage, MotionTrace};

/// Where the spiky-ball center comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenterSpec {
    /// Centroid of the face with this builder-canonical index.
    Face(usize),
    /// Centroid of all vertices (strictly interior for convex solids).
    Hull,
    /// An explicit point, validated to be interior to the hull or a face.
    Point(Point3),
}

/// One folded edge of the spiky ball: both halves of an original edge lie
/// along `dir` from the center, ending at the midpoint joint `tip`.
#[derive(Debug, Clone)]
pub struct Spike {
    pub dir: Vec3,
    pub half_length: f64,
    pub tip: usize,
    /// Indices of the two bars (in the subdivided linkage) forming the spike.
    pub bars: (usize, usize),
    pub original_edge: usize,
}

/// Degenerate configuration with all original vertices at the center and
/// one spike per original edge.
#[derive(Debug, Clone)]
pub struct SpikyBall {
    pub center: Point3,
    pub spikes: Vec<Spike>,
    pub base_vertex_count: usize,
}

/// Everything the flatten pipeline produced.
pub struct FlattenResult {
    pub trace: MotionTrace,
    pub subdivided: Subdivided,
    pub ball: SpikyBall,
    pub center: Point3,
    pub target_plane: Plane3,
}

/// Outward fold direction of each original edge during shrinking: the
/// component of (edge midpoint - center) orthogonal to the edge.
fn fold_directions(
    sub: &Subdivided,
    base_state: &State,
    center: Point3,
) -> Result<Vec<Vec3>, GenerateError> {
    sub.original_edges
        .iter()
        .map(|&(a, b)| {
            let pa = base_state.positions[a];
            let pb = base_state.positions[b];
            let edge_dir = pb.sub(pa).normalized()?;
            let radial = pa.mid(pb).sub(center);
            radial
                .reject_from_unit(edge_dir)
                .normalized()
                .map_err(|_| {
                    GenerateError::BadCenter(format!("center lies on the line of edge ({a}, {b})"))
                })
        })
        .collect()
}

fn require_midpoint_subdivision(sub: &Subdivided) -> Result<(), GenerateError> {
    for (k, inserted) in sub.inserted.iter().enumerate() {
        if inserted.len() != 1 {
            return Err(GenerateError::NotMidpointSubdivided);
        }
        let (a, b) = sub.original_edges[k];
        let m = inserted[0];
        let la = sub
            .linkage
            .length_of(a, m)
            .ok_or(GenerateError::NotMidpointSubdivided)?;
        let lb = sub
            .linkage
            .length_of(m, b)
            .ok_or(GenerateError::NotMidpointSubdivided)?;
        if (la - lb).abs() > 1e-12 * (la + lb) {
            return Err(GenerateError::NotMidpointSubdivided);
        }
    }
    Ok(())
}

/// Validate that `center` is strictly inside the hull, or inside exactly one
/// face, using the built shape's face planes.
pub fn validate_center(shape: &BuiltShape, center: Point3) -> Result<(), GenerateError> {
    let pos = &shape.state.positions;
    let inner = {
        let mut c = Point3::ZERO;
        for p in pos {
            c = c.add(*p);
        }
        c.scale(1.0 / pos.len() as f64)
    };
    let mut on_faces = Vec::new();
    for (idx, face) in shape.faces.iter().enumerate() {
        let a = pos[face[0]];
        let mut n = pos[face[1]].sub(a).cross(pos[face[2]].sub(a)).normalized()?;
        if n.dot(inner.sub(a)) > 0.0 {
            n = n.scale(-1.0); // outward
        }
        let d = center.sub(a).dot(n);
        if d > 1e-9 {
            return Err(GenerateError::BadCenter(format!("outside face {idx} by {d:.3e}")));
        }
        if d > -1e-9 {
            on_faces.push(idx);
        }
    }
    match on_faces.len() {
        0 => Ok(()),
        1 => {
            // Must be strictly inside the face polygon.
            let face = &shape.faces[on_faces[0]];
            for k in 0..face.len() {
                let a = pos[face[k]];
                let b = pos[face[(k + 1) % face.len()]];
                let seg = Segment3 { a, b };
                if crate::geom::point_segment_distance(center, &seg) < 1e-9 {
                    return Err(GenerateError::BadCenter(
                        "center lies on a boundary edge of a face".into(),
                    ));
                }
            }
            Ok(())
        }
        _ => Err(GenerateError::BadCenter(
            "center lies on an edge or vertex of the hull".into(),
        )),
    }
}

pub fn resolve_center(shape: &BuiltShape, spec: CenterSpec) -> Result<Point3, GenerateError> {
    let center = match spec {
        CenterSpec::Face(k) => {
            let face = shape
                .faces
                .get(k)
                .ok_or_else(|| GenerateError::BadCenter(format!("no face {k}")))?;
            let mut c = Point3::ZERO;
            for &v in face {
                c = c.add(shape.state.positions[v]);
            }
            c.scale(1.0 / face.len() as f64)
        }
        CenterSpec::Hull => {
            let mut c = Point3::ZERO;
            for p in &shape.state.positions {
                c = c.add(*p);
            }
            c.scale(1.0 / shape.state.positions.len() as f64)
        }
        CenterSpec::Point(p) => p,
    };
    validate_center(shape, center)?;
    Ok(center)
}

/// State of the shrinking motion at scale `s`: original vertices at
/// `center + s (p - center)`, each midpoint at the apex of the isosceles
/// triangle over the moved edge, sticking outward.
fn shrink_positions(
    sub: &Subdivided,
    base: &[Point3],
    center: Point3,
    dirs: &[Vec3],
    s: f64,
) -> Vec<Point3> {
    let mut out = vec![Point3::ZERO; sub.linkage.vertex_count()];
    let base_count = base.len();
    for v in 0..base_count {
        out[v] = center.add(base[v].sub(center).scale(s));
    }
    for (k, &(a, b)) in sub.original_edges.iter().enumerate() {
        let m = sub.inserted[k][0];
        let half = base[a].dist(base[b]) * 0.5;
        let mid_moved = out[a].mid(out[b]);
        // Height keeping |m - a'| = |m - b'| = half exactly.
        let h = (half * half * (1.0 - s * s)).max(0.0).sqrt();
        out[m] = mid_moved.add(dirs[k].scale(h));
    }
    out
}

/// Single-stage shrink of the subdivided linkage toward `center`, from
/// scale `s_from` down to `s_to` (1 = initial state, 0 = spiky ball).
pub fn spiky_ball_motion(
    sub: &Subdivided,
    center: Point3,
    s_from: f64,
    s_to: f64,
    contacts: ContactSet,
) -> Result<MotionStage, GenerateError> {
    require_midpoint_subdivision(sub)?;
    let base: Vec<Point3> = sub.state.positions[..sub.base_vertex_count()].to_vec();
    let dirs = fold_directions(sub, &sub.state, center)?;
    let sub_clone = sub.clone();
    // Parameterize by the fold angle (s = cos theta) so the midpoints'
    // height sqrt(1 - s^2) moves at bounded speed near s = 1.
    let theta_from = s_from.clamp(-1.0, 1.0).acos();
    let theta_to = s_to.clamp(-1.0, 1.0).acos();
    Ok(MotionStage::new(
        format!("shrink[{s_from:.3}->{s_to:.3}]"),
        (theta_to - theta_from).abs().max(1e-3),
        contacts,
        move |t| {
            let s = if t >= 1.0 {
                s_to // land exactly on the target scale
            } else {
                (theta_from + (theta_to - theta_from) * t).cos()
            };
            shrink_positions(&sub_clone, &base, center, &dirs, s)
        },
    ))
}

impl Subdivided {
    /// Number of vertices of the base (pre-subdivision) linkage.
    pub fn base_vertex_count(&self) -> usize {
        self.linkage.vertex_count() - self.inserted.iter().map(Vec::len).sum::<usize>()
    }
}

/// Build the spiky ball reached at s = 0.
pub fn spiky_ball(sub: &Subdivided, center: Point3) -> Result<SpikyBall, GenerateError> {
    require_midpoint_subdivision(sub)?;
    let dirs = fold_directions(sub, &sub.state, center)?;
    let spikes = sub
        .original_edges
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let m = sub.inserted[k][0];
            let bar_a = sub.linkage.edge_index(a, m).expect("bar a");
            let bar_b = sub.linkage.edge_index(m, b).expect("bar b");
            Spike {
                dir: dirs[k],
                half_length: sub.state.positions[a].dist(sub.state.positions[b]) * 0.5,
                tip: m,
                bars: (bar_a, bar_b),
                original_edge: k,
            }
        })
        .collect();
    Ok(SpikyBall { center, spikes, base_vertex_count: sub.base_vertex_count() })
}

/// Deterministic tiny angle derived from the seed and an index.
fn perturb_angle(seed: u64, k: usize) -> f64 {
    let mut x = seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    (x % 1000) as f64 * 1e-9
}

struct SpikeFan {
    center: Point3,
    tips: Vec<usize>,
    radii: Vec<f64>,
    vertex_count: usize,
}

impl SpikeFan {
    /// All original vertices sit at the center; tips fan out along `dirs`.
    fn positions(&self, dirs: &[Vec3]) -> Vec<Point3> {
        let mut out = vec![self.center; self.vertex_count];
        for (k, &tip) in self.tips.iter().enumerate() {
            out[tip] = self.center.add(dirs[k].scale(self.radii[k]));
        }
        out
    }
}

/// Greedy rotation of spikes into the target plane: repeatedly take the
/// spike with the smallest angle to the plane and rotate it straight to its
/// in-plane projection. Original vertices stay coincident at the center, a
/// declared contact cluster, so these stages declare all pairs.
pub fn spikes_to_plane(
    ball: &SpikyBall,
    vertex_count: usize,
    target: &Plane3,
    seed: u64,
) -> Result<Vec<MotionStage>, GenerateError> {
    let n = target.unit_normal;
    let mut dirs: Vec<Vec3> = ball.spikes.iter().map(|s| s.dir).collect();
    // Landing directions: in-plane projections, with deterministic angular
    // separation of near-coincident ones.
    let mut landing: Vec<Vec3> = Vec::with_capacity(dirs.len());
    for d in &dirs {
        let proj = d.reject_from_unit(n);
        let p = if proj.norm() < 1e-9 {
            orthonormal_to(n) // vertical spike: deterministic in-plane dir
        } else {
            proj.normalized()?
        };
        landing.push(p);
    }
    for k in 0..landing.len() {
        for j in 0..k {
            if landing[k].sub(landing[j]).norm() < 1e-7 {
                let phi = (perturb_angle(seed, k) + 1e-7).min(1e-6);
                landing[k] = rotate_vec(landing[k], n, phi);
            }
        }
    }

    let angle_of = |d: &Vec3| d.dot(n).abs().clamp(0.0, 1.0).asin();
    let mut order: Vec<usize> = (0..ball.spikes.len()).collect();
    order.sort_by(|&a, &b| {
        angle_of(&dirs[a])
            .partial_cmp(&angle_of(&dirs[b]))
            .unwrap()
            .then(a.cmp(&b))
    });

    let fan = std::sync::Arc::new(SpikeFan {
        center: ball.center,
        tips: ball.spikes.iter().map(|s| s.tip).collect(),
        radii: ball.spikes.iter().map(|s| s.half_length).collect(),
        vertex_count,
    });

    let mut stages = Vec::new();
    for (step, &k) in order.iter().enumerate() {
        let alpha = angle_of(&dirs[k]);
        // Greedy safety: the moving spike has the smallest remaining angle.
        for &j in &order[step..] {
            debug_assert!(angle_of(&dirs[j]) + 1e-12 >= alpha);
        }
        let from = dirs[k];
        let to = landing[k];
        if from.sub(to).norm() < 1e-15 {
            dirs[k] = to;
            continue;
        }
        let snapshot = dirs.clone();
        let fan = fan.clone();
        stages.push(MotionStage::new(
            format!("spike_to_plane[{step}:e{}]", ball.spikes[k].original_edge),
            alpha.max(0.05),
            ContactSet::All,
            move |t| {
                let mut d = snapshot.clone();
                d[k] = slerp_unit(from, to, t);
                fan.positions(&d)
            },
        ));
        dirs[k] = to;
    }
    if stages.is_empty() {
        // Identity motion: everything was already flat.
        let state = State::new(fan.positions(&dirs));
        stages.push(MotionStage::hold("spikes_already_flat", state, 0.1));
    }
    Ok(stages)
}

/// Same greedy, measured against a line within the plane; ends with every
/// spike along the +/- line direction.
pub fn spikes_to_line(
    ball: &SpikyBall,
    vertex_count: usize,
    flat_dirs: &[Vec3],
    target: &Plane3,
    line_dir: Vec3,
) -> Result<Vec<MotionStage>, GenerateError> {
    let n = target.unit_normal;
    let u = line_dir.reject_from_unit(n).normalized()?;
    let mut dirs: Vec<Vec3> = flat_dirs.to_vec();
    let angle_to_line = |d: &Vec3| d.dot(u).abs().clamp(0.0, 1.0).acos();
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    order.sort_by(|&a, &b| {
        angle_to_line(&dirs[a])
            .partial_cmp(&angle_to_line(&dirs[b]))
            .unwrap()
            .then(a.cmp(&b))
    });
    let fan = std::sync::Arc::new(SpikeFan {
        center: ball.center,
        tips: ball.spikes.iter().map(|s| s.tip).collect(),
        radii: ball.spikes.iter().map(|s| s.half_length).collect(),
        vertex_count,
    });
    let mut stages = Vec::new();
    for (step, &k) in order.iter().enumerate() {
        let beta = angle_to_line(&dirs[k]);
        // Ties at 90 degrees break toward +u.
        let sign = if dirs[k].dot(u) >= 0.0 { 1.0 } else { -1.0 };
        let to = u.scale(sign);
        let from = dirs[k];
        if from.sub(to).norm() < 1e-15 {
            dirs[k] = to;
            continue;
        }
        let snapshot = dirs.clone();
        let fan = fan.clone();
        stages.push(MotionStage::new(
            format!("spike_to_line[{step}:e{}]", ball.spikes[k].original_edge),
            beta.max(0.05),
            ContactSet::All,
            move |t| {
                let mut d = snapshot.clone();
                d[k] = slerp_unit(from, to, t);
                fan.positions(&d)
            },
        ));
        dirs[k] = to;
    }
    if stages.is_empty() {
        let state = State::new(fan.positions(&dirs));
        stages.push(MotionStage::hold("spikes_already_collinear", state, 0.1));
    }
    Ok(stages)
}

/// Options for [`flatten_pipeline`].
#[derive(Debug, Clone, Copy)]
pub struct FlattenOptions {
    pub center: CenterSpec,
    pub to_line: bool,
    /// Slack knob; clearance is certified at `epsilon / 4` outside declared
    /// contacts, and the undeclared part of the shrink stops while the
    /// clearance still has margin against that threshold.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for FlattenOptions {
    fn default() -> Self {
        FlattenOptions { center: CenterSpec::Face(0), to_line: false, epsilon: 0.05, seed: 0 }
    }
}

/// Full flattening pipeline: midpoint subdivision, shrink to the spiky
/// ball, spikes into the plane, optionally spikes onto a line.
pub fn flatten_pipeline(
    shape: &BuiltShape,
    options: &FlattenOptions,
) -> Result<FlattenResult, GenerateError> {
    if options.epsilon <= 0.0 || options.epsilon > 0.2 {
        return Err(GenerateError::Stage {
            stage: "flatten".into(),
            detail: format!("epsilon {} outside (0, 0.2]", options.epsilon),
        });
    }
    let sub = crate::linkage::midpoint_subdivide(&shape.linkage, &shape.state)?;
    let center = resolve_center(shape, options.center)?;
    let target_plane = match options.center {
        CenterSpec::Face(k) => {
            let face = &shape.faces[k];
            let pos = &shape.state.positions;
            let n = pos[face[1]]
                .sub(pos[face[0]])
                .cross(pos[face[2]].sub(pos[face[0]]))
                .normalized()?;
            Plane3 { point: center, unit_normal: n }
        }
        _ => Plane3 { point: center, unit_normal: Point3::new(0.0, 0.0, 1.0) },
    };

    // Split the shrink where clearance still clears the certification
    // threshold with margin; past that, every pair is a declared contact
    // converging on the center cluster.
    let s_split = shrink_split_scale(&sub, center, options.epsilon)?;
    let mut stages = Vec::new();
    stages.push(spiky_ball_motion(&sub, center, 1.0, s_split, ContactSet::None)?);
    stages.push(spiky_ball_motion(&sub, center, s_split, 0.0, ContactSet::All)?);

    let ball = spiky_ball(&sub, center)?;
    let plane_stages =
        spikes_to_plane(&ball, sub.linkage.vertex_count(), &target_plane, options.seed)?;
    let flat_dirs: Vec<Vec3> = {
        let last_state = plane_stages.last().unwrap().state_at(1.0);
        ball.spikes
            .iter()
            .map(|s| {
                last_state.positions[s.tip]
                    .sub(center)
                    .normalized()
                    .expect("spike has positive length")
            })
            .collect()
    };
    stages.extend(plane_stages);
    if options.to_line {
        let line_dir = orthonormal_to(target_plane.unit_normal);
        stages.extend(spikes_to_line(
            &ball,
            sub.linkage.vertex_count(),
            &flat_dirs,
            &target_plane,
            line_dir,
        )?);
    }
    let trace = MotionTrace::new(sub.linkage.clone(), stages)?;
    Ok(FlattenResult { trace, subdivided: sub, ball, center, target_plane })
}

/// Largest scale at which the shrink's non-adjacent clearance still clears
/// the safety margin (1.25 x epsilon/4); the undeclared shrink stage stops
/// there and the contact-declared collapse takes over.
fn shrink_split_scale(
    sub: &Subdivided,
    center: Point3,
    epsilon: f64,
) -> Result<f64, GenerateError> {
    let base: Vec<Point3> = sub.state.positions[..sub.base_vertex_count()].to_vec();
    let dirs = fold_directions(sub, &sub.state, center)?;
    let safety = 1.25 * epsilon / 4.0;
    let edges = sub.linkage.edges();
    let scan = 200;
    let mut last_ok = 1.0;
    for k in 1..=scan {
        let s = 1.0 - k as f64 / scan as f64;
        let positions = shrink_positions(sub, &base, center, &dirs, s);
        let mut min = f64::INFINITY;
        'outer: for e in 0..edges.len() {
            let se = Segment3 { a: positions[edges[e].0], b: positions[edges[e].1] };
            for f in (e + 1)..edges.len() {
                if sub.linkage.bars_adjacent(e, f) {
                    continue;
                }
                let sf = Segment3 { a: positions[edges[f].0], b: positions[edges[f].1] };
                min = min.min(segment_min_distance(&se, &sf));
                if min < safety {
                    break 'outer;
                }
            }
        }
        if min < safety {
            break;
        }
        last_ok = s;
    }
    Ok(last_ok.clamp(0.01, 0.95))
}

/// Angle of each spike of `ball` to `plane`.
pub fn spike_angles(ball: &SpikyBall, plane: &Plane3) -> Vec<f64> {
    ball.spikes
        .iter()
        .map(|s| s.dir.dot(plane.unit_normal).abs().clamp(0.0, 1.0).asin())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkage::{build_shape, midpoint_subdivide, ShapeSpec};

    #[test]
    fn shrink_height_examples() {
        // Unit edge: h(1) = 0, h(0) = 1/2, h(1/2) = sqrt(3)/4.
        let h = |s: f64| (0.25 * (1.0 - s * s)).max(0.0).sqrt();
        assert!((h(1.0) - 0.0).abs() < 1e-15);
        assert!((h(0.0) - 0.5).abs() < 1e-15);
        assert!((h(0.5) - 3f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn shrink_preserves_leg_lengths() {
        let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let sub = midpoint_subdivide(&shape.linkage, &shape.state).unwrap();
        let center = resolve_center(&shape, CenterSpec::Face(0)).unwrap();
        let base: Vec<Point3> = sub.state.positions[..4].to_vec();
        let dirs = fold_directions(&sub, &sub.state, center).unwrap();
        for s in [1.0, 0.75, 0.5, 0.25, 0.0] {
            let pos = shrink_positions(&sub, &base, center, &dirs, s);
            for (k, &(a, b)) in sub.original_edges.iter().enumerate() {
                let m = sub.inserted[k][0];
                assert!((pos[a].dist(pos[m]) - 0.5).abs() < 1e-12, "s={s}");
                assert!((pos[m].dist(pos[b]) - 0.5).abs() < 1e-12, "s={s}");
            }
        }
        // Derived check: at s = 1/2 the apex height over the moved chord is
        // sqrt(3)/4, forced by the |A'M'| = 1/2 leg constraint.
        let pos = shrink_positions(&sub, &base, center, &dirs, 0.5);
        let (a, b) = sub.original_edges[0];
        let m = sub.inserted[0][0];
        let apex_height = pos[m].dist(pos[a].mid(pos[b]));
        assert!((apex_height - 3f64.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn spiky_ball_at_zero_collapses_originals() {
        let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let sub = midpoint_subdivide(&shape.linkage, &shape.state).unwrap();
        let center = resolve_center(&shape, CenterSpec::Face(0)).unwrap();
        let stage = spiky_ball_motion(&sub, center, 1.0, 0.0, ContactSet::All).unwrap();
        let end = stage.state_at(1.0);
        for v in 0..4 {
            assert!(end.positions[v].dist(center) < 1e-12);
        }
        // Monotone shrinking of original vertices toward the center.
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let d = stage.state_at(t).positions[3].dist(center);
            assert!(d <= prev + 1e-12);
            prev = d;
        }
    }

    #[test]
    fn bad_centers_rejected() {
        let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let v = shape.state.positions[0];
        assert!(resolve_center(&shape, CenterSpec::Point(v)).is_err());
        assert!(resolve_center(&shape, CenterSpec::Point(Point3::new(5.0, 5.0, 5.0))).is_err());
        assert!(resolve_center(&shape, CenterSpec::Face(0)).is_ok());
        assert!(resolve_center(&shape, CenterSpec::Hull).is_ok());
    }

    #[test]
    fn greedy_starts_with_smallest_angle() {
        let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let sub = midpoint_subdivide(&shape.linkage, &shape.state).unwrap();
        let center = resolve_center(&shape, CenterSpec::Face(0)).unwrap();
        let ball = spiky_ball(&sub, center).unwrap();
        let plane = Plane3::new(center, Point3::new(0.0, 0.0, 1.0)).unwrap();
        let stages = spikes_to_plane(&ball, sub.linkage.vertex_count(), &plane, 0).unwrap();
        assert!(!stages.is_empty());
        // Base-face spikes start in the plane (angle 0); the first moving
        // stage is one of them or the smallest positive angle.
        let angles = spike_angles(&ball, &plane);
        let moved_first: usize = stages[0]
            .name
            .split(":e")
            .nth(1)
            .and_then(|s| s.trim_end_matches(']').parse().ok())
            .unwrap();
        let min_moving = angles
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                // Spikes that needed no motion were skipped.
                stages.iter().any(|st| st.name.contains(&format!(":e{k}]")))
                    || *k == moved_first
            })
            .map(|(_, a)| *a)
            .fold(f64::INFINITY, f64::min);
        assert!(angles[moved_first] <= min_moving + 1e-12);
    }
}
