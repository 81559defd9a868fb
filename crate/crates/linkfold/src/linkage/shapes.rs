//! Builders for every shape family the generators operate on: platonic
//! solids, pyramids, prism stacks, the geodesic lower-bound family, and the
//! tall nonequilateral tetrahedron.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::LinkageError;
use crate::geom::Point3;
use crate::linkage::{Linkage, State, STATE_TOL};

/// Shape descriptor accepted by [`build_shape`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShapeSpec {
    Tetrahedron,
    Cube,
    Icosahedron,
    /// Equilateral triangular base of side `base_edge`, apex edges all
    /// `apex_edge`. The reversal condition is *not* checked here.
    Pyramid { apex_edge: f64, base_edge: f64 },
    /// `k` stacked equilateral triangles of side `side` joined by `k - 1`
    /// prisms with the given heights.
    PrismStack { k: usize, side: f64, heights: Vec<f64> },
    /// Strictly convex triangulated polyhedron with `triangles` base faces
    /// (4 = tetrahedron, 20·nu² = geodesic sphere), each face augmented by a
    /// near-center vertex displaced outward by `delta`.
    Geodesic { triangles: usize, delta: Option<f64> },
    /// Unit equilateral base with three apex edges of length `long_edge`.
    NoneqTetrahedron { long_edge: f64 },
}

/// A built linkage with its embedded convex state and canonical face list.
#[derive(Debug, Clone)]
pub struct BuiltShape {
    pub linkage: Linkage,
    pub state: State,
    /// Faces as vertex cycles, in builder-canonical order.
    pub faces: Vec<Vec<usize>>,
}

pub fn build_shape(spec: &ShapeSpec) -> Result<BuiltShape, LinkageError> {
    let built = match spec {
        ShapeSpec::Tetrahedron => tetrahedron(),
        ShapeSpec::Cube => cube(),
        ShapeSpec::Icosahedron => icosahedron(),
        ShapeSpec::Pyramid { apex_edge, base_edge } => pyramid(*apex_edge, *base_edge)?,
        ShapeSpec::PrismStack { k, side, heights } => prism_stack(*k, *side, heights)?,
        ShapeSpec::Geodesic { triangles, delta } => geodesic(*triangles, *delta)?,
        ShapeSpec::NoneqTetrahedron { long_edge } => {
            if !(*long_edge >= 1.0) {
                return Err(LinkageError::InvalidShape(format!(
                    "long edge must be >= 1 (got {long_edge})"
                )));
            }
            pyramid(*long_edge, 1.0)?
        }
    };
    built.linkage.validate_state(&built.state, STATE_TOL)?;
    Ok(built)
}

fn assemble(
    positions: Vec<Point3>,
    edges: Vec<(usize, usize, f64)>,
    faces: Vec<Vec<usize>>,
) -> Result<BuiltShape, LinkageError> {
    let n = positions.len();
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    let (pairs, lengths) = edges.into_iter().fold(
        (Vec::new(), Vec::new()),
        |(mut p, mut l), (i, j, len)| {
            p.push((i, j));
            l.push(len);
            (p, l)
        },
    );
    let linkage = Linkage::new(n, pairs, lengths, Some(labels))?;
    Ok(BuiltShape { linkage, state: State::new(positions), faces })
}

/// Equilateral triangle of side `side` in the plane `z`, centered on the
/// z-axis, first vertex on the +x axis.
fn triangle_ring(side: f64, z: f64) -> Vec<Point3> {
    let r = side / 3f64.sqrt();
    (0..3)
        .map(|i| {
            let theta = i as f64 * 2.0 * std::f64::consts::PI / 3.0;
            Point3::new(r * theta.cos(), r * theta.sin(), z)
        })
        .collect()
}

fn tetrahedron() -> BuiltShape {
    pyramid(1.0, 1.0).expect("regular tetrahedron is valid")
}

fn pyramid(apex_edge: f64, base_edge: f64) -> Result<BuiltShape, LinkageError> {
    if !(apex_edge > 0.0 && base_edge > 0.0) {
        return Err(LinkageError::InvalidShape("edge lengths must be positive".into()));
    }
    let h2 = apex_edge * apex_edge - base_edge * base_edge / 3.0;
    if h2 <= 0.0 {
        return Err(LinkageError::InvalidShape(format!(
            "apex edge {apex_edge} too short to raise an apex over a base of side {base_edge}"
        )));
    }
    let mut positions = triangle_ring(base_edge, 0.0);
    positions.push(Point3::new(0.0, 0.0, h2.sqrt()));
    let edges = vec![
        (0, 1, base_edge),
        (1, 2, base_edge),
        (2, 0, base_edge),
        (0, 3, apex_edge),
        (1, 3, apex_edge),
        (2, 3, apex_edge),
    ];
    let faces = vec![vec![0, 1, 2], vec![0, 1, 3], vec![1, 2, 3], vec![2, 0, 3]];
    assemble(positions, edges, faces)
}

fn cube() -> BuiltShape {
    let h = 0.5;
    let positions = vec![
        Point3::new(-h, -h, -h),
        Point3::new(h, -h, -h),
        Point3::new(h, h, -h),
        Point3::new(-h, h, -h),
        Point3::new(-h, -h, h),
        Point3::new(h, -h, h),
        Point3::new(h, h, h),
        Point3::new(-h, h, h),
    ];
    let edges = vec![
        (0, 1, 1.0),
        (1, 2, 1.0),
        (2, 3, 1.0),
        (3, 0, 1.0),
        (4, 5, 1.0),
        (5, 6, 1.0),
        (6, 7, 1.0),
        (7, 4, 1.0),
        (0, 4, 1.0),
        (1, 5, 1.0),
        (2, 6, 1.0),
        (3, 7, 1.0),
    ];
    let faces = vec![
        vec![0, 1, 2, 3],
        vec![4, 5, 6, 7],
        vec![0, 1, 5, 4],
        vec![1, 2, 6, 5],
        vec![2, 3, 7, 6],
        vec![3, 0, 4, 7],
    ];
    assemble(positions, edges, faces).expect("cube is valid")
}

fn icosahedron() -> BuiltShape {
    // Cyclic permutations of (0, ±1/2, ±phi/2) give unit edges.
    let p = (1.0 + 5f64.sqrt()) / 4.0; // phi / 2
    let h = 0.5;
    let positions = vec![
        Point3::new(0.0, -h, -p),
        Point3::new(0.0, h, -p),
        Point3::new(0.0, -h, p),
        Point3::new(0.0, h, p),
        Point3::new(-h, -p, 0.0),
        Point3::new(h, -p, 0.0),
        Point3::new(-h, p, 0.0),
        Point3::new(h, p, 0.0),
        Point3::new(-p, 0.0, -h),
        Point3::new(-p, 0.0, h),
        Point3::new(p, 0.0, -h),
        Point3::new(p, 0.0, h),
    ];
    let mut edges = Vec::new();
    for i in 0..12 {
        for j in (i + 1)..12 {
            if (positions[i].dist(positions[j]) - 1.0).abs() < 1e-9 {
                edges.push((i, j, 1.0));
            }
        }
    }
    assert_eq!(edges.len(), 30);
    let faces = triangle_faces(&positions, &edges);
    assert_eq!(faces.len(), 20);
    assemble(positions, edges, faces).expect("icosahedron is valid")
}

/// All 3-cliques of the edge graph; for the triangulated convex solids used
/// here these are exactly the faces.
fn triangle_faces(positions: &[Point3], edges: &[(usize, usize, f64)]) -> Vec<Vec<usize>> {
    let n = positions.len();
    let mut adj = vec![vec![false; n]; n];
    for &(i, j, _) in edges {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    let mut faces = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if !adj[a][b] {
                continue;
            }
            for c in (b + 1)..n {
                if adj[a][c] && adj[b][c] {
                    faces.push(vec![a, b, c]);
                }
            }
        }
    }
    faces
}

fn prism_stack(k: usize, side: f64, heights: &[f64]) -> Result<BuiltShape, LinkageError> {
    if k < 2 {
        return Err(LinkageError::InvalidShape(format!("need at least 2 layers (got {k})")));
    }
    if !(side > 0.0) {
        return Err(LinkageError::InvalidShape("side must be positive".into()));
    }
    if heights.len() != k - 1 {
        return Err(LinkageError::InvalidShape(format!(
            "need {} heights for {k} layers (got {})",
            k - 1,
            heights.len()
        )));
    }
    if heights.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
        return Err(LinkageError::InvalidShape("heights must be positive".into()));
    }
    let mut positions = Vec::new();
    let mut z = 0.0;
    for layer in 0..k {
        if layer > 0 {
            z += heights[layer - 1];
        }
        positions.extend(triangle_ring(side, z));
    }
    let mut edges = Vec::new();
    for layer in 0..k {
        let b = 3 * layer;
        edges.push((b, b + 1, side));
        edges.push((b + 1, b + 2, side));
        edges.push((b + 2, b, side));
        if layer > 0 {
            for c in 0..3 {
                edges.push((b - 3 + c, b + c, heights[layer - 1]));
            }
        }
    }
    let mut faces = vec![vec![0, 1, 2], vec![3 * (k - 1), 3 * (k - 1) + 1, 3 * (k - 1) + 2]];
    for layer in 1..k {
        let b = 3 * layer;
        for c in 0..3 {
            let d = (c + 1) % 3;
            faces.push(vec![b - 3 + c, b - 3 + d, b + d, b + c]);
        }
    }
    assemble(positions, edges, faces)
}

fn geodesic(triangles: usize, delta: Option<f64>) -> Result<BuiltShape, LinkageError> {
    let base = base_triangulated(triangles)?;
    let (positions0, edges0, faces0) = base;
    // Normalize so the mean edge length is 1.
    let mean: f64 = edges0
        .iter()
        .map(|&(i, j)| positions0[i].dist(positions0[j]))
        .sum::<f64>()
        / edges0.len() as f64;
    let positions0: Vec<Point3> = positions0.iter().map(|p| p.scale(1.0 / mean)).collect();
    let delta = delta.unwrap_or(0.01);
    if !(delta > 0.0) {
        return Err(LinkageError::InvalidShape(format!("offset delta must be positive (got {delta})")));
    }

    let mut positions = positions0.clone();
    let mut edges: Vec<(usize, usize, f64)> = edges0
        .iter()
        .map(|&(i, j)| (i, j, positions0[i].dist(positions0[j])))
        .collect();
    let mut faces = Vec::new();
    let interior = centroid(&positions0);
    for tri in &faces0 {
        let (a, b, c) = (tri[0], tri[1], tri[2]);
        let center = positions0[a]
            .add(positions0[b])
            .add(positions0[c])
            .scale(1.0 / 3.0);
        let mut normal = positions0[b]
            .sub(positions0[a])
            .cross(positions0[c].sub(positions0[a]))
            .normalized()?;
        if normal.dot(center.sub(interior)) < 0.0 {
            normal = normal.scale(-1.0);
        }
        let v = positions.len();
        let p = center.add(normal.scale(delta));
        positions.push(p);
        for &w in &[a, b, c] {
            edges.push((w, v, p.dist(positions0[w])));
        }
        faces.push(vec![a, b, v]);
        faces.push(vec![b, c, v]);
        faces.push(vec![c, a, v]);
    }
    let built = assemble(positions, edges, faces)?;
    check_strict_convexity(&built, delta)?;
    Ok(built)
}

fn centroid(points: &[Point3]) -> Point3 {
    let mut c = Point3::ZERO;
    for p in points {
        c = c.add(*p);
    }
    c.scale(1.0 / points.len() as f64)
}

/// Every face's supporting plane must have all non-face vertices strictly on
/// the inner side.
fn check_strict_convexity(built: &BuiltShape, delta: f64) -> Result<(), LinkageError> {
    let pos = &built.state.positions;
    let inner = centroid(pos);
    for face in &built.faces {
        let a = pos[face[0]];
        let normal = pos[face[1]]
            .sub(a)
            .cross(pos[face[2]].sub(a))
            .normalized()
            .map_err(|_| LinkageError::ConvexityBroken(delta))?;
        let sign = if normal.dot(inner.sub(a)) < 0.0 { 1.0 } else { -1.0 };
        for (v, p) in pos.iter().enumerate() {
            if face.contains(&v) {
                continue;
            }
            if sign * p.sub(a).dot(normal) > -1e-9 {
                return Err(LinkageError::ConvexityBroken(delta));
            }
        }
    }
    Ok(())
}

/// The base strictly convex triangulated polyhedron with `triangles` faces:
/// 4 = regular tetrahedron; 20·nu² = frequency-nu icosahedral geodesic.
fn base_triangulated(
    triangles: usize,
) -> Result<(Vec<Point3>, Vec<(usize, usize)>, Vec<Vec<usize>>), LinkageError> {
    if triangles == 4 {
        let t = tetrahedron();
        let edges = t.linkage.edges().to_vec();
        return Ok((t.state.positions, edges, t.faces));
    }
    // triangles = 20 * nu^2 for integer nu >= 1
    let nu2 = triangles / 20;
    let nu = (nu2 as f64).sqrt().round() as usize;
    if triangles % 20 != 0 || nu * nu != nu2 || nu == 0 {
        return Err(LinkageError::InvalidShape(format!(
            "triangle count must be 4 or 20*nu^2 (got {triangles})"
        )));
    }
    let ico = icosahedron();
    if nu == 1 {
        let edges = ico.linkage.edges().to_vec();
        return Ok((ico.state.positions, edges, ico.faces));
    }
    // Subdivide each face into nu^2 triangles on the circumsphere.
    let radius = ico.state.positions[0].norm();
    let mut positions: Vec<Point3> = Vec::new();
    let mut lookup: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut key_of = |p: Point3, positions: &mut Vec<Point3>| -> usize {
        let k = (
            (p.x * 1e9).round() as i64,
            (p.y * 1e9).round() as i64,
            (p.z * 1e9).round() as i64,
        );
        *lookup.entry(k).or_insert_with(|| {
            positions.push(p);
            positions.len() - 1
        })
    };
    let mut faces = Vec::new();
    for tri in &ico.faces {
        let (a, b, c) = (
            ico.state.positions[tri[0]],
            ico.state.positions[tri[1]],
            ico.state.positions[tri[2]],
        );
        let grid_point = |i: usize, j: usize| -> Point3 {
            let (fi, fj) = (i as f64 / nu as f64, j as f64 / nu as f64);
            let p = a
                .add(b.sub(a).scale(fi))
                .add(c.sub(a).scale(fj));
            p.normalized().expect("sphere point").scale(radius)
        };
        for i in 0..nu {
            for j in 0..(nu - i) {
                let p00 = key_of(grid_point(i, j), &mut positions);
                let p10 = key_of(grid_point(i + 1, j), &mut positions);
                let p01 = key_of(grid_point(i, j + 1), &mut positions);
                faces.push(vec![p00, p10, p01]);
                if i + j < nu - 1 {
                    let p11 = key_of(grid_point(i + 1, j + 1), &mut positions);
                    faces.push(vec![p10, p11, p01]);
                }
            }
        }
    }
    let mut edge_set = std::collections::BTreeSet::new();
    for f in &faces {
        for k in 0..3 {
            let (i, j) = (f[k], f[(k + 1) % 3]);
            edge_set.insert((i.min(j), i.max(j)));
        }
    }
    Ok((positions, edge_set.into_iter().collect(), faces))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosahedron_counts() {
        let built = build_shape(&ShapeSpec::Icosahedron).unwrap();
        assert_eq!(built.linkage.vertex_count(), 12);
        assert_eq!(built.linkage.edges().len(), 30);
        assert_eq!(built.faces.len(), 20);
    }

    #[test]
    fn geodesic_edge_counts() {
        // P' has 9n/2 edges for a base with n triangles.
        for &n in &[4usize, 20] {
            let built = build_shape(&ShapeSpec::Geodesic { triangles: n, delta: None }).unwrap();
            assert_eq!(built.linkage.edges().len(), 9 * n / 2, "n = {n}");
            assert_eq!(built.faces.len(), 3 * n);
        }
    }

    #[test]
    fn geodesic_frequency_two() {
        let built = build_shape(&ShapeSpec::Geodesic { triangles: 80, delta: None }).unwrap();
        assert_eq!(built.linkage.edges().len(), 9 * 80 / 2);
    }

    #[test]
    fn geodesic_strict_convexity_fails_for_huge_delta() {
        let r = build_shape(&ShapeSpec::Geodesic { triangles: 20, delta: Some(2.0) });
        assert!(matches!(r, Err(LinkageError::ConvexityBroken(_))));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(build_shape(&ShapeSpec::PrismStack { k: 1, side: 1.0, heights: vec![] }).is_err());
        assert!(build_shape(&ShapeSpec::PrismStack { k: 3, side: 1.0, heights: vec![0.8] }).is_err());
        assert!(
            build_shape(&ShapeSpec::Geodesic { triangles: 20, delta: Some(0.0) }).is_err()
        );
        assert!(build_shape(&ShapeSpec::Pyramid { apex_edge: 0.5, base_edge: 1.0 }).is_err());
    }

    #[test]
    fn prism_counts() {
        let built = build_shape(&ShapeSpec::PrismStack {
            k: 3,
            side: 1.0,
            heights: vec![0.8, 0.8],
        })
        .unwrap();
        assert_eq!(built.linkage.vertex_count(), 9);
        assert_eq!(built.linkage.edges().len(), 15);
    }
}
