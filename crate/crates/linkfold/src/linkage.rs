//! Linkage data model: a graph of joints with rigid bar lengths, embedded
//! states, subdivision, and the graph algorithms used by the reversal
//! pipeline (BFS layers from a face, three vertex-disjoint paths, grouping).

mod graph;
mod shapes;

pub use graph::{bfs_layers, equator_order, group_layers, max_flow_value, three_disjoint_paths, DisjointPaths};
pub use shapes::{build_shape, BuiltShape, ShapeSpec};

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::LinkageError;
use crate::geom::Point3;

/// Tolerance for validating a state against the stored bar lengths.
pub const STATE_TOL: f64 = 1e-9;

/// A graph paired with an assignment of lengths to its edges. Vertices are
/// universal joints; edges are rigid bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linkage {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl Linkage {
    /// Build a linkage from edges `(i, j)` with their bar lengths. The graph
    /// must be simple and connected; lengths strictly positive.
    pub fn new(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        lengths: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, LinkageError> {
        if edges.len() != lengths.len() {
            return Err(LinkageError::InvalidShape(
                "edges and lengths must have equal length".into(),
            ));
        }
        if let Some(l) = &labels {
            if l.len() != vertex_count {
                return Err(LinkageError::InvalidShape("one label per vertex".into()));
            }
        }
        let mut seen = HashSet::new();
        let mut norm_edges = Vec::with_capacity(edges.len());
        for &(i, j) in &edges {
            if i == j || i >= vertex_count || j >= vertex_count {
                return Err(LinkageError::InvalidShape(format!("bad edge ({i}, {j})")));
            }
            let e = (i.min(j), i.max(j));
            if !seen.insert(e) {
                return Err(LinkageError::InvalidShape(format!("duplicate edge ({i}, {j})")));
            }
            norm_edges.push(e);
        }
        for &l in &lengths {
            if !(l > 0.0) || !l.is_finite() {
                return Err(LinkageError::InvalidShape(format!("non-positive length {l}")));
            }
        }
        let linkage = Linkage { vertex_count, edges: norm_edges, lengths, labels };
        if vertex_count > 0 && !linkage.is_connected() {
            return Err(LinkageError::Disconnected);
        }
        Ok(linkage)
    }

    /// Like [`Linkage::new`] but allows a disconnected graph (used by the
    /// push-through scenes, where a free chain threads a separate triangle).
    pub fn new_allow_disconnected(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        lengths: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, LinkageError> {
        let mut l = Self::new_unchecked_connectivity(vertex_count, edges, lengths, labels)?;
        l.labels = l.labels.take();
        Ok(l)
    }

    fn new_unchecked_connectivity(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        lengths: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, LinkageError> {
        // Reuse the simple-graph validation from `new` by bypassing only the
        // connectivity check.
        let mut seen = HashSet::new();
        let mut norm_edges = Vec::with_capacity(edges.len());
        for &(i, j) in &edges {
            if i == j || i >= vertex_count || j >= vertex_count {
                return Err(LinkageError::InvalidShape(format!("bad edge ({i}, {j})")));
            }
            let e = (i.min(j), i.max(j));
            if !seen.insert(e) {
                return Err(LinkageError::InvalidShape(format!("duplicate edge ({i}, {j})")));
            }
            norm_edges.push(e);
        }
        for &l in &lengths {
            if !(l > 0.0) || !l.is_finite() {
                return Err(LinkageError::InvalidShape(format!("non-positive length {l}")));
            }
        }
        Ok(Linkage { vertex_count, edges: norm_edges, lengths, labels })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn length_of(&self, i: usize, j: usize) -> Option<f64> {
        let e = (i.min(j), i.max(j));
        self.edges.iter().position(|&x| x == e).map(|k| self.lengths[k])
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let e = (i.min(j), i.max(j));
        self.edges.iter().position(|&x| x == e)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.vertex_count
    }

    /// Two bars are adjacent when they share a joint.
    pub fn bars_adjacent(&self, e: usize, f: usize) -> bool {
        let (a, b) = self.edges[e];
        let (c, d) = self.edges[f];
        a == c || a == d || b == c || b == d
    }

    /// Check that `state` realizes every bar length within `tol`.
    pub fn validate_state(&self, state: &State, tol: f64) -> Result<(), LinkageError> {
        if state.positions.len() != self.vertex_count {
            return Err(LinkageError::InvalidShape(format!(
                "state has {} positions for {} vertices",
                state.positions.len(),
                self.vertex_count
            )));
        }
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            let actual = state.positions[i].dist(state.positions[j]);
            if (actual - self.lengths[k]).abs() > tol {
                return Err(LinkageError::LengthViolation {
                    i,
                    j,
                    actual,
                    expected: self.lengths[k],
                });
            }
        }
        Ok(())
    }
}

/// An assignment of 3D positions to joints realizing all bar lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub positions: Vec<Point3>,
}

impl State {
    pub fn new(positions: Vec<Point3>) -> Self {
        State { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Largest absolute bar-length error of this state w.r.t. `linkage`.
    pub fn max_length_error(&self, linkage: &Linkage) -> f64 {
        linkage
            .edges()
            .iter()
            .zip(linkage.lengths())
            .map(|(&(i, j), &l)| (self.positions[i].dist(self.positions[j]) - l).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-edge ordered split fractions in (0, 1).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SubdivisionPlan {
    /// Keyed by the (min, max) vertex pair of an existing edge.
    pub splits: BTreeMap<(usize, usize), Vec<f64>>,
}

impl SubdivisionPlan {
    /// A fraction of 1/2 on every edge.
    pub fn midpoints(linkage: &Linkage) -> Self {
        let splits = linkage.edges().iter().map(|&e| (e, vec![0.5])).collect();
        SubdivisionPlan { splits }
    }

    pub fn single_edge(i: usize, j: usize, fractions: Vec<f64>) -> Self {
        let mut splits = BTreeMap::new();
        splits.insert((i.min(j), i.max(j)), fractions);
        SubdivisionPlan { splits }
    }
}

/// Result of applying a [`SubdivisionPlan`]: the refined linkage and state
/// plus bookkeeping to find the inserted joints again.
#[derive(Debug, Clone)]
pub struct Subdivided {
    pub linkage: Linkage,
    pub state: State,
    /// For each original edge index: the inserted vertex ids, ordered from
    /// the edge's smaller endpoint. Empty when the edge was not split.
    pub inserted: Vec<Vec<usize>>,
    /// Original edge list, in the original order.
    pub original_edges: Vec<(usize, usize)>,
}

impl Subdivided {
    /// The single midpoint of original edge `k` (midpoint plans only).
    pub fn midpoint_of(&self, k: usize) -> Option<usize> {
        match self.inserted[k].as_slice() {
            [m] => Some(*m),
            _ => None,
        }
    }
}

/// Insert degree-2 joints on embedded edges; each split preserves the
/// per-edge total length and keeps the embedded point set unchanged.
pub fn subdivide(
    linkage: &Linkage,
    state: &State,
    plan: &SubdivisionPlan,
) -> Result<Subdivided, LinkageError> {
    linkage.validate_state(state, STATE_TOL)?;
    for (&(i, j), fractions) in &plan.splits {
        if linkage.edge_index(i, j).is_none() {
            return Err(LinkageError::NoSuchEdge(i, j));
        }
        let mut prev = 0.0;
        for &f in fractions {
            if !(f > 0.0 && f < 1.0) {
                return Err(LinkageError::BadFraction(f));
            }
            if f <= prev {
                return Err(LinkageError::InvalidShape(
                    "split fractions must be strictly increasing".into(),
                ));
            }
            prev = f;
        }
    }

    let mut positions = state.positions.clone();
    let mut labels = linkage.labels().map(|l| l.to_vec());
    let mut edges = Vec::new();
    let mut lengths = Vec::new();
    let mut inserted = vec![Vec::new(); linkage.edges().len()];

    for (k, &(i, j)) in linkage.edges().iter().enumerate() {
        let total = linkage.lengths()[k];
        let empty = Vec::new();
        let fractions = plan.splits.get(&(i, j)).unwrap_or(&empty);
        if fractions.is_empty() {
            edges.push((i, j));
            lengths.push(total);
            continue;
        }
        let mut chain = vec![i];
        for &f in fractions {
            let v = positions.len();
            positions.push(state.positions[i].lerp(state.positions[j], f));
            if let Some(l) = labels.as_mut() {
                l.push(format!("s({i},{j},{f})"));
            }
            inserted[k].push(v);
            chain.push(v);
        }
        chain.push(j);
        // Chunk lengths: f1*L, (f2-f1)*L, ..., with the last chunk taking the
        // exact remainder so the per-edge total is preserved.
        let mut prev_f = 0.0;
        let mut used = 0.0;
        for w in 0..chain.len() - 1 {
            let piece = if w + 2 == chain.len() {
                total - used
            } else {
                let f = fractions[w];
                let piece = if w == 0 && (f - 0.5).abs() < 1e-15 {
                    total * 0.5 // midpoint plans stay bit-exact
                } else {
                    (f - prev_f) * total
                };
                prev_f = f;
                piece
            };
            used += piece;
            edges.push((chain[w], chain[w + 1]));
            lengths.push(piece);
        }
    }

    let refined = Linkage::new_unchecked_connectivity(positions.len(), edges, lengths, labels)?;
    let refined_state = State::new(positions);
    refined.validate_state(&refined_state, STATE_TOL)?;
    Ok(Subdivided {
        linkage: refined,
        state: refined_state,
        inserted,
        original_edges: linkage.edges().to_vec(),
    })
}

/// Midpoint-subdivide every edge; the common case for the generators.
pub fn midpoint_subdivide(linkage: &Linkage, state: &State) -> Result<Subdivided, LinkageError> {
    subdivide(linkage, state, &SubdivisionPlan::midpoints(linkage))
}

/// Vertex layers by edge distance from a face, with the optional 3-group
/// split used by the reversal pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerPartition {
    /// `layers[i]` = vertices at edge distance `i` from the face.
    pub layers: Vec<Vec<usize>>,
    /// Per-layer groups, in equator order; set by [`group_layers`].
    pub groups: Option<Vec<[Vec<usize>; 3]>>,
}

impl LayerPartition {
    pub fn layer_of(&self, v: usize) -> usize {
        self.layers
            .iter()
            .position(|l| l.contains(&v))
            .expect("vertex missing from partition")
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.len()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkage::shapes::{build_shape, ShapeSpec};

    #[test]
    fn tetrahedron_counts() {
        let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        assert_eq!(shape.linkage.vertex_count(), 4);
        assert_eq!(shape.linkage.edges().len(), 6);
        assert!(shape.linkage.lengths().iter().all(|&l| (l - 1.0).abs() < 1e-12));
        shape.linkage.validate_state(&shape.state, STATE_TOL).unwrap();
    }

    #[test]
    fn midpoint_subdivision_counts() {
        let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let sub = midpoint_subdivide(&shape.linkage, &shape.state).unwrap();
        assert_eq!(sub.linkage.vertex_count(), 10);
        assert_eq!(sub.linkage.edges().len(), 12);

        let icosa = build_shape(&ShapeSpec::Icosahedron).unwrap();
        let sub = midpoint_subdivide(&icosa.linkage, &icosa.state).unwrap();
        assert_eq!(sub.linkage.vertex_count(), 42);
        assert_eq!(sub.linkage.edges().len(), 60);
    }

    #[test]
    fn subdivision_preserves_total_length_and_points() {
        let shape = build_shape(&ShapeSpec::Cube).unwrap();
        let sub = midpoint_subdivide(&shape.linkage, &shape.state).unwrap();
        for (k, &(i, j)) in shape.linkage.edges().iter().enumerate() {
            let m = sub.midpoint_of(k).unwrap();
            let a = sub.linkage.length_of(i, m).unwrap();
            let b = sub.linkage.length_of(m, j).unwrap();
            assert_eq!(a + b, shape.linkage.lengths()[k]);
            // The midpoint joint lies on the embedded edge.
            let expect = shape.state.positions[i].mid(shape.state.positions[j]);
            assert!(sub.state.positions[m].dist(expect) < 1e-12);
        }
        // Original vertices keep their positions.
        for v in 0..shape.linkage.vertex_count() {
            assert_eq!(shape.state.positions[v], sub.state.positions[v]);
        }
    }

    #[test]
    fn schedule_fractions_give_binary_chunks() {
        // A single bar of length 15 split at 1/15, 3/15, 7/15 yields chunks
        // 1, 2, 4, 8 (the logarithmic schedule for L = 15).
        let linkage = Linkage::new(2, vec![(0, 1)], vec![15.0], None).unwrap();
        let state = State::new(vec![Point3::ZERO, Point3::new(15.0, 0.0, 0.0)]);
        let plan = SubdivisionPlan::single_edge(0, 1, vec![1.0 / 15.0, 3.0 / 15.0, 7.0 / 15.0]);
        let sub = subdivide(&linkage, &state, &plan).unwrap();
        let mut got: Vec<f64> = sub.linkage.lengths().to_vec();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [1.0, 2.0, 4.0, 8.0];
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-9, "chunk {g} vs {w}");
        }
        let total: f64 = sub.linkage.lengths().iter().sum();
        assert!((total - 15.0).abs() < 1e-12);
    }

    #[test]
    fn bad_fraction_rejected() {
        let linkage = Linkage::new(2, vec![(0, 1)], vec![1.0], None).unwrap();
        let state = State::new(vec![Point3::ZERO, Point3::new(1.0, 0.0, 0.0)]);
        let plan = SubdivisionPlan::single_edge(0, 1, vec![1.2]);
        assert!(matches!(
            subdivide(&linkage, &state, &plan),
            Err(LinkageError::BadFraction(_))
        ));
    }

    #[test]
    fn duplicate_edge_rejected() {
        assert!(Linkage::new(3, vec![(0, 1), (1, 0), (1, 2)], vec![1.0; 3], None).is_err());
    }
}
