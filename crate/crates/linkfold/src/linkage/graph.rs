//! Graph algorithms for the reversal pipeline: BFS layers from a face,
//! three vertex-disjoint paths by unit-vertex-capacity max flow, and the
//! contiguous three-arc grouping of each layer.

use std::collections::VecDeque;

use crate::error::LinkageError;

use crate::linkage::{LayerPartition, Linkage, State};

/// Partition the vertex set by edge distance from the face `face`.
///
/// Every edge of a polyhedral linkage connects vertices in the same layer
/// ("horizontal") or adjacent layers ("vertical"); this is asserted.
pub fn bfs_layers(linkage: &Linkage, face: &[usize]) -> Result<LayerPartition, LinkageError> {
    validate_face(linkage, face)?;
    let adj = linkage.adjacency();
    let mut dist = vec![usize::MAX; linkage.vertex_count()];
    let mut queue = VecDeque::new();
    for &v in face {
        dist[v] = 0;
        queue.push_back(v);
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let max_d = *dist.iter().max().unwrap();
    let mut layers = vec![Vec::new(); max_d + 1];
    for (v, &d) in dist.iter().enumerate() {
        layers[d].push(v);
    }
    for &(i, j) in linkage.edges() {
        debug_assert!(dist[i].abs_diff(dist[j]) <= 1, "edge ({i},{j}) skips a layer");
    }
    Ok(LayerPartition { layers, groups: None })
}

fn validate_face(linkage: &Linkage, face: &[usize]) -> Result<(), LinkageError> {
    if face.len() < 3 {
        return Err(LinkageError::NotAFace);
    }
    // Necessary condition: the induced subgraph on the face vertices is a
    // cycle, i.e. every face vertex has exactly two face neighbors.
    let adj = linkage.adjacency();
    for &v in face {
        if v >= linkage.vertex_count() {
            return Err(LinkageError::NotAFace);
        }
        let in_face = adj[v].iter().filter(|w| face.contains(w)).count();
        if in_face != 2 {
            return Err(LinkageError::NotAFace);
        }
    }
    Ok(())
}

/// Three internally-vertex-disjoint paths through the layers.
///
/// Each path runs from a bottom-layer vertex to a top-layer vertex; when the
/// top layer has fewer than three vertices all paths end at the same chosen
/// top vertex (and are disjoint elsewhere).
#[derive(Debug, Clone)]
pub struct DisjointPaths {
    pub paths: [Vec<usize>; 3],
}

/// Max-flow value between two *vertex sets* of the linkage graph under unit
/// vertex capacities (node splitting). Exposed for oracle tests.
pub fn max_flow_value(linkage: &Linkage, sources: &[usize], sinks: &[usize]) -> usize {
    let (mut net, s, t) = build_split_network(linkage, sources, sinks);
    net.max_flow(s, t)
}

/// Find three vertex-disjoint paths from the bottom layer to the top layer
/// (through the extended graph with apex source/sink), per the reversal
/// pipeline's grouping step.
pub fn three_disjoint_paths(
    linkage: &Linkage,
    partition: &LayerPartition,
) -> Result<DisjointPaths, LinkageError> {
    let bottom = &partition.layers[0];
    let top = partition.layers.last().expect("nonempty partition");
    let sinks: Vec<usize> = if top.len() >= 3 { top.clone() } else { vec![top[0]] };
    let (mut net, s, t) = build_split_network(linkage, bottom, &sinks);
    let flow = net.max_flow(s, t);
    if flow < 3 {
        return Err(LinkageError::NotThreeConnected { found: flow });
    }
    let raw = net.extract_paths(s, t, 3);
    let mut paths: Vec<Vec<usize>> = raw
        .into_iter()
        .map(|p| p.into_iter().map(|node| node / 2).collect::<Vec<usize>>())
        .map(|mut p| {
            p.dedup();
            p
        })
        .collect();
    paths.sort_by_key(|p| p.first().copied());
    // Internal disjointness check: shared vertices may only be the common
    // terminal when the top layer is small.
    let shared_terminal = if top.len() >= 3 { None } else { Some(sinks[0]) };
    for a in 0..3 {
        for b in (a + 1)..3 {
            for &v in &paths[a] {
                if paths[b].contains(&v) && Some(v) != shared_terminal {
                    return Err(LinkageError::NotThreeConnected { found: 2 });
                }
            }
        }
    }
    let mut it = paths.into_iter();
    Ok(DisjointPaths {
        paths: [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
    })
}

/// Node-split flow network: vertex v becomes v_in = 2v, v_out = 2v+1 with
/// capacity 1 between them; source and sink are extra nodes.
fn build_split_network(
    linkage: &Linkage,
    sources: &[usize],
    sinks: &[usize],
) -> (FlowNetwork, usize, usize) {
    let n = linkage.vertex_count();
    let s = 2 * n;
    let t = 2 * n + 1;
    let mut net = FlowNetwork::new(2 * n + 2);
    for v in 0..n {
        net.add_edge(2 * v, 2 * v + 1, 1);
    }
    for &(i, j) in linkage.edges() {
        net.add_edge(2 * i + 1, 2 * j, 1);
        net.add_edge(2 * j + 1, 2 * i, 1);
    }
    for &v in sources {
        net.add_edge(s, 2 * v, 1);
    }
    for &v in sinks {
        // When a single sink vertex carries all three paths its internal
        // capacity must not throttle the flow.
        if sinks.len() == 1 {
            net.set_cap(2 * v, 2 * v + 1, 3);
            net.add_edge(2 * v + 1, t, 3);
        } else {
            net.add_edge(2 * v + 1, t, 1);
        }
    }
    (net, s, t)
}

#[derive(Clone, Copy)]
struct FlowEdge {
    to: usize,
    cap: usize,
    rev: usize,
    original: bool,
}

struct FlowNetwork {
    adj: Vec<Vec<FlowEdge>>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); n] }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: usize) {
        let ru = self.adj[u].len();
        let rv = self.adj[v].len();
        self.adj[u].push(FlowEdge { to: v, cap, rev: rv, original: true });
        self.adj[v].push(FlowEdge { to: u, cap: 0, rev: ru, original: false });
    }

    fn set_cap(&mut self, u: usize, v: usize, cap: usize) {
        for e in &mut self.adj[u] {
            if e.to == v && e.original {
                e.cap = cap;
                return;
            }
        }
        self.add_edge(u, v, cap);
    }

    /// Edmonds–Karp; the graphs here are tiny.
    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut flow = 0;
        loop {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (k, e) in self.adj[u].iter().enumerate() {
                    if e.cap > 0 && prev[e.to].is_none() && e.to != s {
                        prev[e.to] = Some((u, k));
                        queue.push_back(e.to);
                    }
                }
            }
            if prev[t].is_none() {
                return flow;
            }
            // All capacities are small integers; push one unit per round.
            let mut v = t;
            while v != s {
                let (u, k) = prev[v].unwrap();
                let rev = self.adj[u][k].rev;
                self.adj[u][k].cap -= 1;
                self.adj[v][rev].cap += 1;
                v = u;
            }
            flow += 1;
        }
    }

    /// Decompose the computed flow into `count` edge-disjoint s-t paths.
    /// An original edge carries flow iff its reverse twin gained capacity.
    fn extract_paths(&mut self, s: usize, t: usize, count: usize) -> Vec<Vec<usize>> {
        let mut paths = Vec::new();
        for _ in 0..count {
            let mut path = Vec::new();
            let mut u = s;
            while u != t {
                let mut advanced = false;
                for k in 0..self.adj[u].len() {
                    let e = self.adj[u][k];
                    if e.original && self.adj[e.to][e.rev].cap > 0 {
                        self.adj[e.to][e.rev].cap -= 1; // consume one unit
                        if u != s {
                            path.push(u);
                        }
                        u = e.to;
                        advanced = true;
                        break;
                    }
                }
                assert!(advanced, "flow decomposition stuck at node {u}");
            }
            paths.push(path);
        }
        paths
    }
}

/// Cyclic angular order of each layer's vertices about the +z axis.
pub fn equator_order(state: &State, partition: &LayerPartition) -> Vec<Vec<usize>> {
    partition
        .layers
        .iter()
        .map(|layer| {
            let mut order: Vec<usize> = layer.clone();
            order.sort_by(|&a, &b| {
                let pa = state.positions[a];
                let pb = state.positions[b];
                let ta = pa.y.atan2(pa.x);
                let tb = pb.y.atan2(pb.x);
                ta.partial_cmp(&tb).unwrap().then(a.cmp(&b))
            });
            order
        })
        .collect()
}

/// Split each layer into three contiguous arcs of the cyclic order such
/// that arc `j` contains the layer's vertices of path `j`; arcs chosen as
/// balanced as possible, ties broken by lowest starting index.
pub fn group_layers(
    partition: &LayerPartition,
    paths: &DisjointPaths,
    equator: &[Vec<usize>],
) -> Result<LayerPartition, LinkageError> {
    let top_idx = partition.layers.len() - 1;
    let mut groups = Vec::with_capacity(partition.layers.len());
    for (i, order) in equator.iter().enumerate() {
        let m = order.len();
        if i == top_idx && m <= 2 {
            groups.push([order.clone(), Vec::new(), Vec::new()]);
            continue;
        }
        let path_sets: Vec<Vec<usize>> = paths
            .paths
            .iter()
            .map(|p| p.iter().copied().filter(|v| order.contains(v)).collect())
            .collect();
        let mut best: Option<(usize, usize, usize, [Vec<usize>; 3])> = None;
        // Cut the cycle at start `c` into arcs of sizes (l1, l2, l3).
        for c in 0..m {
            for l1 in 1..=(m - 2) {
                for l2 in 1..=(m - 1 - l1) {
                    let l3 = m - l1 - l2;
                    let arc = |from: usize, len: usize| -> Vec<usize> {
                        (0..len).map(|k| order[(c + from + k) % m]).collect()
                    };
                    let arcs = [arc(0, l1), arc(l1, l2), arc(l1 + l2, l3)];
                    // Arc r must contain path set (r + rot) mod 3 for some
                    // rotation (arcs and paths are both cyclic).
                    for rot in 0..3 {
                        let ok = (0..3).all(|r| {
                            path_sets[(r + rot) % 3]
                                .iter()
                                .all(|v| arcs[r].contains(v))
                        });
                        if ok {
                            let max_len = l1.max(l2).max(l3);
                            let sq = l1 * l1 + l2 * l2 + l3 * l3;
                            let candidate: [Vec<usize>; 3] = [
                                arcs[(3 - rot) % 3].clone(),
                                arcs[(4 - rot) % 3].clone(),
                                arcs[(5 - rot) % 3].clone(),
                            ];
                            let key = (max_len, sq, c);
                            if best
                                .as_ref()
                                .map(|(bm, bs, bc, _)| key < (*bm, *bs, *bc))
                                .unwrap_or(true)
                            {
                                best = Some((key.0, key.1, key.2, candidate));
                            }
                        }
                    }
                }
            }
        }
        match best {
            Some((_, _, _, arcs)) => groups.push(arcs),
            None => return Err(LinkageError::InfeasibleGrouping { layer: i }),
        }
    }
    Ok(LayerPartition { layers: partition.layers.clone(), groups: Some(groups) })
}

/// Which group (0..3) a vertex belongs to in layer `layer`.
pub(crate) fn group_of(partition: &LayerPartition, layer: usize, v: usize) -> usize {
    let groups = partition.groups.as_ref().expect("groups set");
    groups[layer]
        .iter()
        .position(|g| g.contains(&v))
        .expect("vertex missing from groups")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkage::shapes::{build_shape, ShapeSpec};

    fn layers_for(spec: ShapeSpec) -> (crate::linkage::Linkage, State, Vec<Vec<usize>>, LayerPartition) {
        let built = build_shape(&spec).unwrap();
        let face = built.faces[0].clone();
        let part = bfs_layers(&built.linkage, &face).unwrap();
        let eq = equator_order(&built.state, &part);
        (built.linkage, built.state, eq, part)
    }

    #[test]
    fn icosahedron_layers_3_6_3() {
        let (_, _, _, part) = layers_for(ShapeSpec::Icosahedron);
        assert_eq!(part.layer_sizes(), vec![3, 6, 3]);
    }

    #[test]
    fn tetrahedron_layers_3_1() {
        let (_, _, _, part) = layers_for(ShapeSpec::Tetrahedron);
        assert_eq!(part.layer_sizes(), vec![3, 1]);
    }

    #[test]
    fn cube_layers_4_4() {
        let (_, _, _, part) = layers_for(ShapeSpec::Cube);
        assert_eq!(part.layer_sizes(), vec![4, 4]);
    }

    #[test]
    fn not_a_face_rejected() {
        let built = build_shape(&ShapeSpec::Icosahedron).unwrap();
        // Three vertices that do not bound a face: take one from each layer.
        let face = built.faces[0].clone();
        let part = bfs_layers(&built.linkage, &face).unwrap();
        let bogus = vec![part.layers[0][0], part.layers[1][0], part.layers[2][0]];
        assert!(matches!(
            bfs_layers(&built.linkage, &bogus),
            Err(LinkageError::NotAFace)
        ));
    }

    #[test]
    fn k4_has_three_disjoint_paths() {
        let (linkage, _, eq, part) = layers_for(ShapeSpec::Tetrahedron);
        let paths = three_disjoint_paths(&linkage, &part).unwrap();
        // All three end at the single top vertex.
        let top = part.layers[1][0];
        for p in &paths.paths {
            assert_eq!(*p.last().unwrap(), top);
        }
        let grouped = group_layers(&part, &paths, &eq).unwrap();
        let g = grouped.groups.unwrap();
        assert_eq!(g[1][0].len(), 1);
        assert!(g[1][1].is_empty() && g[1][2].is_empty());
    }

    #[test]
    fn icosahedron_paths_and_groups() {
        let (linkage, _, eq, part) = layers_for(ShapeSpec::Icosahedron);
        let paths = three_disjoint_paths(&linkage, &part).unwrap();
        // Pairwise internally disjoint.
        for a in 0..3 {
            for b in (a + 1)..3 {
                for v in &paths.paths[a] {
                    assert!(!paths.paths[b].contains(v), "shared vertex {v}");
                }
            }
        }
        // Each path is a real path in the graph.
        for p in &paths.paths {
            for w in p.windows(2) {
                assert!(linkage.edge_index(w[0], w[1]).is_some(), "no edge {w:?}");
            }
        }
        let grouped = group_layers(&part, &paths, &eq).unwrap();
        let g = grouped.groups.unwrap();
        // Middle layer of six splits evenly.
        let mut sizes: Vec<usize> = g[1].iter().map(|a| a.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![2, 2, 2]);
    }

    #[test]
    fn flow_value_on_extended_icosahedron_is_three() {
        let (linkage, _, _, part) = layers_for(ShapeSpec::Icosahedron);
        let v = max_flow_value(&linkage, &part.layers[0], &part.layers[2]);
        assert_eq!(v, 3);
    }

    #[test]
    fn singleton_layer_groups() {
        // A layer with one vertex puts it in group 1, leaving 2 and 3 empty.
        let (linkage, _, eq, part) = layers_for(ShapeSpec::Tetrahedron);
        let paths = three_disjoint_paths(&linkage, &part).unwrap();
        let grouped = group_layers(&part, &paths, &eq).unwrap();
        let g = grouped.groups.unwrap();
        assert_eq!(g.last().unwrap()[0].len(), 1);
    }
}
