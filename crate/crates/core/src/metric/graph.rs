use crate::geometry::ComplexPoint3;
use crate::sampling::PointCloud;
use kiddo::{ImmutableKdTree, SquaredEuclidean};
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::num::NonZeroUsize;

/// Default neighbour count for inner-distance graphs.
pub const DEFAULT_K_NN: usize = 12;
/// Upper bound on probes along one chord in the line-of-sight test.
const MAX_CHORD_PROBES: usize = 64;

/// Symmetric k-nearest-neighbour graph with Euclidean edge lengths.
#[derive(Debug)]
pub struct NeighborGraph {
    pub points: Vec<ComplexPoint3>,
    pub k_nn: usize,
    graph: UnGraph<(), f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
    /// Distance from each point to its `k_nn`-th neighbour.
    spacing: Vec<f64>,
    reals: Vec<[f64; 6]>,
    tree: ImmutableKdTree<f64, 6>,
    /// Component id of each vertex, numbered by first appearance.
    pub components: Vec<usize>,
    pub component_count: usize,
}

impl NeighborGraph {
    /// Connects every point to its `k_nn` nearest neighbours (symmetrised).
    pub fn from_points(points: Vec<ComplexPoint3>, k_nn: usize) -> Self {
        let n = points.len();
        let reals: Vec<[f64; 6]> = points.iter().map(|p| p.to_real()).collect();
        let tree: ImmutableKdTree<f64, 6> = ImmutableKdTree::new_from_slice(&reals).expect("kd-tree over finite points");
        let want = NonZeroUsize::new((k_nn + 1).min(n.max(1))).expect("nonzero");
        let neighbours: Vec<(Vec<usize>, f64)> = reals
            .par_iter()
            .enumerate()
            .map(|(i, a)| {
                let found = tree.query(a).nearest_n::<SquaredEuclidean<f64>>(want).execute();
                let mut list: Vec<(f64, usize)> =
                    found.iter().map(|r| (r.distance, r.item as usize)).filter(|&(_, j)| j != i).collect();
                list.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                list.truncate(k_nn);
                let spacing = list.last().map_or(0.0, |l| l.0.sqrt());
                (list.into_iter().map(|(_, j)| j).collect(), spacing)
            })
            .collect();
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * k_nn);
        for (i, (list, _)) in neighbours.iter().enumerate() {
            for &j in list {
                pairs.push((i.min(j), i.max(j)));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut graph = UnGraph::with_capacity(n, pairs.len());
        for _ in 0..n {
            graph.add_node(());
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut uf = UnionFind::new(n);
        for &(i, j) in &pairs {
            let len = points[i].distance(&points[j]);
            // coincident points are joined with a zero-length edge
            graph.add_edge(NodeIndex::new(i), NodeIndex::new(j), len);
            adjacency[i].push((j, len));
            adjacency[j].push((i, len));
            uf.union(i, j);
        }
        let roots = uf.into_labeling();
        let mut ids = std::collections::HashMap::new();
        let components: Vec<usize> = roots
            .iter()
            .map(|r| {
                let next = ids.len();
                *ids.entry(*r).or_insert(next)
            })
            .collect();
        let spacing = neighbours.iter().map(|(_, s)| *s).collect();
        Self { points, k_nn, graph, adjacency, spacing, reals, tree, component_count: ids.len(), components }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(i, j, length)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.graph
            .edge_indices()
            .map(|e| {
                let (a, b) = self.graph.edge_endpoints(e).expect("edge exists");
                (a.index().min(b.index()), a.index().max(b.index()), self.graph[e])
            })
            .collect()
    }

    /// Graph distances from `source` to every vertex (`INFINITY` when
    /// unreachable).
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let map = dijkstra(&self.graph, NodeIndex::new(source), None, |e| *e.weight());
        let mut out = vec![f64::INFINITY; self.len()];
        for (node, d) in map {
            out[node.index()] = d;
        }
        out
    }

    /// True when every probe along the chord `a b` lies within sampling
    /// resolution of the cloud, i.e. the chord is indistinguishable from a
    /// path inside the sampled set.
    fn line_of_sight(&self, a: usize, b: usize) -> bool {
        let (pa, pb) = (&self.reals[a], &self.reals[b]);
        let len = self.points[a].distance(&self.points[b]);
        let tol = self.spacing[a].max(self.spacing[b]);
        if len <= tol {
            return true;
        }
        let probes = ((2.0 * len / tol).ceil() as usize).min(MAX_CHORD_PROBES);
        (1..probes).all(|s| {
            let t = s as f64 / probes as f64;
            let q: [f64; 6] = std::array::from_fn(|k| pa[k] + t * (pb[k] - pa[k]));
            let nearest = self.tree.query(&q).nearest_one::<SquaredEuclidean<f64>>().execute();
            nearest.distance <= tol * tol
        })
    }

    /// Any-angle shortest paths from `source`: a vertex may be reached by a
    /// straight chord from its predecessor's parent whenever that chord
    /// stays within sampling resolution of the cloud. Removes most of the
    /// zig-zag excess of graph paths while never undercutting the outer
    /// distance.
    pub fn any_angle_distances_from(&self, source: usize) -> Vec<f64> {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        parent[source] = source;
        heap.push(Reverse((OrdF64(0.0), source)));
        while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
            if done[u] || d > dist[u] {
                continue;
            }
            done[u] = true;
            let pu = parent[u];
            for &(v, len) in &self.adjacency[u] {
                if done[v] {
                    continue;
                }
                let shortcut = dist[pu] + self.points[pu].distance(&self.points[v]);
                let (cand, par) = if pu != u && shortcut < dist[v].min(d + len) && self.line_of_sight(pu, v) {
                    (shortcut, pu)
                } else {
                    (d + len, u)
                };
                if cand < dist[v] {
                    dist[v] = cand;
                    parent[v] = par;
                    heap.push(Reverse((OrdF64(cand), v)));
                }
            }
        }
        dist
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// k-NN graph over the points of a cloud.
pub fn build_graph(cloud: &PointCloud, k_nn: usize) -> NeighborGraph {
    NeighborGraph::from_points(cloud.points.clone(), k_nn)
}

/// Shortest-path length between two vertices; `INFINITY` when they lie in
/// different components.
pub fn inner_distance(graph: &NeighborGraph, a: usize, b: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    if graph.components[a] != graph.components[b] {
        return f64::INFINITY;
    }
    let target = NodeIndex::new(b);
    let map = dijkstra(&graph.graph, NodeIndex::new(a), Some(target), |e| *e.weight());
    map.get(&target).copied().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use std::f64::consts::{PI, TAU};

    fn circle(n: usize) -> Vec<ComplexPoint3> {
        (0..n).map(|i| ComplexPoint3::real((TAU * i as f64 / n as f64).cos(), (TAU * i as f64 / n as f64).sin(), 0.0)).collect()
    }

    #[test]
    fn two_points_one_edge() {
        let g = NeighborGraph::from_points(vec![ComplexPoint3::real(0.0, 0.0, 0.0), ComplexPoint3::real(3.0, 4.0, 0.0)], 5);
        assert_eq!(g.edges(), vec![(0, 1, 5.0)]);
        assert_eq!(inner_distance(&g, 0, 1), 5.0);
        assert_eq!(inner_distance(&g, 1, 1), 0.0);
    }

    #[test]
    fn circle_is_connected_and_geodesic() {
        let g = NeighborGraph::from_points(circle(1000), 8);
        assert_eq!(g.component_count, 1);
        let d = inner_distance(&g, 0, 500);
        assert!((d - PI).abs() < 1e-3, "{d}");
    }

    #[test]
    fn any_angle_is_exact_on_flat_data_and_respects_curvature() {
        let mut rng = rng::stream(8, 0);
        let pts: Vec<ComplexPoint3> = (0..3000)
            .map(|_| {
                let v: [f64; 6] = std::array::from_fn(|k| if k < 4 { rng.random::<f64>() * 2.0 - 1.0 } else { 0.0 });
                ComplexPoint3::from_real(&v)
            })
            .collect();
        let g = NeighborGraph::from_points(pts, 12);
        let d = g.any_angle_distances_from(0);
        let plain = g.distances_from(0);
        for i in 0..g.len() {
            let e = g.points[0].distance(&g.points[i]);
            assert!(d[i] >= e - 1e-12 && d[i] <= plain[i] + 1e-12);
            assert!(d[i] <= 1.01 * e + 1e-12, "{} vs {e}", d[i]);
        }
        let c = NeighborGraph::from_points(circle(1000), 8);
        let half = c.any_angle_distances_from(0)[500];
        assert!((half / PI - 1.0).abs() < 0.02, "{half}");
    }

    #[test]
    fn separated_clusters() {
        let mut pts = Vec::new();
        let mut rng = rng::stream(5, 0);
        for c in [0.0, 10.0] {
            for _ in 0..50 {
                pts.push(ComplexPoint3::real(c + rng.random::<f64>() * 0.5, rng.random::<f64>() * 0.5, 0.0));
            }
        }
        let g = NeighborGraph::from_points(pts, 3);
        assert_eq!(g.component_count, 2);
        assert_eq!(inner_distance(&g, 0, 99), f64::INFINITY);
    }

    #[test]
    fn graph_metric_properties() {
        let mut rng = rng::stream(11, 0);
        let pts: Vec<ComplexPoint3> =
            (0..400).map(|_| ComplexPoint3::real(rng.random(), rng.random(), rng.random::<f64>() * 0.2)).collect();
        let g = NeighborGraph::from_points(pts, 6);
        for (i, j, len) in g.edges() {
            assert_eq!(len, g.points[i].distance(&g.points[j]));
        }
        let dist: Vec<Vec<f64>> = (0..g.len()).map(|i| g.distances_from(i)).collect();
        for _ in 0..1000 {
            let (a, b, c) = (rng.random_range(0..400), rng.random_range(0..400), rng.random_range(0..400));
            assert!(dist[a][c] <= dist[a][b] + dist[b][c] + 1e-12);
            assert!(dist[a][b] >= g.points[a].distance(&g.points[b]) - 1e-12);
            assert!((dist[a][b] - dist[b][a]).abs() <= 1e-12);
        }
    }

    #[test]
    fn flat_plane_ratios() {
        // uniform points on the unit disk of a real 2-plane
        let mut rng = rng::stream(3, 0);
        let pts: Vec<ComplexPoint3> = (0..10_000)
            .map(|_| {
                let (r, t) = (rng.random::<f64>().sqrt(), rng.random::<f64>() * TAU);
                ComplexPoint3::real(r * t.cos(), r * t.sin(), 0.0)
            })
            .collect();
        let g = NeighborGraph::from_points(pts, 12);
        let mut ok = 0;
        let trials = 200;
        for _ in 0..trials {
            let (a, b) = (rng.random_range(0..g.len()), rng.random_range(0..g.len()));
            let e = g.points[a].distance(&g.points[b]);
            let ratio = if e == 0.0 { 1.0 } else { inner_distance(&g, a, b) / e };
            assert!(ratio >= 1.0 - 1e-12);
            if ratio <= 1.05 {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.95 * trials as f64, "{ok}");
    }
}
