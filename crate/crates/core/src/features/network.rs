//! Network features of the undirected simple projection of `(U^h_t, E^h_t)`
//! plus border-user exposure.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::schema::EXPOSURE_DIMS;
use crate::model::{FollowerGraph, TopicSnapshot};

/// Undirected simple graph over nodes `0..n` with merged edge weights.
#[derive(Debug, Clone, Default)]
pub struct UndirectedGraph {
    n: usize,
    /// `(a, b)` with `a < b`.
    edges: BTreeMap<(usize, usize), f64>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeMap::new(),
        }
    }

    /// Adds weight to the undirected pair; self-loops are ignored.
    pub fn add(&mut self, a: usize, b: usize, weight: f64) {
        if a == b {
            return;
        }
        let key = (a.min(b), a.max(b));
        *self.edges.entry(key).or_insert(0.0) += weight;
    }

    pub fn from_snapshot(snapshot: &TopicSnapshot<'_>) -> Self {
        let ids: HashMap<&str, usize> = snapshot.users.iter().enumerate().map(|(i, u)| (*u, i)).collect();
        let mut g = Self::new(ids.len());
        for (&(target, actor), &w) in &snapshot.edges {
            g.add(ids[target], ids[actor], f64::from(w));
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.n];
        for &(a, b) in self.edges.keys() {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        adj
    }

    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut count = self.n;
        for &(a, b) in self.edges.keys() {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                count -= 1;
            }
        }
        count
    }

    pub fn triangles(&self) -> usize {
        let adj = self.adjacency();
        let mut t = 0;
        for &(a, b) in self.edges.keys() {
            // a < b; count each triangle once via its largest vertex c > b.
            t += adj[a].intersection(&adj[b]).filter(|&&c| c > b).count();
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFeatures {
    pub mean_degree: f64,
    pub density: f64,
    pub order: f64,
    pub degree_entropy: f64,
    pub border_users: f64,
    pub exposure: [f64; EXPOSURE_DIMS],
    pub component_fraction: f64,
    pub mean_edge_weight: f64,
    pub triangle_fraction: f64,
}

/// Structural features of the graph alone; border-user fields are zero.
pub fn graph_features(g: &UndirectedGraph) -> NetworkFeatures {
    let n = g.node_count();
    let mut f = NetworkFeatures {
        mean_degree: 0.0,
        density: 0.0,
        order: n as f64,
        degree_entropy: 0.0,
        border_users: 0.0,
        exposure: [0.0; EXPOSURE_DIMS],
        component_fraction: 0.0,
        mean_edge_weight: 0.0,
        triangle_fraction: 0.0,
    };
    if n == 0 {
        return f;
    }
    let nf = n as f64;
    let m = g.edge_count() as f64;
    f.mean_degree = 2.0 * m / nf;
    if n > 1 {
        f.density = m / (nf * (nf - 1.0) / 2.0);
    }
    let mut degree = vec![0usize; n];
    for &(a, b) in g.edges.keys() {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for d in degree {
        *hist.entry(d).or_insert(0) += 1;
    }
    f.degree_entropy = -hist
        .values()
        .map(|&c| {
            let p = c as f64 / nf;
            p * p.ln()
        })
        .sum::<f64>();
    f.degree_entropy = f.degree_entropy.max(0.0);
    f.component_fraction = g.components() as f64 / nf;
    if m > 0.0 {
        f.mean_edge_weight = g.edges.values().sum::<f64>() / m;
    }
    if n >= 3 {
        f.triangle_fraction = g.triangles() as f64 / (nf * (nf - 1.0) * (nf - 2.0) / 3.0);
    }
    f
}

/// Users outside `members` following at least one member, with the number of
/// members each one follows.
pub fn border_users<'a>(members: &BTreeSet<&str>, followers: &'a FollowerGraph) -> BTreeMap<&'a str, usize> {
    let mut out: BTreeMap<&str, usize> = BTreeMap::new();
    for u in members {
        for f in followers.followers_of(u) {
            if !members.contains(f) {
                *out.entry(f).or_insert(0) += 1;
            }
        }
    }
    out
}

/// Histogram of border users by followed-member count; dimension `i`
/// (1-based) counts users following exactly `i` members, the last pools
/// everything from 15 up.
pub fn exposure_vector(border: &BTreeMap<&str, usize>) -> [f64; EXPOSURE_DIMS] {
    let mut v = [0.0; EXPOSURE_DIMS];
    for &k in border.values() {
        v[k.clamp(1, EXPOSURE_DIMS) - 1] += 1.0;
    }
    v
}

pub fn network_features(snapshot: &TopicSnapshot<'_>, followers: &FollowerGraph) -> NetworkFeatures {
    let mut f = graph_features(&UndirectedGraph::from_snapshot(snapshot));
    if snapshot.users.is_empty() {
        return f;
    }
    let border = border_users(&snapshot.users, followers);
    f.border_users = border.len() as f64;
    f.exposure = exposure_vector(&border);
    f
}
