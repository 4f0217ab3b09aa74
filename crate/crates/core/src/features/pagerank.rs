//! Weighted PageRank by power iteration, and the user features built on it.

use std::collections::{BTreeMap, HashMap};

use crate::model::{FollowerGraph, InteractionGraph, TopicSnapshot};

/// Directed graph with weighted out-links over nodes `0..n`.
#[derive(Debug, Clone, Default)]
pub struct WeightedDigraph {
    out: Vec<Vec<(usize, f64)>>,
}

impl WeightedDigraph {
    pub fn new(n: usize) -> Self {
        Self { out: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, weight: f64) {
        self.out[from].push((to, weight));
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tolerance: 1e-9,
            max_iterations: 1_000,
        }
    }
}

/// Stationary scores summing to 1. Mass of dangling nodes is spread
/// uniformly; iteration stops when the L1 change drops below tolerance.
pub fn pagerank(graph: &WeightedDigraph, config: &PageRankConfig) -> Vec<f64> {
    let n = graph.len();
    if n == 0 {
        return Vec::new();
    }
    let nf = n as f64;
    let out_weight: Vec<f64> = graph.out.iter().map(|l| l.iter().map(|e| e.1).sum()).collect();
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..config.max_iterations {
        let dangling: f64 = (0..n).filter(|&u| out_weight[u] <= 0.0).map(|u| rank[u]).sum();
        let base = (1.0 - config.damping) / nf + config.damping * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for (u, links) in graph.out.iter().enumerate() {
            if out_weight[u] <= 0.0 {
                continue;
            }
            let share = config.damping * rank[u] / out_weight[u];
            for &(v, w) in links {
                next[v] += share * w;
            }
        }
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < config.tolerance {
            break;
        }
    }
    rank
}

/// PageRank over the interaction graph, with links from the acting user to
/// the user they mention, weighted by interaction count.
pub fn interaction_pagerank(graph: &InteractionGraph, config: &PageRankConfig) -> BTreeMap<String, f64> {
    let ids: HashMap<&str, usize> = graph.nodes.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let mut g = WeightedDigraph::new(ids.len());
    for ((target, actor), &w) in &graph.edges {
        g.add_edge(ids[actor.as_str()], ids[target.as_str()], f64::from(w));
    }
    let scores = pagerank(&g, config);
    graph.nodes.iter().cloned().zip(scores).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserFeatures {
    pub mean_pagerank: f64,
    pub max_followers: f64,
    pub mean_followers: f64,
}

/// `F_{u1..u3}`: mean PageRank and max/mean global follower counts of the
/// snapshot's users.
pub fn user_features(
    snapshot: &TopicSnapshot<'_>,
    followers: &FollowerGraph,
    pagerank: &BTreeMap<String, f64>,
) -> UserFeatures {
    if snapshot.users.is_empty() {
        return UserFeatures {
            mean_pagerank: 0.0,
            max_followers: 0.0,
            mean_followers: 0.0,
        };
    }
    let n = snapshot.users.len() as f64;
    let mut pr = 0.0;
    let mut max_f = 0usize;
    let mut sum_f = 0usize;
    for u in &snapshot.users {
        pr += pagerank.get(*u).copied().unwrap_or(0.0);
        let c = followers.follower_count(u);
        max_f = max_f.max(c);
        sum_f += c;
    }
    UserFeatures {
        mean_pagerank: pr / n,
        max_followers: max_f as f64,
        mean_followers: sum_f as f64 / n,
    }
}
