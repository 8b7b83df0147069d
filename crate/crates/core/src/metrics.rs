//! Distances between distributions on `[0, n]`.
//!
//! [`kantorovich_1d`] is the production path: on the ordered integer line
//! with ground distance `|i - j|`, the Kantorovich (Wasserstein-1) distance is
//! the L1 distance between cumulative distribution functions. The transport
//! solver in [`kantorovich_lp`] accepts any ground metric and exists to check
//! the closed form on small domains.

use crate::channel::GroundMetric;
use crate::distribution::Distribution;
use crate::error::{Error, Result};

/// Largest domain bound the transport oracle accepts.
pub const ORACLE_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub kantorovich: f64,
    pub total_variation: f64,
}

pub fn distance_report(mu: &Distribution, nu: &Distribution) -> Result<DistanceReport> {
    Ok(DistanceReport {
        kantorovich: kantorovich_1d(mu, nu)?,
        total_variation: total_variation(mu, nu)?,
    })
}

/// `sum_{k < n} |F_mu(k) - F_nu(k)|`.
pub fn kantorovich_1d(mu: &Distribution, nu: &Distribution) -> Result<f64> {
    mu.check_same_domain(nu)?;
    let n = mu.n();
    let mut gap = 0.0_f64;
    let mut total = 0.0_f64;
    for (a, b) in mu.weights()[..n].iter().zip(&nu.weights()[..n]) {
        gap += a - b;
        total += gap.abs();
    }
    Ok(total)
}

pub fn total_variation(mu: &Distribution, nu: &Distribution) -> Result<f64> {
    mu.check_same_domain(nu)?;
    let l1: f64 = mu
        .weights()
        .iter()
        .zip(nu.weights())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok((0.5 * l1).min(1.0))
}

struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

/// Residual graph for successive-shortest-path min-cost flow.
struct FlowGraph {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adjacency: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) {
        self.adjacency[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adjacency[to].push(self.edges.len());
        self.edges.push(Edge {
            to: from,
            cap: 0.0,
            cost: -cost,
        });
    }

    /// Bellman-Ford shortest path over edges with residual capacity; returns
    /// the edge used to enter each node.
    fn shortest_path(&self, source: usize, min_cap: f64) -> Vec<Option<usize>> {
        let nodes = self.adjacency.len();
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via = vec![None; nodes];
        dist[source] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if !dist[u].is_finite() {
                    continue;
                }
                for &e in &self.adjacency[u] {
                    let edge = &self.edges[e];
                    if edge.cap > min_cap && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        via
    }
}

/// Optimal-transport cost `min_gamma sum gamma_ij d(i, j)` over couplings of
/// `mu` and `nu`, solved exactly as a min-cost flow. Only for `n <= 20`.
pub fn kantorovich_lp<D: GroundMetric + ?Sized>(
    mu: &Distribution,
    nu: &Distribution,
    d: &D,
) -> Result<f64> {
    mu.check_same_domain(nu)?;
    let n = mu.n();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleDomainTooLarge {
            n,
            limit: ORACLE_MAX_N,
        });
    }
    const MIN_CAP: f64 = 1e-15;
    let size = n + 1;
    let source = 2 * size;
    let sink = source + 1;
    let mut graph = FlowGraph::new(2 * size + 2);
    for i in 0..size {
        graph.add_edge(source, i, mu.weights()[i], 0.0);
        graph.add_edge(size + i, sink, nu.weights()[i], 0.0);
        for j in 0..size {
            graph.add_edge(i, size + j, f64::INFINITY, d.distance(i, j));
        }
    }
    let mut cost = 0.0;
    loop {
        let via = graph.shortest_path(source, MIN_CAP);
        if via[sink].is_none() {
            break;
        }
        let mut path = Vec::new();
        let mut node = sink;
        while node != source {
            let e = via[node].expect("path reconstructed from predecessor edges");
            path.push(e);
            node = graph.edges[e ^ 1].to;
        }
        let push = path
            .iter()
            .map(|&e| graph.edges[e].cap)
            .fold(f64::INFINITY, f64::min);
        for &e in &path {
            graph.edges[e].cap -= push;
            graph.edges[e ^ 1].cap += push;
            cost += push * graph.edges[e].cost;
        }
    }
    Ok(cost.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LineMetric;

    fn dist(w: &[f64]) -> Distribution {
        Distribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let a = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(kantorovich_1d(&a, &a).unwrap(), 0.0);
        let p0 = Distribution::point_mass(10, 0).unwrap();
        let p7 = Distribution::point_mass(10, 7).unwrap();
        assert!((kantorovich_1d(&p0, &p7).unwrap() - 7.0).abs() < 1e-15);
        let b = dist(&[0.5, 0.5, 0.0]);
        let c = dist(&[0.0, 0.5, 0.5]);
        assert!((kantorovich_1d(&b, &c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_examples() {
        let a = dist(&[0.2, 0.3, 0.5]);
        assert!(kantorovich_lp(&a, &a, &LineMetric::UNIT).unwrap().abs() < 1e-15);
        let flip = kantorovich_lp(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0]), &LineMetric::UNIT);
        assert!((flip.unwrap() - 1.0).abs() < 1e-15);
        let b = dist(&[0.5, 0.5, 0.0]);
        let c = dist(&[0.0, 0.5, 0.5]);
        assert!((kantorovich_lp(&b, &c, &LineMetric::UNIT).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_with_non_line_metric() {
        // Discrete metric: transport cost equals total variation.
        let discrete = |i: usize, j: usize| if i == j { 0.0 } else { 1.0 };
        let a = dist(&[0.1, 0.6, 0.3]);
        let b = dist(&[0.4, 0.2, 0.4]);
        let cost = kantorovich_lp(&a, &b, &discrete).unwrap();
        assert!((cost - total_variation(&a, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn oracle_refuses_large_domains() {
        let u = Distribution::uniform(21).unwrap();
        assert!(matches!(
            kantorovich_lp(&u, &u, &LineMetric::UNIT),
            Err(Error::OracleDomainTooLarge { .. })
        ));
    }

    #[test]
    fn total_variation_examples() {
        let a = dist(&[0.6, 0.4]);
        let b = dist(&[0.5, 0.5]);
        assert!((total_variation(&a, &b).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(total_variation(&a, &a).unwrap(), 0.0);
        let p = Distribution::point_mass(3, 0).unwrap();
        let q = Distribution::point_mass(3, 2).unwrap();
        assert_eq!(total_variation(&p, &q).unwrap(), 1.0);
        let r = distance_report(&p, &q).unwrap();
        assert_eq!(r.kantorovich, 2.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Distribution::uniform(2).unwrap();
        let b = Distribution::uniform(3).unwrap();
        assert!(kantorovich_1d(&a, &b).is_err());
        assert!(total_variation(&a, &b).is_err());
        assert!(kantorovich_lp(&a, &b, &LineMetric::UNIT).is_err());
    }
}
