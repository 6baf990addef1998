//! Degree-based network diagnostics on a snapshot.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::NetworkState;

/// Undirected simple graph over nodes `0..node_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(node_count: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.iter().all(|&(a, b)| a < node_count && b < node_count));
        Graph { node_count, edges }
    }

    pub fn from_state(state: &NetworkState) -> Self {
        Graph {
            node_count: state.population(),
            edges: state.edges().iter().map(|e| (e.female, e.male)).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut k = vec![0; self.node_count];
        for &(a, b) in &self.edges {
            k[a] += 1;
            k[b] += 1;
        }
        k
    }
}

/// `p_k`, the fraction of nodes with degree `k` (zero-degree nodes included).
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeDistribution {
    probs: Vec<f64>,
    counts: Vec<u64>,
    nodes: usize,
}

impl DegreeDistribution {
    /// Builds a distribution directly from probabilities indexed by degree.
    /// Used for analytic inputs; no counts are attached.
    pub fn from_probabilities(probs: Vec<f64>) -> Self {
        DegreeDistribution { probs, counts: Vec::new(), nodes: 0 }
    }

    pub fn p(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    /// Node counts `n_k`; empty when built from probabilities.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn max_degree(&self) -> usize {
        self.probs.len().saturating_sub(1)
    }

    /// `(k, p_k)` for every `k` with `p_k > 0`.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().copied().enumerate().filter(|&(_, p)| p > 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

pub fn degree_distribution(graph: &Graph) -> Result<DegreeDistribution> {
    if graph.node_count == 0 {
        return Err(Error::Degenerate("degree distribution of an empty network".into()));
    }
    let degrees = graph.degrees();
    let kmax = degrees.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0u64; kmax + 1];
    for k in degrees {
        counts[k] += 1;
    }
    let n = graph.node_count as f64;
    let probs = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(DegreeDistribution { probs, counts, nodes: graph.node_count })
}

/// `2M / N`.
pub fn average_degree(graph: &Graph) -> Result<f64> {
    if graph.node_count == 0 {
        return Err(Error::Degenerate("average degree of an empty network".into()));
    }
    Ok(2.0 * graph.edge_count() as f64 / graph.node_count as f64)
}

/// `q_k`, the degree minus one of a node reached along a random edge end.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcessDegreeDistribution {
    probs: Vec<f64>,
}

impl ExcessDegreeDistribution {
    pub fn q(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, q)| k as f64 * q).sum()
    }

    pub fn variance(&self) -> f64 {
        let second: f64 = self.probs.iter().enumerate().map(|(k, q)| (k * k) as f64 * q).sum();
        let mean = self.mean();
        second - mean * mean
    }

    /// Inverts back to `p_k` over `k >= 1`, renormalized. Index 0 is always zero.
    pub fn to_degree_probabilities(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.probs.len() + 1];
        for (j, &q) in self.probs.iter().enumerate() {
            p[j + 1] = q / (j + 1) as f64;
        }
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            p.iter_mut().for_each(|x| *x /= total);
        }
        p
    }
}

pub fn excess_degree_distribution(p: &DegreeDistribution) -> Result<ExcessDegreeDistribution> {
    let mean = p.mean();
    if !(mean > 0.0) {
        return Err(Error::Degenerate("excess degree distribution needs <k> > 0".into()));
    }
    let probs = (0..p.max_degree())
        .map(|k| (k + 1) as f64 * p.p(k + 1) / mean)
        .collect();
    Ok(ExcessDegreeDistribution { probs })
}

/// `e_ij` in excess-degree coordinates, symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDegreeDistribution {
    entries: BTreeMap<(usize, usize), f64>,
    edges: usize,
}

impl JointDegreeDistribution {
    pub fn e(&self, i: usize, j: usize) -> f64 {
        self.entries.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&ij, &e)| (ij, e))
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// `sum_i e_ij` for every `j` present.
    pub fn marginal(&self) -> BTreeMap<usize, f64> {
        let mut m = BTreeMap::new();
        for (&(_, j), &e) in &self.entries {
            *m.entry(j).or_insert(0.0) += e;
        }
        m
    }

    /// Largest `|sum_i e_ij - q_j|` over all `j` in either support.
    pub fn sum_rule_error(&self, q: &ExcessDegreeDistribution) -> f64 {
        let marginal = self.marginal();
        let len = q.probs().len().max(marginal.keys().next_back().map_or(0, |k| k + 1));
        (0..len)
            .map(|j| (marginal.get(&j).copied().unwrap_or(0.0) - q.q(j)).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries.iter().all(|(&(i, j), &e)| self.e(j, i) == e)
    }
}

pub fn joint_degree_distribution(graph: &Graph) -> Result<JointDegreeDistribution> {
    let m = graph.edge_count();
    if m == 0 {
        return Err(Error::Degenerate("joint degree distribution needs at least one edge".into()));
    }
    let degrees = graph.degrees();
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for &(a, b) in graph.edges() {
        let (i, j) = (degrees[a] - 1, degrees[b] - 1);
        // each orientation carries half an edge
        *counts.entry((i, j)).or_insert(0) += 1;
        *counts.entry((j, i)).or_insert(0) += 1;
    }
    let denom = 2.0 * m as f64;
    let entries = counts.into_iter().map(|(ij, c)| (ij, c as f64 / denom)).collect();
    Ok(JointDegreeDistribution { entries, edges: m })
}

/// `r = (1 / sigma_q^2) * sum_ij i j (e_ij - q_i q_j)` from precomputed distributions.
pub fn assortativity_from(joint: &JointDegreeDistribution, q: &ExcessDegreeDistribution) -> Result<f64> {
    let variance = q.variance();
    if variance <= 1e-12 {
        return Err(Error::UndefinedAssortativity);
    }
    let mean = q.mean();
    let observed: f64 = joint.entries().map(|((i, j), e)| (i * j) as f64 * e).sum();
    // sum_ij i j q_i q_j factorizes to mean^2
    let r = (observed - mean * mean) / variance;
    Ok(r.clamp(-1.0, 1.0))
}

pub fn assortativity(graph: &Graph) -> Result<f64> {
    let joint = joint_degree_distribution(graph)?;
    let q = excess_degree_distribution(&degree_distribution(graph)?)?;
    assortativity_from(&joint, &q)
}

/// Least-squares fit of `log10 p_k = log10 A - gamma log10 k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

pub fn fit_power_law(p: &DegreeDistribution) -> Result<PowerLawFit> {
    let points: Vec<(f64, f64)> = p
        .support()
        .filter(|&(k, _)| k >= 1)
        .map(|(k, pk)| ((k as f64).log10(), pk.log10()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientSupport { points: points.len() });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        let ss_res: f64 = points.iter().map(|p| (p.1 - (intercept + slope * p.0)).powi(2)).sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(PowerLawFit {
        gamma: -slope,
        coefficient: 10f64.powf(intercept),
        r_squared,
        points_used: points.len(),
    })
}

/// True iff every active relationship joins a female and a male.
pub fn bipartite_check(state: &NetworkState) -> bool {
    state.is_bipartite()
}

/// Assortativity outcome; a regular graph has no defined value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Assortativity {
    Value(f64),
    Undefined,
}

impl Assortativity {
    pub fn value(self) -> Option<f64> {
        match self {
            Assortativity::Value(r) => Some(r),
            Assortativity::Undefined => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopologyReport {
    pub avg_degree: f64,
    pub edge_count: usize,
    pub assortativity: Assortativity,
    pub sigma_sq_q: f64,
    pub degree: DegreeDistribution,
    pub excess: ExcessDegreeDistribution,
    pub joint: JointDegreeDistribution,
    /// `None` when fewer than three degrees are available to fit.
    pub fit: Option<PowerLawFit>,
}

/// Full set of diagnostics. Requires at least one edge.
pub fn topology_report(graph: &Graph) -> Result<TopologyReport> {
    let avg_degree = average_degree(graph)?;
    let degree = degree_distribution(graph)?;
    let excess = excess_degree_distribution(&degree)?;
    let joint = joint_degree_distribution(graph)?;
    let assortativity = match assortativity_from(&joint, &excess) {
        Ok(r) => Assortativity::Value(r),
        Err(Error::UndefinedAssortativity) => Assortativity::Undefined,
        Err(e) => return Err(e),
    };
    let fit = match fit_power_law(&degree) {
        Ok(f) => Some(f),
        Err(Error::InsufficientSupport { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(TopologyReport {
        avg_degree,
        edge_count: graph.edge_count(),
        sigma_sq_q: excess.variance(),
        assortativity,
        degree,
        excess,
        joint,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: usize) -> Graph {
        Graph::new(leaves + 1, (1..=leaves).map(|l| (0, l)).collect())
    }

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1)).collect())
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    #[test]
    fn degree_distribution_cases() {
        let single = Graph::new(2, vec![(0, 1)]);
        assert_eq!(degree_distribution(&single).unwrap().p(1), 1.0);

        let s = degree_distribution(&star(3)).unwrap();
        assert_eq!(s.p(1), 0.75);
        assert_eq!(s.p(3), 0.25);
        assert_eq!(s.counts(), &[0, 3, 0, 1]);

        let empty = Graph::new(5, vec![]);
        assert_eq!(degree_distribution(&empty).unwrap().p(0), 1.0);

        assert!(matches!(degree_distribution(&Graph::new(0, vec![])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn average_degree_cases() {
        assert_eq!(average_degree(&Graph::new(4, vec![(0, 1), (2, 3)])).unwrap(), 1.0);
        assert_eq!(average_degree(&Graph::new(5, vec![])).unwrap(), 0.0);
        assert!((average_degree(&path(3)).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let p = degree_distribution(&path(3)).unwrap();
        assert!((p.mean() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn excess_degree_cases() {
        let q = excess_degree_distribution(&degree_distribution(&path(3)).unwrap()).unwrap();
        assert!((q.q(0) - 0.5).abs() < 1e-12);
        assert!((q.q(1) - 0.5).abs() < 1e-12);

        let q = excess_degree_distribution(&degree_distribution(&cycle(6)).unwrap()).unwrap();
        assert!((q.q(1) - 1.0).abs() < 1e-12);

        let q = excess_degree_distribution(&degree_distribution(&star(3)).unwrap()).unwrap();
        assert!((q.q(0) - 0.5).abs() < 1e-12);
        assert!((q.q(2) - 0.5).abs() < 1e-12);

        let none = excess_degree_distribution(&degree_distribution(&Graph::new(3, vec![])).unwrap());
        assert!(matches!(none, Err(Error::Degenerate(_))));
    }

    #[test]
    fn excess_inverts_back_to_degree() {
        let g = Graph::new(7, vec![(0, 1), (0, 2), (0, 3), (4, 5), (1, 5)]);
        let p = degree_distribution(&g).unwrap();
        let back = excess_degree_distribution(&p).unwrap().to_degree_probabilities();
        let nonzero: f64 = 1.0 - p.p(0);
        for k in 1..=p.max_degree() {
            assert!((back[k] - p.p(k) / nonzero).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_degree_cases() {
        let single = joint_degree_distribution(&Graph::new(2, vec![(0, 1)])).unwrap();
        assert_eq!(single.e(0, 0), 1.0);

        let j = joint_degree_distribution(&path(3)).unwrap();
        assert!((j.e(0, 1) - 0.5).abs() < 1e-12);
        assert!((j.e(1, 0) - 0.5).abs() < 1e-12);
        assert!(j.is_symmetric());

        assert!(matches!(joint_degree_distribution(&Graph::new(3, vec![])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn assortativity_cases() {
        assert!((assortativity(&star(3)).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(assortativity(&cycle(8)), Err(Error::UndefinedAssortativity)));
    }

    #[test]
    fn power_law_on_exact_input() {
        for gamma in [2.0, 2.5] {
            let mut probs = vec![0.0];
            probs.extend((1..=100).map(|k| (k as f64).powf(-gamma)));
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
            let fit = fit_power_law(&DegreeDistribution::from_probabilities(probs)).unwrap();
            assert!((fit.gamma - gamma).abs() < 1e-9);
            assert!(fit.r_squared > 0.999);
            assert_eq!(fit.points_used, 100);
        }
    }

    #[test]
    fn power_law_needs_three_points() {
        let p = degree_distribution(&star(3)).unwrap();
        assert!(matches!(fit_power_law(&p), Err(Error::InsufficientSupport { points: 2 })));
    }

    #[test]
    fn report_marks_regular_graph_undefined() {
        let report = topology_report(&cycle(5)).unwrap();
        assert_eq!(report.assortativity, Assortativity::Undefined);
        assert!(report.fit.is_none());
        assert_eq!(report.avg_degree, 2.0);
    }
}
