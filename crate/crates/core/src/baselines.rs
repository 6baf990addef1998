//! Barabási–Albert reference generator.

use rand::Rng;

use crate::error::{Error, Result};
use crate::topology::Graph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaNetwork {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub degrees: Vec<usize>,
}

impl BaNetwork {
    pub fn graph(&self) -> Graph {
        Graph::new(self.n, self.edges.clone())
    }
}

/// Grows a BA network from a path over `m0` nodes; each new node links to `m`
/// distinct existing nodes with probability proportional to degree.
pub fn generate_ba<R: Rng + ?Sized>(n: usize, m: usize, m0: usize, rng: &mut R) -> Result<BaNetwork> {
    if m == 0 {
        return Err(Error::range("m", "must be at least 1"));
    }
    if m >= m0 {
        return Err(Error::range("m", format!("must be below m0 = {m0}")));
    }
    if m0 > n {
        return Err(Error::range("m0", format!("must not exceed n = {n}")));
    }
    let mut edges: Vec<(usize, usize)> = (1..m0).map(|i| (i - 1, i)).collect();
    let mut degrees = vec![0usize; n];
    // every edge end appears once, so a uniform draw is degree-proportional
    let mut ends: Vec<usize> = Vec::with_capacity(2 * (m0 + m * (n - m0)));
    for &(a, b) in &edges {
        degrees[a] += 1;
        degrees[b] += 1;
        ends.push(a);
        ends.push(b);
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    for new in m0..n {
        chosen.clear();
        while chosen.len() < m {
            let target = ends[rng.random_range(0..ends.len())];
            // rejecting repeats renormalizes over the remaining nodes
            if !chosen.contains(&target) {
                chosen.push(target);
            }
        }
        for &target in &chosen {
            edges.push((target, new));
            degrees[target] += 1;
            degrees[new] += 1;
            ends.push(target);
            ends.push(new);
        }
    }
    Ok(BaNetwork { n, edges, degrees })
}
