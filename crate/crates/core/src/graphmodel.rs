//! Monochromatic edge counts of a randomly colored regular graph.
//!
//! Vertices of an m-regular graph on n vertices are colored independently
//! from a distribution π over d colors; W_i counts the edges whose two
//! endpoints both received color i. The module provides the closed-form
//! mean and covariance of W, an exhaustive enumeration oracle for both,
//! standardized sampling, and the dependency model of the edge summands.

use rayon::prelude::*;
use std::collections::BTreeSet;

use crate::decomposition::DependencyModel;
use crate::linalg::{self, SymMatrix};
use crate::rng::Stream;
use crate::{Error, Result};

/// Undirected m-regular graph with indexed edges.
#[derive(Debug, Clone)]
pub struct RegularGraph {
    pub n_vertices: usize,
    pub degree: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RegularGraph {
    /// Circulant construction: vertices 0..n-1, edges {v, v+k mod n} for
    /// k = 1..floor(m/2), plus the antipodal matching {v, v+n/2} when m is
    /// odd (which requires n even).
    pub fn circulant(n: usize, m: usize) -> Result<Self> {
        if n < 2 || m < 1 || m >= n {
            return Err(Error::invalid("circulant graph needs 2 <= m+1 <= n"));
        }
        if n * m % 2 != 0 {
            return Err(Error::NoRegularGraph {
                vertices: n,
                degree: m,
            });
        }
        let mut edges = Vec::with_capacity(n * m / 2);
        for k in 1..=(m / 2) {
            for v in 0..n {
                edges.push((v, (v + k) % n));
            }
        }
        if m % 2 == 1 {
            // n is even here by the parity check
            for v in 0..n / 2 {
                edges.push((v, v + n / 2));
            }
        }
        let g = RegularGraph {
            n_vertices: n,
            degree: m,
            edges,
        };
        g.validate()?;
        Ok(g)
    }

    /// Parses a `u v` edge list (0-based vertices) and validates regularity.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_v = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or(Error::Parse {
                    line: lineno + 1,
                    message: "expected `u v`".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad vertex: {e}"),
                })
            };
            let u = parse(it.next())?;
            let v = parse(it.next())?;
            max_v = max_v.max(u).max(v);
            edges.push((u.min(v), u.max(v)));
        }
        if edges.is_empty() {
            return Err(Error::invalid("edge list is empty"));
        }
        let n = max_v + 1;
        let mut deg = vec![0usize; n];
        for &(u, v) in &edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        let m = deg[0];
        let g = RegularGraph {
            n_vertices: n,
            degree: m,
            edges,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let mut deg = vec![0usize; self.n_vertices];
        let mut seen = BTreeSet::new();
        for &(u, v) in &self.edges {
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            if u >= self.n_vertices || v >= self.n_vertices {
                return Err(Error::invalid("edge endpoint out of range"));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::invalid(format!("duplicate edge ({u},{v})")));
            }
            deg[u] += 1;
            deg[v] += 1;
        }
        if deg.iter().any(|&d| d != self.degree) {
            return Err(Error::invalid(format!(
                "graph is not {}-regular (degrees {:?})",
                self.degree, deg
            )));
        }
        if self.edges.len() != self.n_vertices * self.degree / 2 {
            return Err(Error::invalid("edge count does not match n*m/2"));
        }
        Ok(())
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
}

/// Regular graph plus a color distribution.
#[derive(Debug, Clone)]
pub struct ColoringModel {
    pub graph: RegularGraph,
    pub pi: Vec<f64>,
    cumulative: Vec<f64>,
}

pub const DEFAULT_ENUM_BUDGET: u128 = 1 << 22;

impl ColoringModel {
    pub fn new(graph: RegularGraph, pi: Vec<f64>) -> Result<Self> {
        if pi.len() < 2 {
            return Err(Error::invalid("need at least 2 colors"));
        }
        if pi.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::invalid("every pi_i must lie strictly in (0,1)"));
        }
        let s: f64 = pi.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("pi must sum to 1, got {s}")));
        }
        let mut cumulative = Vec::with_capacity(pi.len());
        let mut acc = 0.0;
        for &p in &pi {
            acc += p;
            cumulative.push(acc);
        }
        Ok(ColoringModel {
            graph,
            pi,
            cumulative,
        })
    }

    pub fn d(&self) -> usize {
        self.pi.len()
    }

    /// Monochromatic edge counts for an explicit coloring.
    pub fn count_vector(&self, colors: &[usize]) -> Result<Vec<u64>> {
        if colors.len() != self.graph.n_vertices {
            return Err(Error::DimensionMismatch {
                expected: self.graph.n_vertices,
                got: colors.len(),
            });
        }
        let mut w = vec![0u64; self.d()];
        for &(u, v) in &self.graph.edges {
            if colors[u] == colors[v] {
                w[colors[u]] += 1;
            }
        }
        Ok(w)
    }

    /// Colors every vertex i.i.d. from π and counts; deterministic given
    /// the stream state.
    pub fn sample_w(&self, stream: &mut Stream) -> Vec<u64> {
        let mut w = vec![0u64; self.d()];
        let colors: Vec<usize> = (0..self.graph.n_vertices)
            .map(|_| stream.categorical(&self.cumulative))
            .collect();
        for &(u, v) in &self.graph.edges {
            if colors[u] == colors[v] {
                w[colors[u]] += 1;
            }
        }
        w
    }

    /// λ_i = N π_i^2.
    pub fn mean_vector(&self) -> Vec<f64> {
        let n_edges = self.graph.n_edges() as f64;
        self.pi.iter().map(|&p| n_edges * p * p).collect()
    }

    /// Closed-form covariance:
    /// Var(W_i) = N π_i^2 (1 - π_i^2) + 2N(m-1)(π_i^3 - π_i^4),
    /// Cov(W_i, W_j) = -N (2m - 1) π_i^2 π_j^2 for i != j.
    pub fn covariance_matrix(&self) -> SymMatrix {
        let d = self.d();
        let n_edges = self.graph.n_edges() as f64;
        let m = self.graph.degree as f64;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            let p = self.pi[i];
            data[i * d + i] =
                n_edges * p * p * (1.0 - p * p) + 2.0 * n_edges * (m - 1.0) * (p.powi(3) - p.powi(4));
            for j in 0..d {
                if j != i {
                    data[i * d + j] = -n_edges * (2.0 * m - 1.0) * p * p * self.pi[j] * self.pi[j];
                }
            }
        }
        SymMatrix::new(d, data).expect("closed-form covariance is symmetric")
    }

    /// Exact (λ, Σ) by summing over all d^n colorings; the oracle for the
    /// closed forms. Refuses when d^n exceeds the budget.
    pub fn exact_moments(&self) -> Result<(Vec<f64>, SymMatrix)> {
        self.exact_moments_with_budget(DEFAULT_ENUM_BUDGET)
    }

    pub fn exact_moments_with_budget(&self, budget: u128) -> Result<(Vec<f64>, SymMatrix)> {
        let n = self.graph.n_vertices;
        let d = self.d();
        let total = (d as u128).checked_pow(n as u32).ok_or(Error::BudgetExceeded {
            required: u128::MAX,
            budget,
        })?;
        if total > budget {
            return Err(Error::BudgetExceeded {
                required: total,
                budget,
            });
        }
        let mut mean = vec![0.0; d];
        let mut second = vec![0.0; d * d];
        let mut colors = vec![0usize; n];
        for idx in 0..total {
            let mut rest = idx;
            for c in colors.iter_mut() {
                *c = (rest % d as u128) as usize;
                rest /= d as u128;
            }
            let weight: f64 = colors.iter().map(|&c| self.pi[c]).product();
            let w = self.count_vector(&colors)?;
            for i in 0..d {
                mean[i] += weight * w[i] as f64;
                for j in 0..d {
                    second[i * d + j] += weight * (w[i] * w[j]) as f64;
                }
            }
        }
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] = second[i * d + j] - mean[i] * mean[j];
            }
        }
        Ok((mean, SymMatrix::new(d, cov)?))
    }

    /// Σ^{-1/2} of the closed-form covariance.
    pub fn standardizer(&self) -> Result<SymMatrix> {
        let sigma = self.covariance_matrix();
        linalg::inv_sqrt(&sigma, linalg::default_pd_tol(&sigma))
    }

    /// `count` rows of Σ^{-1/2}(W - λ). Replicate r draws from the stream
    /// `(seed, "coloring", r)`, so output is identical for any worker count.
    pub fn sample_standardized(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let root = self.standardizer()?;
        let lambda = self.mean_vector();
        Ok((0..count)
            .into_par_iter()
            .map(|r| {
                let mut stream = Stream::new(seed, "coloring", r as u64);
                let w = self.sample_w(&mut stream);
                let centered: Vec<f64> = w
                    .iter()
                    .zip(&lambda)
                    .map(|(&wi, &li)| wi as f64 - li)
                    .collect();
                root.mul_vec(&centered).expect("dimension fixed")
            })
            .collect())
    }

    /// Envelope 2 d^{1/2} N^{-1/2} L on the standardized edge summands.
    pub fn xi_envelope(&self) -> Result<f64> {
        let l = crate::bound::color_scale(&self.pi)?;
        let d = self.d() as f64;
        let n_edges = self.graph.n_edges() as f64;
        Ok(2.0 * d.sqrt() / n_edges.sqrt() * l)
    }

    /// Norms of every realizable standardized summand value
    /// ξ_j = Σ^{-1/2}(x - π²), x over {0, e_1, .., e_d}; all must stay
    /// below [`ColoringModel::xi_envelope`].
    pub fn realizable_xi_norms(&self) -> Result<Vec<f64>> {
        let root = self.standardizer()?;
        let d = self.d();
        let pisq: Vec<f64> = self.pi.iter().map(|p| p * p).collect();
        let mut norms = Vec::with_capacity(d + 1);
        for variant in 0..=d {
            let x: Vec<f64> = (0..d)
                .map(|i| {
                    let ind = if variant > 0 && i == variant - 1 { 1.0 } else { 0.0 };
                    ind - pisq[i]
                })
                .collect();
            let xi = root.mul_vec(&x)?;
            norms.push(xi.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        Ok(norms)
    }

    /// Dependency model of the edge summands: one summand per edge, atoms
    /// are the endpoint vertices, β is the ξ envelope.
    pub fn dependency_model(&self) -> Result<DependencyModel> {
        let sources = self
            .graph
            .edges
            .iter()
            .map(|&(u, v)| BTreeSet::from([u, v]))
            .collect();
        DependencyModel::new(sources, self.xi_envelope()?)
    }
}
