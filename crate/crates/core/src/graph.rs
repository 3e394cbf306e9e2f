//! Δ-regular balanced bipartite graphs with a total edge order, spectral
//! expansion measured through the second singular value of the biadjacency
//! matrix, expander-mixing checks, and consistently ordered graph copies.
//!
//! The expansion parameter γ is defined as σ₂(biadjacency)/Δ. The signed
//! adjacency spectrum of a bipartite graph always contains -Δ, which would
//! force γ = 1 under a literal second-eigenvalue reading; the singular-value
//! convention is the one the mixing inequality actually uses. Spectral
//! computation is the only floating-point code in the crate.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Dense decomposition is used up to this side size; power iteration beyond.
const EXACT_SVD_LIMIT: usize = 512;

/// Regularity residual allowed between the top singular value and Δ.
pub const SPECTRAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("degree {delta} exceeds the side size {n}")]
    DegreeTooLarge { n: usize, delta: usize },
    #[error("degree and side size must be positive")]
    EmptyGraph,
    #[error("failed to sample a simple {delta}-regular bipartite graph in {attempts} attempts")]
    RejectionBudgetExceeded { delta: usize, attempts: usize },
    #[error("power iteration did not converge: residual {residual}")]
    ConvergenceFailure { residual: f64 },
    #[error("subset is empty")]
    EmptySubset,
    #[error("vertex index {got} out of range for side size {n}")]
    VertexOutOfRange { n: usize, got: usize },
    #[error("parallel edge ({left}, {right})")]
    ParallelEdge { left: usize, right: usize },
    #[error("graph is not {delta}-regular on both sides")]
    NotRegular { delta: usize },
}

/// A Δ-regular balanced bipartite graph on n + n vertices. The edge list
/// order is the total order every construction on top of this graph uses.
pub struct BipartiteGraph {
    n: usize,
    delta: usize,
    /// (left, right), 0-based; the position in this list is the edge id.
    edges: Vec<(usize, usize)>,
    left_inc: Vec<Vec<usize>>,
    right_inc: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    fn from_edges(n: usize, delta: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut left_inc = vec![Vec::with_capacity(delta); n];
        let mut right_inc = vec![Vec::with_capacity(delta); n];
        for (id, &(s, t)) in edges.iter().enumerate() {
            left_inc[s].push(id);
            right_inc[t].push(id);
        }
        debug_assert!(left_inc.iter().all(|v| v.len() == delta));
        debug_assert!(right_inc.iter().all(|v| v.len() == delta));
        BipartiteGraph {
            n,
            delta,
            edges,
            left_inc,
            right_inc,
        }
    }

    /// Builds a graph from an explicit edge list whose order becomes the
    /// total order. Validates Δ-regularity on both sides and simplicity.
    pub fn from_ordered_edges(
        n: usize,
        delta: usize,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, GraphError> {
        if n == 0 || delta == 0 {
            return Err(GraphError::EmptyGraph);
        }
        if delta > n {
            return Err(GraphError::DegreeTooLarge { n, delta });
        }
        let mut left_deg = vec![0usize; n];
        let mut right_deg = vec![0usize; n];
        let mut seen = vec![false; n * n];
        for &(s, t) in &edges {
            if s >= n || t >= n {
                return Err(GraphError::VertexOutOfRange { n, got: s.max(t) });
            }
            if seen[s * n + t] {
                return Err(GraphError::ParallelEdge { left: s, right: t });
            }
            seen[s * n + t] = true;
            left_deg[s] += 1;
            right_deg[t] += 1;
        }
        if left_deg.iter().any(|&d| d != delta) || right_deg.iter().any(|&d| d != delta) {
            return Err(GraphError::NotRegular { delta });
        }
        Ok(Self::from_edges(n, delta, edges))
    }

    /// Complete bipartite graph K_{n,n} with lexicographic edge order.
    pub fn complete(n: usize) -> Self {
        assert!(n >= 1);
        let mut edges = Vec::with_capacity(n * n);
        for s in 0..n {
            for t in 0..n {
                edges.push((s, t));
            }
        }
        Self::from_edges(n, n, edges)
    }

    /// Union of `delta` random perfect matchings, resampled on parallel
    /// edges. Deterministic for a fixed seed; edges sorted lexicographically.
    pub fn random_regular(n: usize, delta: usize, seed: u64) -> Result<Self, GraphError> {
        if n == 0 || delta == 0 {
            return Err(GraphError::EmptyGraph);
        }
        if delta > n {
            return Err(GraphError::DegreeTooLarge { n, delta });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let attempts_budget = 1000 * delta.max(1);
        let mut present = vec![false; n * n];
        let mut edges = Vec::with_capacity(n * delta);
        let mut placed = 0usize;
        let mut attempts = 0usize;
        while placed < delta {
            attempts += 1;
            if attempts > attempts_budget {
                return Err(GraphError::RejectionBudgetExceeded {
                    delta,
                    attempts: attempts_budget,
                });
            }
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            if perm.iter().enumerate().any(|(s, &t)| present[s * n + t]) {
                continue;
            }
            for (s, &t) in perm.iter().enumerate() {
                present[s * n + t] = true;
                edges.push((s, t));
            }
            placed += 1;
        }
        edges.sort_unstable();
        Ok(Self::from_edges(n, delta, edges))
    }

    /// Vertices per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge ids incident with left vertex s, in edge order.
    pub fn left_incidence(&self, s: usize) -> &[usize] {
        &self.left_inc[s]
    }

    /// Edge ids incident with right vertex t, in edge order.
    pub fn right_incidence(&self, t: usize) -> &[usize] {
        &self.right_inc[t]
    }

    fn biadjacency(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.n, self.n);
        for &(s, t) in &self.edges {
            b[(s, t)] = 1.0;
        }
        b
    }

    /// Measures γ = σ₂/Δ. Small graphs use a dense decomposition; larger
    /// ones a power iteration on the biadjacency with the regular top pair
    /// deflated analytically.
    pub fn gamma(&self) -> Result<SpectralProfile, GraphError> {
        self.gamma_with_method(self.n > EXACT_SVD_LIMIT)
    }

    /// Same as [`BipartiteGraph::gamma`], with the method forced; used to
    /// cross-check the iterative path against the exact one.
    pub fn gamma_with_method(&self, force_power: bool) -> Result<SpectralProfile, GraphError> {
        let delta = self.delta as f64;
        if self.n == 1 {
            return Ok(SpectralProfile {
                delta: self.delta,
                gamma: 0.0,
                sigma_top: delta,
                method: SpectralMethod::ExactSmall,
                residual: 0.0,
            });
        }
        if !force_power {
            let svd = self.biadjacency().svd(false, false);
            let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
            sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
            let sigma_top = sv[0];
            let residual = (sigma_top - delta).abs();
            assert!(
                residual <= SPECTRAL_TOL * delta.max(1.0),
                "top singular value {sigma_top} must equal the degree {delta}"
            );
            return Ok(SpectralProfile {
                delta: self.delta,
                gamma: (sv[1] / delta).clamp(0.0, 1.0),
                sigma_top,
                method: SpectralMethod::ExactSmall,
                residual,
            });
        }
        // Power iteration on B^T B with the all-ones top pair removed:
        // M v = B^T(B v) - (Δ²/n) (1·v) 1.
        let b = self.biadjacency();
        let n = self.n;
        let mut v: Vec<f64> = (0..n)
            .map(|i| ((i as f64 + 1.0) * 0.754_877_666).fract() - 0.5)
            .collect();
        let apply = |v: &[f64]| -> Vec<f64> {
            let vv = nalgebra::DVector::from_column_slice(v);
            let bv = &b * &vv;
            let btbv = b.transpose() * bv;
            let mean: f64 = v.iter().sum::<f64>() / n as f64;
            let shift = delta * delta * mean;
            (0..n).map(|i| btbv[i] - shift).collect()
        };
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut lambda = 0.0f64;
        let mut residual = f64::INFINITY;
        for _ in 0..20_000 {
            let w = apply(&v);
            let nw = norm(&w);
            if nw < 1e-300 {
                // deflated operator annihilates v: σ₂ = 0
                lambda = 0.0;
                residual = 0.0;
                break;
            }
            let next: Vec<f64> = w.iter().map(|x| x / nw).collect();
            let wv = apply(&next);
            lambda = next.iter().zip(&wv).map(|(a, b)| a * b).sum();
            residual = next
                .iter()
                .zip(&wv)
                .map(|(a, b)| (b - lambda * a).powi(2))
                .sum::<f64>()
                .sqrt();
            v = next;
            if residual <= 1e-10 * delta * delta {
                break;
            }
        }
        if residual > 1e-7 * delta * delta {
            return Err(GraphError::ConvergenceFailure { residual });
        }
        let sigma2 = lambda.max(0.0).sqrt();
        Ok(SpectralProfile {
            delta: self.delta,
            gamma: (sigma2 / delta).clamp(0.0, 1.0),
            sigma_top: delta,
            method: SpectralMethod::PowerIteration,
            residual,
        })
    }

    /// Edge count between a left subset S and a right subset T versus the
    /// mixing bound ((1-γ)|S||T|/n + γ√(|S||T|)) Δ.
    pub fn mixing_check(
        &self,
        s: &[usize],
        t: &[usize],
        gamma: f64,
    ) -> Result<MixingCheck, GraphError> {
        if s.is_empty() || t.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        for &v in s.iter().chain(t) {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { n: self.n, got: v });
            }
        }
        let in_t = {
            let mut mask = vec![false; self.n];
            for &v in t {
                mask[v] = true;
            }
            mask
        };
        let mut lhs = 0u64;
        for &sv in s {
            for &e in &self.left_inc[sv] {
                if in_t[self.edges[e].1] {
                    lhs += 1;
                }
            }
        }
        let (ss, tt) = (s.len() as f64, t.len() as f64);
        let rhs = ((1.0 - gamma) * ss * tt / self.n as f64 + gamma * (ss * tt).sqrt())
            * self.delta as f64;
        Ok(MixingCheck {
            lhs,
            rhs,
            holds: (lhs as f64) <= rhs + SPECTRAL_TOL,
        })
    }

    /// Sweeps `trials` random nonempty subset pairs through the mixing check.
    pub fn mixing_sweep(&self, trials: usize, seed: u64, gamma: f64) -> MixingSweep {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = 0usize;
        let mut max_ratio = 0.0f64;
        for _ in 0..trials {
            let s = random_nonempty_subset(self.n, &mut rng);
            let t = random_nonempty_subset(self.n, &mut rng);
            let check = self
                .mixing_check(&s, &t, gamma)
                .expect("subsets are nonempty and in range");
            if !check.holds {
                violations += 1;
            }
            if check.rhs > 0.0 {
                max_ratio = max_ratio.max(check.lhs as f64 / check.rhs);
            }
        }
        MixingSweep {
            trials,
            violations,
            max_ratio,
        }
    }

    /// Index map for m + 1 isomorphic copies with consistent edge order:
    /// copy j's edges occupy the id range [j·nΔ, (j+1)·nΔ) in within-copy
    /// order identical to the base graph.
    pub fn copies(&self, m: usize) -> EdgeIndexing {
        EdgeIndexing {
            edges_per_copy: self.num_edges(),
            copies: m + 1,
        }
    }

    /// Serialization: header "n Δ", then one 1-indexed "s t" line per edge
    /// in the total order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.delta);
        for &(s, t) in &self.edges {
            out.push_str(&format!("{} {}\n", s + 1, t + 1));
        }
        out
    }
}

fn random_nonempty_subset(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::Rng;
    loop {
        let subset: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !subset.is_empty() {
            return subset;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectralMethod {
    ExactSmall,
    PowerIteration,
}

/// Measured expansion of a graph.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralProfile {
    pub delta: usize,
    /// Second singular value of the biadjacency matrix divided by Δ.
    pub gamma: f64,
    pub sigma_top: f64,
    pub method: SpectralMethod,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MixingCheck {
    pub lhs: u64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MixingSweep {
    pub trials: usize,
    pub violations: usize,
    pub max_ratio: f64,
}

/// Placement of edge ids across consistently ordered graph copies.
#[derive(Debug, Clone, Copy)]
pub struct EdgeIndexing {
    pub edges_per_copy: usize,
    pub copies: usize,
}

impl EdgeIndexing {
    pub fn global(&self, copy: usize, local: usize) -> usize {
        debug_assert!(copy < self.copies && local < self.edges_per_copy);
        copy * self.edges_per_copy + local
    }

    pub fn total(&self) -> usize {
        self.copies * self.edges_per_copy
    }
}
