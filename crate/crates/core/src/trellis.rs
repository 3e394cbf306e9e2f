//! Trellis codes presented by labeled digraphs: structural validation
//! (regularity, determinism, irreducibility, losslessness), exact column and
//! free distances via shortest-path searches on the pair graph, Singleton-type
//! bounds on both distances, and the disjoint-alphabet construction whose
//! column distance reaches the maximum (j+1)n.
//!
//! Bound values involve log_q M and log_q |V|, which are kept as exact
//! rationals whenever q and the argument are powers of a common integer base
//! and fall back to floating point (with a documented 1e-9 comparison
//! tolerance) otherwise.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::conv::{ConvError, ConvolutionalCode, StateSpace};

/// Comparison tolerance for bound values that are not exactly rational.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TrellisError {
    #[error("edge {index} references state {state}, but there are only {states} states")]
    BadState {
        index: usize,
        state: usize,
        states: usize,
    },
    #[error("initial state {state} out of range for {states} states")]
    BadInitial { state: usize, states: usize },
    #[error("edge {index} has a label of length {got}, expected {expected}")]
    BadLabelLength {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("edge {index} carries symbol {symbol} outside the alphabet of size {q}")]
    BadSymbol { index: usize, symbol: u64, q: u64 },
    #[error("graph has no states")]
    Empty,
    #[error("distance queries require a deterministic presentation")]
    NotDeterministic,
    #[error("pair graph of {size} states exceeds the guard {guard}")]
    BudgetExceeded { size: u64, guard: u64 },
    #[error("the initial state has fewer than two outgoing edges; no codeword pairs exist")]
    NoCodewordPairs,
    #[error("presentation is truncated: no pairs survive to depth {depth}, requested {requested}")]
    DepthExceeded { depth: usize, requested: usize },
    #[error("partition hypotheses violated: need M^j | q and (q/M^j)^n = M, got q={q}, M={m}, n={n}, j={j}")]
    PartitionHypothesis { q: u64, m: u64, n: usize, j: usize },
    #[error("construction of size {size} exceeds the limit {limit}")]
    TooLarge { size: u64, limit: u64 },
    #[error(transparent)]
    Conv(#[from] ConvError),
}

#[derive(Debug, Clone)]
pub struct TrellisEdge {
    pub src: usize,
    pub dst: usize,
    pub label: Vec<u64>,
}

/// A finite labeled digraph with edge labels in Sigma_q^n, in presentation
/// order.
pub struct LabeledDigraph {
    q: u64,
    n: usize,
    declared_m: usize,
    num_states: usize,
    edges: Vec<TrellisEdge>,
    out: Vec<Vec<usize>>,
}

impl LabeledDigraph {
    pub fn new(
        q: u64,
        n: usize,
        declared_m: usize,
        num_states: usize,
        edges: Vec<TrellisEdge>,
    ) -> Result<Self, TrellisError> {
        if num_states == 0 {
            return Err(TrellisError::Empty);
        }
        let mut out = vec![Vec::new(); num_states];
        for (i, e) in edges.iter().enumerate() {
            if e.src >= num_states || e.dst >= num_states {
                return Err(TrellisError::BadState {
                    index: i,
                    state: e.src.max(e.dst),
                    states: num_states,
                });
            }
            if e.label.len() != n {
                return Err(TrellisError::BadLabelLength {
                    index: i,
                    expected: n,
                    got: e.label.len(),
                });
            }
            if let Some(&s) = e.label.iter().find(|&&s| s >= q) {
                return Err(TrellisError::BadSymbol {
                    index: i,
                    symbol: s,
                    q,
                });
            }
            out[e.src].push(i);
        }
        Ok(LabeledDigraph {
            q,
            n,
            declared_m,
            num_states,
            edges,
            out,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn declared_m(&self) -> usize {
        self.declared_m
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn edges(&self) -> &[TrellisEdge] {
        &self.edges
    }

    pub fn out_edges(&self, state: usize) -> &[usize] {
        &self.out[state]
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_states];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(s) = stack.pop() {
            for &e in &self.out[s] {
                let d = self.edges[e].dst;
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        seen
    }

    fn co_reachable_to(&self, target: usize) -> Vec<bool> {
        let mut rev = vec![Vec::new(); self.num_states];
        for e in &self.edges {
            rev[e.dst].push(e.src);
        }
        let mut seen = vec![false; self.num_states];
        let mut stack = vec![target];
        seen[target] = true;
        while let Some(s) = stack.pop() {
            for &p in &rev[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }
}

/// Structural verdicts for a presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrellisFlags {
    pub m_regular: bool,
    pub deterministic: bool,
    pub irreducible: bool,
    pub lossless: bool,
}

/// A trellis code: a labeled digraph with a fixed initial state, validated
/// flags, and distance queries.
pub struct TrellisCode {
    graph: LabeledDigraph,
    initial: usize,
    flags: TrellisFlags,
}

impl TrellisCode {
    /// Computes all structural flags. Determinism implies losslessness, so
    /// the pair-path analysis runs only for non-deterministic presentations.
    pub fn validate(graph: LabeledDigraph, initial: usize) -> Result<Self, TrellisError> {
        if initial >= graph.num_states {
            return Err(TrellisError::BadInitial {
                state: initial,
                states: graph.num_states,
            });
        }
        let m_regular = graph
            .out
            .iter()
            .all(|edges| edges.len() == graph.declared_m);
        let deterministic = graph.out.iter().all(|edges| {
            for (i, &a) in edges.iter().enumerate() {
                for &b in &edges[i + 1..] {
                    if graph.edges[a].label == graph.edges[b].label {
                        return false;
                    }
                }
            }
            true
        });
        let fwd = graph.reachable_from(initial);
        let bwd = graph.co_reachable_to(initial);
        let irreducible = fwd.iter().all(|&r| r) && bwd.iter().all(|&r| r);
        let lossless = if deterministic {
            // equal-label paths from a common state coincide edge by edge,
            // so no distinct pair can share both endpoints and labels
            debug_assert!(lossless_check(&graph));
            true
        } else {
            lossless_check(&graph)
        };
        Ok(TrellisCode {
            graph,
            initial,
            flags: TrellisFlags {
                m_regular,
                deterministic,
                irreducible,
                lossless,
            },
        })
    }

    pub fn graph(&self) -> &LabeledDigraph {
        &self.graph
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn flags(&self) -> TrellisFlags {
        self.flags
    }

    /// log_q |V| for this presentation: an upper bound on the code degree.
    pub fn degree_upper(&self) -> Scalar {
        log_base(self.graph.q, self.graph.num_states as u64)
    }

    /// Builds the encoder state graph of a convolutional code as a trellis
    /// presentation with M = q^k and initial state zero.
    pub fn from_convolutional(code: &ConvolutionalCode, guard: u64) -> Result<Self, TrellisError> {
        let space = StateSpace::new(code.generator());
        if space.num_states > guard {
            return Err(TrellisError::BudgetExceeded {
                size: space.num_states,
                guard,
            });
        }
        let q = code.field().q();
        let msgs = q.pow(code.k() as u32);
        let mut edges = Vec::with_capacity((space.num_states * msgs) as usize);
        let mut block = vec![0u64; code.n()];
        for s in 0..space.num_states {
            for u in 0..msgs {
                let next = space.transition(s, u, &mut block);
                edges.push(TrellisEdge {
                    src: s as usize,
                    dst: next as usize,
                    label: block.clone(),
                });
            }
        }
        let graph =
            LabeledDigraph::new(q, code.n(), msgs as usize, space.num_states as usize, edges)?;
        Self::validate(graph, 0)
    }

    /// Exact j-th column distance: the minimum accumulated block distance
    /// over codeword pairs whose first blocks differ, computed by a step DP
    /// on the pair graph.
    pub fn column_distance(&self, j: usize, guard: u64) -> Result<u64, TrellisError> {
        let mins = self.column_profile(j, guard)?;
        Ok(mins[j])
    }

    /// d_0 .. d_j in one pair-graph sweep.
    pub fn column_profile(&self, j: usize, guard: u64) -> Result<Vec<u64>, TrellisError> {
        if !self.flags.deterministic {
            return Err(TrellisError::NotDeterministic);
        }
        let v = self.graph.num_states;
        let pair_count = (v as u64).checked_mul(v as u64).filter(|&p| p <= guard);
        let Some(pairs) = pair_count else {
            return Err(TrellisError::BudgetExceeded {
                size: (v as u64).saturating_mul(v as u64),
                guard,
            });
        };
        let mut dist = vec![u64::MAX; pairs as usize];
        let init_edges = self.graph.out_edges(self.initial);
        if init_edges.len() < 2 {
            return Err(TrellisError::NoCodewordPairs);
        }
        for (i, &ea) in init_edges.iter().enumerate() {
            for &eb in &init_edges[i + 1..] {
                let a = &self.graph.edges[ea];
                let b = &self.graph.edges[eb];
                let idx = a.dst * v + b.dst;
                let d = hamming(&a.label, &b.label);
                if d < dist[idx] {
                    dist[idx] = d;
                }
            }
        }
        let mut result = Vec::with_capacity(j + 1);
        let step_min = |dist: &[u64]| dist.iter().copied().filter(|&d| d != u64::MAX).min();
        let first = step_min(&dist).expect("initial splits exist");
        result.push(first);
        let mut cur = dist;
        for depth in 1..=j {
            let mut next = vec![u64::MAX; pairs as usize];
            let mut any = false;
            for (idx, &d) in cur.iter().enumerate() {
                if d == u64::MAX {
                    continue;
                }
                let (a, b) = (idx / v, idx % v);
                for &ea in self.graph.out_edges(a) {
                    let eda = &self.graph.edges[ea];
                    for &eb in self.graph.out_edges(b) {
                        let edb = &self.graph.edges[eb];
                        let nd = d + hamming(&eda.label, &edb.label);
                        let nidx = eda.dst * v + edb.dst;
                        if nd < next[nidx] {
                            next[nidx] = nd;
                            any = true;
                        }
                    }
                }
            }
            if !any {
                return Err(TrellisError::DepthExceeded {
                    depth,
                    requested: j + 1,
                });
            }
            result.push(step_min(&next).expect("frontier nonempty"));
            cur = next;
        }
        Ok(result)
    }

    /// Free distance: the minimum accumulated distance over distinct codeword
    /// pairs. Exact whenever every reachable state has a successor; on
    /// truncated (dead-ended) presentations returns the deepest computable
    /// column distance as a bracket for divergences at time zero.
    pub fn free_distance(&self, guard: u64) -> Result<FreeDistance, TrellisError> {
        if !self.flags.deterministic {
            return Err(TrellisError::NotDeterministic);
        }
        let v = self.graph.num_states;
        let pair_count = (v as u64).checked_mul(v as u64).filter(|&p| p <= guard);
        let Some(pairs) = pair_count else {
            return Err(TrellisError::BudgetExceeded {
                size: (v as u64).saturating_mul(v as u64),
                guard,
            });
        };
        let reach = self.graph.reachable_from(self.initial);
        let dead_end = (0..v).any(|s| reach[s] && self.graph.out_edges(s).is_empty());
        if dead_end {
            return self.truncation_bracket(guard);
        }

        // Pair states from which an infinite zero-cost continuation exists:
        // survivors of iteratively deleting nodes with no zero-cost successor.
        let zero_succs: Vec<Vec<usize>> = (0..pairs as usize)
            .map(|idx| {
                let (a, b) = (idx / v, idx % v);
                let mut succ = Vec::new();
                for &ea in self.graph.out_edges(a) {
                    let eda = &self.graph.edges[ea];
                    for &eb in self.graph.out_edges(b) {
                        let edb = &self.graph.edges[eb];
                        if eda.label == edb.label {
                            succ.push(eda.dst * v + edb.dst);
                        }
                    }
                }
                succ
            })
            .collect();
        let mut alive = vec![true; pairs as usize];
        loop {
            let mut changed = false;
            for idx in 0..pairs as usize {
                if alive[idx] && !zero_succs[idx].iter().any(|&s| alive[s]) {
                    alive[idx] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        // Multi-source Dijkstra from every split at a reachable state.
        let mut dist = vec![u64::MAX; pairs as usize];
        let mut heap = std::collections::BinaryHeap::new();
        let mut best = u64::MAX;
        for (s, _) in reach.iter().enumerate().filter(|(_, &r)| r).take(v) {
            let out = self.graph.out_edges(s);
            for (i, &ea) in out.iter().enumerate() {
                for &eb in &out[i + 1..] {
                    let a = &self.graph.edges[ea];
                    let b = &self.graph.edges[eb];
                    let idx = a.dst * v + b.dst;
                    let d = hamming(&a.label, &b.label);
                    if alive[idx] {
                        best = best.min(d);
                    } else if d < dist[idx] {
                        dist[idx] = d;
                        heap.push(std::cmp::Reverse((d, idx)));
                    }
                }
            }
        }
        while let Some(std::cmp::Reverse((d, idx))) = heap.pop() {
            if d > dist[idx] || d >= best {
                continue;
            }
            let (a, b) = (idx / v, idx % v);
            for &ea in self.graph.out_edges(a) {
                let eda = &self.graph.edges[ea];
                for &eb in self.graph.out_edges(b) {
                    let edb = &self.graph.edges[eb];
                    let nd = d + hamming(&eda.label, &edb.label);
                    let nidx = eda.dst * v + edb.dst;
                    if alive[nidx] {
                        best = best.min(nd);
                    } else if nd < dist[nidx] {
                        dist[nidx] = nd;
                        heap.push(std::cmp::Reverse((nd, nidx)));
                    }
                }
            }
        }
        if best == u64::MAX {
            Ok(FreeDistance::Unbounded)
        } else {
            Ok(FreeDistance::Exact(best))
        }
    }

    fn truncation_bracket(&self, guard: u64) -> Result<FreeDistance, TrellisError> {
        // Deepest column distance still witnessed by a pair of paths.
        let mut depth = 0usize;
        let mut last = None;
        loop {
            match self.column_distance(depth, guard) {
                Ok(d) => {
                    last = Some(d);
                    depth += 1;
                }
                Err(TrellisError::DepthExceeded { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        match last {
            Some(d) => Ok(FreeDistance::TruncationBracket(d)),
            None => Ok(FreeDistance::Unbounded),
        }
    }

    /// Evaluates the three Singleton-type bounds at time index `j` against
    /// the achieved distances of this presentation.
    pub fn bounds(&self, j: usize, guard: u64) -> Result<BoundReport, TrellisError> {
        let q = self.graph.q;
        let m_size = self.graph.declared_m as u64;
        let n = self.graph.n;
        let states = self.graph.num_states as u64;
        let log_q_m = log_base(q, m_size);
        let degree_upper = log_base(q, states);

        let column = self.column_profile(j, guard)?;
        let free = self.free_distance(guard)?;

        // Free-distance bound with the presentation degree:
        // (n - log_q M)(floor(log_M |V|) + 1) + log_q |V| + 1.
        let t3 = int_log_floor(m_size, states);
        let one = Scalar::from_int(1);
        let free_bound =
            (Scalar::from_int(n as i64) - log_q_m) * Scalar::from_int(t3 + 1) + degree_upper + one;

        let column_bound = |t: usize| Scalar::from_int(((t + 1) * n) as i64) - log_q_m + one;
        let column_bound_conditional = |t: usize| {
            Scalar::from_int((t + 1) as i64) * (Scalar::from_int(n as i64) - log_q_m) + one
        };

        let mut column_ok = true;
        let mut conditional_ok = true;
        let mut conditional_applied = false;
        let mut attained = Vec::with_capacity(j + 1);
        for (t, &d) in column.iter().enumerate() {
            let eq5 = column_bound(t);
            column_ok &= Scalar::from_int(d as i64).le_with_tol(eq5);
            attained.push(Scalar::from_int(d as i64).eq_with_tol(eq5));
            if d <= n as u64 {
                conditional_applied = true;
                conditional_ok &=
                    Scalar::from_int(d as i64).le_with_tol(column_bound_conditional(t));
            }
        }
        // If the bound is attained at some index, it must be attained at all
        // earlier ones.
        let mut chain_ok = true;
        for t in 1..attained.len() {
            if attained[t] && !attained[t - 1] {
                chain_ok = false;
            }
        }
        let free_le_bound = match free {
            FreeDistance::Exact(d) => Some(Scalar::from_int(d as i64).le_with_tol(free_bound)),
            _ => None,
        };

        Ok(BoundReport {
            q,
            m_size,
            n,
            j,
            num_states: states,
            log_q_m,
            degree_upper,
            free_bound: BoundSide::new(free_bound),
            column_bound: BoundSide::new(column_bound(j)),
            column_bound_conditional: BoundSide::new(column_bound_conditional(j)),
            achieved_column: column,
            achieved_free: free,
            column_ok,
            conditional_applied,
            conditional_ok,
            chain_ok,
            free_le_bound,
        })
    }
}

/// Losslessness: no two distinct equal-label paths share both endpoints.
/// Checked by reachability in the pair graph, tracking whether the two paths
/// have already taken different edges.
fn lossless_check(graph: &LabeledDigraph) -> bool {
    let v = graph.num_states;
    // visited[a * v + b] for pairs that have diverged (taken distinct edges).
    let mut visited = vec![false; v * v];
    let mut stack = Vec::new();
    for s in 0..v {
        let out = graph.out_edges(s);
        for (i, &ea) in out.iter().enumerate() {
            for &eb in &out[i + 1..] {
                let a = &graph.edges[ea];
                let b = &graph.edges[eb];
                if a.label == b.label {
                    let idx = a.dst * v + b.dst;
                    if !visited[idx] {
                        visited[idx] = true;
                        stack.push(idx);
                    }
                }
            }
        }
    }
    while let Some(idx) = stack.pop() {
        let (a, b) = (idx / v, idx % v);
        if a == b {
            return false;
        }
        for &ea in graph.out_edges(a) {
            let eda = &graph.edges[ea];
            for &eb in graph.out_edges(b) {
                let edb = &graph.edges[eb];
                if eda.label == edb.label {
                    let nidx = eda.dst * v + edb.dst;
                    if !visited[nidx] {
                        visited[nidx] = true;
                        stack.push(nidx);
                    }
                }
            }
        }
    }
    true
}

fn hamming(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Free distance outcome for a presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FreeDistance {
    /// The exact minimum distance over distinct codeword pairs.
    Exact(u64),
    /// The presentation is truncated; this is the minimum accumulated
    /// distance over divergences at time zero, through the full depth.
    TruncationBracket(u64),
    /// No codeword pair accumulates finite distance.
    Unbounded,
}

/// An exact rational or a floating-point approximation, used for values of
/// the form log_q M.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Exact(Ratio<i64>),
    Approx(f64),
}

impl Scalar {
    pub fn from_int(v: i64) -> Scalar {
        Scalar::Exact(Ratio::from_integer(v))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().expect("small rational"),
            Scalar::Approx(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// self <= other, with the tolerance granted to the bound side for
    /// approximate values.
    pub fn le_with_tol(self, bound: Scalar) -> bool {
        match (self, bound) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a <= b,
            _ => self.as_f64() <= bound.as_f64() + BOUND_TOL,
        }
    }

    pub fn eq_with_tol(self, other: Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => (self.as_f64() - other.as_f64()).abs() <= BOUND_TOL,
        }
    }

    /// Largest integer not exceeding the value (tolerance applied to
    /// approximations). Distances are integers, so `d <= bound` iff
    /// `d <= bound.floor_effective()`.
    pub fn floor_effective(self) -> i64 {
        match self {
            Scalar::Exact(r) => r.floor().to_integer(),
            Scalar::Approx(v) => (v + BOUND_TOL).floor() as i64,
        }
    }
}

impl std::ops::Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => Scalar::Approx(self.as_f64() + o.as_f64()),
        }
    }
}

impl std::ops::Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => Scalar::Approx(self.as_f64() - o.as_f64()),
        }
    }
}

impl std::ops::Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => Scalar::Approx(self.as_f64() * o.as_f64()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.to_integer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Approx(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Scalar", 3)?;
        st.serialize_field("exact", &self.is_exact())?;
        st.serialize_field("value", &self.to_string())?;
        st.serialize_field("f64", &self.as_f64())?;
        st.end()
    }
}

/// A bound value together with its integer-effective form.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundSide {
    pub value: Scalar,
    pub effective: i64,
}

impl BoundSide {
    fn new(value: Scalar) -> BoundSide {
        BoundSide {
            value,
            effective: value.floor_effective(),
        }
    }
}

/// Bound evaluation at a time index: the free-distance bound (with the
/// presentation degree), the unconditional and small-distance column bounds,
/// the achieved distances, and the verdicts.
#[derive(Debug, Serialize)]
pub struct BoundReport {
    pub q: u64,
    pub m_size: u64,
    pub n: usize,
    pub j: usize,
    pub num_states: u64,
    pub log_q_m: Scalar,
    pub degree_upper: Scalar,
    pub free_bound: BoundSide,
    pub column_bound: BoundSide,
    pub column_bound_conditional: BoundSide,
    pub achieved_column: Vec<u64>,
    pub achieved_free: FreeDistance,
    /// d_t <= column bound for every t <= j.
    pub column_ok: bool,
    /// Some t <= j had d_t <= n, so the conditional bound applied.
    pub conditional_applied: bool,
    /// d_t <= conditional bound whenever d_t <= n.
    pub conditional_ok: bool,
    /// Attaining the column bound at t forces attainment at all earlier t.
    pub chain_ok: bool,
    /// Free distance against its bound; None when only a bracket is known.
    pub free_le_bound: Option<bool>,
}

/// log_base(q, m): exact rational t/s when q = b^s and m = b^t for a common
/// integer base b, floating point otherwise. log of 1 is exactly zero.
pub fn log_base(q: u64, m: u64) -> Scalar {
    assert!(q >= 2, "alphabet size must be at least 2");
    if m == 0 {
        return Scalar::Approx(f64::NEG_INFINITY);
    }
    if m == 1 {
        return Scalar::from_int(0);
    }
    for b in 2..=q.min(m) {
        if let (Some(s), Some(t)) = (int_log_exact(b, q), int_log_exact(b, m)) {
            return Scalar::Exact(Ratio::new(t as i64, s as i64));
        }
    }
    Scalar::Approx((m as f64).ln() / (q as f64).ln())
}

/// Some(e) iff base^e = v exactly.
fn int_log_exact(base: u64, v: u64) -> Option<u32> {
    let mut acc = 1u64;
    let mut e = 0u32;
    while acc < v {
        acc = acc.checked_mul(base)?;
        e += 1;
    }
    (acc == v).then_some(e)
}

/// Largest t with m^t <= v (exact integer computation).
fn int_log_floor(m: u64, v: u64) -> i64 {
    assert!(m >= 2);
    let mut acc = 1u64;
    let mut t = 0i64;
    while let Some(next) = acc.checked_mul(m) {
        if next > v {
            break;
        }
        acc = next;
        t += 1;
    }
    t
}

/// The disjoint-alphabet trellis code: nested partitions of the alphabet
/// force any two codewords differing in block zero to differ in every symbol
/// through depth j, so the column distance reaches (j+1)n.
pub struct DisjointAlphabetCode {
    pub trellis: TrellisCode,
    pub q: u64,
    pub m_size: u64,
    pub n: usize,
    /// Truncation depth j; the trellis presents blocks 0..=j.
    pub depth: usize,
    /// Number of depth-(j+1) codewords: M^{j+1}.
    pub code_size: u64,
    /// Verified j-th column distance: (j+1) n.
    pub column_distance: u64,
    /// levels[i][t] lists the n-tuples of the t-th selection set at depth i.
    pub levels: Vec<Vec<Vec<Vec<u64>>>>,
}

/// Builds the disjoint-alphabet code for alphabet size q, fanout M, block
/// length n, and depth j >= 1. Requires M^j | q and (q / M^j)^n = M. The
/// selections pick the smallest available tuples, which keeps the build
/// deterministic; distances do not depend on the choice.
pub fn disjoint_alphabet_code(
    q: u64,
    m_size: u64,
    n: usize,
    j: usize,
    limit: u64,
) -> Result<DisjointAlphabetCode, TrellisError> {
    if j == 0 || n == 0 || m_size < 2 {
        return Err(TrellisError::PartitionHypothesis { q, m: m_size, n, j });
    }
    let mj = m_size
        .checked_pow(j as u32)
        .filter(|&v| v <= q && q.is_multiple_of(v))
        .ok_or(TrellisError::PartitionHypothesis { q, m: m_size, n, j })?;
    let cell = q / mj;
    if cell.checked_pow(n as u32) != Some(m_size) {
        return Err(TrellisError::PartitionHypothesis { q, m: m_size, n, j });
    }
    // Total tuples stored: sum over levels i of M^i * M.
    let mut total_tuples = 0u64;
    let mut level_count = 1u64;
    for _ in 0..=j {
        total_tuples = total_tuples.saturating_add(level_count.saturating_mul(m_size));
        level_count = level_count.saturating_mul(m_size);
    }
    if total_tuples > limit {
        return Err(TrellisError::TooLarge {
            size: total_tuples,
            limit,
        });
    }

    let mut levels: Vec<Vec<Vec<Vec<u64>>>> = vec![Vec::new(); j + 1];
    // Deepest level: the t-th cell of the partition is the symbol range
    // [t*cell, (t+1)*cell), and its selection set is all n-tuples over it.
    levels[j] = (0..mj)
        .map(|t| {
            let lo = t * cell;
            let mut tuples = Vec::with_capacity(m_size as usize);
            let mut idx = vec![0u64; n];
            loop {
                tuples.push(idx.iter().map(|&d| lo + d).collect());
                let mut pos = n;
                loop {
                    if pos == 0 {
                        return tuples;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < cell {
                        break;
                    }
                    idx[pos] = 0;
                }
            }
        })
        .collect();
    for i in (0..j).rev() {
        let count = m_size.pow(i as u32);
        levels[i] = (0..count)
            .map(|t| {
                (0..m_size)
                    .map(|c| levels[i + 1][(t * m_size + c) as usize][0].clone())
                    .collect()
            })
            .collect();
    }

    // Membership maps: tuple -> set index, one per level below the root.
    let lookup: Vec<HashMap<Vec<u64>, usize>> = (0..=j)
        .map(|i| {
            let mut map = HashMap::new();
            for (t, set) in levels[i].iter().enumerate() {
                for tuple in set {
                    map.insert(tuple.clone(), t);
                }
            }
            map
        })
        .collect();

    // States: one per selection set per level, plus a terminal sink.
    let mut offsets = vec![0usize; j + 2];
    for i in 0..=j {
        offsets[i + 1] = offsets[i] + m_size.pow(i as u32) as usize;
    }
    let terminal = offsets[j + 1];
    let mut edges = Vec::new();
    for i in 0..=j {
        for (t, set) in levels[i].iter().enumerate() {
            let src = offsets[i] + t;
            for tuple in set {
                let dst = if i < j {
                    offsets[i + 1] + lookup[i + 1][tuple]
                } else {
                    terminal
                };
                edges.push(TrellisEdge {
                    src,
                    dst,
                    label: tuple.clone(),
                });
            }
        }
    }
    let graph = LabeledDigraph::new(q, n, m_size as usize, terminal + 1, edges)?;
    let trellis = TrellisCode::validate(graph, 0)?;
    assert!(trellis.flags().deterministic);

    // Codeword count by path counting.
    let mut paths = vec![0u64; terminal + 1];
    paths[0] = 1;
    for e in trellis.graph().edges() {
        // edges are emitted level by level, so a single pass accumulates
        let add = paths[e.src];
        paths[e.dst] += add;
    }
    let code_size = paths[terminal];
    let expected = m_size.pow((j + 1) as u32);
    assert_eq!(code_size, expected, "path count must be M^(j+1)");

    let d = trellis.column_distance(j, u64::MAX)?;
    assert_eq!(
        d,
        ((j + 1) * n) as u64,
        "disjoint alphabets force full column distance"
    );

    Ok(DisjointAlphabetCode {
        trellis,
        q,
        m_size,
        n,
        depth: j,
        code_size,
        column_distance: d,
        levels,
    })
}
