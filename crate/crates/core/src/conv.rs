//! Convolutional codes presented by polynomial generator matrices:
//! structural statistics (row degrees, memory, overall constraint length),
//! exact column and free distances, the generalized Singleton bound on the
//! free distance, the per-index column distance bound, and classification as
//! MDS / MDP / strongly-MDS. A seeded search for codes with the best column
//! distance profile is included.
//!
//! Distances are computed exactly: column distances by depth-first search
//! over message blocks with weight pruning, the free distance by a shortest
//! path on the encoder state graph (nonnegative edge weights, so Dijkstra
//! applies). Enumeration guards keep runtimes at desk scale; exceeding a
//! guard is an error, never an approximation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::block::{checked_pow, digits, weight};
use crate::field::Field;
use crate::linalg::{LinAlgError, Matrix};

#[derive(Debug, Error)]
pub enum ConvError {
    #[error("generator has no coefficient matrices")]
    EmptyGenerator,
    #[error("generator coefficient matrices are all zero")]
    ZeroGenerator,
    #[error("G_0 must have full row rank {expected}, found {got}")]
    G0RankDeficient { expected: usize, got: usize },
    #[error("coefficient matrix {index} has shape {got_rows}x{got_cols}, expected {rows}x{cols}")]
    ShapeMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("search space or budget empty: no candidate with full-rank G_0 found")]
    NoneFound,
    #[error("{what} of size {size} exceeds the guard {guard}")]
    BudgetExceeded {
        what: &'static str,
        size: u64,
        guard: u64,
    },
    #[error("degree is only upper-bounded because the generator is not reduced")]
    DegreeUnknown,
    #[error("distance bounds require k < n")]
    FullRate,
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// A polynomial generator matrix G(D) = G_0 + G_1 D + ... + G_m D^m held as
/// its coefficient matrices. Trailing zero coefficients are trimmed so that
/// G_m is nonzero and `memory` is tight.
pub struct PolyGeneratorMatrix {
    field: Arc<Field>,
    k: usize,
    n: usize,
    coeffs: Vec<Matrix>,
}

impl PolyGeneratorMatrix {
    pub fn new(mut coeffs: Vec<Matrix>) -> Result<Self, ConvError> {
        if coeffs.is_empty() {
            return Err(ConvError::EmptyGenerator);
        }
        let k = coeffs[0].rows();
        let n = coeffs[0].cols();
        let field = Arc::clone(coeffs[0].field());
        for (i, m) in coeffs.iter().enumerate() {
            if m.rows() != k || m.cols() != n {
                return Err(ConvError::ShapeMismatch {
                    index: i,
                    rows: k,
                    cols: n,
                    got_rows: m.rows(),
                    got_cols: m.cols(),
                });
            }
        }
        while coeffs.len() > 1 && coeffs.last().expect("nonempty").is_zero() {
            coeffs.pop();
        }
        if coeffs.len() == 1 && coeffs[0].is_zero() {
            return Err(ConvError::ZeroGenerator);
        }
        Ok(PolyGeneratorMatrix {
            field,
            k,
            n,
            coeffs,
        })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Memory m: the largest power of D with a nonzero coefficient.
    pub fn memory(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, i: usize) -> &Matrix {
        &self.coeffs[i]
    }

    /// Row degree of row i: the largest d with a nonzero entry of G_d in row i.
    pub fn row_degrees(&self) -> Vec<usize> {
        (0..self.k)
            .map(|i| {
                (0..self.coeffs.len())
                    .rev()
                    .find(|&d| self.coeffs[d].row(i).iter().any(|&v| v != 0))
                    .unwrap_or(0)
            })
            .collect()
    }

    /// Overall constraint length: the sum of the row degrees.
    pub fn constraint_length(&self) -> usize {
        self.row_degrees().iter().sum()
    }

    /// Entry (i, j) is the coefficient of D^{nu_i} in g_{ij}.
    pub fn leading_row_matrix(&self) -> Matrix {
        let degs = self.row_degrees();
        let mut m = Matrix::zero(Arc::clone(&self.field), self.k, self.n);
        for (i, &d) in degs.iter().enumerate() {
            for j in 0..self.n {
                m.set(i, j, self.coeffs[d].get(i, j));
            }
        }
        m
    }

    /// Full rank of the leading-row-coefficient matrix certifies that the
    /// constraint length is minimal over all generator matrices of the code.
    pub fn is_reduced(&self) -> bool {
        self.leading_row_matrix().rank() == self.k
    }

    /// All entries in serialization order: G_0 row-major, then G_1, ...
    pub fn serialized(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.coeffs.len() * self.k * self.n);
        for m in &self.coeffs {
            for r in 0..self.k {
                out.extend_from_slice(m.row(r));
            }
        }
        out
    }
}

/// A convolutional code with its structural statistics. `degree()` is known
/// exactly only when the presentation is reduced; otherwise the constraint
/// length is exposed as an upper bound.
pub struct ConvolutionalCode {
    gen: PolyGeneratorMatrix,
    reduced: bool,
    equal_row_degrees: bool,
}

impl ConvolutionalCode {
    pub fn new(gen: PolyGeneratorMatrix) -> Result<Self, ConvError> {
        let g0_rank = gen.coefficient(0).rank();
        if g0_rank != gen.k() {
            return Err(ConvError::G0RankDeficient {
                expected: gen.k(),
                got: g0_rank,
            });
        }
        let reduced = gen.is_reduced();
        let degs = gen.row_degrees();
        let equal_row_degrees = degs.iter().all(|&d| d == degs[0]);
        Ok(ConvolutionalCode {
            gen,
            reduced,
            equal_row_degrees,
        })
    }

    pub fn generator(&self) -> &PolyGeneratorMatrix {
        &self.gen
    }

    pub fn field(&self) -> &Arc<Field> {
        self.gen.field()
    }

    pub fn n(&self) -> usize {
        self.gen.n()
    }

    pub fn k(&self) -> usize {
        self.gen.k()
    }

    pub fn memory(&self) -> usize {
        self.gen.memory()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn has_equal_row_degrees(&self) -> bool {
        self.equal_row_degrees
    }

    /// Upper bound on the code degree: the constraint length of this
    /// presentation. Equals the degree exactly when the presentation is
    /// reduced.
    pub fn degree_upper(&self) -> usize {
        self.gen.constraint_length()
    }

    /// The code degree, known exactly only for reduced presentations.
    pub fn degree(&self) -> Option<usize> {
        self.reduced.then(|| self.gen.constraint_length())
    }

    /// The (j+1)k x (j+1)n block-Toeplitz truncation of the semi-infinite
    /// generator: block row i carries (0, .., 0, G_0, .., G_{j-i}).
    pub fn truncated_generator(&self, j: usize) -> Matrix {
        let (k, n, m) = (self.k(), self.n(), self.memory());
        let mut out = Matrix::zero(Arc::clone(self.field()), (j + 1) * k, (j + 1) * n);
        for bi in 0..=j {
            for bj in bi..=j.min(bi + m) {
                let g = self.gen.coefficient(bj - bi);
                for r in 0..k {
                    for c in 0..n {
                        out.set(bi * k + r, bj * n + c, g.get(r, c));
                    }
                }
            }
        }
        out
    }

    /// Exact j-th column distance: the minimum weight of the first j+1 code
    /// blocks over messages with x_0 != 0 (equivalently c_0 != 0, since G_0
    /// has full rank). Depth-first search with weight pruning; when the
    /// message space q^{k(j+1)} exceeds `guard`, the pruned search runs under
    /// a node budget of `guard` and errors if it cannot finish.
    pub fn column_distance(&self, j: usize, guard: u64) -> Result<u64, ConvError> {
        let coeffs: Vec<&Matrix> = (0..=self.memory())
            .map(|i| self.gen.coefficient(i))
            .collect();
        let q = self.field().q();
        column_distance_of_blocks(self.field(), self.k(), q, &coeffs, j, guard, &mut |block| {
            weight(block)
        })
    }

    /// Column distances d_0 .. d_j.
    pub fn column_profile(&self, j: usize, guard: u64) -> Result<Vec<u64>, ConvError> {
        let mut out = Vec::with_capacity(j + 1);
        for t in 0..=j {
            out.push(self.column_distance(t, guard)?);
        }
        for w in out.windows(2) {
            assert!(w[0] <= w[1], "column distances must be non-decreasing");
            assert!(
                w[1] - w[0] <= self.n() as u64,
                "column distances can grow by at most n per time instant"
            );
        }
        Ok(out)
    }

    /// Exact free distance via shortest nonzero excursion on the encoder
    /// state graph, together with a flag for zero-weight cycles away from the
    /// zero state (a catastrophic presentation). The guard bounds the state
    /// count q^{nu(G)}.
    pub fn free_distance(&self, guard: u64) -> Result<FreeDistanceOutcome, ConvError> {
        let space = StateSpace::new(&self.gen);
        if space.num_states > guard {
            return Err(ConvError::BudgetExceeded {
                what: "state space",
                size: space.num_states,
                guard,
            });
        }
        let msgs = checked_pow(space.q, space.k as u32).ok_or(ConvError::BudgetExceeded {
            what: "input block space",
            size: u64::MAX,
            guard,
        })?;

        let num_states = space.num_states as usize;
        let mut dist = vec![u64::MAX; num_states];
        let mut heap: BinaryHeap<Reverse<(u64, u64)>> = BinaryHeap::new();
        let mut best = u64::MAX;
        let mut block = vec![0u64; space.n];

        for u in 1..msgs {
            let next = space.transition(0, u, &mut block);
            let w = weight(&block);
            if next == 0 {
                best = best.min(w);
            } else if w < dist[next as usize] {
                dist[next as usize] = w;
                heap.push(Reverse((w, next)));
            }
        }
        while let Some(Reverse((d, s))) = heap.pop() {
            if d > dist[s as usize] || d >= best {
                continue;
            }
            for u in 0..msgs {
                let next = space.transition(s, u, &mut block);
                let w = d + weight(&block);
                if next == 0 {
                    best = best.min(w);
                } else if w < dist[next as usize] {
                    dist[next as usize] = w;
                    heap.push(Reverse((w, next)));
                }
            }
        }
        assert!(best < u64::MAX, "the zero state is always reachable");

        let catastrophic = space.has_zero_weight_cycle(&dist, msgs);
        Ok(FreeDistanceOutcome {
            distance: best,
            catastrophic,
        })
    }

    /// Column profile, free distance, the Singleton-type bound values, and
    /// the MDS / MDP / strongly-MDS flags. Requires a reduced presentation
    /// (otherwise the degree, and with it L and J, is not known exactly).
    pub fn distance_profile(&self, guard: u64) -> Result<DistanceProfile, ConvError> {
        if !self.reduced {
            return Err(ConvError::DegreeUnknown);
        }
        if self.k() >= self.n() {
            return Err(ConvError::FullRate);
        }
        let delta = self.degree_upper();
        let (n, k) = (self.n(), self.k());
        let l = delta / k + delta / (n - k);
        let j_index = delta / k + delta.div_ceil(n - k);
        let horizon = l.max(j_index);
        let column = self.column_profile(horizon, guard)?;
        let free = self.free_distance(guard)?;
        let eq_free = singleton_free_bound(n, k, delta);
        for (t, &d) in column.iter().enumerate() {
            assert!(
                d <= free.distance,
                "column distances never exceed the free distance"
            );
            if d == column_singleton_bound(n, k, t) {
                for (i, &di) in column.iter().enumerate().take(t) {
                    assert!(
                        di == column_singleton_bound(n, k, i),
                        "a column distance meeting its bound forces all earlier ones to meet theirs"
                    );
                }
            }
        }
        let profile = DistanceProfile {
            column: column.clone(),
            free: free.distance,
            catastrophic: free.catastrophic,
            max_profile_len: l,
            smds_index: j_index,
            free_bound: eq_free,
            is_mds: free.distance == eq_free,
            is_mdp: column[l] == column_singleton_bound(n, k, l),
            is_smds: column[j_index] == eq_free,
        };
        Ok(profile)
    }
}

/// Exact free distance plus the catastrophic-presentation flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeDistanceOutcome {
    pub distance: u64,
    /// A zero-weight cycle exists away from the zero state: infinite-weight
    /// inputs can produce finite-weight outputs. The returned distance is
    /// still the exact minimum over finite-support messages.
    pub catastrophic: bool,
}

/// Column profile with the bound values and classification flags.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct DistanceProfile {
    pub column: Vec<u64>,
    pub free: u64,
    pub catastrophic: bool,
    /// L: the last index at which the column distance bound can be met.
    pub max_profile_len: usize,
    /// J: the first index at which the column bound reaches the free bound.
    pub smds_index: usize,
    /// Right-hand side of the generalized Singleton bound on the free distance.
    pub free_bound: u64,
    pub is_mds: bool,
    pub is_mdp: bool,
    pub is_smds: bool,
}

/// (n-k)(floor(delta/k)+1) + delta + 1.
pub fn singleton_free_bound(n: usize, k: usize, delta: usize) -> u64 {
    ((n - k) * (delta / k + 1) + delta + 1) as u64
}

/// (n-k)(j+1) + 1.
pub fn column_singleton_bound(n: usize, k: usize, j: usize) -> u64 {
    ((n - k) * (j + 1) + 1) as u64
}

/// Shared depth-first column distance search. `coeffs` holds the generator
/// coefficients G_0..G_m, and `block_weight` scores each finalized code
/// block, so the same search serves plain Hamming weight and packed-symbol
/// weight. `msg_alphabet` restricts message symbols to indices below it:
/// the full field order gives the exact distance, while the prime subfield
/// gives an upper bound at a fraction of the cost (valid for one-sided
/// lower-bound checks).
pub(crate) fn column_distance_of_blocks(
    field: &Arc<Field>,
    k: usize,
    msg_alphabet: u64,
    coeffs: &[&Matrix],
    j: usize,
    guard: u64,
    block_weight: &mut dyn FnMut(&[u64]) -> u64,
) -> Result<u64, ConvError> {
    let q = msg_alphabet;
    debug_assert!(q >= 2 && q <= field.q());
    let n = coeffs[0].cols();
    let memory = coeffs.len() - 1;
    let msgs = checked_pow(q, k as u32).ok_or(ConvError::BudgetExceeded {
        what: "input block space",
        size: u64::MAX,
        guard,
    })?;
    let leaves = checked_pow(msgs, (j + 1) as u32);
    let budget = match leaves {
        Some(t) if t <= guard => None,
        _ => Some(guard),
    };

    // Per-coefficient products x_t * G_i for every input block, when the
    // input space is small enough to cache.
    const CACHE_LIMIT: u64 = 1 << 12;
    let cache: Option<Vec<Vec<Vec<u64>>>> = if msgs <= CACHE_LIMIT {
        Some(
            coeffs
                .iter()
                .take(memory.min(j) + 1)
                .map(|g| (0..msgs).map(|x| g.left_mul(&digits(x, q, k))).collect())
                .collect(),
        )
    } else {
        None
    };

    struct Ctx<'a> {
        field: &'a Arc<Field>,
        k: usize,
        n: usize,
        q: u64,
        msgs: u64,
        memory: usize,
        j: usize,
        coeffs: &'a [&'a Matrix],
        cache: Option<Vec<Vec<Vec<u64>>>>,
        chosen: Vec<u64>,
        best: u64,
        nodes: u64,
        budget: Option<u64>,
    }

    impl Ctx<'_> {
        fn block(&self, t: usize, out: &mut [u64]) {
            out.fill(0);
            for i in 0..=t.min(self.memory) {
                let x = self.chosen[t - i];
                if let Some(cache) = &self.cache {
                    let prod = &cache[i][x as usize];
                    for (o, &p) in out.iter_mut().zip(prod) {
                        *o = self.field.add(*o, p);
                    }
                } else {
                    self.coeffs[i].left_mul_acc(&digits(x, self.q, self.k), out);
                }
            }
        }

        fn dfs(
            &mut self,
            t: usize,
            acc: u64,
            block_weight: &mut dyn FnMut(&[u64]) -> u64,
        ) -> Result<(), ConvError> {
            let lo = if t == 0 { 1 } else { 0 };
            let mut block = vec![0u64; self.n];
            for x in lo..self.msgs {
                self.nodes += 1;
                if let Some(b) = self.budget {
                    if self.nodes > b {
                        return Err(ConvError::BudgetExceeded {
                            what: "column distance search",
                            size: self.nodes,
                            guard: b,
                        });
                    }
                }
                self.chosen[t] = x;
                self.block(t, &mut block);
                let w = acc + block_weight(&block);
                if w >= self.best {
                    continue;
                }
                if t == self.j {
                    self.best = w;
                } else {
                    self.dfs(t + 1, w, block_weight)?;
                }
            }
            Ok(())
        }
    }

    let mut ctx = Ctx {
        field,
        k,
        n,
        q,
        msgs,
        memory,
        j,
        coeffs,
        cache,
        chosen: vec![0; j + 1],
        best: u64::MAX,
        nodes: 0,
        budget,
    };
    ctx.dfs(0, 0, block_weight)?;
    assert!(
        ctx.best < u64::MAX,
        "G_0 full rank guarantees a nonzero block"
    );
    Ok(ctx.best)
}

/// Physical encoder state space: one delay line per generator row, q^{nu(G)}
/// states in total.
pub(crate) struct StateSpace {
    pub q: u64,
    pub k: usize,
    pub n: usize,
    pub num_states: u64,
    nu: Vec<usize>,
    /// Start digit position of each row's delay line.
    offsets: Vec<usize>,
    /// q^0, q^1, .. up to the total delay count.
    pows: Vec<u64>,
    /// scaled[i][d][v] = v * (row i of G_d), for d = 0..=nu_i.
    scaled: Vec<Vec<Vec<Vec<u64>>>>,
    field: Arc<Field>,
}

impl StateSpace {
    pub fn new(gen: &PolyGeneratorMatrix) -> StateSpace {
        let field = Arc::clone(gen.field());
        let q = field.q();
        let nu = gen.row_degrees();
        let mut offsets = Vec::with_capacity(nu.len());
        let mut total = 0usize;
        for &d in &nu {
            offsets.push(total);
            total += d;
        }
        let num_states = checked_pow(q, total as u32).expect("guarded by the caller");
        let mut pows = Vec::with_capacity(total + 1);
        let mut acc = 1u64;
        for _ in 0..=total {
            pows.push(acc);
            acc = acc.saturating_mul(q);
        }
        let scaled = (0..gen.k())
            .map(|i| {
                (0..=nu[i])
                    .map(|d| {
                        (0..q)
                            .map(|v| {
                                gen.coefficient(d)
                                    .row(i)
                                    .iter()
                                    .map(|&g| field.mul(v, g))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        StateSpace {
            q,
            k: gen.k(),
            n: gen.n(),
            num_states,
            nu,
            offsets,
            pows,
            scaled,
            field,
        }
    }

    #[inline]
    fn digit(&self, state: u64, pos: usize) -> u64 {
        (state / self.pows[pos]) % self.q
    }

    /// Emits the output block for (state, input) into `out` and returns the
    /// successor state.
    pub fn transition(&self, state: u64, input: u64, out: &mut [u64]) -> u64 {
        out.fill(0);
        let mut next = 0u64;
        let mut inp = input;
        for i in 0..self.k {
            let u = inp % self.q;
            inp /= self.q;
            self.add_scaled(out, &self.scaled[i][0][u as usize]);
            if self.nu[i] == 0 {
                continue;
            }
            let off = self.offsets[i];
            let mut shifted = u;
            for d in 1..=self.nu[i] {
                let v = self.digit(state, off + d - 1);
                self.add_scaled(out, &self.scaled[i][d][v as usize]);
                if d < self.nu[i] {
                    shifted += v * self.pows[d];
                }
            }
            next += shifted * self.pows[off];
        }
        next
    }

    #[inline]
    fn add_scaled(&self, out: &mut [u64], row: &[u64]) {
        for (o, &r) in out.iter_mut().zip(row) {
            *o = self.field.add(*o, r);
        }
    }

    /// Detects a zero-weight cycle among reachable nonzero states.
    fn has_zero_weight_cycle(&self, dist: &[u64], msgs: u64) -> bool {
        let reachable: Vec<u64> = (1..self.num_states)
            .filter(|&s| dist[s as usize] != u64::MAX)
            .collect();
        let index: std::collections::HashMap<u64, usize> =
            reachable.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); reachable.len()];
        let mut block = vec![0u64; self.n];
        for (i, &s) in reachable.iter().enumerate() {
            for u in 0..msgs {
                let next = self.transition(s, u, &mut block);
                if next != 0 && weight(&block) == 0 {
                    if let Some(&t) = index.get(&next) {
                        adj[i].push(t);
                    }
                }
            }
        }
        // three-color DFS for a directed cycle
        let mut color = vec![0u8; reachable.len()];
        for start in 0..reachable.len() {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = 1;
            while let Some(&mut (node, ref mut edge)) = stack.last_mut() {
                if *edge < adj[node].len() {
                    let next = adj[node][*edge];
                    *edge += 1;
                    match color[next] {
                        0 => {
                            color[next] = 1;
                            stack.push((next, 0));
                        }
                        1 => return true,
                        _ => {}
                    }
                } else {
                    color[node] = 2;
                    stack.pop();
                }
            }
        }
        false
    }
}

/// Configuration for the profile search.
pub struct ProfileSearch {
    pub n: usize,
    pub k: usize,
    pub memory: usize,
    pub field: Arc<Field>,
    /// Candidate cap. Spaces no larger than the budget are searched
    /// exhaustively in serialization order; larger spaces are sampled.
    pub budget: u64,
    pub seed: u64,
    /// Restrict to candidates whose rows all reach degree `memory` and whose
    /// presentation is reduced (so the degree is k * memory exactly).
    pub require_equal_row_degrees: bool,
    pub guard: u64,
}

pub struct SearchResult {
    pub code: ConvolutionalCode,
    /// Column distances d_0 .. d_H for the comparison horizon H.
    pub profile: Vec<u64>,
    pub horizon: usize,
    pub exhaustive: bool,
    pub candidates_tried: u64,
}

/// Maximizes the column distance profile (d_0, .., d_H) lexicographically
/// over generator tuples (G_0, .., G_m) with full-rank G_0 and nonzero G_m,
/// where H = m + floor(k m / (n - k)) is the maximum profile length of a
/// degree-km candidate. Ties break toward the lexicographically smallest
/// serialized generator. Deterministic for a fixed seed.
pub fn search_best_profile(cfg: &ProfileSearch) -> Result<SearchResult, ConvError> {
    if cfg.k >= cfg.n {
        return Err(ConvError::FullRate);
    }
    let q = cfg.field.q();
    let entries = cfg.k * cfg.n * (cfg.memory + 1);
    let space = checked_pow(q, entries as u32);
    let exhaustive = matches!(space, Some(s) if s <= cfg.budget);
    let horizon = cfg.memory + (cfg.k * cfg.memory) / (cfg.n - cfg.k);

    let mut best: Option<(Vec<u64>, Vec<u64>, ConvolutionalCode)> = None;
    let mut tried = 0u64;

    let consider = |serialized: Vec<u64>,
                    best: &mut Option<(Vec<u64>, Vec<u64>, ConvolutionalCode)>|
     -> Result<(), ConvError> {
        let code = match candidate_code(cfg, &serialized) {
            Some(c) => c,
            None => return Ok(()),
        };
        // Lexicographic profile comparison with lazy column evaluation.
        let mut profile = Vec::with_capacity(horizon + 1);
        let mut ordering = std::cmp::Ordering::Greater;
        for t in 0..=horizon {
            let d = code.column_distance(t, cfg.guard)?;
            profile.push(d);
            if let Some((bp, _, _)) = best {
                match d.cmp(&bp[t]) {
                    std::cmp::Ordering::Less => return Ok(()),
                    std::cmp::Ordering::Greater => {
                        ordering = std::cmp::Ordering::Greater;
                        break;
                    }
                    std::cmp::Ordering::Equal => ordering = std::cmp::Ordering::Equal,
                }
            }
        }
        while profile.len() <= horizon {
            profile.push(code.column_distance(profile.len(), cfg.guard)?);
        }
        let replace = match (&best, ordering) {
            (None, _) => true,
            (Some(_), std::cmp::Ordering::Greater) => true,
            (Some((_, bs, _)), std::cmp::Ordering::Equal) => serialized < *bs,
            _ => false,
        };
        if replace {
            *best = Some((profile, serialized, code));
        }
        Ok(())
    };

    if exhaustive {
        let total = space.expect("exhaustive implies the space size fits");
        for v in 0..total {
            tried += 1;
            consider(serialization_from_index(v, q, entries), &mut best)?;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.budget {
            tried += 1;
            let ser: Vec<u64> = (0..entries).map(|_| rng.gen_range(0..q)).collect();
            consider(ser, &mut best)?;
        }
    }

    match best {
        Some((profile, _, code)) => Ok(SearchResult {
            code,
            profile,
            horizon,
            exhaustive,
            candidates_tried: tried,
        }),
        None => Err(ConvError::NoneFound),
    }
}

/// Big-endian digits of `v`, so ascending `v` walks serializations in
/// lexicographic order.
fn serialization_from_index(v: u64, q: u64, entries: usize) -> Vec<u64> {
    let mut out = vec![0u64; entries];
    let mut t = v;
    for slot in out.iter_mut().rev() {
        *slot = t % q;
        t /= q;
    }
    out
}

fn candidate_code(cfg: &ProfileSearch, serialized: &[u64]) -> Option<ConvolutionalCode> {
    let per = cfg.k * cfg.n;
    let coeffs: Vec<Matrix> = (0..=cfg.memory)
        .map(|i| {
            let rows: Vec<Vec<u64>> = serialized[i * per..(i + 1) * per]
                .chunks(cfg.n)
                .map(|c| c.to_vec())
                .collect();
            Matrix::from_rows(Arc::clone(&cfg.field), &rows).expect("well-formed candidate")
        })
        .collect();
    if cfg.memory > 0 && coeffs[cfg.memory].is_zero() {
        return None;
    }
    let gen = PolyGeneratorMatrix::new(coeffs).ok()?;
    if gen.memory() != cfg.memory {
        return None;
    }
    if cfg.require_equal_row_degrees {
        let degs = gen.row_degrees();
        if degs.iter().any(|&d| d != cfg.memory) || !gen.is_reduced() {
            return None;
        }
    }
    ConvolutionalCode::new(gen).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf2() -> Arc<Field> {
        Field::new(2, 1, None).unwrap()
    }

    /// G(D) = (1 + D^2, 1 + D + D^2) over GF(2).
    fn baseline() -> ConvolutionalCode {
        let g0 = Matrix::from_rows(gf2(), &[vec![1, 1]]).unwrap();
        let g1 = Matrix::from_rows(gf2(), &[vec![0, 1]]).unwrap();
        let g2 = Matrix::from_rows(gf2(), &[vec![1, 1]]).unwrap();
        ConvolutionalCode::new(PolyGeneratorMatrix::new(vec![g0, g1, g2]).unwrap()).unwrap()
    }

    #[test]
    fn baseline_structure() {
        let c = baseline();
        assert_eq!((c.n(), c.k(), c.memory()), (2, 1, 2));
        assert_eq!(c.degree_upper(), 2);
        assert!(c.is_reduced());
        assert_eq!(c.degree(), Some(2));
    }

    #[test]
    fn memory_zero_code() {
        let g0 = Matrix::from_rows(gf2(), &[vec![1, 1]]).unwrap();
        let c = ConvolutionalCode::new(PolyGeneratorMatrix::new(vec![g0]).unwrap()).unwrap();
        assert_eq!(c.memory(), 0);
        assert_eq!(c.degree_upper(), 0);
        assert_eq!(c.free_distance(1 << 20).unwrap().distance, 2);
    }

    #[test]
    fn g0_rank_deficient_rejected() {
        let g0 = Matrix::zero(gf2(), 1, 2);
        let g1 = Matrix::from_rows(gf2(), &[vec![1, 1]]).unwrap();
        let gen = PolyGeneratorMatrix::new(vec![g0, g1]).unwrap();
        assert!(matches!(
            ConvolutionalCode::new(gen),
            Err(ConvError::G0RankDeficient { .. })
        ));
    }

    #[test]
    fn truncated_generator_blocks() {
        let c = baseline();
        let t0 = c.truncated_generator(0);
        assert_eq!((t0.rows(), t0.cols()), (1, 2));
        assert_eq!(t0.row(0), &[1, 1]);
        let t1 = c.truncated_generator(1);
        assert_eq!((t1.rows(), t1.cols()), (2, 4));
        assert_eq!(t1.row(0), &[1, 1, 0, 1]);
        assert_eq!(t1.row(1), &[0, 0, 1, 1]);
    }

    #[test]
    fn truncated_generator_memory_zero_is_block_diagonal() {
        let g0 = Matrix::from_rows(gf2(), &[vec![1, 1]]).unwrap();
        let c = ConvolutionalCode::new(PolyGeneratorMatrix::new(vec![g0]).unwrap()).unwrap();
        let t2 = c.truncated_generator(2);
        assert_eq!(t2.row(0), &[1, 1, 0, 0, 0, 0]);
        assert_eq!(t2.row(1), &[0, 0, 1, 1, 0, 0]);
        assert_eq!(t2.row(2), &[0, 0, 0, 0, 1, 1]);
    }

    #[test]
    fn baseline_column_distances() {
        let c = baseline();
        assert_eq!(c.column_distance(0, 1 << 20).unwrap(), 2);
        assert_eq!(c.column_distance(1, 1 << 20).unwrap(), 3);
        assert_eq!(
            c.column_profile(5, 1 << 20).unwrap(),
            vec![2, 3, 3, 4, 4, 5]
        );
    }

    #[test]
    fn identity_code_distances() {
        let f = gf2();
        let c =
            ConvolutionalCode::new(PolyGeneratorMatrix::new(vec![Matrix::identity(f, 2)]).unwrap())
                .unwrap();
        for j in 0..4 {
            assert_eq!(c.column_distance(j, 1 << 20).unwrap(), 1);
        }
        assert_eq!(c.free_distance(1 << 20).unwrap().distance, 1);
    }

    #[test]
    fn baseline_free_distance() {
        let out = baseline().free_distance(1 << 20).unwrap();
        assert_eq!(out.distance, 5);
        assert!(!out.catastrophic);
    }

    #[test]
    fn catastrophic_presentation_detected() {
        // G(D) = (1 + D, 1 + D): common factor 1 + D.
        let g0 = Matrix::from_rows(gf2(), &[vec![1, 1]]).unwrap();
        let g1 = Matrix::from_rows(gf2(), &[vec![1, 1]]).unwrap();
        let c = ConvolutionalCode::new(PolyGeneratorMatrix::new(vec![g0, g1]).unwrap()).unwrap();
        let out = c.free_distance(1 << 20).unwrap();
        assert!(out.catastrophic);
        assert_eq!(out.distance, 4);
    }

    #[test]
    fn baseline_profile_flags() {
        let p = baseline().distance_profile(1 << 20).unwrap();
        assert_eq!(p.max_profile_len, 4);
        assert_eq!(p.smds_index, 4);
        assert_eq!(p.free_bound, 6);
        assert_eq!(p.free, 5);
        assert!(!p.is_mds && !p.is_mdp && !p.is_smds);
        // d_2 = 3 < 4 = column bound at j = 2
        assert_eq!(p.column[2], 3);
        assert_eq!(column_singleton_bound(2, 1, 2), 4);
    }

    #[test]
    fn bound_values() {
        assert_eq!(singleton_free_bound(2, 1, 1), 4);
        assert_eq!(singleton_free_bound(2, 1, 0), 2); // block Singleton n - k + 1
        assert_eq!(column_singleton_bound(2, 1, 0), 2);
    }

    #[test]
    fn non_reduced_generator_has_unknown_degree() {
        // leading row coefficients [[1,0],[1,0]] are rank deficient
        let f = gf2();
        let g0 = Matrix::identity(Arc::clone(&f), 2);
        let g1 = Matrix::from_rows(f, &[vec![1, 0], vec![1, 0]]).unwrap();
        let code = ConvolutionalCode::new(PolyGeneratorMatrix::new(vec![g0, g1]).unwrap()).unwrap();
        assert!(!code.is_reduced());
        assert_eq!(code.degree(), None);
        assert_eq!(code.degree_upper(), 2);
        assert!(matches!(
            code.distance_profile(1 << 20),
            Err(ConvError::DegreeUnknown)
        ));
    }

    #[test]
    fn full_rate_code_has_no_bounds() {
        let f = gf2();
        let code =
            ConvolutionalCode::new(PolyGeneratorMatrix::new(vec![Matrix::identity(f, 2)]).unwrap())
                .unwrap();
        assert!(matches!(
            code.distance_profile(1 << 20),
            Err(ConvError::FullRate)
        ));
    }

    #[test]
    fn free_distance_matches_message_enumeration() {
        // independent oracle: enumerate all polynomial messages of degree < 12
        let c = baseline();
        let f = c.field();
        let mut best = u64::MAX;
        for msg in 1u64..(1 << 12) {
            let bits: Vec<u64> = (0..12).map(|i| (msg >> i) & 1).collect();
            let mut total = 0u64;
            for t in 0..14 {
                let mut block = vec![0u64; 2];
                for i in 0..=2usize {
                    if t >= i && t - i < 12 && bits[t - i] == 1 {
                        for (b, &g) in block.iter_mut().zip(c.generator().coefficient(i).row(0)) {
                            *b = f.add(*b, g);
                        }
                    }
                }
                total += weight(&block);
            }
            best = best.min(total);
        }
        assert_eq!(best, 5);
        assert_eq!(c.free_distance(1 << 20).unwrap().distance, best);
    }

    #[test]
    fn column_distance_pruned_matches_flat_enumeration() {
        // q^{k(j+1)} <= 2^14 oracle equivalence on a couple of small codes
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = Field::new(2, 2, None).unwrap();
        for _ in 0..12 {
            let mut rows = || -> Vec<u64> { (0..2).map(|_| rng.gen_range(0..4)).collect() };
            let r0 = rows();
            let r1 = rows();
            let g0 = Matrix::from_rows(Arc::clone(&f), &[r0]).unwrap();
            let g1 = Matrix::from_rows(Arc::clone(&f), &[r1]).unwrap();
            if g0.is_zero() || g1.is_zero() {
                continue;
            }
            let Ok(code) = ConvolutionalCode::new(PolyGeneratorMatrix::new(vec![g0, g1]).unwrap())
            else {
                continue;
            };
            for j in 0..3usize {
                let fast = code.column_distance(j, 1 << 22).unwrap();
                // flat oracle
                let q = 4u64;
                let mut best = u64::MAX;
                for v in 0..q.pow((j + 1) as u32) {
                    let xs = digits(v, q, j + 1);
                    if xs[0] == 0 {
                        continue;
                    }
                    let mut total = 0;
                    for t in 0..=j {
                        let mut block = vec![0u64; 2];
                        for i in 0..=t.min(1) {
                            let row = code.generator().coefficient(i).row(0);
                            for (b, &g) in block.iter_mut().zip(row) {
                                *b = f.add(*b, f.mul(xs[t - i], g));
                            }
                        }
                        total += weight(&block);
                    }
                    best = best.min(total);
                }
                assert_eq!(fast, best);
            }
        }
    }

    #[test]
    fn column_distance_converges_to_free_distance() {
        let c = baseline();
        let free = c.free_distance(1 << 20).unwrap().distance;
        let profile = c.column_profile(10, 1 << 22).unwrap();
        assert_eq!(*profile.last().unwrap(), free);
        assert!(profile.iter().all(|&d| d <= free));
    }

    #[test]
    fn exhaustive_search_finds_gf4_mdp() {
        let f = Field::new(2, 2, None).unwrap();
        let cfg = ProfileSearch {
            n: 2,
            k: 1,
            memory: 1,
            field: f,
            budget: 1 << 16,
            seed: 0,
            require_equal_row_degrees: true,
            guard: 1 << 22,
        };
        let res = search_best_profile(&cfg).unwrap();
        assert!(res.exhaustive);
        assert_eq!(res.profile, vec![2, 3, 4]);
        let p = res.code.distance_profile(1 << 22).unwrap();
        assert!(p.is_mdp);
        assert!(p.is_mds);
        assert_eq!(p.free, 4);
    }

    #[test]
    fn memoryless_search_hits_block_singleton() {
        let f = Field::new(2, 2, None).unwrap();
        let cfg = ProfileSearch {
            n: 2,
            k: 1,
            memory: 0,
            field: f,
            budget: 1 << 8,
            seed: 0,
            require_equal_row_degrees: false,
            guard: 1 << 22,
        };
        let res = search_best_profile(&cfg).unwrap();
        assert_eq!(res.profile[0], 2);
    }

    #[test]
    fn zero_budget_search_fails() {
        let f = Field::new(2, 2, None).unwrap();
        let cfg = ProfileSearch {
            n: 3,
            k: 1,
            memory: 1,
            field: f,
            budget: 0,
            seed: 0,
            require_equal_row_degrees: false,
            guard: 1 << 22,
        };
        assert!(matches!(
            search_best_profile(&cfg),
            Err(ConvError::NoneFound)
        ));
    }

    #[test]
    fn search_is_seed_deterministic() {
        let f = Field::new(2, 2, None).unwrap();
        let cfg = ProfileSearch {
            n: 3,
            k: 1,
            memory: 1,
            field: Arc::clone(&f),
            budget: 50,
            seed: 9,
            require_equal_row_degrees: false,
            guard: 1 << 22,
        };
        let a = search_best_profile(&cfg).unwrap();
        let b = search_best_profile(&cfg).unwrap();
        assert_eq!(a.profile, b.profile);
        assert_eq!(
            a.code.generator().serialized(),
            b.code.generator().serialized()
        );
    }
}
