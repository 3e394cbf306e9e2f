//! File formats: JSON specs for fields, block codes, and polynomial
//! generator matrices; whitespace text formats for bipartite graphs and
//! trellis presentations; and the construction spec that references the
//! component files by path.
//!
//! Graph files are 1-indexed and their line order is the edge total order.
//! Trellis files use 0-based states with state 0 as the initial state.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{BlockCodeError, LinearBlockCode};
use crate::conv::{ConvError, ConvolutionalCode, PolyGeneratorMatrix};
use crate::field::{Field, FieldError};
use crate::graph::BipartiteGraph;
use crate::linalg::{LinAlgError, Matrix};
use crate::trellis::{LabeledDigraph, TrellisEdge, TrellisError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Block(#[from] BlockCodeError),
    #[error(transparent)]
    Conv(#[from] ConvError),
    #[error(transparent)]
    Trellis(#[from] TrellisError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSpecJson {
    pub p: u64,
    pub e: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
}

impl FieldSpecJson {
    pub fn build(&self) -> Result<Arc<Field>, IoError> {
        Ok(Field::new(self.p, self.e, self.modulus.clone())?)
    }

    pub fn of(field: &Field) -> FieldSpecJson {
        FieldSpecJson {
            p: field.p(),
            e: field.e(),
            modulus: Some(field.modulus().to_vec()),
        }
    }
}

/// Polynomial generator matrix: `g[i][j]` is the ascending coefficient list
/// of the (i, j) entry of G(D), entries as element indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub field: FieldSpecJson,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "G")]
    pub g: Vec<Vec<Vec<u64>>>,
}

impl GeneratorJson {
    pub fn build(&self) -> Result<ConvolutionalCode, IoError> {
        let field = self.field.build()?;
        if self.g.len() != self.k || self.g.iter().any(|row| row.len() != self.n) {
            return Err(IoError::Parse(format!(
                "generator entries must form a {}x{} grid",
                self.k, self.n
            )));
        }
        let memory = self
            .g
            .iter()
            .flatten()
            .map(|coeffs| coeffs.len().saturating_sub(1))
            .max()
            .unwrap_or(0);
        let mut coeff_mats = Vec::with_capacity(memory + 1);
        for d in 0..=memory {
            let rows: Vec<Vec<u64>> = self
                .g
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|coeffs| coeffs.get(d).copied().unwrap_or(0))
                        .collect()
                })
                .collect();
            coeff_mats.push(Matrix::from_rows(Arc::clone(&field), &rows)?);
        }
        Ok(ConvolutionalCode::new(PolyGeneratorMatrix::new(
            coeff_mats,
        )?)?)
    }

    pub fn of(code: &ConvolutionalCode) -> GeneratorJson {
        let gen = code.generator();
        let m = gen.memory();
        let g = (0..gen.k())
            .map(|i| {
                (0..gen.n())
                    .map(|j| {
                        let mut coeffs: Vec<u64> =
                            (0..=m).map(|d| gen.coefficient(d).get(i, j)).collect();
                        while coeffs.len() > 1 && *coeffs.last().expect("nonempty") == 0 {
                            coeffs.pop();
                        }
                        coeffs
                    })
                    .collect()
            })
            .collect();
        GeneratorJson {
            field: FieldSpecJson::of(code.field()),
            n: gen.n(),
            k: gen.k(),
            g,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockCodeJson {
    pub field: FieldSpecJson,
    pub generator: Vec<Vec<u64>>,
}

impl BlockCodeJson {
    pub fn build(&self) -> Result<LinearBlockCode, IoError> {
        let field = self.field.build()?;
        let g = Matrix::from_rows(field, &self.generator)?;
        Ok(LinearBlockCode::from_generator(&g)?)
    }

    pub fn of(code: &LinearBlockCode) -> BlockCodeJson {
        BlockCodeJson {
            field: FieldSpecJson::of(code.field()),
            generator: (0..code.generator().rows())
                .map(|r| code.generator().row(r).to_vec())
                .collect(),
        }
    }
}

/// Construction spec referencing the component files by path (relative paths
/// resolve against the spec file's directory).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionSpecJson {
    pub conv: String,
    pub inner: String,
    pub graph: String,
}

pub fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_field(path: &Path) -> Result<Arc<Field>, IoError> {
    load_json::<FieldSpecJson>(path)?.build()
}

pub fn load_generator(path: &Path) -> Result<ConvolutionalCode, IoError> {
    load_json::<GeneratorJson>(path)?.build()
}

pub fn load_block_code(path: &Path) -> Result<LinearBlockCode, IoError> {
    load_json::<BlockCodeJson>(path)?.build()
}

pub fn load_graph(path: &Path) -> Result<BipartiteGraph, IoError> {
    parse_graph(&read_to_string(path)?)
}

pub fn load_trellis(path: &Path) -> Result<LabeledDigraph, IoError> {
    parse_trellis(&read_to_string(path)?)
}

/// Loads a construction spec, resolving component paths relative to the
/// spec file location, and returns (conv, inner, graph).
pub fn load_construction(
    path: &Path,
) -> Result<(ConvolutionalCode, LinearBlockCode, BipartiteGraph), IoError> {
    let spec: ConstructionSpecJson = load_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let pb = PathBuf::from(p);
        if pb.is_absolute() {
            pb
        } else {
            base.join(pb)
        }
    };
    let conv = load_generator(&resolve(&spec.conv))?;
    let inner = load_block_code(&resolve(&spec.inner))?;
    let graph = load_graph(&resolve(&spec.graph))?;
    Ok((conv, inner, graph))
}

/// Graph text format: header "n Δ", then nΔ lines "s t" with 1-indexed
/// endpoints; line order defines the edge total order.
pub fn parse_graph(text: &str) -> Result<BipartiteGraph, IoError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| IoError::Parse("empty graph file".into()))?;
    let mut it = header.split_whitespace();
    let n: usize = parse_token(it.next(), "side size n")?;
    let delta: usize = parse_token(it.next(), "degree")?;
    let mut edges = Vec::with_capacity(n * delta);
    for line in lines {
        let mut it = line.split_whitespace();
        let s: usize = parse_token(it.next(), "left endpoint")?;
        let t: usize = parse_token(it.next(), "right endpoint")?;
        if s == 0 || t == 0 || s > n || t > n {
            return Err(IoError::Parse(format!(
                "edge ({s}, {t}) out of range for side size {n} (1-indexed)"
            )));
        }
        edges.push((s - 1, t - 1));
    }
    if edges.len() != n * delta {
        return Err(IoError::Parse(format!(
            "expected {} edges, found {}",
            n * delta,
            edges.len()
        )));
    }
    BipartiteGraph::from_ordered_edges(n, delta, edges).map_err(|e| IoError::Parse(e.to_string()))
}

/// Trellis text format: header "q n M |V|", then one line per edge
/// "src dst s_1 .. s_n" with 0-based states and symbols below q; line order
/// is the presentation order and state 0 is the initial state.
pub fn parse_trellis(text: &str) -> Result<LabeledDigraph, IoError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| IoError::Parse("empty trellis file".into()))?;
    let mut it = header.split_whitespace();
    let q: u64 = parse_token(it.next(), "alphabet size q")?;
    let n: usize = parse_token(it.next(), "label length n")?;
    let m: usize = parse_token(it.next(), "out-degree M")?;
    let states: usize = parse_token(it.next(), "state count")?;
    let mut edges = Vec::new();
    for line in lines {
        let mut it = line.split_whitespace();
        let src: usize = parse_token(it.next(), "source state")?;
        let dst: usize = parse_token(it.next(), "destination state")?;
        let label: Vec<u64> = it
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|_| IoError::Parse(format!("bad symbol {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        edges.push(TrellisEdge { src, dst, label });
    }
    Ok(LabeledDigraph::new(q, n, m, states, edges)?)
}

pub fn trellis_to_text(graph: &LabeledDigraph) -> String {
    let mut out = format!(
        "{} {} {} {}\n",
        graph.q(),
        graph.n(),
        graph.declared_m(),
        graph.num_states()
    );
    for e in graph.edges() {
        out.push_str(&format!("{} {}", e.src, e.dst));
        for s in &e.label {
            out.push_str(&format!(" {s}"));
        }
        out.push('\n');
    }
    out
}

fn parse_token<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T, IoError> {
    tok.ok_or_else(|| IoError::Parse(format!("missing {what}")))?
        .parse::<T>()
        .map_err(|_| IoError::Parse(format!("bad {what}")))
}
