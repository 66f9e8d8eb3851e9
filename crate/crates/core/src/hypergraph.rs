//! Hypergraph representation, edge-list ingestion, validation, filtering,
//! connectivity, degrees, and seeded synthetic generation.
//!
//! Vertex ids are 1-based in the text format (matching the usual edge-list
//! convention) and 0-based internally. Duplicate edges across lines are
//! retained as distinct entries; repeated vertices within one line are
//! de-duplicated with a warning, since a hyperedge is a set.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum HypergraphError {
    #[error("line {line}: malformed token `{token}`")]
    MalformedLine { line: usize, token: String },
    #[error("line {line}: edge reduces to zero vertices")]
    EmptyEdge { line: usize },
    #[error("line {line}: vertex id 0 (ids are 1-based)")]
    ZeroVertexId { line: usize },
    #[error("component order {rank} exceeds vertex count {n}")]
    RankExceedsVertices { rank: usize, n: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A hyperedge: strictly increasing 0-based vertex ids with a positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub vertices: Vec<u32>,
    pub weight: T,
}

impl<T: Scalar> Edge<T> {
    /// Edge with the default weight w(e) = |e|.
    pub fn unit(vertices: Vec<u32>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let weight = T::from_usize(vertices.len()).unwrap();
        Self { vertices, weight }
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

/// A non-uniform hypergraph: vertex count, edge multiset, and cached rank
/// (maximum edge size).
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    rank: usize,
}

impl<T: Scalar> Hypergraph<T> {
    pub fn new(n: usize, edges: Vec<Edge<T>>) -> Self {
        for e in &edges {
            assert!(!e.vertices.is_empty(), "empty edge");
            assert!(
                e.vertices.windows(2).all(|w| w[0] < w[1]),
                "edge vertices must be strictly increasing"
            );
            assert!(
                (*e.vertices.last().unwrap() as usize) < n,
                "vertex id out of range"
            );
            assert!(e.weight > T::zero(), "edge weight must be positive");
        }
        let rank = edges.iter().map(Edge::size).max().unwrap_or(0);
        Self { n, edges, rank }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Rank N: size of the largest hyperedge (0 when there are no edges).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Keep exactly the edges with |e| <= `max_size`; n unchanged.
    pub fn filter_by_max_size(&self, max_size: usize) -> Self {
        assert!(max_size >= 1);
        let edges = self
            .edges
            .iter()
            .filter(|e| e.size() <= max_size)
            .cloned()
            .collect();
        Self::new(self.n, edges)
    }

    /// Weighted degree vector: each incident edge contributes w(e)/|e|, so the
    /// unit convention w(e) = |e| yields plain incidence counts and the
    /// TTSV1 ones-identity holds for arbitrary weights.
    pub fn degrees(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for e in &self.edges {
            let share = e.weight / T::from_usize(e.size()).unwrap();
            for &v in &e.vertices {
                d[v as usize] += share;
            }
        }
        d
    }

    /// True iff vertices 1..n form a single component through shared edges
    /// (isolated vertices make a hypergraph with n > 1 disconnected).
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut uf = UnionFind::new(self.n);
        for e in &self.edges {
            for w in e.vertices.windows(2) {
                uf.union(w[0] as usize, w[1] as usize);
            }
        }
        let root = uf.find(0);
        (1..self.n).all(|v| uf.find(v) == root)
    }

    /// Serialize to the text edge-list format (1-based ids). With `weighted`,
    /// the weight is appended as a final token on each line.
    pub fn to_edge_list(&self, weighted: bool) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let mut first = true;
            for &v in &e.vertices {
                if !first {
                    out.push(' ');
                }
                write!(out, "{}", v + 1).unwrap();
                first = false;
            }
            if weighted {
                write!(out, " {}", e.weight).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Parse the text edge-list format: one edge per line, ASCII-whitespace
/// separated 1-based vertex ids, `#` comment lines ignored, optional trailing
/// real weight when `weighted` is set. n is the maximum vertex id seen.
pub fn parse_hypergraph<T: Scalar>(
    reader: impl Read,
    weighted: bool,
) -> Result<Hypergraph<T>, HypergraphError> {
    let reader = BufReader::new(reader);
    let mut edges: Vec<Edge<T>> = Vec::new();
    let mut n = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_ascii_whitespace().collect();
        let (vertex_tokens, weight_token) = if weighted {
            let (last, rest) = tokens.split_last().unwrap();
            if rest.is_empty() {
                return Err(HypergraphError::EmptyEdge { line: line_no });
            }
            (rest, Some(*last))
        } else {
            (&tokens[..], None)
        };
        let mut vertices = Vec::with_capacity(vertex_tokens.len());
        for tok in vertex_tokens {
            let id: u64 = tok.parse().map_err(|_| HypergraphError::MalformedLine {
                line: line_no,
                token: tok.to_string(),
            })?;
            if id == 0 {
                return Err(HypergraphError::ZeroVertexId { line: line_no });
            }
            vertices.push((id - 1) as u32);
        }
        vertices.sort_unstable();
        let before = vertices.len();
        vertices.dedup();
        if vertices.len() < before {
            log::warn!(
                "line {line_no}: repeated vertices in edge, de-duplicated to {} vertices",
                vertices.len()
            );
        }
        if vertices.is_empty() {
            return Err(HypergraphError::EmptyEdge { line: line_no });
        }
        n = n.max(*vertices.last().unwrap() as usize + 1);
        let edge = match weight_token {
            Some(tok) => {
                let w: f64 = tok.parse().map_err(|_| HypergraphError::MalformedLine {
                    line: line_no,
                    token: tok.to_string(),
                })?;
                Edge { vertices, weight: T::from_f64_lossy(w) }
            }
            None => Edge::unit(vertices),
        };
        edges.push(edge);
    }
    Ok(Hypergraph::new(n, edges))
}

/// Parameters for the synthetic generator: component orders 5, 10, ..., rank,
/// with `m` edges split evenly across components (remainder to the largest
/// order) and each edge a uniformly random subset of [1, n].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    pub seed: u64,
}

impl GenSpec {
    /// Component orders 5, 10, ..., rank.
    pub fn orders(&self) -> Vec<usize> {
        (1..=self.rank / 5).map(|i| 5 * i).collect()
    }
}

pub fn generate_synthetic<T: Scalar>(spec: &GenSpec) -> Result<Hypergraph<T>, HypergraphError> {
    assert!(spec.rank >= 5 && spec.rank % 5 == 0, "rank must be a positive multiple of 5");
    if spec.rank > spec.n {
        return Err(HypergraphError::RankExceedsVertices { rank: spec.rank, n: spec.n });
    }
    let orders = spec.orders();
    let k = orders.len();
    let quota = spec.m / k;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::with_capacity(spec.m);
    for (i, &order) in orders.iter().enumerate() {
        let count = if i + 1 == k { spec.m - quota * (k - 1) } else { quota };
        for _ in 0..count {
            let mut vertices: Vec<u32> =
                sample(&mut rng, spec.n, order).iter().map(|v| v as u32).collect();
            vertices.sort_unstable();
            edges.push(Edge::unit(vertices));
        }
    }
    Ok(Hypergraph::new(spec.n, edges))
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] as usize != v {
            let grand = self.parent[self.parent[v] as usize];
            self.parent[v] = grand;
            v = grand as usize;
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb as u32;
        }
    }
}

/// The running example from the storage-format figure: 8 vertices, 6 edges of
/// sizes 4, 4, 4, 4, 3, 2. Used throughout the tests.
#[doc(hidden)]
pub fn example_hypergraph<T: Scalar>() -> Hypergraph<T> {
    let text = "2 3 4 7\n1 3 4 6\n1 2 3 8\n4 5 6 7\n1 4 6\n5 7\n";
    parse_hypergraph(text.as_bytes(), false).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    type H = Hypergraph<f64>;

    #[test]
    fn parse_example() {
        let h: H = example_hypergraph();
        assert_eq!(h.n(), 8);
        assert_eq!(h.edges().len(), 6);
        assert_eq!(h.rank(), 4);
        assert_eq!(h.edges()[0].vertices, vec![1, 2, 3, 6]);
        assert_eq!(h.edges()[0].weight, 4.0);
    }

    #[test]
    fn parse_sorts_input_order() {
        let h: H = parse_hypergraph("7 4 6 1\n".as_bytes(), false).unwrap();
        assert_eq!(h.edges()[0].vertices, vec![0, 3, 5, 6]);
    }

    #[test]
    fn parse_dedups_in_line_repeats() {
        let h: H = parse_hypergraph("1 1 2\n".as_bytes(), false).unwrap();
        assert_eq!(h.edges()[0].vertices, vec![0, 1]);
        assert_eq!(h.edges()[0].weight, 2.0);
    }

    #[test]
    fn parse_retains_duplicate_edges_across_lines() {
        let h: H = parse_hypergraph("1 2\n1 2\n".as_bytes(), false).unwrap();
        assert_eq!(h.edges().len(), 2);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_hypergraph::<f64>("1 x 2\n".as_bytes(), false),
            Err(HypergraphError::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            parse_hypergraph::<f64>("1 0 2\n".as_bytes(), false),
            Err(HypergraphError::ZeroVertexId { line: 1 })
        ));
        assert!(matches!(
            parse_hypergraph::<f64>("2.5\n".as_bytes(), true),
            Err(HypergraphError::EmptyEdge { line: 1 })
        ));
    }

    #[test]
    fn parse_weighted() {
        let h: H = parse_hypergraph("1 2 3 0.5\n# comment\n2 3 1.5\n".as_bytes(), true).unwrap();
        assert_eq!(h.edges()[0].weight, 0.5);
        assert_eq!(h.edges()[1].weight, 1.5);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let h: H = example_hypergraph();
        let text = h.to_edge_list(true);
        let h2: H = parse_hypergraph(text.as_bytes(), true).unwrap();
        assert_eq!(h, h2);
    }

    #[test]
    fn filter_by_max_size_examples() {
        let h: H = example_hypergraph();
        let small = h.filter_by_max_size(3);
        assert_eq!(small.n(), 8);
        assert_eq!(small.edges().len(), 2);
        assert_eq!(small.edges()[0].vertices, vec![0, 3, 5]);
        assert_eq!(small.edges()[1].vertices, vec![4, 6]);
        assert_eq!(h.filter_by_max_size(4), h);
        assert!(h.filter_by_max_size(1).edges().is_empty());
    }

    #[test]
    fn degree_vector() {
        let h: H = example_hypergraph();
        assert_eq!(h.degrees(), vec![3.0, 2.0, 3.0, 4.0, 2.0, 3.0, 3.0, 1.0]);
        let empty = H::new(3, vec![]);
        assert_eq!(empty.degrees(), vec![0.0; 3]);
        let single = H::new(2, vec![Edge::unit(vec![0, 1])]);
        assert_eq!(single.degrees(), vec![1.0, 1.0]);
        // Degree sum equals Σ|e| under the unit-weight convention.
        assert_eq!(h.degrees().iter().sum::<f64>(), 21.0);
    }

    #[test]
    fn connectivity() {
        let h: H = example_hypergraph();
        assert!(h.is_connected());
        let two = H::new(4, vec![Edge::unit(vec![0, 1]), Edge::unit(vec![2, 3])]);
        assert!(!two.is_connected());
        assert!(H::new(1, vec![]).is_connected());
        // Isolated vertex with n > 1.
        assert!(!H::new(3, vec![Edge::unit(vec![0, 1])]).is_connected());
    }

    #[test]
    fn synthetic_generation() {
        let spec = GenSpec { n: 200, m: 100, rank: 30, seed: 7 };
        let h: H = generate_synthetic(&spec).unwrap();
        assert_eq!(h.edges().len(), 100);
        assert_eq!(h.rank(), 30);
        // Quotas: 6 components, 16 edges each, remainder 4 to the largest.
        for (i, &order) in spec.orders().iter().enumerate() {
            let count = h.edges().iter().filter(|e| e.size() == order).count();
            let expected = if i == 5 { 100 - 16 * 5 } else { 16 };
            assert_eq!(count, expected, "order {order}");
        }
    }

    #[test]
    fn synthetic_single_order() {
        let spec = GenSpec { n: 10, m: 5, rank: 5, seed: 1 };
        let h: H = generate_synthetic(&spec).unwrap();
        assert_eq!(h.edges().len(), 5);
        assert!(h.edges().iter().all(|e| e.size() == 5));
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = GenSpec { n: 50, m: 40, rank: 10, seed: 99 };
        let a: H = generate_synthetic(&spec).unwrap();
        let b: H = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn synthetic_rejects_rank_over_n() {
        let spec = GenSpec { n: 4, m: 5, rank: 5, seed: 0 };
        assert!(matches!(
            generate_synthetic::<f64>(&spec),
            Err(HypergraphError::RankExceedsVertices { .. })
        ));
    }
}
