//! The compressed trie forest over ordered proper subsets of hyperedges.
//!
//! Every edge e and vertex v ∈ e contributes the sorted sequence e\{v} as a
//! root-to-level-(|e|-1) path; shared prefixes are merged. A special leaf
//! (dropped vertex, scaled tensor value) hangs off the terminal node of each
//! such path. In trimmed mode (the default) only these leaf-bearing paths are
//! stored; full mode additionally stores every ordered proper subset of every
//! edge and exists for storage statistics.
//!
//! The forest is a flat node array with integer refs, nodes grouped
//! contiguously by level and children kept in ascending label order, so
//! traversal order is canonical and independent of edge input order.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use thiserror::Error;

use crate::combinatorics::{BlowupTable, CombinatoricsError};
use crate::hypergraph::Hypergraph;
use crate::scalar::Scalar;

pub const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildMode {
    /// Only leaf-bearing paths e\{v}.
    Trimmed,
    /// Additionally every ordered proper subset of every edge.
    Full,
}

/// Forest node: vertex label, parent ref, 1-based level, children in
/// ascending label order.
#[derive(Debug, Clone)]
pub struct CcssNode {
    pub label: u32,
    pub parent: u32,
    pub level: u16,
    children: Vec<u32>,
    leaves: Vec<u32>,
}

impl CcssNode {
    pub fn children(&self) -> &[u32] {
        &self.children
    }

    /// Indices into the forest leaf table of the special leaves owned here.
    pub fn leaf_refs(&self) -> &[u32] {
        &self.leaves
    }
}

/// Special leaf for the pair (e, v): attached to the node terminating the
/// path e\{v}, carrying the dropped vertex and the scaled value w(e)/|β(e)|.
#[derive(Debug, Clone)]
pub struct SpecialLeaf<T> {
    pub owner: u32,
    pub dropped: u32,
    pub edge_size: u16,
    pub scaled_value: T,
}

#[derive(Debug, Error)]
pub enum CcssError {
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid forest serialization: {0}")]
    Corrupt(&'static str),
}

#[derive(Debug, Clone)]
pub struct CcssForest<T> {
    order: usize,
    mode: BuildMode,
    nodes: Vec<CcssNode>,
    leaves: Vec<SpecialLeaf<T>>,
    roots: Vec<u32>,
    /// Leaf index ranges grouped by edge size k = 2..=N; entry k-2.
    leaf_ranges: Vec<std::ops::Range<usize>>,
}

/// Storage statistics for a forest/hypergraph pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CcssStats {
    pub node_count: usize,
    pub leaf_count: usize,
    pub root_count: usize,
    /// Node counts per level, entry ℓ-1 for levels 1..=N-1.
    pub per_level: Vec<usize>,
    /// Coordinate storage of the adjacency tensor's index-ordered unique
    /// non-zeros: each edge e yields C(N-1, |e|-1) sorted tuples of N
    /// indices plus one value, so Σ_e C(N-1, |e|-1) · (N + 1), saturating.
    pub coo_units: u128,
    /// CCSS units: one label per node, dropped index + value per leaf.
    pub ccss_units: u128,
    pub compression_ratio: f64,
}

// Temporary trie node used during construction; BTreeMap keeps children in
// ascending label order.
struct TrieNode<T> {
    label: u32,
    level: u16,
    children: BTreeMap<u32, usize>,
    leaves: Vec<SpecialLeaf<T>>,
}

struct TrieBuilder<T> {
    nodes: Vec<TrieNode<T>>,
    roots: BTreeMap<u32, usize>,
}

impl<T> TrieBuilder<T> {
    fn new() -> Self {
        Self { nodes: Vec::new(), roots: BTreeMap::new() }
    }

    /// Insert `path` (strictly increasing labels) and return the terminal
    /// temp-node index.
    fn insert_path(&mut self, path: &[u32]) -> usize {
        debug_assert!(!path.is_empty());
        let nodes = &mut self.nodes;
        let mut current = *self.roots.entry(path[0]).or_insert_with(|| {
            nodes.push(TrieNode {
                label: path[0],
                level: 1,
                children: BTreeMap::new(),
                leaves: Vec::new(),
            });
            nodes.len() - 1
        });
        for (depth, &label) in path.iter().enumerate().skip(1) {
            let next = match self.nodes[current].children.get(&label) {
                Some(&idx) => idx,
                None => {
                    self.nodes.push(TrieNode {
                        label,
                        level: (depth + 1) as u16,
                        children: BTreeMap::new(),
                        leaves: Vec::new(),
                    });
                    let idx = self.nodes.len() - 1;
                    self.nodes[current].children.insert(label, idx);
                    idx
                }
            };
            current = next;
        }
        current
    }
}

/// Build the CCSS forest of `h`. Singleton edges produce no forest content;
/// the TTSV1 engines handle them in a pre-pass.
pub fn build_ccss<T: Scalar>(h: &Hypergraph<T>, mode: BuildMode) -> Result<CcssForest<T>, CcssError> {
    let order = h.rank();
    let mut trie: TrieBuilder<T> = TrieBuilder::new();
    if order >= 2 {
        let table = BlowupTable::new(order)?;
        let mut path = Vec::with_capacity(order);
        for edge in h.edges() {
            let k = edge.size();
            if k < 2 {
                continue;
            }
            let scaled_value = edge.weight / T::from_f64_lossy(table.real(k));
            for (drop_pos, &dropped) in edge.vertices.iter().enumerate() {
                path.clear();
                path.extend(edge.vertices.iter().enumerate().filter_map(|(i, &v)| {
                    (i != drop_pos).then_some(v)
                }));
                let terminal = trie.insert_path(&path);
                trie.nodes[terminal].leaves.push(SpecialLeaf {
                    owner: 0, // fixed up after flattening
                    dropped,
                    edge_size: k as u16,
                    scaled_value,
                });
            }
            if mode == BuildMode::Full && k >= 2 {
                // Every non-empty proper subset, as a sorted path.
                assert!(k < 64, "full mode limited to edges below 64 vertices");
                for mask in 1u64..(1u64 << k) - 1 {
                    path.clear();
                    for (i, &v) in edge.vertices.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            path.push(v);
                        }
                    }
                    trie.insert_path(&path);
                }
            }
        }
    }
    Ok(flatten(trie, order, mode))
}

/// Assign final indices level by level (roots ascending, children ascending)
/// and group leaves by edge size.
fn flatten<T: Scalar>(trie: TrieBuilder<T>, order: usize, mode: BuildMode) -> CcssForest<T> {
    let mut final_index = vec![u32::MAX; trie.nodes.len()];
    let mut frontier: Vec<(usize, u32)> = trie
        .roots
        .values()
        .map(|&idx| (idx, NO_PARENT))
        .collect();
    let mut nodes: Vec<CcssNode> = Vec::with_capacity(trie.nodes.len());
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (tmp_idx, parent) in frontier {
            let final_idx = nodes.len() as u32;
            final_index[tmp_idx] = final_idx;
            let t = &trie.nodes[tmp_idx];
            nodes.push(CcssNode {
                label: t.label,
                parent,
                level: t.level,
                children: Vec::with_capacity(t.children.len()),
                leaves: Vec::new(),
            });
            if parent != NO_PARENT {
                nodes[parent as usize].children.push(final_idx);
            }
            for &child in t.children.values() {
                next.push((child, final_idx));
            }
        }
        frontier = next;
    }

    let roots: Vec<u32> = nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.parent == NO_PARENT)
        .map(|(i, _)| i as u32)
        .collect();

    // Collect leaves grouped by edge size, then by owner index and dropped
    // vertex, which is the canonical per-level order.
    let mut keyed: Vec<(u16, u32, u32, SpecialLeaf<T>)> = Vec::new();
    for (tmp_idx, node) in trie.nodes.into_iter().enumerate() {
        let owner = final_index[tmp_idx];
        for mut leaf in node.leaves {
            leaf.owner = owner;
            keyed.push((leaf.edge_size, owner, leaf.dropped, leaf));
        }
    }
    keyed.sort_by_key(|(size, owner, dropped, _)| (*size, *owner, *dropped));
    let mut leaves = Vec::with_capacity(keyed.len());
    let mut leaf_ranges = vec![0..0; order.saturating_sub(1)];
    for (size, _, _, leaf) in keyed {
        let slot = size as usize - 2;
        if leaf_ranges[slot].is_empty() {
            leaf_ranges[slot] = leaves.len()..leaves.len();
        }
        leaf_ranges[slot].end = leaves.len() + 1;
        leaves.push(leaf);
    }
    for (i, leaf) in leaves.iter().enumerate() {
        nodes[leaf.owner as usize].leaves.push(i as u32);
    }

    CcssForest { order, mode, nodes, leaves, roots, leaf_ranges }
}

impl<T: Scalar> CcssForest<T> {
    /// Rank N of the source hypergraph.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> BuildMode {
        self.mode
    }

    pub fn nodes(&self) -> &[CcssNode] {
        &self.nodes
    }

    pub fn leaves(&self) -> &[SpecialLeaf<T>] {
        &self.leaves
    }

    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    /// Special leaves of edges of size `k`, in canonical order.
    pub fn leaves_for_edge_size(&self, k: usize) -> &[SpecialLeaf<T>] {
        if k < 2 || k > self.order {
            return &[];
        }
        &self.leaves[self.leaf_ranges[k - 2].clone()]
    }

    /// Labels on the root path ending at `node`, root first.
    pub fn path_labels(&self, node: u32) -> Vec<u32> {
        let mut labels = Vec::new();
        let mut current = node;
        loop {
            let n = &self.nodes[current as usize];
            labels.push(n.label);
            if n.parent == NO_PARENT {
                break;
            }
            current = n.parent;
        }
        labels.reverse();
        labels
    }

    pub fn stats(&self, h: &Hypergraph<T>) -> CcssStats {
        let mut per_level = vec![0usize; self.order.saturating_sub(1)];
        for n in &self.nodes {
            per_level[n.level as usize - 1] += 1;
        }
        let coo_units: u128 = h
            .edges()
            .iter()
            .map(|e| {
                crate::combinatorics::binomial_sat(self.order - 1, e.size() - 1)
                    .saturating_mul(self.order as u128 + 1)
            })
            .fold(0u128, u128::saturating_add);
        let ccss_units = self.nodes.len() as u128 + 2 * self.leaves.len() as u128;
        let compression_ratio = if ccss_units == 0 {
            1.0
        } else {
            coo_units as f64 / ccss_units as f64
        };
        CcssStats {
            node_count: self.nodes.len(),
            leaf_count: self.leaves.len(),
            root_count: self.roots.len(),
            per_level,
            coo_units,
            ccss_units,
            compression_ratio,
        }
    }
}

/// Worst-case full-forest node bound Σ_e (2^{|e|} - 1), saturating.
pub fn worst_case_bound<T: Scalar>(h: &Hypergraph<T>) -> u128 {
    h.edges()
        .iter()
        .map(|e| {
            if e.size() >= 127 {
                u128::MAX
            } else {
                (1u128 << e.size()) - 1
            }
        })
        .fold(0u128, u128::saturating_add)
}

// ---------------------------------------------------------------------------
// Binary serialization.
//
// Layout (all integers little-endian, fixed width):
//   magic   4 bytes  "CCSS"
//   version u32      1
//   order   u32      rank N of the source hypergraph
//   mode    u32      0 = trimmed, 1 = full
//   nodes   u64      node count
//   leaves  u64      leaf count
//   node table, one record per node in canonical (level-major) order:
//     label u32, parent u32 (0xFFFFFFFF for roots), level u16
//   leaf table, one record per leaf in canonical order:
//     owner u32, dropped u32, edge_size u16, scaled_value f64 bits (u64)
// Children, roots, and per-size leaf ranges are reconstructed on load.
// ---------------------------------------------------------------------------

const MAGIC: &[u8; 4] = b"CCSS";
const VERSION: u32 = 1;

impl<T: Scalar> CcssForest<T> {
    pub fn write_binary(&self, w: &mut impl Write) -> Result<(), CcssError> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.order as u32).to_le_bytes())?;
        let mode = match self.mode {
            BuildMode::Trimmed => 0u32,
            BuildMode::Full => 1,
        };
        w.write_all(&mode.to_le_bytes())?;
        w.write_all(&(self.nodes.len() as u64).to_le_bytes())?;
        w.write_all(&(self.leaves.len() as u64).to_le_bytes())?;
        for n in &self.nodes {
            w.write_all(&n.label.to_le_bytes())?;
            w.write_all(&n.parent.to_le_bytes())?;
            w.write_all(&n.level.to_le_bytes())?;
        }
        for leaf in &self.leaves {
            w.write_all(&leaf.owner.to_le_bytes())?;
            w.write_all(&leaf.dropped.to_le_bytes())?;
            w.write_all(&leaf.edge_size.to_le_bytes())?;
            let bits = leaf.scaled_value.to_f64().unwrap().to_bits();
            w.write_all(&bits.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self, CcssError> {
        fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N], CcssError> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf)?;
            Ok(buf)
        }
        if &read_array::<4>(r)? != MAGIC {
            return Err(CcssError::Corrupt("bad magic"));
        }
        if u32::from_le_bytes(read_array(r)?) != VERSION {
            return Err(CcssError::Corrupt("unsupported version"));
        }
        let order = u32::from_le_bytes(read_array(r)?) as usize;
        let mode = match u32::from_le_bytes(read_array(r)?) {
            0 => BuildMode::Trimmed,
            1 => BuildMode::Full,
            _ => return Err(CcssError::Corrupt("bad mode")),
        };
        let node_count = u64::from_le_bytes(read_array(r)?) as usize;
        let leaf_count = u64::from_le_bytes(read_array(r)?) as usize;
        let mut nodes = Vec::with_capacity(node_count);
        for _ in 0..node_count {
            let label = u32::from_le_bytes(read_array(r)?);
            let parent = u32::from_le_bytes(read_array(r)?);
            let level = u16::from_le_bytes(read_array(r)?);
            nodes.push(CcssNode { label, parent, level, children: Vec::new(), leaves: Vec::new() });
        }
        for i in 0..node_count {
            let parent = nodes[i].parent;
            if parent != NO_PARENT {
                if parent as usize >= node_count {
                    return Err(CcssError::Corrupt("parent out of range"));
                }
                nodes[parent as usize].children.push(i as u32);
            }
        }
        let roots: Vec<u32> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.parent == NO_PARENT)
            .map(|(i, _)| i as u32)
            .collect();
        let mut leaves = Vec::with_capacity(leaf_count);
        let mut leaf_ranges = vec![0..0; order.saturating_sub(1)];
        for i in 0..leaf_count {
            let owner = u32::from_le_bytes(read_array(r)?);
            let dropped = u32::from_le_bytes(read_array(r)?);
            let edge_size = u16::from_le_bytes(read_array(r)?);
            let value = f64::from_bits(u64::from_le_bytes(read_array(r)?));
            if owner as usize >= node_count || edge_size < 2 || edge_size as usize > order {
                return Err(CcssError::Corrupt("bad leaf record"));
            }
            let slot = edge_size as usize - 2;
            if leaf_ranges[slot].is_empty() {
                leaf_ranges[slot] = i..i;
            }
            leaf_ranges[slot].end = i + 1;
            nodes[owner as usize].leaves.push(i as u32);
            leaves.push(SpecialLeaf {
                owner,
                dropped,
                edge_size,
                scaled_value: T::from_f64_lossy(value),
            });
        }
        Ok(CcssForest { order, mode, nodes, leaves, roots, leaf_ranges })
    }
}
