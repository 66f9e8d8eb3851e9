//! Fast tensor-times-same-vector (TTSV1) on the blowup adjacency tensor of
//! non-uniform hypergraphs, and H-eigenvector centrality on top of it.
//!
//! The hypergraph is stored in a compressed trie forest over ordered proper
//! subsets of its edges ("CCSS"), and TTSV1 is evaluated implicitly through
//! truncated generating-function convolutions. Four engines are provided:
//! an edge-loop baseline, forest traversal with direct or FFT convolution,
//! and a memoized depth-first traversal that performs one convolution per
//! forest edge. A brute-force tensor oracle backs all of them at desk scale.
//!
//! All floating-point code is generic over [`scalar::Scalar`] (`f32`/`f64`);
//! the aliases below fix the default `f64` instantiation.

pub mod ccss;
pub mod centrality;
pub mod combinatorics;
pub mod genpoly;
pub mod hypergraph;
pub mod oracle;
pub mod scalar;
pub mod ttsv;

/// Default scalar type for the concrete aliases.
pub type Real = f64;

pub type Edge = hypergraph::Edge<Real>;
pub type Hypergraph = hypergraph::Hypergraph<Real>;
pub type CoeffVec = genpoly::CoeffVec<Real>;
pub type CcssForest = ccss::CcssForest<Real>;
pub type ExplicitBlowup = oracle::ExplicitBlowup<Real>;
pub type TtsvReport = ttsv::TtsvReport<Real>;
pub type CentralityResult = centrality::CentralityResult<Real>;

pub use hypergraph::GenSpec;
pub use ttsv::Algo;
