//! The TTSV1 engines.
//!
//! Four fast paths compute s = B b^{N-1} implicitly on the blowup tensor:
//!
//! * `Aay` — edge-loop baseline: per (vertex, edge) pair, convolve
//!   E_N(b_v) with the Ē_N factors of the remaining vertices.
//! * `Direct` — leaf-to-root traversal of the CCSS forest with direct
//!   truncated convolution.
//! * `Fft` — the same traversal with FFT convolution per leaf.
//! * `Memo` — root-to-leaf DFS keeping per-level truncated products, one
//!   convolution per forest edge.
//!
//! All engines share an immutable hypergraph/forest/input and write the
//! output vector only through an accumulation sink: lock-free atomic adds by
//! default, or per-task buffers reduced in canonical order in deterministic
//! mode (bit-identical results for any worker count). `conv_count` is the
//! exact number of pairwise truncated polynomial products performed.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::ccss::{CcssForest, SpecialLeaf};
use crate::combinatorics::{factorial_real, CombinatoricsError, MAX_ORDER};
use crate::genpoly::{conv_trunc, e_vec, ebar_vec, CoeffVec, FftConvolver, GenPolyError};
use crate::hypergraph::Hypergraph;
use crate::oracle::{build_explicit, ttsv1_oracle, ExplicitBlowup, OracleError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Aay,
    Direct,
    Fft,
    Memo,
    Oracle,
}

impl Algo {
    pub fn name(&self) -> &'static str {
        match self {
            Algo::Aay => "aay",
            Algo::Direct => "direct",
            Algo::Fft => "fft",
            Algo::Memo => "memo",
            Algo::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aay" => Ok(Algo::Aay),
            "direct" => Ok(Algo::Direct),
            "fft" => Ok(Algo::Fft),
            "memo" => Ok(Algo::Memo),
            "oracle" => Ok(Algo::Oracle),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TtsvError {
    #[error("vector length {got} does not match vertex count {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hypergraph rank {0} exceeds the maximum supported order {MAX_ORDER}")]
    OrderTooLarge(usize),
    #[error("forest order {forest} does not match hypergraph rank {hypergraph}")]
    ForestMismatch { forest: usize, hypergraph: usize },
    #[error(transparent)]
    GenPoly(#[from] GenPolyError),
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Ccss(#[from] crate::ccss::CcssError),
}

/// Execution contract shared by all engines.
#[derive(Debug, Clone, Copy)]
pub struct TtsvOptions {
    /// Worker count; 0 means the platform default.
    pub workers: usize,
    /// Buffer per-task contributions and reduce them in canonical order
    /// instead of atomic accumulation.
    pub deterministic: bool,
}

impl Default for TtsvOptions {
    fn default() -> Self {
        Self { workers: 0, deterministic: false }
    }
}

/// TTSV1 output plus instrumentation.
#[derive(Debug, Clone)]
pub struct TtsvReport<T> {
    pub s: Vec<T>,
    pub conv_count: u64,
    pub algo: Algo,
    pub workers: usize,
    pub wall_time: Duration,
}

// ---------------------------------------------------------------------------
// Accumulation sinks.
// ---------------------------------------------------------------------------

trait Sink<T> {
    fn add(&mut self, v: usize, delta: T);
}

struct AtomicSink<'a, T: Scalar> {
    cells: &'a [T::Atomic],
}

impl<T: Scalar> Sink<T> for AtomicSink<'_, T> {
    fn add(&mut self, v: usize, delta: T) {
        T::atomic_add(&self.cells[v], delta);
    }
}

struct BufferSink<T> {
    buf: Vec<(u32, T)>,
}

impl<T: Scalar> Sink<T> for BufferSink<T> {
    fn add(&mut self, v: usize, delta: T) {
        self.buf.push((v as u32, delta));
    }
}

/// Run `tasks` parallel tasks over a worker pool. Each task gets worker-local
/// state from `init` and emits (vertex, delta) contributions plus a pairwise
/// convolution count. Returns the accumulated output vector and total count.
fn run_parallel<T, S, I, F>(
    out_len: usize,
    opts: TtsvOptions,
    tasks: usize,
    init: I,
    task: F,
) -> (Vec<T>, u64)
where
    T: Scalar,
    S: Send,
    I: Fn() -> S + Send + Sync,
    F: Fn(&mut S, usize, &mut dyn Sink<T>) -> u64 + Send + Sync,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if opts.workers > 0 {
        builder = builder.num_threads(opts.workers);
    }
    let pool = builder.build().expect("thread pool");
    if opts.deterministic {
        let results: Vec<(Vec<(u32, T)>, u64)> = pool.install(|| {
            (0..tasks)
                .into_par_iter()
                .map_init(&init, |state, i| {
                    let mut sink = BufferSink { buf: Vec::new() };
                    let convs = task(state, i, &mut sink);
                    (sink.buf, convs)
                })
                .collect()
        });
        let mut s = vec![T::zero(); out_len];
        let mut convs = 0u64;
        for (buf, c) in results {
            convs += c;
            for (v, delta) in buf {
                s[v as usize] += delta;
            }
        }
        (s, convs)
    } else {
        let cells = T::atomic_vec(out_len);
        let convs = pool.install(|| {
            (0..tasks)
                .into_par_iter()
                .map_init(&init, |state, i| {
                    let mut sink = AtomicSink { cells: &cells };
                    task(state, i, &mut sink)
                })
                .sum()
        });
        (cells.iter().map(T::atomic_load).collect(), convs)
    }
}

// ---------------------------------------------------------------------------
// Shared precomputation.
// ---------------------------------------------------------------------------

fn check_input<T: Scalar>(h: &Hypergraph<T>, b: &[T]) -> Result<(), TtsvError> {
    if b.len() != h.n() {
        return Err(TtsvError::DimensionMismatch { expected: h.n(), got: b.len() });
    }
    if h.rank() > MAX_ORDER {
        return Err(TtsvError::OrderTooLarge(h.rank()));
    }
    Ok(())
}

/// Ē_N(b_v) for every vertex, computed once per call.
fn ebar_table<T: Scalar>(b: &[T], order: usize) -> Result<Vec<CoeffVec<T>>, GenPolyError> {
    b.iter().map(|&c| ebar_vec(c, order)).collect()
}

/// Contributions of singleton edges: w(e) · b_v^{N-1}.
fn singleton_prepass<T: Scalar>(h: &Hypergraph<T>, b: &[T], s: &mut [T]) {
    let exp = h.rank() as i32 - 1;
    for e in h.edges() {
        if e.size() == 1 {
            let v = e.vertices[0] as usize;
            s[v] += e.weight * b[v].powi(exp);
        }
    }
}

// ---------------------------------------------------------------------------
// Engines.
// ---------------------------------------------------------------------------

/// Edge-loop baseline, parallel over vertices.
pub fn ttsv1_aay<T: Scalar>(
    h: &Hypergraph<T>,
    b: &[T],
    opts: TtsvOptions,
) -> Result<TtsvReport<T>, TtsvError> {
    let start = Instant::now();
    check_input(h, b)?;
    let n = h.n();
    let order = h.rank();
    if order == 0 {
        return Ok(finish(vec![T::zero(); n], 0, Algo::Aay, opts, start));
    }
    let fact = T::from_f64_lossy(factorial_real(order - 1)?);
    // scale(e) = w(e)/|β(e)| · (N-1)!.
    let table = crate::combinatorics::BlowupTable::new(order)?;
    let scale: Vec<T> = h
        .edges()
        .iter()
        .map(|e| e.weight / T::from_f64_lossy(table.real(e.size())) * fact)
        .collect();
    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, e) in h.edges().iter().enumerate() {
        for &v in &e.vertices {
            incident[v as usize].push(i as u32);
        }
    }
    let ebars = ebar_table(b, order)?;
    let (s, convs) = run_parallel(
        n,
        opts,
        n,
        || (),
        |_, v, sink| {
            let mut convs = 0u64;
            let mut c = T::zero();
            for &ei in &incident[v] {
                let e = &h.edges()[ei as usize];
                let mut coefs = e_vec(b[v], order).expect("order checked");
                for &u in &e.vertices {
                    if u as usize != v {
                        coefs = conv_trunc(&coefs, &ebars[u as usize]).expect("orders equal");
                        convs += 1;
                    }
                }
                c += scale[ei as usize] * coefs.coeff(order - 1);
            }
            sink.add(v, c);
            convs
        },
    );
    Ok(finish(s, convs, Algo::Aay, opts, start))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvKind {
    Direct,
    Fft,
}

/// Leaf-to-root forest traversal (parallel over the special leaves within
/// each level), with direct or FFT convolution per leaf.
pub fn ttsv1_ccss_direct<T: Scalar>(
    forest: &CcssForest<T>,
    h: &Hypergraph<T>,
    b: &[T],
    opts: TtsvOptions,
    conv: ConvKind,
) -> Result<TtsvReport<T>, TtsvError> {
    let start = Instant::now();
    check_input(h, b)?;
    check_forest(forest, h)?;
    let algo = match conv {
        ConvKind::Direct => Algo::Direct,
        ConvKind::Fft => Algo::Fft,
    };
    let n = h.n();
    let order = h.rank();
    let mut s_total = vec![T::zero(); n];
    singleton_prepass(h, b, &mut s_total);
    if order < 2 {
        return Ok(finish(s_total, 0, algo, opts, start));
    }
    let fact = T::from_f64_lossy(factorial_real(order - 1)?);
    let ebars = ebar_table(b, order)?;
    let mut convs_total = 0u64;
    for size in (2..=order).rev() {
        let leaves = forest.leaves_for_edge_size(size);
        if leaves.is_empty() {
            continue;
        }
        let (s, convs) = run_parallel(
            n,
            opts,
            leaves.len(),
            || match conv {
                ConvKind::Fft => Some(FftConvolver::new(order)),
                ConvKind::Direct => None,
            },
            |convolver, i, sink| {
                let leaf = &leaves[i];
                let (value, convs) = match convolver {
                    None => leaf_value_direct(forest, leaf, b, &ebars, order),
                    Some(c) => leaf_value_fft(forest, leaf, b, order, c),
                };
                sink.add(leaf.dropped as usize, leaf.scaled_value * fact * value);
                convs
            },
        );
        convs_total += convs;
        for (acc, x) in s_total.iter_mut().zip(s) {
            *acc += x;
        }
    }
    Ok(finish(s_total, convs_total, algo, opts, start))
}

/// Walk the owner's root path accumulating Ē factors onto E_N(b_v).
fn leaf_value_direct<T: Scalar>(
    forest: &CcssForest<T>,
    leaf: &SpecialLeaf<T>,
    b: &[T],
    ebars: &[CoeffVec<T>],
    order: usize,
) -> (T, u64) {
    let mut coefs = e_vec(b[leaf.dropped as usize], order).expect("order checked");
    let mut convs = 0u64;
    let mut node = leaf.owner;
    loop {
        let nd = &forest.nodes()[node as usize];
        coefs = conv_trunc(&ebars[nd.label as usize], &coefs).expect("orders equal");
        convs += 1;
        if nd.parent == crate::ccss::NO_PARENT {
            break;
        }
        node = nd.parent;
    }
    (coefs.coeff(order - 1), convs)
}

/// Multiply the leaf's whole factor list via FFT convolution.
///
/// The factors are evaluated at a rescaled variable t → αt with
/// α = (N-1)/Σ b_u, which moves the mass of the product toward degree N-1.
/// Without this the target coefficient can sit thirty orders of magnitude
/// below the leading ones (the factorial weights of E_N) and the FFT's
/// absolute error wipes it out; the rescaling makes the extraction
/// well-conditioned, and the α^{N-1} factor is divided back out exactly.
fn leaf_value_fft<T: Scalar>(
    forest: &CcssForest<T>,
    leaf: &SpecialLeaf<T>,
    b: &[T],
    order: usize,
    convolver: &mut FftConvolver<T>,
) -> (T, u64) {
    let mut path = vec![leaf.dropped];
    let mut node = leaf.owner;
    loop {
        let nd = &forest.nodes()[node as usize];
        path.push(nd.label);
        if nd.parent == crate::ccss::NO_PARENT {
            break;
        }
        node = nd.parent;
    }
    let sum: T = path.iter().map(|&u| b[u as usize]).sum();
    let alpha = if sum > T::zero() {
        T::from_usize(order - 1).unwrap() / sum
    } else {
        T::one()
    };
    let mut factors = Vec::with_capacity(path.len());
    factors.push(e_vec(b[leaf.dropped as usize] * alpha, order).expect("order checked"));
    for &u in &path[1..] {
        factors.push(ebar_vec(b[u as usize] * alpha, order).expect("order checked"));
    }
    let convs = factors.len() as u64 - 1;
    let coefs = convolver.conv_list(&factors).expect("orders equal");
    (coefs.coeff(order - 1) / alpha.powi(order as i32 - 1), convs)
}

/// Per-worker workspace of the memoized DFS: slot ℓ-1 holds P_ℓ, the
/// truncation of Π_{i=1}^{ℓ} Ē_N(b_{v_i}) along the current path v_1..v_ℓ.
struct MemoWorkspace<T> {
    slots: Vec<CoeffVec<T>>,
}

impl<T: Scalar> MemoWorkspace<T> {
    fn new(order: usize) -> Self {
        let slots = (0..order.saturating_sub(1)).map(|_| CoeffVec::unit(order)).collect();
        Self { slots }
    }
}

/// Root-to-leaf memoized DFS, parallel over roots with work stealing; one
/// convolution per forest edge, so `conv_count` = node count - root count.
pub fn ttsv1_ccss_memo<T: Scalar>(
    forest: &CcssForest<T>,
    h: &Hypergraph<T>,
    b: &[T],
    opts: TtsvOptions,
) -> Result<TtsvReport<T>, TtsvError> {
    let start = Instant::now();
    check_input(h, b)?;
    check_forest(forest, h)?;
    let n = h.n();
    let order = h.rank();
    let mut s_total = vec![T::zero(); n];
    singleton_prepass(h, b, &mut s_total);
    if order < 2 {
        return Ok(finish(s_total, 0, Algo::Memo, opts, start));
    }
    let fact = T::from_f64_lossy(factorial_real(order - 1)?);
    let ebars = ebar_table(b, order)?;
    let (s, convs) = run_parallel(
        n,
        opts,
        forest.roots().len(),
        || MemoWorkspace::new(order),
        |ws, i, sink| {
            let root = forest.roots()[i];
            // P₁ is the Ē factor of the root, written by direct fill; not a
            // counted convolution.
            ws.slots[0] = ebars[forest.nodes()[root as usize].label as usize].clone();
            let mut convs = 0u64;
            memo_dfs(forest, root, 1, ws, b, &ebars, fact, order, sink, &mut convs);
            convs
        },
    );
    for (acc, x) in s_total.iter_mut().zip(s) {
        *acc += x;
    }
    Ok(finish(s_total, convs, Algo::Memo, opts, start))
}

#[allow(clippy::too_many_arguments)]
fn memo_dfs<T: Scalar>(
    forest: &CcssForest<T>,
    node: u32,
    level: usize,
    ws: &mut MemoWorkspace<T>,
    b: &[T],
    ebars: &[CoeffVec<T>],
    fact: T,
    order: usize,
    sink: &mut dyn Sink<T>,
    convs: &mut u64,
) {
    debug_assert!(
        ws.slots[level - 1].coeffs()[..level].iter().all(|&c| c == T::zero()),
        "P_l must vanish below degree l"
    );
    let nd = &forest.nodes()[node as usize];
    for &leaf_ref in nd.leaf_refs() {
        let leaf = &forest.leaves()[leaf_ref as usize];
        // Dot product with the truncated E_N(b_u) terms; not a convolution.
        let bu = b[leaf.dropped as usize];
        let p = &ws.slots[level - 1];
        let mut term = T::one();
        let mut dot = T::zero();
        for d in 0..=(order - 1 - level) {
            dot += term * p.coeff(order - 1 - d);
            term = term * bu / T::from_usize(d + 1).unwrap();
        }
        sink.add(leaf.dropped as usize, leaf.scaled_value * fact * dot);
    }
    for &child in nd.children() {
        let label = forest.nodes()[child as usize].label as usize;
        ws.slots[level] = conv_trunc(&ws.slots[level - 1], &ebars[label]).expect("orders equal");
        *convs += 1;
        memo_dfs(forest, child, level + 1, ws, b, ebars, fact, order, sink, convs);
    }
}

fn check_forest<T: Scalar>(forest: &CcssForest<T>, h: &Hypergraph<T>) -> Result<(), TtsvError> {
    if forest.order() != h.rank() {
        return Err(TtsvError::ForestMismatch { forest: forest.order(), hypergraph: h.rank() });
    }
    Ok(())
}

fn finish<T: Scalar>(
    s: Vec<T>,
    conv_count: u64,
    algo: Algo,
    opts: TtsvOptions,
    start: Instant,
) -> TtsvReport<T> {
    let workers = if opts.workers > 0 {
        opts.workers
    } else {
        std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
    };
    TtsvReport { s, conv_count, algo, workers, wall_time: start.elapsed() }
}

// ---------------------------------------------------------------------------
// Unified front end.
// ---------------------------------------------------------------------------

/// One hypergraph bound to one algorithm, with whatever auxiliary structure
/// the algorithm needs (forest or explicit tensor) built once up front.
pub struct Ttsv1Engine<'a, T: Scalar> {
    h: &'a Hypergraph<T>,
    algo: Algo,
    opts: TtsvOptions,
    forest: Option<CcssForest<T>>,
    explicit: Option<ExplicitBlowup<T>>,
}

impl<'a, T: Scalar> Ttsv1Engine<'a, T> {
    pub fn new(h: &'a Hypergraph<T>, algo: Algo, opts: TtsvOptions) -> Result<Self, TtsvError> {
        if h.rank() > MAX_ORDER {
            return Err(TtsvError::OrderTooLarge(h.rank()));
        }
        let forest = match algo {
            Algo::Direct | Algo::Fft | Algo::Memo => {
                Some(crate::ccss::build_ccss(h, crate::ccss::BuildMode::Trimmed)?)
            }
            _ => None,
        };
        let explicit = match algo {
            Algo::Oracle => Some(build_explicit(h)?),
            _ => None,
        };
        Ok(Self { h, algo, opts, forest, explicit })
    }

    /// Reuse an already built forest (must come from the same hypergraph).
    pub fn with_forest(
        h: &'a Hypergraph<T>,
        forest: CcssForest<T>,
        algo: Algo,
        opts: TtsvOptions,
    ) -> Result<Self, TtsvError> {
        check_forest(&forest, h)?;
        Ok(Self { h, algo, opts, forest: Some(forest), explicit: None })
    }

    pub fn algo(&self) -> Algo {
        self.algo
    }

    pub fn forest(&self) -> Option<&CcssForest<T>> {
        self.forest.as_ref()
    }

    pub fn apply(&self, b: &[T]) -> Result<TtsvReport<T>, TtsvError> {
        match self.algo {
            Algo::Aay => ttsv1_aay(self.h, b, self.opts),
            Algo::Direct => {
                ttsv1_ccss_direct(self.forest.as_ref().unwrap(), self.h, b, self.opts, ConvKind::Direct)
            }
            Algo::Fft => {
                ttsv1_ccss_direct(self.forest.as_ref().unwrap(), self.h, b, self.opts, ConvKind::Fft)
            }
            Algo::Memo => ttsv1_ccss_memo(self.forest.as_ref().unwrap(), self.h, b, self.opts),
            Algo::Oracle => {
                let start = Instant::now();
                check_input(self.h, b)?;
                let s = ttsv1_oracle(self.explicit.as_ref().unwrap(), b);
                Ok(finish(s, 0, Algo::Oracle, TtsvOptions { workers: 1, deterministic: true }, start))
            }
        }
    }
}
