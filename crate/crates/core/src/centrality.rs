//! H-eigenvector centrality via NQZ power iteration.
//!
//! Iterates x ← (TTSV1(x))^{[1/(N-1)]} normalized to unit 1-norm, tracking
//! per-coordinate Rayleigh-like quotients z_v / x_v^{N-1}; their min and max
//! bracket the dominant H-eigenvalue and the iteration stops when the
//! relative gap drops below the tolerance. Requires a connected hypergraph
//! with positive weights so the iterate stays strictly positive (the
//! Perron-Frobenius regime); callers can override the connectivity check.

use thiserror::Error;

use crate::hypergraph::Hypergraph;
use crate::scalar::Scalar;
use crate::ttsv::{Ttsv1Engine, TtsvError};

#[derive(Debug, Error)]
pub enum CentralityError {
    #[error("hypergraph is disconnected; the dominant H-eigenvector is not unique")]
    Disconnected,
    #[error("vertex {0} has no incident edge; its centrality is undefined")]
    IsolatedVertex(u32),
    #[error("rank {0} < 2: the H-eigenvalue problem needs tensor order >= 2")]
    RankTooSmall(usize),
    #[error(transparent)]
    Ttsv(#[from] TtsvError),
}

#[derive(Debug, Clone)]
pub struct CentralityResult<T> {
    /// Centrality vector, 1-norm 1, strictly positive.
    pub x: Vec<T>,
    /// Lower bracket of the dominant H-eigenvalue at the final iterate.
    pub lambda_min: T,
    /// Upper bracket of the dominant H-eigenvalue at the final iterate.
    pub lambda_max: T,
    /// Number of TTSV1 applications after the initial one.
    pub iterations: usize,
    /// False when `max_iters` was hit before the gap closed.
    pub converged: bool,
}

impl<T: Scalar> CentralityResult<T> {
    /// Midpoint estimate of the dominant H-eigenvalue.
    pub fn lambda(&self) -> T {
        (self.lambda_min + self.lambda_max) / (T::one() + T::one())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NqzOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Skip the connectivity requirement (the result may then depend on the
    /// starting vector).
    pub force: bool,
}

impl Default for NqzOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iters: 1000, force: false }
    }
}

/// NQZ iteration for the dominant H-eigenpair of the blowup tensor.
///
/// Returns `Ok` with `converged = false` when the iteration budget is
/// exhausted; structural preconditions are hard errors.
pub fn hec_nqz<T: Scalar>(
    h: &Hypergraph<T>,
    engine: &Ttsv1Engine<'_, T>,
    opts: NqzOptions,
) -> Result<CentralityResult<T>, CentralityError> {
    let n = h.n();
    let order = h.rank();
    if order < 2 {
        return Err(CentralityError::RankTooSmall(order));
    }
    let degrees = h.degrees();
    if let Some(v) = degrees.iter().position(|&d| d == T::zero()) {
        return Err(CentralityError::IsolatedVertex(v as u32));
    }
    if !opts.force && !h.is_connected() {
        return Err(CentralityError::Disconnected);
    }
    let tol = T::from_f64_lossy(opts.tol);
    let inv_exp = T::one() / T::from_usize(order - 1).unwrap();
    let floor = T::min_positive_value();

    let y = vec![T::one() / T::from_usize(n).unwrap(); n];
    let mut z = engine.apply(&y)?.s;
    let mut x = vec![T::zero(); n];
    let mut lambda_min = T::zero();
    let mut lambda_max = T::zero();
    for iter in 1..=opts.max_iters {
        for (xi, &zi) in x.iter_mut().zip(&z) {
            *xi = zi.max(floor).powf(inv_exp);
        }
        let norm: T = x.iter().copied().sum();
        for xi in x.iter_mut() {
            *xi = *xi / norm;
        }
        z = engine.apply(&x)?.s;
        lambda_min = T::infinity();
        lambda_max = T::zero();
        for (&zi, &xi) in z.iter().zip(&x) {
            let q = zi / xi.powi(order as i32 - 1).max(floor);
            lambda_min = lambda_min.min(q);
            lambda_max = lambda_max.max(q);
        }
        if (lambda_max - lambda_min) / lambda_min < tol {
            return Ok(CentralityResult { x, lambda_min, lambda_max, iterations: iter, converged: true });
        }
    }
    Ok(CentralityResult {
        x,
        lambda_min,
        lambda_max,
        iterations: opts.max_iters,
        converged: false,
    })
}

/// Max relative residual of the eigen equation: max_v |s_v - λ x_v^{N-1}|
/// / (λ x_v^{N-1}).
pub fn eig_residual<T: Scalar>(
    h: &Hypergraph<T>,
    engine: &Ttsv1Engine<'_, T>,
    x: &[T],
    lambda: T,
) -> Result<T, CentralityError> {
    let order = h.rank();
    let s = engine.apply(x)?.s;
    let mut worst = T::zero();
    for (&sv, &xv) in s.iter().zip(x) {
        let target = lambda * xv.powi(order as i32 - 1);
        let rel = (sv - target).abs() / target.abs().max(T::min_positive_value());
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{example_hypergraph, parse_hypergraph, Edge, GenSpec};
    use crate::ttsv::{Algo, TtsvOptions};

    type H = Hypergraph<f64>;

    fn run(h: &H, algo: Algo, opts: NqzOptions) -> Result<CentralityResult<f64>, CentralityError> {
        let engine = Ttsv1Engine::new(h, algo, TtsvOptions::default()).unwrap();
        hec_nqz(h, &engine, opts)
    }

    #[test]
    fn single_pair_edge() {
        let h: H = parse_hypergraph("1 2\n".as_bytes(), false).unwrap();
        let r = run(&h, Algo::Aay, NqzOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 0.5).abs() < 1e-9);
        assert!((r.x[1] - 0.5).abs() < 1e-9);
        // w = 2 spread over the 2 tuples: adjacency [[0,1],[1,0]], λ = 1.
        assert!((r.lambda() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn vertex_transitive_instance_is_uniform() {
        // 4-cycle of pair edges: every vertex equivalent.
        let h: H = parse_hypergraph("1 2\n2 3\n3 4\n1 4\n".as_bytes(), false).unwrap();
        let r = run(&h, Algo::Memo, NqzOptions::default()).unwrap();
        assert!(r.converged);
        for &xi in &r.x {
            assert!((xi - 0.25).abs() < 1e-8);
        }
    }

    #[test]
    fn example_converges_with_small_residual() {
        let h: H = example_hypergraph();
        let opts = NqzOptions { tol: 1e-10, ..Default::default() };
        let r = run(&h, Algo::Direct, opts).unwrap();
        assert!(r.converged);
        let engine = Ttsv1Engine::new(&h, Algo::Oracle, TtsvOptions::default()).unwrap();
        let res = eig_residual(&h, &engine, &r.x, r.lambda()).unwrap();
        assert!(res < 1e-8, "residual {res}");
        let norm: f64 = r.x.iter().sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn engines_agree_on_centrality() {
        let h: H = example_hypergraph();
        let opts = NqzOptions { tol: 1e-10, ..Default::default() };
        let reference = run(&h, Algo::Aay, opts).unwrap();
        for algo in [Algo::Direct, Algo::Fft, Algo::Memo] {
            let r = run(&h, algo, opts).unwrap();
            for (a, b) in reference.x.iter().zip(&r.x) {
                assert!((a - b).abs() < 1e-7, "{algo:?}");
            }
        }
    }

    #[test]
    fn weight_scaling_leaves_x_invariant() {
        let h: H = example_hypergraph();
        let scaled = H::new(
            h.n(),
            h.edges()
                .iter()
                .map(|e| Edge { vertices: e.vertices.clone(), weight: e.weight * 3.0 })
                .collect(),
        );
        let opts = NqzOptions { tol: 1e-10, ..Default::default() };
        let r1 = run(&h, Algo::Memo, opts).unwrap();
        let r2 = run(&scaled, Algo::Memo, opts).unwrap();
        for (a, b) in r1.x.iter().zip(&r2.x) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!((r2.lambda() / r1.lambda() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn disconnected_is_rejected_unless_forced() {
        let h: H = parse_hypergraph("1 2\n3 4\n".as_bytes(), false).unwrap();
        assert!(matches!(
            run(&h, Algo::Aay, NqzOptions::default()),
            Err(CentralityError::Disconnected)
        ));
        let forced = run(&h, Algo::Aay, NqzOptions { force: true, ..Default::default() }).unwrap();
        assert!(forced.converged);
    }

    #[test]
    fn isolated_vertex_is_rejected() {
        let h = H::new(3, vec![Edge::unit(vec![0, 1])]);
        assert!(matches!(
            run(&h, Algo::Aay, NqzOptions::default()),
            Err(CentralityError::IsolatedVertex(2))
        ));
    }

    #[test]
    fn iteration_budget_reports_not_converged() {
        let h: H = example_hypergraph();
        let r = run(&h, Algo::Aay, NqzOptions { max_iters: 1, ..Default::default() }).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn random_instances_self_consistent() {
        for seed in 0..5u64 {
            let spec = GenSpec { n: 12, m: 10, rank: 5, seed };
            let h: H = crate::hypergraph::generate_synthetic(&spec).unwrap();
            let engine = Ttsv1Engine::new(&h, Algo::Memo, TtsvOptions::default()).unwrap();
            let opts = NqzOptions { tol: 1e-8, force: true, ..Default::default() };
            match hec_nqz(&h, &engine, opts) {
                Ok(r) if r.converged => {
                    let res = eig_residual(&h, &engine, &r.x, r.lambda()).unwrap();
                    assert!(res < 1e-6, "seed {seed} residual {res}");
                }
                Ok(_) => {}
                Err(CentralityError::IsolatedVertex(_)) => {}
                Err(e) => panic!("seed {seed}: {e}"),
            }
        }
    }
}
