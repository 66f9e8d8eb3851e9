//! Truncated scaled-exponential coefficient vectors and their convolution.
//!
//! A [`CoeffVec`] of order N holds the coefficients of degrees 0..N-1 of a
//! polynomial, pre-scaled by reciprocal factorials as in E_N / Ē_N so that
//! intermediate magnitudes stay near 1 even for large orders. Convolution is
//! always truncated at degree N-1, which keeps every buffer at length N.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::combinatorics::MAX_ORDER;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenPolyError {
    #[error("order {0} exceeds the maximum supported order {max}", max = MAX_ORDER + 1)]
    OrderTooLarge(usize),
    #[error("coefficient vector orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
}

/// Coefficients of a degree-(N-1) truncated polynomial; entry d is the
/// coefficient of t^d.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVec<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> CoeffVec<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    /// The multiplicative identity [1, 0, ..., 0].
    pub fn unit(order: usize) -> Self {
        assert!(order >= 1);
        let mut coeffs = vec![T::zero(); order];
        coeffs[0] = T::one();
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of t^d.
    pub fn coeff(&self, d: usize) -> T {
        self.coeffs[d]
    }
}

fn check_order(order: usize) -> Result<(), GenPolyError> {
    // Degrees run to order-1, so the largest factorial needed is (order-1)!.
    if order == 0 || order - 1 > MAX_ORDER {
        Err(GenPolyError::OrderTooLarge(order))
    } else {
        Ok(())
    }
}

/// E_N(c) = [1, c, c²/2!, ..., c^{N-1}/(N-1)!].
pub fn e_vec<T: Scalar>(c: T, order: usize) -> Result<CoeffVec<T>, GenPolyError> {
    check_order(order)?;
    let mut coeffs = Vec::with_capacity(order);
    let mut term = T::one();
    coeffs.push(term);
    for d in 1..order {
        term = term * c / T::from_usize(d).unwrap();
        coeffs.push(term);
    }
    Ok(CoeffVec { coeffs })
}

/// Ē_N(c): E_N(c) with the constant term zeroed.
pub fn ebar_vec<T: Scalar>(c: T, order: usize) -> Result<CoeffVec<T>, GenPolyError> {
    let mut v = e_vec(c, order)?;
    v.coeffs[0] = T::zero();
    Ok(v)
}

/// Direct truncated convolution: (a ∗ b)[k] = Σ_{i=0}^{k} a[i]·b[k-i] for
/// k < N, degrees >= N discarded. O(N²).
pub fn conv_trunc<T: Scalar>(a: &CoeffVec<T>, b: &CoeffVec<T>) -> Result<CoeffVec<T>, GenPolyError> {
    let n = a.order();
    if b.order() != n {
        return Err(GenPolyError::OrderMismatch(n, b.order()));
    }
    let mut out = vec![T::zero(); n];
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == T::zero() {
            continue;
        }
        for (bj, o) in b.coeffs[..n - i].iter().zip(out[i..].iter_mut()) {
            *o += ai * *bj;
        }
    }
    Ok(CoeffVec { coeffs: out })
}

/// Iterated direct truncated product of a non-empty factor list.
pub fn conv_trunc_all<T: Scalar>(vecs: &[CoeffVec<T>]) -> Result<CoeffVec<T>, GenPolyError> {
    assert!(!vecs.is_empty());
    let mut acc = vecs[0].clone();
    for v in &vecs[1..] {
        acc = conv_trunc(&acc, v)?;
    }
    Ok(acc)
}

/// Below this product length a direct convolution beats the FFT round trip.
const FFT_CROSSOVER: usize = 64;

/// Reusable FFT workspace for truncated convolutions of one fixed order.
/// Plans and scratch buffers are intended to live per worker.
pub struct FftConvolver<T: Scalar> {
    order: usize,
    len: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    buf_a: Vec<Complex<T>>,
    buf_b: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Scalar> FftConvolver<T> {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        // Smallest power of two >= 2N: one pairwise product of two length-N
        // polynomials fits without circular wrap-around.
        let len = (2 * order).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            order,
            len,
            forward,
            inverse,
            buf_a: vec![Complex::new(T::zero(), T::zero()); len],
            buf_b: vec![Complex::new(T::zero(), T::zero()); len],
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// One truncated pairwise product via forward/inverse FFT.
    pub fn conv_pair(&mut self, a: &CoeffVec<T>, b: &CoeffVec<T>) -> Result<CoeffVec<T>, GenPolyError> {
        if a.order() != self.order {
            return Err(GenPolyError::OrderMismatch(self.order, a.order()));
        }
        if b.order() != self.order {
            return Err(GenPolyError::OrderMismatch(self.order, b.order()));
        }
        for (slot, &c) in self.buf_a.iter_mut().zip(a.coeffs.iter()) {
            *slot = Complex::new(c, T::zero());
        }
        for slot in self.buf_a.iter_mut().skip(self.order) {
            *slot = Complex::new(T::zero(), T::zero());
        }
        for (slot, &c) in self.buf_b.iter_mut().zip(b.coeffs.iter()) {
            *slot = Complex::new(c, T::zero());
        }
        for slot in self.buf_b.iter_mut().skip(self.order) {
            *slot = Complex::new(T::zero(), T::zero());
        }
        self.forward.process_with_scratch(&mut self.buf_a, &mut self.scratch);
        self.forward.process_with_scratch(&mut self.buf_b, &mut self.scratch);
        for (x, y) in self.buf_a.iter_mut().zip(self.buf_b.iter()) {
            *x = *x * *y;
        }
        self.inverse.process_with_scratch(&mut self.buf_a, &mut self.scratch);
        let scale = T::one() / T::from_usize(self.len).unwrap();
        let coeffs = self.buf_a[..self.order].iter().map(|c| c.re * scale).collect();
        Ok(CoeffVec { coeffs })
    }

    /// Truncated product of all factors, pairwise with truncation after each
    /// product. Falls back to direct convolution below the crossover, where
    /// the FFT round trip does not pay off.
    pub fn conv_list(&mut self, vecs: &[CoeffVec<T>]) -> Result<CoeffVec<T>, GenPolyError> {
        assert!(!vecs.is_empty());
        if vecs.len() * self.order <= FFT_CROSSOVER {
            return conv_trunc_all(vecs);
        }
        let mut acc = vecs[0].clone();
        for v in &vecs[1..] {
            acc = self.conv_pair(&acc, v)?;
        }
        Ok(acc)
    }
}

/// Truncated product of all polynomials in the list via FFT convolution.
pub fn conv_trunc_fft<T: Scalar>(vecs: &[CoeffVec<T>]) -> Result<CoeffVec<T>, GenPolyError> {
    assert!(!vecs.is_empty());
    let order = vecs[0].order();
    for v in vecs {
        if v.order() != order {
            return Err(GenPolyError::OrderMismatch(order, v.order()));
        }
    }
    FftConvolver::new(order).conv_list(vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: &CoeffVec<f64>, b: &CoeffVec<f64>, tol: f64) {
        assert_eq!(a.order(), b.order());
        let scale = b
            .coeffs()
            .iter()
            .fold(1.0f64, |m, &x| m.max(x.abs()));
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).abs() <= tol * scale, "{x} vs {y} (tol {tol})");
        }
    }

    #[test]
    fn e_vec_examples() {
        assert_eq!(e_vec(2.0, 3).unwrap().coeffs(), &[1.0, 2.0, 2.0]);
        assert_eq!(e_vec(0.0, 4).unwrap().coeffs(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            e_vec(1.0, 5).unwrap().coeffs(),
            &[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0]
        );
    }

    #[test]
    fn ebar_vec_examples() {
        assert_eq!(ebar_vec(2.0, 3).unwrap().coeffs(), &[0.0, 2.0, 2.0]);
        assert_eq!(ebar_vec(0.0, 3).unwrap().coeffs(), &[0.0, 0.0, 0.0]);
        let mut e = e_vec(1.7, 6).unwrap();
        e.coeffs[0] = 0.0;
        assert_eq!(ebar_vec(1.7, 6).unwrap(), e);
    }

    #[test]
    fn order_gate() {
        assert!(e_vec(1.0, 171).is_ok());
        assert!(matches!(e_vec(1.0, 172), Err(GenPolyError::OrderTooLarge(172))));
    }

    #[test]
    fn conv_trunc_examples() {
        // (1 + t) · t truncated at degree 2.
        let a = CoeffVec::from_coeffs(vec![1.0, 1.0, 0.0]);
        let b = CoeffVec::from_coeffs(vec![0.0, 1.0, 0.0]);
        assert_eq!(conv_trunc(&a, &b).unwrap().coeffs(), &[0.0, 1.0, 1.0]);

        let u = CoeffVec::unit(3);
        assert_eq!(conv_trunc(&a, &u).unwrap(), a);

        // (t + t²/2 + t³/6)² truncated at degree 3: [0, 0, 1, 1].
        let eb = ebar_vec(1.0, 4).unwrap();
        assert_eq!(conv_trunc(&eb, &eb).unwrap().coeffs(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn conv_trunc_order_mismatch() {
        let a: CoeffVec<f64> = CoeffVec::unit(3);
        let b: CoeffVec<f64> = CoeffVec::unit(4);
        assert!(matches!(conv_trunc(&a, &b), Err(GenPolyError::OrderMismatch(3, 4))));
    }

    #[test]
    fn fft_single_element_is_identity() {
        let a = e_vec(0.3, 5).unwrap();
        assert_close(&conv_trunc_fft(std::slice::from_ref(&a)).unwrap(), &a, 1e-12);
    }

    #[test]
    fn fft_matches_direct_on_examples() {
        let vecs = vec![e_vec(2.0, 3).unwrap(), ebar_vec(2.0, 3).unwrap()];
        let direct = conv_trunc(&vecs[0], &vecs[1]).unwrap();
        assert_close(&conv_trunc_fft(&vecs).unwrap(), &direct, 1e-10);

        for n in [4usize, 17, 33] {
            for k in [2usize, 3, 5] {
                let vecs: Vec<CoeffVec<f64>> =
                    (0..k).map(|_| ebar_vec(1.0, n).unwrap()).collect();
                let direct = conv_trunc_all(&vecs).unwrap();
                let fft = conv_trunc_fft(&vecs).unwrap();
                assert!((fft.coeff(n - 1) - direct.coeff(n - 1)).abs() <= 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn conv_commutes_and_associates(
            n in 1usize..=64,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let rand_vec = |rng: &mut rand_chacha::ChaCha8Rng| {
                CoeffVec::from_coeffs((0..n).map(|_| rng.gen_range(-10.0..10.0)).collect::<Vec<f64>>())
            };
            let a = rand_vec(&mut rng);
            let b = rand_vec(&mut rng);
            let c = rand_vec(&mut rng);
            let ab = conv_trunc(&a, &b).unwrap();
            let ba = conv_trunc(&b, &a).unwrap();
            assert_close(&ab, &ba, 1e-12);
            let ab_c = conv_trunc(&ab, &c).unwrap();
            let a_bc = conv_trunc(&a, &conv_trunc(&b, &c).unwrap()).unwrap();
            assert_close(&ab_c, &a_bc, 1e-12);
        }

        #[test]
        fn fft_agrees_with_direct(
            n in 1usize..=128,
            k in 1usize..=5,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let vecs: Vec<CoeffVec<f64>> = (0..k)
                .map(|_| CoeffVec::from_coeffs(
                    (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect::<Vec<f64>>(),
                ))
                .collect();
            let direct = conv_trunc_all(&vecs).unwrap();
            let fft = conv_trunc_fft(&vecs).unwrap();
            let scale = direct.coeffs().iter().fold(1.0f64, |m, &x| m.max(x.abs()));
            for (x, y) in fft.coeffs().iter().zip(direct.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn leading_coefficient_is_order_invariant(
            edge_size in 2usize..=7,
            order in 2usize..=9,
            seed in any::<u64>(),
        ) {
            // (N-1)! · [E(b_v) ∗ ⊛ Ē(b_u)][N-1] must not depend on the order
            // of the Ē factors.
            use rand::{Rng, SeedableRng};
            prop_assume!(edge_size <= order);
            let n = order;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let b: Vec<f64> = (0..edge_size).map(|_| rng.gen_range(0.1..2.0)).collect();
            let reference = {
                let mut acc = e_vec(b[0], n).unwrap();
                for &c in &b[1..] {
                    acc = conv_trunc(&acc, &ebar_vec(c, n).unwrap()).unwrap();
                }
                acc.coeff(n - 1)
            };
            // A few rotations of the Ē factors.
            for rot in 1..edge_size {
                let mut acc = e_vec(b[0], n).unwrap();
                for i in 0..edge_size - 1 {
                    let idx = 1 + (i + rot) % (edge_size - 1);
                    acc = conv_trunc(&acc, &ebar_vec(b[idx], n).unwrap()).unwrap();
                }
                let got = acc.coeff(n - 1);
                let scale = reference.abs().max(1e-30);
                prop_assert!((got - reference).abs() / scale < 1e-9);
            }
        }
    }
}
