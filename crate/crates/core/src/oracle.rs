//! Explicit blowup-tensor construction and brute-force TTSV1.
//!
//! This is the trust anchor for the fast engines: tuples are enumerated and
//! stored one by one with no symmetry compression, and the product sum is
//! evaluated by plain nested summation, so the code shares no structure with
//! the generating-function paths it verifies. Desk scale only; guarded by
//! n^N <= 10^8.

use std::collections::HashMap;

use thiserror::Error;

use crate::combinatorics::{blowup_size_real, CombinatoricsError};
use crate::hypergraph::Hypergraph;
use crate::scalar::Scalar;

const TUPLE_GUARD: f64 = 1e8;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle guard exceeded: n^N = {actual:.3e} > {TUPLE_GUARD:.0e}")]
    OracleTooLarge { actual: f64 },
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
}

/// The order-N blowup tensor stored entry by entry: every length-N tuple
/// whose support is exactly some edge e carries w(e)/|β(e)|, summed over
/// duplicate edges.
#[derive(Debug, Clone)]
pub struct ExplicitBlowup<T> {
    n: usize,
    order: usize,
    entries: HashMap<Vec<u32>, T>,
}

impl<T: Scalar> ExplicitBlowup<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &HashMap<Vec<u32>, T> {
        &self.entries
    }

    pub fn value_sum(&self) -> T {
        self.entries.values().copied().sum()
    }
}

/// Enumerate, per edge, all |e|^N position assignments and keep the
/// surjective ones.
pub fn build_explicit<T: Scalar>(h: &Hypergraph<T>) -> Result<ExplicitBlowup<T>, OracleError> {
    let n = h.n();
    let order = h.rank();
    let actual = (n as f64).powi(order as i32);
    if actual > TUPLE_GUARD {
        return Err(OracleError::OracleTooLarge { actual });
    }
    let mut entries: HashMap<Vec<u32>, T> = HashMap::new();
    for edge in h.edges() {
        let k = edge.size();
        let value = edge.weight / T::from_f64_lossy(blowup_size_real(k, order)?);
        // Odometer over the k^N functions positions -> e.
        let mut digits = vec![0usize; order];
        loop {
            let mut used = vec![false; k];
            for &d in &digits {
                used[d] = true;
            }
            if used.iter().all(|&u| u) {
                let tuple: Vec<u32> = digits.iter().map(|&d| edge.vertices[d]).collect();
                *entries.entry(tuple).or_insert_with(T::zero) += value;
            }
            let mut pos = 0;
            loop {
                if pos == order {
                    break;
                }
                digits[pos] += 1;
                if digits[pos] < k {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == order {
                break;
            }
        }
    }
    Ok(ExplicitBlowup { n, order, entries })
}

/// Eq.-style brute-force TTSV1: s[i1] = Σ over stored tuples with first
/// coordinate i1 of value · Π b[i_k].
pub fn ttsv1_oracle<T: Scalar>(t: &ExplicitBlowup<T>, b: &[T]) -> Vec<T> {
    assert_eq!(b.len(), t.n, "vector length must equal vertex count");
    let mut s = vec![T::zero(); t.n];
    for (tuple, &value) in &t.entries {
        let mut product = T::one();
        for &i in &tuple[1..] {
            product = product * b[i as usize];
        }
        s[tuple[0] as usize] += value * product;
    }
    s
}
