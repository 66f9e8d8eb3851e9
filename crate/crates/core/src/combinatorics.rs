//! Exact combinatorial quantities: factorials, Stirling numbers of the second
//! kind, and blowup-set sizes |β(e)| = |e|! · S(N, |e|).
//!
//! Counts are kept as exact `u128` integers wherever they fit and converted to
//! reals only at the point of the scale-factor division.

use thiserror::Error;

/// Largest tensor order with a finite double-precision factorial.
pub const MAX_ORDER: usize = 170;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CombinatoricsError {
    #[error("exact integer overflow computing {what}({n}, {k})")]
    Overflow { what: &'static str, n: usize, k: usize },
    #[error("order {0} exceeds the maximum supported order {MAX_ORDER}")]
    OrderTooLarge(usize),
}

/// Stirling number of the second kind S(n, k): partitions of an n-set into k
/// non-empty blocks. Computed by the recurrence S(n,k) = k·S(n-1,k) + S(n-1,k-1).
pub fn stirling2(n: usize, k: usize) -> Result<u128, CombinatoricsError> {
    assert!(k <= n, "stirling2 requires k <= n");
    if n == 0 {
        return Ok(1);
    }
    if k == 0 {
        return Ok(0);
    }
    // Rolling row of the Stirling triangle, columns 0..=k.
    let mut row = vec![0u128; k + 1];
    row[0] = 1; // S(0, 0)
    for m in 1..=n {
        for j in (1..=k.min(m)).rev() {
            row[j] = (j as u128)
                .checked_mul(row[j])
                .and_then(|t| t.checked_add(row[j - 1]))
                .ok_or(CombinatoricsError::Overflow { what: "stirling2", n, k })?;
        }
        row[0] = 0; // S(m, 0) = 0 for m >= 1
    }
    Ok(row[k])
}

/// |β(e)| for an edge of size `edge_size` in an order-`order` blowup tensor:
/// the number of length-`order` tuples over e whose support is exactly e,
/// equal to k! · S(N, k).
pub fn blowup_size(edge_size: usize, order: usize) -> Result<u128, CombinatoricsError> {
    assert!(
        edge_size >= 1 && edge_size <= order,
        "blowup_size requires 1 <= edge_size <= order"
    );
    let overflow = || CombinatoricsError::Overflow { what: "blowup_size", n: order, k: edge_size };
    let s = stirling2(order, edge_size).map_err(|_| overflow())?;
    let mut fact = 1u128;
    for i in 2..=edge_size as u128 {
        fact = fact.checked_mul(i).ok_or_else(overflow)?;
    }
    fact.checked_mul(s).ok_or_else(overflow)
}

/// Binomial coefficient C(n, k), saturating at `u128::MAX` instead of
/// overflowing (used only for storage accounting, where saturation keeps
/// the comparison direction correct).
pub fn binomial_sat(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc · (n - i) / (i + 1) stays integral at every step.
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// |β(e)| as a real, via the same recurrence carried in f64:
/// B(n,k) = k · (B(n-1,k) + B(n-1,k-1)). Usable beyond the exact-integer
/// range; errors if the value is not finite in double precision.
pub fn blowup_size_real(edge_size: usize, order: usize) -> Result<f64, CombinatoricsError> {
    assert!(
        edge_size >= 1 && edge_size <= order,
        "blowup_size_real requires 1 <= edge_size <= order"
    );
    if order > MAX_ORDER {
        return Err(CombinatoricsError::OrderTooLarge(order));
    }
    // Rolling row of B(·, j) for j = 0..=edge_size; B(0,0) = 1.
    let mut row = vec![0f64; edge_size + 1];
    row[0] = 1.0;
    for m in 1..=order {
        for j in (1..=edge_size.min(m)).rev() {
            row[j] = (j as f64) * (row[j] + row[j - 1]);
        }
        row[0] = 0.0;
    }
    let b = row[edge_size];
    if b.is_finite() {
        Ok(b)
    } else {
        Err(CombinatoricsError::Overflow { what: "blowup_size_real", n: order, k: edge_size })
    }
}

/// d! as a real; exact for d ≤ 22, correctly rounded beyond (the product is
/// accumulated in f64, whose error stays below one ulp over this range).
pub fn factorial_real(d: usize) -> Result<f64, CombinatoricsError> {
    if d > MAX_ORDER {
        return Err(CombinatoricsError::OrderTooLarge(d));
    }
    let mut acc = 1.0f64;
    for i in 2..=d {
        acc *= i as f64;
    }
    Ok(acc)
}

/// Precomputed |β(e)| lookup for a fixed tensor order N, one entry per edge
/// size 1..=N, with both the exact integer (when it fits in `u128`) and the
/// real value.
#[derive(Debug, Clone)]
pub struct BlowupTable {
    order: usize,
    exact: Vec<Option<u128>>,
    real: Vec<f64>,
}

impl BlowupTable {
    pub fn new(order: usize) -> Result<Self, CombinatoricsError> {
        assert!(order >= 1);
        if order > MAX_ORDER {
            return Err(CombinatoricsError::OrderTooLarge(order));
        }
        let mut exact = Vec::with_capacity(order);
        let mut real = Vec::with_capacity(order);
        for k in 1..=order {
            let e = blowup_size(k, order).ok();
            real.push(match e {
                Some(v) => v as f64,
                None => blowup_size_real(k, order)?,
            });
            exact.push(e);
        }
        Ok(Self { order, exact, real })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Exact |β(e)| for an edge of size `k`, when representable in `u128`.
    pub fn exact(&self, k: usize) -> Option<u128> {
        self.exact[k - 1]
    }

    pub fn real(&self, k: usize) -> f64 {
        self.real[k - 1]
    }
}
