//! Scalar abstraction for the numeric pipeline.
//!
//! All floating-point work in this crate is generic over [`Scalar`], which is
//! implemented for `f32` and `f64`. The trait adds two things on top of the
//! usual `num_traits` bounds: an associated atomic cell type used for
//! lock-free accumulation into shared output vectors, and FFT support via
//! `rustfft`.

use std::fmt;
use std::iter::Sum;
use std::ops::AddAssign;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

pub trait Scalar:
    Float
    + FftNum
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + Sum
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Atomic cell holding one value of `Self`, used for shared accumulation.
    type Atomic: Send + Sync;

    fn atomic_vec(len: usize) -> Vec<Self::Atomic>;

    /// Lock-free `*cell += delta` via compare-and-swap on the bit pattern.
    fn atomic_add(cell: &Self::Atomic, delta: Self);

    fn atomic_load(cell: &Self::Atomic) -> Self;

    /// Lossless conversion from `f64` where possible (used for factorials and
    /// precomputed scale factors).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from(v).expect("f64 conversion")
    }
}

macro_rules! impl_scalar {
    ($float:ty, $atomic:ty) => {
        impl Scalar for $float {
            type Atomic = $atomic;

            fn atomic_vec(len: usize) -> Vec<$atomic> {
                (0..len).map(|_| <$atomic>::new((0.0 as $float).to_bits())).collect()
            }

            fn atomic_add(cell: &$atomic, delta: $float) {
                let mut current = cell.load(Ordering::Relaxed);
                loop {
                    let next = (<$float>::from_bits(current) + delta).to_bits();
                    match cell.compare_exchange_weak(
                        current,
                        next,
                        Ordering::Relaxed,
                        Ordering::Relaxed,
                    ) {
                        Ok(_) => return,
                        Err(observed) => current = observed,
                    }
                }
            }

            fn atomic_load(cell: &$atomic) -> $float {
                <$float>::from_bits(cell.load(Ordering::Relaxed))
            }
        }
    };
}

impl_scalar!(f32, AtomicU32);
impl_scalar!(f64, AtomicU64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_add_accumulates() {
        let cells = f64::atomic_vec(2);
        f64::atomic_add(&cells[1], 1.5);
        f64::atomic_add(&cells[1], 2.25);
        assert_eq!(f64::atomic_load(&cells[0]), 0.0);
        assert_eq!(f64::atomic_load(&cells[1]), 3.75);
    }

    #[test]
    fn atomic_add_concurrent_updates_are_not_lost() {
        use std::sync::Arc;
        let cells = Arc::new(f64::atomic_vec(1));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let cells = Arc::clone(&cells);
                std::thread::spawn(move || {
                    for _ in 0..1000 {
                        f64::atomic_add(&cells[0], 1.0);
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(f64::atomic_load(&cells[0]), 8000.0);
    }
}
