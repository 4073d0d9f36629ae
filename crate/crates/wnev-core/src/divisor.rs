//! Zero/pole divisors and lazily enumerable divisor streams.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisorKind {
    Zero,
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divisor {
    pub location: Complex64,
    pub multiplicity: u32,
    pub kind: DivisorKind,
}

/// Relative tolerance under which two declared locations are merged.
pub const MERGE_TOL: f64 = 1e-9;

/// A divisor set enumerable by increasing modulus up to any radius.
///
/// `enumerate(r)` is monotone in `r`, sorted by modulus, and merges
/// coincident locations by summing multiplicities.
#[derive(Clone)]
pub struct DivisorStream {
    gen: Arc<dyn Fn(f64) -> Vec<Divisor> + Send + Sync>,
    pub convergence_exponent: f64,
}

impl DivisorStream {
    pub fn new<F>(convergence_exponent: f64, gen: F) -> Self
    where
        F: Fn(f64) -> Vec<Divisor> + Send + Sync + 'static,
    {
        DivisorStream {
            gen: Arc::new(gen),
            convergence_exponent,
        }
    }

    pub fn empty() -> Self {
        DivisorStream::new(0.0, |_| Vec::new())
    }

    pub fn from_list(divisors: Vec<Divisor>) -> Self {
        DivisorStream::new(0.0, move |r| {
            divisors
                .iter()
                .copied()
                .filter(|d| d.location.norm() <= r)
                .collect()
        })
    }

    pub fn enumerate(&self, r: f64) -> Vec<Divisor> {
        let mut list = (self.gen)(r);
        list.retain(|d| d.location.norm() <= r);
        list.sort_by(|a, b| {
            a.location
                .norm()
                .partial_cmp(&b.location.norm())
                .unwrap()
                .then(a.location.re.partial_cmp(&b.location.re).unwrap())
                .then(a.location.im.partial_cmp(&b.location.im).unwrap())
        });
        // merge duplicates (same location within relative tolerance)
        let mut merged: Vec<Divisor> = Vec::with_capacity(list.len());
        for d in list {
            if let Some(last) = merged.last_mut() {
                let scale = 1.0 + last.location.norm();
                if (last.location - d.location).norm() < MERGE_TOL * scale && last.kind == d.kind {
                    last.multiplicity += d.multiplicity;
                    continue;
                }
            }
            merged.push(d);
        }
        merged
    }

    /// Total multiplicity within |x| <= r.
    pub fn count(&self, r: f64) -> u64 {
        self.enumerate(r)
            .iter()
            .map(|d| d.multiplicity as u64)
            .sum()
    }
}
