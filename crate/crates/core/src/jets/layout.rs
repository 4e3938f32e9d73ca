//! Multi-indices and the graded-lexicographic coefficient layout shared by all
//! jets of a given `(dimension, order)`.
//!
//! Ordering: indices are sorted by total degree `|α|`, and within one degree
//! lexicographically *descending*, so for `n = 2` the layout reads
//! `(0,0) (1,0) (0,1) (2,0) (1,1) (0,2) ...`.  This order is part of the
//! serialization contract and must not change.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

/// A multi-index `α = (α₁, …, α_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The unit index `e_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! = α₁!⋯α_n!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    pub fn with(&self, axis: usize, value: u32) -> Self {
        let mut e = self.0.clone();
        e[axis] = value;
        MultiIndex(e)
    }

    pub fn plus(&self, other: &MultiIndex) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of coefficients of a jet: `C(n + m, m)`.
pub fn coefficient_count(dim: usize, order: usize) -> usize {
    binomial(dim + order, order).round() as usize
}

/// Precomputed indexing tables for one `(dimension, order)` pair.
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `(i, k, target)` for every pair with `|α_i| + |α_k| ≤ order`.
    products: Vec<(u32, u32, u32)>,
    /// `shifted[axis][i]` = position of `α_i + e_axis`, if still within order.
    shifted: Vec<Vec<Option<u32>>>,
}

impl Layout {
    fn build(dim: usize, order: usize) -> Self {
        let mut indices = Vec::with_capacity(coefficient_count(dim, order));
        for degree in 0..=order as u32 {
            let mut current = vec![0u32; dim];
            push_degree(&mut indices, &mut current, 0, degree);
        }
        let lookup: HashMap<MultiIndex, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (k, b) in indices.iter().enumerate() {
                if (a.order() + b.order()) as usize <= order {
                    let target = lookup[&a.plus(b)];
                    products.push((i as u32, k as u32, target as u32));
                }
            }
        }
        let shifted = (0..dim)
            .map(|axis| {
                indices
                    .iter()
                    .map(|a| {
                        lookup
                            .get(&a.with(axis, a.get(axis) + 1))
                            .map(|&p| p as u32)
                    })
                    .collect()
            })
            .collect();
        Layout {
            dim,
            order,
            indices,
            lookup,
            products,
            shifted,
        }
    }

    /// Shared, cached layout for `(dim, order)`.
    pub fn get(dim: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(layout) = cache.read().expect("layout cache poisoned").get(&(dim, order)) {
            return layout.clone();
        }
        let mut guard = cache.write().expect("layout cache poisoned");
        guard
            .entry((dim, order))
            .or_insert_with(|| Arc::new(Layout::build(dim, order)))
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub(crate) fn products(&self) -> &[(u32, u32, u32)] {
        &self.products
    }

    pub(crate) fn shifted(&self, axis: usize, i: usize) -> Option<usize> {
        self.shifted[axis][i].map(|p| p as usize)
    }
}

fn push_degree(out: &mut Vec<MultiIndex>, current: &mut [u32], axis: usize, remaining: u32) {
    if axis + 1 == current.len() {
        current[axis] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        current[axis] = a;
        push_degree(out, current, axis + 1, remaining - a);
    }
    current[axis] = 0;
}
