use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A finitely supported probability distribution, kept as a weighted list.
///
/// Entries are not merged on construction, so distributions over values
/// without an ordering (such as distributions themselves) can be built and
/// flattened. Comparison merges equal values first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution<V> {
    support: Vec<(V, f64)>,
}

impl<V> Distribution<V> {
    pub fn from_weights(support: Vec<(V, f64)>) -> Self {
        Distribution { support }
    }

    /// `η(x) = 1x`.
    pub fn point(x: V) -> Self {
        Distribution {
            support: vec![(x, 1.0)],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&V, f64)> {
        self.support.iter().map(|(v, p)| (v, *p))
    }

    pub fn total_mass(&self) -> f64 {
        self.support.iter().map(|(_, p)| p).sum()
    }

    pub fn map<W>(&self, f: impl Fn(&V) -> W) -> Distribution<W> {
        Distribution {
            support: self.support.iter().map(|(v, p)| (f(v), *p)).collect(),
        }
    }
}

impl<V: Clone> Distribution<Distribution<V>> {
    /// `μ(Σᵢ pᵢ (Σⱼ qᵢⱼ xᵢⱼ)) = Σᵢⱼ pᵢ qᵢⱼ xᵢⱼ`.
    pub fn flatten(&self) -> Distribution<V> {
        let support = self
            .support
            .iter()
            .flat_map(|(inner, p)| inner.support.iter().map(move |(x, q)| (x.clone(), p * q)))
            .collect();
        Distribution { support }
    }
}

impl<V: Clone + Ord> Distribution<V> {
    /// Total weight per distinct value.
    pub fn merged(&self) -> BTreeMap<V, f64> {
        let mut out = BTreeMap::new();
        for (v, p) in &self.support {
            *out.entry(v.clone()).or_insert(0.0) += p;
        }
        out
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let a = self.merged();
        let b = other.merged();
        a.keys()
            .chain(b.keys())
            .all(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs() <= tol)
    }
}
