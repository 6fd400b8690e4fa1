//! The base vector space: dimension, basis labels, orientations, parities,
//! and the index-tuple combinatorics shared by every graded object.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parity of a graded object: even quantities ignore the ambient orientation,
/// odd quantities flip sign when the orientation is reversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity of a product: even unless exactly one factor is odd.
    pub fn product(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Whether a graded element lives in the covector or the vector side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Covector,
    Vector,
}

/// Descriptor of the model space: dimension `m >= 1` and the label of the
/// first basis element (1 for the generic algebra, 0 in Minkowski mode).
/// The reference orientation is the one attached to the listed basis order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    dim: usize,
    label_base: usize,
}

impl SpaceDescriptor {
    /// Generic m-dimensional space with basis labels 1..=m.
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { dim, label_base: 1 })
    }

    /// Four-dimensional space with basis labels 0..=3.
    pub fn minkowski() -> Self {
        Self { dim: 4, label_base: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label_base(&self) -> usize {
        self.label_base
    }

    /// Basis labels in order, e.g. `[1, 2, 3]` or `[0, 1, 2, 3]`.
    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).map(move |p| p + self.label_base)
    }

    /// Converts a basis label to its 0-based position.
    pub fn position(&self, label: usize) -> Result<usize> {
        let p = label
            .checked_sub(self.label_base)
            .ok_or(Error::LabelOutOfRange { label, dim: self.dim })?;
        if p >= self.dim {
            return Err(Error::LabelOutOfRange { label, dim: self.dim });
        }
        Ok(p)
    }

    pub fn same_space(&self, other: &SpaceDescriptor) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

/// One of the two orientations of the space, recorded relative to the
/// descriptor's reference orientation. `P` swaps the two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Reference,
    Opposite,
}

impl Orientation {
    /// The parity action `P`; an involution.
    pub fn swap(self) -> Orientation {
        match self {
            Orientation::Reference => Orientation::Opposite,
            Orientation::Opposite => Orientation::Reference,
        }
    }

    /// Sign picked up by odd quantities when evaluated at this orientation.
    pub fn odd_sign(self) -> f64 {
        match self {
            Orientation::Reference => 1.0,
            Orientation::Opposite => -1.0,
        }
    }
}

/// Binomial coefficient, desk scale.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All strictly increasing q-tuples of 0-based positions in `0..m`,
/// lexicographically ordered. The empty tuple is the single grade-0 tuple.
pub fn index_tuples(m: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(m, q));
    let mut current = Vec::with_capacity(q);
    fn rec(m: usize, q: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == q {
            out.push(current.clone());
            return;
        }
        for p in start..m {
            current.push(p);
            rec(m, q, p + 1, current, out);
            current.pop();
        }
    }
    rec(m, q, 0, &mut current, &mut out);
    out
}

/// Lexicographic rank of a strictly increasing tuple among `index_tuples(m, q)`.
pub fn tuple_rank(m: usize, tuple: &[usize]) -> usize {
    let q = tuple.len();
    let mut rank = 0;
    let mut prev = 0;
    for (i, &p) in tuple.iter().enumerate() {
        for skipped in prev..p {
            rank += binomial(m - skipped - 1, q - i - 1);
        }
        prev = p + 1;
    }
    rank
}

/// Normalizes an arbitrary tuple of positions to (sign, increasing tuple);
/// `None` when an index repeats (the element is zero).
pub fn sort_with_sign(tuple: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut v = tuple.to_vec();
    let mut sign = 1.0;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((sign, v))
}

/// Sign of the shuffle placing sorted `left` before sorted `right`, together
/// with the merged tuple; `None` when the tuples intersect.
pub fn merge_with_sign(left: &[usize], right: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut merged = Vec::with_capacity(left.len() + right.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        if left[i] == right[j] {
            return None;
        }
        if left[i] < right[j] {
            merged.push(left[i]);
            i += 1;
        } else {
            // right[j] jumps over the remaining left entries
            inversions += left.len() - i;
            merged.push(right[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&left[i..]);
    merged.extend_from_slice(&right[j..]);
    let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, merged))
}

/// Complementary increasing tuple inside `0..m`.
pub fn complement(m: usize, tuple: &[usize]) -> Vec<usize> {
    (0..m).filter(|p| !tuple.contains(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_swap_is_involution() {
        for o in [Orientation::Reference, Orientation::Opposite] {
            assert_eq!(o.swap().swap(), o);
        }
    }

    #[test]
    fn descriptor_rejects_zero_dimension() {
        assert!(matches!(SpaceDescriptor::new(0), Err(Error::ZeroDimension)));
    }

    #[test]
    fn minkowski_labels_start_at_zero() {
        let s = SpaceDescriptor::minkowski();
        assert_eq!(s.labels().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(s.position(0).unwrap(), 0);
        assert!(s.position(4).is_err());
    }

    #[test]
    fn tuple_rank_matches_enumeration_order() {
        for m in 1..=5 {
            for q in 0..=m {
                for (r, t) in index_tuples(m, q).iter().enumerate() {
                    assert_eq!(tuple_rank(m, t), r, "m={m} q={q} t={t:?}");
                }
            }
        }
    }

    #[test]
    fn merge_sign_counts_transpositions() {
        // (1,2) before (0): 0 jumps over two entries
        let (sign, merged) = merge_with_sign(&[1, 2], &[0]).unwrap();
        assert_eq!(merged, vec![0, 1, 2]);
        assert_eq!(sign, 1.0);
        let (sign, _) = merge_with_sign(&[1], &[0]).unwrap();
        assert_eq!(sign, -1.0);
        assert!(merge_with_sign(&[0, 1], &[1]).is_none());
    }

    #[test]
    fn sort_with_sign_detects_repeats() {
        assert!(sort_with_sign(&[2, 2]).is_none());
        let (sign, sorted) = sort_with_sign(&[2, 0, 1]).unwrap();
        assert_eq!(sorted, vec![0, 1, 2]);
        assert_eq!(sign, 1.0);
    }
}
