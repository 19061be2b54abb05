//! Finite base sets and bitmask-encoded subsets.
//!
//! Elements of a universe of size `n` are labelled `1..=n`; element `i` is
//! bit `i - 1` of the mask. Subsets remember the size of the universe they
//! belong to and refuse to mix with subsets of a different universe.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_UNIVERSE: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("universe size must be in 1..={MAX_UNIVERSE}, got {0}")]
    InvalidUniverse(usize),
    #[error("subsets belong to different universes (sizes {0} and {1})")]
    UniverseMismatch(usize, usize),
    #[error("element {element} is outside the universe 1..={size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("mask {mask:#b} has bits beyond universe size {size}")]
    MaskOutOfRange { mask: u32, size: usize },
    #[error("nesting precondition violated: X \u{25b3} Y is not contained in X \u{25b3} Y~")]
    NotNested,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Universe(u8);

impl Universe {
    pub fn new(size: usize) -> Result<Self, SetError> {
        if (1..=MAX_UNIVERSE).contains(&size) {
            Ok(Universe(size as u8))
        } else {
            Err(SetError::InvalidUniverse(size))
        }
    }

    pub fn size(self) -> usize {
        self.0 as usize
    }

    /// Number of subsets, `2^n`.
    pub fn power_set_len(self) -> usize {
        1usize << self.0
    }

    pub fn full_mask(self) -> u32 {
        ((1u64 << self.0) - 1) as u32
    }

    pub fn empty(self) -> Subset {
        Subset { mask: 0, universe: self }
    }

    pub fn full(self) -> Subset {
        Subset { mask: self.full_mask(), universe: self }
    }

    pub fn subset(self, elements: &[usize]) -> Result<Subset, SetError> {
        Subset::from_elements(self, elements)
    }

    pub fn from_mask(self, mask: u32) -> Result<Subset, SetError> {
        Subset::from_mask(self, mask)
    }

    pub fn singleton(self, element: usize) -> Result<Subset, SetError> {
        Subset::from_elements(self, &[element])
    }

    /// Iterates all `2^n` subsets in ascending mask order.
    pub fn subsets(self) -> Subsets {
        enumerate_subsets(self)
    }

    pub fn elements(self) -> impl Iterator<Item = usize> {
        1..=self.size()
    }
}

impl TryFrom<usize> for Universe {
    type Error = SetError;

    fn try_from(value: usize) -> Result<Self, Self::Error> {
        Universe::new(value)
    }
}

impl From<Universe> for usize {
    fn from(u: Universe) -> usize {
        u.size()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subset {
    mask: u32,
    universe: Universe,
}

impl Subset {
    pub fn from_mask(universe: Universe, mask: u32) -> Result<Self, SetError> {
        if mask & !universe.full_mask() != 0 {
            return Err(SetError::MaskOutOfRange { mask, size: universe.size() });
        }
        Ok(Subset { mask, universe })
    }

    pub(crate) fn from_mask_unchecked(universe: Universe, mask: u32) -> Self {
        debug_assert_eq!(mask & !universe.full_mask(), 0);
        Subset { mask, universe }
    }

    pub fn from_elements(universe: Universe, elements: &[usize]) -> Result<Self, SetError> {
        let mut mask = 0u32;
        for &e in elements {
            if e == 0 || e > universe.size() {
                return Err(SetError::ElementOutOfRange { element: e, size: universe.size() });
            }
            mask |= 1 << (e - 1);
        }
        Ok(Subset { mask, universe })
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, element: usize) -> bool {
        element >= 1 && element <= self.universe.size() && self.mask & (1 << (element - 1)) != 0
    }

    /// Sorted element labels.
    pub fn elements(&self) -> Vec<usize> {
        (1..=self.universe.size()).filter(|&e| self.contains(e)).collect()
    }

    fn check(&self, other: &Subset) -> Result<(), SetError> {
        if self.universe != other.universe {
            Err(SetError::UniverseMismatch(self.universe.size(), other.universe.size()))
        } else {
            Ok(())
        }
    }

    pub fn union(&self, other: &Subset) -> Result<Subset, SetError> {
        self.check(other)?;
        Ok(Subset { mask: self.mask | other.mask, universe: self.universe })
    }

    pub fn intersection(&self, other: &Subset) -> Result<Subset, SetError> {
        self.check(other)?;
        Ok(Subset { mask: self.mask & other.mask, universe: self.universe })
    }

    pub fn difference(&self, other: &Subset) -> Result<Subset, SetError> {
        self.check(other)?;
        Ok(Subset { mask: self.mask & !other.mask, universe: self.universe })
    }

    pub fn symmetric_difference(&self, other: &Subset) -> Result<Subset, SetError> {
        symmetric_difference(self, other)
    }

    pub fn complement(&self) -> Subset {
        Subset { mask: !self.mask & self.universe.full_mask(), universe: self.universe }
    }

    pub fn is_subset_of(&self, other: &Subset) -> Result<bool, SetError> {
        self.check(other)?;
        Ok(self.mask & !other.mask == 0)
    }

    pub fn with(&self, element: usize) -> Result<Subset, SetError> {
        let single = Subset::from_elements(self.universe, &[element])?;
        self.union(&single)
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elements().into_iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// Subsets serialize as their sorted element list, e.g. `[1,3,4]`.
impl Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.elements().serialize(serializer)
    }
}

/// `(X ∪ Y) \ (X ∩ Y)`.
pub fn symmetric_difference(x: &Subset, y: &Subset) -> Result<Subset, SetError> {
    x.check(y)?;
    Ok(Subset { mask: x.mask ^ y.mask, universe: x.universe })
}

/// Region cardinalities for three sets `X`, `Y`, `Y~` with `X △ Y ⊆ X △ Y~`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreekCounts {
    /// `|X \ Y|`
    pub alpha: usize,
    /// `|Y \ Y~|`
    pub beta: usize,
    /// `|X ∩ Y~|`
    pub zeta: usize,
    /// `|Y \ X|`
    pub delta: usize,
    /// `|Y~ \ Y|`
    pub epsilon: usize,
    /// `|V \ (X ∪ Y~)|`
    pub eta: usize,
}

impl GreekCounts {
    pub fn total(&self) -> usize {
        self.alpha + self.beta + self.zeta + self.delta + self.epsilon + self.eta
    }
}

pub fn greek_decompose(x: &Subset, y: &Subset, y_tilde: &Subset) -> Result<GreekCounts, SetError> {
    x.check(y)?;
    x.check(y_tilde)?;
    let near = x.mask ^ y.mask;
    let far = x.mask ^ y_tilde.mask;
    if near & !far != 0 {
        return Err(SetError::NotNested);
    }
    let full = x.universe.full_mask();
    let count = |m: u32| m.count_ones() as usize;
    Ok(GreekCounts {
        alpha: count(x.mask & !y.mask),
        beta: count(y.mask & !y_tilde.mask),
        zeta: count(x.mask & y_tilde.mask),
        delta: count(y.mask & !x.mask),
        epsilon: count(y_tilde.mask & !y.mask),
        eta: count(full & !(x.mask | y_tilde.mask)),
    })
}

/// All subsets of `u` in ascending mask order.
pub fn enumerate_subsets(u: Universe) -> Subsets {
    Subsets { universe: u, next: 0, end: u.power_set_len() as u64 }
}

#[derive(Debug, Clone)]
pub struct Subsets {
    universe: Universe,
    next: u64,
    end: u64,
}

impl Iterator for Subsets {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        if self.next >= self.end {
            return None;
        }
        let s = Subset { mask: self.next as u32, universe: self.universe };
        self.next += 1;
        Some(s)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Subsets {}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: usize) -> Universe {
        Universe::new(n).unwrap()
    }

    #[test]
    fn universe_bounds() {
        assert!(Universe::new(0).is_err());
        assert!(Universe::new(25).is_err());
        assert_eq!(Universe::new(24).unwrap().power_set_len(), 1 << 24);
    }

    #[test]
    fn symmetric_difference_examples() {
        let v = u(4);
        let a = v.subset(&[1, 2]).unwrap();
        let b = v.subset(&[2, 3]).unwrap();
        assert_eq!(symmetric_difference(&a, &b).unwrap().elements(), vec![1, 3]);
        assert!(symmetric_difference(&a, &a).unwrap().is_empty());
        assert_eq!(symmetric_difference(&a, &v.empty()).unwrap(), a);
    }

    #[test]
    fn cross_universe_is_an_error() {
        let a = u(3).subset(&[1]).unwrap();
        let b = u(4).subset(&[1]).unwrap();
        assert_eq!(symmetric_difference(&a, &b), Err(SetError::UniverseMismatch(3, 4)));
        assert!(a.union(&b).is_err());
    }

    #[test]
    fn element_validation() {
        assert!(u(3).subset(&[0]).is_err());
        assert!(u(3).subset(&[4]).is_err());
        assert!(Subset::from_mask(u(3), 0b1000).is_err());
        assert_eq!(u(3).subset(&[3, 1, 3]).unwrap().mask(), 0b101);
    }

    #[test]
    fn greek_counts_examples() {
        let v = u(6);
        let x = v.subset(&[1, 2, 3]).unwrap();
        let y = v.subset(&[2, 3, 4]).unwrap();
        let yt = v.subset(&[3, 4, 5]).unwrap();
        let g = greek_decompose(&x, &y, &yt).unwrap();
        assert_eq!(
            g,
            GreekCounts { alpha: 1, beta: 1, zeta: 1, delta: 1, epsilon: 1, eta: 1 }
        );

        let v = u(3);
        let e = v.empty();
        assert_eq!(
            greek_decompose(&e, &e, &e).unwrap(),
            GreekCounts { alpha: 0, beta: 0, zeta: 0, delta: 0, epsilon: 0, eta: 3 }
        );
        let f = v.full();
        assert_eq!(
            greek_decompose(&f, &f, &f).unwrap(),
            GreekCounts { alpha: 0, beta: 0, zeta: 3, delta: 0, epsilon: 0, eta: 0 }
        );
    }

    #[test]
    fn greek_rejects_unnested() {
        let v = u(3);
        let x = v.subset(&[1]).unwrap();
        let y = v.subset(&[2]).unwrap();
        let yt = v.subset(&[1]).unwrap();
        assert_eq!(greek_decompose(&x, &y, &yt), Err(SetError::NotNested));
    }

    #[test]
    fn enumeration_order() {
        let got: Vec<Vec<usize>> = enumerate_subsets(u(1)).map(|s| s.elements()).collect();
        assert_eq!(got, vec![vec![], vec![1]]);
        let got: Vec<Vec<usize>> = enumerate_subsets(u(2)).map(|s| s.elements()).collect();
        assert_eq!(got, vec![vec![], vec![1], vec![2], vec![1, 2]]);
        let all: Vec<Subset> = enumerate_subsets(u(3)).collect();
        assert_eq!(all.len(), 8);
        assert!(all[0].is_empty());
        assert_eq!(all[7].elements(), vec![1, 2, 3]);
    }

    #[test]
    fn serializes_as_sorted_list() {
        let s = u(5).subset(&[4, 1, 3]).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,3,4]");
        assert_eq!(s.to_string(), "{1,3,4}");
    }
}
