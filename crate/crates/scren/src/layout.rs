//! Tensor-product index bookkeeping: subsystem layouts, mixed-radix
//! encoding and party partitions.
//!
//! The product basis is mixed-radix row-major: party 0 is the most
//! significant digit, so `|j_0 j_1 … j_{n-1}⟩` maps to
//! `Σ_i j_i · Π_{k>i} d_k`.

use crate::error::{Error, Result};

/// Local dimensions of the parties of a tensor-product system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidLayout);
        }
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let total = strides[0] * dims[0];
        Ok(Self { dims, strides, total })
    }

    /// `n` parties of equal local dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, party: usize) -> usize {
        self.dims[party]
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn stride(&self, party: usize) -> usize {
        self.strides[party]
    }

    /// Digits of `index` in the layout's mixed radix, party 0 first.
    pub fn decode(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.total);
        let mut digits = Vec::with_capacity(self.dims.len());
        let mut rem = index;
        for &s in &self.strides {
            digits.push(rem / s);
            rem %= s;
        }
        digits
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| d * s)
            .sum()
    }

    /// Checks that `parties` is a non-empty duplicate-free set of valid
    /// party indices and returns it sorted ascending.
    pub fn checked_subset(&self, parties: &[usize]) -> Result<Vec<usize>> {
        if parties.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut sorted = parties.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateParty);
            }
        }
        if let Some(&max) = sorted.last() {
            if max >= self.n_parties() {
                return Err(Error::PartyOutOfRange {
                    index: max,
                    parties: self.n_parties(),
                });
            }
        }
        Ok(sorted)
    }

    /// Like [`checked_subset`](Self::checked_subset) but rejects the full
    /// party set.
    pub fn checked_proper_subset(&self, parties: &[usize]) -> Result<Vec<usize>> {
        let sorted = self.checked_subset(parties)?;
        if sorted.len() == self.n_parties() {
            return Err(Error::NotProperSubset);
        }
        Ok(sorted)
    }

    /// Ascending complement of a sorted subset.
    pub fn complement(&self, sorted_subset: &[usize]) -> Vec<usize> {
        (0..self.n_parties())
            .filter(|i| !sorted_subset.contains(i))
            .collect()
    }

    /// Layout restricted to the given parties, in the given order.
    pub fn sub_layout(&self, parties: &[usize]) -> Result<Self> {
        Self::new(parties.iter().map(|&i| self.dims[i]).collect())
    }
}

/// A partition of the parties into disjoint groups covering every party.
///
/// Each group is listed with its indices ascending; the order of the groups
/// determines the party order of the coarse-grained layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMap {
    groups: Vec<Vec<usize>>,
    n_parties: usize,
}

impl PartitionMap {
    pub fn new(groups: Vec<Vec<usize>>, n_parties: usize) -> Result<Self> {
        let mut seen = vec![false; n_parties];
        let mut covered = 0usize;
        for group in &groups {
            if group.is_empty() {
                return Err(Error::InvalidPartition);
            }
            for w in group.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidPartition);
                }
            }
            for &i in group {
                if i >= n_parties || seen[i] {
                    return Err(Error::InvalidPartition);
                }
                seen[i] = true;
                covered += 1;
            }
        }
        if covered != n_parties {
            return Err(Error::InvalidPartition);
        }
        Ok(Self { groups, n_parties })
    }

    /// The trivial partition where every party is its own group.
    pub fn singletons(n_parties: usize) -> Self {
        Self {
            groups: (0..n_parties).map(|i| vec![i]).collect(),
            n_parties,
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Size of the largest group.
    pub fn max_group_len(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_and_roundtrip() {
        let layout = SubsystemLayout::new(vec![2, 3, 2]).unwrap();
        assert_eq!(layout.total_dim(), 12);
        assert_eq!(layout.stride(0), 6);
        assert_eq!(layout.stride(1), 2);
        assert_eq!(layout.stride(2), 1);
        for idx in 0..12 {
            assert_eq!(layout.encode(&layout.decode(idx)), idx);
        }
        assert_eq!(layout.decode(7), vec![1, 0, 1]);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(SubsystemLayout::new(vec![]).is_err());
        assert!(SubsystemLayout::new(vec![2, 1]).is_err());
    }

    #[test]
    fn subset_validation() {
        let layout = SubsystemLayout::uniform(3, 2).unwrap();
        assert_eq!(layout.checked_subset(&[2, 0]).unwrap(), vec![0, 2]);
        assert!(layout.checked_subset(&[]).is_err());
        assert!(layout.checked_subset(&[1, 1]).is_err());
        assert!(layout.checked_subset(&[3]).is_err());
        assert!(layout.checked_proper_subset(&[0, 1, 2]).is_err());
        assert_eq!(layout.complement(&[0, 2]), vec![1]);
    }

    #[test]
    fn partition_validation() {
        assert!(PartitionMap::new(vec![vec![0], vec![1, 2]], 3).is_ok());
        assert!(PartitionMap::new(vec![vec![0], vec![2, 1]], 3).is_err());
        assert!(PartitionMap::new(vec![vec![0], vec![1]], 3).is_err());
        assert!(PartitionMap::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
        assert!(PartitionMap::new(vec![vec![0], vec![], vec![1, 2]], 3).is_err());
        let trivial = PartitionMap::singletons(4);
        assert_eq!(trivial.n_groups(), 4);
        assert_eq!(trivial.max_group_len(), 1);
    }
}
