//! Rankings, orderings, and the Kendall distance.
//!
//! A [`Ranking`] stores positions: `rank_of(i)` is the position of item `i`.
//! An [`Ordering`] stores items: `item_at(j)` is the item on position `j`.
//! Both are permutations of `{1, ..., K}` and items are 1-indexed on every
//! public surface.

use crate::error::{Error, Result};

/// A complete ranking in rank form: position of each item.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    ranks: Vec<usize>,
}

/// A complete ranking in order form: item on each position, best first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering {
    items: Vec<usize>,
}

fn check_permutation(values: &[usize]) -> Result<()> {
    let k = values.len();
    let mut seen = vec![false; k];
    for &v in values {
        if v == 0 || v > k || seen[v - 1] {
            return Err(Error::InvalidPermutation {
                k,
                values: values.to_vec(),
            });
        }
        seen[v - 1] = true;
    }
    Ok(())
}

impl Ranking {
    /// Builds a ranking from `ranks[k] = position of item k+1`.
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        check_permutation(&ranks)?;
        Ok(Self { ranks })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            ranks: (1..=k).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Position of item `item` (1-indexed).
    pub fn rank_of(&self, item: usize) -> usize {
        self.ranks[item - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.ranks
    }

    /// The associated ordering (inverse permutation).
    pub fn to_ordering(&self) -> Ordering {
        let k = self.ranks.len();
        let mut items = vec![0; k];
        for (item0, &rank) in self.ranks.iter().enumerate() {
            items[rank - 1] = item0 + 1;
        }
        Ordering { items }
    }
}

impl Ordering {
    /// Builds an ordering from `items[j] = item on position j+1`.
    pub fn new(items: Vec<usize>) -> Result<Self> {
        check_permutation(&items)?;
        Ok(Self { items })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            items: (1..=k).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Item on position `pos` (1-indexed).
    pub fn item_at(&self, pos: usize) -> usize {
        self.items[pos - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.items
    }

    /// The associated ranking (inverse permutation).
    pub fn to_ranking(&self) -> Ranking {
        let k = self.items.len();
        let mut ranks = vec![0; k];
        for (pos0, &item) in self.items.iter().enumerate() {
            ranks[item - 1] = pos0 + 1;
        }
        Ranking { ranks }
    }
}

impl std::fmt::Display for Ranking {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.ranks.iter().map(|r| r.to_string()).collect();
        write!(f, "[{}]", s.join(","))
    }
}

impl std::fmt::Display for Ordering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.items.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// Number of item pairs ordered oppositely by `a` and `b`.
pub fn kendall_distance(a: &Ranking, b: &Ranking) -> Result<u64> {
    let k = a.len();
    if b.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: b.len(),
        });
    }
    let mut d = 0u64;
    for i in 1..=k {
        for j in (i + 1)..=k {
            let sa = a.rank_of(i) < a.rank_of(j);
            let sb = b.rank_of(i) < b.rank_of(j);
            if sa != sb {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// Kendall distance divided by its maximum `K(K-1)/2`.
pub fn normalized_kendall_distance(a: &Ranking, b: &Ranking) -> Result<f64> {
    let k = a.len() as u64;
    let d = kendall_distance(a, b)?;
    if k < 2 {
        return Ok(0.0);
    }
    Ok(d as f64 / (k * (k - 1) / 2) as f64)
}

/// All orderings of `k` items, in lexicographic order. Intended for exact
/// enumeration at small `k` only.
pub fn all_orderings(k: usize) -> impl Iterator<Item = Ordering> {
    itertools::Itertools::permutations(1..=k, k).map(|items| Ordering { items })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_ordering_round_trip() {
        let r = Ranking::new(vec![2, 4, 3, 1, 5]).unwrap();
        let o = r.to_ordering();
        assert_eq!(o.as_slice(), &[4, 1, 3, 2, 5]);
        assert_eq!(o.to_ranking(), r);
    }

    #[test]
    fn identity_and_reversal_are_self_inverse() {
        let id = Ranking::new(vec![1, 2, 3]).unwrap();
        assert_eq!(id.to_ordering().as_slice(), &[1, 2, 3]);
        let rev = Ranking::new(vec![3, 2, 1]).unwrap();
        assert_eq!(rev.to_ordering().as_slice(), &[3, 2, 1]);
    }

    #[test]
    fn invalid_permutations_rejected() {
        assert!(Ranking::new(vec![1, 1, 3]).is_err());
        assert!(Ranking::new(vec![0, 1, 2]).is_err());
        assert!(Ranking::new(vec![1, 2, 4]).is_err());
        assert!(Ordering::new(vec![2, 2]).is_err());
    }

    #[test]
    fn kendall_examples() {
        let a = Ranking::new(vec![1, 2, 3]).unwrap();
        assert_eq!(kendall_distance(&a, &a).unwrap(), 0);
        let b = Ranking::new(vec![3, 2, 1]).unwrap();
        assert_eq!(kendall_distance(&a, &b).unwrap(), 3);
        let c = Ranking::new(vec![1, 2, 3, 4]).unwrap();
        let d = Ranking::new(vec![2, 1, 4, 3]).unwrap();
        assert_eq!(kendall_distance(&c, &d).unwrap(), 2);
    }

    #[test]
    fn kendall_dimension_mismatch() {
        let a = Ranking::new(vec![1, 2]).unwrap();
        let b = Ranking::new(vec![1, 2, 3]).unwrap();
        assert!(kendall_distance(&a, &b).is_err());
    }

    #[test]
    fn kendall_triangle_inequality_exhaustive_k3() {
        let rankings: Vec<Ranking> = all_orderings(3).map(|o| o.to_ranking()).collect();
        for a in &rankings {
            for b in &rankings {
                for c in &rankings {
                    let ab = kendall_distance(a, b).unwrap();
                    let bc = kendall_distance(b, c).unwrap();
                    let ac = kendall_distance(a, c).unwrap();
                    assert!(ac <= ab + bc);
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(all_orderings(4).count(), 24);
    }
}
