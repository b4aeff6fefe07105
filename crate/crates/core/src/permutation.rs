//! Relabelling of bodies.

use alloc::vec::Vec;
use core::fmt;

/// A permutation `σ` of body labels, stored as images: `σ(i) = images[i]`.
///
/// Acting on a configuration it moves the body at label `i` to label `σ(i)`,
/// so `(σ·q)_a = q_{σ⁻¹(a)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    /// `None` unless `images` is a bijection of `0..n`.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        let mut seen = alloc::vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Permutation { images })
    }

    /// Swap of two (zero-based) labels.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Permutation { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Self {
        let mut inv = alloc::vec![0; self.n()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation { images: other.images.iter().map(|&j| self.images[j]).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.images[i] == i).collect()
    }

    /// Cycles of length at least two, each starting at its smallest label.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = alloc::vec![false; self.n()];
        let mut out = Vec::new();
        for start in 0..self.n() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.images[i];
            }
            out.push(cycle);
        }
        out
    }

    /// The swapped pair if this is a single transposition.
    pub fn as_transposition(&self) -> Option<(usize, usize)> {
        match self.cycles().as_slice() {
            [c] if c.len() == 2 => Some((c[0], c[1])),
            _ => None,
        }
    }

    /// Every permutation of `0..n`, identity first, in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut cur: Vec<usize> = (0..n).collect();
        let mut out = alloc::vec![Permutation { images: cur.clone() }];
        loop {
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                return out;
            };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
            cur.swap(i - 1, j);
            cur[i..].reverse();
            out.push(Permutation { images: cur.clone() });
        }
    }
}

/// Cycle notation with one-based labels, e.g. `(23)` or `(123)`; `id` for the
/// identity. Labels above 9 are comma separated.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("id");
        }
        let sep = if self.n() > 9 { "," } else { "" };
        for c in cycles {
            f.write_str("(")?;
            for (k, i) in c.iter().enumerate() {
                if k > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{}", i + 1)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn all_permutations_of_three() {
        let all = Permutation::all(3);
        assert_eq!(all.len(), 6);
        assert!(all[0].is_identity());
        for (i, p) in all.iter().enumerate() {
            for q in &all[i + 1..] {
                assert_ne!(p, q);
            }
            assert!(p.compose(&p.inverse()).is_identity());
        }
    }

    #[test]
    fn cycle_notation() {
        assert_eq!(Permutation::identity(3).to_string(), "id");
        assert_eq!(Permutation::transposition(3, 1, 2).to_string(), "(23)");
        let c = Permutation::from_images(alloc::vec![1, 2, 0]).unwrap();
        assert_eq!(c.to_string(), "(123)");
        assert_eq!(c.as_transposition(), None);
        assert_eq!(Permutation::transposition(3, 0, 1).as_transposition(), Some((0, 1)));
    }

    #[test]
    fn from_images_rejects_non_bijections() {
        assert!(Permutation::from_images(alloc::vec![0, 0, 1]).is_none());
        assert!(Permutation::from_images(alloc::vec![0, 3, 1]).is_none());
    }
}
