use crate::error::{Error, Result};

/// A permutation of `0..n` carried in both directions.
///
/// `forward[new] = old` answers "which original index lands at position
/// `new`", and `inverse[old] = new` answers the reverse. Keeping both
/// avoids rebuilding the inverse at every use site; the constructor
/// guarantees they stay consistent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let forward: Vec<usize> = (0..n).collect();
        Self {
            inverse: forward.clone(),
            forward,
        }
    }

    /// Build from `forward[new] = old`. Rejects anything that is not a
    /// bijection on `0..n`.
    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (new, &old) in forward.iter().enumerate() {
            if old >= n {
                return Err(Error::Parameter(format!(
                    "permutation entry {old} out of range for length {n}"
                )));
            }
            if inverse[old] != usize::MAX {
                return Err(Error::Parameter(format!("permutation repeats index {old}")));
            }
            inverse[old] = new;
        }
        Ok(Self { forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Original index placed at position `new`.
    #[inline]
    pub fn old_of(&self, new: usize) -> usize {
        self.forward[new]
    }

    /// Position that original index `old` moves to.
    #[inline]
    pub fn new_of(&self, old: usize) -> usize {
        self.inverse[old]
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// The inverse permutation as its own object.
    pub fn inverted(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// Reorder a slice so that `out[new] = v[forward[new]]`.
    pub fn apply<T: Clone>(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.len() {
            return Err(Error::Dimension(format!(
                "permutation of length {} applied to slice of length {}",
                self.len(),
                v.len()
            )));
        }
        Ok(self.forward.iter().map(|&old| v[old].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_roundtrip() {
        let p = Permutation::identity(4);
        assert_eq!(p.old_of(2), 2);
        assert_eq!(p.new_of(2), 2);
        assert_eq!(p.apply(&[10, 20, 30, 40]).unwrap(), vec![10, 20, 30, 40]);
    }

    #[test]
    fn forward_inverse_consistency() {
        let p = Permutation::from_forward(vec![2, 0, 1]).unwrap();
        for new in 0..3 {
            assert_eq!(p.new_of(p.old_of(new)), new);
        }
        assert_eq!(p.inverse(), &[1, 2, 0]);
        let q = p.inverted();
        assert_eq!(q.forward(), &[1, 2, 0]);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_forward(vec![0, 0]).is_err());
        assert!(Permutation::from_forward(vec![0, 5]).is_err());
    }

    #[test]
    fn apply_reorders() {
        let p = Permutation::from_forward(vec![1, 2, 0]).unwrap();
        assert_eq!(p.apply(&['a', 'b', 'c']).unwrap(), vec!['b', 'c', 'a']);
    }
}
