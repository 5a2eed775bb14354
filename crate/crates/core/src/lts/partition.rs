use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rel::Relation;

/// An equivalence relation on `0..n`, stored as a class index per state.
///
/// Class indices are contiguous from 0 and numbered in order of each class's
/// lowest member.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    class_of: Vec<usize>,
    num_classes: usize,
}

impl Partition {
    /// Normalises arbitrary class labels.
    pub fn from_labels<K: std::hash::Hash + Eq>(labels: impl IntoIterator<Item = K>) -> Self {
        let mut ids = HashMap::new();
        let class_of: Vec<usize> = labels
            .into_iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Partition { num_classes: ids.len(), class_of }
    }

    pub fn from_classes(n: usize, classes: &[Vec<usize>]) -> Result<Self> {
        let mut label = vec![usize::MAX; n];
        for (c, members) in classes.iter().enumerate() {
            for &x in members {
                if x >= n {
                    return Err(Error::NotAPartition(format!("state {x} out of range")));
                }
                if label[x] != usize::MAX {
                    return Err(Error::NotAPartition(format!("state {x} in two classes")));
                }
                label[x] = c;
            }
        }
        if let Some(x) = label.iter().position(|&c| c == usize::MAX) {
            return Err(Error::NotAPartition(format!("state {x} is in no class")));
        }
        Ok(Self::from_labels(label))
    }

    /// Every state alone.
    pub fn finest(n: usize) -> Self {
        Self::from_labels(0..n)
    }

    /// A single class.
    pub fn coarsest(n: usize) -> Self {
        Self::from_labels(std::iter::repeat_n(0, n))
    }

    /// The equivalence generated by an endo-relation.
    pub fn from_relation(r: &Relation) -> Result<Self> {
        if !r.is_endo() {
            return Err(Error::NotAPartition("relation is not an endo-relation".into()));
        }
        let n = r.domain();
        let closure = r.union(&r.converse())?.rtc()?;
        Ok(Self::from_labels((0..n).map(|x| closure.successors(x).next().unwrap_or(x))))
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn class_indices(&self) -> &[usize] {
        &self.class_of
    }

    pub fn same_class(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.num_classes];
        for (x, &c) in self.class_of.iter().enumerate() {
            classes[c].push(x);
        }
        classes
    }

    pub fn to_relation(&self) -> Relation {
        let n = self.len();
        let mut r = Relation::empty(n, n);
        for members in self.classes() {
            for &x in &members {
                for &y in &members {
                    r.insert(x, y).expect("members are in range");
                }
            }
        }
        r
    }

    /// The partition with classes `a` and `b` merged.
    pub fn merge(&self, a: usize, b: usize) -> Self {
        Self::from_labels(self.class_of.iter().map(|&c| if c == b { a } else { c }))
    }

    /// Whether every class of `self` lies inside a class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.len() == coarser.len()
            && (0..self.len()).all(|x| {
                (0..self.len()).all(|y| !self.same_class(x, y) || coarser.same_class(x, y))
            })
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition")?;
        f.debug_list().entries(self.classes()).finish()
    }
}
