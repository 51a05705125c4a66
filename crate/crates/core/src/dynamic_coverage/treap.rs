//! Treap on real keys: binary search tree on key, min-heap on priority.

use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreapError {
    #[error("key {0} already present")]
    DuplicateKey(f64),
    #[error("key {0} not present")]
    MissingKey(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreapNode {
    pub key: f64,
    pub priority: f64,
    pub left: Option<Box<TreapNode>>,
    pub right: Option<Box<TreapNode>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Treap {
    pub root: Option<Box<TreapNode>>,
    len: usize,
}

type Link = Option<Box<TreapNode>>;

fn rotate_right(mut n: Box<TreapNode>) -> Box<TreapNode> {
    let mut l = n.left.take().expect("left child");
    n.left = l.right.take();
    l.right = Some(n);
    l
}

fn rotate_left(mut n: Box<TreapNode>) -> Box<TreapNode> {
    let mut r = n.right.take().expect("right child");
    n.right = r.left.take();
    r.left = Some(n);
    r
}

fn insert(link: Link, key: f64, priority: f64) -> Result<Box<TreapNode>, TreapError> {
    let Some(mut n) = link else {
        return Ok(Box::new(TreapNode {
            key,
            priority,
            left: None,
            right: None,
        }));
    };
    match key.total_cmp(&n.key) {
        Ordering::Equal => return Err(TreapError::DuplicateKey(key)),
        Ordering::Less => {
            n.left = Some(insert(n.left.take(), key, priority)?);
            if n.left.as_ref().unwrap().priority < n.priority {
                n = rotate_right(n);
            }
        }
        Ordering::Greater => {
            n.right = Some(insert(n.right.take(), key, priority)?);
            if n.right.as_ref().unwrap().priority < n.priority {
                n = rotate_left(n);
            }
        }
    }
    Ok(n)
}

/// Rotates the node down until it is a leaf, then drops it.
fn remove_root(mut n: Box<TreapNode>) -> Link {
    match (&n.left, &n.right) {
        (None, None) => None,
        (Some(_), None) => n.left.take(),
        (None, Some(_)) => n.right.take(),
        (Some(l), Some(r)) => {
            if l.priority < r.priority {
                let mut top = rotate_right(n);
                top.right = remove_root(top.right.take().unwrap());
                Some(top)
            } else {
                let mut top = rotate_left(n);
                top.left = remove_root(top.left.take().unwrap());
                Some(top)
            }
        }
    }
}

fn delete(link: Link, key: f64) -> Result<Link, TreapError> {
    let Some(mut n) = link else {
        return Err(TreapError::MissingKey(key));
    };
    match key.total_cmp(&n.key) {
        Ordering::Equal => Ok(remove_root(n)),
        Ordering::Less => {
            n.left = delete(n.left.take(), key)?;
            Ok(Some(n))
        }
        Ordering::Greater => {
            n.right = delete(n.right.take(), key)?;
            Ok(Some(n))
        }
    }
}

impl Treap {
    pub fn new() -> Self {
        Treap::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, key: f64, priority: f64) -> Result<(), TreapError> {
        if self.contains(key) {
            return Err(TreapError::DuplicateKey(key));
        }
        self.root = Some(insert(self.root.take(), key, priority)?);
        self.len += 1;
        Ok(())
    }

    pub fn delete(&mut self, key: f64) -> Result<(), TreapError> {
        if !self.contains(key) {
            return Err(TreapError::MissingKey(key));
        }
        self.root = delete(self.root.take(), key)?;
        self.len -= 1;
        Ok(())
    }

    pub fn contains(&self, key: f64) -> bool {
        let mut cur = &self.root;
        while let Some(n) = cur {
            match key.total_cmp(&n.key) {
                Ordering::Equal => return true,
                Ordering::Less => cur = &n.left,
                Ordering::Greater => cur = &n.right,
            }
        }
        false
    }

    pub fn root_key(&self) -> Option<f64> {
        self.root.as_ref().map(|n| n.key)
    }

    /// Depth of the node holding `key`, root at depth 0.
    pub fn depth_of(&self, key: f64) -> Option<usize> {
        let mut cur = &self.root;
        let mut d = 0;
        while let Some(n) = cur {
            match key.total_cmp(&n.key) {
                Ordering::Equal => return Some(d),
                Ordering::Less => cur = &n.left,
                Ordering::Greater => cur = &n.right,
            }
            d += 1;
        }
        None
    }

    pub fn in_order(&self) -> Vec<(f64, f64)> {
        fn walk(n: &Link, out: &mut Vec<(f64, f64)>) {
            if let Some(n) = n {
                walk(&n.left, out);
                out.push((n.key, n.priority));
                walk(&n.right, out);
            }
        }
        let mut out = Vec::with_capacity(self.len);
        walk(&self.root, &mut out);
        out
    }

    pub fn mean_depth(&self) -> f64 {
        fn walk(n: &Link, d: usize, acc: &mut (usize, usize)) {
            if let Some(n) = n {
                acc.0 += d;
                acc.1 += 1;
                walk(&n.left, d + 1, acc);
                walk(&n.right, d + 1, acc);
            }
        }
        let mut acc = (0, 0);
        walk(&self.root, 0, &mut acc);
        if acc.1 == 0 {
            0.0
        } else {
            acc.0 as f64 / acc.1 as f64
        }
    }

    /// Checks key order and the heap property.
    pub fn is_valid(&self) -> bool {
        fn check(n: &Link, lo: f64, hi: f64) -> bool {
            match n {
                None => true,
                Some(n) => {
                    n.key > lo
                        && n.key < hi
                        && [&n.left, &n.right]
                            .iter()
                            .all(|c| c.as_ref().map_or(true, |c| c.priority >= n.priority))
                        && check(&n.left, lo, n.key)
                        && check(&n.right, n.key, hi)
                }
            }
        }
        check(&self.root, f64::NEG_INFINITY, f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn six_keys() -> Treap {
        let mut t = Treap::new();
        for (k, p) in [(10.0, 0.3), (30.0, 0.13), (50.0, 0.4), (70.0, 0.22), (90.0, 0.56), (110.0, 0.43)] {
            t.insert(k, p).unwrap();
        }
        t
    }

    #[test]
    fn six_point_example() {
        let t = six_keys();
        assert_eq!(t.root_key(), Some(30.0));
        assert!(t.is_valid());
        let keys: Vec<f64> = t.in_order().iter().map(|e| e.0).collect();
        assert_eq!(keys, vec![10.0, 30.0, 50.0, 70.0, 90.0, 110.0]);
    }

    #[test]
    fn adding_130_rotates_above_110_and_90() {
        let mut t = six_keys();
        assert!(t.depth_of(130.0).is_none());
        t.insert(130.0, 0.2).unwrap();
        assert!(t.is_valid());
        assert!(t.depth_of(130.0).unwrap() < t.depth_of(110.0).unwrap());
        assert!(t.depth_of(130.0).unwrap() < t.depth_of(90.0).unwrap());
        // 130 now sits directly under the root, above 70's old subtree
        assert_eq!(t.depth_of(130.0), Some(1));
        assert_eq!(t.depth_of(70.0), Some(2));
    }

    #[test]
    fn delete_inverts_insert() {
        let before = six_keys();
        let mut t = before.clone();
        t.insert(130.0, 0.2).unwrap();
        t.delete(130.0).unwrap();
        assert_eq!(t, before);
    }

    #[test]
    fn key_errors() {
        let mut t = six_keys();
        assert_eq!(t.insert(50.0, 0.9), Err(TreapError::DuplicateKey(50.0)));
        assert_eq!(t.delete(51.0), Err(TreapError::MissingKey(51.0)));
        assert_eq!(t.len(), 6);
    }

    proptest! {
        #[test]
        fn random_operations_keep_invariants(ops in proptest::collection::vec((0u32..200, 0.0f64..1.0, any::<bool>()), 1..300)) {
            let mut t = Treap::new();
            let mut keys = std::collections::BTreeSet::new();
            for (k, p, ins) in ops {
                let key = k as f64;
                if ins {
                    prop_assert_eq!(t.insert(key, p).is_ok(), keys.insert(k));
                } else {
                    prop_assert_eq!(t.delete(key).is_ok(), keys.remove(&k));
                }
                prop_assert!(t.is_valid());
            }
            let got: Vec<u32> = t.in_order().iter().map(|e| e.0 as u32).collect();
            prop_assert_eq!(got, keys.into_iter().collect::<Vec<_>>());
        }
    }
}
