//! Rooted trees: enumeration in canonical order, tree density and symmetry,
//! and elementary weights on a coefficient matrix.
//!
//! These drive every order-condition and error-norm computation: a method has
//! order `p` exactly when `b . phi(t) = 1/t!` for all rooted trees with up to
//! `p` vertices, and the embedded difference weights `d` satisfy
//! `d . phi(t) = 0` through order `p - 1`.

use thiserror::Error;

use crate::scalar::Scalar;
use crate::stage::{hadamard, mat_vec, ones, StageMatrix, StageVec};

/// Largest order the enumerator supports; the error norm `T7` needs order 7
/// and nothing in the crate needs more.
pub const MAX_TREE_ORDER: u32 = 8;

/// Number of rooted trees per order 1..=8.
pub const TREE_COUNTS: [usize; 8] = [1, 1, 2, 4, 9, 20, 48, 115];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree order {0} out of range 1..={MAX_TREE_ORDER}")]
    OrderOutOfRange(u32),
}

/// A rooted tree in canonical form: children are sorted by `(order, children)`
/// so that two trees compare equal iff they are isomorphic as rooted trees.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootedTree {
    order: u32,
    children: Vec<RootedTree>,
}

impl RootedTree {
    pub fn leaf() -> Self {
        RootedTree {
            order: 1,
            children: Vec::new(),
        }
    }

    /// Root with the given child subtrees; sorts them into canonical order.
    pub fn node(mut children: Vec<RootedTree>) -> Self {
        children.sort();
        let order = 1 + children.iter().map(|c| c.order).sum::<u32>();
        RootedTree { order, children }
    }

    /// The path tree with `k` vertices.
    pub fn chain(k: u32) -> Self {
        assert!(k >= 1);
        let mut t = RootedTree::leaf();
        for _ in 1..k {
            t = RootedTree::node(vec![t]);
        }
        t
    }

    /// Root with `k - 1` leaf children.
    pub fn bushy(k: u32) -> Self {
        assert!(k >= 1);
        RootedTree::node((1..k).map(|_| RootedTree::leaf()).collect())
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn children(&self) -> &[RootedTree] {
        &self.children
    }
}

impl std::fmt::Debug for RootedTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("[")?;
        for c in &self.children {
            write!(f, "{c:?}")?;
        }
        f.write_str("]")
    }
}

impl std::fmt::Display for RootedTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A tree together with its density `t!` and symmetry `sigma(t)`.
#[derive(Clone, Debug)]
pub struct TreeEntry {
    pub tree: RootedTree,
    pub density: u64,
    pub symmetry: u64,
}

/// All rooted trees of order <= p with densities and symmetries, ordered by
/// order and then canonical comparison.
#[derive(Clone, Debug)]
pub struct TreeTable {
    entries: Vec<TreeEntry>,
}

impl TreeTable {
    pub fn entries(&self) -> &[TreeEntry] {
        &self.entries
    }

    pub fn of_order(&self, p: u32) -> impl Iterator<Item = &TreeEntry> {
        self.entries.iter().filter(move |e| e.tree.order() == p)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Enumerates every rooted tree of order <= p exactly once.
pub fn enumerate_trees(p: u32) -> Result<TreeTable, TreeError> {
    if !(1..=MAX_TREE_ORDER).contains(&p) {
        return Err(TreeError::OrderOutOfRange(p));
    }
    let mut by_order: Vec<Vec<RootedTree>> = vec![vec![RootedTree::leaf()]];
    for n in 2..=p {
        // every tree of order n is a root plus a multiset of smaller trees
        // totalling n - 1 vertices; pick them in non-increasing pool order
        let mut pool: Vec<RootedTree> = by_order.iter().flatten().cloned().collect();
        pool.sort();
        let mut found: Vec<RootedTree> = Vec::new();
        let mut acc: Vec<RootedTree> = Vec::new();
        fn rec(
            pool: &[RootedTree],
            max_idx: usize,
            remaining: u32,
            acc: &mut Vec<RootedTree>,
            out: &mut Vec<RootedTree>,
        ) {
            if remaining == 0 {
                out.push(RootedTree::node(acc.clone()));
                return;
            }
            for i in (0..=max_idx).rev() {
                if pool[i].order() <= remaining {
                    acc.push(pool[i].clone());
                    rec(pool, i, remaining - pool[i].order(), acc, out);
                    acc.pop();
                }
            }
        }
        rec(&pool, pool.len() - 1, n - 1, &mut acc, &mut found);
        found.sort();
        found.dedup();
        by_order.push(found);
    }
    let mut entries = Vec::new();
    for trees in &by_order {
        for t in trees {
            entries.push(TreeEntry {
                tree: t.clone(),
                density: density(t),
                symmetry: symmetry(t),
            });
        }
    }
    Ok(TreeTable { entries })
}

/// Tree density (the "tree factorial"): `t! = |t| * prod t_i!`.
pub fn density(t: &RootedTree) -> u64 {
    let mut d = t.order() as u64;
    for c in t.children() {
        d *= density(c);
    }
    d
}

/// Order of the automorphism group: product of child symmetries times the
/// factorials of multiplicities of identical children.
pub fn symmetry(t: &RootedTree) -> u64 {
    let mut s = 1u64;
    for c in t.children() {
        s *= symmetry(c);
    }
    let children = t.children();
    let mut i = 0;
    while i < children.len() {
        let mut j = i;
        while j < children.len() && children[j] == children[i] {
            j += 1;
        }
        s *= factorial((j - i) as u64);
        i = j;
    }
    s
}

fn factorial(n: u64) -> u64 {
    (2..=n).product::<u64>().max(1)
}

/// Elementary weight as a stage vector: the single vertex maps to the all-ones
/// vector and an internal node to the componentwise product of `A * phi(child)`
/// over its children. The caller contracts the root with `b` or `d`.
pub fn elementary_weight<S: Scalar>(t: &RootedTree, a: &StageMatrix<S>) -> StageVec<S> {
    if t.children().is_empty() {
        return ones();
    }
    let mut acc: Option<StageVec<S>> = None;
    for child in t.children() {
        let v = mat_vec(a, &elementary_weight(child, a));
        acc = Some(match acc {
            None => v,
            Some(prev) => hadamard(&prev, &v),
        });
    }
    acc.unwrap()
}
