//! Unlabeled (shuffled) view of a tree: plain adjacency with no root marker.
//!
//! Estimators only ever see this view, so insertion labels cannot leak the root.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tree::Tree;

pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnrootedTree {
    adj_start: Vec<u32>,
    adj: Vec<u32>,
}

impl UnrootedTree {
    pub fn from_tree(tree: &Tree) -> Self {
        let perm: Vec<u32> = (0..tree.len() as u32).collect();
        Self::from_tree_permuted(tree, &perm)
    }

    /// Relabels vertex `v` of `tree` as `perm[v]`.
    pub fn from_tree_permuted(tree: &Tree, perm: &[u32]) -> Self {
        assert_eq!(perm.len(), tree.len(), "permutation length mismatch");
        let edges: Vec<(u32, u32)> = tree
            .parents()
            .iter()
            .enumerate()
            .map(|(k, &p)| (perm[k + 1], perm[p as usize]))
            .collect();
        Self::from_edges_unchecked(tree.len(), &edges)
    }

    /// Builds from an edge list on vertices `0..len`; must form a tree.
    pub fn from_edges(len: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidTree("a tree needs at least one vertex".into()));
        }
        if edges.len() + 1 != len {
            return Err(Error::InvalidTree(format!(
                "{} edges on {len} vertices",
                edges.len()
            )));
        }
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a as usize >= len || b as usize >= len || a == b) {
            return Err(Error::InvalidTree(format!("bad edge ({a}, {b})")));
        }
        let t = Self::from_edges_unchecked(len, edges);
        let rooted = t.root_at(0);
        if rooted.order.len() != len {
            return Err(Error::InvalidTree("edge list is not connected".into()));
        }
        Ok(t)
    }

    fn from_edges_unchecked(len: usize, edges: &[(u32, u32)]) -> Self {
        let mut adj_start = vec![0u32; len + 1];
        for &(a, b) in edges {
            adj_start[a as usize + 1] += 1;
            adj_start[b as usize + 1] += 1;
        }
        for v in 0..len {
            adj_start[v + 1] += adj_start[v];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![0u32; 2 * edges.len()];
        for &(a, b) in edges {
            adj[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        for v in 0..len {
            adj[adj_start[v] as usize..adj_start[v + 1] as usize].sort_unstable();
        }
        Self { adj_start, adj }
    }

    pub fn len(&self) -> usize {
        self.adj_start.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[self.adj_start[v] as usize..self.adj_start[v + 1] as usize]
    }

    pub fn degree(&self, v: usize) -> usize {
        (self.adj_start[v + 1] - self.adj_start[v]) as usize
    }

    /// Leaf of the unrooted tree (degree at most one).
    pub fn is_leaf(&self, v: usize) -> bool {
        self.degree(v) <= 1
    }

    /// Orients the tree away from `root`.
    pub fn root_at(&self, root: usize) -> Rooting {
        let len = self.len();
        let mut parent = vec![NONE; len];
        let mut order = Vec::with_capacity(len);
        let mut seen = vec![false; len];
        seen[root] = true;
        order.push(root as u32);
        let mut head = 0;
        while head < order.len() {
            let v = order[head] as usize;
            head += 1;
            for &w in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    parent[w as usize] = v as u32;
                    order.push(w);
                }
            }
        }
        Rooting {
            root,
            parent,
            order,
        }
    }

    /// BFS distances from `src`.
    pub fn distances(&self, src: usize) -> Vec<u32> {
        let rooting = self.root_at(src);
        let mut dist = vec![0u32; self.len()];
        for &v in &rooting.order[1..] {
            dist[v as usize] = dist[rooting.parent[v as usize] as usize] + 1;
        }
        dist
    }
}

/// BFS orientation of an [`UnrootedTree`]; `order` lists parents before children.
#[derive(Debug, Clone)]
pub struct Rooting {
    pub root: usize,
    pub parent: Vec<u32>,
    pub order: Vec<u32>,
}

impl Rooting {
    pub fn subtree_sizes(&self) -> Vec<u32> {
        let mut size = vec![1u32; self.parent.len()];
        for &v in self.order[1..].iter().rev() {
            size[self.parent[v as usize] as usize] += size[v as usize];
        }
        size
    }
}

/// A label-shuffled copy of a tree together with the permutation used.
#[derive(Debug, Clone)]
pub struct ShuffledView {
    pub tree: UnrootedTree,
    /// `perm[original] = shuffled label`.
    pub perm: Vec<u32>,
}

impl ShuffledView {
    pub fn new<R: Rng + ?Sized>(tree: &Tree, rng: &mut R) -> Self {
        let mut perm: Vec<u32> = (0..tree.len() as u32).collect();
        perm.shuffle(rng);
        Self {
            tree: UnrootedTree::from_tree_permuted(tree, &perm),
            perm,
        }
    }

    /// A view that keeps the original labels.
    pub fn identity(tree: &Tree) -> Self {
        Self {
            tree: UnrootedTree::from_tree(tree),
            perm: (0..tree.len() as u32).collect(),
        }
    }
}
