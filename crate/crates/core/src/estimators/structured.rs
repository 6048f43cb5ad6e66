//! Detection of a rigid complete r-ary core `D` whose hanging subtrees have
//! prescribed sizes, and the estimator that reads the bit at its root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iso::{canonical_codes_rooted, AllRootsCodes, Interner};
use crate::structure::centroids_unrooted;
use crate::unrooted::UnrootedTree;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructParams {
    pub r: u32,
    pub k: u32,
    pub epsilon: f64,
}

impl Default for StructParams {
    fn default() -> Self {
        Self::with_default_epsilon(4, 4)
    }
}

impl StructParams {
    pub fn with_default_epsilon(r: u32, k: u32) -> Self {
        let leaves = (r as f64).powi(k as i32);
        Self {
            r,
            k,
            epsilon: 1.0 / (4.0 * leaves),
        }
    }

    /// Number of leaves of `D`, `r^k`.
    pub fn core_leaves(&self) -> f64 {
        (self.r as f64).powi(self.k as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r <= 3 || self.k <= 3 || self.k > self.r {
            return Err(Error::out_of_range(
                "struct params",
                format!("need r, k > 3 and k <= r, got r={} k={}", self.r, self.k),
            ));
        }
        let cap = 1.0 / (2.0 * self.core_leaves());
        if !(self.epsilon > 0.0 && self.epsilon < cap) {
            return Err(Error::out_of_range(
                "epsilon",
                format!("{} not in (0, {cap})", self.epsilon),
            ));
        }
        Ok(())
    }

    /// Allowed size of the subtree hanging from an internal vertex of `D`.
    pub fn internal_window(&self, n: usize) -> (f64, f64) {
        let unit = n as f64 / self.core_leaves();
        (self.epsilon * unit / 10.0, self.epsilon * unit)
    }

    /// Allowed size of the subtree hanging from a leaf of `D`.
    pub fn leaf_window(&self, n: usize) -> (f64, f64) {
        let unit = n as f64 / self.core_leaves();
        ((1.0 - self.epsilon) * unit, (1.0 + self.epsilon) * unit)
    }

    /// Smallest `n` (edge count) at which the internal window contains an integer.
    pub fn min_feasible_n(&self) -> usize {
        (self.core_leaves() / self.epsilon).ceil() as usize
    }
}

/// Which condition rejected a candidate core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Failure {
    /// No complete r-ary subtree of height k at the candidate.
    Shape,
    /// A hanging subtree falls outside its size window.
    Sizes,
    /// Two subtrees hanging from leaves of `D` are isomorphic.
    Distinct,
    /// An internal vertex of `D` has a nontrivial symmetry.
    Rigid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub x0: usize,
    /// Vertices of `D` by depth; `levels[0] == [x0]`.
    pub levels: Vec<Vec<usize>>,
}

impl Witness {
    pub fn internal(&self) -> impl Iterator<Item = usize> + '_ {
        self.levels[..self.levels.len() - 1].iter().flatten().copied()
    }

    pub fn core_leaves(&self) -> &[usize] {
        self.levels.last().unwrap()
    }
}

/// Searches for the core. Any valid `x0` has every component of `T - x0`
/// below half the vertices, so only centroids are tried; below `x0`, the
/// children of `D` are forced (exactly those whose subtree exceeds the
/// internal window). The search is therefore exhaustive.
pub fn detect_structure(tree: &UnrootedTree, params: &StructParams) -> Result<Option<Witness>> {
    Ok(check_structure(tree, params)?.ok())
}

/// Like [`detect_structure`], but reports the first failed condition.
pub fn check_structure(tree: &UnrootedTree, params: &StructParams) -> Result<std::result::Result<Witness, Failure>> {
    params.validate()?;
    let n = tree.len() - 1;
    let min_core = (params.r as usize).pow(params.k + 1) / (params.r as usize - 1);
    if tree.len() < min_core {
        return Ok(Err(Failure::Shape));
    }
    let mut worst = Failure::Shape;
    for x0 in centroids_unrooted(tree) {
        match check_at(tree, params, n, x0) {
            Ok(w) => return Ok(Ok(w)),
            Err(f) => worst = worst.max_by_stage(f),
        }
    }
    Ok(Err(worst))
}

impl Failure {
    fn stage(self) -> u8 {
        match self {
            Failure::Shape => 0,
            Failure::Sizes => 1,
            Failure::Distinct => 2,
            Failure::Rigid => 3,
        }
    }

    fn max_by_stage(self, other: Failure) -> Failure {
        if other.stage() > self.stage() {
            other
        } else {
            self
        }
    }
}

fn check_at(tree: &UnrootedTree, params: &StructParams, n: usize, x0: usize) -> std::result::Result<Witness, Failure> {
    let rooting = tree.root_at(x0);
    let size = rooting.subtree_sizes();
    let (int_lo, int_hi) = params.internal_window(n);
    let (leaf_lo, leaf_hi) = params.leaf_window(n);
    let r = params.r as usize;

    let mut levels: Vec<Vec<usize>> = vec![vec![x0]];
    let mut sizes_ok = true;
    for _ in 0..params.k {
        let mut next = Vec::with_capacity(levels.last().unwrap().len() * r);
        for &v in levels.last().unwrap() {
            let p = rooting.parent[v];
            let mut taken = 0usize;
            let mut core_size = 0u64;
            for &w in tree.neighbors(v) {
                if w != p && size[w as usize] as f64 > int_hi {
                    next.push(w as usize);
                    taken += 1;
                    core_size += size[w as usize] as u64;
                }
            }
            if taken != r {
                return Err(Failure::Shape);
            }
            let hanging = (size[v] as u64 - core_size) as f64;
            sizes_ok &= int_lo <= hanging && hanging <= int_hi;
        }
        levels.push(next);
    }
    for &v in levels.last().unwrap() {
        let hanging = size[v] as f64;
        sizes_ok &= leaf_lo <= hanging && hanging <= leaf_hi;
    }
    if !sizes_ok {
        return Err(Failure::Sizes);
    }

    let mut interner = Interner::new();
    let codes = canonical_codes_rooted(tree, x0, &mut interner);
    let mut leaf_codes: Vec<u32> = levels.last().unwrap().iter().map(|&v| codes[v]).collect();
    leaf_codes.sort_unstable();
    if leaf_codes.windows(2).any(|w| w[0] == w[1]) {
        return Err(Failure::Distinct);
    }

    let internal: Vec<usize> = levels[..levels.len() - 1].iter().flatten().copied().collect();
    let children_distinct = |v: usize| interner.children(codes[v]).windows(2).all(|w| w[0] != w[1]);
    if !internal.iter().all(|&v| children_distinct(v)) {
        return Err(Failure::Rigid);
    }
    let all = AllRootsCodes::new(tree);
    if !internal.iter().all(|&v| all.aut_vertex(v) == 1) {
        return Err(Failure::Rigid);
    }
    Ok(Witness { x0, levels })
}

/// Leaves (degree one) adjacent to `x0`, in label order.
pub fn leaves_at(tree: &UnrootedTree, x0: usize) -> Vec<usize> {
    tree.neighbors(x0)
        .iter()
        .map(|&w| w as usize)
        .filter(|&w| tree.degree(w) == 1)
        .collect()
}
