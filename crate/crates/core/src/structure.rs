//! Subtree sizes, depths, centroids and nearest leaves.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::tree::{Model, Tree};
use crate::unrooted::{Rooting, UnrootedTree, NONE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralSummary {
    pub size_down: Vec<u32>,
    pub depth: Vec<u32>,
    /// Largest component left after deleting the vertex.
    pub phi: Vec<u32>,
}

pub fn structural_summary(tree: &Tree) -> StructuralSummary {
    let size_down = tree.subtree_sizes();
    let depth = tree.depths();
    let total = tree.len() as u32;
    let mut phi = vec![0u32; tree.len()];
    for v in 0..tree.len() {
        let up = if v == 0 { 0 } else { total - size_down[v] };
        let down = tree
            .children(v)
            .iter()
            .map(|&c| size_down[c as usize])
            .max()
            .unwrap_or(0);
        phi[v] = up.max(down);
    }
    StructuralSummary {
        size_down,
        depth,
        phi,
    }
}

/// `phi` for every vertex of an unrooted tree, given any rooting of it.
pub fn phi_from_rooting(rooting: &Rooting) -> Vec<u32> {
    let size = rooting.subtree_sizes();
    let total = rooting.parent.len() as u32;
    let mut phi = vec![0u32; total as usize];
    for &v in &rooting.order {
        let v = v as usize;
        if rooting.parent[v] != NONE {
            phi[v] = phi[v].max(total - size[v]);
            let p = rooting.parent[v] as usize;
            phi[p] = phi[p].max(size[v]);
        }
    }
    phi
}

fn argmin_phi(phi: &[u32]) -> Vec<usize> {
    let best = *phi.iter().min().expect("nonempty tree");
    let out: Vec<usize> = (0..phi.len()).filter(|&v| phi[v] == best).collect();
    debug_assert!(out.len() <= 2);
    out
}

/// The one or two centroids, in increasing label order.
pub fn centroids(tree: &Tree) -> Vec<usize> {
    argmin_phi(&structural_summary(tree).phi)
}

pub fn centroids_unrooted(tree: &UnrootedTree) -> Vec<usize> {
    argmin_phi(&phi_from_rooting(&tree.root_at(0)))
}

/// All leaves (degree at most one) at minimum distance from `v`, with that distance.
pub fn nearest_leaves(tree: &UnrootedTree, v: usize) -> (u32, Vec<usize>) {
    if tree.is_leaf(v) {
        return (0, vec![v]);
    }
    let mut dist = vec![u32::MAX; tree.len()];
    dist[v] = 0;
    let mut frontier = vec![v as u32];
    let mut d = 0;
    loop {
        d += 1;
        let mut next = Vec::new();
        for &x in &frontier {
            for &w in tree.neighbors(x as usize) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = d;
                    next.push(w);
                }
            }
        }
        let mut hits: Vec<usize> = next
            .iter()
            .map(|&w| w as usize)
            .filter(|&w| tree.is_leaf(w))
            .collect();
        if !hits.is_empty() {
            hits.sort_unstable();
            return (d, hits);
        }
        frontier = next;
    }
}

/// A closest leaf to `v`; ties go to the smallest label.
pub fn nearest_leaf(tree: &UnrootedTree, v: usize) -> usize {
    nearest_leaves(tree, v).1[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidDepthStats {
    pub trials: u64,
    /// Mean depth of the centroid closest to the root.
    pub mean_depth: f64,
    pub ci_halfwidth: f64,
    pub root_is_centroid: f64,
    pub two_centroids: f64,
}

/// Depth of the centroid closest to vertex 0, and the number of centroids.
pub fn centroid_depth(tree: &Tree) -> (u32, usize) {
    let s = structural_summary(tree);
    let cs = argmin_phi(&s.phi);
    let d = cs.iter().map(|&c| s.depth[c]).min().unwrap();
    (d, cs.len())
}

/// Monte Carlo estimate of the mean centroid depth. Trial `t` draws its tree
/// from stream `(seed, t)`.
pub fn centroid_depth_stats(model: Model, n: usize, trials: u64, seed: u64) -> Result<CentroidDepthStats> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    model.validate()?;
    let (mut sum, mut sum_sq, mut at_root, mut two) = (0u64, 0u64, 0u64, 0u64);
    for t in 0..trials {
        let mut rng = RngStream::new(seed, t).rng();
        let tree = model.generate(n, &mut rng)?;
        let (d, count) = centroid_depth(&tree);
        sum += d as u64;
        sum_sq += (d as u64) * (d as u64);
        at_root += u64::from(d == 0);
        two += u64::from(count == 2);
    }
    let m = trials as f64;
    let mean = sum as f64 / m;
    let var = (sum_sq as f64 / m - mean * mean).max(0.0);
    Ok(CentroidDepthStats {
        trials,
        mean_depth: mean,
        ci_halfwidth: 1.96 * (var / m).sqrt(),
        root_is_centroid: at_root as f64 / m,
        two_centroids: two as f64 / m,
    })
}

/// Picks one centroid, flipping a fair coin when there are two.
/// Returns the vertex and whether the coin was used.
pub fn pick_centroid<R: Rng + ?Sized>(tree: &UnrootedTree, rng: &mut R) -> (usize, bool) {
    let cs = centroids_unrooted(tree);
    if cs.len() == 2 {
        (cs[usize::from(rng.gen::<bool>())], true)
    } else {
        (cs[0], false)
    }
}
