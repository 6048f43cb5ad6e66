//! Exact rooted-isomorphism codes (AHU with interned child multisets),
//! automorphism orbits, recursive-labeling counts and root likelihoods.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use statrs::function::factorial::ln_factorial;

use crate::unrooted::{Rooting, UnrootedTree, NONE};

/// Maps each sorted multiset of child codes to a dense integer id.
///
/// Codes from the same interner are equal iff the rooted trees are isomorphic.
#[derive(Debug, Default, Clone)]
pub struct Interner {
    map: HashMap<Box<[u32]>, u32>,
    keys: Vec<Box<[u32]>>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    /// `key` must be sorted.
    pub fn intern(&mut self, key: &[u32]) -> u32 {
        debug_assert!(key.windows(2).all(|w| w[0] <= w[1]));
        if let Some(&id) = self.map.get(key) {
            return id;
        }
        let id = self.keys.len() as u32;
        let boxed: Box<[u32]> = key.into();
        self.keys.push(boxed.clone());
        self.map.insert(boxed, id);
        id
    }

    /// Sorted child codes of `code`.
    pub fn children(&self, code: u32) -> &[u32] {
        &self.keys[code as usize]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Nested-parenthesis form, independent of interning order.
    pub fn canonical_string(&self, code: u32) -> String {
        let mut parts: Vec<String> = self
            .children(code)
            .iter()
            .map(|&c| self.canonical_string(c))
            .collect();
        parts.sort_unstable();
        let mut s = String::with_capacity(2 + parts.iter().map(String::len).sum::<usize>());
        s.push('(');
        parts.iter().for_each(|p| s.push_str(p));
        s.push(')');
        s
    }
}

fn children_of<'a>(tree: &'a UnrootedTree, rooting: &'a Rooting, v: usize) -> impl Iterator<Item = usize> + 'a {
    let p = rooting.parent[v];
    tree.neighbors(v)
        .iter()
        .filter(move |&&w| w != p)
        .map(|&w| w as usize)
}

/// Code of every subtree `T_{v↓}` when the tree hangs from `root`.
pub fn canonical_codes_rooted(tree: &UnrootedTree, root: usize, interner: &mut Interner) -> Vec<u32> {
    let rooting = tree.root_at(root);
    codes_for_rooting(tree, &rooting, interner)
}

fn codes_for_rooting(tree: &UnrootedTree, rooting: &Rooting, interner: &mut Interner) -> Vec<u32> {
    let mut code = vec![0u32; tree.len()];
    let mut buf = Vec::new();
    for &v in rooting.order.iter().rev() {
        let v = v as usize;
        buf.clear();
        buf.extend(children_of(tree, rooting, v).map(|c| code[c]));
        buf.sort_unstable();
        code[v] = interner.intern(&buf);
    }
    code
}

/// Canonical string of the whole tree hanging from `root`.
pub fn canonical_string(tree: &UnrootedTree, root: usize) -> String {
    let mut interner = Interner::new();
    let codes = canonical_codes_rooted(tree, root, &mut interner);
    interner.canonical_string(codes[root])
}

/// Product of factorials of multiplicities in a sorted code list.
fn multiplicity_factorials(sorted: &[u32]) -> BigUint {
    let mut out = BigUint::one();
    for_each_run(sorted, |len| {
        for k in 2..=len {
            out *= k as u64;
        }
    });
    out
}

fn ln_multiplicity_factorials(sorted: &[u32]) -> f64 {
    let mut out = 0.0;
    for_each_run(sorted, |len| out += ln_factorial(len as u64));
    out
}

fn for_each_run(sorted: &[u32], mut f: impl FnMut(usize)) {
    let mut i = 0;
    while i < sorted.len() {
        let j = i + sorted[i..].partition_point(|&x| x == sorted[i]);
        f(j - i);
        i = j;
    }
}

fn multiplicity(sorted: &[u32], x: u32) -> usize {
    let lo = sorted.partition_point(|&y| y < x);
    let hi = sorted.partition_point(|&y| y <= x);
    hi - lo
}

/// Symmetries among the children of `v`: the product of `l!` over the
/// multiplicities `l` of isomorphic child subtrees, seen from `root`.
pub fn aut_bar(tree: &UnrootedTree, root: usize, v: usize) -> BigUint {
    let mut interner = Interner::new();
    let codes = canonical_codes_rooted(tree, root, &mut interner);
    multiplicity_factorials(interner.children(codes[v]))
}

/// Codes of every subtree in every direction, from one down pass and one up pass.
#[derive(Debug, Clone)]
pub struct AllRootsCodes {
    pub interner: Interner,
    pub rooting: Rooting,
    /// Subtree below `v` in the rooting at vertex 0.
    pub down: Vec<u32>,
    /// The component containing `parent(v)` after cutting the edge, hung from
    /// `parent(v)`; `NONE` at the root.
    pub up: Vec<u32>,
    /// The whole tree hung from `v`.
    pub full: Vec<u32>,
    orbit_size: Vec<u32>,
}

impl AllRootsCodes {
    pub fn new(tree: &UnrootedTree) -> Self {
        let mut interner = Interner::new();
        let rooting = tree.root_at(0);
        let down = codes_for_rooting(tree, &rooting, &mut interner);
        let len = tree.len();
        let mut up = vec![NONE; len];
        let mut full = vec![0u32; len];
        let mut nbr = Vec::new();
        let mut removed: Vec<(u32, u32)> = Vec::new();
        let mut key = Vec::new();
        for &p in &rooting.order {
            let p = p as usize;
            nbr.clear();
            nbr.extend(children_of(tree, &rooting, p).map(|c| down[c]));
            if up[p] != NONE {
                nbr.push(up[p]);
            }
            nbr.sort_unstable();
            full[p] = interner.intern(&nbr);

            // one up-code per distinct neighbor code
            removed.clear();
            let mut i = 0;
            while i < nbr.len() {
                let x = nbr[i];
                key.clear();
                key.extend_from_slice(&nbr[..i]);
                key.extend_from_slice(&nbr[i + 1..]);
                removed.push((x, interner.intern(&key)));
                i += nbr[i..].partition_point(|&y| y == x);
            }
            for c in children_of(tree, &rooting, p) {
                let at = removed.partition_point(|e| e.0 < down[c]);
                up[c] = removed[at].1;
            }
        }
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for &f in &full {
            *counts.entry(f).or_default() += 1;
        }
        let orbit_size = full.iter().map(|f| counts[f]).collect();
        Self {
            interner,
            rooting,
            down,
            up,
            full,
            orbit_size,
        }
    }

    /// Number of vertices an automorphism can send `v` to.
    pub fn aut_vertex(&self, v: usize) -> u32 {
        self.orbit_size[v]
    }

    /// Vertex orbits under the automorphism group, each sorted, ordered by first member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut by_code: HashMap<u32, usize> = HashMap::new();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (v, &f) in self.full.iter().enumerate() {
            let idx = *by_code.entry(f).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[idx].push(v);
        }
        out
    }

    /// Sorted codes of the neighbor subtrees of `v`, each hung from the neighbor.
    pub fn neighbor_codes(&self, v: usize) -> &[u32] {
        self.interner.children(self.full[v])
    }

    /// Code of the component containing `w` after cutting edge `{v, w}`, hung from `w`.
    pub fn directed_code(&self, v: usize, w: usize) -> u32 {
        if self.rooting.parent[w] == v as u32 {
            self.down[w]
        } else {
            debug_assert_eq!(self.rooting.parent[v] as usize, w);
            self.up[v]
        }
    }
}

pub fn aut_vertex(tree: &UnrootedTree, v: usize) -> u32 {
    AllRootsCodes::new(tree).aut_vertex(v)
}

fn factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `prod over v of |T_{v↓}| * aut_bar(v)` in the hanging from `root`.
fn hook_product(tree: &UnrootedTree, root: usize) -> BigUint {
    let rooting = tree.root_at(root);
    let mut interner = Interner::new();
    let codes = codes_for_rooting(tree, &rooting, &mut interner);
    let sizes = rooting.subtree_sizes();
    let mut out = BigUint::one();
    for v in 0..tree.len() {
        if sizes[v] > 1 {
            out *= sizes[v];
            out *= multiplicity_factorials(interner.children(codes[v]));
        }
    }
    out
}

/// Number of parent sequences whose tree, hung from vertex 0, has the shape
/// of `tree` hung from `root`.
pub fn labeling_count(tree: &UnrootedTree, root: usize) -> BigUint {
    factorial(tree.len()) / hook_product(tree, root)
}

pub fn log_labeling_count(tree: &UnrootedTree, root: usize) -> f64 {
    let rooting = tree.root_at(root);
    let mut interner = Interner::new();
    let codes = codes_for_rooting(tree, &rooting, &mut interner);
    let sizes = rooting.subtree_sizes();
    let mut out = ln_factorial(tree.len() as u64);
    for v in 0..tree.len() {
        out -= (sizes[v] as f64).ln() + ln_multiplicity_factorials(interner.children(codes[v]));
    }
    out
}

/// Likelihood of each vertex being the root, given the unlabeled shape.
#[derive(Debug, Clone, PartialEq)]
pub struct RootPosterior {
    /// `ln lambda(u)`; no normalizing constant is dropped.
    pub log_lambda: Vec<f64>,
    pub posterior: Vec<f64>,
}

pub fn root_likelihoods(tree: &UnrootedTree) -> RootPosterior {
    root_likelihoods_with(&AllRootsCodes::new(tree))
}

/// Re-rooting pass: with `F(u) = sum_v ln|T^u_{v↓}| + ln aut_bar(T^u_{v↓})`,
/// moving the root from `p` to its child `c` only changes the terms of `p`
/// and `c`, so `F(c)` follows from `F(p)` in constant time.
pub fn root_likelihoods_with(codes: &AllRootsCodes) -> RootPosterior {
    let rooting = &codes.rooting;
    let len = rooting.parent.len();
    let total = len as f64;
    let sizes = rooting.subtree_sizes();
    let mut f = vec![0.0f64; len];
    f[0] = (0..len)
        .map(|v| (sizes[v] as f64).ln() + ln_multiplicity_factorials(codes.interner.children(codes.down[v])))
        .sum();
    for &c in &rooting.order[1..] {
        let c = c as usize;
        let p = rooting.parent[c] as usize;
        let sd = sizes[c] as f64;
        let gain = multiplicity(codes.neighbor_codes(c), codes.up[c]) as f64;
        let loss = multiplicity(codes.neighbor_codes(p), codes.down[c]) as f64;
        f[c] = f[p] - sd.ln() + (total - sd).ln() + gain.ln() - loss.ln();
    }
    let log_lambda: Vec<f64> = (0..len)
        .map(|u| -(codes.aut_vertex(u) as f64).ln() - f[u])
        .collect();
    let max = log_lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_lambda.iter().map(|&x| (x - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    RootPosterior {
        log_lambda,
        posterior: weights.into_iter().map(|w| w / z).collect(),
    }
}

/// `1 / lambda(u)` as an exact integer for every vertex; quadratic time.
pub fn lambda_denominators(tree: &UnrootedTree) -> Vec<BigUint> {
    let codes = AllRootsCodes::new(tree);
    (0..tree.len())
        .map(|u| hook_product(tree, u) * codes.aut_vertex(u))
        .collect()
}

/// The root posterior in exact rational arithmetic.
pub fn root_posterior_exact(tree: &UnrootedTree) -> Vec<BigRational> {
    let dens = lambda_denominators(tree);
    let lcm = dens
        .iter()
        .fold(BigUint::one(), |acc, d| num_integer::Integer::lcm(&acc, d));
    let weights: Vec<BigUint> = dens.iter().map(|d| &lcm / d).collect();
    let z: BigUint = weights.iter().sum();
    weights
        .into_iter()
        .map(|w| BigRational::new(w.into(), z.clone().into()))
        .collect()
}

/// `ln lambda(u)` from the exact denominators, for cross-checking.
pub fn log_lambda_exact(tree: &UnrootedTree) -> Vec<f64> {
    lambda_denominators(tree)
        .iter()
        .map(|d| -ln_biguint(d))
        .collect()
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}
