//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the library's own tree algorithms.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Adj = Vec<Vec<usize>>;

pub fn adjacency(parents: &[u32]) -> Adj {
    let mut adj = vec![Vec::new(); parents.len() + 1];
    for (k, &p) in parents.iter().enumerate() {
        adj[k + 1].push(p as usize);
        adj[p as usize].push(k + 1);
    }
    adj
}

/// All parent sequences of length `n`, generated depth first.
pub fn all_parent_sequences(n: usize) -> Vec<Vec<u32>> {
    fn grow(prefix: &mut Vec<u32>, n: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for p in (0..=prefix.len() as u32).rev() {
            prefix.push(p);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

/// Nested-parenthesis string of the tree hung from `root`; optional vertex
/// colors are written inside the brackets.
pub fn rooted_string(adj: &Adj, root: usize, colors: Option<&[i8]>) -> String {
    fn go(adj: &Adj, v: usize, from: usize, colors: Option<&[i8]>) -> String {
        let mut kids: Vec<String> = adj[v]
            .iter()
            .filter(|&&w| w != from)
            .map(|&w| go(adj, w, v, colors))
            .collect();
        kids.sort();
        let tag = colors.map_or(String::new(), |c| c[v].to_string());
        format!("({tag}{})", kids.concat())
    }
    go(adj, root, usize::MAX, colors)
}

pub fn unrooted_string(adj: &Adj, colors: Option<&[i8]>) -> String {
    (0..adj.len()).map(|r| rooted_string(adj, r, colors)).min().unwrap()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                go(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn edge_set(adj: &Adj) -> std::collections::HashSet<(usize, usize)> {
    adj.iter()
        .enumerate()
        .flat_map(|(v, ns)| ns.iter().map(move |&w| (v.min(w), v.max(w))))
        .collect()
}

/// Rooted isomorphism by trying every bijection that maps `ra` to `rb`.
pub fn rooted_isomorphic_brute(a: &Adj, ra: usize, b: &Adj, rb: usize) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let eb = edge_set(b);
    permutations(a.len()).into_iter().any(|p| {
        p[ra] == rb
            && a.iter()
                .enumerate()
                .all(|(v, ns)| ns.iter().all(|&w| eb.contains(&(p[v].min(p[w]), p[v].max(p[w])))))
    })
}

/// Automorphism orbit of every vertex, by enumerating all bijections.
pub fn orbits_brute(adj: &Adj) -> Vec<Vec<usize>> {
    let e = edge_set(adj);
    let n = adj.len();
    let mut orbit = vec![vec![false; n]; n];
    for p in permutations(n) {
        if e.iter().all(|&(a, b)| e.contains(&(p[a].min(p[b]), p[a].max(p[b])))) {
            for v in 0..n {
                orbit[v][p[v]] = true;
            }
        }
    }
    orbit
        .into_iter()
        .map(|row| (0..n).filter(|&w| row[w]).collect())
        .collect()
}

/// Size of the largest component left after deleting `v`.
pub fn phi_brute(adj: &Adj, v: usize) -> usize {
    let n = adj.len();
    let mut seen = vec![false; n];
    seen[v] = true;
    let mut best = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut size = 0;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(x) = stack.pop() {
            size += 1;
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        best = best.max(size);
    }
    best
}

pub fn bfs(adj: &Adj, src: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; adj.len()];
    d[src] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(x) = q.pop_front() {
        for &y in &adj[x] {
            if d[y] == usize::MAX {
                d[y] = d[x] + 1;
                q.push_back(y);
            }
        }
    }
    d
}

pub fn depth_of(parents: &[u32], v: usize) -> usize {
    let mut d = 0;
    let mut x = v;
    while x != 0 {
        x = parents[x - 1] as usize;
        d += 1;
    }
    d
}

pub fn bits_of(parents: &[u32], root: i8, flips: u32) -> Vec<i8> {
    let mut bits = vec![root; parents.len() + 1];
    for v in 1..bits.len() {
        let b = bits[parents[v - 1] as usize];
        bits[v] = if flips >> (v - 1) & 1 == 1 { -b } else { b };
    }
    bits
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Rule {
    Majority,
    Centroid,
    Bayes,
}

/// Root distribution over vertices of each unrooted shape, from counting
/// which vertex the insertion root lands on across all parent sequences.
pub struct RootTable {
    /// rooted string -> number of sequences whose tree hung from 0 has it
    counts: HashMap<String, u64>,
}

impl RootTable {
    pub fn new(n: usize) -> Self {
        let mut counts = HashMap::new();
        for seq in all_parent_sequences(n) {
            *counts.entry(rooted_string(&adjacency(&seq), 0, None)).or_insert(0) += 1;
        }
        Self { counts }
    }

    pub fn count(&self, rooted: &str) -> u64 {
        self.counts.get(rooted).copied().unwrap_or(0)
    }

    /// `P(root = u | shape)` for every vertex of `adj`.
    pub fn posterior(&self, adj: &Adj) -> Vec<BigRational> {
        let n = adj.len();
        let strings: Vec<String> = (0..n).map(|u| rooted_string(adj, u, None)).collect();
        let orbit: Vec<usize> = (0..n)
            .map(|u| strings.iter().filter(|s| **s == strings[u]).count())
            .collect();
        let weights: Vec<BigRational> = (0..n)
            .map(|u| BigRational::new(BigInt::from(self.count(&strings[u])), BigInt::from(orbit[u])))
            .collect();
        let z: BigRational = weights.iter().fold(BigRational::zero(), |a, b| a + b);
        weights.into_iter().map(|w| w / &z).collect()
    }
}

/// Probability that `rule` answers +1, with leaf ties split evenly and two
/// centroids split evenly.
pub fn rule_plus(rule: Rule, adj: &Adj, bits: &[i8], leaves_only: bool, table: &RootTable) -> BigRational {
    let n = adj.len();
    let visible = |v: usize| !leaves_only || adj[v].len() <= 1;
    let ind = |b: i8| if b > 0 { BigRational::one() } else { BigRational::zero() };
    match rule {
        Rule::Majority => {
            let s: i64 = (0..n).filter(|&v| visible(v)).map(|v| bits[v] as i64).sum();
            ind(if s > 0 { 1 } else { -1 })
        }
        Rule::Centroid => {
            let phi: Vec<usize> = (0..n).map(|v| phi_brute(adj, v)).collect();
            let best = *phi.iter().min().unwrap();
            let cents: Vec<usize> = (0..n).filter(|&v| phi[v] == best).collect();
            let mut total = BigRational::zero();
            for &c in &cents {
                let p = if leaves_only {
                    let d = bfs(adj, c);
                    let leaves: Vec<usize> = (0..n).filter(|&v| adj[v].len() <= 1).collect();
                    let m = leaves.iter().map(|&l| d[l]).min().unwrap();
                    let near: Vec<usize> = leaves.into_iter().filter(|&l| d[l] == m).collect();
                    let k = near.len();
                    near.into_iter().map(|l| ind(bits[l])).fold(BigRational::zero(), |a, b| a + b)
                        / BigInt::from(k)
                } else {
                    ind(bits[c])
                };
                total += p / BigInt::from(cents.len());
            }
            total
        }
        Rule::Bayes => {
            let post = table.posterior(adj);
            let mut s = BigRational::zero();
            for v in 0..n {
                if bits[v] > 0 {
                    s += &post[v];
                } else {
                    s -= &post[v];
                }
            }
            ind(if s > BigRational::zero() { 1 } else { -1 })
        }
    }
}

/// Error mass per number of flipped edges: risk(q) = sum_k m[k] q^k (1-q)^(n-k).
/// Iterates flip patterns in the outer loop and trees in the inner loop.
pub fn risk_masses(n: usize, rule: Rule, leaves_only: bool) -> Vec<BigRational> {
    let seqs = all_parent_sequences(n);
    let table = RootTable::new(n);
    let trees = BigInt::from(seqs.len());
    let mut masses = vec![BigRational::zero(); n + 1];
    for flips in (0..1u32 << n).rev() {
        let k = flips.count_ones() as usize;
        for seq in &seqs {
            let adj = adjacency(seq);
            for root in [-1i8, 1] {
                let bits = bits_of(seq, root, flips);
                let plus = rule_plus(rule, &adj, &bits, leaves_only, &table);
                let err = if root > 0 { BigRational::one() - plus } else { plus };
                masses[k] += err / (&trees * BigInt::from(2));
            }
        }
    }
    masses
}

pub fn eval_masses(masses: &[BigRational], q: &BigRational) -> BigRational {
    let n = masses.len() - 1;
    let p = BigRational::one() - q;
    masses
        .iter()
        .enumerate()
        .map(|(k, m)| m * q.pow(k as i32) * p.pow((n - k) as i32))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Smallest achievable risk at `q`: for every observation class (bit-colored
/// unlabeled tree), the lesser of its joint probabilities with root bit + and -.
pub fn optimal_risk(n: usize, q: &BigRational) -> BigRational {
    let seqs = all_parent_sequences(n);
    // class -> (count per flip number with root +, with root -)
    let mut classes: HashMap<String, (Vec<u64>, Vec<u64>)> = HashMap::new();
    for seq in &seqs {
        let adj = adjacency(seq);
        for flips in 0..1u32 << n {
            let k = flips.count_ones() as usize;
            for root in [1i8, -1] {
                let bits = bits_of(seq, root, flips);
                let e = classes
                    .entry(unrooted_string(&adj, Some(&bits)))
                    .or_insert_with(|| (vec![0; n + 1], vec![0; n + 1]));
                if root > 0 {
                    e.0[k] += 1;
                } else {
                    e.1[k] += 1;
                }
            }
        }
    }
    let as_masses = |c: &[u64]| -> Vec<BigRational> {
        c.iter()
            .map(|&x| BigRational::new(BigInt::from(x), BigInt::from(seqs.len() * 2)))
            .collect()
    };
    classes
        .values()
        .map(|(plus, minus)| {
            let a = eval_masses(&as_masses(plus), q);
            let b = eval_masses(&as_masses(minus), q);
            a.min(b)
        })
        .fold(BigRational::zero(), |acc, x| acc + x)
}
