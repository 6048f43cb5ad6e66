//! Recursive trees: uniform attachment, linear preferential attachment, and
//! exhaustive enumeration of parent sequences for small sizes.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_parent_sequences`] (there are `n!` trees).
pub const ENUMERATION_CAP: usize = 9;

/// A rooted tree on vertices `0..=n` whose labels are insertion times:
/// every vertex `i >= 1` has a parent `parent[i] < i`.
///
/// Children are stored in compressed form, each list sorted by label.
#[derive(Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<u32>,
    child_start: Vec<u32>,
    child_list: Vec<u32>,
}

impl Tree {
    /// Builds a tree from `parents[i - 1] = parent of vertex i`.
    pub fn from_parents(parents: &[u32]) -> Result<Self> {
        for (k, &p) in parents.iter().enumerate() {
            let i = k + 1;
            if p as usize >= i {
                return Err(Error::InvalidTree(format!(
                    "parent of vertex {i} is {p}, expected a label below {i}"
                )));
            }
        }
        Ok(Self::from_parents_unchecked(parents))
    }

    pub(crate) fn from_parents_unchecked(parents: &[u32]) -> Self {
        let len = parents.len() + 1;
        let mut parent = Vec::with_capacity(len);
        parent.push(0);
        parent.extend_from_slice(parents);

        let mut child_start = vec![0u32; len + 1];
        for &p in parents {
            child_start[p as usize + 1] += 1;
        }
        for v in 0..len {
            child_start[v + 1] += child_start[v];
        }
        let mut fill = child_start.clone();
        let mut child_list = vec![0u32; parents.len()];
        for (k, &p) in parents.iter().enumerate() {
            let slot = &mut fill[p as usize];
            child_list[*slot as usize] = (k + 1) as u32;
            *slot += 1;
        }
        Self {
            parent,
            child_start,
            child_list,
        }
    }

    /// The single-vertex tree.
    pub fn singleton() -> Self {
        Self::from_parents_unchecked(&[])
    }

    /// Number of vertices, `n + 1`.
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of edges, `n`.
    pub fn n(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v != 0).then(|| self.parent[v] as usize)
    }

    /// Parent labels of vertices `1..=n`.
    pub fn parents(&self) -> &[u32] {
        &self.parent[1..]
    }

    pub fn children(&self, v: usize) -> &[u32] {
        let (a, b) = (self.child_start[v], self.child_start[v + 1]);
        &self.child_list[a as usize..b as usize]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        (self.child_start[v + 1] - self.child_start[v]) as usize
    }

    /// Degree in the underlying unrooted tree.
    pub fn degree(&self, v: usize) -> usize {
        self.out_degree(v) + usize::from(v != 0)
    }

    /// True when `v` has no children.
    pub fn is_leaf(&self, v: usize) -> bool {
        self.out_degree(v) == 0
    }

    /// Edge distance of every vertex to vertex 0.
    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.len()];
        for i in 1..self.len() {
            depth[i] = depth[self.parent[i] as usize] + 1;
        }
        depth
    }

    /// `|T_{v↓}|` for every vertex, seen from vertex 0.
    pub fn subtree_sizes(&self) -> Vec<u32> {
        let mut size = vec![1u32; self.len()];
        for i in (1..self.len()).rev() {
            let p = self.parent[i] as usize;
            size[p] += size[i];
        }
        size
    }

    /// Writes the parent-sequence text format: a `#` header line followed by
    /// one `i parent[i]` line per vertex (`-1` for vertex 0).
    pub fn write_parent_file(&self, path: &Path, header: &str) -> Result<()> {
        let mut out = String::with_capacity(self.len() * 12);
        out.push_str("# ");
        out.push_str(header);
        out.push('\n');
        out.push_str("0 -1\n");
        for (k, p) in self.parents().iter().enumerate() {
            out.push_str(&format!("{} {}\n", k + 1, p));
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_parent_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut entries: Vec<(usize, i64)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(idx + 1, format!("expected `i parent`, got {line:?}")));
            };
            let v: usize = a
                .parse()
                .map_err(|e| parse_err(idx + 1, format!("bad vertex {a:?}: {e}")))?;
            let p: i64 = b
                .parse()
                .map_err(|e| parse_err(idx + 1, format!("bad parent {b:?}: {e}")))?;
            entries.push((v, p));
        }
        if entries.is_empty() {
            return Err(parse_err(0, "no vertices".into()));
        }
        entries.sort_unstable_by_key(|e| e.0);
        let mut parents = Vec::with_capacity(entries.len() - 1);
        for (expect, &(v, p)) in entries.iter().enumerate() {
            if v != expect {
                return Err(parse_err(0, format!("vertex labels must be 0..=n, missing {expect}")));
            }
            if v == 0 {
                if p != -1 {
                    return Err(parse_err(0, "vertex 0 must have parent -1".into()));
                }
                continue;
            }
            if p < 0 {
                return Err(parse_err(0, format!("vertex {v} has no parent")));
            }
            parents.push(p as u32);
        }
        Tree::from_parents(&parents)
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tree")
            .field("parents", &self.parents())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaParams {
    pub beta: f64,
}

impl PaParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::out_of_range("beta", format!("{beta} (must be > 0)")));
        }
        Ok(Self { beta })
    }
}

/// The attachment mechanism used to grow a tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Model {
    Urrt,
    Pa { beta: f64 },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Urrt => "urrt",
            Model::Pa { .. } => "pa",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match *self {
            Model::Urrt => None,
            Model::Pa { beta } => Some(beta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Model::Pa { beta } = *self {
            PaParams::new(beta)?;
        }
        Ok(())
    }

    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Tree> {
        match *self {
            Model::Urrt => Ok(generate_urrt(n, rng)),
            Model::Pa { beta } => generate_pa(n, PaParams::new(beta)?, rng),
        }
    }
}

/// Uniform random recursive tree on `n + 1` vertices.
pub fn generate_urrt<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Tree {
    let parents: Vec<u32> = (1..=n).map(|i| rng.gen_range(0..i as u32)).collect();
    Tree::from_parents_unchecked(&parents)
}

/// Linear preferential attachment: vertex `i` joins `j < i` with probability
/// proportional to `outdeg_j(i - 1) + beta`.
///
/// The weight splits into an out-degree part, `i - 1` in total (one unit per
/// existing edge, sampled by picking a uniform non-root vertex and taking its
/// parent), and a uniform part `beta * i`. The total is `(beta + 1) i - 1`,
/// so each step is O(1).
pub fn generate_pa<R: Rng + ?Sized>(n: usize, params: PaParams, rng: &mut R) -> Result<Tree> {
    let beta = PaParams::new(params.beta)?.beta;
    let mut parents: Vec<u32> = Vec::with_capacity(n);
    for i in 1..=n {
        let edges = (i - 1) as f64;
        let total = (beta + 1.0) * i as f64 - 1.0;
        let p = if i > 1 && rng.gen::<f64>() * total < edges {
            let k = rng.gen_range(1..i);
            parents[k - 1]
        } else {
            rng.gen_range(0..i as u32)
        };
        parents.push(p);
    }
    Ok(Tree::from_parents_unchecked(&parents))
}

/// Iterator over all `n!` recursive trees on `n + 1` vertices, in
/// lexicographic order of the parent sequence.
#[derive(Debug, Clone)]
pub struct ParentSequences {
    current: Vec<u32>,
    done: bool,
}

impl Iterator for ParentSequences {
    type Item = Tree;

    fn next(&mut self) -> Option<Tree> {
        if self.done {
            return None;
        }
        let out = Tree::from_parents_unchecked(&self.current);
        // odometer: position k holds the parent of vertex k + 1, range 0..=k
        let mut k = self.current.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            if (self.current[k] as usize) < k {
                self.current[k] += 1;
                for c in &mut self.current[k + 1..] {
                    *c = 0;
                }
                break;
            }
        }
        Some(out)
    }
}

pub fn enumerate_parent_sequences(n: usize) -> Result<ParentSequences> {
    if n > ENUMERATION_CAP {
        return Err(Error::out_of_range(
            "n",
            format!("{n} exceeds the enumeration cap {ENUMERATION_CAP}"),
        ));
    }
    Ok(ParentSequences {
        current: vec![0; n],
        done: false,
    })
}
