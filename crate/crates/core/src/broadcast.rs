//! Noisy broadcasting of a root bit down a recursive tree, and the mark/flip
//! decomposition into bit-homogeneous subtrees.

use std::fmt::Write as _;
use std::fs;
use std::ops::{Mul, Neg};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::Tree;
use crate::unrooted::UnrootedTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(i8)]
pub enum Bit {
    Minus = -1,
    Plus = 1,
}

impl Bit {
    pub fn value(self) -> i64 {
        self as i8 as i64
    }

    pub fn from_sign(x: i64) -> Option<Bit> {
        match x {
            1 => Some(Bit::Plus),
            -1 => Some(Bit::Minus),
            _ => None,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Bit {
        if rng.gen::<bool>() {
            Bit::Plus
        } else {
            Bit::Minus
        }
    }
}

impl Neg for Bit {
    type Output = Bit;
    fn neg(self) -> Bit {
        match self {
            Bit::Plus => Bit::Minus,
            Bit::Minus => Bit::Plus,
        }
    }
}

impl Mul for Bit {
    type Output = Bit;
    fn mul(self, rhs: Bit) -> Bit {
        if self == rhs {
            Bit::Plus
        } else {
            Bit::Minus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Visibility {
    #[serde(rename = "all", alias = "all_vertices")]
    AllVertices,
    #[serde(rename = "leaves", alias = "leaves_only")]
    LeavesOnly,
}

impl Visibility {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "all" | "all_vertices" => Ok(Visibility::AllVertices),
            "leaves" | "leaves_only" => Ok(Visibility::LeavesOnly),
            _ => Err(Error::InvalidArgument(format!("unknown visibility {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Visibility::AllVertices => "all",
            Visibility::LeavesOnly => "leaves",
        }
    }
}

/// Bits of every vertex, labeled by insertion order.
///
/// Under [`Visibility::LeavesOnly`] only vertices of degree at most one are
/// readable through [`BitAssignment::get`]. Degree is used rather than
/// "no children" so that the mask itself never singles out the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitAssignment {
    root_bit: Bit,
    bits: Vec<Bit>,
    visibility: Visibility,
    visible: Vec<bool>,
}

impl BitAssignment {
    pub fn from_bits(bits: Vec<Bit>) -> Result<Self> {
        let Some(&root_bit) = bits.first() else {
            return Err(Error::InvalidArgument("empty bit vector".into()));
        };
        let visible = vec![true; bits.len()];
        Ok(Self {
            root_bit,
            bits,
            visibility: Visibility::AllVertices,
            visible,
        })
    }

    pub fn root_bit(&self) -> Bit {
        self.root_bit
    }

    pub fn visibility(&self) -> Visibility {
        self.visibility
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The bit at `v`, or `None` when it is masked.
    pub fn get(&self, v: usize) -> Option<Bit> {
        self.visible[v].then_some(self.bits[v])
    }

    /// Unmasked bits; requires full visibility.
    pub fn all_bits(&self) -> Result<&[Bit]> {
        match self.visibility {
            Visibility::AllVertices => Ok(&self.bits),
            Visibility::LeavesOnly => Err(Error::LeavesOnly),
        }
    }

    pub fn with_visibility(mut self, tree: &Tree, visibility: Visibility) -> Self {
        assert_eq!(tree.len(), self.bits.len(), "tree and bits differ in size");
        self.visibility = visibility;
        match visibility {
            Visibility::AllVertices => self.visible.iter_mut().for_each(|x| *x = true),
            Visibility::LeavesOnly => {
                for (v, x) in self.visible.iter_mut().enumerate() {
                    *x = tree.degree(v) <= 1;
                }
            }
        }
        self
    }

    pub fn leaves_only(self, tree: &Tree) -> Self {
        self.with_visibility(tree, Visibility::LeavesOnly)
    }

    /// What an estimator sees: visible bits relabeled through `perm`
    /// (`perm[original] = shuffled label`), without the root bit.
    pub fn observe(&self, perm: &[u32]) -> ObservedBits {
        let mut vals = vec![0i8; self.bits.len()];
        for (v, &p) in perm.iter().enumerate() {
            if self.visible[v] {
                vals[p as usize] = self.bits[v] as i8;
            }
        }
        ObservedBits {
            vals,
            visibility: self.visibility,
        }
    }

    pub fn observe_identity(&self) -> ObservedBits {
        let perm: Vec<u32> = (0..self.bits.len() as u32).collect();
        self.observe(&perm)
    }
}

/// Bits in the estimator's (shuffled) labeling; masked entries read as `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedBits {
    vals: Vec<i8>,
    visibility: Visibility,
}

impl ObservedBits {
    pub fn new(bits: &[Option<Bit>], visibility: Visibility) -> Self {
        Self {
            vals: bits.iter().map(|b| b.map_or(0, |b| b as i8)).collect(),
            visibility,
        }
    }

    pub fn full(bits: &[Bit]) -> Self {
        Self {
            vals: bits.iter().map(|&b| b as i8).collect(),
            visibility: Visibility::AllVertices,
        }
    }

    /// Masks every vertex of degree above one in `tree`.
    pub fn mask_to_leaves(mut self, tree: &UnrootedTree) -> Self {
        for (v, x) in self.vals.iter_mut().enumerate() {
            if !tree.is_leaf(v) {
                *x = 0;
            }
        }
        self.visibility = Visibility::LeavesOnly;
        self
    }

    pub fn visibility(&self) -> Visibility {
        self.visibility
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<Bit> {
        Bit::from_sign(self.vals[v] as i64)
    }

    /// Sum of visible bits.
    pub fn visible_sum(&self) -> i64 {
        self.vals.iter().map(|&x| x as i64).sum()
    }

    pub fn negated(&self) -> Self {
        Self {
            vals: self.vals.iter().map(|&x| -x).collect(),
            visibility: self.visibility,
        }
    }
}

/// Realized marks `m_i` and flips `xi_i` of the decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub marked: Vec<bool>,
    pub flip: Vec<Bit>,
    pub q: f64,
}

/// Homogeneous-subtree sizes `N_i` and their tree-leaf counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreeCounts {
    pub n: Vec<u32>,
    pub n_leaf: Vec<u32>,
}

fn check_q(q: f64, max: f64) -> Result<()> {
    if !(0.0..=max).contains(&q) {
        return Err(Error::out_of_range("q", format!("{q} not in [0, {max}]")));
    }
    Ok(())
}

pub fn assign_bits<R: Rng + ?Sized>(tree: &Tree, q: f64, rng: &mut R) -> Result<BitAssignment> {
    check_q(q, 1.0)?;
    let root_bit = Bit::random(rng);
    let mut bits = Vec::with_capacity(tree.len());
    bits.push(root_bit);
    for &p in tree.parents() {
        let b = bits[p as usize];
        bits.push(if rng.gen_bool(q) { -b } else { b });
    }
    BitAssignment::from_bits(bits)
}

pub fn assign_bits_decomposed<R: Rng + ?Sized>(
    tree: &Tree,
    q: f64,
    rng: &mut R,
) -> Result<(BitAssignment, Decomposition)> {
    check_q(q, 0.5)?;
    let mark_p = (2.0 * q).min(1.0);
    let root_bit = Bit::random(rng);
    let len = tree.len();
    let mut bits = Vec::with_capacity(len);
    let mut marked = Vec::with_capacity(len);
    let mut flip = Vec::with_capacity(len);
    bits.push(root_bit);
    marked.push(false);
    flip.push(Bit::Plus);
    for &p in tree.parents() {
        let m = rng.gen_bool(mark_p);
        let xi = Bit::random(rng);
        let b = bits[p as usize];
        bits.push(if m { xi * b } else { b });
        marked.push(m);
        flip.push(xi);
    }
    Ok((
        BitAssignment::from_bits(bits)?,
        Decomposition { marked, flip, q },
    ))
}

pub fn subtree_counts(tree: &Tree, dec: &Decomposition) -> SubtreeCounts {
    let len = tree.len();
    let mut n = vec![1u32; len];
    let mut n_leaf: Vec<u32> = (0..len).map(|v| u32::from(tree.is_leaf(v))).collect();
    for i in (1..len).rev() {
        if !dec.marked[i] {
            let p = tree.parent(i).unwrap();
            n[p] += n[i];
            n_leaf[p] += n_leaf[i];
        }
    }
    SubtreeCounts { n, n_leaf }
}

/// Vertices agreeing with the root bit minus those disagreeing.
pub fn delta_statistic(assignment: &BitAssignment) -> Result<i64> {
    let r = assignment.root_bit().value();
    Ok(assignment.all_bits()?.iter().map(|b| b.value() * r).sum())
}

/// The same statistic assembled from homogeneous pieces:
/// `N_0 + sum over marked i of N_i * B_{p_i} * xi_i`, relative to `B_0`.
pub fn delta_from_decomposition(
    tree: &Tree,
    assignment: &BitAssignment,
    dec: &Decomposition,
    counts: &SubtreeCounts,
) -> Result<i64> {
    let bits = assignment.all_bits()?;
    let r = assignment.root_bit().value();
    let mut delta = counts.n[0] as i64;
    for i in 1..tree.len() {
        if dec.marked[i] {
            let p = tree.parent(i).unwrap();
            delta += counts.n[i] as i64 * bits[p].value() * dec.flip[i].value() * r;
        }
    }
    Ok(delta)
}

/// Writes one `v bit` line per vertex, with `?` for masked bits.
pub fn write_bits_file(assignment: &BitAssignment, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(assignment.len() * 8);
    for v in 0..assignment.len() {
        match assignment.get(v) {
            Some(b) => writeln!(out, "{v} {}", b.value()),
            None => writeln!(out, "{v} ?"),
        }
        .expect("writing to a String");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a `v bit` file. Bits are `1` and `-1`; `0` is read as `-1` and `?`
/// as masked. Every vertex `0..len` must appear exactly once.
pub fn read_bits_file(path: &Path) -> Result<Vec<Option<Bit>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut entries: Vec<(usize, Option<Bit>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(v), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(idx + 1, format!("expected `v bit`, got {line:?}")));
        };
        let v: usize = v
            .parse()
            .map_err(|_| parse_err(idx + 1, format!("bad vertex {v:?}")))?;
        let b = match b {
            "1" | "+1" => Some(Bit::Plus),
            "-1" | "0" => Some(Bit::Minus),
            "?" => None,
            other => return Err(parse_err(idx + 1, format!("bad bit {other:?}"))),
        };
        entries.push((v, b));
    }
    let mut bits = vec![None; entries.len()];
    let mut seen = vec![false; entries.len()];
    for (v, b) in entries {
        if v >= bits.len() || std::mem::replace(&mut seen[v], true) {
            return Err(parse_err(0, format!("vertex {v} is out of range or repeated")));
        }
        bits[v] = b;
    }
    Ok(bits)
}
