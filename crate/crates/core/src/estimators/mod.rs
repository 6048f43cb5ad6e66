//! Root-bit estimators. All of them see only the shuffled, unrooted tree and
//! the visible bits.

pub mod structured;

use num_bigint::BigUint;
use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::broadcast::{Bit, ObservedBits, Visibility};
use crate::error::{Error, Result};
use crate::iso::{lambda_denominators, root_likelihoods};
use crate::structure::{centroids_unrooted, nearest_leaves};
use crate::unrooted::UnrootedTree;

pub use structured::{check_structure, detect_structure, Failure, StructParams, Witness};

/// Relative gap below which the two posterior masses count as tied.
pub const BAYES_TIE_TOLERANCE: f64 = 1e-12;

/// Largest tree for which the Bayes rule compares exact integer weights.
pub const BAYES_EXACT_MAX: usize = 21;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Estimate {
    pub value: Bit,
    pub estimator_id: &'static str,
    pub used_randomness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Majority,
    Centroid,
    Bayes,
    Structured(StructParams),
}

impl Estimator {
    pub fn id(&self) -> &'static str {
        match self {
            Estimator::Majority => "majority",
            Estimator::Centroid => "centroid",
            Estimator::Bayes => "bayes",
            Estimator::Structured(_) => "structured",
        }
    }

    pub fn from_name(name: &str, params: Option<StructParams>) -> Result<Self> {
        Ok(match name {
            "majority" => Estimator::Majority,
            "centroid" => Estimator::Centroid,
            "bayes" => Estimator::Bayes,
            "structured" => {
                let p = params.ok_or_else(|| {
                    Error::Config("the structured estimator needs struct_params".into())
                })?;
                p.validate()?;
                Estimator::Structured(p)
            }
            other => return Err(Error::InvalidArgument(format!("unknown estimator {other:?}"))),
        })
    }

    /// Whether the estimate depends on the tree shape (and so on the labeling
    /// being hidden).
    pub fn reads_structure(&self) -> bool {
        !matches!(self, Estimator::Majority)
    }

    pub fn check_visibility(&self, visibility: Visibility) -> Result<()> {
        if matches!(self, Estimator::Bayes) && visibility == Visibility::LeavesOnly {
            return Err(Error::LeavesOnly);
        }
        Ok(())
    }

    /// Bit-independent work for one tree, reusable across bit assignments.
    pub fn prepare(&self, tree: &UnrootedTree) -> Result<Prepared> {
        Ok(match self {
            Estimator::Majority => Prepared::Majority,
            Estimator::Centroid => {
                let centroids = centroids_unrooted(tree);
                let nearest = centroids.iter().map(|&c| nearest_leaves(tree, c).1).collect();
                Prepared::Centroid { centroids, nearest }
            }
            Estimator::Bayes => {
                if tree.len() <= BAYES_EXACT_MAX {
                    let dens = lambda_denominators(tree);
                    let lcm = dens
                        .iter()
                        .fold(BigUint::from(1u32), |acc, d| num_integer::Integer::lcm(&acc, d));
                    Prepared::BayesExact {
                        weights: dens.iter().map(|d| &lcm / d).collect(),
                    }
                } else {
                    Prepared::Bayes {
                        posterior: root_likelihoods(tree).posterior,
                    }
                }
            }
            Estimator::Structured(params) => {
                let x0 = detect_structure(tree, params)?.map(|w| w.x0);
                let leaves = x0.map(|x| structured::leaves_at(tree, x)).unwrap_or_default();
                Prepared::Structured { x0, leaves }
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum Prepared {
    Majority,
    Centroid {
        centroids: Vec<usize>,
        /// Closest leaves of each centroid, sorted by label.
        nearest: Vec<Vec<usize>>,
    },
    Bayes {
        posterior: Vec<f64>,
    },
    BayesExact {
        /// Root weights proportional to the likelihood, as exact integers.
        weights: Vec<BigUint>,
    },
    Structured {
        x0: Option<usize>,
        /// Leaves adjacent to `x0`, sorted by label.
        leaves: Vec<usize>,
    },
}

fn visible(bits: &ObservedBits, v: usize) -> Result<Bit> {
    bits.get(v)
        .ok_or_else(|| Error::InvalidArgument(format!("bit of vertex {v} is not visible")))
}

fn indicator(b: Bit) -> Ratio<u64> {
    Ratio::from_integer(u64::from(b == Bit::Plus))
}

fn tie_to_minus(plus_wins: bool) -> Bit {
    if plus_wins {
        Bit::Plus
    } else {
        Bit::Minus
    }
}

impl Prepared {
    pub fn id(&self) -> &'static str {
        match self {
            Prepared::Majority => "majority",
            Prepared::Centroid { .. } => "centroid",
            Prepared::Bayes { .. } | Prepared::BayesExact { .. } => "bayes",
            Prepared::Structured { .. } => "structured",
        }
    }

    fn bayes_plus_wins(&self, bits: &ObservedBits) -> Result<bool> {
        if bits.visibility() == Visibility::LeavesOnly {
            return Err(Error::LeavesOnly);
        }
        match self {
            Prepared::BayesExact { weights } => {
                let (mut plus, mut minus) = (BigUint::default(), BigUint::default());
                for (u, w) in weights.iter().enumerate() {
                    match visible(bits, u)? {
                        Bit::Plus => plus += w,
                        Bit::Minus => minus += w,
                    }
                }
                Ok(plus > minus)
            }
            Prepared::Bayes { posterior } => {
                let (mut plus, mut minus) = (0.0, 0.0);
                for (u, &w) in posterior.iter().enumerate() {
                    match visible(bits, u)? {
                        Bit::Plus => plus += w,
                        Bit::Minus => minus += w,
                    }
                }
                Ok(plus - minus > BAYES_TIE_TOLERANCE * (plus + minus))
            }
            _ => unreachable!(),
        }
    }

    /// Probability of answering `+1`, averaged over the estimator's coins and
    /// over tie-breaks among equally near leaves (a uniformly random
    /// relabeling makes each of them equally likely to carry the smallest label).
    pub fn vote(&self, bits: &ObservedBits) -> Result<Ratio<u64>> {
        let half = Ratio::new(1, 2);
        match self {
            Prepared::Majority => Ok(indicator(tie_to_minus(bits.visible_sum() > 0))),
            Prepared::Centroid { centroids, nearest } => {
                let mut total = Ratio::from_integer(0);
                for (&c, ties) in centroids.iter().zip(nearest) {
                    let share = Ratio::new(1, centroids.len() as u64);
                    let p = match bits.visibility() {
                        Visibility::AllVertices => indicator(visible(bits, c)?),
                        Visibility::LeavesOnly => {
                            let mut acc = Ratio::from_integer(0);
                            for &l in ties {
                                acc += indicator(visible(bits, l)?);
                            }
                            acc / ties.len() as u64
                        }
                    };
                    total += share * p;
                }
                Ok(total)
            }
            Prepared::Bayes { .. } | Prepared::BayesExact { .. } => {
                Ok(indicator(tie_to_minus(self.bayes_plus_wins(bits)?)))
            }
            Prepared::Structured { x0, leaves } => match (bits.visibility(), x0) {
                (Visibility::AllVertices, Some(x)) => Ok(indicator(visible(bits, *x)?)),
                (Visibility::LeavesOnly, Some(_)) if !leaves.is_empty() => {
                    let mut acc = Ratio::from_integer(0);
                    for &l in leaves {
                        acc += indicator(-visible(bits, l)?);
                    }
                    Ok(acc / leaves.len() as u64)
                }
                _ => Ok(half),
            },
        }
    }

    pub fn decide<R: Rng + ?Sized>(&self, bits: &ObservedBits, rng: &mut R) -> Result<Estimate> {
        let id = self.id();
        let done = |value, used_randomness| Estimate {
            value,
            estimator_id: id,
            used_randomness,
        };
        match self {
            Prepared::Majority => Ok(done(tie_to_minus(bits.visible_sum() > 0), false)),
            Prepared::Centroid { centroids, nearest } => {
                let (i, coin) = if centroids.len() == 2 {
                    (usize::from(rng.gen::<bool>()), true)
                } else {
                    (0, false)
                };
                let v = match bits.visibility() {
                    Visibility::AllVertices => centroids[i],
                    Visibility::LeavesOnly => nearest[i][0],
                };
                Ok(done(visible(bits, v)?, coin))
            }
            Prepared::Bayes { .. } | Prepared::BayesExact { .. } => {
                Ok(done(tie_to_minus(self.bayes_plus_wins(bits)?), false))
            }
            Prepared::Structured { x0, leaves } => match (bits.visibility(), x0) {
                (Visibility::AllVertices, Some(x)) => Ok(done(visible(bits, *x)?, false)),
                (Visibility::LeavesOnly, Some(_)) if !leaves.is_empty() => {
                    Ok(done(-visible(bits, leaves[0])?, false))
                }
                _ => Ok(done(Bit::random(rng), true)),
            },
        }
    }
}

/// Sign of the visible bit sum; a tie gives `-1`.
pub fn majority_estimate(bits: &ObservedBits) -> Estimate {
    Estimate {
        value: tie_to_minus(bits.visible_sum() > 0),
        estimator_id: "majority",
        used_randomness: false,
    }
}

pub fn centroid_estimate<R: Rng + ?Sized>(tree: &UnrootedTree, bits: &ObservedBits, rng: &mut R) -> Result<Estimate> {
    Estimator::Centroid.prepare(tree)?.decide(bits, rng)
}

/// Compares the likelihood mass of the vertices carrying each bit. Takes no
/// flip probability: the decision does not depend on it.
pub fn bayes_estimate(tree: &UnrootedTree, bits: &ObservedBits) -> Result<Estimate> {
    let prepared = Estimator::Bayes.prepare(tree)?;
    let value = tie_to_minus(prepared.bayes_plus_wins(bits)?);
    Ok(Estimate {
        value,
        estimator_id: "bayes",
        used_randomness: false,
    })
}

pub fn structured_estimate<R: Rng + ?Sized>(
    tree: &UnrootedTree,
    bits: &ObservedBits,
    params: &StructParams,
    rng: &mut R,
) -> Result<Estimate> {
    Estimator::Structured(*params).prepare(tree)?.decide(bits, rng)
}
