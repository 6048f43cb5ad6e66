//! Exact risk at small sizes by enumerating every recursive tree, every flip
//! pattern and both root bits.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::broadcast::{Bit, ObservedBits, Visibility};
use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::tree::{enumerate_parent_sequences, Tree};
use crate::unrooted::UnrootedTree;

pub const EXHAUSTIVE_MAX_N: usize = 7;

/// Risk as a polynomial in the flip probability:
/// `R(q) = sum_k masses[k] q^k (1 - q)^(n - k) / denom`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiskPolynomial {
    pub n: usize,
    pub masses: Vec<BigUint>,
    pub denom: BigUint,
}

impl RiskPolynomial {
    pub fn eval(&self, q: &BigRational) -> BigRational {
        let one = BigRational::one();
        let p = &one - q;
        let mut sum = BigRational::zero();
        for (k, m) in self.masses.iter().enumerate() {
            let term = q.pow(k as i32) * p.pow((self.n - k) as i32);
            sum += term * BigRational::from_integer(BigInt::from(m.clone()));
        }
        sum / BigRational::from_integer(BigInt::from(self.denom.clone()))
    }

    /// Exact evaluation at the binary value of `q`, rounded once.
    pub fn eval_f64(&self, q: f64) -> f64 {
        let q = BigRational::from_float(q).expect("finite q");
        self.eval(&q).to_f64().unwrap_or(f64::NAN)
    }
}

fn lcm_upto(m: u64) -> u64 {
    (1..=m).fold(1, |acc, k| acc.lcm(&k))
}

/// Bits of every vertex given the root bit and the set of flipped edges
/// (bit `i - 1` of `flips` flips the edge into vertex `i`).
pub(crate) fn bits_from_flips(tree: &Tree, root: Bit, flips: u32) -> Vec<Bit> {
    let mut bits = vec![root; tree.len()];
    for v in 1..tree.len() {
        let p = tree.parent(v).expect("non-root vertex has a parent");
        bits[v] = if flips >> (v - 1) & 1 == 1 { -bits[p] } else { bits[p] };
    }
    bits
}

/// Exact error probability of `estimator` on uniform recursive trees with `n`
/// edges. Estimator coins and tie-breaks are averaged analytically.
pub fn exhaustive_risk_polynomial(n: usize, estimator: &Estimator, visibility: Visibility) -> Result<RiskPolynomial> {
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::out_of_range(
            "n",
            format!("{n} exceeds the exhaustive limit {EXHAUSTIVE_MAX_N}"),
        ));
    }
    estimator.check_visibility(visibility)?;
    // every vote is a multiple of 1 / scale
    let scale = 2 * lcm_upto(n as u64 + 1);
    let mut masses = vec![0u64; n + 1];
    let mut trees = 0u64;
    for tree in enumerate_parent_sequences(n)? {
        trees += 1;
        let shape = UnrootedTree::from_tree(&tree);
        let prepared = estimator.prepare(&shape)?;
        for flips in 0..1u32 << n {
            let k = flips.count_ones() as usize;
            for root in [Bit::Plus, Bit::Minus] {
                let mut seen = ObservedBits::full(&bits_from_flips(&tree, root, flips));
                if visibility == Visibility::LeavesOnly {
                    seen = seen.mask_to_leaves(&shape);
                }
                let plus = prepared.vote(&seen)?;
                let err = match root {
                    Bit::Plus => num_rational::Ratio::from_integer(1) - plus,
                    Bit::Minus => plus,
                };
                let scaled = err * scale;
                debug_assert!(scaled.is_integer());
                masses[k] += scaled.to_integer();
            }
        }
    }
    Ok(RiskPolynomial {
        n,
        masses: masses.into_iter().map(BigUint::from).collect(),
        denom: BigUint::from(scale) * 2u32 * trees,
    })
}

pub fn exhaustive_risk(n: usize, q: f64, estimator: &Estimator, visibility: Visibility) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::out_of_range("q", format!("{q} not in [0, 1]")));
    }
    Ok(exhaustive_risk_polynomial(n, estimator, visibility)?.eval_f64(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn zero_noise_is_error_free() {
        for est in [Estimator::Majority, Estimator::Centroid, Estimator::Bayes] {
            for n in 0..=5 {
                let p = exhaustive_risk_polynomial(n, &est, Visibility::AllVertices).unwrap();
                assert!(p.eval(&rat(0, 1)).is_zero(), "{} n={n}", est.id());
            }
        }
    }

    #[test]
    fn single_edge_centroid_is_half_q() {
        let p = exhaustive_risk_polynomial(1, &Estimator::Centroid, Visibility::AllVertices).unwrap();
        let q = rat(3, 10);
        assert_eq!(p.eval(&q), q / BigInt::from(2));
    }

    #[test]
    fn majority_two_edges_by_hand() {
        // path 0-1-2 and cherry 0-{1,2}; ties go to -1
        // root +: errs iff at least two of three bits are -, or a 1-2 tie
        let p = exhaustive_risk_polynomial(2, &Estimator::Majority, Visibility::AllVertices).unwrap();
        let q = rat(1, 5);
        let got = p.eval(&q);
        // path: flip patterns (e1,e2): bits (+, s1, s1*s2)
        //   00 -> +++ ok, 10 -> +-- err, 01 -> ++- ok, 11 -> +-+ ok
        // cherry: 00 ok, 10 ok, 01 ok, 11 err
        // a root of - mirrors these exactly since there are no ties with 3 bits
        let one = rat(1, 1);
        let path = &q * (&one - &q);
        let cherry = &q * &q;
        assert_eq!(got, (path + cherry) / BigInt::from(2));
    }

    #[test]
    fn rejects_large_n() {
        assert!(exhaustive_risk(8, 0.1, &Estimator::Majority, Visibility::AllVertices).is_err());
        assert!(exhaustive_risk(3, 0.1, &Estimator::Bayes, Visibility::LeavesOnly).is_err());
    }
}
