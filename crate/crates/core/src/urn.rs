//! Urn processes that track bit-class counts of a growing tree without
//! building the tree.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UrnKind {
    /// Balls `[same, opposite]` relative to the root bit; uniform attachment.
    TwoColor,
    /// Balls `[leaf same, leaf opposite, internal same, internal opposite]`;
    /// uniform attachment.
    FourColorLeaf,
    /// Counts `[leaf same, internal same, leaf opposite, internal opposite,
    /// outdegree same, outdegree opposite]`; linear preferential attachment,
    /// where a leaf weighs `beta` and an internal vertex `outdegree + beta`.
    PaWeight { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrnState {
    pub kind: UrnKind,
    pub counts: Vec<u64>,
    pub steps: u64,
}

impl UrnState {
    /// The state for a single root vertex.
    pub fn initial(kind: UrnKind) -> Result<Self> {
        let counts = match kind {
            UrnKind::TwoColor => vec![1, 0],
            UrnKind::FourColorLeaf => vec![1, 0, 0, 0],
            UrnKind::PaWeight { beta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::out_of_range("beta", format!("{beta} (must be > 0)")));
                }
                vec![1, 0, 0, 0, 0, 0]
            }
        };
        Ok(Self {
            kind,
            counts,
            steps: 0,
        })
    }

    /// Vertices carrying the root bit.
    pub fn same_count(&self) -> u64 {
        match self.kind {
            UrnKind::TwoColor => self.counts[0],
            UrnKind::FourColorLeaf => self.counts[0] + self.counts[2],
            UrnKind::PaWeight { .. } => self.counts[0] + self.counts[1],
        }
    }

    /// Leaves carrying the root bit (the root counts as a leaf until it has a child).
    pub fn same_leaf_count(&self) -> Option<u64> {
        match self.kind {
            UrnKind::TwoColor => None,
            UrnKind::FourColorLeaf | UrnKind::PaWeight { .. } => Some(self.counts[0]),
        }
    }

    pub fn total_balls(&self) -> u64 {
        match self.kind {
            UrnKind::PaWeight { .. } => self.counts[..4].iter().sum(),
            _ => self.counts.iter().sum(),
        }
    }

    /// Total attachment weight; `(beta + 1) steps + beta` for the weight urn.
    pub fn total_weight(&self) -> f64 {
        match self.kind {
            UrnKind::PaWeight { beta } => {
                beta * self.total_balls() as f64 + (self.counts[4] + self.counts[5]) as f64
            }
            _ => self.total_balls() as f64,
        }
    }
}

pub fn urn_simulate<R: Rng + ?Sized>(state: &UrnState, steps: u64, q: f64, rng: &mut R) -> Result<UrnState> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::out_of_range("q", format!("{q} not in [0, 1]")));
    }
    let mut s = state.clone();
    for _ in 0..steps {
        let flip = rng.gen_bool(q);
        match s.kind {
            UrnKind::TwoColor => {
                let total = s.counts[0] + s.counts[1];
                let drawn = usize::from(rng.gen_range(0..total) >= s.counts[0]);
                s.counts[drawn ^ usize::from(flip)] += 1;
            }
            UrnKind::FourColorLeaf => {
                let total: u64 = s.counts.iter().sum();
                let mut x = rng.gen_range(0..total);
                let mut drawn = 0;
                while x >= s.counts[drawn] {
                    x -= s.counts[drawn];
                    drawn += 1;
                }
                let side = drawn % 2;
                if drawn < 2 {
                    s.counts[drawn] -= 1;
                    s.counts[drawn + 2] += 1;
                }
                s.counts[side ^ usize::from(flip)] += 1;
            }
            UrnKind::PaWeight { beta } => {
                let w = [
                    beta * s.counts[0] as f64,
                    beta * s.counts[1] as f64 + s.counts[4] as f64,
                    beta * s.counts[2] as f64,
                    beta * s.counts[3] as f64 + s.counts[5] as f64,
                ];
                let mut x = rng.gen::<f64>() * w.iter().sum::<f64>();
                let mut drawn = 3;
                for (k, &wk) in w.iter().enumerate() {
                    if x < wk {
                        drawn = k;
                        break;
                    }
                    x -= wk;
                }
                // skip categories with no balls that a rounding tail could select
                while s.counts[drawn] == 0 {
                    drawn -= 1;
                }
                let side = drawn / 2;
                if drawn % 2 == 0 {
                    s.counts[drawn] -= 1;
                    s.counts[drawn + 1] += 1;
                }
                s.counts[4 + side] += 1;
                s.counts[2 * (side ^ usize::from(flip))] += 1;
            }
        }
        s.steps += 1;
    }
    Ok(s)
}
