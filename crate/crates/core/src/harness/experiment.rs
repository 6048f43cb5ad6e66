use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::broadcast::assign_bits;
use crate::error::{Error, Result};
use crate::estimators::Prepared;
use crate::harness::config::{ExperimentConfig, Plan, MAX_ESTIMATORS};
use crate::rng::RngStream;
use crate::stats::binomial_halfwidth;
use crate::unrooted::ShuffledView;

const TREE: u64 = 0;
const SHUFFLE: u64 = 1;
const BITS: u64 = 2;
const DECIDE: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub estimator: String,
    pub model: String,
    pub beta: Option<f64>,
    pub n: usize,
    pub q: f64,
    pub visibility: String,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub ci_halfwidth: f64,
    pub seed: u64,
}

/// Runs every (q, estimator) cell of `config`. Trial `t` uses streams keyed
/// by `(seed, t)`, so the output does not depend on `threads`.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<RiskEstimate>> {
    let plan = config.plan()?;
    let counts = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| error_counts(&plan)),
        None => error_counts(&plan),
    }?;
    let cells = plan.estimators.len();
    let mut out = Vec::with_capacity(counts.len());
    for (j, &q) in plan.q_grid.iter().enumerate() {
        for (e, est) in plan.estimators.iter().enumerate() {
            let errors = counts[j * cells + e];
            out.push(RiskEstimate {
                estimator: est.id().to_string(),
                model: plan.model.name().to_string(),
                beta: plan.model.beta(),
                n: plan.n,
                q,
                visibility: plan.visibility.name().to_string(),
                trials: plan.trials,
                errors,
                error_rate: errors as f64 / plan.trials as f64,
                ci_halfwidth: binomial_halfwidth(errors, plan.trials),
                seed: plan.seed,
            });
        }
    }
    Ok(out)
}

fn error_counts(plan: &Plan) -> Result<Vec<u64>> {
    let width = plan.q_grid.len() * plan.estimators.len();
    (0..plan.trials)
        .into_par_iter()
        .map(|t| one_trial(plan, t))
        .try_reduce(
            || vec![0u64; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )
}

fn one_trial(plan: &Plan, t: u64) -> Result<Vec<u64>> {
    let seed = plan.seed;
    let tree = plan.model.generate(plan.n, &mut RngStream::trial(seed, t, TREE).rng())?;
    // majority never looks at the shape, so it can skip the relabeling
    let view = if plan.estimators.iter().any(|e| e.reads_structure()) {
        ShuffledView::new(&tree, &mut RngStream::trial(seed, t, SHUFFLE).rng())
    } else {
        ShuffledView::identity(&tree)
    };
    let prepared: Vec<Prepared> = plan
        .estimators
        .iter()
        .map(|e| e.prepare(&view.tree))
        .collect::<Result<_>>()?;
    let mut errs = Vec::with_capacity(plan.q_grid.len() * prepared.len());
    for (j, &q) in plan.q_grid.iter().enumerate() {
        let mut rng = RngStream::trial(seed, t, BITS + j as u64).rng();
        let bits = assign_bits(&tree, q, &mut rng)?.with_visibility(&tree, plan.visibility);
        let observed = bits.observe(&view.perm);
        for (e, p) in prepared.iter().enumerate() {
            let purpose = DECIDE + (j * MAX_ESTIMATORS + e) as u64;
            let est = p.decide(&observed, &mut RngStream::trial(seed, t, purpose).rng())?;
            errs.push(u64::from(est.value != bits.root_bit()));
        }
    }
    Ok(errs)
}
