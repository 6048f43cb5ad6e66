//! Confidence intervals and chi-square tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Normal-approximation 95% half-width of a binomial proportion.
pub fn binomial_halfwidth(errors: u64, trials: u64) -> f64 {
    let p = errors as f64 / trials as f64;
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Binomial standard deviation of a proportion with success probability `p`.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAcc {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanAcc {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// 95% normal half-width of the mean.
    pub fn halfwidth(&self) -> f64 {
        1.96 * self.std_error()
    }
}

impl FromIterator<f64> for MeanAcc {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MeanAcc::default();
        iter.into_iter().for_each(|x| acc.push(x));
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

fn p_value(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(statistic)
}

/// Pools adjacent cells until each pooled cell reaches `min` under `weight`.
fn pool<T: Copy + std::ops::AddAssign>(cells: &[T], weight: impl Fn(&T) -> f64, min: f64) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    let mut open: Option<T> = None;
    for &c in cells {
        let cur = match open.take() {
            Some(mut acc) => {
                acc += c;
                acc
            }
            None => c,
        };
        if weight(&cur) >= min {
            out.push(cur);
        } else {
            open = Some(cur);
        }
    }
    if let Some(rest) = open {
        match out.last_mut() {
            Some(last) => *last += rest,
            None => out.push(rest),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pair(f64, f64);

impl std::ops::AddAssign for Pair {
    fn add_assign(&mut self, o: Pair) {
        self.0 += o.0;
        self.1 += o.1;
    }
}

/// Goodness of fit of `observed` counts against probabilities `expected`.
/// Cells with expected count below 5 are pooled with their neighbors.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), expected.len());
    let total: u64 = observed.iter().sum();
    let cells: Vec<Pair> = observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| Pair(o as f64, p * total as f64))
        .collect();
    let cells = pool(&cells, |c| c.1, 5.0);
    let statistic = cells.iter().map(|c| (c.0 - c.1).powi(2) / c.1).sum();
    let df = cells.len().saturating_sub(1);
    ChiSquare {
        statistic,
        df,
        p_value: p_value(statistic, df),
    }
}

/// Two-sample homogeneity test on histograms over the same cells.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    assert_eq!(a.len(), b.len());
    let cells: Vec<Pair> = a.iter().zip(b).map(|(&x, &y)| Pair(x as f64, y as f64)).collect();
    let cells = pool(&cells, |c| c.0 + c.1, 10.0);
    let (na, nb) = cells.iter().fold((0.0, 0.0), |acc, c| (acc.0 + c.0, acc.1 + c.1));
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let statistic = cells
        .iter()
        .filter(|c| c.0 + c.1 > 0.0)
        .map(|c| (ka * c.0 - kb * c.1).powi(2) / (c.0 + c.1))
        .sum();
    let df = cells.len().saturating_sub(1);
    ChiSquare {
        statistic,
        df,
        p_value: p_value(statistic, df),
    }
}
