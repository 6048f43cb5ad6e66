//! Exact moments of the homogeneous-subtree sizes and the closed-form bounds
//! they are compared against.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentBound {
    pub quantity: &'static str,
    pub lower: Option<f64>,
    pub exact: Option<f64>,
    pub upper: Option<f64>,
    pub source: &'static str,
}

impl MomentBound {
    /// `lower <= exact <= upper` for whichever sides are present, with a
    /// relative slack `tol` for rounding.
    pub fn holds(&self, tol: f64) -> bool {
        let Some(x) = self.exact else { return true };
        let slack = tol * x.abs().max(1.0);
        self.lower.map_or(true, |l| l <= x + slack) && self.upper.map_or(true, |u| x <= u + slack)
    }
}

/// `ln Gamma(x + a) - ln Gamma(x)` for `x >= 1`, `a >= 0`, without the
/// cancellation of subtracting two large log-gammas.
pub fn ln_gamma_ratio(x: f64, a: f64) -> f64 {
    const SHIFT_TO: f64 = 20.0;
    let mut x = x;
    let mut acc = 0.0;
    while x < SHIFT_TO {
        acc -= (a / x).ln_1p();
        x += 1.0;
    }
    // Stirling series; the first omitted term is below 1e-14 for x >= 20
    let s = |z: f64| {
        let z2 = z * z;
        (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
    };
    acc + (x - 0.5) * (a / x).ln_1p() + a * (x + a).ln() - a + s(x + a) - s(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRatioProduct {
    pub product: f64,
    pub gamma: f64,
}

impl GammaRatioProduct {
    pub fn relative_gap(&self) -> f64 {
        ((self.product - self.gamma) / self.product).abs()
    }
}

/// `prod_{t=i}^{n-1} (1 + alpha/(t+1))`, directly and as a ratio of Gamma functions.
pub fn gamma_ratio_product(alpha: f64, i: u64, n: u64) -> Result<GammaRatioProduct> {
    if i > n {
        return Err(Error::out_of_range("i", format!("{i} > n = {n}")));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::out_of_range("alpha", format!("{alpha} (must be >= 0)")));
    }
    let log_prod: f64 = (i..n).map(|t| (alpha / (t + 1) as f64).ln_1p()).sum();
    let log_gamma = ln_gamma_ratio((n + 1) as f64, alpha) - ln_gamma_ratio((i + 1) as f64, alpha);
    Ok(GammaRatioProduct {
        product: log_prod.exp(),
        gamma: log_gamma.exp(),
    })
}

fn check_q_half(q: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::out_of_range("q", format!("{q} not in [0, 1/2]")));
    }
    Ok(())
}

fn check_i(i: u64, n: u64) -> Result<()> {
    if i > n {
        return Err(Error::out_of_range("i", format!("{i} > n = {n}")));
    }
    Ok(())
}

pub fn expected_ni_exact(q: f64, i: u64, n: u64) -> Result<f64> {
    check_q_half(q)?;
    check_i(i, n)?;
    Ok(gamma_ratio_product(1.0 - 2.0 * q, i, n)?.product)
}

/// Exact first and second moments of `N_i` and the mean of its leaf count,
/// uniform attachment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UrrtMoments {
    pub mean: f64,
    pub second: f64,
    pub leaf_mean: f64,
}

impl UrrtMoments {
    pub fn variance(&self) -> f64 {
        self.second - self.mean * self.mean
    }
}

/// Tracks `Y_t`, the part of `N_i` among vertices `0..=t`. Vertex `t` joins
/// `Y` with probability `(1 - 2q) Y_{t-1} / t`; it ends a leaf of `Y` with
/// probability `L_{t-1} / t`.
pub fn urrt_moments_exact(q: f64, i: u64, n: u64) -> Result<UrrtMoments> {
    check_q_half(q)?;
    check_i(i, n)?;
    let a = 1.0 - 2.0 * q;
    let (mut y, mut y2, mut l) = (1.0f64, 1.0f64, 1.0f64);
    for t in (i + 1)..=n {
        let t = t as f64;
        y2 += a * (2.0 * y2 + y) / t;
        l += (a * y - l) / t;
        y += a * y / t;
    }
    Ok(UrrtMoments {
        mean: y,
        second: y2,
        leaf_mean: l,
    })
}

/// Exact moments under linear preferential attachment. Besides `Y` this
/// follows the attachment weight `w` of `Y` (sum of outdegree plus beta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaMoments {
    pub mean: f64,
    pub second: f64,
    pub leaf_mean: f64,
    pub weight_mean: f64,
}

pub fn pa_moments_exact(q: f64, beta: f64, i: u64, n: u64) -> Result<PaMoments> {
    check_q_half(q)?;
    check_i(i, n)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::out_of_range("beta", format!("{beta} (must be > 0)")));
    }
    let u = 1.0 - 2.0 * q;
    // mean and square of the weight added when the new vertex lands in Y
    let c1 = 1.0 + beta * u;
    let c2 = u * (1.0 + beta).powi(2) + 2.0 * q;
    let (mut y, mut w, mut y2, mut yw, mut w2, mut l) = (1.0, beta, 1.0, beta, beta * beta, 1.0);
    for t in (i + 1)..=n {
        let total = (beta + 1.0) * t as f64 - 1.0;
        let ny = y + u * w / total;
        let nw = w + c1 * w / total;
        let ny2 = y2 + u * (2.0 * yw + w) / total;
        let nyw = yw + (c1 * yw + u * w2 + u * (1.0 + beta) * w) / total;
        let nw2 = w2 + (2.0 * c1 * w2 + c2 * w) / total;
        let nl = l - beta * l / total + u * w / total;
        (y, w, y2, yw, w2, l) = (ny, nw, ny2, nyw, nw2, nl);
    }
    Ok(PaMoments {
        mean: y,
        second: y2,
        leaf_mean: l,
        weight_mean: w,
    })
}

fn euler_maclaurin_tail(integral: f64, f: f64, f1: f64, f3: f64) -> f64 {
    integral + f / 2.0 - f1 / 12.0 + f3 / 720.0
}

const ZETA_TERMS: u64 = 100_000;

/// `sum_{k>=1} k^{-s}` for `s > 1`.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::out_of_range("s", format!("{s} (series diverges for s <= 1)")));
    }
    let head: f64 = (1..ZETA_TERMS).rev().map(|k| (k as f64).powf(-s)).sum();
    let n = ZETA_TERMS as f64;
    let f = n.powf(-s);
    let f1 = -s * n.powf(-s - 1.0);
    let f3 = -s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0);
    Ok(head + euler_maclaurin_tail(n.powf(1.0 - s) / (s - 1.0), f, f1, f3))
}

/// `sum_{k>=1} ln(k) k^{-s}` for `s > 1`.
pub fn zeta_log(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::out_of_range("s", format!("{s} (series diverges for s <= 1)")));
    }
    let head: f64 = (2..ZETA_TERMS).rev().map(|k| (k as f64).ln() * (k as f64).powf(-s)).sum();
    let n = ZETA_TERMS as f64;
    let ln = n.ln();
    let integral = n.powf(1.0 - s) * (ln / (s - 1.0) + 1.0 / ((s - 1.0) * (s - 1.0)));
    let f = ln * n.powf(-s);
    let f1 = n.powf(-s - 1.0) * (1.0 - s * ln);
    let f3 = n.powf(-s - 3.0)
        * ((s + 2.0) * (2.0 * s + 1.0) + s * (s + 1.0) - s * (s + 1.0) * (s + 2.0) * ln);
    Ok(head + euler_maclaurin_tail(integral, f, f1, f3))
}

/// Insertion depth of vertex `i` in a uniform recursive tree is a sum of
/// independent Bernoulli(1/j), `j = 1..=i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepthMoments {
    pub mean: f64,
    pub variance: f64,
    /// `ln i`, which bounds the variance for `i >= 2`.
    pub variance_bound: f64,
}

pub fn depth_moments(i: u64) -> Result<DepthMoments> {
    if i == 0 {
        return Err(Error::out_of_range("i", "must be at least 1"));
    }
    let (mut mean, mut variance) = (0.0, 0.0);
    for j in (1..=i).rev() {
        let p = 1.0 / j as f64;
        mean += p;
        variance += p * (1.0 - p);
    }
    Ok(DepthMoments {
        mean,
        variance,
        variance_bound: (i as f64).ln(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma {
    L8,
    L9,
    L10,
    L12,
    L14,
    Leaf,
    Pa1,
    Pa2,
}

impl Lemma {
    pub const ALL: [Lemma; 8] = [
        Lemma::L8,
        Lemma::L9,
        Lemma::L10,
        Lemma::L12,
        Lemma::L14,
        Lemma::Leaf,
        Lemma::Pa1,
        Lemma::Pa2,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Lemma::L8 => "l8",
            Lemma::L9 => "l9",
            Lemma::L10 => "l10",
            Lemma::L12 => "l12",
            Lemma::L14 => "l14",
            Lemma::Leaf => "leaf",
            Lemma::Pa1 => "pa1",
            Lemma::Pa2 => "pa2",
        }
    }

    pub fn from_id(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown lemma {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentQuery {
    pub q: f64,
    pub i: u64,
    pub n: u64,
    pub beta: Option<f64>,
}

/// Evaluates one lemma at `query`; `alpha = 1 - 2q` for the Gamma lemmas.
pub fn lemma_bounds(lemma: Lemma, query: MomentQuery) -> Result<Vec<MomentBound>> {
    let MomentQuery { q, i, n, beta } = query;
    let e = std::f64::consts::E;
    let src = lemma.id();
    check_i(i, n)?;
    let ratio = (n as f64 + 1.0) / (i as f64 + 1.0);
    match lemma {
        Lemma::L8 => {
            check_q_half(q)?;
            let g = gamma_ratio_product(1.0 - 2.0 * q, i, n)?;
            Ok(vec![
                MomentBound {
                    quantity: "product",
                    lower: None,
                    exact: Some(g.product),
                    upper: None,
                    source: src,
                },
                MomentBound {
                    quantity: "gamma_ratio",
                    lower: None,
                    exact: Some(g.gamma),
                    upper: None,
                    source: src,
                },
            ])
        }
        Lemma::L9 => {
            check_q_half(q)?;
            if n < 1 {
                return Err(Error::out_of_range("n", "must be at least 1"));
            }
            let a = 1.0 - 2.0 * q;
            let m = n as f64 + 1.0;
            Ok(vec![MomentBound {
                quantity: "gamma(a+n+1)/gamma(n+1)",
                lower: Some((m / e).powf(a)),
                exact: Some(ln_gamma_ratio(m, a).exp()),
                upper: Some(m.powf(a)),
                source: src,
            }])
        }
        Lemma::L10 => {
            check_q_half(q)?;
            let pw = ratio.powf(1.0 - 2.0 * q);
            Ok(vec![MomentBound {
                quantity: "E[N_i]",
                lower: Some(pw / e),
                exact: Some(expected_ni_exact(q, i, n)?),
                upper: Some(e * pw),
                source: src,
            }])
        }
        Lemma::L12 => {
            let m = urrt_moments_exact(q, i, n)?;
            let a = 1.0 - 2.0 * q;
            Ok(vec![MomentBound {
                quantity: "E[N_i^2]",
                lower: None,
                exact: Some(m.second),
                upper: Some(ratio.powf(2.0 * a) * (2.0 * a).exp() * (4.0 + e) + e * a),
                source: src,
            }])
        }
        Lemma::L14 => {
            if !(0.0..0.25).contains(&q) {
                return Err(Error::out_of_range("q", format!("{q} not in [0, 1/4)")));
            }
            if n < 1 {
                return Err(Error::out_of_range("n", "must be at least 1"));
            }
            let s = 2.0 - 4.0 * q;
            let nf = n as f64;
            let big = (nf + 1.0).powf(s);
            let upper = 2.0 * q * e * e * (4.0 + e) * big * zeta(s)?
                + 2.0 * nf * q * e * e
                + 12.0 * e.powi(3) * q * q * big * zeta_log(s)?
                + 4.0 * e * e * q * q * nf * nf.ln();
            let m = urrt_moments_exact(q, 0, n)?;
            Ok(vec![MomentBound {
                quantity: "Var(N_0)",
                lower: None,
                exact: Some(m.variance()),
                upper: Some(upper),
                source: src,
            }])
        }
        Lemma::Leaf => {
            // at q = 1/2 the root piece is a single non-leaf vertex, below the lower bound
            if !(0.0..0.5).contains(&q) {
                return Err(Error::out_of_range("q", format!("{q} not in [0, 1/2)")));
            }
            if n < 1 {
                return Err(Error::out_of_range("n", "must be at least 1"));
            }
            let a = 1.0 - 2.0 * q;
            let m = urrt_moments_exact(q, i, n)?;
            Ok(vec![
                MomentBound {
                    quantity: "E[leaf N_i]",
                    lower: Some(ratio.powf(a) / (32.0 * e) - i as f64 / (8.0 * n as f64 * e)),
                    exact: Some(m.leaf_mean),
                    upper: Some(e * ratio.powf(a)),
                    source: src,
                },
                MomentBound {
                    quantity: "E[leaf N_i^2]",
                    lower: None,
                    exact: None,
                    upper: Some(ratio.powf(2.0 * a) * (2.0 * a).exp() * (4.0 + e) + e * a),
                    source: src,
                },
            ])
        }
        Lemma::Pa1 | Lemma::Pa2 => {
            let beta = beta.ok_or_else(|| Error::InvalidArgument("this lemma needs beta".into()))?;
            if !(0.0..0.125).contains(&q) {
                return Err(Error::out_of_range("q", format!("{q} not in [0, 1/8)")));
            }
            let m = pa_moments_exact(q, beta, i, n)?;
            let r = 1.0 - 2.0 * beta * q / (beta + 1.0);
            let r1 = 1.0 / (beta + 1.0);
            let x = (n as f64 + 1.0 - r1) / (i as f64 + 1.0 - r1);
            let b1 = beta + 1.0;
            let mean_upper = beta * e / b1 * x.powf(r) + 1.0 / b1;
            let second_upper =
                4.0 / (b1 * b1) * (beta * e + beta * e * e * b1 + r * e * e * b1 * b1) * x.powf(2.0 * r);
            let (quantity, lower, exact) = if lemma == Lemma::Pa1 {
                (
                    "E[N_i]",
                    3.0 * beta / (8.0 * b1 * e) * x.powf(r) - 3.0 * beta / (4.0 * e * b1),
                    m.mean,
                )
            } else {
                (
                    "E[leaf N_i]",
                    beta / (8.0 * e * b1) * x.powf(r) - 3.0 * beta / (8.0 * e * b1),
                    m.leaf_mean,
                )
            };
            Ok(vec![
                MomentBound {
                    quantity,
                    lower: Some(lower),
                    exact: Some(exact),
                    upper: Some(mean_upper),
                    source: src,
                },
                MomentBound {
                    quantity: if lemma == Lemma::Pa1 { "E[N_i^2]" } else { "E[leaf N_i^2]" },
                    lower: None,
                    exact: (lemma == Lemma::Pa1).then_some(m.second),
                    upper: Some(second_upper),
                    source: src,
                },
            ])
        }
    }
}

/// Every lemma whose parameter domain contains `query`.
pub fn bound_suite(query: MomentQuery) -> Vec<MomentBound> {
    Lemma::ALL
        .into_iter()
        .filter_map(|l| lemma_bounds(l, query).ok())
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_product_trivial_cases() {
        let g = gamma_ratio_product(1.0, 0, 50).unwrap();
        assert!((g.product - 51.0).abs() < 1e-10);
        assert!((g.gamma - 51.0).abs() < 1e-10);
        let g = gamma_ratio_product(0.0, 3, 50).unwrap();
        assert_eq!(g.product, 1.0);
        assert!((g.gamma - 1.0).abs() < 1e-15);
        let g = gamma_ratio_product(0.8, 3, 100).unwrap();
        assert!(g.relative_gap() < 1e-12);
        assert!(gamma_ratio_product(0.5, 5, 4).is_err());
    }

    #[test]
    fn ln_gamma_ratio_small_arguments() {
        // Gamma(7)/Gamma(6) = 6, Gamma(2.5)/Gamma(2) = 3 sqrt(pi)/4
        assert!((ln_gamma_ratio(6.0, 1.0).exp() - 6.0).abs() < 1e-13);
        let want = 3.0 * std::f64::consts::PI.sqrt() / 4.0;
        assert!((ln_gamma_ratio(2.0, 0.5).exp() - want).abs() < 1e-13);
    }

    #[test]
    fn expected_ni_trivial_cases() {
        assert!((expected_ni_exact(0.5, 0, 100).unwrap() - 1.0).abs() < 1e-15);
        assert!((expected_ni_exact(0.0, 0, 100).unwrap() - 101.0).abs() < 1e-10);
        let m = urrt_moments_exact(0.0, 0, 10).unwrap();
        assert!((m.second - 121.0).abs() < 1e-10);
        assert!(m.variance().abs() < 1e-10);
    }

    #[test]
    fn zeta_values() {
        let z2 = zeta(2.0).unwrap();
        assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
        // -zeta'(2)
        assert!((zeta_log(2.0).unwrap() - 0.937_548_254_315_843_8).abs() < 1e-10);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn depth_moment_values() {
        let d = depth_moments(1).unwrap();
        assert_eq!((d.mean, d.variance), (1.0, 0.0));
        let d = depth_moments(2).unwrap();
        assert_eq!((d.mean, d.variance), (1.5, 0.25));
        assert!(d.variance <= d.variance_bound);
        assert!(depth_moments(0).is_err());
    }

    #[test]
    fn lemma9_at_alpha_one() {
        let b = &lemma_bounds(Lemma::L9, MomentQuery { q: 0.0, i: 0, n: 5, beta: None }).unwrap()[0];
        assert!((b.exact.unwrap() - 6.0).abs() < 1e-12);
        assert!((b.upper.unwrap() - 6.0).abs() < 1e-12);
        assert!((b.lower.unwrap() - 6.0 / std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn domains_are_enforced_per_lemma() {
        let query = MomentQuery { q: 0.3, i: 1, n: 100, beta: Some(1.0) };
        assert!(lemma_bounds(Lemma::L14, query).is_err());
        assert!(lemma_bounds(Lemma::Pa1, query).is_err());
        let ids: Vec<&str> = bound_suite(query).iter().map(|b| b.source).collect();
        assert!(ids.contains(&"l12") && !ids.contains(&"l14"));
    }
}
