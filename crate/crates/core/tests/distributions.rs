//! Sampling laws checked with binomial and chi-square tests.

mod common;

use std::collections::HashMap;

use common::all_parent_sequences;
use rbl_core::broadcast::{assign_bits, assign_bits_decomposed, delta_statistic, Bit};
use rbl_core::rng::RngStream;
use rbl_core::stats::{binomial_sigma, chi_square_gof, chi_square_two_sample, MeanAcc};
use rbl_core::tree::{generate_pa, generate_urrt, Model, PaParams, Tree};
use rbl_core::urn::{urn_simulate, UrnKind, UrnState};

const ALPHA: f64 = 1e-3;

#[test]
fn urrt_second_vertex_is_uniform() {
    let trials = 100_000u64;
    let hits = (0..trials)
        .filter(|&s| generate_urrt(2, &mut RngStream::new(s, 0).rng()).parents()[1] == 0)
        .count() as f64;
    let p = hits / trials as f64;
    assert!((p - 0.5).abs() <= 3.0 * binomial_sigma(0.5, trials));
}

#[test]
fn urrt_is_uniform_over_parent_sequences() {
    for n in [4usize, 6] {
        let index: HashMap<Vec<u32>, usize> = all_parent_sequences(n)
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let mut counts = vec![0u64; index.len()];
        let mut rng = RngStream::new(21, n as u64).rng();
        for _ in 0..1_000_000 {
            counts[index[generate_urrt(n, &mut rng).parents()]] += 1;
        }
        let probs = vec![1.0 / index.len() as f64; index.len()];
        let t = chi_square_gof(&counts, &probs);
        assert!(t.p_value > ALPHA, "n={n}: {t:?}");
    }
}

#[test]
fn pa_third_vertex_prefers_the_root() {
    let trials = 100_000u64;
    let params = PaParams::new(1.0).unwrap();
    let hits = (0..trials)
        .filter(|&s| generate_pa(2, params, &mut RngStream::new(s, 0).rng()).unwrap().parents()[1] == 0)
        .count() as f64;
    let p = hits / trials as f64;
    assert!((p - 2.0 / 3.0).abs() <= 3.0 * binomial_sigma(2.0 / 3.0, trials));
}

/// Probability of a parent sequence under attachment weight `outdegree + beta`.
fn pa_probability(seq: &[u32], beta: f64) -> f64 {
    let mut outdeg = vec![0u32; seq.len() + 1];
    let mut p = 1.0;
    for (k, &j) in seq.iter().enumerate() {
        let i = k + 1;
        p *= (outdeg[j as usize] as f64 + beta) / ((beta + 1.0) * i as f64 - 1.0);
        outdeg[j as usize] += 1;
    }
    p
}

#[test]
fn pa_matches_attachment_weights_at_every_step() {
    for beta in [0.5, 1.0, 3.0] {
        let n = 5;
        let seqs = all_parent_sequences(n);
        let probs: Vec<f64> = seqs.iter().map(|s| pa_probability(s, beta)).collect();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let index: HashMap<&[u32], usize> = seqs.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let mut counts = vec![0u64; seqs.len()];
        let mut rng = RngStream::new(22, 0).rng();
        let params = PaParams::new(beta).unwrap();
        for _ in 0..400_000 {
            counts[index[generate_pa(n, params, &mut rng).unwrap().parents()]] += 1;
        }
        let t = chi_square_gof(&counts, &probs);
        assert!(t.p_value > ALPHA, "beta={beta}: {t:?}");
    }
}

#[test]
fn generation_is_deterministic() {
    for model in [Model::Urrt, Model::Pa { beta: 2.0 }] {
        let a = model.generate(500, &mut RngStream::new(9, 4).rng()).unwrap();
        let b = model.generate(500, &mut RngStream::new(9, 4).rng()).unwrap();
        let c = model.generate(500, &mut RngStream::new(9, 5).rng()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.parents().iter().enumerate().all(|(k, &p)| (p as usize) <= k));
    }
}

#[test]
fn agreement_with_root_decays_with_depth() {
    for q in [0.3, 0.5] {
        let mut agree = [0u64; 11];
        let mut seen = [0u64; 11];
        let mut rng = RngStream::new(23, 0).rng();
        for _ in 0..40_000 {
            let t = generate_urrt(300, &mut rng);
            let a = assign_bits(&t, q, &mut rng).unwrap();
            let bits = a.all_bits().unwrap();
            // first vertex at each depth, so every sample comes from its own tree
            let mut taken = [false; 11];
            for (v, &d) in t.depths().iter().enumerate() {
                let d = d as usize;
                if d <= 10 && !std::mem::replace(&mut taken[d], true) {
                    seen[d] += 1;
                    agree[d] += u64::from(bits[v] == a.root_bit());
                }
            }
        }
        for d in 1..=10 {
            let want = (1.0 + (1.0 - 2.0 * q).powi(d as i32)) / 2.0;
            let got = agree[d] as f64 / seen[d] as f64;
            assert!(
                (got - want).abs() <= 3.0 * binomial_sigma(want, seen[d]),
                "q={q} d={d}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn depth_two_agreement_frequency() {
    // one vertex per tree keeps the samples independent
    let trials = 100_000u64;
    let q = 0.3;
    let (mut agree, mut seen) = (0u64, 0u64);
    let mut rng = RngStream::new(24, 0).rng();
    for _ in 0..trials * 3 {
        let t = generate_urrt(20, &mut rng);
        let depths = t.depths();
        let Some(v) = (1..t.len()).find(|&v| depths[v] == 2) else { continue };
        let a = assign_bits(&t, q, &mut rng).unwrap();
        seen += 1;
        agree += u64::from(a.get(v) == Some(a.root_bit()));
        if seen == trials {
            break;
        }
    }
    let got = agree as f64 / seen as f64;
    assert!((got - 0.58).abs() <= 3.0 * binomial_sigma(0.58, seen));
}

/// Histogram of (depth of the last vertex capped at 12, agreement with root).
fn last_vertex_cells(t: &Tree, bits: &[Bit]) -> usize {
    let v = t.len() - 1;
    let d = (t.depths()[v] as usize).min(12);
    2 * d + usize::from(bits[v] == bits[0])
}

#[test]
fn decomposed_broadcast_has_the_same_law() {
    let n = 200;
    let trials = 100_000;
    for q in [0.2, 0.5] {
        let mut direct = vec![0u64; 26];
        let mut decomp = vec![0u64; 26];
        let mut delta_a = vec![0u64; n + 2];
        let mut delta_b = vec![0u64; n + 2];
        let mut rng = RngStream::new(25, 0).rng();
        for _ in 0..trials {
            let t = generate_urrt(n, &mut rng);
            let a = assign_bits(&t, q, &mut rng).unwrap();
            direct[last_vertex_cells(&t, a.all_bits().unwrap())] += 1;
            delta_a[((delta_statistic(&a).unwrap() + n as i64 + 1) / 2) as usize] += 1;
            let (b, _) = assign_bits_decomposed(&t, q, &mut rng).unwrap();
            decomp[last_vertex_cells(&t, b.all_bits().unwrap())] += 1;
            delta_b[((delta_statistic(&b).unwrap() + n as i64 + 1) / 2) as usize] += 1;
        }
        let t1 = chi_square_two_sample(&direct, &decomp);
        let t2 = chi_square_two_sample(&delta_a, &delta_b);
        assert!(t1.p_value > ALPHA, "q={q}: {t1:?}");
        assert!(t2.p_value > ALPHA, "q={q}: {t2:?}");
    }
}

fn same_count(t: &Tree, bits: &[Bit]) -> usize {
    (0..t.len()).filter(|&v| bits[v] == bits[0]).count()
}

fn same_leaf_count(t: &Tree, bits: &[Bit]) -> usize {
    (0..t.len()).filter(|&v| t.is_leaf(v) && bits[v] == bits[0]).count()
}

#[test]
fn urns_match_tree_simulation_in_law() {
    let n = 10usize;
    let samples = 200_000;
    let q = 0.2;
    let cases = [
        (UrnKind::TwoColor, Model::Urrt),
        (UrnKind::FourColorLeaf, Model::Urrt),
        (UrnKind::PaWeight { beta: 2.0 }, Model::Pa { beta: 2.0 }),
    ];
    for (kind, model) in cases {
        let width = (n + 2) * (n + 2);
        let (mut from_urn, mut from_tree) = (vec![0u64; width], vec![0u64; width]);
        let mut rng = RngStream::new(26, 0).rng();
        let start = UrnState::initial(kind).unwrap();
        for _ in 0..samples {
            let s = urn_simulate(&start, n as u64, q, &mut rng).unwrap();
            let leaf = s.same_leaf_count().unwrap_or(0) as usize;
            from_urn[s.same_count() as usize * (n + 2) + leaf] += 1;
            let t = model.generate(n, &mut rng).unwrap();
            let a = assign_bits(&t, q, &mut rng).unwrap();
            let bits = a.all_bits().unwrap();
            let leaf = if matches!(kind, UrnKind::TwoColor) { 0 } else { same_leaf_count(&t, bits) };
            from_tree[same_count(&t, bits) * (n + 2) + leaf] += 1;
        }
        let t = chi_square_two_sample(&from_urn, &from_tree);
        assert!(t.p_value > ALPHA, "{kind:?}: {t:?}");
    }
}

#[test]
fn urn_means_match_at_a_thousand_steps() {
    let n = 1000usize;
    let runs = 20_000;
    let q = 0.2;
    let mut rng = RngStream::new(27, 0).rng();
    for kind in [UrnKind::TwoColor, UrnKind::FourColorLeaf] {
        let start = UrnState::initial(kind).unwrap();
        let mut urn = MeanAcc::default();
        let mut tree = MeanAcc::default();
        for _ in 0..runs {
            let s = urn_simulate(&start, n as u64, q, &mut rng).unwrap();
            let t = generate_urrt(n, &mut rng);
            let a = assign_bits(&t, q, &mut rng).unwrap();
            let bits = a.all_bits().unwrap();
            match kind {
                UrnKind::TwoColor => {
                    urn.push(s.same_count() as f64);
                    tree.push((n as f64 + 1.0 + delta_statistic(&a).unwrap() as f64) / 2.0);
                }
                _ => {
                    urn.push(s.same_leaf_count().unwrap() as f64);
                    tree.push(same_leaf_count(&t, bits) as f64);
                }
            }
        }
        let gap = (urn.mean() - tree.mean()).abs();
        assert!(gap <= urn.halfwidth() + tree.halfwidth(), "{kind:?}: {} vs {}", urn.mean(), tree.mean());
    }
}

#[test]
fn insertion_depth_mean_is_harmonic() {
    let i = 10_000usize;
    let trials = 20_000;
    let mut rng = RngStream::new(28, 0).rng();
    let acc: MeanAcc = (0..trials)
        .map(|_| {
            let t = generate_urrt(i, &mut rng);
            let mut d = 0;
            let mut v = i;
            while let Some(p) = t.parent(v) {
                v = p;
                d += 1;
            }
            d as f64
        })
        .collect();
    let h: f64 = (1..=i).map(|j| 1.0 / j as f64).sum();
    let var: f64 = (1..=i).map(|j| (1.0 / j as f64) * (1.0 - 1.0 / j as f64)).sum();
    let sigma = (var / trials as f64).sqrt();
    assert!((acc.mean() - h).abs() <= 3.0 * sigma, "{} vs {h}", acc.mean());
}

#[test]
fn root_sign_only_negates_the_pattern() {
    // the pattern relative to the root has the same law for either root bit
    let n = 20usize;
    let mut by_root = [vec![0u64; 2 * n + 3], vec![0u64; 2 * n + 3]];
    let mut rng = RngStream::new(29, 0).rng();
    for _ in 0..200_000 {
        let t = generate_urrt(n, &mut rng);
        let a = assign_bits(&t, 0.3, &mut rng).unwrap();
        let bits = a.all_bits().unwrap();
        // signed sum of the raw bits: negating the root must mirror it
        let raw: i64 = bits.iter().map(|b| b.value()).sum();
        let side = usize::from(a.root_bit() == Bit::Plus);
        let signed = if side == 1 { raw } else { -raw };
        by_root[side][(signed + n as i64 + 1) as usize] += 1;
    }
    let t = chi_square_two_sample(&by_root[0], &by_root[1]);
    assert!(t.p_value > ALPHA, "{t:?}");
}
