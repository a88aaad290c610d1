mod common;

use common::{gaussian, rng};
use lowcon_core::datagen::{gen_predictors, PredictorDist};
use lowcon_core::design::OlhdOptions;
use lowcon_core::linalg::leverage_scores;
use lowcon_core::sampler::{
    blev, iboss, leverage_probabilities, levunw, lowcon, lowcon_detailed, scale_to_cube, select, slev, theta_box,
    unif, LowconOptions, Method, SamplerParams,
};
use lowcon_core::spatial::squared_distance;
use lowcon_core::Matrix;
use rand::Rng;
use std::collections::HashSet;

#[test]
fn uniform_hits_each_row_equally_often() {
    let n = 20;
    let x = gaussian(n, 2, &mut rng(1));
    let mut counts = vec![0usize; n];
    let mut rng = rng(2);
    let trials = 20_000;
    for _ in 0..trials {
        let s = unif(&x, 5, &mut rng).unwrap();
        assert_eq!(s.indices.iter().collect::<HashSet<_>>().len(), 5);
        for i in s.indices {
            counts[i] += 1;
        }
    }
    let expect = trials as f64 * 5.0 / n as f64;
    let sd = (expect * (1.0 - 5.0 / n as f64)).sqrt();
    for c in counts {
        assert!((c as f64 - expect).abs() < 5.0 * sd);
    }
}

#[test]
fn leverage_draw_frequencies_follow_probabilities() {
    let x = gaussian(12, 3, &mut rng(3));
    for alpha in [1.0, 0.9, 0.5] {
        let pi = leverage_probabilities(&x, alpha).unwrap();
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut g = rng(4);
        let (rounds, r) = (5000, 12);
        let mut counts = [0usize; 12];
        for _ in 0..rounds {
            let s = if alpha == 1.0 {
                blev(&x, r, &mut g).unwrap()
            } else {
                slev(&x, r, alpha, &mut g).unwrap()
            };
            for (&i, w) in s.indices.iter().zip(s.weights.as_ref().unwrap()) {
                assert!((w * r as f64 * pi[i] - 1.0).abs() < 1e-12);
                counts[i] += 1;
            }
        }
        let total = (rounds * r) as f64;
        for (c, p) in counts.iter().zip(&pi) {
            let expect = total * p;
            let sd = (total * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - expect).abs() < 5.0 * sd, "alpha {alpha}");
        }
    }
}

#[test]
fn levunw_reuses_blev_draw_without_weights() {
    let x = gaussian(50, 3, &mut rng(5));
    let a = blev(&x, 20, &mut rng(6)).unwrap();
    let b = levunw(&x, 20, &mut rng(6)).unwrap();
    assert_eq!(a.indices, b.indices);
    assert!(b.weights.is_none());
}

#[test]
fn leverage_scoring_can_use_model_rows() {
    let x = gaussian(40, 2, &mut rng(7));
    let model = x.with_intercept();
    let params = SamplerParams::default();
    let s = select(Method::Blev, &x, Some(&model), 15, &params, &mut rng(8)).unwrap();
    let pi = leverage_probabilities(&model, 1.0).unwrap();
    for (&i, w) in s.indices.iter().zip(s.weights.unwrap()) {
        assert!((w * 15.0 * pi[i] - 1.0).abs() < 1e-12);
    }
    let h = leverage_scores(&model).unwrap();
    assert!((h.iter().sum::<f64>() - 3.0).abs() < 1e-10);
}

#[test]
fn iboss_takes_column_extremes_on_normal_data() {
    let p = 5;
    let x = gen_predictors(PredictorDist::D1, 2000, p, &mut rng(9)).unwrap();
    let r = 10 * p + 3;
    let s = iboss(&x, r).unwrap();
    assert_eq!(s.indices.len(), r);
    let unique: HashSet<usize> = s.indices.iter().copied().collect();
    assert_eq!(unique.len(), r);
    // Column 0 is processed first, so its 5 smallest and largest are all in.
    let mut order: Vec<usize> = (0..2000).collect();
    order.sort_by(|&a, &b| x[(a, 0)].total_cmp(&x[(b, 0)]));
    for &i in order.iter().take(5).chain(order.iter().rev().take(5)) {
        assert!(unique.contains(&i));
    }
    // Every column's overall minimum and maximum are selected.
    for j in 0..p {
        let col = x.column_vec(j);
        let argmin = (0..2000).min_by(|&a, &b| col[a].total_cmp(&col[b])).unwrap();
        let argmax = (0..2000).max_by(|&a, &b| col[a].total_cmp(&col[b])).unwrap();
        assert!(unique.contains(&argmin) && unique.contains(&argmax));
    }
    assert!(iboss(&x, 2 * p - 1).is_err());
}

#[test]
fn lowcon_claims_are_greedy_nearest_neighbours() {
    let mut g = rng(10);
    let x = Matrix::from_fn(500, 2, |_, j| g.random_range(0.0..1.0) * (j + 1) as f64);
    let out = lowcon_detailed(&x, 30, &LowconOptions::default(), &mut rng(11)).unwrap();
    let mut claimed = vec![false; 500];
    for (k, &idx) in out.selection.indices.iter().enumerate() {
        let q = out.design.points.row(k);
        let best = (0..500)
            .filter(|&i| !claimed[i])
            .min_by(|&a, &b| {
                squared_distance(out.scaled.row(a), q)
                    .total_cmp(&squared_distance(out.scaled.row(b), q))
                    .then(a.cmp(&b))
            })
            .unwrap();
        assert_eq!(idx, best);
        claimed[idx] = true;
        assert!((out.distances[k] - squared_distance(out.scaled.row(idx), q).sqrt()).abs() < 1e-15);
    }
    let d = out.perturbation();
    for k in 0..30 {
        let norm2: f64 = d.row(k).iter().map(|v| v * v).sum();
        assert!((norm2.sqrt() - out.distances[k]).abs() < 1e-12);
    }
}

/// Dense uniform data: the selection follows the design closely and is
/// spread over the whole square rather than clustered.
#[test]
fn lowcon_selection_spreads_over_dense_square() {
    let mut g = rng(12);
    let x = Matrix::from_fn(20_000, 2, |_, _| g.random_range(-1.0..1.0));
    let out = lowcon_detailed(&x, 16, &LowconOptions::default(), &mut rng(13)).unwrap();
    assert!(out.distances.iter().all(|&d| d < 0.05));
    let mut quadrants = [0usize; 4];
    for row in 0..16 {
        let v = out.selected_scaled();
        let q = (v[(row, 0)] > 0.0) as usize + 2 * (v[(row, 1)] > 0.0) as usize;
        quadrants[q] += 1;
    }
    assert!(quadrants.iter().all(|&c| c >= 2), "{quadrants:?}");
    assert!(out.selection.diagnostics.kappa_sub < 1.5);
}

#[test]
fn lowcon_is_invariant_to_positive_affine_maps() {
    let x = gen_predictors(PredictorDist::D3, 1500, 3, &mut rng(14)).unwrap();
    let shifts = [3.0, -10.0, 0.25];
    let scales = [2.5, 0.01, 7.0];
    let y = Matrix::from_fn(1500, 3, |i, j| shifts[j] + scales[j] * x[(i, j)]);
    let opts = LowconOptions::default();
    let a = lowcon(&x, 30, &opts, &mut rng(15)).unwrap();
    let b = lowcon(&y, 30, &opts, &mut rng(15)).unwrap();
    assert_eq!(a.indices, b.indices);
}

#[test]
fn lowcon_selects_distinct_rows_and_respects_bounds() {
    let x = gen_predictors(PredictorDist::D2, 800, 4, &mut rng(16)).unwrap();
    let s = lowcon(&x, 40, &LowconOptions::default(), &mut rng(17)).unwrap();
    assert_eq!(s.indices.iter().collect::<HashSet<_>>().len(), 40);
    assert!(lowcon(&x, 4, &LowconOptions::default(), &mut rng(0)).is_err());
    let dup = LowconOptions {
        allow_duplicates: true,
        ..LowconOptions::default()
    };
    assert_eq!(lowcon(&x, 40, &dup, &mut rng(17)).unwrap().indices.len(), 40);
}

#[test]
fn lowcon_condition_number_beats_uniform_on_heavy_tails() {
    let mut wins = 0;
    for seed in 0..20 {
        let x = gen_predictors(PredictorDist::D3, 3000, 10, &mut rng(100 + seed)).unwrap();
        let l = lowcon(&x, 40, &LowconOptions::default(), &mut rng(seed)).unwrap();
        let u = unif(&x, 40, &mut rng(seed)).unwrap();
        wins += (l.diagnostics.kappa_sub < u.diagnostics.kappa_sub) as usize;
    }
    assert!(wins >= 15, "{wins}/20");
}

#[test]
fn cube_scaling_and_trimmed_box() {
    let x = gaussian(1001, 2, &mut rng(18));
    let (s, spec) = scale_to_cube(&x).unwrap();
    for j in 0..2 {
        let col = s.column_vec(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((lo, hi), (-1.0, 1.0));
        assert!((spec.unscale(j, s[(7, j)]) - x[(7, j)]).abs() < 1e-12);
    }
    let b = theta_box(&s, 10.0).unwrap();
    for j in 0..2 {
        let inside = s.column(j).filter(|v| (b.lower()[j]..=b.upper()[j]).contains(v)).count();
        assert!((800..=803).contains(&inside));
    }
    let full = theta_box(&s, 0.0).unwrap();
    assert_eq!(full.lower(), &[-1.0, -1.0]);
    let _ = OlhdOptions::default();
}
