//! The rank-two exchange update against determinants recomputed from
//! scratch with an independent LU factorisation.

use ldod_core::builtin::{Hybrid, Mechanistic};
use ldod_core::criterion::{log_det, model_matrix, phi, relative_efficiency, InfoMatrix, ModelMatrix};
use ldod_core::linalg::{lu_log_det, SymMatrix};
use ldod_core::presets::{enzyme_region, reactor_region, ENZYME_PRIOR, REACTOR_PRIOR};
use ldod_core::{Design, PriorTheta};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `FᵀF` written out directly.
fn gram(rows: &[Vec<f64>]) -> Vec<f64> {
    let p = rows[0].len();
    let mut m = vec![0.0; p * p];
    for r in rows {
        for i in 0..p {
            for j in 0..p {
                m[i * p + j] += r[i] * r[j];
            }
        }
    }
    m
}

fn case() -> impl Strategy<Value = (Vec<Vec<f64>>, usize, Vec<f64>)> {
    (2usize..7).prop_flat_map(|p| {
        (p + 1..p + 9).prop_flat_map(move |n| {
            (
                prop::collection::vec(prop::collection::vec(-2.0f64..2.0, p), n),
                0..n,
                prop::collection::vec(-2.0f64..2.0, p),
            )
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, ..ProptestConfig::default() })]

    #[test]
    fn exchange_ratio_matches_brute_force((rows, i, f_new) in case()) {
        let p = f_new.len();
        let Some(before) = lu_log_det(&gram(&rows), p) else { return Ok(()) };
        prop_assume!(before > -10.0);
        let mut next = rows.clone();
        next[i] = f_new.clone();
        let info = InfoMatrix::from_model_matrix(&ModelMatrix::from_rows(&rows)).unwrap();
        let d = info.exchange_ratio(&rows[i], &f_new);
        match lu_log_det(&gram(&next), p) {
            Some(after) => {
                let direct = (after - before).exp();
                // Near-singular results lose relative accuracy in both paths.
                prop_assume!(direct > 1e-6);
                prop_assert!((d - direct).abs() <= 1e-10 * direct, "{} vs {}", d, direct);
            }
            None => prop_assert!(d.abs() < 1e-8, "{}", d),
        }
    }

    #[test]
    fn applied_exchange_equals_rebuild((rows, i, f_new) in case()) {
        let p = f_new.len();
        let info = InfoMatrix::from_model_matrix(&ModelMatrix::from_rows(&rows));
        prop_assume!(info.is_ok());
        let info = info.unwrap();
        prop_assume!(info.log_det() > -10.0);
        let mut next = rows.clone();
        next[i] = f_new.clone();
        let rebuilt = gram(&next);
        prop_assume!(lu_log_det(&rebuilt, p).is_some_and(|l| l > -10.0));
        let updated = info.apply_exchange(&rows[i], &f_new).unwrap();
        let diff = updated.matrix().as_slice().iter().zip(&rebuilt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12 * (1.0 + rebuilt.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        prop_assert!((updated.log_det() - lu_log_det(&rebuilt, p).unwrap()).abs() < 1e-9);
        let prod = updated.matrix().matmul(updated.inverse());
        prop_assert!(prod.max_abs_diff(&SymMatrix::identity(p)) < 1e-7);
    }
}

#[test]
fn long_update_chains_stay_accurate() {
    let region = reactor_region();
    let theta = PriorTheta::new(REACTOR_PRIOR.to_vec(), 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rows: Vec<Vec<f64>> = (0..24).map(|_| region.sample_point(&mut rng)).collect();
    let design = Design::new(rows.clone(), region.clone()).unwrap();
    let f = model_matrix(&Mechanistic, &design, &theta).unwrap();
    let mut grads: Vec<Vec<f64>> = (0..24).map(|i| f.row(i).to_vec()).collect();
    let mut info = InfoMatrix::from_model_matrix(&f).unwrap();
    let mut accepted = 0;
    while accepted < 200 {
        let i = rng.gen_range(0..24);
        let x = region.sample_point(&mut rng);
        let g = ldod_core::Model::gradient(&Mechanistic, &x, theta.values()).unwrap();
        // Keep the design well conditioned.
        if info.exchange_ratio(&grads[i], &g) < 0.5 {
            continue;
        }
        info.apply_exchange_in_place(&grads[i], &g).unwrap();
        rows[i] = x;
        grads[i] = g;
        accepted += 1;
    }
    let fresh = ModelMatrix::from_rows(&grads);
    let m = fresh.information();
    let scale = m.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(info.matrix().max_abs_diff(&m) <= 1e-10 * scale);
    let residual = m.matmul(info.inverse()).max_abs_diff(&SymMatrix::identity(6));
    assert!(residual < 1e-6, "residual {residual}");
    assert!((info.log_det() - log_det(&fresh)).abs() < 1e-8);
}

#[test]
fn phi_is_invariant_to_run_order() {
    let theta = PriorTheta::new(ENZYME_PRIOR.to_vec(), 6).unwrap();
    let region = enzyme_region();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let mut rows: Vec<Vec<f64>> = (0..18).map(|_| region.sample_point(&mut rng)).collect();
        let a = phi(&Hybrid, &Design::new(rows.clone(), region.clone()).unwrap(), &theta).unwrap();
        rows.shuffle(&mut rng);
        let b = phi(&Hybrid, &Design::new(rows, region.clone()).unwrap(), &theta).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn phi_agrees_with_lu_oracle() {
    let theta = PriorTheta::new(REACTOR_PRIOR.to_vec(), 6).unwrap();
    let region = reactor_region();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let rows: Vec<Vec<f64>> = (0..24).map(|_| region.sample_point(&mut rng)).collect();
        let design = Design::new(rows, region.clone()).unwrap();
        let f = model_matrix(&Mechanistic, &design, &theta).unwrap();
        let grads: Vec<Vec<f64>> = (0..24).map(|i| f.row(i).to_vec()).collect();
        let oracle = lu_log_det(&gram(&grads), 6).unwrap();
        let got = phi(&Mechanistic, &design, &theta).unwrap();
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
    }
}

#[test]
fn singular_designs_give_negative_infinity() {
    let theta = PriorTheta::new(REACTOR_PRIOR.to_vec(), 6).unwrap();
    let design = Design::new(vec![vec![3.0, 2.0, 80.0]; 24], reactor_region()).unwrap();
    assert_eq!(phi(&Mechanistic, &design, &theta).unwrap(), f64::NEG_INFINITY);
    let short = Design::new(vec![vec![3.0, 2.0, 80.0], vec![6.0, 1.0, 70.0]], reactor_region()).unwrap();
    assert_eq!(phi(&Mechanistic, &short, &theta).unwrap(), f64::NEG_INFINITY);
}

#[test]
fn relative_efficiency_formula() {
    assert!((relative_efficiency(-52.7712, -49.5528, 6) - 58.48).abs() < 0.01);
    assert!((relative_efficiency(38.8433, 41.2246, 6) - 67.24).abs() < 0.01);
    assert_eq!(relative_efficiency(1.5, 1.5, 3), 100.0);
}
