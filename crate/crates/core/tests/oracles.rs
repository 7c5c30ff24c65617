//! Frozen reference values from an independent fixed-panel Simpson / dense
//! eigensolver computation, plus closed-form limits.

use std::f64::consts::PI;

use dualprecode::channel::RngStream;
use dualprecode::corrstats::{
    elevation_covariance, elevation_spread, mismatch_effective_stats, one_ring_covariance, ArrayLayout,
    GroupGeometry,
};
use dualprecode::linalg::c;
use dualprecode::metrics::run_trial;
use dualprecode::modeswitch::{tau_from_bits, FeedbackBudget};
use dualprecode::scene3d::{path_loss, Scenario3D, Scene3dSpec};
use dualprecode::*;
use num_complex::Complex64;

fn close(a: Complex64, re: f64, im: f64, tol: f64) -> bool {
    (a - c(re, im)).norm() < tol
}

#[test]
fn one_ring_entries() {
    let g = GroupGeometry::new(-PI / 4.0, PI / 12.0).unwrap();
    let r = one_ring_covariance(&g, &ArrayLayout::ula(60, 0.5).unwrap()).unwrap();
    let want = [
        ((0, 1), 0.44885472450904584, -0.8780156618826939),
        ((0, 5), 0.49212233767444274, 0.4780894455853108),
        ((3, 40), 0.03520136036802775, 0.09113406795286466),
        ((0, 59), -0.0570474045295702, 0.024562164407537643),
    ];
    for ((m, k), re, im) in want {
        assert!(close(r.matrix[(m, k)], re, im, 1e-9), "entry ({m},{k}) = {}", r.matrix[(m, k)]);
        assert!(close(r.matrix[(k, m)], re, -im, 1e-9));
    }
    assert_eq!(r.effective_rank, 11);
    for (got, want) in r.eigvals.iter().zip([12.770031988202508, 11.34411515330668, 10.350269527579954]) {
        assert!((got - want).abs() < 1e-8);
    }
}

#[test]
fn narrow_spread_ranks() {
    let ranks = |n: usize, spacing: f64| -> Vec<usize> {
        let arr = ArrayLayout::ula(n, spacing).unwrap();
        (0..4)
            .map(|g| {
                let geo = GroupGeometry::new(-PI / 4.0 + PI / 6.0 * g as f64, 8.0 * PI / 180.0).unwrap();
                one_ring_covariance(&geo, &arr).unwrap().effective_rank
            })
            .collect()
    };
    assert_eq!(ranks(60, 0.5), [8, 9, 9, 8]);
    assert_eq!(ranks(120, 0.25), [8, 9, 9, 8]);
    assert_eq!(ranks(120, 0.5), [11, 14, 14, 11]);
}

#[test]
fn elevation_entries_and_spread() {
    let arr = ArrayLayout::ula(10, 0.5).unwrap();
    let r = elevation_covariance(60.0, 100.0, 100.0 * (PI / 12.0).tan(), &arr).unwrap();
    assert!(close(r.matrix[(0, 1)], 0.6179103507224305, 0.7843825581594496, 1e-9));
    assert!(close(r.matrix[(0, 9)], -0.2436304005420436, 0.8511477442614518, 1e-9));

    let s = 60.0 * (PI / 12.0).tan();
    let want = (60.0 / (60.0 - s)).atan() - PI / 4.0;
    assert!((elevation_spread(60.0, 60.0, s).unwrap() - want).abs() < 1e-12);
    assert!((want - 0.15348385102237694).abs() < 1e-12);
}

#[test]
fn standard_scene_prefilter_gains() {
    let sc = Scenario3D::build(Scene3dSpec::standard().unwrap()).unwrap();
    let want = [1.6925624754173936, 0.8803666926284005, 2.1332927681103455];
    for (reg, w) in sc.regions.iter().zip(want) {
        assert!((reg.lambda_tilde - w).abs() < 1e-8, "λ̃ = {}", reg.lambda_tilde);
    }
    assert_eq!(path_loss(60.0, 60.0), 0.5);
}

#[test]
fn mismatch_closed_forms() {
    let s = mismatch_effective_stats(0.0, PI / 4.0).unwrap();
    assert!((s.c_eff - 0.8183098861837907).abs() < 1e-12);
    assert!((s.chi_eff - 0.22203094070331453).abs() < 1e-12);
    for chi in [0.0, 0.3, 1.0] {
        let a = mismatch_effective_stats(chi, 0.0).unwrap();
        assert_eq!((a.c_eff, a.chi_eff), (1.0, chi));
        let b = mismatch_effective_stats(chi, PI / 2.0).unwrap();
        assert!((b.c_eff - (1.0 + chi) / 2.0).abs() < 1e-12 && (b.chi_eff - 1.0).abs() < 1e-12);
    }
}

#[test]
fn quantization_distortion() {
    let b = FeedbackBudget { n_bits: 50, r: 14 };
    assert!((tau_from_bits(&b, Scheme::Bd).unwrap() - 0.27703653396375477).abs() < 1e-14);
    assert!((tau_from_bits(&b, Scheme::Bds).unwrap() - 2f64.powf(-50.0 / 13.0)).abs() < 1e-14);
}

/// Identical draws, χ = 0, perfect CSIT: the two structures give nearly the
/// same sum rate on every trial (they differ only in power normalization).
#[test]
fn bd_matches_bds_per_trial_without_cross_polar_leakage() {
    let sc = GroupScenario::build(ScenarioSpec::clustered(120, 4, 8, PI / 12.0).unwrap())
        .unwrap()
        .with_params(10.0, ChiModel::Fixed(0.0), CsitModel::Equal { tau_sq: 0.0 })
        .unwrap();
    let mut worst: f64 = 0.0;
    for t in 0..20 {
        let o = run_trial(&sc, &RngStream::new(5, t), true, true).unwrap();
        let (bd, bds) = (o.bd.unwrap().sum_rate, o.bds.unwrap().sum_rate);
        worst = worst.max((bd - bds).abs() / bd);
    }
    assert!(worst < 0.02, "worst per-trial relative gap {worst}");
}
