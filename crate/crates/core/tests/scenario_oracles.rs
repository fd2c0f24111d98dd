use std::f64::consts::{FRAC_PI_2, PI, TAU};

use cvbridge::criteria::JointCombination;
use cvbridge::scenario::{
    analytic_variances, build_state, evaluate, optimize_vbs, phase_scan, solve_balance, Arm, ArmEfficiencies,
    ScenarioConfig, Source, VbsSetting, MODE_1550, MODE_532,
};
use cvbridge::{joint_variance, Grid};
use proptest::prelude::*;

type M4 = [[f64; 4]; 4];

fn mul(a: &M4, b: &M4) -> M4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn transpose(a: &M4) -> M4 {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[i][j] = a[j][i];
        }
    }
    t
}

fn congruence(s: &M4, v: &M4) -> M4 {
    mul(&mul(s, v), &transpose(s))
}

/// Hand-built covariance at the detectors, ordered (x1550, p1550, x532, p532).
fn oracle_cov(v_minus: f64, v_plus: f64, t: f64, eta_532: f64, eta_1550: f64, th1550: f64, th532: f64) -> M4 {
    let r = (1.0 - t * t).sqrt();
    let mut v = [[0.0; 4]; 4];
    v[0][0] = 1.0;
    v[1][1] = 1.0;
    v[2][2] = v_minus;
    v[3][3] = v_plus;
    let bs = [[t, 0.0, r, 0.0], [0.0, t, 0.0, r], [-r, 0.0, t, 0.0], [0.0, -r, 0.0, t]];
    v = congruence(&bs, &v);
    let (g15, g5) = (eta_1550.sqrt(), eta_532.sqrt());
    let scale = [[g15, 0.0, 0.0, 0.0], [0.0, g15, 0.0, 0.0], [0.0, 0.0, g5, 0.0], [0.0, 0.0, 0.0, g5]];
    v = congruence(&scale, &v);
    v[0][0] += 1.0 - eta_1550;
    v[1][1] += 1.0 - eta_1550;
    v[2][2] += 1.0 - eta_532;
    v[3][3] += 1.0 - eta_532;
    let (s1, c1) = th1550.sin_cos();
    let (s2, c2) = th532.sin_cos();
    let rot = [[c1, s1, 0.0, 0.0], [-s1, c1, 0.0, 0.0], [0.0, 0.0, c2, s2], [0.0, 0.0, -s2, c2]];
    congruence(&rot, &v)
}

fn quad(v: &M4, c: [f64; 4]) -> f64 {
    (0..4).map(|i| (0..4).map(|j| c[i] * v[i][j] * c[j]).sum::<f64>()).sum()
}

fn fixed(v_minus: f64, v_plus: f64, vbs: VbsSetting, eta_532: f64, eta_1550: f64) -> ScenarioConfig {
    ScenarioConfig::new(
        Source::fixed(v_minus, v_plus).unwrap(),
        vbs,
        ArmEfficiencies::new(eta_532, eta_1550).unwrap(),
    )
}

/// Exact minimum of `I(cos a, sin a)` over `a in [0, pi/2]`. `I - 4` is a
/// quadratic form in `(t, r)`, so the minimum sits at an eigenvector or an
/// end point.
fn duan_minimum_oracle(v_minus: f64, v_plus: f64, tau5: f64, tau15: f64) -> (f64, f64) {
    let (kp, km) = (v_plus - 1.0, 1.0 - v_minus);
    let m11 = kp * tau5 * tau5 - km * tau5 * tau5;
    let m22 = kp * tau15 * tau15 - km * tau15 * tau15;
    let m12 = -kp * tau5 * tau15 - km * tau5 * tau15;
    let i_at = |t: f64, r: f64| 4.0 + m11 * t * t + 2.0 * m12 * t * r + m22 * r * r;
    let mut best = [(i_at(1.0, 0.0), 1.0), (i_at(0.0, 1.0), 0.0)]
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    let angle = 0.5 * (2.0 * m12).atan2(m11 - m22);
    for a in [angle, angle + FRAC_PI_2, angle - FRAC_PI_2, angle + PI] {
        let (s, c) = a.sin_cos();
        if c >= 0.0 && s >= 0.0 {
            let i = i_at(c, s);
            if i < best.0 {
                best = (i, c);
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pipeline_matches_hand_built_covariance(
        v_minus in 0.01..1.5f64,
        excess in 1.0..20.0f64,
        t in 0.0..=1.0f64,
        eta_532 in 0.0..=1.0f64,
        eta_1550 in 0.0..=1.0f64,
        th1550 in 0.0..TAU,
        th532 in 0.0..TAU,
    ) {
        let v_plus = excess / v_minus;
        let cfg = fixed(v_minus, v_plus, VbsSetting::Transmittance(t), eta_532, eta_1550)
            .with_phases(th1550, th532);
        let state = build_state(&cfg).unwrap();
        let oracle = oracle_cov(v_minus, v_plus, t, eta_532, eta_1550, th1550, th532);
        for (i, row) in oracle.iter().enumerate() {
            for (j, expected) in row.iter().enumerate() {
                prop_assert!((state.cov()[(i, j)] - expected).abs() < 1e-10 * v_plus.max(1.0));
            }
        }
    }

    #[test]
    fn closed_form_matches_pipeline(
        v_minus in 0.01..1.5f64,
        excess in 1.0..20.0f64,
        t in 0.0..=1.0f64,
        eta_532 in 0.0..=1.0f64,
        eta_1550 in 0.0..=1.0f64,
    ) {
        let v_plus = excess / v_minus;
        let cfg = fixed(v_minus, v_plus, VbsSetting::Transmittance(t), eta_532, eta_1550);
        let oracle = oracle_cov(v_minus, v_plus, t, eta_532, eta_1550, 0.0, 0.0);
        let (vx, vp) = analytic_variances(v_minus, v_plus, t, eta_532.sqrt(), eta_1550.sqrt()).unwrap();
        prop_assert!((vx - quad(&oracle, [1.0, 0.0, 1.0, 0.0])).abs() < 1e-10 * v_plus);
        prop_assert!((vp - quad(&oracle, [0.0, 1.0, 0.0, -1.0])).abs() < 1e-10 * v_plus);
        let state = build_state(&cfg).unwrap();
        let x = joint_variance(&state, &JointCombination::x_sum(MODE_1550, MODE_532)).unwrap();
        prop_assert!((vx - x.variance).abs() < 1e-10 * v_plus);
    }

    #[test]
    fn balance_cancels_anti_squeezing(
        eta_532 in 0.01..=1.0f64,
        eta_1550 in 0.01..=1.0f64,
        v_plus in 1.0..200.0f64,
    ) {
        let t = solve_balance(eta_532.sqrt(), eta_1550.sqrt()).unwrap();
        let op = evaluate(&fixed(1.0 / v_plus, v_plus, VbsSetting::Balance, eta_532, eta_1550)).unwrap();
        prop_assert!((op.t - t).abs() < 1e-15);
        prop_assert!((op.duan.var_p_diff - 2.0).abs() < 1e-12 * v_plus.max(1.0));
        prop_assert!((t * t - eta_1550 / (eta_532 + eta_1550)).abs() < 1e-12);
    }

    #[test]
    fn balanced_entanglement_iff_squeezed(
        v_minus in 0.05..2.0f64,
        eta_532 in 0.05..=1.0f64,
        eta_1550 in 0.05..=1.0f64,
    ) {
        let op = evaluate(&fixed(v_minus, 1.0 / v_minus.min(1.0) * 1.5, VbsSetting::Balance, eta_532, eta_1550)).unwrap();
        if (v_minus - 1.0).abs() > 1e-9 {
            prop_assert_eq!(op.duan.entangled, v_minus < 1.0);
        }
    }

    #[test]
    fn optimiser_hits_exact_minimum(
        v_minus in 0.02..0.99f64,
        excess in 1.0..10.0f64,
        eta_532 in 0.05..=1.0f64,
        eta_1550 in 0.05..=1.0f64,
    ) {
        let v_plus = excess / v_minus;
        let out = optimize_vbs(&fixed(v_minus, v_plus, VbsSetting::Optimize, eta_532, eta_1550)).unwrap();
        let (i_min, _) = duan_minimum_oracle(v_minus, v_plus, eta_532.sqrt(), eta_1550.sqrt());
        prop_assert!(out.point.duan.i_value <= i_min + 1e-9 * v_plus, "{} vs {}", out.point.duan.i_value, i_min);
        prop_assert!(out.point.duan.i_value <= out.i_balance + 1e-15);
    }
}

#[test]
fn loss_only_degrades_the_balanced_duan_value() {
    let n = 50;
    let etas: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let i_at = |e5: f64, e15: f64| evaluate(&fixed(0.15, 7.0, VbsSetting::Balance, e5, e15)).unwrap().duan.i_value;
    for (a, &e5) in etas.iter().enumerate() {
        for (b, &e15) in etas.iter().enumerate() {
            let here = i_at(e5, e15);
            if a + 1 < n {
                assert!(i_at(etas[a + 1], e15) <= here + 1e-12);
            }
            if b + 1 < n {
                assert!(i_at(e5, etas[b + 1]) <= here + 1e-12);
            }
        }
    }
}

#[test]
fn symmetric_arms_optimum_is_balance() {
    let out = optimize_vbs(&fixed(0.2, 9.0, VbsSetting::Optimize, 0.7, 0.7)).unwrap();
    assert!((out.t_balance - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((out.point.t - out.t_balance).abs() < 1e-9);
}

#[test]
fn reference_optimum_is_marginally_better() {
    let out = optimize_vbs(&fixed(0.1486, 6.73, VbsSetting::Optimize, 0.81, 0.88)).unwrap();
    let gain = out.i_balance - out.point.duan.i_value;
    assert!(gain > 0.0 && gain < 1e-2, "gain {gain}");
    assert!(out.point.t != out.t_balance);
    let grid_best = (0..=1_000_000)
        .map(|k| {
            let (x, p) = analytic_variances(0.1486, 6.73, k as f64 * 1e-6, 0.9, 0.88f64.sqrt()).unwrap();
            x + p
        })
        .fold(f64::INFINITY, f64::min);
    assert!(out.point.duan.i_value <= grid_best + 1e-12);
}

#[test]
fn unsqueezed_source_gives_flat_objective() {
    let out = optimize_vbs(&fixed(1.0, 1.0, VbsSetting::Optimize, 0.81, 0.88)).unwrap();
    assert!(out.flat_objective);
    assert!((out.point.t - out.t_balance).abs() < 1e-15);
    assert!((out.point.duan.i_value - 4.0).abs() < 1e-12);
}

#[test]
fn phase_scan_extremes_at_squeezed_lock() {
    let cfg = fixed(0.15, 7.0, VbsSetting::Balance, 0.81, 0.88);
    let op = evaluate(&cfg).unwrap();
    let grid = Grid::new(0.0, TAU, 361).unwrap();
    let scan = phase_scan(&cfg, &grid, Arm::Nm532).unwrap();
    let sum = scan.channel("sum_db").unwrap();
    let min = sum.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((min - op.points.a.rel_db).abs() < 1e-12);
    assert!((sum[180] - op.points.b.rel_db).abs() < 1e-12);
    let scan_1550 = phase_scan(&cfg, &grid, Arm::Nm1550).unwrap();
    assert!((scan_1550.channel("sum_db").unwrap()[0] - op.points.a.rel_db).abs() < 1e-12);
}

#[test]
fn boundary_transmittances() {
    for t in [0.0, 1.0] {
        let op = evaluate(&fixed(0.15, 7.0, VbsSetting::Transmittance(t), 0.81, 0.88)).unwrap();
        let oracle = oracle_cov(0.15, 7.0, t, 0.81, 0.88, 0.0, 0.0);
        assert!((op.duan.var_x_sum - quad(&oracle, [1.0, 0.0, 1.0, 0.0])).abs() < 1e-12);
    }
    assert!(fixed(0.15, 7.0, VbsSetting::Transmittance(1.1), 0.81, 0.88).validate().is_err());
}
