use std::f64::consts::{FRAC_PI_2, PI};

use cvbridge::criteria::{duan, from_db, to_db};
use cvbridge::gaussian::{symplectic_form, GaussianState, LossChannel, SymplecticMap};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Squeeze(usize, f64, f64),
    Phase(usize, f64),
    Splitter(usize, usize, f64),
}

fn op(n: usize) -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..n, -1.5..1.5f64, 0.0..2.0 * PI).prop_map(|(m, r, a)| Op::Squeeze(m, r, a)),
        (0..n, -PI..PI).prop_map(|(m, p)| Op::Phase(m, p)),
        (0..n, 1..n, 0.0..=1.0f64).prop_map(move |(a, k, t)| Op::Splitter(a, (a + k) % n, t)),
    ]
}

fn map_of(n: usize, op: &Op) -> SymplecticMap {
    match *op {
        Op::Squeeze(m, r, a) => SymplecticMap::squeezer(n, m, r, a).unwrap(),
        Op::Phase(m, p) => SymplecticMap::phase(n, m, p).unwrap(),
        Op::Splitter(a, b, t) => SymplecticMap::beamsplitter(n, a, b, t).unwrap(),
    }
}

fn chain() -> impl Strategy<Value = (usize, Vec<Op>)> {
    (2usize..5).prop_flat_map(|n| (Just(n), prop::collection::vec(op(n), 1..8)))
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn composed_maps_stay_symplectic((n, ops) in chain()) {
        let mut s = SymplecticMap::identity(n);
        for o in &ops {
            s = s.then(&map_of(n, o)).unwrap();
        }
        let j = symplectic_form(n);
        let defect = (s.matrix() * &j * s.matrix().transpose() - &j).norm();
        prop_assert!(defect < 1e-12 * s.matrix().norm().powi(2).max(1.0), "defect {defect}");
    }

    #[test]
    fn composition_order_matches_sequential_application((n, ops) in chain()) {
        let mut s = SymplecticMap::identity(n);
        let mut state = GaussianState::vacuum(n).unwrap();
        for o in &ops {
            let m = map_of(n, o);
            s = s.then(&m).unwrap();
            state = state.transform(&m).unwrap();
        }
        let direct = GaussianState::vacuum(n).unwrap().transform(&s).unwrap();
        let scale = state.cov().abs().max().max(1.0);
        prop_assert!(max_abs_diff(state.cov(), direct.cov()) < 1e-10 * scale);
    }

    #[test]
    fn symplectic_spectrum_is_preserved(
        (n, ops) in chain(),
        thermal in prop::collection::vec(1.0..4.0f64, 4),
    ) {
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            cov[(2 * k, 2 * k)] = thermal[k];
            cov[(2 * k + 1, 2 * k + 1)] = thermal[k];
        }
        let start = GaussianState::new(nalgebra::DVector::zeros(2 * n), cov).unwrap();
        let mut state = start.clone();
        for o in &ops {
            state = state.transform(&map_of(n, o)).unwrap();
        }
        let before = start.symplectic_eigenvalues();
        let after = state.symplectic_eigenvalues();
        let scale = state.cov().abs().max();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-8 * scale.max(1.0), "{before:?} vs {after:?}");
        }
    }

    #[test]
    fn channels_keep_states_physical(
        (n, ops) in chain(),
        losses in prop::collection::vec((0usize..4, 0.0..=1.0f64), 0..6),
    ) {
        let mut state = GaussianState::vacuum(n).unwrap();
        for o in &ops {
            state = state.transform(&map_of(n, o)).unwrap();
            prop_assert!(state.is_physical());
        }
        for &(m, eta) in &losses {
            state = state.attenuate(&LossChannel::new(m % n, eta).unwrap()).unwrap();
            prop_assert!(state.is_physical());
        }
    }

    #[test]
    fn losses_compose_multiplicatively(
        r in -1.5..1.5f64,
        angle in 0.0..PI,
        eta1 in 0.0..=1.0f64,
        eta2 in 0.0..=1.0f64,
    ) {
        let s = GaussianState::vacuum(2).unwrap()
            .squeeze(0, r, angle).unwrap()
            .beamsplitter(0, 1, 0.6).unwrap();
        let twice = s.attenuate(&LossChannel::new(0, eta1).unwrap()).unwrap()
            .attenuate(&LossChannel::new(0, eta2).unwrap()).unwrap();
        let once = s.attenuate(&LossChannel::new(0, eta1 * eta2).unwrap()).unwrap();
        prop_assert!(max_abs_diff(twice.cov(), once.cov()) < 1e-12 * s.cov().abs().max());
    }

    #[test]
    fn product_states_are_never_certified(
        a in (-1.5..1.5f64, 0.0..2.0 * PI, 1.0..3.0f64, -2.0..2.0f64),
        b in (-1.5..1.5f64, 0.0..2.0 * PI, 1.0..3.0f64, -2.0..2.0f64),
    ) {
        let single = |(r, angle, nbar, dx): (f64, f64, f64, f64)| {
            let mut cov = DMatrix::identity(2, 2) * nbar;
            cov[(1, 1)] = nbar;
            GaussianState::new(nalgebra::DVector::zeros(2), cov).unwrap()
                .squeeze(0, r, angle).unwrap()
                .displace(0, dx, -dx).unwrap()
        };
        let (sa, sb) = (single(a), single(b));
        let mut cov = DMatrix::zeros(4, 4);
        cov.view_mut((0, 0), (2, 2)).copy_from(sa.cov());
        cov.view_mut((2, 2), (2, 2)).copy_from(sb.cov());
        let mut mean = nalgebra::DVector::zeros(4);
        mean.rows_mut(0, 2).copy_from(sa.mean());
        mean.rows_mut(2, 2).copy_from(sb.mean());
        let d = duan(&GaussianState::new(mean, cov).unwrap(), 0, 1).unwrap();
        prop_assert!(d.i_value >= 4.0 - 1e-9 && !d.entangled, "I = {}", d.i_value);
    }

    #[test]
    fn db_conversion_inverts(db in -60.0..60.0f64, reference in 0.1..10.0f64) {
        let v = from_db(db, reference).unwrap();
        prop_assert!((to_db(v, reference).unwrap() - db).abs() < 1e-12);
    }
}

#[test]
fn uncertainty_boundary_is_enforced() {
    let tight = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 2.0]));
    assert!(GaussianState::new(nalgebra::DVector::zeros(2), tight).is_ok());
    let broken = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 1.9]));
    assert!(GaussianState::new(nalgebra::DVector::zeros(2), broken).is_err());
}

#[test]
fn quarter_phase_swaps_quadratures() {
    let s = GaussianState::vacuum(1).unwrap().squeeze(0, 0.5, 0.0).unwrap();
    let rotated = s.rotate(0, FRAC_PI_2).unwrap();
    assert!((rotated.cov()[(0, 0)] - s.cov()[(1, 1)]).abs() < 1e-12);
    assert!((rotated.cov()[(1, 1)] - s.cov()[(0, 0)]).abs() < 1e-12);
}
