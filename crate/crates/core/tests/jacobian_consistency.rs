mod common;
use common as zoo;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torusmix_core::geometry::TorusPoint;
use torusmix_core::maps::{jacobian_numeric, Rearrangement, DEFAULT_FD_STEP};

fn random_points(seed: u64, n: usize) -> Vec<TorusPoint<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| TorusPoint::new(rng.gen(), rng.gen()).unwrap()).collect()
}

#[test]
fn analytic_and_central_difference_jacobians_agree_on_maps() {
    for (name, map) in zoo::zoo_maps() {
        for p in random_points(7, 100) {
            let a = map.jacobian(p).unwrap();
            let n = jacobian_numeric(&map, p, DEFAULT_FD_STEP).unwrap();
            assert!(a.max_abs_diff(&n) < 1e-6, "{name} at {p:?}: {a:?} vs {n:?}");
        }
    }
}

#[test]
fn variational_gradient_matches_differenced_time1_map() {
    for (name, spec) in zoo::zoo_flows() {
        let phi = spec.time1_map().unwrap();
        for p in random_points(11, 20) {
            let a = phi.jacobian(p).unwrap();
            // Richardson-extrapolated central differences: the plain quotient's
            // truncation error grows with the stretching of the strong flow
            let coarse = jacobian_numeric(&phi, p, DEFAULT_FD_STEP).unwrap();
            let fine = jacobian_numeric(&phi, p, DEFAULT_FD_STEP / 2.0).unwrap();
            let n = fine.scale(4.0 / 3.0).add(&coarse.scale(-1.0 / 3.0));
            let tol = 1e-5 * a.frobenius().max(1.0);
            assert!(a.max_abs_diff(&n) < tol, "{name} at {p:?}: {a:?} vs {n:?}");
        }
    }
}

#[test]
fn inverses_round_trip() {
    for (name, map) in zoo::zoo_maps() {
        for p in random_points(3, 100) {
            let q = map.inverse(map.apply(p).unwrap()).unwrap();
            assert!(torusmix_core::geometry::torus_dist(&p, &q) < 1e-12, "{name}");
        }
    }
}
