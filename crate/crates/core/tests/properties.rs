mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use wehrl_core::accel::{e_algorithm, inverse_power};
use wehrl_core::gme::{gme_reference_with, max_gme_bound, GmeConfig};
use wehrl_core::moments::asymptotic_constant_with_max;
use wehrl_core::quadrature::SphereGrid;
use wehrl_core::*;

fn rotated(c: &MajoranaConstellation, r: &[[f64; 3]; 3]) -> MajoranaConstellation {
    MajoranaConstellation::new(
        c.points
            .iter()
            .map(|p| BlochDirection::from_vector(rotate(r, p.to_vector())))
            .collect(),
    )
    .unwrap()
}

#[test]
fn majorana_round_trip_fidelity() {
    let mut rng = rng(1);
    for n in 2..=8 {
        for _ in 0..100 {
            let s = random_state(n, &mut rng);
            let back = from_majorana(&to_majorana(&s)).unwrap();
            assert!(s.fidelity(&back) >= 1.0 - 1e-8, "N={n}: {}", s.fidelity(&back));
        }
    }
}

#[test]
fn majorana_round_trip_special_states() {
    for n in 2..=8 {
        let mut states = vec![SymmetricState::ghz(n).unwrap()];
        states.extend((0..=n).map(|k| SymmetricState::dicke_basis(n, k).unwrap()));
        for s in states {
            let back = from_majorana(&to_majorana(&s)).unwrap();
            assert!(s.fidelity(&back) >= 1.0 - 1e-8);
        }
    }
}

#[test]
fn husimi_matches_direct_expansion() {
    let mut rng = rng(2);
    for n in 1..=6 {
        let s = random_state(n, &mut rng);
        for _ in 0..20 {
            let d = random_direction(&mut rng);
            assert!((husimi(&s, d) - husimi_direct(&s, d.theta, d.phi)).abs() < 1e-13);
        }
    }
}

#[test]
fn husimi_normalization_by_quadrature() {
    let mut rng = rng(3);
    for n in 1..=10 {
        let grid = SphereGrid::exact_for_degree(n);
        for _ in 0..10 {
            let s = random_state(n, &mut rng);
            let avg = grid.average(|v| wehrl_core::states::husimi_at_vector(&s, v));
            assert!((avg - 1.0 / (n + 1) as f64).abs() < 1e-10, "N={n}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn husimi_permutation_invariant(n in 2usize..=7, seed in any::<u64>(), rot in 1usize..7) {
        let mut r = rng(seed);
        let points: Vec<BlochDirection> = (0..n).map(|_| random_direction(&mut r)).collect();
        let mut shuffled = points.clone();
        shuffled.rotate_left(rot % n);
        shuffled.swap(0, n - 1);
        let a = from_majorana(&MajoranaConstellation::new(points).unwrap()).unwrap();
        let b = from_majorana(&MajoranaConstellation::new(shuffled).unwrap()).unwrap();
        for _ in 0..5 {
            let d = random_direction(&mut r);
            prop_assert!((husimi(&a, d) - husimi(&b, d)).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_invariance_of_moments_and_gme(
        n in 2usize..=5,
        seed in any::<u64>(),
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in 0.0f64..6.28,
    ) {
        prop_assume!(axis.iter().map(|a| a * a).sum::<f64>() > 1e-2);
        let mut r = rng(seed);
        let s = random_state(n, &mut r);
        let c = to_majorana(&s);
        let rot = rotation(axis, angle);
        let s2 = from_majorana(&rotated(&c, &rot)).unwrap();
        let m1 = moments_quadrature(&s, 4).unwrap();
        let m2 = moments_quadrature(&s2, 4).unwrap();
        for q in 1..=4 {
            prop_assert!(rel(m1.moment(q), m2.moment(q)) < 1e-9);
        }
        let g1 = gme_reference(&s).value;
        let g2 = gme_reference(&s2).value;
        prop_assert!((g1 - g2).abs() < 1e-8, "{g1} vs {g2}");
    }

    #[test]
    fn e_algorithm_exact_on_power_tails(
        l in 0.1f64..1.0,
        lambdas in prop::collection::vec(-1.0f64..1.0, 1..=4),
        q_start in 2usize..4,
    ) {
        let k = lambdas.len();
        let f: Vec<f64> = (0..=k)
            .map(|j| {
                let q = (q_start + j) as f64;
                l * (1.0 + lambdas.iter().enumerate().map(|(i, lam)| lam * q.powi(-(i as i32 + 1))).sum::<f64>())
            })
            .collect();
        let ex = e_algorithm(&f, q_start, inverse_power, k).unwrap();
        prop_assert!((ex.value - l).abs() < 1e-10, "{} vs {l}", ex.value);
    }

    #[test]
    fn e_algorithm_is_polynomial_extrapolation(ys in prop::collection::vec(0.0f64..1.0, 2..=6)) {
        let k = ys.len() - 1;
        let xs: Vec<f64> = (0..ys.len()).map(|j| 1.0 / (2 + j) as f64).collect();
        let ex = e_algorithm(&ys, 2, inverse_power, k).unwrap();
        let oracle = neville_at_zero(&xs, &ys);
        prop_assert!((ex.value - oracle).abs() < 1e-8 * (1.0 + oracle.abs()));
    }
}

#[test]
fn e_algorithm_exactness_100_trials() {
    let mut r = rng(6);
    for trial in 0..100 {
        let k = 1 + trial % 4;
        let l: f64 = r.random_range(0.1..1.0);
        let lam: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
        let f: Vec<f64> = (2..=2 + k)
            .map(|q| {
                let q = q as f64;
                l * (1.0 + lam.iter().enumerate().map(|(i, a)| a * q.powi(-(i as i32 + 1))).sum::<f64>())
            })
            .collect();
        let ex = e_algorithm(&f, 2, inverse_power, k).unwrap();
        assert!((ex.value - l).abs() < 1e-10);
    }
}

#[test]
fn normalization_first_moment() {
    let mut r = rng(7);
    for n in 2..=10 {
        for _ in 0..100 {
            let s = random_state(n, &mut r);
            let m = moments_dicke(&s, 2).unwrap();
            assert!((m.moment(1) - 1.0 / (n + 1) as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn three_routes_agree() {
    let mut r = rng(8);
    for n in 2..=4 {
        let q_perm = 24 / n;
        for _ in 0..50 {
            let s = random_state(n, &mut r);
            let c = to_majorana(&s);
            let d = moments_dicke(&s, q_perm.max(6)).unwrap();
            let qd = moments_quadrature(&s, 6).unwrap();
            let p = moments_permanent(&c, q_perm).unwrap();
            for q in 1..=6 {
                assert!(rel(d.moment(q), qd.moment(q)) < 1e-9, "N={n} q={q}");
            }
            for q in 1..=q_perm {
                assert!(rel(d.moment(q), p.moment(q)) < 1e-9, "N={n} q={q}: {} {}", d.moment(q), p.moment(q));
            }
        }
    }
    for n in 5..=6 {
        for _ in 0..50 {
            let s = random_state(n, &mut r);
            let d = moments_dicke(&s, 6).unwrap();
            let qd = moments_quadrature(&s, 6).unwrap();
            for q in 1..=6 {
                assert!(rel(d.moment(q), qd.moment(q)) < 1e-9, "N={n} q={q}");
            }
        }
    }
}

#[test]
fn closed_form_moments() {
    for n in 1..=8 {
        let coherent = moments_dicke(&SymmetricState::dicke_basis(n, 0).unwrap(), 8).unwrap();
        for k in 0..=n {
            let seq = moments_dicke(&SymmetricState::dicke_basis(n, k).unwrap(), 8).unwrap();
            for q in 1..=8 {
                assert!(rel(seq.moment(q), dicke_moment(n, k, q)) < 1e-10, "N={n} k={k} q={q}");
                assert!(seq.moment(q) <= coherent_moment(n, q) * (1.0 + 1e-12));
            }
        }
        for q in 1..=8 {
            assert!(rel(coherent.moment(q), coherent_moment(n, q)) < 1e-10);
        }
    }
}

#[test]
fn coherent_bound_is_tight_only_for_coherent_states() {
    let mut r = rng(9);
    for n in 2..=6 {
        let coh = SymmetricState::coherent(n, random_direction(&mut r)).unwrap();
        let m = moments_dicke(&coh, 6).unwrap();
        for q in 2..=6 {
            assert!(rel(m.moment(q), coherent_moment(n, q)) < 1e-12);
        }
        for _ in 0..20 {
            let m = moments_dicke(&random_state(n, &mut r), 6).unwrap();
            for q in 2..=6 {
                assert!(m.moment(q) < coherent_moment(n, q) * (1.0 - 1e-6));
            }
        }
    }
}

#[test]
fn gme_reference_dicke_closed_form() {
    for n in 1..=10 {
        for k in 0..=n {
            let g = gme_reference(&SymmetricState::dicke_basis(n, k).unwrap()).value;
            assert!((g - dicke_gme(n, k)).abs() < 1e-8, "N={n} k={k}: {g} vs {}", dicke_gme(n, k));
            assert!(g <= max_gme_bound(n) + 1e-12);
        }
    }
}

#[test]
fn gme_reference_against_grid_search() {
    let mut r = rng(10);
    for n in 2..=6 {
        for _ in 0..10 {
            let s = random_state(n, &mut r);
            let g = gme_reference(&s).value;
            let grid = 1.0 - husimi_grid_max(&s, 200);
            // the optimizer must do at least as well as the grid, and the
            // grid is within its resolution of the optimum
            assert!(g <= grid + 1e-12);
            assert!(grid - g < 1e-3, "N={n}: {g} vs grid {grid}");
        }
    }
}

#[test]
fn holder_chain_and_gme_bound() {
    let mut r = rng(11);
    for n in 2..=8 {
        for _ in 0..30 {
            let s = random_state(n, &mut r);
            let seq = moments_dicke(&s, 8).unwrap();
            let g = gme_reference(&s).value;
            seq.check_invariants(Some(g)).unwrap();
            for q in 3..=8 {
                assert!(seq.ratio(q) >= seq.ratio(q - 1) - 1e-12);
            }
            for q in 2..=8 {
                assert!(1.0 - seq.ratio(q) >= g - 1e-9);
            }
        }
    }
}

#[test]
fn multi_start_robustness() {
    let mut r = rng(12);
    for n in 2..=6 {
        for _ in 0..200 {
            let s = random_state(n, &mut r);
            let base = gme_reference(&s).value;
            let dense = gme_reference_with(
                &s,
                &GmeConfig {
                    grid_starts: Some(2 * (4 * n).max(32)),
                    ..GmeConfig::default()
                },
            )
            .value;
            assert!((base - dense).abs() < 1e-9, "N={n}: {base} vs {dense}");
        }
    }
}

#[test]
fn generic_scaling_of_ratios() {
    // |S(q)/||Q|| - 1| q stays bounded for generic states
    let mut r = rng(13);
    for _ in 0..10 {
        let s = random_state(4, &mut r);
        let m = 1.0 - gme_reference(&s).value;
        let seq = moments_dicke(&s, 30).unwrap();
        let scaled: Vec<f64> = (10..=30).map(|q| (seq.ratio(q) / m - 1.0).abs() * q as f64).collect();
        let (lo, hi) = scaled.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi <= 2.0 * lo, "{scaled:?}");
        let fit = asymptotic_constant_with_max(&s, 20..=30, m).unwrap();
        assert!(fit.constant.is_finite() && fit.constant > 0.0);
    }
}

#[test]
fn accel_on_coherent_matches_extrapolation_oracle() {
    let seq = moments_dicke(&SymmetricState::dicke_basis(4, 0).unwrap(), 4).unwrap();
    let xs: Vec<f64> = (2..=4).map(|q| 1.0 / q as f64).collect();
    let ys: Vec<f64> = (2..=4).map(|q| (4.0 * q as f64 - 3.0) / (4.0 * q as f64 + 1.0)).collect();
    let oracle = 1.0 - neville_at_zero(&xs, &ys);
    let est = accel_estimate(&seq).unwrap();
    assert!((est.value - oracle).abs() < 1e-12);
    assert!((est.value - 0.002011).abs() < 1e-6, "{}", est.value);
}

#[test]
fn accel_improves_on_dicke() {
    for k in 1..4 {
        let s = SymmetricState::dicke_basis(4, k).unwrap();
        let seq = moments_dicke(&s, 6).unwrap();
        let truth = dicke_gme(4, k);
        let a = accel_estimate(&seq).unwrap().value;
        let r = ratio_estimate(&seq).value;
        assert!((a - truth).abs() < (r - truth).abs());
    }
}
