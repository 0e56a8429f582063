//! Library results against independent brute-force computations.

mod common;

use std::sync::Arc;

use common::*;
use gaugefactor::dfjp::{factor_operator, f_of_a};
use gaugefactor::factor::normalize;
use gaugefactor::l1m::{l1m_ball, l1m_norm, linf_to_l1};
use gaugefactor::lp::{vertex_enumeration, HPolytope, LinearProgram, LpStatus, Relation};
use gaugefactor::measure::{full_set, lorentz_21_quasinorm};
use gaugefactor::{
    a_bar_default, c_constant, check_measure, CheckOptions, ConvexBody, DfjpParams, DfjpSpace, FunctionSpace,
    LinearMap, NormedSpace, Semivariation, SimpleFunction, VectorMeasure,
};
use nalgebra::DMatrix;
use rand::Rng;

#[test]
fn series_at_two_matches_direct_sum() {
    let direct = f_direct(2.0, 200);
    let f = f_of_a(2.0, 1e-13).unwrap();
    assert!((f.value - direct).abs() <= 1e-13);
    assert!(f.error_bound <= 1e-13);
    // frozen from the 200-term sum
    assert!((direct - 0.48547627415271016).abs() <= 1e-15);
}

#[test]
fn isometric_root_matches_direct_sum() {
    let a = a_bar_default().value;
    assert!((f_direct(a, 400) - 1.0).abs() <= 1e-12);
    assert!(f_direct(a - 1e-9, 400) > 1.0 && f_direct(a + 1e-9, 400) < 1.0);
    let c = 0.25 + 0.5 / a.ln();
    assert_eq!(c_constant(a), c);
    assert!((c - 2.5).abs() < 1e-9);
}

#[test]
fn vertex_enumeration_matches_subsystem_search() {
    let mut rng = rng(1);
    for _ in 0..60 {
        let d = rng.random_range(1..=3);
        let k = rng.random_range(d..=d + 3);
        let functionals: Vec<Vec<f64>> = (0..k).map(|_| random_vec(&mut rng, d)).collect();
        let Ok(space) = NormedSpace::custom(d, functionals.clone()) else { continue };
        let h = HPolytope::symmetric(d, space.functionals()).unwrap();
        let mut ours = vertex_enumeration(&h).unwrap().into_vertices();
        let mut brute = brute_vertices(h.normals(), h.offsets(), d);
        let key = |v: &Vec<f64>| v.iter().map(|x| (x * 1e6).round() as i64).collect::<Vec<_>>();
        ours.sort_by_key(key);
        brute.sort_by_key(key);
        assert_eq!(ours.len(), brute.len());
        for (a, b) in ours.iter().zip(&brute) {
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-7), "{a:?} {b:?}");
        }
    }
}

#[test]
fn lp_optimum_matches_vertex_search_and_duals_certify_it() {
    let mut rng = rng(2);
    for _ in 0..100 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=4);
        let c: Vec<f64> = random_vec(&mut rng, n);
        let rows: Vec<Vec<f64>> = (0..m).map(|_| random_vec(&mut rng, n)).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let mut lp = LinearProgram::minimize(c.clone());
        for (r, &rhs) in rows.iter().zip(&b) {
            lp.add_constraint(r.clone(), Relation::Le, rhs);
        }
        // box keeps every instance bounded
        for j in 0..n {
            lp.set_bounds(j, 0.0, 2.0);
        }
        let mut normals = rows.clone();
        let mut offsets = b.clone();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            normals.push(e.clone());
            offsets.push(2.0);
            e[j] = -1.0;
            normals.push(e);
            offsets.push(0.0);
        }
        let best = brute_vertices(&normals, &offsets, n)
            .iter()
            .map(|v| dot(&c, v))
            .fold(f64::INFINITY, f64::min);
        match lp.solve().unwrap() {
            LpStatus::Optimal(sol) => {
                assert!((sol.value - best).abs() < 1e-9, "{} vs {best}", sol.value);
                assert!((dot(&c, &sol.point) - sol.value).abs() < 1e-9);
                for (r, &rhs) in rows.iter().zip(&b) {
                    assert!(dot(r, &sol.point) <= rhs + 1e-9);
                }
                for &y in &sol.duals {
                    assert!(y <= 1e-12);
                }
            }
            other => panic!("origin is feasible, got {other:?}"),
        }
    }
}

#[test]
fn gauge_matches_bisection_membership() {
    let mut rng = rng(3);
    for _ in 0..200 {
        let d = rng.random_range(1..=3);
        let space = Arc::new(random_space(&mut rng, d));
        let gens: Vec<Vec<f64>> = (0..rng.random_range(d..=d + 2)).map(|_| random_vec(&mut rng, d)).collect();
        let body = ConvexBody::new(space, gens.clone()).unwrap();
        let facets = hull_facets(&gens);
        let x = random_vec(&mut rng, d);
        let upper = 1.0 + facets.iter().fold(0.0f64, |u, n| u.max(functional_norm(&[n.clone()], &x)));
        let bis = gauge_by_bisection(&facets, &x, upper);
        assert!((body.gauge(&x).unwrap() - bis).abs() < 1e-7);
    }
}

#[test]
fn semivariation_and_l1m_norm_match_sign_enumeration() {
    let mut rng = rng(4);
    for _ in 0..300 {
        let m = random_measure(&mut rng, 4, 6);
        let p = m.num_atoms();
        let ones = vec![1.0; p];
        let set = rng.random_range(0..=full_set(p));
        let brute = sign_sup(&m, &ones, set);
        assert!((m.semivariation(set).unwrap() - brute).abs() < 1e-10);
        assert!((m.semivariation_dual(set) - brute).abs() < 1e-10);
        let f: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
        let brute = sign_sup(&m, &f, full_set(p));
        assert!((l1m_norm(&m, &SimpleFunction::new(f)).unwrap() - brute).abs() < 1e-10);
    }
}

#[test]
fn l1m_ball_vertices_have_unit_norm() {
    let mut rng = rng(5);
    for _ in 0..50 {
        let m = random_measure(&mut rng, 3, 4);
        for f in l1m_ball(&m).unwrap() {
            let brute = sign_sup(&m, f.values(), m.full_set());
            assert!((brute - 1.0).abs() < 1e-9, "{brute}");
        }
    }
}

#[test]
fn k_norm_matches_term_by_term_series() {
    let mut rng = rng(6);
    for _ in 0..12 {
        let d = rng.random_range(1..=3);
        let space = Arc::new(random_space(&mut rng, d));
        let gens: Vec<Vec<f64>> = (0..rng.random_range(1..=d + 1))
            .map(|_| {
                let v = random_vec(&mut rng, d);
                let n = space.norm(&v).unwrap();
                v.iter().map(|x| x / n * 0.9).collect()
            })
            .collect();
        let body = Arc::new(ConvexBody::new(space, gens.clone()).unwrap());
        let a = 2.0;
        let k = DfjpSpace::new(body.clone(), DfjpParams::with_a(a).unwrap()).unwrap();
        let x: Vec<f64> = gens[0].iter().map(|v| v * 0.7).collect();
        let series: f64 = (1..=60).map(|n| body.gauge_n(a, n, &x).unwrap().powi(2)).sum::<f64>().sqrt();
        let norm = k.norm(&x).unwrap();
        assert!((norm.value - series).abs() <= norm.error_bound + 1e-9, "{} vs {series}", norm.value);
    }
}

#[test]
fn level_gauges_respect_the_inclusion_chain() {
    let mut rng = rng(7);
    for _ in 0..40 {
        let d = rng.random_range(1..=3);
        let space = Arc::new(random_space(&mut rng, d));
        let gens: Vec<Vec<f64>> = (0..rng.random_range(d..=d + 2))
            .map(|_| {
                let v = random_vec(&mut rng, d);
                let n = space.norm(&v).unwrap();
                v.iter().map(|x| x / n * rng.random_range(0.2..1.0)).collect()
            })
            .collect();
        let body = ConvexBody::new(space.clone(), gens).unwrap();
        let x = random_vec(&mut rng, d);
        let (norm, gauge) = (space.norm(&x).unwrap(), body.gauge(&x).unwrap());
        for a in [1.5, a_bar_default().value, 3.0] {
            for n in 1..=6 {
                let an = a.powi(n as i32);
                let g = body.gauge_n(a, n, &x).unwrap();
                // a^n K and a^-n B lie in K_n, which lies in (a^n + a^-n) B
                assert!(g <= gauge / an + 1e-9 && g <= norm * an + 1e-9);
                assert!(g >= norm / (an + 1.0 / an) - 1e-9);
            }
        }
    }
}

#[test]
fn measures_scale_covariantly() {
    let mut rng = rng(8);
    for _ in 0..40 {
        let m = random_measure(&mut rng, 3, 4);
        let f = SimpleFunction::new((0..m.num_atoms()).map(|_| rng.random_range(-1.0..1.0)).collect());
        for c in [0.5, 2.0] {
            let cm = m.scaled(c).unwrap();
            for set in 0..=m.full_set() {
                let (s, cs) = (m.semivariation(set).unwrap(), cm.semivariation(set).unwrap());
                assert!((cs - c * s).abs() <= 1e-12 * (1.0 + s));
                assert!((cm.variation(set).unwrap() - c * m.variation(set).unwrap()).abs() <= 1e-12 * (1.0 + s));
            }
            let (l, cl) = (l1m_norm(&m, &f).unwrap(), l1m_norm(&cm, &f).unwrap());
            assert!((cl - c * l).abs() <= 1e-12 * (1.0 + l));
        }
        let (unit, total) = normalize(&m).unwrap();
        assert!((unit.semivariation(unit.full_set()).unwrap() - 1.0).abs() < 1e-12);
        assert!((total - m.semivariation(m.full_set()).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn body_gauge_scales_inversely() {
    let mut rng = rng(9);
    for _ in 0..40 {
        let d = rng.random_range(1..=3);
        let space = Arc::new(random_space(&mut rng, d));
        let gens: Vec<Vec<f64>> = (0..d + 1).map(|_| random_vec(&mut rng, d)).collect();
        let x = random_vec(&mut rng, d);
        let g = ConvexBody::new(space.clone(), gens.clone()).unwrap().gauge(&x).unwrap();
        for c in [0.5, 2.0] {
            let scaled: Vec<Vec<f64>> = gens.iter().map(|v| v.iter().map(|t| t * c).collect()).collect();
            let gc = ConvexBody::new(space.clone(), scaled).unwrap().gauge(&x).unwrap();
            assert!((gc - g / c).abs() <= 1e-9 * (1.0 + g));
        }
    }
}

#[test]
fn alpha_infinity_and_characteristic_norms() {
    let mut rng = rng(10);
    for _ in 0..40 {
        let m = random_measure(&mut rng, 3, 5);
        let total = sign_sup(&m, &vec![1.0; m.num_atoms()], m.full_set());
        let alpha = linf_to_l1(&m).unwrap().operator_norm().unwrap();
        assert!((alpha - total).abs() < 1e-9);
        for set in 0..=m.full_set() {
            let chi = SimpleFunction::characteristic(m.num_atoms(), set);
            let brute = sign_sup(&m, &vec![1.0; m.num_atoms()], set);
            assert!((l1m_norm(&m, &chi).unwrap() - brute).abs() < 1e-10);
            let q = lorentz_21_quasinorm(&m, &chi).unwrap();
            assert!((q - 2.0 * brute.sqrt()).abs() < 1e-12);
        }
    }
}

#[test]
fn lorentz_quasinorm_of_a_step_function() {
    // ||m||(A) for the scalar measure (1, 2, 3) is the sum of weights.
    let x = Arc::new(NormedSpace::linf(1).unwrap());
    let m = VectorMeasure::new(x, vec![vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    let f = SimpleFunction::new(vec![3.0, -1.0, 2.0]);
    // distribution: t < 1 -> 6, 1 <= t < 2 -> 4, 2 <= t < 3 -> 1
    let expected = 2.0 * (6f64.sqrt() + 4f64.sqrt() + 1f64.sqrt());
    assert!((lorentz_21_quasinorm(&m, &f).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn isometric_factorization_of_random_operators() {
    let mut rng = rng(11);
    let a = a_bar_default().value;
    for _ in 0..15 {
        let dz = rng.random_range(1..=3);
        let dx = rng.random_range(1..=3);
        let z = Arc::new(random_space(&mut rng, dz));
        let x = Arc::new(random_space(&mut rng, dx));
        let t = LinearMap::new(DMatrix::from_fn(dx, dz, |_, _| rng.random_range(-1.0..1.0)), z, x).unwrap();
        let f = factor_operator(&t, DfjpParams::with_a(a).unwrap()).unwrap();
        assert!((f.norms.t_k - f.norms.t).abs() < 1e-8);
        assert!((f.norms.j_k_lower - 1.0).abs() < 1e-8 && (f.norms.j_k_upper - 1.0).abs() < 1e-8);
        let composed = f.composed_matrix();
        assert!((composed - t.matrix()).amax() < 1e-12);
    }
}

#[test]
fn checks_are_deterministic() {
    let mut rng = rng(12);
    let m = random_measure(&mut rng, 3, 4);
    let both = [FunctionSpace::Linf, FunctionSpace::L1];
    let opts = CheckOptions { seed: 5, ..CheckOptions::default() };
    let first = check_measure(&m, &both, DfjpParams::default(), &opts).unwrap();
    let second = check_measure(&m, &both, DfjpParams::default(), &opts).unwrap();
    assert_eq!(first, second);
    assert!(first.passed());
}

#[test]
fn checks_are_invariant_under_scaling() {
    let mut rng = rng(13);
    let both = [FunctionSpace::Linf, FunctionSpace::L1];
    for _ in 0..4 {
        let m = random_measure(&mut rng, 3, 4);
        let base = check_measure(&m, &both, DfjpParams::default(), &CheckOptions::default()).unwrap();
        for c in [0.5, 2.0] {
            let scaled = check_measure(&m.scaled(c).unwrap(), &both, DfjpParams::default(), &CheckOptions::default())
                .unwrap();
            assert!(scaled.passed());
            assert!((scaled.scale - c * base.scale).abs() <= 1e-12 * scaled.scale);
            for (r, s) in base.normalized.iter().zip(&scaled.normalized) {
                assert_eq!(r.check, s.check);
                for (x, y) in r.claims.iter().zip(&s.claims) {
                    assert_eq!((&x.name, x.status, x.cases), (&y.name, y.status, y.cases));
                    if let (Some(a), Some(b)) = (x.worst_slack, y.worst_slack) {
                        assert!((a - b).abs() <= 1e-9, "{} {a} {b}", x.name);
                    }
                }
            }
        }
    }
}
