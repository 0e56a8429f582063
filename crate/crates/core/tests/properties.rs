mod common;

use std::sync::Arc;

use common::{functional_norm, sign_sup};
use gaugefactor::l1m::{l1m_norm, linf_norm};
use gaugefactor::measure::lorentz_21_quasinorm;
use gaugefactor::{
    c_constant, f_of_a, ConvexBody, DfjpParams, DfjpSpace, NormedSpace, Semivariation, SimpleFunction, VectorMeasure,
};
use proptest::prelude::*;

fn entries(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, len)
}

fn space(d: usize) -> impl Strategy<Value = NormedSpace> {
    prop_oneof![
        Just(NormedSpace::linf(d).unwrap()),
        Just(NormedSpace::l1(d).unwrap()),
        prop::collection::vec(entries(d), d..=d + 2)
            .prop_filter_map("functionals must span", move |f| NormedSpace::custom(d, f).ok()),
    ]
}

prop_compose! {
    fn measure()(d in 1..=3usize, p in 1..=5usize)
        (space in space(d), atoms in prop::collection::vec(entries(d), p)) -> Option<VectorMeasure> {
        VectorMeasure::new(Arc::new(space), atoms).ok()
    }
}

prop_compose! {
    /// A measure with a function and a set on its atoms.
    fn measure_with_data()(m in measure().prop_filter_map("nonzero", |m| m))
        (f in entries(m.num_atoms()), g in entries(m.num_atoms()), set in 0..=m.full_set(), m in Just(m))
        -> (VectorMeasure, SimpleFunction, SimpleFunction, u32) {
        (m, SimpleFunction::new(f), SimpleFunction::new(g), set)
    }
}

prop_compose! {
    /// A full-dimensional body inside the unit ball and a point.
    fn body_and_point()(d in 1..=3usize)
        (space in space(d), gens in prop::collection::vec(entries(d), d..=d + 2), x in entries(d), y in entries(d),
         shrink in 0.2..1.0f64)
        -> Option<(Arc<ConvexBody>, Vec<f64>, Vec<f64>)> {
        let space = Arc::new(space);
        let max = gens.iter().map(|g| space.norm(g).unwrap()).fold(0.0f64, f64::max);
        if max < 1e-3 {
            return None;
        }
        let gens: Vec<Vec<f64>> = gens.iter().map(|g| g.iter().map(|v| v * shrink / max).collect()).collect();
        let body = ConvexBody::new(space, gens).ok()?;
        (body.rank() == x.len()).then(|| (Arc::new(body), x, y))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semivariation_is_a_monotone_subadditive_minorant_of_variation(
        (m, _, _, set) in measure_with_data(),
        other in 0u32..32,
    ) {
        let other = other & m.full_set();
        let sv = m.semivariation(set).unwrap();
        prop_assert!(sv <= m.variation(set).unwrap() + 1e-12);
        prop_assert!((sv - m.semivariation_dual(set)).abs() < 1e-10);
        prop_assert!(m.semivariation(set & other).unwrap() <= sv + 1e-12);
        let union = m.semivariation(set | other).unwrap();
        prop_assert!(union <= sv + m.semivariation(other).unwrap() + 1e-12);
        // ||m(A)|| <= ||m||(A)
        prop_assert!(functional_norm(m.codomain().functionals(), &m.value_on(set)) <= sv + 1e-12);
    }

    #[test]
    fn l1m_norm_is_a_lattice_norm_and_module(
        (m, f, g, set) in measure_with_data(),
        c in -3.0..3.0f64,
    ) {
        let nf = l1m_norm(&m, &f).unwrap();
        prop_assert!((nf - sign_sup(&m, f.values(), m.full_set())).abs() < 1e-10);
        // |f| <= |f| + |g| pointwise
        let dominating = SimpleFunction::new(f.values().iter().zip(g.values()).map(|(a, b)| a.abs() + b.abs()).collect());
        prop_assert!(nf <= l1m_norm(&m, &dominating).unwrap() + 1e-12);
        let sum = SimpleFunction::new(f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect());
        prop_assert!(l1m_norm(&m, &sum).unwrap() <= nf + l1m_norm(&m, &g).unwrap() + 1e-12);
        let scaled = SimpleFunction::new(f.values().iter().map(|v| c * v).collect());
        prop_assert!((l1m_norm(&m, &scaled).unwrap() - c.abs() * nf).abs() <= 1e-12 * (1.0 + nf));
        // ||f g||_L1(m) <= ||g||_inf ||f||_L1(m)
        let prod = f.product(&g).unwrap();
        prop_assert!(l1m_norm(&m, &prod).unwrap() <= linf_norm(&m, &g).unwrap() * nf + 1e-12);
        // ||f||_L1(m) <= ||f||_inf ||m||(Omega)
        prop_assert!(nf <= linf_norm(&m, &f).unwrap() * m.semivariation(m.full_set()).unwrap() + 1e-12);
        let chi = SimpleFunction::characteristic(m.num_atoms(), set);
        prop_assert!((l1m_norm(&m, &chi).unwrap() - m.semivariation(set).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn lorentz_quasinorm_of_indicators((m, _, _, set) in measure_with_data()) {
        let chi = SimpleFunction::characteristic(m.num_atoms(), set);
        let q = lorentz_21_quasinorm(&m, &chi).unwrap();
        prop_assert_eq!(q, 2.0 * m.semivariation(set).unwrap().sqrt());
    }

    #[test]
    fn gauge_is_a_seminorm(data in body_and_point(), c in -3.0..3.0f64) {
        let Some((body, x, y)) = data else { return Ok(()) };
        let gx = body.gauge(&x).unwrap();
        let gy = body.gauge(&y).unwrap();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(body.gauge(&sum).unwrap() <= gx + gy + 1e-9);
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        prop_assert!((body.gauge(&cx).unwrap() - c.abs() * gx).abs() <= 1e-9 * (1.0 + gx));
        // the body sits inside the unit ball
        prop_assert!(body.ambient().norm(&x).unwrap() <= gx + 1e-9);
    }

    #[test]
    fn k_norm_is_sandwiched_by_the_series_constant(
        data in body_and_point(),
        a in prop_oneof![Just(1.5), Just(2.0), Just(4.0)],
    ) {
        let Some((body, x, _)) = data else { return Ok(()) };
        let space = DfjpSpace::new(body.clone(), DfjpParams::with_a(a).unwrap()).unwrap();
        let k = space.norm(&x).unwrap();
        let f = f_of_a(a, 1e-12).unwrap().value;
        let (norm, gauge) = (body.ambient().norm(&x).unwrap(), body.gauge(&x).unwrap());
        prop_assert!(f * norm <= k.value + k.error_bound + 1e-9);
        prop_assert!(k.value <= f * gauge + 1e-9);
        // on K itself the square is controlled by the norm
        if gauge <= 1.0 {
            prop_assert!(k.value * k.value <= c_constant(a) * norm + 1e-9);
        }
    }
}
