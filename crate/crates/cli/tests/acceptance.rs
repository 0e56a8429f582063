//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use gaugefactor::dfjp::{f_squared_partial, factor_operator, FactorNorms};
use gaugefactor::factor::{normalize, random_functions, run_checks};
use gaugefactor::l1m::{l1m_ball, l1m_norm, l1m_norm_by_signs, l1m_norm_dual, linf_to_l1};
use gaugefactor::{
    a_bar, a_bar_default, c_constant, f_of_a, factor_im, factor_iinfty, CheckOptions, CheckReport, ConvexBody,
    DfjpParams, LinearMap, NormedSpace, SimpleFunction, VectorMeasure,
};
use gaugefactor_cli::RunConfig;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SEED: u64 = 7;
const CORPUS_SIZE: usize = 100;

struct Outcome {
    failures: usize,
}

impl Outcome {
    fn report(&mut self, id: u32, ok: bool, what: &str, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id:>2}: {what} ({detail})");
        if !ok {
            self.failures += 1;
        }
    }
}

fn random_space(rng: &mut ChaCha8Rng, d: usize) -> NormedSpace {
    match rng.random_range(0..3) {
        0 => NormedSpace::linf(d).unwrap(),
        1 => NormedSpace::l1(d).unwrap(),
        _ => loop {
            let k = rng.random_range(d..=d + 2);
            let f = (0..k)
                .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            if let Ok(s) = NormedSpace::custom(d, f) {
                if s.ball_vertices().is_ok_and(|v| v.len() <= 32) {
                    return s;
                }
            }
        },
    }
}

fn random_operator(rng: &mut ChaCha8Rng) -> LinearMap {
    let dz = rng.random_range(1..=4);
    let dx = rng.random_range(1..=4);
    let z = Arc::new(random_space(rng, dz));
    let x = Arc::new(random_space(rng, dx));
    let m = DMatrix::from_fn(dx, dz, |_, _| rng.random_range(-1.0..1.0));
    LinearMap::new(m, z, x).unwrap()
}

/// A random point of `aco(gens)`, on the boundary about a quarter of the time.
fn point_in_hull(rng: &mut ChaCha8Rng, gens: &[Vec<f64>]) -> Vec<f64> {
    let lam: Vec<f64> = gens.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let l1: f64 = lam.iter().map(|v: &f64| v.abs()).sum::<f64>() * rng.random_range(0.8f64..1.5).max(1.0);
    let d = gens[0].len();
    (0..d)
        .map(|i| gens.iter().zip(&lam).map(|(g, l)| g[i] * l / l1).sum())
        .collect()
}

/// Facets `{y : <n, y> <= 1}` of `aco(gens)` for full-dimensional hulls,
/// found by trying every hyperplane through `d` of the points `+-g_i`.
fn facets(gens: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = gens[0].len();
    let pts: Vec<Vec<f64>> = gens
        .iter()
        .flat_map(|g| [g.clone(), g.iter().map(|v| -v).collect()])
        .collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let a = DMatrix::from_fn(d, d, |r, c| pts[idx[r]][c]);
        if let Some(inv) = a.clone().try_inverse() {
            let n: Vec<f64> = (inv * nalgebra::DVector::from_element(d, 1.0)).iter().copied().collect();
            let valid = pts
                .iter()
                .all(|p| p.iter().zip(&n).map(|(x, y)| x * y).sum::<f64>() <= 1.0 + 1e-9);
            if valid {
                out.push(n);
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < pts.len() - d + i {
                idx[i] += 1;
                for j in i + 1..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `gauge(x)` by bisection on the facet membership test.
fn gauge_by_bisection(facets: &[Vec<f64>], x: &[f64], upper: f64) -> f64 {
    let inside = |t: f64| {
        facets
            .iter()
            .all(|n| n.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() <= t)
    };
    let (mut lo, mut hi) = (0.0, upper);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn worst(reports: &[CheckReport], check: &str, claim: &str) -> Option<f64> {
    reports
        .iter()
        .filter(|r| r.check == check)
        .filter_map(|r| r.claim(claim))
        .filter_map(|c| c.worst_slack)
        .reduce(f64::min)
}

struct Trial {
    m: VectorMeasure,
    unit: VectorMeasure,
    normalized: Vec<CheckReport>,
    raw: Vec<CheckReport>,
    im_norms: FactorNorms,
    inf_norms: FactorNorms,
}

fn main() {
    let mut out = Outcome { failures: 0 };
    let abar = a_bar_default().value;

    // 1
    let start = Instant::now();
    let root = a_bar(1e-12).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let terms = f_of_a(root.value, 1e-14).unwrap().terms;
    let residual = (f_squared_partial(root.value, 2 * terms).sqrt() - 1.0).abs();
    out.report(
        1,
        residual <= 1e-11 && elapsed < 1.0,
        "f(a_bar) = 1",
        format!("a_bar = {}, residual {residual:e} with {} terms, {elapsed:.3} s", root.value, 2 * terms),
    );

    // 2 and 3
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let (mut t_gap, mut j_gap, mut j_bound, mut k_incl) = (0.0f64, 0.0f64, f64::INFINITY, f64::INFINITY);
    let mut k2_slack = f64::INFINITY;
    let mut points = 0usize;
    let mut ops = Vec::new();
    for _ in 0..CORPUS_SIZE {
        let t = random_operator(&mut rng);
        let f = factor_operator(&t, DfjpParams::with_a(abar).unwrap()).unwrap();
        t_gap = t_gap.max((f.norms.t_k - f.norms.t).abs());
        j_gap = j_gap.max((f.norms.j_k_lower - 1.0).abs()).max((f.norms.j_k_upper - 1.0).abs());
        for a in [1.5, 2.0, 5.0] {
            let fa = factor_operator(&t, DfjpParams::with_a(a).unwrap()).unwrap();
            let inv = 1.0 / fa.norms.f_a;
            j_bound = j_bound.min(inv - fa.norms.j_k_upper);
            k_incl = k_incl.min(fa.norms.f_a - fa.max_generator_norm().unwrap());
            ops.push(fa);
        }
        ops.push(f);
    }
    let lno_time = start.elapsed().as_secs_f64();
    out.report(
        2,
        t_gap <= 1e-6 && j_gap <= 1e-6 && j_bound >= -1e-6 && k_incl >= -1e-6 && lno_time < 60.0,
        "||T_K|| = ||T||, ||J_K|| = 1, ||J_K|| <= 1/f(a), K in f(a) B_XK",
        format!(
            "max |T_K - T| {t_gap:e}, max |J_K - 1| {j_gap:e}, min 1/f - J_K {j_bound:e}, min f - sup_K {k_incl:e}, {lno_time:.1} s"
        ),
    );
    let start = Instant::now();
    for f in &ops {
        let c = c_constant(f.norms.a);
        let gens = f.k_body().generators();
        let x_space = f.space.ambient().clone();
        for _ in 0..1000 {
            let x = point_in_hull(&mut rng, gens);
            let k = f.space.norm(&x).unwrap().value;
            k2_slack = k2_slack.min(c * x_space.norm(&x).unwrap() - k * k);
            points += 1;
        }
    }
    out.report(
        3,
        k2_slack >= -1e-5,
        "||x||_K^2 <= C(a) ||x|| on K for a = a_bar, 1.5, 2, 5",
        format!("{points} points, worst slack {k2_slack:e}, {:.1} s", start.elapsed().as_secs_f64()),
    );

    // 4, 5, 8, 9 on the measure corpus at a_bar
    let start = Instant::now();
    let cfg = RunConfig {
        seed: CORPUS_SEED,
        trials: CORPUS_SIZE,
        ..RunConfig::default()
    };
    let params = DfjpParams::with_a(abar).unwrap();
    let trials: Vec<Trial> = (0..CORPUS_SIZE)
        .map(|t| {
            let m = cfg.instance(t).unwrap();
            let opts = CheckOptions {
                seed: cfg.trial_seed(t),
                ..CheckOptions::default()
            };
            let (unit, scale) = normalize(&m).unwrap();
            let inf = factor_iinfty(&unit, params).unwrap();
            let im = factor_im(&unit, params).unwrap();
            let mut normalized = run_checks(&inf, &opts).unwrap();
            normalized.extend(run_checks(&im, &opts).unwrap());
            let mut raw = run_checks(&inf.rescaled(scale).unwrap(), &opts).unwrap();
            raw.extend(run_checks(&im.rescaled(scale).unwrap(), &opts).unwrap());
            Trial {
                m,
                unit,
                normalized,
                raw,
                im_norms: im.norms().clone(),
                inf_norms: inf.norms().clone(),
            }
        })
        .collect();
    let corpus_time = start.elapsed().as_secs_f64();
    let all_raw_pass = trials.iter().all(|t| t.raw.iter().all(CheckReport::passed));

    let criterion = |claims: &[(&str, &str, f64)]| -> (usize, Vec<f64>) {
        let mut passed = 0;
        let mut worst_all = vec![f64::INFINITY; claims.len()];
        for t in &trials {
            let mut ok = true;
            for (k, (check, claim, tol)) in claims.iter().enumerate() {
                let w = worst(&t.normalized, check, claim).unwrap_or(f64::NEG_INFINITY);
                worst_all[k] = worst_all[k].min(w);
                ok &= w >= -tol;
            }
            passed += ok as usize;
        }
        (passed, worst_all)
    };

    let (n4, w4) = criterion(&[
        ("iinfty_factorization", "total_semivariation_preserved", 1e-6),
        ("iinfty_factorization", "interpolation_inequality", 1e-6),
        ("iinfty_factorization", "l1_embedding", 1e-6),
    ]);
    out.report(
        4,
        n4 == CORPUS_SIZE,
        "I_m^inf factorization: total semivariation, interpolation inequality, L1 embedding",
        format!("{n4}/{CORPUS_SIZE}, worst slacks {}", sci(&w4)),
    );

    let (n5, w5) = criterion(&[
        ("im_factorization", "semivariation_preserved", 1e-6),
        ("im_factorization", "equal_norms", 1e-6),
        ("im_factorization", "interpolation_inequality", 1e-6),
        ("im_factorization", "variation_lower", 1e-6),
        ("im_factorization", "variation_upper", 1e-6),
        ("bochner_density", "bochner_inequality", 1e-6),
        ("bochner_density", "density_ratio", 1e-9),
        ("two_variation", "partition_sums", 1e-6),
        ("two_variation", "two_variation", 1e-6),
    ]);
    out.report(
        5,
        n5 == CORPUS_SIZE && all_raw_pass && corpus_time < 600.0,
        "I_m factorization: semivariations, equal norms, inequality, variation sandwich, Bochner, 2-variation",
        format!("{n5}/{CORPUS_SIZE}, raw-scale checks pass: {all_raw_pass}, worst slacks {}, {corpus_time:.1} s", sci(&w5)),
    );

    // 6
    let mut sandwich = f64::INFINITY;
    let mut cases = 0usize;
    for (t, trial) in trials.iter().enumerate() {
        for a in [1.5, 3.0] {
            let fm = factor_im(&trial.unit, DfjpParams::with_a(a).unwrap()).unwrap();
            let (t_norm, j_norm) = (fm.norms().t, fm.norms().j_k_upper);
            let mut samples = l1m_ball(&trial.unit).unwrap();
            samples.extend(random_functions(&trial.unit, 200, cfg.trial_seed(t)).unwrap());
            for f in &samples {
                let l1 = l1m_norm(&trial.unit, f).unwrap();
                let lt = fm.l1_tilde_norm(f).unwrap();
                sandwich = sandwich.min(l1 - lt / t_norm).min(j_norm * lt - l1);
                cases += 1;
            }
        }
    }
    out.report(
        6,
        sandwich >= -1e-6,
        "||T||^-1 ||f||_L1(m~) <= ||f||_L1(m) <= ||J|| ||f||_L1(m~) at a = 1.5, 3",
        format!("{cases} cases, worst slack {sandwich:e}"),
    );

    // 7
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED + 1);
    let (mut semi_gap, mut l1_gap, mut gauge_gap) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let m = random_measure(&mut rng);
        let set = rng.random_range(0..=m.full_set());
        let by_signs = m.semivariation_by_signs(set).unwrap();
        semi_gap = semi_gap.max((by_signs - m.semivariation_dual(set)).abs());
        let f = SimpleFunction::new((0..m.num_atoms()).map(|_| rng.random_range(-2.0..2.0)).collect());
        l1_gap = l1_gap.max((l1m_norm_dual(&m, &f).unwrap() - l1m_norm_by_signs(&m, &f).unwrap()).abs());

        let d = rng.random_range(1..=4);
        let x_space = Arc::new(random_space(&mut rng, d));
        let gens: Vec<Vec<f64>> = (0..rng.random_range(d..=d + 2))
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let body = ConvexBody::new(x_space, gens.clone()).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lp = body.gauge(&x).unwrap();
        let upper = 1.0 + 2.0 * facets(&gens).iter().fold(0.0f64, |u, n| u.max(n.iter().map(|v| v.abs()).sum::<f64>()));
        let bis = gauge_by_bisection(&facets(&gens), &x, upper);
        gauge_gap = gauge_gap.max((lp - bis).abs());
    }
    out.report(
        7,
        semi_gap <= 1e-8 && l1_gap <= 1e-8 && gauge_gap <= 1e-7,
        "semivariation, L1(m) norm and gauge against independent oracles",
        format!("max gaps {semi_gap:e}, {l1_gap:e}, {gauge_gap:e}"),
    );

    // 8
    let (mut im_gap, mut inf_gap, mut alpha_gap, mut chi_gap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for t in &trials {
        for m in [&t.unit, &t.m] {
            let total = m.semivariation_dual(m.full_set());
            alpha_gap = alpha_gap.max((linf_to_l1(m).unwrap().operator_norm().unwrap() - total).abs());
            for set in 0..=m.full_set() {
                let chi = SimpleFunction::characteristic(m.num_atoms(), set);
                chi_gap = chi_gap.max((l1m_norm(m, &chi).unwrap() - m.semivariation_dual(set)).abs());
            }
        }
        im_gap = im_gap.max((t.im_norms.t - 1.0).abs());
        inf_gap = inf_gap.max((t.inf_norms.t - t.unit.semivariation_dual(t.unit.full_set())).abs());
    }
    out.report(
        8,
        im_gap <= 1e-6 && inf_gap <= 1e-6 && alpha_gap <= 1e-6 && chi_gap <= 1e-8,
        "||I_m|| = 1, ||I_m^inf|| = ||alpha_inf|| = ||m||(Omega), ||chi_A||_L1(m) = ||m||(A)",
        format!("max gaps {im_gap:e}, {inf_gap:e}, {alpha_gap:e}, {chi_gap:e}"),
    );

    // 9
    let (n9, w9) = criterion(&[
        ("lorentz_indicator", "indicator_quasinorm", 0.0),
        ("lorentz_indicator", "indicator_bound", 1e-6),
    ]);
    out.report(
        9,
        n9 == CORPUS_SIZE,
        "||chi_A||_L21 = 2 sqrt(||m||(A)) and ||m~(A)||_K <= sqrt(C ||m||(Omega))/2 ||chi_A||_L21",
        format!("{n9}/{CORPUS_SIZE}, worst slacks {}", sci(&w9)),
    );

    // 10
    let dir = tempfile::tempdir().unwrap();
    let csv: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let sub = dir.path().join(format!("run{i}"));
            let status = Command::new(env!("CARGO_BIN_EXE_gaugefactor"))
                .args(["check", "--seed", "7", "--trials", "100", "--out"])
                .arg(&sub)
                .status()
                .unwrap();
            assert!(status.code().is_some());
            std::fs::read(sub.join("claims.csv")).unwrap()
        })
        .collect();
    out.report(
        10,
        !csv[0].is_empty() && csv[0] == csv[1],
        "check --seed 7 --trials 100 twice gives byte-identical CSV",
        format!("{} bytes", csv[0].len()),
    );

    if out.failures > 0 {
        println!("{} criteria failed", out.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}

fn random_measure(rng: &mut ChaCha8Rng) -> VectorMeasure {
    loop {
        let d = rng.random_range(1..=4);
        let p = rng.random_range(1..=5);
        let space = Arc::new(random_space(rng, d));
        let atoms = (0..p)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        if let Ok(m) = VectorMeasure::new(space, atoms) {
            return m;
        }
    }
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}
