//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use gaugefactor::{NormedSpace, VectorMeasure};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sqrt(sum_{n=1}^{terms} (a^n / (a^2n + 1))^2)` term by term.
pub fn f_direct(a: f64, terms: i32) -> f64 {
    (1..=terms)
        .map(|n| {
            let an = a.powi(n);
            (an / (an * an + 1.0)).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Vertices of `{x : <a_j, x> <= b_j}` by solving every `d x d` subsystem.
pub fn brute_vertices(normals: &[Vec<f64>], offsets: &[f64], d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for rows in subsets(normals.len(), d) {
        let a = DMatrix::from_fn(d, d, |r, c| normals[rows[r]][c]);
        let b = DVector::from_iterator(d, rows.iter().map(|&r| offsets[r]));
        let Some(x) = a.lu().solve(&b) else { continue };
        let x: Vec<f64> = x.iter().copied().collect();
        if x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let feasible = normals.iter().zip(offsets).all(|(n, b)| dot(n, &x) <= b + 1e-9);
        if feasible && !out.iter().any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-7)) {
            out.push(x);
        }
    }
    out
}

/// Facets `{y : <n, y> <= 1}` of the full-dimensional `aco(gens)`.
pub fn hull_facets(gens: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = gens[0].len();
    let pts: Vec<Vec<f64>> = gens
        .iter()
        .flat_map(|g| [g.clone(), g.iter().map(|v| -v).collect()])
        .collect();
    let mut out = Vec::new();
    for rows in subsets(pts.len(), d) {
        let a = DMatrix::from_fn(d, d, |r, c| pts[rows[r]][c]);
        let Some(n) = a.lu().solve(&DVector::from_element(d, 1.0)) else { continue };
        let n: Vec<f64> = n.iter().copied().collect();
        if n.iter().all(|v| v.is_finite()) && pts.iter().all(|p| dot(p, &n) <= 1.0 + 1e-9) {
            out.push(n);
        }
    }
    out
}

/// `gauge(x)` by 60 rounds of bisection on facet membership over `[0, upper]`.
pub fn gauge_by_bisection(facets: &[Vec<f64>], x: &[f64], upper: f64) -> f64 {
    let inside = |t: f64| facets.iter().all(|n| dot(n, x) <= t);
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

/// `max_j |<phi_j, x>|`.
pub fn functional_norm(functionals: &[Vec<f64>], x: &[f64]) -> f64 {
    functionals.iter().fold(0.0f64, |m, f| m.max(dot(f, x).abs()))
}

/// `max over eps in {-1, 1}^A of ||sum_A eps_i f_i m_i||`.
pub fn sign_sup(m: &VectorMeasure, weights: &[f64], set: u32) -> f64 {
    let p = m.num_atoms();
    let norms = m.codomain().functionals();
    let mut best: f64 = 0.0;
    for signs in 0..1u32 << p {
        let mut v = vec![0.0; m.dim()];
        for i in (0..p).filter(|i| set >> i & 1 == 1) {
            let s = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            for (acc, x) in v.iter_mut().zip(&m.atoms()[i]) {
                *acc += s * weights[i] * x;
            }
        }
        best = best.max(functional_norm(norms, &v));
    }
    best
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_space(rng: &mut ChaCha8Rng, d: usize) -> NormedSpace {
    match rng.random_range(0..3) {
        0 => NormedSpace::linf(d).unwrap(),
        1 => NormedSpace::l1(d).unwrap(),
        _ => loop {
            let k = rng.random_range(d..=d + 2);
            if let Ok(s) = NormedSpace::custom(d, (0..k).map(|_| random_vec(rng, d)).collect()) {
                return s;
            }
        },
    }
}

pub fn random_measure(rng: &mut ChaCha8Rng, max_dim: usize, max_atoms: usize) -> VectorMeasure {
    loop {
        let d = rng.random_range(1..=max_dim);
        let p = rng.random_range(1..=max_atoms);
        let space = Arc::new(random_space(rng, d));
        let atoms = (0..p)
            .map(|_| if rng.random_bool(0.1) { vec![0.0; d] } else { random_vec(rng, d) })
            .collect();
        if let Ok(m) = VectorMeasure::new(space, atoms) {
            return m;
        }
    }
}
