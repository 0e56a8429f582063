//! Small polytopes and H-to-V conversion by the double description method.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tolerance for deduplicating vertices.
pub const GEOM_TOL: f64 = 1e-8;
pub const MAX_ENUM_DIM: usize = 6;
/// Facet cap. The L1(m) balls need `J * 2^p` facets, which rules out anything
/// much smaller.
pub const MAX_ENUM_HALFSPACES: usize = 1024;

const ZERO_TOL: f64 = 1e-9;

/// `{ x : <normals[j], x> <= offsets[j] }`.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolytope {
    dim: usize,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl HPolytope {
    pub fn new(dim: usize, normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("polytope dimension must be positive".into()));
        }
        crate::error::check_dim(normals.len(), offsets.len())?;
        for n in &normals {
            crate::error::check_dim(dim, n.len())?;
        }
        if normals.iter().flatten().chain(&offsets).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("halfspace data is not finite".into()));
        }
        Ok(HPolytope {
            dim,
            normals,
            offsets,
        })
    }

    /// The symmetric body `{ x : |<phi_j, x>| <= 1 }`.
    pub fn symmetric(dim: usize, functionals: &[Vec<f64>]) -> Result<Self> {
        let mut normals = Vec::with_capacity(2 * functionals.len());
        for f in functionals {
            normals.push(f.clone());
            normals.push(f.iter().map(|v| -v).collect());
        }
        let n = normals.len();
        HPolytope::new(dim, normals, vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(a, b)| dot(a, x) <= b + tol)
    }
}

impl VPolytope {
    /// Deduplicates to `GEOM_TOL` and sorts lexicographically.
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        for p in &points {
            crate::error::check_dim(dim, p.len())?;
        }
        Ok(VPolytope {
            dim,
            vertices: canonicalize(points),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vec<f64>> {
        self.vertices
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn canonicalize(mut points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        let dup = out
            .iter()
            .any(|q| q.iter().zip(&p).all(|(x, y)| (x - y).abs() <= GEOM_TOL));
        if !dup {
            out.push(p);
        }
    }
    out
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b)
        })
    }
}

struct Ray {
    coords: Vec<f64>,
    zeros: Bits,
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Rank of a set of rows by Gaussian elimination with partial pivoting.
fn rank(rows: &[&[f64]], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let (best, val) = (r..m.len())
            .map(|i| (i, m[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        m.swap(r, best);
        for i in r + 1..m.len() {
            let f = m[i][c] / m[r][c];
            if f != 0.0 {
                for k in c..cols {
                    m[i][k] -= f * m[r][k];
                }
            }
        }
        r += 1;
    }
    r
}

/// Vertices of a bounded H-polytope. Empty input sets give no vertices.
pub fn vertex_enumeration(p: &HPolytope) -> Result<VPolytope> {
    let d = p.dim;
    if d > MAX_ENUM_DIM {
        return Err(Error::ScaleLimit(format!(
            "vertex enumeration in dimension {d} (cap {MAX_ENUM_DIM})"
        )));
    }
    if p.len() > MAX_ENUM_HALFSPACES {
        return Err(Error::ScaleLimit(format!(
            "vertex enumeration with {} halfspaces (cap {MAX_ENUM_HALFSPACES})",
            p.len()
        )));
    }
    // Homogenize: (s, x) with s >= 0 and b s - <a, x> >= 0.
    let dd = d + 1;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(p.len() + 1);
    let mut head = vec![0.0; dd];
    head[0] = 1.0;
    rows.push(head);
    for (a, &b) in p.normals.iter().zip(&p.offsets) {
        let mut g = Vec::with_capacity(dd);
        g.push(b);
        g.extend(a.iter().map(|v| -v));
        normalize(&mut g);
        if g.iter().all(|v| *v == 0.0) {
            continue;
        }
        rows.push(g);
    }
    let nrows = rows.len();

    // Greedy choice of dd independent rows for the initial simplicial cone.
    let mut initial: Vec<usize> = Vec::with_capacity(dd);
    for i in 0..nrows {
        let mut cand: Vec<&[f64]> = initial.iter().map(|&k| rows[k].as_slice()).collect();
        cand.push(&rows[i]);
        if rank(&cand, 1e-9) == cand.len() {
            initial.push(i);
            if initial.len() == dd {
                break;
            }
        }
    }
    if initial.len() < dd {
        return Err(Error::InvalidInput(
            "halfspaces do not describe a bounded polytope".into(),
        ));
    }
    let g0 = DMatrix::from_fn(dd, dd, |i, j| rows[initial[i]][j]);
    let inv = g0
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("singular initial cone".into()))?;
    let mut rays: Vec<Ray> = (0..dd)
        .map(|k| {
            let mut coords: Vec<f64> = (0..dd).map(|i| inv[(i, k)]).collect();
            normalize(&mut coords);
            let mut zeros = Bits::new(nrows);
            for (t, &row) in initial.iter().enumerate() {
                if t != k {
                    zeros.set(row);
                }
            }
            Ray { coords, zeros }
        })
        .collect();

    let mut in_initial = vec![false; nrows];
    for &i in &initial {
        in_initial[i] = true;
    }
    for i in (0..nrows).filter(|&i| !in_initial[i]) {
        let g = &rows[i];
        let vals: Vec<f64> = rays.iter().map(|r| dot(g, &r.coords)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] > ZERO_TOL).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] < -ZERO_TOL).collect();
        if neg.is_empty() {
            for (k, r) in rays.iter_mut().enumerate() {
                if vals[k].abs() <= ZERO_TOL {
                    r.zeros.set(i);
                }
            }
            continue;
        }
        let mut fresh: Vec<Ray> = Vec::new();
        for &kp in &pos {
            for &kn in &neg {
                let common = rays[kp].zeros.and(&rays[kn].zeros);
                if common.count() + 2 < dd {
                    continue;
                }
                let active: Vec<&[f64]> = common.iter().map(|j| rows[j].as_slice()).collect();
                if rank(&active, 1e-9) != dd - 2 {
                    continue;
                }
                let (vp, vn) = (vals[kp], vals[kn]);
                let mut coords: Vec<f64> = rays[kn]
                    .coords
                    .iter()
                    .zip(&rays[kp].coords)
                    .map(|(n, p)| vp * n - vn * p)
                    .collect();
                normalize(&mut coords);
                let mut zeros = common;
                zeros.set(i);
                fresh.push(Ray { coords, zeros });
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (k, mut r) in rays.into_iter().enumerate() {
            if vals[k] < -ZERO_TOL {
                continue;
            }
            if vals[k].abs() <= ZERO_TOL {
                r.zeros.set(i);
            }
            kept.push(r);
        }
        kept.extend(fresh);
        rays = kept;
    }

    let mut vertices = Vec::with_capacity(rays.len());
    for r in &rays {
        let s = r.coords[0];
        if s <= ZERO_TOL {
            return Err(Error::InvalidInput(
                "halfspaces do not describe a bounded polytope".into(),
            ));
        }
        vertices.push(r.coords[1..].iter().map(|v| v / s).collect());
    }
    VPolytope::new(d, vertices)
}
