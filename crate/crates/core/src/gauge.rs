//! Absolutely convex hulls of finitely many points and their Minkowski gauges.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::lp::{dot, LinearProgram, LpSolution, LpStatus, ParametricLp, Relation, GEOM_TOL};
use crate::space::NormedSpace;

/// Relative residual above which a vector is treated as outside the span.
const SPAN_TOL: f64 = 1e-9;

/// `aco{v_1, ..., v_k}` inside a polyhedral normed space.
pub struct ConvexBody {
    ambient: Arc<NormedSpace>,
    generators: Vec<Vec<f64>>,
    /// `d x r`, columns form a basis of the span (a subset of the generators).
    basis: DMatrix<f64>,
    /// `r x d` left inverse of `basis`.
    coord_map: DMatrix<f64>,
    gamma_lp: ParametricLp,
    level_lps: Mutex<HashMap<(u64, usize), Arc<ParametricLp>>>,
}

impl std::fmt::Debug for ConvexBody {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvexBody")
            .field("dim", &self.ambient.dim())
            .field("rank", &self.rank())
            .field("generators", &self.generators)
            .finish()
    }
}

/// Bracket returned by [`ConvexBody::gauge_n_bounds`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeBounds {
    pub lower: f64,
    pub upper: f64,
    /// `min(a^-n gauge(x), a^n ||x||)`, valid without solving anything.
    pub analytic_upper: f64,
}

fn gauge_template(coords: &DMatrix<f64>) -> Result<ParametricLp> {
    // minimize sum(mu+ + mu-) s.t. C (mu+ - mu-) = z
    let (r, k) = coords.shape();
    let rows = (0..r)
        .map(|i| {
            let mut row = Vec::with_capacity(2 * k);
            row.extend((0..k).map(|j| coords[(i, j)]));
            row.extend((0..k).map(|j| -coords[(i, j)]));
            (row, Relation::Eq)
        })
        .collect();
    ParametricLp::new(vec![1.0; 2 * k], rows)
}

impl ConvexBody {
    /// Builds the body, dropping zero points, duplicate `+-` pairs and points
    /// that already lie in the hull of the others.
    pub fn new(ambient: Arc<NormedSpace>, points: Vec<Vec<f64>>) -> Result<Self> {
        let d = ambient.dim();
        for p in &points {
            check_dim(d, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("body generator is not finite".into()));
            }
        }
        let scale = points
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let mut gens: Vec<Vec<f64>> = Vec::new();
        for p in points {
            if p.iter().all(|v| v.abs() <= 1e-14 * scale.max(1.0)) {
                continue;
            }
            let same = |q: &Vec<f64>, s: f64| {
                q.iter().zip(&p).all(|(a, b)| (a - s * b).abs() <= GEOM_TOL * scale)
            };
            if !gens.iter().any(|q| same(q, 1.0) || same(q, -1.0)) {
                gens.push(p);
            }
        }
        if gens.is_empty() {
            return Err(Error::InvalidInput("body has only zero generators".into()));
        }

        // Greedy, well-conditioned basis of the span.
        let mut chosen: Vec<usize> = Vec::new();
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        loop {
            let mut best: Option<(f64, usize, Vec<f64>)> = None;
            for (i, g) in gens.iter().enumerate() {
                if chosen.contains(&i) {
                    continue;
                }
                let mut res = g.clone();
                for q in &ortho {
                    let c = dot(q, &res);
                    for (r, qv) in res.iter_mut().zip(q) {
                        *r -= c * qv;
                    }
                }
                let n = dot(&res, &res).sqrt();
                if best.as_ref().is_none_or(|b| n > b.0) {
                    best = Some((n, i, res));
                }
            }
            match best {
                Some((n, i, mut res)) if n > 1e-9 * scale => {
                    for v in res.iter_mut() {
                        *v /= n;
                    }
                    chosen.push(i);
                    ortho.push(res);
                }
                _ => break,
            }
        }
        let r = chosen.len();
        let basis = DMatrix::from_fn(d, r, |i, j| gens[chosen[j]][i]);
        let gram = basis.transpose() * &basis;
        let coord_map = gram
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("degenerate body basis".into()))?
            * basis.transpose();

        let coords_of = |g: &[f64]| -> Vec<f64> {
            (0..r).map(|i| (0..d).map(|j| coord_map[(i, j)] * g[j]).sum()).collect()
        };
        let mut gen_coords: Vec<Vec<f64>> = gens.iter().map(|g| coords_of(g)).collect();

        // Prune generators inside the hull of the remaining ones.
        let mut i = 0;
        while i < gens.len() && gens.len() > 1 {
            let others: Vec<&Vec<f64>> = gen_coords
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, c)| c)
                .collect();
            let k = others.len();
            let mut lp = LinearProgram::minimize(vec![1.0; 2 * k]);
            for row in 0..r {
                let mut coeffs: Vec<f64> = others.iter().map(|c| c[row]).collect();
                coeffs.extend(others.iter().map(|c| -c[row]));
                lp.add_constraint(coeffs, Relation::Eq, gen_coords[i][row]);
            }
            let redundant = match lp.solve()? {
                LpStatus::Optimal(s) => s.value <= 1.0 + 1e-12,
                _ => false,
            };
            if redundant {
                gens.remove(i);
                gen_coords.remove(i);
            } else {
                i += 1;
            }
        }

        let cmat = DMatrix::from_fn(r, gens.len(), |i, j| gen_coords[j][i]);
        let gamma_lp = gauge_template(&cmat)?;
        Ok(ConvexBody {
            ambient,
            generators: gens,
            basis,
            coord_map,
            gamma_lp,
            level_lps: Mutex::new(HashMap::new()),
        })
    }

    pub fn ambient(&self) -> &Arc<NormedSpace> {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    /// Dimension of the span.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Extreme generators, one from each `+-` pair.
    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// `d x r` matrix whose columns span the body.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Coordinates in the span basis, or `None` off the span.
    pub fn coordinates(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        check_dim(self.dim(), x.len())?;
        let (d, r) = self.basis.shape();
        let z: Vec<f64> = (0..r)
            .map(|i| (0..d).map(|j| self.coord_map[(i, j)] * x[j]).sum())
            .collect();
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..d {
            let back: f64 = (0..r).map(|j| self.basis[(i, j)] * z[j]).sum();
            if (back - x[i]).abs() > SPAN_TOL * scale {
                return Ok(None);
            }
        }
        Ok(Some(z))
    }

    pub fn from_coordinates(&self, z: &[f64]) -> Vec<f64> {
        let (d, r) = self.basis.shape();
        (0..d)
            .map(|i| (0..r).map(|j| self.basis[(i, j)] * z[j]).sum())
            .collect()
    }

    pub fn in_span(&self, x: &[f64]) -> Result<bool> {
        Ok(self.coordinates(x)?.is_some())
    }

    /// `inf { t > 0 : x in t K }`; `+inf` off the span.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        Ok(self.gauge_with_dual(x)?.map_or(f64::INFINITY, |(g, _)| g))
    }

    /// Gauge together with an optimal dual vector in span coordinates.
    pub fn gauge_with_dual(&self, x: &[f64]) -> Result<Option<(f64, Vec<f64>)>> {
        Ok(self
            .gauge_solution(x)?
            .map(|s| (s.value.max(0.0), s.duals)))
    }

    fn gauge_solution(&self, x: &[f64]) -> Result<Option<LpSolution>> {
        let Some(z) = self.coordinates(x)? else {
            return Ok(None);
        };
        match self.gamma_lp.solve(&z)? {
            LpStatus::Optimal(s) => Ok(Some(s)),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::LpFailure("gauge program unbounded".into())),
        }
    }

    fn level_lp(&self, a: f64, n: usize) -> Result<Arc<ParametricLp>> {
        let key = (a.to_bits(), n);
        let mut map = self.level_lps.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(lp) = map.get(&key) {
            return Ok(lp.clone());
        }
        // Scaled variables: mu = a^n lambda, v = a^-n w and T = a^n t, so that
        // x = V mu + v, sum|mu| <= T, ||v|| <= a^-2n T, and the gauge is a^-n T.
        let d = self.dim();
        let k = self.generators.len();
        let rho = a.powi(-2 * n as i32);
        let nv = 2 * k + 2 * d + 1;
        let t = nv - 1;
        let mut rows = Vec::new();
        for i in 0..d {
            let mut row = vec![0.0; nv];
            for (j, g) in self.generators.iter().enumerate() {
                row[j] = g[i];
                row[k + j] = -g[i];
            }
            row[2 * k + i] = 1.0;
            row[2 * k + d + i] = -1.0;
            rows.push((row, Relation::Eq));
        }
        let mut row = vec![0.0; nv];
        for v in row.iter_mut().take(2 * k) {
            *v = 1.0;
        }
        row[t] = -1.0;
        rows.push((row, Relation::Le));
        for phi in self.ambient.functionals() {
            for s in [1.0, -1.0] {
                let mut row = vec![0.0; nv];
                for i in 0..d {
                    row[2 * k + i] = s * phi[i];
                    row[2 * k + d + i] = -s * phi[i];
                }
                row[t] = -rho;
                rows.push((row, Relation::Le));
            }
        }
        let mut obj = vec![0.0; nv];
        obj[t] = 1.0;
        let lp = Arc::new(ParametricLp::new(obj, rows)?);
        map.insert(key, lp.clone());
        Ok(lp)
    }

    fn level_rhs(&self, x: &[f64], lp: &ParametricLp) -> Vec<f64> {
        let mut rhs = vec![0.0; lp.num_rows()];
        rhs[..x.len()].copy_from_slice(x);
        rhs
    }

    /// Gauge of `K_n = a^n K + a^-n B_X` at `x`.
    pub fn gauge_n(&self, a: f64, n: usize, x: &[f64]) -> Result<f64> {
        Ok(self.gauge_n_with_subgradient(a, n, x)?.0)
    }

    /// Gauge of `K_n` at `x` and a subgradient (ambient functional).
    pub fn gauge_n_with_subgradient(&self, a: f64, n: usize, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim(), x.len())?;
        if !(a > 1.0) || n == 0 {
            return Err(Error::InvalidInput(format!("need a > 1 and n >= 1, got a = {a}, n = {n}")));
        }
        let lp = self.level_lp(a, n)?;
        let scale = a.powi(-(n as i32));
        // An optimal decomposition for the plain gauge, with T = sum |mu|, is
        // feasible for the level program whenever x lies in the span.
        let crash = || -> Result<Vec<usize>> {
            let mut cols = Vec::new();
            if let Some(s) = self.gauge_solution(x)? {
                cols.extend((0..s.point.len()).filter(|&j| s.point[j] > 0.0));
                cols.push(lp.num_vars() - 1);
            }
            Ok(cols)
        };
        match lp.solve_with_crash(&self.level_rhs(x, &lp), crash)? {
            LpStatus::Optimal(s) => {
                let sub = s.duals[..x.len()].iter().map(|y| y * scale).collect();
                Ok(((s.value * scale).max(0.0), sub))
            }
            other => Err(Error::LpFailure(format!("level gauge program at n = {n} ended {}", status_name(&other)))),
        }
    }

    /// Primal/dual bracket for `gauge_n` plus the decomposition upper bound.
    pub fn gauge_n_bounds(&self, a: f64, n: usize, x: &[f64]) -> Result<GaugeBounds> {
        let (value, sub) = self.gauge_n_with_subgradient(a, n, x)?;
        let dual = dot(&sub, x);
        let gamma = self.gauge(x)?;
        let an = a.powi(n as i32);
        let analytic_upper = (gamma / an).min(an * self.ambient.norm(x)?);
        let lower = value.min(dual).max(0.0);
        let upper = value.max(dual).min(analytic_upper).max(lower);
        Ok(GaugeBounds {
            lower,
            upper,
            analytic_upper,
        })
    }

    /// Slope data of `gauge_n` for large `n`.
    ///
    /// Returns `(c, psi)` where `psi` minimizes the dual norm among functionals
    /// with `|<psi, v_i>| <= 1` and `<psi, x> = gauge(x)`, and `c` is that dual
    /// norm. For all large `n`, `gauge_n(x) = gauge(x) / (a^n + c a^-n)`.
    pub fn linear_regime_slope(&self, x: &[f64], gamma: f64) -> Result<(f64, Vec<f64>)> {
        let d = self.dim();
        let ball = self.ambient.ball_vertices()?;
        let build = |relax: Option<f64>| {
            let mut obj = vec![0.0; d + 1];
            obj[d] = 1.0;
            let mut lp = LinearProgram::minimize(obj);
            for i in 0..d {
                lp.set_bounds(i, f64::NEG_INFINITY, f64::INFINITY);
            }
            let mut row = x.to_vec();
            row.push(0.0);
            match relax {
                None => lp.add_constraint(row, Relation::Eq, gamma),
                Some(f) => lp.add_constraint(row, Relation::Ge, gamma * f),
            }
            for g in &self.generators {
                let mut row = g.clone();
                row.push(0.0);
                lp.add_constraint(row.clone(), Relation::Le, 1.0);
                lp.add_constraint(row, Relation::Ge, -1.0);
            }
            for u in ball {
                let mut row = u.clone();
                row.push(-1.0);
                lp.add_constraint(row, Relation::Le, 0.0);
            }
            lp
        };
        let sol = match build(None).solve()? {
            LpStatus::Optimal(s) => s,
            _ => match build(Some(1.0 - 1e-9)).solve()? {
                LpStatus::Optimal(s) => s,
                other => return Err(Error::LpFailure(format!("slope program ended {}", status_name(&other)))),
            },
        };
        Ok((sol.value.max(0.0), sol.point[..d].to_vec()))
    }
}

fn status_name(status: &LpStatus) -> &'static str {
    match status {
        LpStatus::Optimal(_) => "optimal",
        LpStatus::Infeasible => "infeasible",
        LpStatus::Unbounded => "unbounded",
    }
}
