//! Repeated solves of one LP whose right-hand side varies.
//!
//! Optimal bases found by the simplex are kept together with their inverse.
//! A new right-hand side first tries the cached bases: if `B^-1 b >= 0` the
//! basis stays primal feasible, and since the reduced costs do not depend on
//! `b` it is still optimal.

use std::sync::Mutex;

use nalgebra::DMatrix;

use super::simplex::{solve_with_basis, BasisColumn, LinearProgram, LpSolution, LpStatus, Relation};
use super::simplex::{DEFAULT_PIVOT_LIMIT, LP_TOL};
use crate::error::{Error, Result};

const CACHE_CAPACITY: usize = 64;

struct CachedBasis {
    /// Structural variable per basis slot, or `None` for a slack.
    columns: Vec<Option<usize>>,
    inverse: DMatrix<f64>,
    duals: Vec<f64>,
    costs: Vec<f64>,
}

/// `minimize <c, x>` over `x >= 0` subject to fixed `Le`/`Eq` rows and a
/// right-hand side supplied per call.
pub struct ParametricLp {
    template: LinearProgram,
    cache: Mutex<Vec<CachedBasis>>,
}

impl std::fmt::Debug for ParametricLp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametricLp")
            .field("vars", &self.template.num_vars())
            .field("rows", &self.template.constraints().len())
            .finish()
    }
}

impl ParametricLp {
    pub fn new(objective: Vec<f64>, rows: Vec<(Vec<f64>, Relation)>) -> Result<Self> {
        let mut template = LinearProgram::minimize(objective);
        for (coeffs, rel) in rows {
            if rel == Relation::Ge {
                return Err(Error::InvalidInput(
                    "parametric programs take Le and Eq rows only".into(),
                ));
            }
            template.add_constraint(coeffs, rel, 0.0);
        }
        template.validate()?;
        Ok(ParametricLp {
            template,
            cache: Mutex::new(Vec::new()),
        })
    }

    pub fn num_rows(&self) -> usize {
        self.template.constraints().len()
    }

    pub fn num_vars(&self) -> usize {
        self.template.num_vars()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<LpStatus> {
        self.solve_with_crash(rhs, || Ok(Vec::new()))
    }

    /// Like [`solve`](Self::solve); on a cache miss the simplex starts from a
    /// crash basis built from the variables returned by `crash`.
    pub fn solve_with_crash(
        &self,
        rhs: &[f64],
        crash: impl FnOnce() -> Result<Vec<usize>>,
    ) -> Result<LpStatus> {
        crate::error::check_dim(self.num_rows(), rhs.len())?;
        if let Some(sol) = self.try_cached(rhs) {
            return Ok(LpStatus::Optimal(sol));
        }
        let crash = crash()?;
        let mut lp = self.template.clone();
        for (i, &b) in rhs.iter().enumerate() {
            lp.set_rhs(i, b);
        }
        let (status, basis) = solve_with_basis(&lp, DEFAULT_PIVOT_LIMIT, &crash)?;
        if let (LpStatus::Optimal(_), Some(basis)) = (&status, basis) {
            if let Some(entry) = self.factor(&basis) {
                let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
                cache.insert(0, entry);
                cache.truncate(CACHE_CAPACITY);
            }
        }
        Ok(status)
    }

    fn try_cached(&self, rhs: &[f64]) -> Option<LpSolution> {
        let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        let m = rhs.len();
        let mut xb = vec![0.0; m];
        for k in 0..cache.len() {
            let entry = &cache[k];
            let mut feasible = true;
            for (i, slot) in xb.iter_mut().enumerate() {
                let mut s = 0.0;
                for (j, &b) in rhs.iter().enumerate() {
                    s += entry.inverse[(i, j)] * b;
                }
                if s < -1e-10 * scale {
                    feasible = false;
                    break;
                }
                *slot = s;
            }
            if !feasible {
                continue;
            }
            let mut point = vec![0.0; self.num_vars()];
            for (slot, col) in entry.columns.iter().enumerate() {
                if let Some(j) = col {
                    point[*j] = xb[slot].max(0.0);
                }
            }
            let value: f64 = entry.costs.iter().zip(&xb).map(|(c, x)| c * x).sum();
            let sol = LpSolution {
                value,
                point,
                duals: entry.duals.clone(),
            };
            if k > 0 {
                let e = cache.remove(k);
                cache.insert(0, e);
            }
            return Some(sol);
        }
        None
    }

    fn factor(&self, basis: &[BasisColumn]) -> Option<CachedBasis> {
        let rows = self.template.constraints();
        let m = rows.len();
        if basis.len() != m {
            return None;
        }
        let c = self.template.objective();
        let mut columns = Vec::with_capacity(m);
        let mut bmat = DMatrix::<f64>::zeros(m, m);
        let mut costs = Vec::with_capacity(m);
        for (slot, col) in basis.iter().enumerate() {
            match *col {
                BasisColumn::Variable(j) => {
                    for (i, row) in rows.iter().enumerate() {
                        bmat[(i, slot)] = row.coeffs[j];
                    }
                    columns.push(Some(j));
                    costs.push(c[j]);
                }
                BasisColumn::Slack(i) => {
                    bmat[(i, slot)] = 1.0;
                    columns.push(None);
                    costs.push(0.0);
                }
                BasisColumn::Other => return None,
            }
        }
        let inverse = bmat.try_inverse()?;
        let duals: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|s| costs[s] * inverse[(s, i)]).sum())
            .collect();
        // Keep only bases whose reduced costs certify optimality.
        for (j, &cj) in c.iter().enumerate() {
            let r: f64 = cj - rows.iter().zip(&duals).map(|(row, y)| row.coeffs[j] * y).sum::<f64>();
            if r < -LP_TOL {
                return None;
            }
        }
        for (row, &y) in rows.iter().zip(&duals) {
            if row.relation == Relation::Le && y > LP_TOL {
                return None;
            }
        }
        Some(CachedBasis {
            columns,
            inverse,
            duals,
            costs,
        })
    }
}
