//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Instances handled here are tiny (tens of rows, a few hundred columns), so
//! the tableau is kept dense and no refactorization is done.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Optimality and feasibility tolerance.
pub const LP_TOL: f64 = 1e-9;
/// Pricing tolerance for the phase-one refinement pass.
const REFINE_TOL: f64 = 1e-14;
/// Smallest pivot element accepted by the ratio test.
const PIVOT_TOL: f64 = 1e-9;
/// Rounds of reinversion after the pivoting loop reports optimality.
const REINVERSIONS: usize = 3;
/// Pivot cap; reaching it means the input is degenerate beyond supported scale.
pub const DEFAULT_PIVOT_LIMIT: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize <objective, x>` subject to linear constraints and per-variable
/// bounds. Variables default to `[0, +inf)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
    /// One multiplier per constraint, in the convention that
    /// `objective - A^T duals` is the reduced-cost vector. For a minimization
    /// `Le` rows carry nonpositive and `Ge` rows nonnegative multipliers.
    pub duals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpStatus {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpStatus::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn variable_bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn with_constraint(mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        self.add_constraint(coeffs, relation, rhs);
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }

    pub fn with_bounds(mut self, var: usize, lower: f64, upper: f64) -> Self {
        self.set_bounds(var, lower, upper);
        self
    }

    pub fn with_free(self, var: usize) -> Self {
        self.with_bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub(crate) fn set_rhs(&mut self, row: usize, rhs: f64) {
        self.constraints[row].rhs = rhs;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::InvalidInput("linear program has no variables".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::InvalidInput(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("constraint {i} is not finite")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("objective is not finite".into()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::InvalidInput(format!("bad bounds on variable {j}")));
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpStatus> {
        solve_lp(self)
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpStatus> {
    solve_with_basis(lp, DEFAULT_PIVOT_LIMIT, &[]).map(|(status, _)| status)
}

/// Identity of a column of the final basis, in terms of the input program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BasisColumn {
    /// A structural variable with bounds `[0, inf)`, used as-is.
    Variable(usize),
    /// The slack of an `Le` row, oriented as `a x + s = b`.
    Slack(usize),
    /// Anything else (split/shifted variables, artificials, bound rows).
    Other,
}

#[derive(Clone, Copy)]
struct StdColumn {
    var: usize,
    sign: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum AuxKind {
    Slack,
    Surplus,
    Artificial,
}

struct Tableau {
    rows: usize,
    cols: usize,
    width: usize,
    data: Vec<f64>,
    reduced: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    pivots: usize,
    limit: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.data[row * w + col];
        {
            let r = &mut self.data[row * w..(row + 1) * w];
            for v in r.iter_mut() {
                *v /= p;
            }
            r[col] = 1.0;
        }
        let pivot_row: Vec<f64> = self.data[row * w..(row + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.data[i * w + col];
            if f != 0.0 {
                let r = &mut self.data[i * w..(i + 1) * w];
                for (v, &pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (v, &pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.reduced[col] = 0.0;
        }
        self.is_basic[self.basis[row]] = false;
        self.basis[row] = col;
        self.is_basic[col] = true;
        self.pivots += 1;
    }

    /// Recomputes the reduced-cost row (last entry holds minus the objective).
    fn price(&mut self, costs: &[f64]) {
        let w = self.width;
        let mut reduced = vec![0.0; w];
        reduced[..self.cols].copy_from_slice(costs);
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                for (v, &a) in reduced.iter_mut().zip(&self.data[i * w..(i + 1) * w]) {
                    *v -= cb * a;
                }
            }
        }
        self.reduced = reduced;
    }

    /// Rebuilds the tableau as `B^-1 [A | b]` from the original data to
    /// shed accumulated rounding.
    fn reinvert(&mut self, original: &[f64]) {
        let m = self.rows;
        let w = self.width;
        if m == 0 {
            return;
        }
        let b = DMatrix::from_fn(m, m, |i, k| original[i * w + self.basis[k]]);
        let full = DMatrix::from_fn(m, w, |i, j| original[i * w + j]);
        let Some(solved) = b.lu().solve(&full) else {
            return;
        };
        for i in 0..m {
            for j in 0..w {
                self.data[i * w + j] = solved[(i, j)];
            }
        }
        for (i, &col) in self.basis.iter().enumerate() {
            for k in 0..m {
                self.data[k * w + col] = if k == i { 1.0 } else { 0.0 };
            }
        }
    }

    /// Pivots to optimality, reinverting and re-pricing until the fresh
    /// tableau confirms it. Returns `false` on unboundedness.
    fn optimize(
        &mut self,
        allowed: &dyn Fn(usize) -> bool,
        costs: &[f64],
        pricing_tol: f64,
        original: &[f64],
    ) -> Result<bool> {
        for _ in 0..REINVERSIONS {
            if !self.run(allowed, pricing_tol)? {
                return Ok(false);
            }
            let before = self.pivots;
            self.reinvert(original);
            self.price(costs);
            if !self.run(allowed, pricing_tol)? {
                return Ok(false);
            }
            if self.pivots == before {
                return Ok(true);
            }
        }
        Ok(true)
    }

    /// Pivots `columns` into the basis ahead of phase one, each into the
    /// artificial row with the largest entry, or else into a row whose basic
    /// value it turns nonnegative. Returns whether the basis is feasible.
    fn crash(&mut self, columns: &[usize], first_art: usize, scale: f64) -> bool {
        for &col in columns {
            if self.is_basic[col] {
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col).abs();
                if self.basis[i] >= first_art && a > PIVOT_TOL && best.is_none_or(|(b, _)| a > b) {
                    best = Some((a, i));
                }
            }
            if best.is_none() {
                for i in 0..self.rows {
                    let (a, b) = (self.at(i, col), self.rhs(i));
                    if self.basis[i] < first_art && b < 0.0 && a < -PIVOT_TOL && best.is_none_or(|(v, _)| b < v) {
                        best = Some((b, i));
                    }
                }
            }
            if let Some((_, row)) = best {
                self.pivot(row, col);
            }
        }
        (0..self.rows).all(|i| self.rhs(i) >= -1e-12 * (1.0 + scale))
    }

    /// Runs Bland's rule until no reduced cost is below `-pricing_tol`.
    /// Returns `false` on unboundedness.
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool, pricing_tol: f64) -> Result<bool> {
        loop {
            let entering = (0..self.cols)
                .find(|&j| allowed(j) && !self.is_basic[j] && self.reduced[j] < -pricing_tol);
            let Some(e) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(f64, usize)> = None;
            for i in 0..self.rows {
                let a = self.at(i, e);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((ratio, i)),
                    Some((best, bi)) => {
                        let slack = 1e-12 * (1.0 + best.abs());
                        if ratio < best - slack
                            || (ratio <= best + slack && self.basis[i] < self.basis[bi])
                        {
                            Some((ratio, i))
                        } else {
                            Some((best, bi))
                        }
                    }
                };
            }
            let Some((_, row)) = leave else {
                return Ok(false);
            };
            if self.pivots >= self.limit {
                return Err(Error::CycleLimitExceeded { limit: self.limit });
            }
            self.pivot(row, e);
        }
    }
}

/// Solves `lp`, optionally starting from a crash basis built from the given
/// variables (only variables with bounds `[0, inf)` are used).
pub(crate) fn solve_with_basis(
    lp: &LinearProgram,
    pivot_limit: usize,
    crash: &[usize],
) -> Result<(LpStatus, Option<Vec<BasisColumn>>)> {
    lp.validate()?;
    let n = lp.num_vars();

    // Substitute x_j = shift_j + sum(sign * x'_col) with x' >= 0.
    let mut std_cols: Vec<StdColumn> = Vec::new();
    let mut shifts = vec![0.0; n];
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    let mut plain_var = vec![false; n];
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if lo.is_finite() {
            if hi.is_finite() && hi < lo {
                return Ok((LpStatus::Infeasible, None));
            }
            shifts[j] = lo;
            std_cols.push(StdColumn { var: j, sign: 1.0 });
            if hi.is_finite() {
                bound_rows.push((std_cols.len() - 1, hi - lo));
            }
            plain_var[j] = lo == 0.0 && !hi.is_finite();
        } else if hi.is_finite() {
            shifts[j] = hi;
            std_cols.push(StdColumn { var: j, sign: -1.0 });
        } else {
            std_cols.push(StdColumn { var: j, sign: 1.0 });
            std_cols.push(StdColumn { var: j, sign: -1.0 });
        }
    }
    let n_std = std_cols.len();

    let m_orig = lp.constraints.len();
    let rows = m_orig + bound_rows.len();
    let mut row_coeffs: Vec<Vec<f64>> = Vec::with_capacity(rows);
    let mut row_rel: Vec<Relation> = Vec::with_capacity(rows);
    let mut row_rhs: Vec<f64> = Vec::with_capacity(rows);
    for c in &lp.constraints {
        let coeffs: Vec<f64> = std_cols.iter().map(|sc| c.coeffs[sc.var] * sc.sign).collect();
        let shift: f64 = c.coeffs.iter().zip(&shifts).map(|(a, s)| a * s).sum();
        row_coeffs.push(coeffs);
        row_rel.push(c.relation);
        row_rhs.push(c.rhs - shift);
    }
    for &(col, width) in &bound_rows {
        let mut coeffs = vec![0.0; n_std];
        coeffs[col] = 1.0;
        row_coeffs.push(coeffs);
        row_rel.push(Relation::Le);
        row_rhs.push(width);
    }
    let mut flip = vec![1.0; rows];
    for i in 0..rows {
        if row_rhs[i] < 0.0 {
            flip[i] = -1.0;
            row_rhs[i] = -row_rhs[i];
            for v in &mut row_coeffs[i] {
                *v = -*v;
            }
            row_rel[i] = row_rel[i].flipped();
        }
    }

    // Column layout: structural | slack & surplus | artificial.
    let mut aux: Vec<(usize, AuxKind)> = Vec::new();
    for (i, rel) in row_rel.iter().enumerate() {
        match rel {
            Relation::Le => aux.push((i, AuxKind::Slack)),
            Relation::Ge => aux.push((i, AuxKind::Surplus)),
            Relation::Eq => {}
        }
    }
    let first_art = n_std + aux.len();
    for (i, rel) in row_rel.iter().enumerate() {
        if matches!(rel, Relation::Ge | Relation::Eq) {
            aux.push((i, AuxKind::Artificial));
        }
    }
    let cols = n_std + aux.len();
    let width = cols + 1;
    let mut data = vec![0.0; rows * width];
    let mut identity_col = vec![usize::MAX; rows];
    for i in 0..rows {
        data[i * width..i * width + n_std].copy_from_slice(&row_coeffs[i]);
        data[i * width + cols] = row_rhs[i];
    }
    for (k, &(i, kind)) in aux.iter().enumerate() {
        let col = n_std + k;
        match kind {
            AuxKind::Slack | AuxKind::Artificial => {
                data[i * width + col] = 1.0;
                identity_col[i] = col;
            }
            AuxKind::Surplus => data[i * width + col] = -1.0,
        }
    }
    let original = data.clone();
    let mut is_basic = vec![false; cols];
    for &c in &identity_col {
        is_basic[c] = true;
    }
    let mut tab = Tableau {
        rows,
        cols,
        width,
        data,
        reduced: vec![0.0; width],
        basis: identity_col.clone(),
        is_basic,
        pivots: 0,
        limit: pivot_limit,
    };

    let max_rhs = row_rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !crash.is_empty() && first_art < cols {
        let crash_cols: Vec<usize> = crash
            .iter()
            .filter(|&&v| v < n && plain_var[v])
            .filter_map(|&v| std_cols.iter().position(|sc| sc.var == v))
            .collect();
        if !tab.crash(&crash_cols, first_art, max_rhs) {
            tab.data.copy_from_slice(&original);
            tab.is_basic.iter_mut().for_each(|b| *b = false);
            for (i, &c) in identity_col.iter().enumerate() {
                tab.basis[i] = c;
                tab.is_basic[c] = true;
            }
        }
    }
    if first_art < cols {
        let mut costs = vec![0.0; cols];
        for c in costs.iter_mut().skip(first_art) {
            *c = 1.0;
        }
        tab.price(&costs);
        tab.optimize(&|_| true, &costs, LP_TOL, &original)?;
        // Badly scaled columns can leave a small residual whose improving
        // directions price below LP_TOL; retry those with finer pricing.
        if tab.reduced[cols].abs() > REFINE_TOL * (1.0 + max_rhs) {
            tab.price(&costs);
            tab.optimize(&|_| true, &costs, REFINE_TOL, &original)?;
        }
        let infeasibility = tab.reduced[cols].abs();
        if infeasibility > LP_TOL * (1.0 + max_rhs) {
            return Ok((LpStatus::Infeasible, None));
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..rows {
            if tab.basis[i] < first_art {
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for j in 0..first_art {
                let a = tab.at(i, j).abs();
                if !tab.is_basic[j] && a > LP_TOL && best.is_none_or(|(b, _)| a > b) {
                    best = Some((a, j));
                }
            }
            if let Some((_, j)) = best {
                tab.pivot(i, j);
            }
        }
    }

    let mut costs = vec![0.0; cols];
    for (k, sc) in std_cols.iter().enumerate() {
        costs[k] = lp.objective[sc.var] * sc.sign;
    }
    tab.price(&costs);
    if !tab.optimize(&|j| j < first_art, &costs, LP_TOL, &original)? {
        return Ok((LpStatus::Unbounded, None));
    }

    let mut x_std = vec![0.0; cols];
    for i in 0..rows {
        x_std[tab.basis[i]] = tab.rhs(i).max(0.0);
    }
    let mut point = shifts.clone();
    for (k, sc) in std_cols.iter().enumerate() {
        point[sc.var] += sc.sign * x_std[k];
    }
    let value: f64 = lp.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    let duals: Vec<f64> = (0..m_orig)
        .map(|i| -flip[i] * tab.reduced[identity_col[i]])
        .collect();

    let basis = tab
        .basis
        .iter()
        .map(|&col| {
            if col < n_std {
                let var = std_cols[col].var;
                if plain_var[var] {
                    BasisColumn::Variable(var)
                } else {
                    BasisColumn::Other
                }
            } else if col < first_art {
                let (row, _) = aux[col - n_std];
                if row < m_orig && lp.constraints[row].relation == Relation::Le {
                    BasisColumn::Slack(row)
                } else {
                    BasisColumn::Other
                }
            } else {
                BasisColumn::Other
            }
        })
        .collect();

    Ok((
        LpStatus::Optimal(LpSolution {
            value,
            point,
            duals,
        }),
        Some(basis),
    ))
}
