//! The interpolation renorming `||x||_K = sqrt(sum_n ||x||_n^2)`, the tuning
//! constant `a_bar` with `f(a_bar) = 1`, and operator factorization through
//! the renormed space.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::ConvexBody;
use crate::lp::{LinearProgram, LpStatus, Relation, GEOM_TOL};
use crate::space::{LinearMap, NormEval, NormedSpace};

pub const DEFAULT_SERIES_TOL: f64 = 1e-9;
pub const DEFAULT_N_MAX: usize = 512;
/// Tolerance at which `a_bar` is computed once per process.
pub const A_BAR_TOL: f64 = 1e-12;

/// Relative agreement required before the series switches to its closed form.
const MATCH_TOL: f64 = 1e-11;
/// Bracket width at which the cutting-plane estimate of `||J_K||` stops.
const INCLUSION_BRACKET: f64 = 1e-8;
const INCLUSION_MAX_CUTS: usize = 400;

/// A truncated series value with a certified error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub error_bound: f64,
    pub terms: usize,
}

fn terms_for_tail(a: f64, scale_sq: f64, tol: f64, n_max: usize) -> Result<usize> {
    // smallest N with scale_sq * a^-2N / (a^2 - 1) <= tol^2
    let need = ((scale_sq / (tol * tol * (a * a - 1.0))).ln() / (2.0 * a.ln())).ceil();
    let n = if need.is_finite() { need.max(1.0) as usize } else { 1 };
    if n > n_max {
        return Err(Error::NonConvergent { needed: n, cap: n_max });
    }
    Ok(n)
}

/// `sum_{n=1}^{terms} (1 / (a^n + a^-n))^2`, summed smallest term first.
pub fn f_squared_partial(a: f64, terms: usize) -> f64 {
    (1..=terms)
        .rev()
        .map(|n| {
            let an = a.powi(n as i32);
            let t = 1.0 / (an + 1.0 / an);
            t * t
        })
        .sum()
}

/// `f(a) = sqrt(sum_n (a^n / (a^2n + 1))^2)` to within `tol`.
pub fn f_of_a(a: f64, tol: f64) -> Result<SeriesValue> {
    f_of_a_with_cap(a, tol, DEFAULT_N_MAX)
}

pub fn f_of_a_with_cap(a: f64, tol: f64, n_max: usize) -> Result<SeriesValue> {
    if !(a > 1.0) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("f(a) needs a > 1 and tol > 0, got a = {a}, tol = {tol}")));
    }
    let terms = terms_for_tail(a, 1.0, tol, n_max)?;
    let s = f_squared_partial(a, terms);
    let tail = a.powi(-2 * terms as i32) / (a * a - 1.0);
    let value = s.sqrt();
    Ok(SeriesValue {
        value,
        error_bound: (s + tail).sqrt() - value,
        terms,
    })
}

pub fn c_constant(a: f64) -> f64 {
    0.25 + 0.5 / a.ln()
}

/// Root of `f(a) = 1` with the bisection bracket that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ABar {
    pub value: f64,
    /// `(low, high)` with `f(low) > 1 > f(high)`.
    pub bracket: (f64, f64),
    pub residual: f64,
}

pub fn a_bar(tol: f64) -> Result<ABar> {
    if !(tol >= 1e-13) {
        return Err(Error::InvalidInput(format!("a_bar tolerance {tol} is below 1e-13")));
    }
    let series_tol = (tol * 0.01).max(1e-15);
    let f = |a: f64| f_of_a(a, series_tol).map(|s| s.value);
    let mut hi = 2.0;
    while f(hi)? >= 1.0 {
        hi = 1.0 + 2.0 * (hi - 1.0);
    }
    let mut lo = 1.5;
    while f(lo)? <= 1.0 {
        lo = 1.0 + 0.5 * (lo - 1.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm > 1.0 {
            lo = mid;
        } else if fm < 1.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
            break;
        }
        if (fm - 1.0).abs() <= tol * 0.1 && hi - lo < 1e-15 {
            break;
        }
    }
    let value = 0.5 * (lo + hi);
    let residual = (f(value)? - 1.0).abs();
    Ok(ABar {
        value,
        bracket: (lo, hi),
        residual,
    })
}

/// `a_bar(A_BAR_TOL)`, computed once.
pub fn a_bar_default() -> &'static ABar {
    static CELL: OnceLock<ABar> = OnceLock::new();
    CELL.get_or_init(|| a_bar(A_BAR_TOL).expect("a_bar bracket search cannot fail"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DfjpParams {
    pub a: f64,
    pub series_tol: f64,
    pub n_max: usize,
}

impl Default for DfjpParams {
    fn default() -> Self {
        DfjpParams {
            a: a_bar_default().value,
            series_tol: DEFAULT_SERIES_TOL,
            n_max: DEFAULT_N_MAX,
        }
    }
}

impl DfjpParams {
    pub fn new(a: f64, series_tol: f64, n_max: usize) -> Result<Self> {
        let p = DfjpParams { a, series_tol, n_max };
        p.validate()?;
        Ok(p)
    }

    pub fn with_a(a: f64) -> Result<Self> {
        Self::new(a, DEFAULT_SERIES_TOL, DEFAULT_N_MAX)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0 + 1e-6) || !self.a.is_finite() {
            return Err(Error::InvalidInput(format!("a = {} must exceed 1 + 1e-6", self.a)));
        }
        if !(self.series_tol >= 1e-12) {
            return Err(Error::InvalidInput(format!(
                "series tolerance {} is below 1e-12",
                self.series_tol
            )));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidInput("n_max must be positive".into()));
        }
        Ok(())
    }

    /// Whether `a` is the isometric tuning `a_bar`.
    pub fn is_lno(&self) -> bool {
        (self.a - a_bar_default().value).abs() <= 1e-12
    }
}

/// Value of `||x||_K` with its certified error and how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KNorm {
    pub value: f64,
    pub error_bound: f64,
    /// Series length `N`.
    pub terms: usize,
    /// Terms evaluated by linear programming; the rest used the closed form.
    pub lp_terms: usize,
}

/// Bracket on `||J_K|| = sup ||y|| / ||y||_K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionNorm {
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<f64>,
    pub cuts: usize,
}

/// `X_K = span(K)` with the norm `||.||_K`.
#[derive(Debug)]
pub struct DfjpSpace {
    body: Arc<ConvexBody>,
    params: DfjpParams,
    f: SeriesValue,
}

enum Mode {
    Accelerated,
    Direct { extra: usize },
}

impl DfjpSpace {
    /// Requires every generator of `body` to lie in the unit ball.
    pub fn new(body: Arc<ConvexBody>, params: DfjpParams) -> Result<Self> {
        params.validate()?;
        for g in body.generators() {
            let n = body.ambient().norm(g)?;
            if n > 1.0 + GEOM_TOL {
                return Err(Error::InvalidInput(format!(
                    "body is not inside the unit ball (generator of norm {n})"
                )));
            }
        }
        let f = f_of_a_with_cap(params.a, params.series_tol.min(1e-10), params.n_max.max(4096))?;
        Ok(DfjpSpace { body, params, f })
    }

    pub fn body(&self) -> &Arc<ConvexBody> {
        &self.body
    }

    pub fn ambient(&self) -> &Arc<NormedSpace> {
        self.body.ambient()
    }

    pub fn params(&self) -> &DfjpParams {
        &self.params
    }

    pub fn f_a(&self) -> SeriesValue {
        self.f
    }

    pub fn c_a(&self) -> f64 {
        c_constant(self.params.a)
    }

    pub fn norm(&self, x: &[f64]) -> Result<KNorm> {
        self.evaluate(x, Mode::Accelerated, false).map(|(k, _)| k)
    }

    /// Every term by linear programming, with `extra` terms beyond the
    /// certified length.
    pub fn norm_direct(&self, x: &[f64], extra: usize) -> Result<KNorm> {
        self.evaluate(x, Mode::Direct { extra }, false).map(|(k, _)| k)
    }

    /// `||x||_K` and a functional `s` with `<s, x> = ||x||_K` and
    /// `<s, y> <= ||y||_K` on the carrier.
    pub fn norm_with_subgradient(&self, x: &[f64]) -> Result<(KNorm, Vec<f64>)> {
        self.evaluate(x, Mode::Accelerated, true)
            .map(|(k, s)| (k, s.unwrap_or_else(|| vec![0.0; x.len()])))
    }

    fn evaluate(&self, x: &[f64], mode: Mode, want_sub: bool) -> Result<(KNorm, Option<Vec<f64>>)> {
        let a = self.params.a;
        let gamma = self.body.gauge(x)?;
        if gamma.is_infinite() {
            return Err(Error::NotInCarrier);
        }
        if gamma == 0.0 {
            let zero = KNorm {
                value: 0.0,
                error_bound: 0.0,
                terms: 0,
                lp_terms: 0,
            };
            return Ok((zero, want_sub.then(|| vec![0.0; x.len()])));
        }
        let tol = self.params.series_tol;
        let n_cert = terms_for_tail(a, gamma * gamma, tol, self.params.n_max)?;
        let (n_total, accelerate) = match mode {
            Mode::Accelerated => (n_cert, true),
            Mode::Direct { extra } => (n_cert + extra, false),
        };

        let mut values: Vec<f64> = Vec::with_capacity(n_total);
        let mut subs: Vec<Vec<f64>> = Vec::new();
        let mut prev_c: Option<f64> = None;
        let mut matches = 0;
        let mut switch: Option<f64> = None;
        for n in 1..=n_total {
            let (g, sub) = self.body.gauge_n_with_subgradient(a, n, x)?;
            values.push(g);
            if want_sub {
                subs.push(sub);
            }
            if !accelerate || n == n_total {
                continue;
            }
            let an = a.powi(n as i32);
            let t = an * g;
            let decay = a.powi(-2 * n as i32);
            if let Some(c) = prev_c {
                let predicted = gamma / (1.0 + c * decay);
                if (predicted - t).abs() <= MATCH_TOL * gamma {
                    matches += 1;
                } else {
                    matches = 0;
                }
            }
            let c = if t > 0.0 { (gamma / t - 1.0).max(0.0) / decay } else { f64::INFINITY };
            prev_c = c.is_finite().then_some(c);
            if matches >= 2 {
                switch = prev_c;
                break;
            }
        }
        let lp_terms = values.len();

        let mut closed_err = 0.0;
        let mut slope_psi: Option<(f64, Vec<f64>)> = None;
        if let Some(c) = switch {
            if want_sub {
                let (c0, psi) = self.body.linear_regime_slope(x, gamma)?;
                if (c0 - c).abs() <= 1e-6 * (1.0 + c) {
                    slope_psi = Some((c0, psi));
                }
            }
            if want_sub && slope_psi.is_none() {
                // Slope data disagrees with the observed terms; fall back.
                for n in lp_terms + 1..=n_total {
                    let (g, sub) = self.body.gauge_n_with_subgradient(a, n, x)?;
                    values.push(g);
                    subs.push(sub);
                }
            } else {
                for n in lp_terms + 1..=n_total {
                    let an = a.powi(n as i32);
                    let q = gamma / (an + c / an);
                    let u = 4.0 * MATCH_TOL * gamma / an;
                    closed_err += 2.0 * q * u + u * u;
                    values.push(q);
                }
            }
        }

        let s: f64 = values.iter().rev().map(|g| g * g).sum();
        let tail = gamma * gamma * a.powi(-2 * n_total as i32) / (a * a - 1.0);
        let value = s.sqrt();
        let up = (s + tail + closed_err).sqrt() - value;
        let down = value - (s - closed_err).max(0.0).sqrt();
        let knorm = KNorm {
            value,
            error_bound: up.max(down),
            terms: n_total,
            lp_terms: if switch.is_some() && slope_psi.is_none() && want_sub { n_total } else { lp_terms },
        };

        let sub = if want_sub {
            let mut total = vec![0.0; x.len()];
            if value > 0.0 {
                for (n, g) in values.iter().enumerate() {
                    let w = g / value;
                    if n < subs.len() {
                        for (t, s) in total.iter_mut().zip(&subs[n]) {
                            *t += w * s;
                        }
                    } else if let Some((c0, psi)) = &slope_psi {
                        let an = a.powi(n as i32 + 1);
                        let scale = w / (an + c0 / an);
                        for (t, p) in total.iter_mut().zip(psi) {
                            *t += scale * p;
                        }
                    }
                }
            }
            Some(total)
        } else {
            None
        };
        Ok((knorm, sub))
    }

    /// Bracket on `||J_K|| = sup { ||y|| : ||y||_K <= 1 }` by Kelley cutting
    /// planes in span coordinates, one subproblem per norming functional.
    pub fn inclusion_norm(&self) -> Result<InclusionNorm> {
        let body = &self.body;
        let ambient = body.ambient();
        let basis = body.basis();
        let (d, r) = basis.shape();
        let a = self.params.a;
        let project = |s: &[f64]| -> Vec<f64> {
            (0..r).map(|j| (0..d).map(|i| basis[(i, j)] * s[i]).sum()).collect()
        };

        let mut cuts: Vec<Vec<f64>> = Vec::new();
        let mut lower = 0.0;
        let mut witness = vec![0.0; d];
        let visit = |y: Vec<f64>, cuts: &mut Vec<Vec<f64>>, lower: &mut f64, witness: &mut Vec<f64>| -> Result<()> {
            let (kn, s) = self.norm_with_subgradient(&y)?;
            if kn.value > 0.0 {
                let ratio = ambient.norm(&y)? / kn.value;
                if ratio > *lower {
                    *lower = ratio;
                    *witness = y.iter().map(|v| v / kn.value).collect();
                }
                cuts.push(project(&s));
            }
            Ok(())
        };
        for g in body.generators() {
            visit(g.clone(), &mut cuts, &mut lower, &mut witness)?;
        }
        // Valid because ||y|| <= (a + 1/a) ||y||_1 <= (a + 1/a) ||y||_K.
        let box_bound = a + 1.0 / a;
        let functionals: Vec<Vec<f64>> = ambient.functionals().iter().map(|f| project(f)).collect();

        let solve = |w: &[f64], cuts: &[Vec<f64>]| -> Result<(f64, Vec<f64>)> {
            let mut lp = LinearProgram::minimize(w.iter().map(|v| -v).collect());
            for j in 0..r {
                lp.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
            }
            for c in cuts {
                lp.add_constraint(c.clone(), Relation::Le, 1.0);
                lp.add_constraint(c.clone(), Relation::Ge, -1.0);
            }
            for f in &functionals {
                lp.add_constraint(f.clone(), Relation::Le, box_bound);
                lp.add_constraint(f.clone(), Relation::Ge, -box_bound);
            }
            match lp.solve()? {
                LpStatus::Optimal(s) => Ok((-s.value, s.point)),
                _ => Err(Error::LpFailure("cutting-plane program has no optimum".into())),
            }
        };

        let mut order: Vec<(f64, usize)> = Vec::with_capacity(functionals.len());
        for (j, w) in functionals.iter().enumerate() {
            order.push((solve(w, &cuts)?.0, j));
        }
        order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let mut upper: f64 = 0.0;
        for &(_, j) in &order {
            let w = &functionals[j];
            let mut best_upper = f64::INFINITY;
            loop {
                let (value, z) = solve(w, &cuts)?;
                best_upper = best_upper.min(value);
                if best_upper <= lower + INCLUSION_BRACKET || cuts.len() >= INCLUSION_MAX_CUTS {
                    break;
                }
                let before = cuts.len();
                visit(body.from_coordinates(&z), &mut cuts, &mut lower, &mut witness)?;
                if cuts.len() == before {
                    break;
                }
            }
            upper = upper.max(best_upper);
        }
        Ok(InclusionNorm {
            lower,
            upper: upper.max(lower),
            witness,
            cuts: cuts.len(),
        })
    }
}

impl NormEval for DfjpSpace {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn eval_norm(&self, x: &[f64]) -> Result<f64> {
        self.norm(x).map(|k| k.value)
    }
    /// `||x||_K <= f(a) gauge_K(x)`, since `K_n` contains `(a^n + a^-n) K`.
    fn norm_upper_bound(&self, x: &[f64]) -> Result<Option<f64>> {
        let gamma = self.body.gauge(x)?;
        Ok(gamma
            .is_finite()
            .then(|| (self.f.value + self.f.error_bound) * gamma * (1.0 + 1e-9) + 1e-15))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorNorms {
    pub a: f64,
    pub t: f64,
    pub t_k: f64,
    pub j_k_lower: f64,
    pub j_k_upper: f64,
    pub f_a: f64,
    pub c_a: f64,
}

/// `T = J_K o T_K` with `K = T(B_Z) / ||T||`.
#[derive(Debug)]
pub struct Factorization {
    pub t_k: LinearMap<NormedSpace, DfjpSpace>,
    pub j_k: LinearMap<DfjpSpace, NormedSpace>,
    pub space: Arc<DfjpSpace>,
    pub norms: FactorNorms,
}

impl Factorization {
    pub fn k_body(&self) -> &Arc<ConvexBody> {
        self.space.body()
    }

    /// `max ||g||_K` over the generators of `K`.
    pub fn max_generator_norm(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for g in self.space.body().generators() {
            m = m.max(self.space.norm(g)?.value);
        }
        Ok(m)
    }

    /// `J_K T_K` as a matrix.
    pub fn composed_matrix(&self) -> DMatrix<f64> {
        self.j_k.matrix() * self.t_k.matrix()
    }
}

/// Builds `K` from the images of the domain ball vertices.
pub fn factor_operator(t: &LinearMap, params: DfjpParams) -> Result<Factorization> {
    params.validate()?;
    let norm = t.operator_norm()?;
    if norm <= 0.0 {
        return Err(Error::ZeroOperator);
    }
    let mut gens = Vec::new();
    for v in t.domain().half_ball_vertices()? {
        gens.push(t.apply(v)?.into_iter().map(|y| y / norm).collect());
    }
    factor_with_body(t, gens, norm, params)
}

/// Factorization through a body given by generators, already scaled by `norm`.
pub(crate) fn factor_with_body(
    t: &LinearMap,
    gens: Vec<Vec<f64>>,
    norm: f64,
    params: DfjpParams,
) -> Result<Factorization> {
    let body = Arc::new(ConvexBody::new(t.codomain().clone(), gens)?);
    let space = Arc::new(DfjpSpace::new(body, params)?);
    let t_k = LinearMap::new(t.matrix().clone(), t.domain().clone(), space.clone())?;
    let d = t.codomain().dim();
    let j_k = LinearMap::new(DMatrix::identity(d, d), space.clone(), t.codomain().clone())?;
    let t_k_norm = t_k.operator_norm()?;
    let inclusion = space.inclusion_norm()?;
    let norms = FactorNorms {
        a: params.a,
        t: norm,
        t_k: t_k_norm,
        j_k_lower: inclusion.lower,
        j_k_upper: inclusion.upper,
        f_a: space.f_a().value,
        c_a: space.c_a(),
    };
    Ok(Factorization {
        t_k,
        j_k,
        space,
        norms,
    })
}
