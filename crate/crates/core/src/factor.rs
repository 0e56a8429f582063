//! Factorization of the integration operators of a vector measure through
//! the renormed space `X_K`, and numerical checks of the resulting norm
//! identities and inequalities.
//!
//! Tolerances in [`CheckOptions`] are absolute for measures with
//! `||m||(Omega) = 1`; checks multiply them by the matching power of
//! `||m||(Omega)`, so a measure and its normalization give the same verdicts.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dfjp::{factor_operator, factor_with_body, DfjpParams, DfjpSpace, FactorNorms, Factorization};
use crate::error::{Error, Result};
use crate::l1m::{
    compress, expand, integrate, integration_operator, l1m_ball, l1m_norm, l1m_norm_by_signs, l1m_space,
    linf_norm, FunctionSpace, SimpleFunction,
};
use crate::measure::{full_set, lorentz_21_quasinorm, members, AtomSet, Semivariation, VectorMeasure};
use crate::report::{CheckReport, Claim, Scope};
use crate::space::{LinearMap, NormEval, NormedSpace};

/// Largest atom count for which every set partition is enumerated.
pub const MAX_PARTITION_ATOMS: usize = 5;

/// Bound on the density ratio `|m| / |m~|`, tighter than the general tolerance.
pub const DENSITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckOptions {
    pub tol: f64,
    /// Random functions tested per claim.
    pub sample_size: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tol: 1e-6,
            sample_size: 200,
            seed: 0,
        }
    }
}

/// A measure `m = J o m~` factored through `X_K`, where `m~(A) = T(chi_A)`.
#[derive(Debug)]
pub struct FactoredMeasure {
    original: VectorMeasure,
    m_tilde: VectorMeasure<DfjpSpace>,
    factorization: Factorization,
    which: FunctionSpace,
}

impl FactoredMeasure {
    pub fn original(&self) -> &VectorMeasure {
        &self.original
    }

    pub fn m_tilde(&self) -> &VectorMeasure<DfjpSpace> {
        &self.m_tilde
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn which(&self) -> FunctionSpace {
        self.which
    }

    pub fn target(&self) -> &Arc<DfjpSpace> {
        &self.factorization.space
    }

    pub fn norms(&self) -> &FactorNorms {
        &self.factorization.norms
    }

    pub fn a(&self) -> f64 {
        self.target().params().a
    }

    pub fn c(&self) -> f64 {
        self.target().c_a()
    }

    pub fn is_isometric(&self) -> bool {
        self.target().params().is_lno()
    }

    /// The factorization of `c m` for `c > 0`. Both bodies are invariant
    /// under scaling `m`, so `X_K` is shared and only `T` and `m~` scale.
    pub fn rescaled(&self, c: f64) -> Result<FactoredMeasure> {
        let original = self.original.scaled(c)?;
        let old = &self.factorization;
        let (domain, t_scale) = match self.which {
            FunctionSpace::L1 => (l1m_space(&original)?, 1.0),
            FunctionSpace::Linf => (old.t_k.domain().clone(), c),
        };
        let t_k = LinearMap::new(old.t_k.matrix() * c, domain, old.space.clone())?;
        let mut norms = old.norms.clone();
        norms.t *= t_scale;
        norms.t_k *= t_scale;
        let factorization = Factorization {
            t_k,
            j_k: old.j_k.clone(),
            space: old.space.clone(),
            norms,
        };
        finish(&original, factorization, self.which)
    }

    /// `||f||_{L_1(m~)}` by sign enumeration with `||.||_K`.
    pub fn l1_tilde_norm(&self, f: &SimpleFunction) -> Result<f64> {
        l1m_norm_by_signs(&self.m_tilde, f)
    }
}

/// Factors `I_m^(inf)` through `K = I_m^(inf)(B_{L_inf(m)}) / ||m||(Omega)`.
pub fn factor_iinfty(m: &VectorMeasure, params: DfjpParams) -> Result<FactoredMeasure> {
    let t = integration_operator(m, FunctionSpace::Linf)?;
    let factorization = factor_operator(&t, params)?;
    finish(m, factorization, FunctionSpace::Linf)
}

/// Factors `I_m` through `K = I_m(B_{L_1(m)})`.
pub fn factor_im(m: &VectorMeasure, params: DfjpParams) -> Result<FactoredMeasure> {
    params.validate()?;
    let t = integration_operator(m, FunctionSpace::L1)?;
    let norm = t.operator_norm()?;
    let mut gens = Vec::new();
    for v in t.domain().half_ball_vertices()? {
        gens.push(t.apply(v)?);
    }
    let factorization = factor_with_body(&t, gens, norm, params)?;
    finish(m, factorization, FunctionSpace::L1)
}

fn finish(m: &VectorMeasure, factorization: Factorization, which: FunctionSpace) -> Result<FactoredMeasure> {
    let m_tilde = m.with_codomain(factorization.space.clone())?;
    Ok(FactoredMeasure {
        original: m.clone(),
        m_tilde,
        factorization,
        which,
    })
}

/// `m / ||m||(Omega)` together with `||m||(Omega)`.
pub fn normalize(m: &VectorMeasure) -> Result<(VectorMeasure, f64)> {
    let total = m.semivariation(m.full_set())?;
    Ok((m.scaled(1.0 / total)?, total))
}

/// Every set partition of `set` into nonempty blocks.
pub fn set_partitions(set: AtomSet) -> Vec<Vec<AtomSet>> {
    let items: Vec<usize> = members(set).collect();
    let mut out = Vec::new();
    let mut blocks: Vec<AtomSet> = Vec::new();
    fn grow(items: &[usize], blocks: &mut Vec<AtomSet>, out: &mut Vec<Vec<AtomSet>>) {
        let Some((&first, rest)) = items.split_first() else {
            out.push(blocks.clone());
            return;
        };
        for b in 0..blocks.len() {
            blocks[b] |= 1 << first;
            grow(rest, blocks, out);
            blocks[b] &= !(1 << first);
        }
        blocks.push(1 << first);
        grow(rest, blocks, out);
        blocks.pop();
    }
    grow(&items, &mut blocks, &mut out);
    out
}

/// Uniform random functions with values in `[-1, 1]`, zero on null atoms.
pub fn random_functions<X: NormEval>(m: &VectorMeasure<X>, count: usize, seed: u64) -> Result<Vec<SimpleFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let f = SimpleFunction::new((0..m.num_atoms()).map(|_| rng.random_range(-1.0..=1.0)).collect());
            f.canonical(m)
        })
        .collect()
}

/// The `2^q` sign functions on the non-null atoms.
pub fn sign_functions<X: NormEval>(m: &VectorMeasure<X>) -> Result<Vec<SimpleFunction>> {
    let q = m.non_null_atoms().len();
    (0u32..1 << q)
        .map(|mask| {
            let coords: Vec<f64> = (0..q).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            expand(m, &coords)
        })
        .collect()
}

fn norm2(x: &[f64], space: &NormedSpace) -> f64 {
    space.norm_unchecked(x)
}

struct Context<'a> {
    fm: &'a FactoredMeasure,
    /// `||m||(Omega)`.
    total: f64,
    /// `||m~_i||_K` per atom.
    tilde_atoms: Vec<f64>,
    /// `||m_i||` per atom.
    atoms: Vec<f64>,
    tol: f64,
}

impl<'a> Context<'a> {
    fn new(fm: &'a FactoredMeasure, opts: &CheckOptions) -> Result<Self> {
        let m = &fm.original;
        let total = m.semivariation(m.full_set())?;
        let space = fm.target();
        let mut tilde_atoms = Vec::with_capacity(m.num_atoms());
        for v in m.atoms() {
            tilde_atoms.push(space.norm(v)?.value);
        }
        let atoms = m.atoms().iter().map(|v| norm2(v, m.codomain())).collect();
        Ok(Context {
            fm,
            total,
            tilde_atoms,
            atoms,
            tol: opts.tol,
        })
    }

    /// Tolerance for a quantity homogeneous of degree `k` in `m`.
    fn tol(&self, k: i32) -> f64 {
        self.tol * self.total.powi(k)
    }

    fn scope_claim(&self, name: &str, anchor: &str, scope: Scope, degree: i32) -> Claim {
        Claim::new(name, anchor, scope, self.tol(degree))
    }

    /// `||J_K||`, taken as exactly one for the isometric tuning.
    fn j_norm(&self) -> f64 {
        if self.fm.is_isometric() {
            1.0
        } else {
            self.fm.norms().j_k_upper
        }
    }

    fn structural(&self, report: &mut CheckReport) -> Result<()> {
        let fm = self.fm;
        let m = &fm.original;
        let p = m.num_atoms();
        let mut ident = self.scope_claim(
            "factorization_identity",
            "J(m~(A)) = m(A) and T(chi_A) = m~(A) for every A",
            Scope::AllA,
            1,
        );
        let mut nulls = Claim::new("null_sets_preserved", "N(m) = N(m~)", Scope::AllA, 0.0);
        for set in 0..=full_set(p) {
            let mv = m.value_on(set);
            let mt = fm.m_tilde.value_on(set);
            let chi = SimpleFunction::characteristic(p, set);
            let t_chi = fm.factorization.t_k.apply(&compress(m, &chi)?)?;
            let j_mt = fm.factorization.j_k.apply(&mt)?;
            let gap = mv
                .iter()
                .zip(&j_mt)
                .chain(t_chi.iter().zip(&mt))
                .fold(0.0f64, |g, (x, y)| g.max((x - y).abs()));
            ident.record(-gap, || chi.values().to_vec());
            let tilde_variation: f64 = members(set).map(|i| self.tilde_atoms[i]).sum();
            let same = m.is_null_set(set) == (tilde_variation == 0.0);
            nulls.record(if same { 0.0 } else { -1.0 }, || chi.values().to_vec());
        }
        report.push(ident);
        report.push(nulls);
        Ok(())
    }

    fn operator_norms(&self, report: &mut CheckReport, t_expected: f64, t_anchor: &str) {
        let norms = self.fm.norms();
        let mut t = self.scope_claim("t_norm", t_anchor, Scope::AllA, 1);
        t.record_equal(norms.t, t_expected, Vec::new);
        report.push(t);
        let mut tk = self.scope_claim("t_k_norm", "||T_K|| = ||T||", Scope::IsometricOnly, 1);
        let mut jk = Claim::new("j_k_norm", "||J_K|| = 1", Scope::IsometricOnly, self.tol);
        if self.fm.is_isometric() {
            tk.record_equal(norms.t_k, norms.t, Vec::new);
            jk.record_equal(norms.j_k_lower, 1.0, Vec::new);
            jk.record_equal(norms.j_k_upper, 1.0, Vec::new);
            report.push(tk);
            report.push(jk);
        } else {
            report.push(tk.skip());
            report.push(jk.skip());
        }
    }
}

fn require(fm: &FactoredMeasure, which: FunctionSpace) -> Result<()> {
    if fm.which != which {
        return Err(Error::InvalidInput(format!(
            "check needs a factorization of the operator on {which:?}"
        )));
    }
    Ok(())
}

/// Checks the factorization of `I_m^(inf)`: the semivariation of the whole
/// space is preserved, `||I_m~(f)||_K^2 <= C ||m||(Omega) ||f||_inf ||I_m(f)||`,
/// `L_1(m~)` embeds into `L_1(m)` with norm at most `||J||`, and
/// `|m|(A) <= ||J|| |m~|(A)`.
pub fn check_iinfty_factorization(fm: &FactoredMeasure, opts: &CheckOptions) -> Result<CheckReport> {
    require(fm, FunctionSpace::Linf)?;
    let ctx = Context::new(fm, opts)?;
    let m = &fm.original;
    let space = fm.target();
    let c = fm.c();
    let j = ctx.j_norm();
    let mut report = CheckReport::new("iinfty_factorization", fm.a(), fm.is_isometric());
    ctx.structural(&mut report)?;
    ctx.operator_norms(&mut report, ctx.total, "||T|| = ||m||(Omega)");

    let mut total = ctx.scope_claim(
        "total_semivariation_preserved",
        "||m~||(Omega) = ||m||(Omega)",
        Scope::IsometricOnly,
        1,
    );
    if fm.is_isometric() {
        total.record_equal(fm.m_tilde.semivariation(m.full_set())?, ctx.total, Vec::new);
        report.push(total);
    } else {
        report.push(total.skip());
    }

    let mut interp = ctx.scope_claim(
        "interpolation_inequality",
        "||I_m~(f)||_K^2 <= C ||m||(Omega) ||f||_Linf(m) ||I_m(f)||",
        Scope::AllA,
        2,
    );
    let mut embed = ctx.scope_claim(
        "l1_embedding",
        "||f||_L1(m) <= ||J|| ||f||_L1(m~)",
        Scope::AllA,
        1,
    );
    let mut samples = sign_functions(m)?;
    samples.extend(random_functions(m, opts.sample_size, opts.seed)?);
    for f in &samples {
        let v = integrate(m, f, m.full_set())?;
        let k = space.norm(&v)?.value;
        let rhs = c * ctx.total * linf_norm(m, f)? * norm2(&v, m.codomain());
        interp.record(rhs - k * k, || f.values().to_vec());
        let l1 = l1m_norm(m, f)?;
        embed.record(j * fm.l1_tilde_norm(f)? - l1, || f.values().to_vec());
    }
    report.push(interp);
    report.push(embed);

    let mut atoms = ctx.scope_claim("atom_variation", "|m|(A) <= ||J|| |m~|(A)", Scope::AllA, 1);
    for i in m.non_null_atoms() {
        atoms.record(j * ctx.tilde_atoms[i] - ctx.atoms[i], || vec![i as f64]);
    }
    report.push(atoms);
    Ok(report)
}

/// Checks the factorization of `I_m`: equal norms on `L_1(m)` and
/// `L_1(m~)` and equal semivariations for the isometric tuning,
/// `||I_m~(f)||_K^2 <= C ||f||_L1(m) ||I_m(f)||`, the variation sandwich
/// `|m| <= |m~| <= sqrt(C) |m|`, the norm sandwich
/// `||T||^-1 ||f||_L1(m~) <= ||f||_L1(m) <= ||J|| ||f||_L1(m~)` and a
/// Rybakov control measure.
pub fn check_im_factorization(fm: &FactoredMeasure, opts: &CheckOptions) -> Result<CheckReport> {
    require(fm, FunctionSpace::L1)?;
    let ctx = Context::new(fm, opts)?;
    let m = &fm.original;
    let p = m.num_atoms();
    let space = fm.target();
    let c = fm.c();
    let iso = fm.is_isometric();
    let j = ctx.j_norm();
    let t_k = fm.norms().t_k;
    let mut report = CheckReport::new("im_factorization", fm.a(), iso);
    ctx.structural(&mut report)?;
    ctx.operator_norms(&mut report, 1.0, "||I_m|| = 1");

    let mut equal = ctx.scope_claim("equal_norms", "||f||_L1(m) = ||f||_L1(m~)", Scope::IsometricOnly, 1);
    let mut sandwich = ctx.scope_claim(
        "norm_sandwich",
        "||T_K||^-1 ||f||_L1(m~) <= ||f||_L1(m) <= ||J|| ||f||_L1(m~)",
        Scope::AllA,
        1,
    );
    let mut interp = ctx.scope_claim(
        "interpolation_inequality",
        "||I_m~(f)||_K^2 <= C ||f||_L1(m) ||I_m(f)||",
        Scope::AllA,
        2,
    );
    let mut samples = l1m_ball(m)?;
    samples.extend(random_functions(m, opts.sample_size, opts.seed)?);
    for f in &samples {
        let l1 = l1m_norm(m, f)?;
        let lt = fm.l1_tilde_norm(f)?;
        if iso {
            equal.record_equal(l1, lt, || f.values().to_vec());
        }
        sandwich.record((l1 - lt / t_k).min(j * lt - l1), || f.values().to_vec());
        let v = integrate(m, f, m.full_set())?;
        let k = space.norm(&v)?.value;
        interp.record(c * l1 * norm2(&v, m.codomain()) - k * k, || f.values().to_vec());
    }

    let mut semivar = ctx.scope_claim(
        "semivariation_preserved",
        "||m||(A) = ||m~||(A) for every A",
        Scope::IsometricOnly,
        1,
    );
    let mut lower = ctx.scope_claim("variation_lower", "|m|(A) <= ||J|| |m~|(A)", Scope::AllA, 1);
    let mut upper = ctx.scope_claim("variation_upper", "|m~|(A) <= sqrt(C) |m|(A)", Scope::AllA, 1);
    for set in 0..=full_set(p) {
        let chi = SimpleFunction::characteristic(p, set);
        let wit = || chi.values().to_vec();
        let semi = m.semivariation(set)?;
        if iso {
            semivar.record_equal(semi, fm.m_tilde.semivariation(set)?, wit);
        }
        let v = m.value_on(set);
        let k = space.norm(&v)?.value;
        interp.record(c * semi * norm2(&v, m.codomain()) - k * k, wit);
        let var: f64 = members(set).map(|i| ctx.atoms[i]).sum();
        let var_t: f64 = members(set).map(|i| ctx.tilde_atoms[i]).sum();
        lower.record(j * var_t - var, wit);
        upper.record(c.sqrt() * var - var_t, wit);
    }
    for claim in [equal, semivar] {
        report.push(if iso { claim } else { claim.skip() });
    }
    report.push(sandwich);
    report.push(interp);
    report.push(lower);
    report.push(upper);

    let mut control = ctx.scope_claim(
        "control_measure",
        "|x* m| has the null sets of m and m(A) = sum_A G d|x* m|",
        Scope::AllA,
        1,
    );
    let ryb = m.rybakov(opts.seed)?;
    let g = m.rn_derivative(&ryb.measure)?;
    control.record(if ryb.measure.null_mask() == m.null_mask() { 0.0 } else { -1.0 }, || {
        ryb.functional.clone()
    });
    for set in 0..=full_set(p) {
        let mut rebuilt = vec![0.0; m.dim()];
        for i in members(set) {
            for (r, x) in rebuilt.iter_mut().zip(&g[i]) {
                *r += x * ryb.measure.weights()[i];
            }
        }
        let gap = rebuilt
            .iter()
            .zip(m.value_on(set))
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        control.record(-gap, || vec![set as f64]);
    }
    report.push(control);
    Ok(report)
}

/// Densities of `m` and `m~` with respect to their variations: with
/// `G = dm/d|m|`, `F~ = dm~/d|m~|` and `phi = d|m|/d|m~|`, checks
/// `0 <= phi <= 1`, `int ||F~||_K^2 d|m~| <= C int ||G|| d|m|`, `G_i in K`
/// and that `G` rebuilds `m`.
pub fn bochner_check(fm: &FactoredMeasure, opts: &CheckOptions) -> Result<CheckReport> {
    require(fm, FunctionSpace::L1)?;
    let ctx = Context::new(fm, opts)?;
    let m = &fm.original;
    let p = m.num_atoms();
    let space = fm.target();
    let iso = fm.is_isometric();
    let mut report = CheckReport::new("bochner_density", fm.a(), iso);

    let var = m.variation_measure()?;
    let var_t = fm.m_tilde.variation_measure()?;
    let g = m.rn_derivative(&var)?;
    let f_t = fm.m_tilde.rn_derivative(&var_t)?;

    let mut ratio = Claim::new("density_ratio", "0 <= d|m|/d|m~| <= 1", Scope::IsometricOnly, DENSITY_TOL);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in m.non_null_atoms() {
        let phi = var.weights()[i] / var_t.weights()[i];
        ratio.record(phi.min(1.0 - phi), || vec![i as f64]);
        let ft = space.norm(&f_t[i])?.value;
        lhs += ft * ft * var_t.weights()[i];
        rhs += norm2(&g[i], m.codomain()) * var.weights()[i];
    }
    let mut ineq = ctx.scope_claim(
        "bochner_inequality",
        "int ||F~||_K^2 d|m~| <= C int ||G|| d|m|",
        Scope::IsometricOnly,
        1,
    );
    ineq.record(fm.c() * rhs - lhs, Vec::new);
    ineq.observe(lhs);
    for claim in [ratio, ineq] {
        report.push(if iso { claim } else { claim.skip() });
    }

    let mut member = Claim::new("derivative_in_body", "gauge_K(G_i) <= 1", Scope::AllA, ctx.tol);
    for i in m.non_null_atoms() {
        member.record(1.0 - space.body().gauge(&g[i])?, || g[i].clone());
    }
    report.push(member);

    let mut rebuild = ctx.scope_claim("derivative_reconstruction", "sum_A G d|m| = m(A)", Scope::AllA, 1);
    for set in 0..=full_set(p) {
        let mut v = vec![0.0; m.dim()];
        for i in members(set) {
            for (s, x) in v.iter_mut().zip(&g[i]) {
                *s += x * var.weights()[i];
            }
        }
        let gap = v
            .iter()
            .zip(m.value_on(set))
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        rebuild.record(-gap, || vec![set as f64]);
    }
    report.push(rebuild);
    Ok(report)
}

/// For every set `A` and partition `A_1, ..., A_n` of it,
/// `sum_j ||m~(A_j)||_K^2 / |m|(A_j) <= C |m|(A)` with `0/0 = 0`, and the
/// resulting bound `sqrt(C |m|(Omega))` on the 2-variation.
pub fn two_variation_check(fm: &FactoredMeasure, opts: &CheckOptions) -> Result<CheckReport> {
    require(fm, FunctionSpace::L1)?;
    let ctx = Context::new(fm, opts)?;
    let m = &fm.original;
    let p = m.num_atoms();
    let c = fm.c();
    let mut report = CheckReport::new("two_variation", fm.a(), fm.is_isometric());
    let mut sums = ctx.scope_claim(
        "partition_sums",
        "sum_j ||m~(A_j)||_K^2 / |m|(A_j) <= C |m|(A)",
        Scope::AllA,
        1,
    );
    let mut two_var = Claim::new(
        "two_variation",
        "2-variation of m~ with respect to |m| <= sqrt(C |m|(Omega))",
        Scope::AllA,
        ctx.tol * ctx.total.sqrt(),
    );
    if p > MAX_PARTITION_ATOMS {
        report.push(sums.skip());
        report.push(two_var.skip());
        return Ok(report);
    }
    let full = full_set(p);
    let mut block = vec![0.0; full as usize + 1];
    for set in 1..=full {
        let var: f64 = members(set).map(|i| ctx.atoms[i]).sum();
        if var > 0.0 {
            let k = fm.target().norm(&m.value_on(set))?.value;
            block[set as usize] = k * k / var;
        }
    }
    let var_total: f64 = ctx.atoms.iter().sum();
    let mut sup: f64 = 0.0;
    for set in 0..=full {
        let var: f64 = members(set).map(|i| ctx.atoms[i]).sum();
        for part in set_partitions(set) {
            let s: f64 = part.iter().map(|&b| block[b as usize]).sum();
            sums.record(c * var - s, || part.iter().map(|&b| b as f64).collect());
            if set == full {
                sup = sup.max(s);
            }
        }
    }
    two_var.record((c * var_total).sqrt() - sup.sqrt(), Vec::new);
    two_var.observe(sup.sqrt());
    report.push(sums);
    report.push(two_var);
    Ok(report)
}

/// The Lorentz quasi-norm of indicators, `||chi_A||_{L_{2,1}} = 2 sqrt(||m||(A))`,
/// the bound `||m~(A)||_K <= sqrt(C ||m||(Omega)) / 2 ||chi_A||_{L_{2,1}}`, and the
/// observed ratio `||I_m~(f)||_K / ||f||_{L_{2,1}}` on random functions.
pub fn lorentz_factor_check(fm: &FactoredMeasure, opts: &CheckOptions) -> Result<CheckReport> {
    require(fm, FunctionSpace::Linf)?;
    let ctx = Context::new(fm, opts)?;
    let m = &fm.original;
    let p = m.num_atoms();
    let space = fm.target();
    let scale = (fm.c() * ctx.total).sqrt() / 2.0;
    let mut report = CheckReport::new("lorentz_indicator", fm.a(), fm.is_isometric());
    let mut exact = Claim::new(
        "indicator_quasinorm",
        "||chi_A||_L21(||m||) = 2 sqrt(||m||(A))",
        Scope::AllA,
        0.0,
    );
    let mut bound = ctx.scope_claim(
        "indicator_bound",
        "||m~(A)||_K <= sqrt(C ||m||(Omega)) / 2 ||chi_A||_L21(||m||)",
        Scope::AllA,
        1,
    );
    for set in 0..=full_set(p) {
        let chi = SimpleFunction::characteristic(p, set);
        let q = lorentz_21_quasinorm(m, &chi)?;
        exact.record_equal(q, 2.0 * m.semivariation(set)?.sqrt(), || chi.values().to_vec());
        let k = space.norm(&m.value_on(set))?.value;
        bound.record(scale * q - k, || chi.values().to_vec());
    }
    report.push(exact);
    report.push(bound);

    let mut ratio = Claim::new(
        "lorentz_ratio",
        "sup ||I_m~(f)||_K / ||f||_L21(||m||) is finite",
        Scope::AllA,
        0.0,
    );
    let mut sup: f64 = 0.0;
    for f in random_functions(m, opts.sample_size, opts.seed)? {
        let q = lorentz_21_quasinorm(m, &f)?;
        if q > 0.0 {
            sup = sup.max(space.norm(&integrate(m, &f, m.full_set())?)?.value / q);
        }
    }
    ratio.record(if sup.is_finite() { 0.0 } else { -1.0 }, Vec::new);
    ratio.observe(sup);
    report.push(ratio);
    Ok(report)
}

/// Every check on both factorizations of one measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureChecks {
    /// `||m||(Omega)`.
    pub scale: f64,
    /// Checks on `m / ||m||(Omega)`.
    pub normalized: Vec<CheckReport>,
    /// The same checks on `m` itself.
    pub raw: Vec<CheckReport>,
}

impl MeasureChecks {
    pub fn passed(&self) -> bool {
        self.normalized.iter().chain(&self.raw).all(CheckReport::passed)
    }
}

/// All checks on one factorization.
pub fn run_checks(fm: &FactoredMeasure, opts: &CheckOptions) -> Result<Vec<CheckReport>> {
    Ok(match fm.which {
        FunctionSpace::Linf => vec![check_iinfty_factorization(fm, opts)?, lorentz_factor_check(fm, opts)?],
        FunctionSpace::L1 => vec![
            check_im_factorization(fm, opts)?,
            bochner_check(fm, opts)?,
            two_variation_check(fm, opts)?,
        ],
    })
}

/// Factors `m / ||m||(Omega)` through the operators in `which` and runs every
/// check on the normalized measure and again on `m`.
pub fn check_measure(
    m: &VectorMeasure,
    which: &[FunctionSpace],
    params: DfjpParams,
    opts: &CheckOptions,
) -> Result<MeasureChecks> {
    let (unit, scale) = normalize(m)?;
    let mut normalized = Vec::new();
    let mut raw = Vec::new();
    for &w in which {
        let fm = match w {
            FunctionSpace::Linf => factor_iinfty(&unit, params)?,
            FunctionSpace::L1 => factor_im(&unit, params)?,
        };
        normalized.extend(run_checks(&fm, opts)?);
        raw.extend(run_checks(&fm.rescaled(scale)?, opts)?);
    }
    Ok(MeasureChecks { scale, normalized, raw })
}
