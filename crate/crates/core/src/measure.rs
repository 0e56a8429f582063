//! Vector measures on a finite set of atoms.
//!
//! Every subset of the atoms is measurable; sets are bitmasks. A measure is
//! determined by its values `m_i` on the atoms, and `m(A)` is their sum over
//! `A`.

use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dfjp::DfjpSpace;
use crate::error::{check_dim, Error, Result};
use crate::l1m::SimpleFunction;
use crate::lp::GEOM_TOL;
use crate::space::{max_norm, NormEval, NormedSpace};

/// Largest supported number of atoms.
pub const MAX_ATOMS: usize = 10;

/// Attempts made by [`VectorMeasure::rybakov`] before giving up.
pub const RYBAKOV_ATTEMPTS: usize = 100;

/// A subset of the atoms, bit `i` standing for atom `i`.
pub type AtomSet = u32;

/// The set of all `p` atoms.
pub fn full_set(p: usize) -> AtomSet {
    if p >= 32 {
        u32::MAX
    } else {
        (1u32 << p) - 1
    }
}

/// Atoms of `set` in increasing order.
pub fn members(set: AtomSet) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| set >> i & 1 == 1)
}

/// A nonnegative measure on the atoms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarMeasure {
    weights: Vec<f64>,
}

impl ScalarMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() > MAX_ATOMS {
            return Err(Error::InvalidInput(format!(
                "a measure needs 1 to {MAX_ATOMS} atoms, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("scalar measure weights must be finite and >= 0".into()));
        }
        Ok(ScalarMeasure { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn of(&self, set: AtomSet) -> f64 {
        members(set)
            .filter(|&i| i < self.weights.len())
            .map(|i| self.weights[i])
            .sum()
    }

    /// Atoms of zero weight.
    pub fn null_mask(&self) -> AtomSet {
        mask_where(self.weights.len(), |i| self.weights[i] == 0.0)
    }
}

fn mask_where(p: usize, pred: impl Fn(usize) -> bool) -> AtomSet {
    (0..p).filter(|&i| pred(i)).fold(0, |m, i| m | 1 << i)
}

/// `m(A) = sum_{i in A} m_i` with values in a normed space `X`.
#[derive(Debug)]
pub struct VectorMeasure<X = NormedSpace> {
    codomain: Arc<X>,
    atoms: Vec<Vec<f64>>,
    null_mask: AtomSet,
    l1_space: OnceLock<Result<Arc<NormedSpace>>>,
}

impl<X> Clone for VectorMeasure<X> {
    fn clone(&self) -> Self {
        let l1_space = OnceLock::new();
        if let Some(s) = self.l1_space.get() {
            let _ = l1_space.set(s.clone());
        }
        VectorMeasure {
            codomain: self.codomain.clone(),
            atoms: self.atoms.clone(),
            null_mask: self.null_mask,
            l1_space,
        }
    }
}

/// A Rybakov control measure `|x* m|` and the functional producing it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rybakov {
    pub functional: Vec<f64>,
    pub measure: ScalarMeasure,
    pub attempts: usize,
}

impl<X: NormEval> VectorMeasure<X> {
    /// Rejects the zero measure and more than [`MAX_ATOMS`] atoms.
    pub fn new(codomain: Arc<X>, atoms: Vec<Vec<f64>>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() > MAX_ATOMS {
            return Err(Error::InvalidInput(format!(
                "a measure needs 1 to {MAX_ATOMS} atoms, got {}",
                atoms.len()
            )));
        }
        for v in &atoms {
            check_dim(codomain.dim(), v.len())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("atom values must be finite".into()));
            }
        }
        let null_mask = mask_where(atoms.len(), |i| atoms[i].iter().all(|x| *x == 0.0));
        if null_mask == full_set(atoms.len()) {
            return Err(Error::ZeroMeasure);
        }
        Ok(VectorMeasure {
            codomain,
            atoms,
            null_mask,
            l1_space: OnceLock::new(),
        })
    }

    pub fn codomain(&self) -> &Arc<X> {
        &self.codomain
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn dim(&self) -> usize {
        self.codomain.dim()
    }

    pub fn full_set(&self) -> AtomSet {
        full_set(self.atoms.len())
    }

    /// Atoms with `m_i = 0`.
    pub fn null_mask(&self) -> AtomSet {
        self.null_mask
    }

    /// Indices of the atoms with `m_i != 0`.
    pub fn non_null_atoms(&self) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|i| self.null_mask >> i & 1 == 0)
            .collect()
    }

    /// `A` is m-null iff `m` vanishes on every atom of `A`.
    pub fn is_null_set(&self, set: AtomSet) -> bool {
        set & self.full_set() & !self.null_mask == 0
    }

    pub fn value_on(&self, set: AtomSet) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for i in members(set & self.full_set()) {
            for (s, x) in v.iter_mut().zip(&self.atoms[i]) {
                *s += x;
            }
        }
        v
    }

    /// `|m|(A) = sum_{i in A} ||m_i||`; the partition into atoms is the finest.
    pub fn variation(&self, set: AtomSet) -> Result<f64> {
        let mut total = 0.0;
        for i in members(set & self.full_set() & !self.null_mask) {
            total += self.codomain.eval_norm(&self.atoms[i])?;
        }
        Ok(total)
    }

    /// The variation as a scalar measure `|m|`.
    pub fn variation_measure(&self) -> Result<ScalarMeasure> {
        let mut w = Vec::with_capacity(self.atoms.len());
        for v in &self.atoms {
            w.push(self.codomain.eval_norm(v)?);
        }
        ScalarMeasure::new(w)
    }

    /// `max ||sum_{i in A} e_i m_i||` over signs `e`, one of each `+-` pair.
    pub fn semivariation_by_signs(&self, set: AtomSet) -> Result<f64> {
        let idx: Vec<usize> = members(set & self.full_set() & !self.null_mask).collect();
        if idx.is_empty() {
            return Ok(0.0);
        }
        let mut candidates = Vec::with_capacity(1 << (idx.len() - 1));
        for mask in 0u32..1 << (idx.len() - 1) {
            let mut v = self.atoms[idx[0]].clone();
            for (k, &i) in idx.iter().enumerate().skip(1) {
                let s = if mask >> (k - 1) & 1 == 1 { -1.0 } else { 1.0 };
                for (a, x) in v.iter_mut().zip(&self.atoms[i]) {
                    *a += s * x;
                }
            }
            candidates.push(v);
        }
        max_norm(&*self.codomain, &candidates).map(|(n, _)| n)
    }

    /// Radon-Nikodym derivative `G_i = m_i / mu_i` with respect to a
    /// control measure `mu`; zero where `mu` vanishes.
    pub fn rn_derivative(&self, mu: &ScalarMeasure) -> Result<Vec<Vec<f64>>> {
        check_dim(self.atoms.len(), mu.weights().len())?;
        let mut g = Vec::with_capacity(self.atoms.len());
        for (i, (v, &w)) in self.atoms.iter().zip(mu.weights()).enumerate() {
            if w > 0.0 {
                g.push(v.iter().map(|x| x / w).collect());
            } else if self.null_mask >> i & 1 == 1 {
                g.push(vec![0.0; v.len()]);
            } else {
                return Err(Error::NotControlMeasure { atom: i });
            }
        }
        Ok(g)
    }

    /// The same atom vectors viewed in another space of equal dimension.
    pub fn with_codomain<Y: NormEval>(&self, codomain: Arc<Y>) -> Result<VectorMeasure<Y>> {
        VectorMeasure::new(codomain, self.atoms.clone())
    }

    /// `c m` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidInput(format!("scale factor {c} must be positive")));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|v| v.iter().map(|x| c * x).collect())
            .collect();
        Self::new(self.codomain.clone(), atoms)
    }

    pub(crate) fn l1_space_cell(&self) -> &OnceLock<Result<Arc<NormedSpace>>> {
        &self.l1_space
    }
}

/// Semivariation `||m||(A)`, the supremum of `|x* m|(A)` over the dual ball.
pub trait Semivariation {
    fn semivariation(&self, set: AtomSet) -> Result<f64>;
}

impl VectorMeasure<NormedSpace> {
    /// `max_j sum_{i in A} |<phi_j, m_i>|` over the norming functionals.
    pub fn semivariation_dual(&self, set: AtomSet) -> f64 {
        let idx: Vec<usize> = members(set & self.full_set() & !self.null_mask).collect();
        self.codomain
            .functionals()
            .iter()
            .map(|phi| {
                idx.iter()
                    .map(|&i| crate::lp::dot(phi, &self.atoms[i]).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Finds a functional `x*` nonzero on every non-null atom, so that
    /// `|x* m|` has the same null sets as `m`.
    pub fn rybakov(&self, seed: u64) -> Result<Rybakov> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.dim();
        for attempt in 1..=RYBAKOV_ATTEMPTS {
            let raw: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let scale = self.codomain.dual_norm(&raw)?;
            if scale <= 0.0 {
                continue;
            }
            let phi: Vec<f64> = raw.iter().map(|v| v / scale).collect();
            let weights: Vec<f64> = self
                .atoms
                .iter()
                .map(|v| crate::lp::dot(&phi, v).abs())
                .collect();
            let separated = (0..self.atoms.len()).all(|i| {
                self.null_mask >> i & 1 == 1
                    || weights[i] > 1e-12 * self.codomain.norm_unchecked(&self.atoms[i])
            });
            if !separated {
                continue;
            }
            let measure = ScalarMeasure::new(weights)?;
            if measure.null_mask() != self.null_mask {
                continue;
            }
            return Ok(Rybakov {
                functional: phi,
                measure,
                attempts: attempt,
            });
        }
        Err(Error::SearchExhausted {
            attempts: RYBAKOV_ATTEMPTS,
        })
    }
}

impl Semivariation for VectorMeasure<NormedSpace> {
    /// The dual formula, cross-checked against sign enumeration.
    fn semivariation(&self, set: AtomSet) -> Result<f64> {
        let dual = self.semivariation_dual(set);
        let signs = self.semivariation_by_signs(set)?;
        if (dual - signs).abs() > GEOM_TOL * (1.0 + dual.abs()) {
            return Err(Error::OracleDisagreement {
                what: "semivariation",
                first: dual,
                second: signs,
            });
        }
        Ok(dual)
    }
}

impl Semivariation for VectorMeasure<DfjpSpace> {
    /// Sign enumeration; `||.||_K` has no finite list of norming functionals.
    fn semivariation(&self, set: AtomSet) -> Result<f64> {
        self.semivariation_by_signs(set)
    }
}

/// `||f||_{L_{2,1}(||m||)} = 2 int_0^inf sqrt(||m||({|f| > t})) dt`, exact for
/// step functions: with the distinct values `t_1 > ... > t_r > 0` of `|f|`
/// and `S_j = {|f| >= t_j}` it equals `2 sum_j (t_j - t_{j+1}) sqrt(||m||(S_j))`.
pub fn lorentz_21_quasinorm<M: Semivariation>(m: &M, f: &SimpleFunction) -> Result<f64> {
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let mut levels: Vec<f64> = abs.iter().copied().filter(|v| *v > 0.0).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let mut total = 0.0;
    for (j, &t) in levels.iter().enumerate() {
        let next = levels.get(j + 1).copied().unwrap_or(0.0);
        let set = mask_where(abs.len(), |i| abs[i] >= t);
        total += (t - next) * m.semivariation(set)?.sqrt();
    }
    Ok(2.0 * total)
}
