//! The function spaces `L_1(m)` and `L_inf(m)` of a vector measure on atoms,
//! and the integration operators out of them.
//!
//! Functions are identified when they agree off the null atoms, so ball
//! geometry and operators live in coordinates indexed by the non-null atoms
//! (see [`compress`] and [`expand`]).

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lp::{dot, GEOM_TOL};
use crate::measure::{members, AtomSet, VectorMeasure};
use crate::space::{max_norm, LinearMap, NormEval, NormedSpace};

/// Largest number of non-null atoms for which the `L_1(m)` ball is built.
pub const MAX_BALL_ATOMS: usize = 6;

/// A function on the atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimpleFunction {
    #[serde(rename = "f")]
    values: Vec<f64>,
}

impl SimpleFunction {
    pub fn new(values: Vec<f64>) -> Self {
        SimpleFunction { values }
    }

    /// The indicator of `set` on `p` atoms.
    pub fn characteristic(p: usize, set: AtomSet) -> Self {
        SimpleFunction {
            values: (0..p).map(|i| f64::from(set >> i & 1 == 1)).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Zero on the null atoms of `m`.
    pub fn canonical<X: NormEval>(&self, m: &VectorMeasure<X>) -> Result<Self> {
        check_dim(m.num_atoms(), self.values.len())?;
        let null = m.null_mask();
        Ok(SimpleFunction {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| if null >> i & 1 == 1 { 0.0 } else { v })
                .collect(),
        })
    }

    /// Pointwise product.
    pub fn product(&self, other: &SimpleFunction) -> Result<Self> {
        check_dim(self.values.len(), other.values.len())?;
        Ok(SimpleFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Which function space an integration operator starts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionSpace {
    L1,
    Linf,
}

/// The values of `f` on the non-null atoms of `m`.
pub fn compress<X: NormEval>(m: &VectorMeasure<X>, f: &SimpleFunction) -> Result<Vec<f64>> {
    check_dim(m.num_atoms(), f.len())?;
    Ok(m.non_null_atoms().iter().map(|&i| f.values[i]).collect())
}

/// Inverse of [`compress`], zero on the null atoms.
pub fn expand<X: NormEval>(m: &VectorMeasure<X>, coords: &[f64]) -> Result<SimpleFunction> {
    let idx = m.non_null_atoms();
    check_dim(idx.len(), coords.len())?;
    let mut values = vec![0.0; m.num_atoms()];
    for (&i, &c) in idx.iter().zip(coords) {
        values[i] = c;
    }
    Ok(SimpleFunction { values })
}

/// `m`-essential supremum: the largest `|f_i|` over non-null atoms.
pub fn linf_norm<X: NormEval>(m: &VectorMeasure<X>, f: &SimpleFunction) -> Result<f64> {
    Ok(compress(m, f)?.iter().fold(0.0, |acc, v| acc.max(v.abs())))
}

/// `int_A f dm = sum_{i in A} f_i m_i`.
pub fn integrate<X: NormEval>(m: &VectorMeasure<X>, f: &SimpleFunction, set: AtomSet) -> Result<Vec<f64>> {
    check_dim(m.num_atoms(), f.len())?;
    let mut v = vec![0.0; m.dim()];
    for i in members(set & m.full_set()) {
        for (s, x) in v.iter_mut().zip(&m.atoms()[i]) {
            *s += f.values[i] * x;
        }
    }
    Ok(v)
}

/// `||f||_{L_1(m)} = max_j sum_i |f_i| |<phi_j, m_i>|`: the supremum over the
/// `L_inf` ball is attained, per functional, at the signs matching `f`.
pub fn l1m_norm_dual(m: &VectorMeasure<NormedSpace>, f: &SimpleFunction) -> Result<f64> {
    check_dim(m.num_atoms(), f.len())?;
    let idx = m.non_null_atoms();
    Ok(m.codomain()
        .functionals()
        .iter()
        .map(|phi| {
            idx.iter()
                .map(|&i| f.values[i].abs() * dot(phi, &m.atoms()[i]).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max))
}

/// `||f||_{L_1(m)} = max ||sum_i g_i f_i m_i||` over signs `g`; a convex
/// function of `g` peaks at a vertex of the `L_inf` ball.
pub fn l1m_norm_by_signs<X: NormEval>(m: &VectorMeasure<X>, f: &SimpleFunction) -> Result<f64> {
    check_dim(m.num_atoms(), f.len())?;
    let idx: Vec<usize> = m
        .non_null_atoms()
        .into_iter()
        .filter(|&i| f.values[i] != 0.0)
        .collect();
    if idx.is_empty() {
        return Ok(0.0);
    }
    let atoms = m.atoms();
    let mut candidates = Vec::with_capacity(1 << (idx.len() - 1));
    for mask in 0u32..1 << (idx.len() - 1) {
        let mut v: Vec<f64> = atoms[idx[0]].iter().map(|x| f.values[idx[0]] * x).collect();
        for (k, &i) in idx.iter().enumerate().skip(1) {
            let s = if mask >> (k - 1) & 1 == 1 { -f.values[i] } else { f.values[i] };
            for (a, x) in v.iter_mut().zip(&atoms[i]) {
                *a += s * x;
            }
        }
        candidates.push(v);
    }
    max_norm(&**m.codomain(), &candidates).map(|(n, _)| n)
}

/// [`l1m_norm_dual`] cross-checked against [`l1m_norm_by_signs`].
pub fn l1m_norm(m: &VectorMeasure<NormedSpace>, f: &SimpleFunction) -> Result<f64> {
    let dual = l1m_norm_dual(m, f)?;
    let signs = l1m_norm_by_signs(m, f)?;
    if (dual - signs).abs() > GEOM_TOL * (1.0 + dual) {
        return Err(Error::OracleDisagreement {
            what: "L1(m) norm",
            first: dual,
            second: signs,
        });
    }
    Ok(dual)
}

/// `L_1(m)` as a polyhedral space on the non-null atoms. Its functionals are
/// `(e_i |<phi_j, m_i>|)_i` over signs `e`; a weight vector dominated by
/// another one is dropped first.
pub fn l1m_space(m: &VectorMeasure<NormedSpace>) -> Result<Arc<NormedSpace>> {
    m.l1_space_cell()
        .get_or_init(|| build_l1m_space(m).map(Arc::new))
        .clone()
}

fn build_l1m_space(m: &VectorMeasure<NormedSpace>) -> Result<NormedSpace> {
    let idx = m.non_null_atoms();
    let q = idx.len();
    if q > MAX_BALL_ATOMS {
        return Err(Error::ScaleLimit(format!(
            "L1(m) ball with {q} non-null atoms (limit {MAX_BALL_ATOMS})"
        )));
    }
    let weights: Vec<Vec<f64>> = m
        .codomain()
        .functionals()
        .iter()
        .map(|phi| idx.iter().map(|&i| dot(phi, &m.atoms()[i]).abs()).collect())
        .collect();
    let dominated = |j: usize| {
        weights.iter().enumerate().any(|(k, w)| {
            k != j
                && w.iter().zip(&weights[j]).all(|(a, b)| a >= b)
                && (w != &weights[j] || k < j)
        })
    };
    let mut functionals = Vec::new();
    for (j, w) in weights.iter().enumerate() {
        if dominated(j) {
            continue;
        }
        for mask in 0u32..1 << (q - 1) {
            let row = (0..q)
                .map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -w[i] } else { w[i] })
                .collect();
            functionals.push(row);
        }
    }
    NormedSpace::custom(q, functionals)
}

/// Vertices of the unit ball of `L_1(m)`, zero on null atoms.
pub fn l1m_ball(m: &VectorMeasure<NormedSpace>) -> Result<Vec<SimpleFunction>> {
    let space = l1m_space(m)?;
    space
        .ball_vertices()?
        .iter()
        .map(|v| expand(m, v))
        .collect()
}

/// `I_m` (from `L_1(m)`) or `I_m^(inf)` (from `L_inf(m)`) as a matrix whose
/// columns are the non-null atoms.
pub fn integration_operator(m: &VectorMeasure<NormedSpace>, which: FunctionSpace) -> Result<LinearMap> {
    let idx = m.non_null_atoms();
    let domain = match which {
        FunctionSpace::L1 => l1m_space(m)?,
        FunctionSpace::Linf => Arc::new(NormedSpace::linf(idx.len())?),
    };
    let matrix = DMatrix::from_fn(m.dim(), idx.len(), |r, c| m.atoms()[idx[c]][r]);
    LinearMap::new(matrix, domain, m.codomain().clone())
}

/// The identity `L_inf(m) -> L_1(m)`.
pub fn linf_to_l1(m: &VectorMeasure<NormedSpace>) -> Result<LinearMap> {
    let q = m.non_null_atoms().len();
    LinearMap::new(
        DMatrix::identity(q, q),
        Arc::new(NormedSpace::linf(q)?),
        l1m_space(m)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Semivariation;

    fn measure(space: NormedSpace, atoms: Vec<Vec<f64>>) -> VectorMeasure {
        VectorMeasure::new(Arc::new(space), atoms).unwrap()
    }

    #[test]
    fn essential_sup() {
        let m = measure(NormedSpace::l1(1).unwrap(), vec![vec![1.0], vec![2.0]]);
        assert_eq!(linf_norm(&m, &SimpleFunction::new(vec![3.0, -5.0])).unwrap(), 5.0);
        assert_eq!(linf_norm(&m, &SimpleFunction::characteristic(2, 0b11)).unwrap(), 1.0);
        let n = measure(NormedSpace::l1(1).unwrap(), vec![vec![1.0], vec![0.0]]);
        assert_eq!(linf_norm(&n, &SimpleFunction::new(vec![0.0, 7.0])).unwrap(), 0.0);
    }

    #[test]
    fn characteristic_norm_is_semivariation() {
        let m = measure(
            NormedSpace::linf(2).unwrap(),
            vec![vec![1.0, 0.5], vec![-0.5, 1.0], vec![0.25, 0.25]],
        );
        for set in 0..8 {
            let chi = SimpleFunction::characteristic(3, set);
            let n = l1m_norm(&m, &chi).unwrap();
            assert!((n - m.semivariation(set).unwrap()).abs() < 1e-15);
            assert_eq!(integrate(&m, &chi, m.full_set()).unwrap(), m.value_on(set));
        }
    }

    #[test]
    fn ball_of_coordinate_measure_is_cross_polytope() {
        let m = measure(NormedSpace::l1(2).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let verts = l1m_ball(&m).unwrap();
        let mut got: Vec<Vec<f64>> = verts.iter().map(|f| f.values().to_vec()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            got,
            vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![0.0, 1.0], vec![1.0, 0.0]]
        );
    }

    #[test]
    fn scalar_ball_is_interval() {
        let m = measure(NormedSpace::linf(1).unwrap(), vec![vec![1.0]]);
        let mut got: Vec<f64> = l1m_ball(&m).unwrap().iter().map(|f| f.values()[0]).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![-1.0, 1.0]);
    }

    #[test]
    fn operator_norms() {
        let m = measure(
            NormedSpace::linf(2).unwrap(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]],
        );
        let total = m.semivariation(m.full_set()).unwrap();
        assert_eq!(total, 1.0);
        let i1 = integration_operator(&m, FunctionSpace::L1).unwrap();
        assert!((i1.operator_norm().unwrap() - 1.0).abs() < 1e-12);
        let iinf = integration_operator(&m, FunctionSpace::Linf).unwrap();
        assert!((iinf.operator_norm().unwrap() - total).abs() < 1e-12);
        assert!((linf_to_l1(&m).unwrap().operator_norm().unwrap() - total).abs() < 1e-12);
    }

    #[test]
    fn too_many_atoms_for_ball() {
        let atoms = (0..7).map(|i| vec![1.0 + i as f64]).collect();
        let m = measure(NormedSpace::linf(1).unwrap(), atoms);
        assert!(matches!(l1m_ball(&m), Err(Error::ScaleLimit(_))));
        assert!(l1m_norm(&m, &SimpleFunction::characteristic(7, 0b101)).is_ok());
    }
}
