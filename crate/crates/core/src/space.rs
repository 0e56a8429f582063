//! Finite-dimensional spaces with polyhedral norms and linear maps between them.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lp::{dot, vertex_enumeration, HPolytope, GEOM_TOL};

/// Largest dimension for which the `l1` norm keeps its full functional list.
pub const MAX_L1_DIM: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    Linf,
    Custom,
}

/// Anything that can evaluate a norm on `R^dim`.
pub trait NormEval {
    fn dim(&self) -> usize;
    fn eval_norm(&self, x: &[f64]) -> Result<f64>;

    /// An upper bound on the norm that is cheaper to get than the norm.
    fn norm_upper_bound(&self, _x: &[f64]) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// The largest norm among `candidates` and the index attaining it (0 when
/// empty). Candidates are visited in decreasing order of their upper bounds
/// and the scan stops once no remaining bound exceeds the best value.
pub fn max_norm<X: NormEval + ?Sized>(space: &X, candidates: &[Vec<f64>]) -> Result<(f64, usize)> {
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.iter().enumerate() {
        order.push((space.norm_upper_bound(c)?.unwrap_or(f64::INFINITY), i));
    }
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut best = (0.0, 0);
    for (bound, i) in order {
        if bound <= best.0 {
            break;
        }
        let n = space.eval_norm(&candidates[i])?;
        if n > best.0 {
            best = (n, i);
        }
    }
    Ok(best)
}

/// `R^dim` with `||x|| = max_j |<phi_j, x>|`.
#[derive(Debug)]
pub struct NormedSpace {
    dim: usize,
    kind: NormKind,
    functionals: Vec<Vec<f64>>,
    ball: OnceLock<Result<Vec<Vec<f64>>>>,
}

impl Clone for NormedSpace {
    fn clone(&self) -> Self {
        let ball = OnceLock::new();
        if let Some(v) = self.ball.get() {
            let _ = ball.set(v.clone());
        }
        NormedSpace {
            dim: self.dim,
            kind: self.kind,
            functionals: self.functionals.clone(),
            ball,
        }
    }
}

impl PartialEq for NormedSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.kind == other.kind && self.functionals == other.functionals
    }
}

fn sign_vectors(p: usize) -> impl Iterator<Item = Vec<f64>> {
    (0u64..1 << p).map(move |mask| {
        (0..p)
            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect()
    })
}

fn matrix_rank(rows: &[Vec<f64>], dim: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    m.rank(1e-10 * m.amax().max(1.0))
}

impl NormedSpace {
    pub fn linf(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("space dimension must be positive".into()));
        }
        let functionals = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        let ball = OnceLock::new();
        let _ = ball.set(Ok(sign_vectors(dim).collect()));
        Ok(NormedSpace {
            dim,
            kind: NormKind::Linf,
            functionals,
            ball,
        })
    }

    pub fn l1(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("space dimension must be positive".into()));
        }
        if dim > MAX_L1_DIM {
            return Err(Error::ScaleLimit(format!("l1 space of dimension {dim}")));
        }
        // Sign vectors with a leading +1; the negatives are implied by |.|.
        let functionals = sign_vectors(dim - 1)
            .map(|s| std::iter::once(1.0).chain(s).collect())
            .collect();
        let mut verts = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; dim];
                e[i] = s;
                verts.push(e);
            }
        }
        let ball = OnceLock::new();
        let _ = ball.set(Ok(verts));
        Ok(NormedSpace {
            dim,
            kind: NormKind::L1,
            functionals,
            ball,
        })
    }

    /// Polyhedral norm from dual functionals, which must span the dual space.
    pub fn custom(dim: usize, functionals: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("space dimension must be positive".into()));
        }
        for f in &functionals {
            check_dim(dim, f.len())?;
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("norm functional is not finite".into()));
            }
        }
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(functionals.len());
        for f in functionals {
            if f.iter().all(|v| *v == 0.0) {
                continue;
            }
            let neg: Vec<f64> = f.iter().map(|v| -v).collect();
            if !kept.iter().any(|g| *g == f || *g == neg) {
                kept.push(f);
            }
        }
        if matrix_rank(&kept, dim) < dim {
            return Err(Error::InvalidInput(
                "norm functionals do not span the dual space".into(),
            ));
        }
        Ok(NormedSpace {
            dim,
            kind: NormKind::Custom,
            functionals: kept,
            ball: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    /// The dual functionals `phi_j` (one of each `+-` pair).
    pub fn functionals(&self) -> &[Vec<f64>] {
        &self.functionals
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked(&self, x: &[f64]) -> f64 {
        match self.kind {
            NormKind::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormKind::L1 => x.iter().map(|v| v.abs()).sum(),
            NormKind::Custom => self
                .functionals
                .iter()
                .fold(0.0, |m, f| m.max(dot(f, x).abs())),
        }
    }

    /// Vertices of the unit ball, computed once on first use.
    pub fn ball_vertices(&self) -> Result<&[Vec<f64>]> {
        let res = self.ball.get_or_init(|| {
            let h = HPolytope::symmetric(self.dim, &self.functionals)?;
            let v = vertex_enumeration(&h)?;
            Ok(v.into_vertices())
        });
        match res {
            Ok(v) => Ok(v.as_slice()),
            Err(e) => Err(e.clone()),
        }
    }

    /// Ball vertices with one representative of each `+-v` pair.
    pub fn half_ball_vertices(&self) -> Result<Vec<&[f64]>> {
        Ok(self
            .ball_vertices()?
            .iter()
            .filter(|v| {
                v.iter()
                    .find(|x| x.abs() > GEOM_TOL)
                    .is_some_and(|x| *x > 0.0)
            })
            .map(|v| v.as_slice())
            .collect())
    }

    pub fn dual_norm(&self, phi: &[f64]) -> Result<f64> {
        check_dim(self.dim, phi.len())?;
        Ok(match self.kind {
            NormKind::Linf => phi.iter().map(|v| v.abs()).sum(),
            NormKind::L1 => phi.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormKind::Custom => self
                .ball_vertices()?
                .iter()
                .fold(0.0, |m, v| m.max(dot(phi, v))),
        })
    }

    /// Checks that every ball vertex has norm one to `GEOM_TOL`.
    pub fn check_representations(&self) -> Result<()> {
        for v in self.ball_vertices()? {
            let n = self.norm_unchecked(v);
            if (n - 1.0).abs() > GEOM_TOL {
                return Err(Error::OracleDisagreement {
                    what: "ball vertex norm",
                    first: n,
                    second: 1.0,
                });
            }
        }
        Ok(())
    }
}

impl NormEval for NormedSpace {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval_norm(&self, x: &[f64]) -> Result<f64> {
        self.norm(x)
    }
}

impl<T: NormEval + ?Sized> NormEval for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval_norm(&self, x: &[f64]) -> Result<f64> {
        (**self).eval_norm(x)
    }
    fn norm_upper_bound(&self, x: &[f64]) -> Result<Option<f64>> {
        (**self).norm_upper_bound(x)
    }
}

/// A matrix together with its domain and codomain.
#[derive(Debug)]
pub struct LinearMap<D = NormedSpace, C = NormedSpace> {
    matrix: DMatrix<f64>,
    domain: Arc<D>,
    codomain: Arc<C>,
}

impl<D, C> Clone for LinearMap<D, C> {
    fn clone(&self) -> Self {
        LinearMap {
            matrix: self.matrix.clone(),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        }
    }
}

impl<D: NormEval, C: NormEval> LinearMap<D, C> {
    pub fn new(matrix: DMatrix<f64>, domain: Arc<D>, codomain: Arc<C>) -> Result<Self> {
        check_dim(domain.dim(), matrix.ncols())?;
        check_dim(codomain.dim(), matrix.nrows())?;
        Ok(LinearMap {
            matrix,
            domain,
            codomain,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn domain(&self) -> &Arc<D> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<C> {
        &self.codomain
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.matrix.ncols(), x.len())?;
        Ok((0..self.matrix.nrows())
            .map(|i| (0..x.len()).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect())
    }
}

impl<C: NormEval> LinearMap<NormedSpace, C> {
    /// `max ||T v||` over the vertices of the domain ball, with a maximizing vertex.
    pub fn operator_norm_with_witness(&self) -> Result<(f64, Vec<f64>)> {
        let verts = self.domain.half_ball_vertices()?;
        let images = verts.iter().map(|v| self.apply(v)).collect::<Result<Vec<_>>>()?;
        let (n, i) = max_norm(&*self.codomain, &images)?;
        if n > 0.0 {
            Ok((n, verts[i].to_vec()))
        } else {
            Ok((0.0, vec![0.0; self.domain.dim()]))
        }
    }

    pub fn operator_norm(&self) -> Result<f64> {
        self.operator_norm_with_witness().map(|(n, _)| n)
    }
}
