//! Seeded random measure instances.

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use gaugefactor::measure::full_set;
use gaugefactor::{a_bar_default, NormedSpace, Semivariation, VectorMeasure};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const MAX_DIM: usize = 6;
/// Beyond six non-null atoms the `L1(m)` ball is not enumerated.
pub const MAX_ATOMS: usize = 6;

const RANK_DEFICIENT_PROB: f64 = 0.2;
const NULL_ATOM_PROB: f64 = 0.1;
const SPARSE_ZERO_PROB: f64 = 0.5;
const MAX_REJECTIONS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormChoice {
    L1,
    Linf,
    Custom,
}

impl FromStr for NormChoice {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "l1" => NormChoice::L1,
            "linf" => NormChoice::Linf,
            "custom" => NormChoice::Custom,
            other => bail!("unknown norm {other:?}, expected l1, linf or custom"),
        })
    }
}

/// A value of `a`, either the isometric tuning or a number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AValue {
    Abar,
    Fixed(f64),
}

impl AValue {
    pub fn value(self) -> f64 {
        match self {
            AValue::Abar => a_bar_default().value,
            AValue::Fixed(a) => a,
        }
    }
}

impl FromStr for AValue {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "abar" {
            return Ok(AValue::Abar);
        }
        let a: f64 = s.parse().with_context(|| format!("a: expected \"abar\" or a number, found {s:?}"))?;
        ensure!(a > 1.0 && a.is_finite(), "a: must be a finite number above 1, found {a}");
        Ok(AValue::Fixed(a))
    }
}

/// Parses `lo..hi` (inclusive) or a single count.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().with_context(|| format!("bad range {s:?}"))?;
    let hi: usize = hi.trim().parse().with_context(|| format!("bad range {s:?}"))?;
    ensure!(lo <= hi, "empty range {s:?}");
    Ok(lo..=hi)
}

pub fn parse_list<T: FromStr<Err = anyhow::Error>>(s: &str) -> Result<Vec<T>> {
    let items = s.split(',').map(T::from_str).collect::<Result<Vec<_>>>()?;
    ensure!(!items.is_empty(), "empty list");
    Ok(items)
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub dims: RangeInclusive<usize>,
    pub atoms: RangeInclusive<usize>,
    pub norm_pool: Vec<NormChoice>,
    pub a_values: Vec<AValue>,
    pub tol: f64,
    pub sample_size: usize,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            trials: 100,
            dims: 1..=4,
            atoms: 1..=5,
            norm_pool: vec![NormChoice::L1, NormChoice::Linf, NormChoice::Custom],
            a_values: vec![AValue::Abar],
            tol: 1e-6,
            sample_size: 200,
            output: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.trials >= 1, "trials: must be at least 1");
        ensure!(
            *self.dims.start() >= 1 && *self.dims.end() <= MAX_DIM,
            "dims: must lie within 1..{MAX_DIM}"
        );
        ensure!(
            *self.atoms.start() >= 1 && *self.atoms.end() <= MAX_ATOMS,
            "atoms: must lie within 1..{MAX_ATOMS}"
        );
        ensure!(!self.norm_pool.is_empty(), "norms: at least one norm is required");
        ensure!(!self.a_values.is_empty(), "a: at least one value is required");
        ensure!(self.tol > 0.0 && self.tol.is_finite(), "tol: must be positive");
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed ^ trial as u64
    }

    /// The instance for `trial`. The first trials are steered to cover a null
    /// atom, semivariation below variation and a rank-deficient atom matrix,
    /// whenever the ranges allow it.
    pub fn instance(&self, trial: usize) -> Result<VectorMeasure> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.trial_seed(trial));
        let (dmin, dmax) = (*self.dims.start(), *self.dims.end());
        let (pmin, pmax) = (*self.atoms.start(), *self.atoms.end());
        let mut d = rng.random_range(self.dims.clone());
        let mut p = rng.random_range(self.atoms.clone());
        let norm = *self.norm_pool.choose(&mut rng).expect("validated non-empty");
        let mut force_null = false;
        let mut force_gap = false;
        let mut force_rank = false;
        match trial {
            0 if pmax >= 2 => {
                p = p.max(2);
                force_null = true;
            }
            1 if dmax >= 2 && pmax >= 2 => {
                d = d.max(2);
                p = p.max(2);
                force_gap = true;
            }
            2 if dmax >= 2 => {
                d = d.max(2);
                force_rank = true;
            }
            _ => {}
        }
        debug_assert!((dmin..=dmax).contains(&d) && (pmin..=pmax).contains(&p));
        let space = Arc::new(random_space(&mut rng, norm, d)?);
        for _ in 0..MAX_REJECTIONS {
            let rank_deficient = force_rank || (d >= 2 && rng.random_bool(RANK_DEFICIENT_PROB));
            let mut atoms = random_atoms(&mut rng, d, p, rank_deficient);
            if force_null {
                let i = rng.random_range(0..p);
                atoms[i] = vec![0.0; d];
            }
            if atoms.iter().flatten().all(|&v| v == 0.0) {
                continue;
            }
            let scale = 10f64.powf(rng.random_range(-1.0..1.0));
            for v in atoms.iter_mut().flatten() {
                *v *= scale;
            }
            let m = VectorMeasure::new(space.clone(), atoms)?;
            if force_gap {
                let full = full_set(p);
                if m.semivariation(full)? >= m.variation(full)? * (1.0 - 1e-6) {
                    continue;
                }
            }
            return Ok(m);
        }
        bail!("trial {trial}: no admissible instance after {MAX_REJECTIONS} draws")
    }
}

fn random_space(rng: &mut ChaCha8Rng, norm: NormChoice, d: usize) -> Result<NormedSpace> {
    Ok(match norm {
        NormChoice::L1 => NormedSpace::l1(d)?,
        NormChoice::Linf => NormedSpace::linf(d)?,
        NormChoice::Custom => {
            for _ in 0..MAX_REJECTIONS {
                let k = rng.random_range(d..=d + 2);
                let functionals = (0..k)
                    .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect();
                // Unbounded or degenerate balls are redrawn.
                if let Ok(space) = NormedSpace::custom(d, functionals) {
                    return Ok(space);
                }
            }
            bail!("no bounded random norm in dimension {d}")
        }
    })
}

fn random_atoms(rng: &mut ChaCha8Rng, d: usize, p: usize, rank_deficient: bool) -> Vec<Vec<f64>> {
    let mut atoms: Vec<Vec<f64>> = if rank_deficient {
        let r = rng.random_range(1..d);
        let basis: Vec<Vec<f64>> = (0..r)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        (0..p)
            .map(|_| {
                let c: Vec<f64> = (0..r).map(|_| rng.random_range(-1.0..1.0)).collect();
                (0..d)
                    .map(|j| (0..r).map(|k| c[k] * basis[k][j]).sum())
                    .collect()
            })
            .collect()
    } else if rng.random_bool(0.5) {
        (0..p)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    } else {
        (0..p)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        if rng.random_bool(SPARSE_ZERO_PROB) {
                            0.0
                        } else {
                            rng.random_range(-1.0..1.0)
                        }
                    })
                    .collect()
            })
            .collect()
    };
    for a in atoms.iter_mut() {
        if rng.random_bool(NULL_ATOM_PROB) {
            a.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    atoms
}

/// Rank of the atom matrix by Gaussian elimination with partial pivoting.
pub fn atom_rank(atoms: &[Vec<f64>], tol: f64) -> usize {
    let mut rows: Vec<Vec<f64>> = atoms.to_vec();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len())
            .max_by(|&i, &j| rows[i][c].abs().total_cmp(&rows[j][c].abs()))
            .filter(|&i| rows[i][c].abs() > tol)
        else {
            continue;
        };
        rows.swap(rank, pivot);
        for i in rank + 1..rows.len() {
            let factor = rows[i][c] / rows[rank][c];
            for j in c..cols {
                rows[i][j] -= factor * rows[rank][j];
            }
        }
        rank += 1;
    }
    rank
}
