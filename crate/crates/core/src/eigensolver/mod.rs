//! Eigenpairs of the pencil `(K + P) u = λ M u` and the form-level Weyl
//! residual.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forms::FormMatrices;
use crate::linalg::{dense_generalized_eigen, CsrMatrix, Ldl};
use crate::table::Table;

/// Problems with fewer degrees of freedom are solved densely.
pub const DENSE_THRESHOLD: usize = 500;
/// Default seed of the starting block.
pub const DEFAULT_SEED: u64 = 0x5CA1_AB1E;
const MAX_ITERATIONS: usize = 1000;
const TOLERANCE: f64 = 1e-10;
/// A stagnating iteration is accepted within this factor of the tolerance.
const STAGNATION_SLACK: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal dof vectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖(K + P − λM) u‖_{M⁻¹}` per pair.
    pub residuals: Vec<f64>,
}

impl SpectralResult {
    /// Columns `index, eigenvalue, residual`.
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["index", "eigenvalue", "residual"]);
        for (k, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            t.push(vec![k.into(), (*l).into(), (*r).into()]);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub seed: u64,
    pub dense_threshold: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            seed: DEFAULT_SEED,
            dense_threshold: DENSE_THRESHOLD,
            tolerance: TOLERANCE,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

/// The default shift `−(1 + c_κ)` lies below the spectrum.
pub fn default_shift(fm: &FormMatrices) -> Result<f64> {
    Ok(-(1.0 + fm.form_bound()?.c_kappa))
}

/// `count` eigenpairs nearest `shift`.
pub fn solve_spectrum(fm: &FormMatrices, count: usize, shift: f64) -> Result<SpectralResult> {
    solve_spectrum_with(fm, count, shift, &SolverOptions::default())
}

pub fn solve_spectrum_with(
    fm: &FormMatrices,
    count: usize,
    shift: f64,
    opts: &SolverOptions,
) -> Result<SpectralResult> {
    let n = fm.num_dofs();
    if count == 0 || count > n {
        return Err(Error::invalid(format!(
            "requested {count} eigenpairs of a problem with {n} dofs"
        )));
    }
    if !shift.is_finite() {
        return Err(Error::invalid("shift must be finite"));
    }
    let h = fm.h();
    let m_factor = Ldl::factor(&fm.m, "mass matrix")?;
    let (values, vectors) = if n < opts.dense_threshold {
        dense_nearest(&h, &fm.m, count, shift)?
    } else {
        shift_invert(&h, &fm.m, &m_factor, count, shift, opts)?
    };
    let residuals = vectors
        .iter()
        .zip(&values)
        .map(|(x, &l)| dual_residual(&h, &fm.m, &m_factor, x, l))
        .collect();
    Ok(SpectralResult {
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
    })
}

fn dual_residual(h: &CsrMatrix, m: &CsrMatrix, mf: &Ldl, x: &[f64], l: f64) -> f64 {
    let hx = h.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: Vec<f64> = hx.iter().zip(&mx).map(|(a, b)| a - l * b).collect();
    let w = mf.solve(&r);
    r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
}

/// Selects the `count` pairs nearest `shift` and returns them ascending.
fn select(values: &[f64], count: usize, shift: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| {
        (values[i] - shift)
            .abs()
            .total_cmp(&(values[j] - shift).abs())
            .then(i.cmp(&j))
    });
    idx.truncate(count);
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    idx
}

fn dense_nearest(
    h: &CsrMatrix,
    m: &CsrMatrix,
    count: usize,
    shift: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let eig = dense_generalized_eigen(&h.to_dense(), &m.to_dense())?;
    let idx = select(&eig.values, count, shift);
    Ok((
        idx.iter().map(|&i| eig.values[i]).collect(),
        idx.iter()
            .map(|&i| eig.vectors.column(i).iter().copied().collect())
            .collect(),
    ))
}

/// `M`-orthonormalizes the columns of `y` (modified Gram–Schmidt, twice),
/// dropping numerically dependent columns.
fn m_orthonormalize(m: &CsrMatrix, y: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(y.len());
    let mut mout: Vec<Vec<f64>> = Vec::with_capacity(y.len());
    for mut v in y {
        let norm0 = m.quad(&v).max(0.0).sqrt();
        for _ in 0..2 {
            for (q, mq) in out.iter().zip(&mout) {
                let c: f64 = mq.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
        let norm = m.quad(&v).max(0.0).sqrt();
        if norm <= 1e-12 * norm0 || norm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        mout.push(m.mul_vec(&v));
        out.push(v);
    }
    out
}

fn shift_invert(
    h: &CsrMatrix,
    m: &CsrMatrix,
    mf: &Ldl,
    count: usize,
    shift: f64,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = h.dim();
    let a = h.combine(1.0, m, -shift);
    let af = Ldl::factor(&a, "shift-invert")?;
    let p = (2 * count).max(count + 8).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    x = m_orthonormalize(m, x);
    let mut residuals = vec![f64::INFINITY; count];
    let mut best = f64::INFINITY;
    let mut stalled = 0usize;
    for _ in 0..opts.max_iterations {
        let y: Vec<Vec<f64>> = x.iter().map(|v| af.solve(&m.mul_vec(v))).collect();
        let y = m_orthonormalize(m, y);
        if y.len() < count {
            return Err(Error::Config(format!(
                "subspace collapsed to dimension {} < {count}",
                y.len()
            )));
        }
        // Rayleigh–Ritz on the M-orthonormal basis
        let q = y.len();
        let hy: Vec<Vec<f64>> = y.iter().map(|v| h.mul_vec(v)).collect();
        let mut hq = DMatrix::zeros(q, q);
        for i in 0..q {
            for j in 0..q {
                hq[(i, j)] = y[i].iter().zip(&hy[j]).map(|(a, b)| a * b).sum();
            }
        }
        let hq = (&hq + hq.transpose()) * 0.5;
        let eig = SymmetricEigen::new(hq);
        let theta: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&i, &j| (theta[i] - shift).abs().total_cmp(&(theta[j] - shift).abs()));
        x = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (k, yk) in y.iter().enumerate() {
                    let w = eig.eigenvectors[(k, c)];
                    v.iter_mut().zip(yk).for_each(|(a, b)| *a += w * b);
                }
                v
            })
            .collect();
        let values: Vec<f64> = order.iter().map(|&c| theta[c]).collect();
        residuals = (0..count)
            .map(|k| dual_residual(h, m, mf, &x[k], values[k]))
            .collect();
        // relative to the requested tolerance; stagnation near it means the
        // rounding floor of the residual evaluation has been reached
        let worst = residuals
            .iter()
            .zip(&values)
            .map(|(r, l)| r / (opts.tolerance * l.abs().max(1.0)))
            .fold(0.0, f64::max);
        if worst < 0.5 * best {
            best = worst;
            stalled = 0;
        } else {
            stalled += 1;
        }
        if worst <= 1.0 || (worst <= STAGNATION_SLACK && stalled >= 10) {
            let idx = select(&values[..count], count, shift);
            return Ok((
                idx.iter().map(|&i| values[i]).collect(),
                idx.iter().map(|&i| x[i].clone()).collect(),
            ));
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residuals,
    })
}

/// Form-level Weyl residual of `u` at `λ`: with `‖u‖_M = 1` (normalized
/// here) and `r = (K + P − λM) u`, returns `√(r* N⁻¹ r)` where
/// `N = K + P₊ + (1 + c_κ) M`.
pub fn weyl_residual(fm: &FormMatrices, u: &[C64], lambda: f64) -> Result<f64> {
    if u.len() != fm.num_dofs() {
        return Err(Error::MeshMismatch(format!(
            "vector of length {} for {} dofs",
            u.len(),
            fm.num_dofs()
        )));
    }
    let norm = fm.m.quad_c(u).max(0.0).sqrt();
    if !(norm > 0.0) {
        return Err(Error::ZeroSolution);
    }
    let factor = fm.norm_factor()?;
    let un: Vec<C64> = u.iter().map(|z| z / norm).collect();
    let ku = fm.k.mul_vec_c(&un);
    let pu = fm.p_plus.mul_vec_c(&un);
    let qu = fm.p_minus.mul_vec_c(&un);
    let mu = fm.m.mul_vec_c(&un);
    let r: Vec<C64> = (0..un.len())
        .map(|i| ku[i] + pu[i] - qu[i] - mu[i] * lambda)
        .collect();
    let w = factor.solve_c(&r);
    Ok(r
        .iter()
        .zip(&w)
        .map(|(a, b)| (a.conj() * b).re)
        .sum::<f64>()
        .max(0.0)
        .sqrt())
}

pub fn weyl_residual_real(fm: &FormMatrices, u: &[f64], lambda: f64) -> Result<f64> {
    let c: Vec<C64> = u.iter().map(|&x| C64::new(x, 0.0)).collect();
    weyl_residual(fm, &c, lambda)
}
