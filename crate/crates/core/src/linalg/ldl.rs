use num_complex::Complex64 as C64;

use super::sparse::{rcm_ordering, CsrMatrix};
use crate::error::{Error, Result};

/// `P A Pᵀ = L D Lᵀ` in envelope (skyline) storage, for symmetric and
/// possibly indefinite `A`. No pivoting: a pivot below
/// `1e-13·|a_ii|` is reported as a factorization failure.
#[derive(Debug, Clone)]
pub struct Ldl {
    perm: Vec<usize>,
    /// first column of row `i` in the envelope
    first: Vec<usize>,
    /// row `i` of `L` occupies `start[i]..start[i+1]`, columns `first[i]..i`
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-13;

impl Ldl {
    /// Factors with a reverse Cuthill–McKee ordering. `stage` names the
    /// caller in error messages.
    pub fn factor(a: &CsrMatrix, stage: &'static str) -> Result<Self> {
        Self::factor_with(a, rcm_ordering(a), stage)
    }

    pub fn factor_with(a: &CsrMatrix, perm: Vec<usize>, stage: &'static str) -> Result<Self> {
        let n = a.dim();
        let p = a.permuted(&perm);
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in p.triplets() {
            if j < i {
                first[i] = first[i].min(j);
            } else if i < j {
                first[j] = first[j].min(i);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i]));
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for (j, v) in p.row(i) {
                if j < i {
                    lower[start[i] + (j - first[i])] = v;
                } else if j == i {
                    diag[i] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let a_ii = diag[i];
            // row i holds g_ij = L_ij d_j until it is complete, so the
            // update subtracts g_ik L_jk with rows j < i already final
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = lower[start[i] + (j - fi)];
                let ri = start[i] + (k0 - fi);
                let rj = start[j] + (k0 - fj);
                let len = j - k0;
                for k in 0..len {
                    s -= lower[ri + k] * lower[rj + k];
                }
                lower[start[i] + (j - fi)] = s;
            }
            let mut d = a_ii;
            for j in fi..i {
                let gij = lower[start[i] + (j - fi)];
                let lij = gij / diag[j];
                d -= gij * lij;
                lower[start[i] + (j - fi)] = lij;
            }
            let scale = a_ii.abs().max(f64::MIN_POSITIVE);
            if !(d.abs() >= PIVOT_TOL * scale) {
                return Err(Error::Factorization {
                    stage,
                    pivot: perm[i],
                    hint: format!(
                        "pivot {d:e} is numerically zero; the shifted matrix is (nearly) \
                         singular, perturb the shift slightly"
                    ),
                });
            }
            diag[i] = d;
        }
        Ok(Ldl {
            perm,
            first,
            start,
            lower,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of negative pivots: by Sylvester's law of inertia, the number
    /// of negative eigenvalues of `A`.
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|d| **d < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let s: f64 = row.iter().zip(&x[fi..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (l, v) in row.iter().zip(&mut x[fi..i]) {
                *v -= l * xi;
            }
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }

    pub fn solve_c(&self, b: &[C64]) -> Vec<C64> {
        let re = self.solve(&b.iter().map(|z| z.re).collect::<Vec<_>>());
        let im = self.solve(&b.iter().map(|z| z.im).collect::<Vec<_>>());
        re.into_iter()
            .zip(im)
            .map(|(r, i)| C64::new(r, i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse_symmetric(n: usize, seed: u64, shift: f64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, shift + rng.random_range(-1.0..1.0)));
            for _ in 0..2 {
                let j = rng.random_range(0..n);
                if j != i {
                    let v = rng.random_range(-1.0..1.0);
                    t.push((i, j, v));
                    t.push((j, i, v));
                }
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn solves_indefinite_systems() {
        for seed in 0..5 {
            let a = random_sparse_symmetric(40, seed, 0.3);
            let f = Ldl::factor(&a, "test").unwrap();
            let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
            let x = f.solve(&b);
            let r = a.mul_vec(&x);
            let err = r.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "seed {seed}: {err}");
        }
    }

    #[test]
    fn inertia_counts_negative_eigenvalues() {
        let a = random_sparse_symmetric(30, 7, 0.0);
        let f = Ldl::factor(&a, "test").unwrap();
        let eig = nalgebra::SymmetricEigen::new(a.to_dense());
        let neg = eig.eigenvalues.iter().filter(|l| **l < 0.0).count();
        assert_eq!(f.negative_pivots(), neg);
    }

    #[test]
    fn singular_matrix_reports_stage() {
        let a = CsrMatrix::from_triplets(
            2,
            vec![(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)],
        );
        let err = Ldl::factor(&a, "shift-invert").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("shift-invert") && msg.contains("perturb"), "{msg}");
    }
}
