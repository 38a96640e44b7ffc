use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Square sparse matrix in compressed-row form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n: usize) -> Self {
        CsrMatrix {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Sums duplicate entries; explicit zeros are kept so that matrices
    /// assembled on the same mesh share a sparsity pattern.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            assert!(i < n && j < n, "entry ({i}, {j}) outside {n}x{n}");
            if last == Some((i, j)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn mul_vec_c(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| x[j] * v).sum())
            .collect()
    }

    /// `x* A x` for Hermitian use (real part; `A` symmetric real).
    pub fn quad_c(&self, x: &[C64]) -> f64 {
        let ax = self.mul_vec_c(x);
        x.iter().zip(&ax).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn quad(&self, x: &[f64]) -> f64 {
        let ax = self.mul_vec(x);
        x.iter().zip(&ax).map(|(a, b)| a * b).sum()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &CsrMatrix, b: f64) -> CsrMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let entries = self
            .triplets()
            .map(|(i, j, v)| (i, j, a * v))
            .chain(other.triplets().map(|(i, j, v)| (i, j, b * v)))
            .collect();
        CsrMatrix::from_triplets(self.n, entries)
    }

    pub fn scaled(&self, a: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            d[(i, j)] += v;
        }
        d
    }

    /// `P A Pᵀ` with `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> CsrMatrix {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        CsrMatrix::from_triplets(
            self.n,
            self.triplets().map(|(i, j, v)| (inv[i], inv[j], v)).collect(),
        )
    }
}

/// Reverse Cuthill–McKee ordering (`perm[new] = old`) of the symmetric
/// sparsity pattern, started from a pseudo-peripheral node of each
/// component.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize, mark: &mut Vec<bool>| -> (Vec<usize>, usize) {
        // returns the last level and the eccentricity
        let mut seen = mark.clone();
        let mut frontier = vec![start];
        seen[start] = true;
        let mut depth = 0;
        loop {
            let mut next = Vec::new();
            for &v in &frontier {
                for (w, _) in a.row(v) {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return (frontier, depth);
            }
            frontier = next;
            depth += 1;
        }
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral node by repeated BFS
        let mut start = seed;
        let (mut last, mut ecc) = bfs_levels(start, &mut visited);
        for _ in 0..8 {
            let cand = *last
                .iter()
                .min_by_key(|&&v| degree[v])
                .expect("nonempty level");
            let (l2, e2) = bfs_levels(cand, &mut visited);
            if e2 <= ecc {
                break;
            }
            start = cand;
            last = l2;
            ecc = e2;
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        let mut nbrs = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(a.row(v).map(|(w, _)| w).filter(|&w| !visited[w]));
            nbrs.sort_by_key(|&w| (degree[w], w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}
