//! Sparse direct solves with a fixed sparsity pattern.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::Mat;
use nalgebra::DVector;

use crate::error::{Error, Result};

/// Required relative residual of every linear solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Square sparsity pattern given as a list of entries (duplicates are
/// summed), with its symbolic LU factorization.
#[derive(Debug)]
pub struct SparsePattern {
    n: usize,
    entries: Vec<(usize, usize)>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: SymbolicLu<usize>,
}

impl SparsePattern {
    pub fn new(n: usize, entries: Vec<(usize, usize)>) -> Result<Self> {
        let pairs: Vec<_> = entries.iter().map(|&(row, col)| Pair { row, col }).collect();
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
            .map_err(|e| Error::LinearSolveFailure(format!("{e:?}")))?;
        let lu = SymbolicLu::try_new(symbolic.as_ref()).map_err(|e| Error::LinearSolveFailure(format!("{e:?}")))?;
        Ok(Self { n, entries, symbolic, argsort, lu })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }

    /// `values`-weighted matrix times `x`.
    pub fn apply(&self, values: &[f64], x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for (&(r, c), v) in self.entries.iter().zip(values) {
            y[r] += v * x[c];
        }
        y
    }

    /// LU factorization of the matrix with the given entry values.
    pub fn factorize(&self, values: &[f64]) -> Result<Factorization> {
        assert_eq!(values.len(), self.entries.len(), "one value per pattern entry");
        let mat = SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, values)
            .map_err(|e| Error::LinearSolveFailure(format!("{e:?}")))?;
        let lu = Lu::try_new_with_symbolic(self.lu.clone(), mat.as_ref())
            .map_err(|e| Error::LinearSolveFailure(format!("{e:?}")))?;
        Ok(Factorization { values: values.to_vec(), lu })
    }
}

/// Numeric factorization of a pattern with fixed values.
pub struct Factorization {
    values: Vec<f64>,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("entries", &self.values.len()).finish()
    }
}

impl Factorization {
    fn raw_solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.lu.solve_in_place(x.as_mut());
        DVector::from_fn(rhs.len(), |i, _| x[(i, 0)])
    }

    /// Solves with a few steps of iterative refinement when needed and
    /// checks the relative residual. `pattern` must be the one factorized.
    pub fn solve(&self, pattern: &SparsePattern, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.refine(pattern, &self.values, rhs, 3).ok_or_else(|| {
            let x = self.raw_solve(rhs);
            let r = rhs - pattern.apply(&self.values, &x);
            Error::LinearSolveFailure(format!("relative residual {:e}", r.norm() / rhs.norm().max(f64::MIN_POSITIVE)))
        })
    }

    /// Solves the matrix `(pattern, values)`, which may differ from the
    /// factorized one, by iterative refinement preconditioned with this
    /// factorization. Returns `None` unless the relative residual reaches
    /// [`RESIDUAL_TOLERANCE`] within `max_iter` corrections.
    pub fn refine(
        &self,
        pattern: &SparsePattern,
        values: &[f64],
        rhs: &DVector<f64>,
        max_iter: usize,
    ) -> Option<DVector<f64>> {
        let scale = rhs.norm();
        let mut x = self.raw_solve(rhs);
        for iter in 0..=max_iter {
            if !x.iter().all(|v| v.is_finite()) {
                return None;
            }
            let r = rhs - pattern.apply(values, &x);
            let rel = if scale > 0.0 { r.norm() / scale } else { r.norm() };
            if rel <= RESIDUAL_TOLERANCE {
                return Some(x);
            }
            if iter < max_iter {
                x += self.raw_solve(&r);
            }
        }
        None
    }
}

/// One-off solve of the matrix `(pattern, values)`.
pub fn solve_linear(pattern: &SparsePattern, values: &[f64], rhs: &DVector<f64>) -> Result<DVector<f64>> {
    pattern.factorize(values)?.solve(pattern, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let n = 5;
        let p = SparsePattern::new(n, (0..n).map(|i| (i, i)).collect()).unwrap();
        let b = DVector::from_fn(n, |i, _| i as f64 - 1.5);
        let x = solve_linear(&p, &vec![1.0; n], &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn duplicates_are_summed_and_saddle_solves() {
        // [[2, 1], [1, 0]] with the (0, 0) entry split in two.
        let p = SparsePattern::new(2, vec![(0, 0), (0, 0), (0, 1), (1, 0)]).unwrap();
        let x = solve_linear(&p, &[1.0, 1.0, 1.0, 1.0], &DVector::from_vec(vec![3.0, 1.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_fails() {
        let p = SparsePattern::new(2, vec![(0, 0), (1, 0)]).unwrap();
        let r = solve_linear(&p, &[1.0, 1.0], &DVector::from_vec(vec![1.0, 2.0]));
        assert!(matches!(r, Err(Error::LinearSolveFailure(_))));
    }
}
