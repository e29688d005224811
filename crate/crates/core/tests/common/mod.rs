#![allow(dead_code)]

use lsrank::{analyze, laplacian, RankingProblem};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

/// Laplacian eigenvalues in ascending order, from a dense symmetric eigensolver.
pub fn laplacian_spectrum(problem: &RankingProblem) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(laplacian(problem))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Moore-Penrose inverse of a symmetric matrix from its eigendecomposition.
pub fn eigen_pseudoinverse(matrix: &DMatrix<f64>) -> DMatrix<f64> {
    let n = matrix.nrows();
    let eig = SymmetricEigen::new(matrix.clone());
    let cutoff = 1e-9 * eig.eigenvalues.amax().max(1.0);
    let mut pinv = DMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = eig.eigenvalues[k];
        if lambda.abs() > cutoff {
            let u = eig.eigenvectors.column(k);
            pinv += (u * u.transpose()) / lambda;
        }
    }
    pinv
}

/// Dense Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn gaussian_solve(matrix: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let n = matrix.nrows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| matrix[(i, j)]).collect())
        .collect();
    let mut b: Vec<f64> = rhs.iter().copied().collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    DVector::from_vec(x)
}

pub fn scores_of(problem: &RankingProblem) -> DVector<f64> {
    let a = problem.results();
    DVector::from_fn(problem.len(), |i, _| {
        (0..problem.len()).map(|j| a[(i, j)]).sum()
    })
}

/// Random connected problem whose graph is not regular bipartite.
pub fn connected_not_regular_bipartite<R: Rng>(
    rng: &mut R,
    n_range: std::ops::RangeInclusive<usize>,
    max_weight: u32,
) -> RankingProblem {
    loop {
        let n = rng.gen_range(n_range.clone());
        let p = lsrank::fixtures::random_connected(rng, n, max_weight, 0.4);
        if !analyze(&p).is_regular_bipartite {
            return p;
        }
    }
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
