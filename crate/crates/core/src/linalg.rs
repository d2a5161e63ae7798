//! Small dense symmetric eigen-solver (cyclic Jacobi) used for the 4×4
//! quaternion problem and for singular values of 3×n matrices.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<const N: usize> {
    pub values: SVector<f64, N>,
    /// Column `k` is the unit eigenvector of `values[k]`.
    pub vectors: SMatrix<f64, N, N>,
}

impl<const N: usize> SymmetricEigen<N> {
    /// Cyclic Jacobi sweeps until the off-diagonal mass is negligible.
    /// Only the upper triangle of `m` is trusted.
    pub fn new(m: &SMatrix<f64, N, N>) -> Self {
        let mut a = *m;
        for i in 0..N {
            for j in 0..i {
                a[(i, j)] = a[(j, i)];
            }
        }
        let mut v = SMatrix::<f64, N, N>::identity();
        let scale = a.norm().max(f64::MIN_POSITIVE);

        for _sweep in 0..64 {
            let mut off = 0.0;
            for p in 0..N {
                for q in (p + 1)..N {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() <= 1e-17 * scale {
                break;
            }
            for p in 0..N {
                for q in (p + 1)..N {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..N {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..N {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..N {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }

        let mut order: [usize; N] = std::array::from_fn(|i| i);
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let values = SVector::<f64, N>::from_fn(|k, _| a[(order[k], order[k])]);
        let vectors = SMatrix::<f64, N, N>::from_fn(|r, k| v[(r, order[k])]);
        Self { values, vectors }
    }

    pub fn min_vector(&self) -> SVector<f64, N> {
        self.vectors.column(0).into_owned()
    }
}

/// Squared singular values of a 3×n matrix given its Gram matrix `A Aᵀ`,
/// sorted descending (`σ1² ≥ σ2² ≥ σ3²`). Tiny negative round-off is clamped.
pub fn squared_singular_values(gram: &Matrix3<f64>) -> Vector3<f64> {
    let e = SymmetricEigen::<3>::new(gram);
    Vector3::new(
        e.values[2].max(0.0),
        e.values[1].max(0.0),
        e.values[0].max(0.0),
    )
}
