//! Fixed-size dense linear algebra for the 8-dimensional feature space.
//!
//! Everything here works on stack arrays; the only non-trivial routine is the
//! cyclic Jacobi eigensolver used for ranks and the pseudo-inverse of `C`.

use crate::NUM_FEATURES;

pub type Vector = [f64; NUM_FEATURES];
pub type Matrix = [[f64; NUM_FEATURES]; NUM_FEATURES];

const N: usize = NUM_FEATURES;

pub const ZERO_VECTOR: Vector = [0.0; N];
pub const ZERO_MATRIX: Matrix = [[0.0; N]; N];

pub fn identity() -> Matrix {
    let mut m = ZERO_MATRIX;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

#[inline]
pub fn dot(a: &Vector, b: &Vector) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &Vector) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn add(a: &Vector, b: &Vector) -> Vector {
    core::array::from_fn(|i| a[i] + b[i])
}

#[inline]
pub fn sub(a: &Vector, b: &Vector) -> Vector {
    core::array::from_fn(|i| a[i] - b[i])
}

#[inline]
pub fn scale(k: f64, a: &Vector) -> Vector {
    core::array::from_fn(|i| k * a[i])
}

/// `y + k * x`
#[inline]
pub fn axpy(k: f64, x: &Vector, y: &Vector) -> Vector {
    core::array::from_fn(|i| y[i] + k * x[i])
}

pub fn max_abs(a: &Vector) -> f64 {
    a.iter().fold(0.0, |m, x| {
        let x = libm::fabs(*x);
        // propagate NaN so the divergence guard sees it
        if x.is_nan() || x > m {
            x
        } else {
            m
        }
    })
}

pub fn mat_vec(m: &Matrix, v: &Vector) -> Vector {
    core::array::from_fn(|i| dot(&m[i], v))
}

/// `mᵀ v`
pub fn mat_t_vec(m: &Matrix, v: &Vector) -> Vector {
    let mut out = ZERO_VECTOR;
    for (row, vi) in m.iter().zip(v) {
        for (o, r) in out.iter_mut().zip(row) {
            *o += r * vi;
        }
    }
    out
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = ZERO_MATRIX;
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..N {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn transpose(m: &Matrix) -> Matrix {
    core::array::from_fn(|i| core::array::from_fn(|j| m[j][i]))
}

/// `a bᵀ`
pub fn outer(a: &Vector, b: &Vector) -> Matrix {
    core::array::from_fn(|i| core::array::from_fn(|j| a[i] * b[j]))
}

pub fn mat_add_scaled(acc: &mut Matrix, k: f64, m: &Matrix) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (x, y) in ra.iter_mut().zip(rm) {
            *x += k * y;
        }
    }
}

pub fn mat_scale(k: f64, m: &Matrix) -> Matrix {
    core::array::from_fn(|i| core::array::from_fn(|j| k * m[i][j]))
}

pub fn frobenius(m: &Matrix) -> f64 {
    libm::sqrt(m.iter().flatten().map(|x| x * x).sum())
}

/// Eigen-decomposition of a symmetric matrix.
///
/// `vectors[k]` is the unit eigenvector for `values[k]`; values are sorted
/// ascending.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vector,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// Cyclic Jacobi rotations. Only the upper triangle of `m` is trusted to
    /// be symmetric with the lower one; callers pass exactly symmetric input.
    pub fn new(m: &Matrix) -> Self {
        let mut a = *m;
        // columns of v accumulate the rotations
        let mut v = identity();
        let scale = frobenius(&a).max(f64::MIN_POSITIVE);

        for _sweep in 0..100 {
            let off: f64 = (0..N)
                .flat_map(|i| (i + 1..N).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if libm::sqrt(off) <= 1e-17 * scale {
                break;
            }
            for p in 0..N {
                for q in p + 1..N {
                    let apq = a[p][q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                    let t = libm::copysign(1.0, theta)
                        / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..N {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..N {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for row in v.iter_mut() {
                        let vkp = row[p];
                        let vkq = row[q];
                        row[p] = c * vkp - s * vkq;
                        row[q] = s * vkp + c * vkq;
                    }
                }
            }
        }

        let mut order: [usize; N] = core::array::from_fn(|i| i);
        order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
        let values = core::array::from_fn(|k| a[order[k]][order[k]]);
        let vectors = core::array::from_fn(|k| core::array::from_fn(|i| v[i][order[k]]));
        SymmetricEigen { values, vectors }
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, x| m.max(libm::fabs(*x)))
    }

    /// Number of eigenvalues whose magnitude exceeds `rel_cutoff` times the
    /// largest magnitude.
    pub fn rank(&self, rel_cutoff: f64) -> usize {
        let cut = rel_cutoff * self.max_abs_value();
        self.values.iter().filter(|x| libm::fabs(**x) > cut).count()
    }

    /// Moore-Penrose pseudo-inverse, dropping eigenvalues below
    /// `rel_cutoff` times the largest magnitude.
    pub fn pseudo_inverse(&self, rel_cutoff: f64) -> Matrix {
        let cut = rel_cutoff * self.max_abs_value();
        let mut out = ZERO_MATRIX;
        for (lambda, u) in self.values.iter().zip(&self.vectors) {
            if libm::fabs(*lambda) > cut {
                mat_add_scaled(&mut out, 1.0 / lambda, &outer(u, u));
            }
        }
        out
    }
}

/// Numerical rank of an arbitrary square matrix from the spectrum of `mᵀm`.
pub fn rank(m: &Matrix, rel_cutoff: f64) -> usize {
    SymmetricEigen::new(&mat_mul(&transpose(m), m)).rank(rel_cutoff)
}
