//! Dense linear algebra for matrices of size at most 4.

use crate::geom_core::scalar::Scalar;

pub type M4 = [[f64; 4]; 4];

pub const ZERO: M4 = [[0.0; 4]; 4];

pub fn identity(n: usize) -> M4 {
    let mut a = ZERO;
    for (i, row) in a.iter_mut().enumerate().take(n) {
        row[i] = 1.0;
    }
    a
}

pub fn from_rows(rows: &[Vec<f64>]) -> M4 {
    let mut a = ZERO;
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            a[i][j] = *v;
        }
    }
    a
}

pub fn to_rows(a: &M4, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| a[i][..n].to_vec()).collect()
}

pub fn mat_mul(a: &M4, b: &M4, n: usize) -> M4 {
    let mut c = ZERO;
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[i][k] * b[k][j];
            }
            c[i][j] = s;
        }
    }
    c
}

pub fn transpose(a: &M4, n: usize) -> M4 {
    let mut t = ZERO;
    for i in 0..n {
        for j in 0..n {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn mat_vec(a: &M4, v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| a[i][j] * v[j]).sum()).collect()
}

/// `u^T A v`.
pub fn quad(a: &M4, u: &[f64], v: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += u[i] * a[i][j] * v[j];
        }
    }
    s
}

pub fn max_asymmetry(a: &M4, n: usize) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            m = m.max((a[i][j] - a[j][i]).abs());
        }
    }
    m
}

pub fn symmetrize(a: &M4, n: usize) -> M4 {
    let mut s = *a;
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[i][j] + a[j][i]);
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    s
}

/// Lower Cholesky factor, or `None` when `a` is not positive definite.
pub fn cholesky(a: &M4, n: usize) -> Option<M4> {
    let mut l = ZERO;
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / d;
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &M4, n: usize) -> M4 {
    let mut inv = ZERO;
    for j in 0..n {
        inv[j][j] = 1.0 / l[j][j];
        for i in j + 1..n {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i][k] * inv[k][j];
            }
            inv[i][j] = s / l[i][i];
        }
    }
    inv
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &M4, n: usize) -> Option<M4> {
    let mut m = *a;
    let mut inv = identity(n);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c] == 0.0 || !m[p][c].is_finite() {
            return None;
        }
        m.swap(c, p);
        inv.swap(c, p);
        let d = 1.0 / m[c][c];
        for j in 0..n {
            m[c][j] *= d;
            inv[c][j] *= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for j in 0..n {
                        m[r][j] -= f * m[c][j];
                        inv[r][j] -= f * inv[c][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

pub fn det(a: &M4, n: usize) -> f64 {
    let mut m = *a;
    let mut d = 1.0;
    for c in 0..n {
        let p = match (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())) {
            Some(p) => p,
            None => return 0.0,
        };
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(c, p);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    d
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns.
pub fn sym_eigen(a: &M4, n: usize) -> ([f64; 4], M4) {
    let mut m = symmetrize(a, n);
    let mut v = identity(n);
    for _sweep in 0..64 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += m[i][i] * m[i][i];
            for j in 0..i {
                off += m[i][j] * m[i][j];
            }
        }
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let mut vals = [0.0; 4];
    let mut vecs = ZERO;
    for (new, &old) in order.iter().enumerate() {
        vals[new] = m[old][old];
        for k in 0..n {
            vecs[k][new] = v[k][old];
        }
    }
    (vals, vecs)
}

/// Eigenvalues of the pencil `(form, g)` with `g` positive definite, via the
/// congruence `L⁻¹ form L⁻ᵀ` where `g = L Lᵀ`. Ascending order.
pub fn generalized_eigenvalues(form: &M4, g: &M4, n: usize) -> Option<[f64; 4]> {
    let l = cholesky(g, n)?;
    let li = lower_inverse(&l, n);
    let c = mat_mul(&mat_mul(&li, form, n), &transpose(&li, n), n);
    Some(sym_eigen(&c, n).0)
}

/// Generic-scalar matrix inverse (Gauss-Jordan, pivoting on values).
pub fn inverse_t<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| T::from_f64(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].value().abs().total_cmp(&m[j][c].value().abs()))?;
        if m[p][c].value() == 0.0 {
            return None;
        }
        m.swap(c, p);
        inv.swap(c, p);
        let d = m[c][c].recip();
        for j in 0..n {
            m[c][j] = m[c][j] * d;
            inv[c][j] = inv[c][j] * d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                for j in 0..n {
                    m[r][j] = m[r][j] - f * m[c][j];
                    inv[r][j] = inv[r][j] - f * inv[c][j];
                }
            }
        }
    }
    Some(inv)
}
