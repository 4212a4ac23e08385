//! Dense complex linear algebra shared by the algebraic kernels.
//!
//! Everything is stored as `Complex64`; real problems are detected and
//! solved in real arithmetic so that nullspace bases of real systems come
//! back real.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Singular values below this (relative to max(1, largest)) count as zero.
pub const RANK_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_real(m: &CMatrix, tol: f64) -> bool {
    m.iter().all(|z| z.im.abs() <= tol)
}

pub fn is_real_vec(v: &CVector, tol: f64) -> bool {
    v.iter().all(|z| z.im.abs() <= tol)
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(re)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-major vectorisation.
pub fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Realification of a complex matrix: `x + iy` acting on `R^{2n}` as
/// `[[Re, -Im], [Im, Re]]`.
pub fn realify(m: &CMatrix) -> CMatrix {
    let (r, c) = m.shape();
    let mut out = CMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            out[(i, j)] = re(z.re);
            out[(i, j + c)] = re(-z.im);
            out[(i + r, j)] = re(z.im);
            out[(i + r, j + c)] = re(z.re);
        }
    }
    out
}

fn pad_square<T: ComplexField>(a: DMatrix<T>) -> DMatrix<T> {
    let (r, c) = a.shape();
    if r >= c {
        return a;
    }
    let mut p = DMatrix::zeros(c, c);
    p.view_mut((0, 0), (r, c)).copy_from(&a);
    p
}

fn null_vectors<T: ComplexField<RealField = f64>>(a: DMatrix<T>, tol: f64) -> Vec<DVector<T>> {
    let a = pad_square(a);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let thr = tol * smax.max(1.0);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= thr)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect()
}

/// Basis of `{x : a x = 0}` in reduced row-echelon form, so that the
/// result depends only on the subspace and not on the SVD internals.
pub fn nullspace(a: &CMatrix, tol: f64) -> Vec<CVector> {
    if a.ncols() == 0 {
        return Vec::new();
    }
    if a.nrows() == 0 {
        return (0..a.ncols())
            .map(|i| CVector::from_fn(a.ncols(), |j, _| if i == j { ONE } else { ZERO }))
            .collect();
    }
    let raw: Vec<CVector> = if is_real(a, 0.0) {
        null_vectors(real_part(a), tol)
            .into_iter()
            .map(|v| v.map(re))
            .collect()
    } else {
        null_vectors(a.clone(), tol)
    };
    rref_basis(&raw)
}

/// Nullspace of the stacked system `[A_1; A_2; ...]` through its Gram
/// matrix `Σ A_iᴴ A_i`. Only suitable for well-scaled systems whose nonzero
/// singular values are of order one, where squaring them costs nothing.
pub fn stacked_nullspace(blocks: &[CMatrix], tol: f64) -> Vec<CVector> {
    let Some(first) = blocks.first() else {
        return Vec::new();
    };
    let cols = first.ncols();
    let mut gram = CMatrix::zeros(cols, cols);
    for b in blocks {
        gram += b.adjoint() * b;
    }
    nullspace(&gram, tol)
}

/// Reduced row-echelon form of the span of `vectors` (treated as rows).
pub fn rref_basis(vectors: &[CVector]) -> Vec<CVector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let cols = vectors[0].len();
    let mut rows: Vec<CVector> = vectors.to_vec();
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == rows.len() {
            break;
        }
        let (best, best_abs) = (pivot_row..rows.len())
            .map(|r| (r, rows[r][col].norm()))
            .fold((pivot_row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs < 1e-10 {
            continue;
        }
        rows.swap(pivot_row, best);
        let p = rows[pivot_row][col];
        rows[pivot_row] /= p;
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row {
                let f = row[col];
                if f != ZERO {
                    row.axpy(-f, &pivot, ONE);
                }
            }
        }
        pivot_row += 1;
    }
    rows.truncate(pivot_row);
    for row in rows.iter_mut() {
        for z in row.iter_mut() {
            *z = clean(*z);
        }
    }
    rows
}

/// Snap round-off noise to zero.
pub fn clean(z: C64) -> C64 {
    let f = |x: f64| if x.abs() < 1e-13 { 0.0 } else { x };
    C64::new(f(z.re), f(z.im))
}

pub fn clean_matrix(m: &CMatrix) -> CMatrix {
    m.map(clean)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = if is_real(a, 0.0) {
        real_part(a).singular_values().iter().cloned().collect()
    } else {
        a.clone().singular_values().iter().cloned().collect()
    };
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn rank(a: &CMatrix, tol: f64) -> usize {
    let s = singular_values(a);
    let thr = tol * s.first().cloned().unwrap_or(0.0).max(1.0);
    s.iter().filter(|x| **x > thr).count()
}

/// Ratio of smallest to largest singular value of a square matrix.
pub fn inverse_condition(a: &CMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Least-squares projector onto the column span of a fixed matrix.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    columns: CMatrix,
    pinv: CMatrix,
}

impl LeastSquares {
    pub fn new(columns: CMatrix) -> Self {
        let pinv = if columns.ncols() == 0 {
            CMatrix::zeros(0, columns.nrows())
        } else {
            columns
                .clone()
                .pseudo_inverse(1e-12)
                .expect("pseudo-inverse with non-negative eps")
        };
        LeastSquares { columns, pinv }
    }

    pub fn columns(&self) -> &CMatrix {
        &self.columns
    }

    /// Returns the minimising coefficients and the residual norm `|G c - b|`.
    pub fn solve(&self, b: &CVector) -> (CVector, f64) {
        let c = &self.pinv * b;
        let r = if self.columns.ncols() == 0 {
            b.norm()
        } else {
            (&self.columns * &c - b).norm()
        };
        (c, r)
    }
}

/// Orthonormal basis (as columns) of the span of the given columns.
pub fn orthonormal_columns(g: &CMatrix, tol: f64) -> CMatrix {
    if g.ncols() == 0 {
        return CMatrix::zeros(g.nrows(), 0);
    }
    let svd = g.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > tol * smax.max(1.0))
        .map(|(i, _)| i)
        .collect();
    CMatrix::from_fn(g.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Row-major `[re, im]` nesting used in JSON reports.
pub fn to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re + 0.0, m[(r, c)].im + 0.0]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Option<CMatrix> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return None;
    }
    Some(CMatrix::from_fn(nr, nc, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

/// Serde adapter for `CMatrix` fields.
pub mod matrix_serde {
    use super::{from_rows, to_rows, CMatrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix"))
    }
}

pub mod matrix_vec_serde {
    use super::{from_rows, to_rows, CMatrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        let all = Vec::<Vec<Vec<[f64; 2]>>>::deserialize(d)?;
        all.iter()
            .map(|rows| from_rows(rows).ok_or_else(|| serde::de::Error::custom("ragged matrix")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_rank_one_real_matrix_is_real_rref() {
        let a = CMatrix::from_row_slice(1, 3, &[re(1.0), re(2.0), re(3.0)]);
        let ns = nullspace(&a, RANK_TOL);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(is_real_vec(v, 0.0));
            assert!((&a * v).norm() < 1e-12);
        }
        // RREF: pivots are unit entries in the first two coordinates.
        assert!((ns[0][0] - ONE).norm() < 1e-12 && ns[0][1].norm() < 1e-12);
        assert!((ns[1][1] - ONE).norm() < 1e-12 && ns[1][0].norm() < 1e-12);
    }

    #[test]
    fn wide_and_empty_systems() {
        let a = CMatrix::zeros(0, 2);
        assert_eq!(nullspace(&a, RANK_TOL).len(), 2);
        let a = CMatrix::from_row_slice(1, 2, &[I, ONE]);
        let ns = nullspace(&a, RANK_TOL);
        assert_eq!(ns.len(), 1);
        assert!((&a * &ns[0]).norm() < 1e-12);
    }

    #[test]
    fn least_squares_residual_is_distance_to_span() {
        let g = CMatrix::from_row_slice(3, 1, &[ONE, ZERO, ZERO]);
        let ls = LeastSquares::new(g);
        let b = CVector::from_vec(vec![re(2.0), re(3.0), re(4.0)]);
        let (c, r) = ls.solve(&b);
        assert!((c[0] - re(2.0)).norm() < 1e-12);
        assert!((r - 5.0).abs() < 1e-12);
    }

    #[test]
    fn realify_preserves_products() {
        let a = CMatrix::from_row_slice(2, 2, &[I, ONE, ZERO, re(2.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[ONE, I, re(3.0), -I]);
        let lhs = realify(&(&a * &b));
        let rhs = realify(&a) * realify(&b);
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }
}
