//! Small complex dense-matrix helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-9;

/// i.i.d. CN(0, 1) entries, filled column by column.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(r, c)] = Complex64::new(re * scale, im * scale);
        }
    }
    m
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `RANK_TOL * scale` (default scale: the largest one).
pub fn rank_with_scale(m: &CMatrix, scale: Option<f64>) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else {
        return 0;
    };
    let cut = RANK_TOL * scale.unwrap_or(top);
    s.iter().filter(|&&v| v > cut).count()
}

pub fn rank(m: &CMatrix) -> usize {
    rank_with_scale(m, None)
}

/// Thin SVD with singular values sorted descending: `(U, sigma)`.
fn sorted_left_svd(m: &CMatrix) -> (CMatrix, Vec<f64>) {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = CMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    (u_sorted, sigma)
}

/// Orthonormal basis (as columns) of the null space of `m`: the orthogonal
/// complement of the row space.
pub fn null_space(m: &CMatrix) -> CMatrix {
    complement_basis(&range_basis(&m.adjoint()), m.ncols())
}

/// Orthonormal basis of the column span of `m`, dropping directions below the rank tolerance.
pub fn range_basis(m: &CMatrix) -> CMatrix {
    range_basis_with_scale(m, None)
}

/// As [`range_basis`], with the tolerance taken relative to `scale` instead of
/// the largest singular value of `m`, so numerically zero columns span nothing.
pub fn range_basis_with_scale(m: &CMatrix, scale: Option<f64>) -> CMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let (u, sigma) = sorted_left_svd(m);
    let top = scale.unwrap_or_else(|| sigma.first().copied().unwrap_or(0.0));
    let r = sigma.iter().filter(|&&s| s > RANK_TOL * top).count();
    u.columns(0, r).into_owned()
}

/// Extends orthonormal columns `b` (in dimension `dim`) to a basis of the whole
/// space and returns only the added columns. Greedy Gram-Schmidt over the
/// standard basis, orthogonalizing twice.
pub fn complement_basis(b: &CMatrix, dim: usize) -> CMatrix {
    let mut basis: Vec<nalgebra::DVector<Complex64>> =
        b.column_iter().map(|c| c.into_owned()).collect();
    let start = basis.len();
    let mut remaining: Vec<usize> = (0..dim).collect();
    while basis.len() < dim {
        let mut best: Option<(usize, f64, nalgebra::DVector<Complex64>)> = None;
        for (slot, &e) in remaining.iter().enumerate() {
            let mut v = nalgebra::DVector::<Complex64>::zeros(dim);
            v[e] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for q in &basis {
                    let proj = q.dotc(&v);
                    v -= q * proj;
                }
            }
            let n = v.norm();
            if best.as_ref().is_none_or(|(_, bn, _)| n > *bn) {
                best = Some((slot, n, v));
            }
        }
        let (slot, n, v) = best.expect("space not yet spanned");
        remaining.remove(slot);
        basis.push(v / Complex64::new(n, 0.0));
    }
    let added = &basis[start..];
    CMatrix::from_fn(dim, added.len(), |r, c| added[c][r])
}

/// The `k` leading left singular vectors of `m`, with the singular values.
pub fn leading_left_singular(m: &CMatrix, k: usize) -> (CMatrix, Vec<f64>) {
    let (u, sigma) = sorted_left_svd(m);
    (u.columns(0, k.min(u.ncols())).into_owned(), sigma)
}

/// Orthonormalizes the columns of `m` (thin QR).
pub fn orthonormalize(m: &CMatrix) -> CMatrix {
    if m.ncols() == 0 {
        return m.clone();
    }
    m.clone().qr().q()
}

/// Scales each column to unit Euclidean norm.
pub fn normalize_columns(m: &mut CMatrix) {
    for mut col in m.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= Complex64::new(n, 0.0);
        }
    }
}

/// Horizontal concatenation; all blocks must share the row count.
pub fn hstack(rows: usize, blocks: &[&CMatrix]) -> CMatrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// `log2 det(I + rho * A A^H)` via singular values.
pub fn log2_det_gram(a: &CMatrix, rho: f64) -> f64 {
    singular_values(a)
        .iter()
        .map(|s| (rho * s * s).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}
