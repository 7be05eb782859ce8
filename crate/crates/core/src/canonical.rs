//! Canonical decomposition `U = e^{i phi} (U_A ⊗ U_B) U_d(alpha) (V_A ⊗ V_B)` with
//! `U_d(alpha) = exp(i sum_j alpha_j sigma_j ⊗ sigma_j)`.
//!
//! The decomposition works in the magic frame, where local gates become real
//! orthogonal matrices and `U_d` is diagonal. The complex symmetric unitary
//! `m = ũ^T ũ` is diagonalized by a real orthogonal basis obtained from its
//! commuting real and imaginary parts; the half-phases of its eigenvalues are
//! the eigenphases of `U_d`. A final set of local moves brings the coordinates
//! into the chamber `pi/4 >= a1 >= a2 >= |a3| >= 0`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qubit_algebra::{
    check_unitary, distance_up_to_phase, identity2, normalize_special, paulis, tensor_product,
    MagicFrame, Mat2, Mat4, ONE, ZERO,
};

/// Unitarity tolerance for matrices passed to [`decompose`].
pub const DECOMPOSE_UNITARITY_TOL: f64 = 1e-10;
/// Maximum reconstruction distance accepted from [`decompose`].
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Eigenvalues of Re(m) closer than this are treated as one cluster.
pub const CLUSTER_TOL: f64 = 1e-10;
/// Slack used when testing chamber membership.
pub const CHAMBER_TOL: f64 = 1e-9;
/// Largest rank-one residual accepted by [`nearest_kronecker_factor`].
pub const PRODUCT_RESIDUAL_TOL: f64 = 1e-6;

/// Nonlocal coordinates `(alpha_1, alpha_2, alpha_3)` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylCoordinates {
    pub alpha: [f64; 3],
}

impl WeylCoordinates {
    pub const fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self {
            alpha: [a1, a2, a3],
        }
    }

    pub const IDENTITY: Self = Self::new(0.0, 0.0, 0.0);
    pub const CNOT: Self = Self::new(FRAC_PI_4, 0.0, 0.0);
    pub const ISWAP: Self = Self::new(FRAC_PI_4, FRAC_PI_4, 0.0);
    pub const SWAP: Self = Self::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4);

    /// `pi/4 >= a1 >= a2 >= |a3| >= 0`, each comparison with slack `tol`.
    pub fn in_chamber(&self, tol: f64) -> bool {
        let [a1, a2, a3] = self.alpha;
        a1 <= FRAC_PI_4 + tol && a1 + tol >= a2 && a2 + tol >= a3.abs() && a2 >= -tol
    }

    /// Same point with the third coordinate replaced by its absolute value.
    pub fn with_abs_third(&self) -> Self {
        let [a1, a2, a3] = self.alpha;
        Self::new(a1, a2, a3.abs())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.alpha
            .iter()
            .zip(other.alpha.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Phases of `U_d` on the magic basis states, `U_d |Phi_k> = e^{i lambda_k} |Phi_k>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPhases {
    pub lambda: [f64; 4],
}

pub fn eigen_phases(w: &WeylCoordinates) -> EigenPhases {
    let [a1, a2, a3] = w.alpha;
    let l1 = -a1 + a2 + a3;
    let l2 = a1 - a2 + a3;
    let l3 = a1 + a2 - a3;
    // written as the negated sum so the four add to zero in floating point too
    let l4 = -(l1 + l2 + l3);
    EigenPhases {
        lambda: [l1, l2, l3, l4],
    }
}

/// Inverse of [`eigen_phases`] for phases summing to zero.
pub fn weyl_from_phases(p: &EigenPhases) -> WeylCoordinates {
    let [l1, l2, l3, _] = p.lambda;
    WeylCoordinates::new((l2 + l3) / 2.0, (l1 + l3) / 2.0, (l1 + l2) / 2.0)
}

/// `exp(i sum_j alpha_j sigma_j ⊗ sigma_j)`, built as `Q diag(e^{i lambda}) Q^dag`.
pub fn canonical_gate(w: &WeylCoordinates) -> Mat4 {
    let phases = eigen_phases(w)
        .lambda
        .map(|l| Complex64::from_polar(1.0, l));
    let d = Mat4::from_diagonal(&Vector4::from(phases));
    MagicFrame::new().out_of_frame(&d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalDecomposition {
    pub weyl: WeylCoordinates,
    /// `(V_A, V_B)`, applied before the canonical gate.
    pub pre_local: (Mat2, Mat2),
    /// `(U_A, U_B)`, applied after the canonical gate.
    pub post_local: (Mat2, Mat2),
    pub global_phase: f64,
}

impl CanonicalDecomposition {
    pub fn eigen_phases(&self) -> EigenPhases {
        eigen_phases(&self.weyl)
    }
}

pub fn reconstruct(d: &CanonicalDecomposition) -> Mat4 {
    let post = tensor_product(&d.post_local.0, &d.post_local.1);
    let pre = tensor_product(&d.pre_local.0, &d.pre_local.1);
    post * canonical_gate(&d.weyl) * pre * Complex64::from_polar(1.0, d.global_phase)
}

/// Best rank-one factorization `m ≈ a ⊗ b` of a matrix known to be a product of
/// single-qubit unitaries.
///
/// `a` is scaled to Frobenius norm sqrt(2) and its first entry of magnitude
/// above 1e-8 (row-major) is made real and non-negative.
pub fn nearest_kronecker_factor(m: &Mat4) -> Result<(Mat2, Mat2)> {
    // rearranged so that a ⊗ b becomes the outer product vec(a) vec(b)^T
    let r = Mat4::from_fn(|row, col| {
        let (i, j) = (row / 2, row % 2);
        let (k, l) = (col / 2, col % 2);
        m[(2 * i + k, 2 * j + l)]
    });
    let (x, y) = rank_one_fit(&r);
    let residual = (r - x * y.transpose()).norm();
    if residual.is_nan() || residual > PRODUCT_RESIDUAL_TOL {
        return Err(Error::NotAProduct { residual });
    }
    let scale = std::f64::consts::SQRT_2 / x.norm();
    let mut a = Mat2::from_fn(|i, j| x[2 * i + j] * scale);
    let mut b = Mat2::from_fn(|k, l| y[2 * k + l] / scale);
    if let Some(p) = a.iter_row_major().find(|z| z.norm() > 1e-8) {
        let unit = p / p.norm();
        a *= unit.conj();
        b *= unit;
    }
    Ok((a, b))
}

trait RowMajor {
    fn iter_row_major(&self) -> std::vec::IntoIter<Complex64>;
}

impl RowMajor for Mat2 {
    fn iter_row_major(&self) -> std::vec::IntoIter<Complex64> {
        vec![self[(0, 0)], self[(0, 1)], self[(1, 0)], self[(1, 1)]].into_iter()
    }
}

/// Rank-one approximation `r ≈ x y^T` by alternating least squares, started
/// from the column of largest norm. Exact after one sweep for rank-one input;
/// a few more sweeps settle near-rank-one input onto the dominant singular pair.
fn rank_one_fit(r: &Mat4) -> (Vector4<Complex64>, Vector4<Complex64>) {
    let pivot = (0..4)
        .max_by(|&i, &j| {
            r.column(i)
                .norm_squared()
                .total_cmp(&r.column(j).norm_squared())
        })
        .unwrap_or(0);
    let mut x: Vector4<Complex64> = r.column(pivot).into_owned();
    let mut y = Vector4::zeros();
    for _ in 0..8 {
        let nx = x.norm_squared();
        if nx == 0.0 {
            break;
        }
        // y^T = x^dag r / |x|^2
        y = (x.adjoint() * r).transpose() / Complex64::new(nx, 0.0);
        let ny = y.norm_squared();
        if ny == 0.0 {
            break;
        }
        x = r * y.conjugate() / Complex64::new(ny, 0.0);
    }
    (x, y)
}

/// Real symmetric eigendecomposition with eigenpairs sorted by ascending eigenvalue.
fn sorted_eigh(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

/// Orthogonal basis diagonalizing `a`, refined inside each degenerate cluster
/// by diagonalizing the restriction of `b`.
fn two_stage_basis(a: &Matrix4<f64>, b: &Matrix4<f64>) -> Matrix4<f64> {
    let a = DMatrix::from_fn(4, 4, |r, c| a[(r, c)]);
    let b = DMatrix::from_fn(4, 4, |r, c| b[(r, c)]);
    let (values, vectors) = sorted_eigh(&a);
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut out = vectors.clone();
    let mut start = 0;
    while start < 4 {
        let mut end = start + 1;
        while end < 4 && (values[end] - values[end - 1]).abs() <= CLUSTER_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let restricted = block.transpose() * &b * &block;
            let restricted = (&restricted + restricted.transpose()) * 0.5;
            let (_, w) = sorted_eigh(&restricted);
            let refined = block * w;
            out.columns_mut(start, end - start).copy_from(&refined);
        }
        start = end;
    }
    Matrix4::from_fn(|r, c| out[(r, c)])
}

fn off_diagonal_norm(m: &Mat4) -> f64 {
    let mut s = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            if r != c {
                s += m[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Real orthogonal `o` with `o^T m o` diagonal, for complex symmetric unitary `m`.
///
/// Re(m) and Im(m) commute, so the two-stage diagonalization of (Re, Im)
/// suffices. Nearly (but not exactly) degenerate eigenvalues of Re(m) make
/// that basis ill-conditioned; then rotated pairs (cos t Re + sin t Im, ...)
/// are tried and the best residual kept.
fn diagonalize_symmetric_unitary(m: &Mat4) -> (Matrix4<f64>, f64) {
    const ANGLES: [f64; 6] = [0.0, 0.4537, 1.1721, 2.0313, 2.6649, 0.8161];
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    let mut best: Option<(Matrix4<f64>, f64)> = None;
    for t in ANGLES {
        let (c, s) = (t.cos(), t.sin());
        let a = re * c + im * s;
        let b = im * c - re * s;
        let o = two_stage_basis(&a, &b);
        let oc = o.map(|x| Complex64::new(x, 0.0));
        let res = off_diagonal_norm(&(oc.transpose() * m * oc));
        if best.as_ref().is_none_or(|(_, r)| res < *r) {
            best = Some((o, res));
        }
        if res <= 1e-12 {
            break;
        }
    }
    best.expect("at least one angle tried")
}

/// Bookkeeping for the chamber reduction: the gate equals
/// `e^{i phase} post · U_d(alpha) · pre` throughout.
struct Frame {
    alpha: [f64; 3],
    post: Mat4,
    pre: Mat4,
    phase: f64,
}

impl Frame {
    /// alpha_j -> alpha_j - k pi/2, compensated by (i sigma_j ⊗ sigma_j)^k.
    fn shift(&mut self, j: usize, k: i64) {
        if k == 0 {
            return;
        }
        let s = paulis()[j];
        let ss = tensor_product(&s, &s);
        self.alpha[j] -= k as f64 * FRAC_PI_2;
        if k.rem_euclid(2) == 1 {
            self.pre = ss * self.pre;
        }
        self.phase += k as f64 * FRAC_PI_2;
    }

    /// Negates alpha_j and alpha_k by conjugating with sigma_l on qubit A.
    fn flip(&mut self, j: usize, k: usize) {
        let l = 3 - j - k;
        let s = tensor_product(&paulis()[l], &identity2());
        self.alpha[j] = -self.alpha[j];
        self.alpha[k] = -self.alpha[k];
        self.post *= s;
        self.pre = s * self.pre;
    }

    /// Exchanges alpha_j and alpha_k by conjugating with a Clifford R ⊗ R
    /// that swaps the two Pauli axes up to sign.
    fn transpose(&mut self, j: usize, k: usize) {
        if j == k {
            return;
        }
        let r = axis_swap(j.min(k), j.max(k));
        let rr = tensor_product(&r, &r);
        self.alpha.swap(j, k);
        self.post *= rr.adjoint();
        self.pre = rr * self.pre;
    }
}

fn axis_swap(j: usize, k: usize) -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match (j, k) {
        // S: X -> Y, Y -> -X
        (0, 1) => Mat2::new(ONE, ZERO, ZERO, c(0.0, 1.0)),
        // H: X <-> Z, Y -> -Y
        (0, 2) => Mat2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)),
        // exp(-i pi/4 X): Y -> Z, Z -> -Y
        (1, 2) => Mat2::new(c(h, 0.0), c(0.0, -h), c(0.0, -h), c(h, 0.0)),
        _ => unreachable!("axis pair ({j}, {k})"),
    }
}

fn reduce_to_chamber(f: &mut Frame) {
    for j in 0..3 {
        let k = (f.alpha[j] / FRAC_PI_2).round() as i64;
        f.shift(j, k);
    }
    // order by magnitude, descending
    for (j, k) in [(0, 1), (1, 2), (0, 1)] {
        if f.alpha[k].abs() > f.alpha[j].abs() {
            f.transpose(j, k);
        }
    }
    let [a1, a2, _] = f.alpha;
    if a1 < 0.0 && a2 < 0.0 {
        f.flip(0, 1);
    } else if a1 < 0.0 {
        f.flip(0, 2);
    } else if a2 < 0.0 {
        f.flip(1, 2);
    }
    // on the a1 = pi/4 face (pi/4, a2, a3) ~ (pi/4, a2, -a3); pick a3 >= 0
    if f.alpha[0] >= FRAC_PI_4 - CLUSTER_TOL && f.alpha[2] < 0.0 {
        f.flip(0, 2);
        f.shift(0, -1);
    }
}

/// Splits a 4x4 matrix known to be `e^{i t} a ⊗ b` and returns `(a, b, t)`.
fn split_local(m: &Mat4) -> Result<(Mat2, Mat2, f64)> {
    let (a, b) = nearest_kronecker_factor(m)?;
    let t = (tensor_product(&a, &b).adjoint() * m).trace().arg();
    Ok((a, b, t))
}

/// Canonical decomposition of a two-qubit unitary.
pub fn decompose(u: &Mat4) -> Result<CanonicalDecomposition> {
    check_unitary(u, DECOMPOSE_UNITARITY_TOL)?;
    let frame = MagicFrame::new();
    let (special, phase) = normalize_special(u);
    let ut = frame.into_frame(&special);
    let m = ut.transpose() * ut;
    let (mut o, diag_residual) = diagonalize_symmetric_unitary(&m);
    if diag_residual.is_nan() || diag_residual > RECONSTRUCTION_TOL {
        return Err(Error::DecompositionFailed {
            residual: diag_residual,
        });
    }
    let oc = o.map(|x| Complex64::new(x, 0.0));
    let d = oc.transpose() * m * oc;

    // half phases with e^{2i mu} = d_k, adjusted so they sum to zero
    let mut mu: [f64; 4] = std::array::from_fn(|k| d[(k, k)].arg() / 2.0);
    let mut turns = (mu.iter().sum::<f64>() / PI).round() as i64;
    while turns != 0 {
        if turns > 0 {
            let top = argmax(&mu);
            mu[top] -= PI;
            turns -= 1;
        } else {
            let bottom = argmin(&mu);
            mu[bottom] += PI;
            turns += 1;
        }
    }

    // deterministic labelling: descending phase, first nonzero component positive
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| mu[j].total_cmp(&mu[i]));
    let mu: [f64; 4] = std::array::from_fn(|k| mu[order[k]]);
    o = Matrix4::from_fn(|r, c| o[(r, order[c])]);
    for c in 0..4 {
        if let Some(first) = o.column(c).iter().copied().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                o.column_mut(c).neg_mut();
            }
        }
    }
    if o.determinant() < 0.0 {
        o.column_mut(3).neg_mut();
    }

    let lambda = EigenPhases { lambda: mu };
    let oc = o.map(|x| Complex64::new(x, 0.0));
    let inv_d = Mat4::from_diagonal(&Vector4::from(mu.map(|l| Complex64::from_polar(1.0, -l))));
    let k1 = ut * oc * inv_d;
    let k2 = oc.transpose();

    let mut f = Frame {
        alpha: weyl_from_phases(&lambda).alpha,
        post: frame.out_of_frame(&k1),
        pre: frame.out_of_frame(&k2),
        phase,
    };
    reduce_to_chamber(&mut f);
    let (ua, ub, tp) = split_local(&f.post)?;
    let (va, vb, tq) = split_local(&f.pre)?;
    let result = CanonicalDecomposition {
        weyl: WeylCoordinates { alpha: f.alpha },
        pre_local: (va, vb),
        post_local: (ua, ub),
        global_phase: wrap_phase(f.phase + tp + tq),
    };
    let residual = distance_up_to_phase(&reconstruct(&result), u);
    if residual.is_nan() || residual > RECONSTRUCTION_TOL {
        return Err(Error::DecompositionFailed { residual });
    }
    Ok(result)
}

fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        PI
    } else {
        y
    }
}

fn argmax(x: &[f64; 4]) -> usize {
    (0..4).max_by(|&i, &j| x[i].total_cmp(&x[j])).unwrap_or(0)
}

fn argmin(x: &[f64; 4]) -> usize {
    (0..4).min_by(|&i, &j| x[i].total_cmp(&x[j])).unwrap_or(0)
}
