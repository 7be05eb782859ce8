//! Dense 2x2 / 4x4 complex matrices, the magic basis, and seeded Haar sampling.
//!
//! Basis order for two qubits is |00>, |01>, |10>, |11> with qubit A as the
//! first tensor factor.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type Mat2 = SMatrix<Complex64, 2, 2>;
pub type Mat4 = SMatrix<Complex64, 4, 4>;

/// Tolerance on ||M^dag M - I||_F for matrices handed in by callers.
pub const UNITARITY_TOL: f64 = 1e-12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// sigma_1, sigma_2, sigma_3 in that order.
pub fn paulis() -> [Mat2; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Kronecker product `a ⊗ b`; `a` acts on qubit A.
pub fn tensor_product(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Columns are the magic basis states |Phi_1> .. |Phi_4> in the computational basis:
///
/// ```text
/// |Phi_1> = -i (|00> - |11>) / sqrt2
/// |Phi_2> =    (|00> + |11>) / sqrt2
/// |Phi_3> = -i (|01> + |10>) / sqrt2
/// |Phi_4> =    (|01> - |10>) / sqrt2
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagicFrame {
    q: Mat4,
}

impl MagicFrame {
    pub fn new() -> Self {
        let h = FRAC_1_SQRT_2;
        let mi = Complex64::new(0.0, -h);
        let re = Complex64::new(h, 0.0);
        #[rustfmt::skip]
        let q = Mat4::new(
            mi,    re,    ZERO,  ZERO,
            ZERO,  ZERO,  mi,    re,
            ZERO,  ZERO,  mi,    -re,
            -mi,   re,    ZERO,  ZERO,
        );
        Self { q }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.q
    }

    /// Q^dag u Q without any unitarity check.
    pub fn into_frame(&self, u: &Mat4) -> Mat4 {
        self.q.adjoint() * u * self.q
    }

    /// Q m Q^dag, the inverse of [`MagicFrame::into_frame`].
    pub fn out_of_frame(&self, m: &Mat4) -> Mat4 {
        self.q * m * self.q.adjoint()
    }
}

impl Default for MagicFrame {
    fn default() -> Self {
        Self::new()
    }
}

/// ||M^dag M - I||_F.
pub fn unitarity_residual<const N: usize>(m: &SMatrix<Complex64, N, N>) -> f64 {
    (m.adjoint() * m - SMatrix::<Complex64, N, N>::identity()).norm()
}

pub fn check_unitary<const N: usize>(m: &SMatrix<Complex64, N, N>, tolerance: f64) -> Result<()> {
    let residual = unitarity_residual(m);
    // NaN must fail too
    if residual <= tolerance {
        Ok(())
    } else {
        Err(Error::NotUnitary {
            residual,
            tolerance,
        })
    }
}

/// Expresses a unitary in the magic basis, Q^dag u Q.
pub fn to_magic_frame(u: &Mat4) -> Result<Mat4> {
    check_unitary(u, UNITARITY_TOL)?;
    Ok(MagicFrame::new().into_frame(u))
}

/// Splits off a global phase so that the remainder has unit determinant.
///
/// Returns `(v, phi)` with `u = e^{i phi} v` and `phi` the principal value of
/// `arg(det u) / 4`, i.e. in `(-pi/4, pi/4]`.
pub fn normalize_special(u: &Mat4) -> (Mat4, f64) {
    let mut arg = u.determinant().arg();
    if arg <= -PI + 1e-12 {
        arg = PI;
    }
    let phase = arg / 4.0;
    (u * Complex64::from_polar(1.0, -phase), phase)
}

/// min over phi of ||u - e^{i phi} v||_F.
///
/// For unitaries this equals sqrt(2N - 2|tr(u^dag v)|). The norm is evaluated
/// directly at the optimal phase arg tr(v^dag u), which avoids the catastrophic
/// cancellation of the closed form near zero.
pub fn distance_up_to_phase<const N: usize>(
    u: &SMatrix<Complex64, N, N>,
    v: &SMatrix<Complex64, N, N>,
) -> f64 {
    let overlap = (v.adjoint() * u).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    (u - v * phase).norm()
}

fn haar_dynamic(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let z = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// Haar-distributed unitary from QR of a complex Ginibre matrix, with the
/// phases of R's diagonal pushed into Q. Deterministic per seed.
pub fn random_unitary<const N: usize>(seed: u64) -> SMatrix<Complex64, N, N> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary_with(&mut rng)
}

pub(crate) fn random_unitary_with<const N: usize>(
    rng: &mut ChaCha8Rng,
) -> SMatrix<Complex64, N, N> {
    let q = haar_dynamic(N, rng);
    SMatrix::<Complex64, N, N>::from_fn(|r, c| q[(r, c)])
}

pub fn random_unitary2(seed: u64) -> Mat2 {
    random_unitary::<2>(seed)
}

pub fn random_unitary4(seed: u64) -> Mat4 {
    random_unitary::<4>(seed)
}
