//! Pure two-qubit states, magic-basis coefficients and concurrence.

use nalgebra::Vector4;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qubit_algebra::{check_unitary, MagicFrame, Mat4, UNITARITY_TOL};

/// Tolerance on the squared norm of a state.
pub const NORM_TOL: f64 = 1e-12;

/// Concurrence at or below this value counts as a product state.
pub const PRODUCT_THRESHOLD: f64 = 1e-10;

/// A normalized two-qubit pure state in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amplitudes: [Complex64; 4],
}

impl PureState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() <= NORM_TOL {
            Ok(Self { amplitudes })
        } else {
            Err(Error::NotNormalized { norm_sqr })
        }
    }

    /// Scales `amplitudes` to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        Ok(Self {
            amplitudes: amplitudes.map(|a| a / norm),
        })
    }

    /// Computational basis state |index> with index in 0..4 (|00>, |01>, |10>, |11>).
    pub fn basis(index: usize) -> Self {
        let mut amplitudes = [Complex64::new(0.0, 0.0); 4];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }

    fn as_vector(&self) -> Vector4<Complex64> {
        Vector4::from(self.amplitudes)
    }
}

/// Coefficients b_1..b_4 of a state in the magic basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagicCoefficients {
    b: [Complex64; 4],
}

impl MagicCoefficients {
    pub fn new(b: [Complex64; 4]) -> Result<Self> {
        let norm_sqr: f64 = b.iter().map(|x| x.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() <= NORM_TOL {
            Ok(Self { b })
        } else {
            Err(Error::NotNormalized { norm_sqr })
        }
    }

    pub fn coefficients(&self) -> &[Complex64; 4] {
        &self.b
    }

    /// beta_j = |b_j|
    pub fn moduli(&self) -> [f64; 4] {
        self.b.map(|x| x.norm())
    }

    /// gamma_j = arg b_j
    pub fn phases(&self) -> [f64; 4] {
        self.b.map(|x| x.arg())
    }

    /// sum_k b_k^2
    pub fn quadratic_sum(&self) -> Complex64 {
        self.b.iter().map(|x| x * x).sum()
    }

    pub fn to_state(&self) -> PureState {
        let amps = MagicFrame::new().matrix() * Vector4::from(self.b);
        PureState {
            amplitudes: amps.into(),
        }
    }
}

pub fn to_magic_coefficients(s: &PureState) -> MagicCoefficients {
    let b = MagicFrame::new().matrix().adjoint() * s.as_vector();
    MagicCoefficients { b: b.into() }
}

/// Concurrence |sum_k b_k^2| of a pure state, clamped to [0, 1].
pub fn concurrence(s: &PureState) -> f64 {
    to_magic_coefficients(s)
        .quadratic_sum()
        .norm()
        .clamp(0.0, 1.0)
}

pub fn is_product(s: &PureState) -> bool {
    concurrence(s) <= PRODUCT_THRESHOLD
}

pub fn apply_gate(u: &Mat4, s: &PureState) -> Result<PureState> {
    check_unitary(u, UNITARITY_TOL)?;
    let out = u * s.as_vector();
    Ok(PureState {
        amplitudes: out.into(),
    })
}

/// Rescales `b` in place so that |sum b^2| = c0 and sum |b|^2 = 1, keeping the
/// phase of sum b^2.
///
/// After rotating by half the phase of sum b^2 the real and imaginary parts
/// x, y of b are orthogonal, so scaling them independently to
/// |x|^2 = (1 + c0)/2 and |y|^2 = (1 - c0)/2 hits both constraints. Returns
/// false, leaving `b` untouched, when a part that must be scaled is zero.
pub(crate) fn rescale_to_concurrence(b: &mut [Complex64; 4], c0: f64) -> bool {
    let sum: Complex64 = b.iter().map(|x| x * x).sum();
    let half = if sum.norm() > 0.0 {
        sum.arg() / 2.0
    } else {
        0.0
    };
    let rot = Complex64::from_polar(1.0, -half);
    let rotated = b.map(|x| x * rot);
    let x2: f64 = rotated.iter().map(|z| z.re * z.re).sum();
    let y2: f64 = rotated.iter().map(|z| z.im * z.im).sum();
    let want_x2 = 0.5 * (1.0 + c0);
    let want_y2 = 0.5 * (1.0 - c0);
    let eps = 1e-300;
    if x2 <= eps || (y2 <= eps && want_y2 > 0.0) {
        return false;
    }
    let sx = (want_x2 / x2).sqrt();
    let sy = if want_y2 > 0.0 {
        (want_y2 / y2).sqrt()
    } else {
        0.0
    };
    let back = rot.conj();
    for (dst, z) in b.iter_mut().zip(rotated.iter()) {
        *dst = Complex64::new(z.re * sx, z.im * sy) * back;
    }
    true
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}

/// Draws a Haar-random state and moves it onto the manifold of states with
/// concurrence `c0`. Different seeds give generic states, not just the
/// two-coefficient family.
pub fn sample_state_with_concurrence(c0: f64, seed: u64) -> Result<PureState> {
    check_unit_interval("c0", c0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_with(c0, &mut rng))
}

pub(crate) fn sample_with(c0: f64, rng: &mut ChaCha8Rng) -> PureState {
    loop {
        let mut b = [Complex64::new(0.0, 0.0); 4];
        for x in b.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *x = Complex64::new(re, im);
        }
        let norm = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        b.iter_mut().for_each(|x| *x /= norm);
        if rescale_to_concurrence(&mut b, c0) {
            return MagicCoefficients { b }.to_state();
        }
    }
}
