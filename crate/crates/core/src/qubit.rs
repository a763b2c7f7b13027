//! Pure linear-polarization qubits, the observables `A` and `B`, and
//! polarization projectors.
//!
//! All angles are radians. A state angle `psi` is measured from `|H>`, so
//! `|psi> = cos(psi)|H> + sin(psi)|V>`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{check_range, Result};
use crate::scalar::Real;

/// Discriminants in `[-DISC_CLAMP, 0)` are treated as exactly zero.
const DISC_CLAMP: f64 = 1e-14;

/// Real-amplitude pure state `cos(psi)|H> + sin(psi)|V>`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QubitState<T> {
    pub psi: T,
}

impl<T: Real> QubitState<T> {
    pub fn new(psi: T) -> Self {
        Self { psi }
    }

    /// Amplitudes on `|H>` and `|V>`.
    pub fn amplitudes(&self) -> [T; 2] {
        [self.psi.cos(), self.psi.sin()]
    }

    /// Bloch components `(<Z>, <X>)`; `<Y>` vanishes for real amplitudes.
    pub fn bloch(&self) -> (T, T) {
        let twice = self.psi + self.psi;
        (twice.cos(), twice.sin())
    }
}

/// Parameters `(a, b, r, beta)` of
/// `A = a (1 + Z)/2` and `B = b (1 + r cos(beta) Z + r sin(beta) X)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableParams<T> {
    pub a: T,
    pub b: T,
    pub r: T,
    pub beta: T,
}

impl<T: Real> ObservableParams<T> {
    /// Validates `a > 0`, `b > 0`, `0 <= r <= 1` and a finite `beta`.
    pub fn new(a: T, b: T, r: T, beta: T) -> Result<Self> {
        let p = Self { a, b, r, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        check_range("a", f(self.a), f64::MIN_POSITIVE, f64::MAX, "(0, inf)")?;
        check_range("b", f(self.b), f64::MIN_POSITIVE, f64::MAX, "(0, inf)")?;
        check_range("r", f(self.r), 0.0, 1.0, "[0, 1]")?;
        check_range("beta", f(self.beta), f64::MIN, f64::MAX, "finite radians")
    }

    /// Ratio `a / b`, the quantity bounded by the feasibility window.
    pub fn scale_ratio(&self) -> T {
        self.a / self.b
    }
}

/// Hermitian 2x2 operator stored by its Pauli-basis coefficients,
/// `M = c0 I + cz Z + cx X + cy Y`, in the `{|H>, |V>}` basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HermitianOp2<T> {
    pub c0: T,
    pub cz: T,
    pub cx: T,
    pub cy: T,
}

/// Eigen-decomposition of a [`HermitianOp2`]. `values` are nondecreasing and
/// `vectors[k]` is the unit eigenvector belonging to `values[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2<T> {
    pub values: [T; 2],
    pub vectors: [[Complex<T>; 2]; 2],
}

impl<T: Real> HermitianOp2<T> {
    pub fn new(c0: T, cz: T, cx: T, cy: T) -> Self {
        Self { c0, cz, cx, cy }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    pub fn pauli_z() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn pauli_x() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn pauli_y() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.c0 * k, self.cz * k, self.cx * k, self.cy * k)
    }

    pub fn trace(&self) -> T {
        self.c0 + self.c0
    }

    /// Materializes the complex matrix, row-major.
    pub fn matrix(&self) -> [[Complex<T>; 2]; 2] {
        [
            [
                Complex::new(self.c0 + self.cz, T::zero()),
                Complex::new(self.cx, -self.cy),
            ],
            [
                Complex::new(self.cx, self.cy),
                Complex::new(self.c0 - self.cz, T::zero()),
            ],
        ]
    }

    /// Real part of [`Self::matrix`]; exact whenever `cy == 0`.
    pub fn real_matrix(&self) -> [[T; 2]; 2] {
        [
            [self.c0 + self.cz, self.cx],
            [self.cx, self.c0 - self.cz],
        ]
    }

    /// Exact square: `(c0 + c.s)^2 = c0^2 + |c|^2 + 2 c0 c.s`.
    pub fn square(&self) -> Self {
        let norm_sq = self.cz * self.cz + self.cx * self.cx + self.cy * self.cy;
        let twice_c0 = self.c0 + self.c0;
        Self::new(
            self.c0 * self.c0 + norm_sq,
            twice_c0 * self.cz,
            twice_c0 * self.cx,
            twice_c0 * self.cy,
        )
    }

    /// Eigenvalues in nondecreasing order, from the roots of
    /// `l^2 - tr l + det = 0`.
    pub fn eigenvalues(&self) -> [T; 2] {
        let m = self.matrix();
        let d00 = m[0][0].re;
        let d11 = m[1][1].re;
        let off = m[0][1].norm_sqr();
        // tr^2 - 4 det, rearranged so no large terms cancel
        let diff = d00 - d11;
        let mut disc = diff * diff + T::lit(4.0) * off;
        if disc < T::zero() && disc >= T::lit(-DISC_CLAMP) {
            disc = T::zero();
        }
        let root = disc.sqrt();
        let tr = d00 + d11;
        [(tr - root) * T::half(), (tr + root) * T::half()]
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues()[1]
    }

    pub fn eigen(&self) -> Eigen2<T> {
        let values = self.eigenvalues();
        // Bloch angles of the coefficient vector; a zero vector gives the
        // computational basis.
        let transverse = (self.cx * self.cx + self.cy * self.cy).sqrt();
        let polar = transverse.atan2(self.cz);
        let azimuth = self.cy.atan2(self.cx);
        let (s, c) = (polar * T::half()).sin_cos();
        let phase = Complex::from_polar(T::one(), azimuth);
        let upper = [Complex::new(c, T::zero()), phase * s];
        let lower = [-(phase.conj() * s), Complex::new(c, T::zero())];
        Eigen2 {
            values,
            vectors: [lower, upper],
        }
    }

    /// `<state| self |state>`.
    pub fn expectation(&self, state: &QubitState<T>) -> T {
        let (z, x) = state.bloch();
        self.c0 + self.cz * z + self.cx * x
    }
}

impl<T: Real> Add for HermitianOp2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.c0 + o.c0, self.cz + o.cz, self.cx + o.cx, self.cy + o.cy)
    }
}

impl<T: Real> Sub for HermitianOp2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.c0 - o.c0, self.cz - o.cz, self.cx - o.cx, self.cy - o.cy)
    }
}

impl<T: Real> Neg for HermitianOp2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for HermitianOp2<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        self.scale(k)
    }
}

/// `A = a (1 + Z) / 2`, i.e. `a` times the projector onto `|H>`.
pub fn build_a<T: Real>(params: &ObservableParams<T>) -> HermitianOp2<T> {
    let h = params.a * T::half();
    HermitianOp2::new(h, h, T::zero(), T::zero())
}

/// `B = b (1 + r cos(beta) Z + r sin(beta) X) / 2`.
pub fn build_b<T: Real>(params: &ObservableParams<T>) -> HermitianOp2<T> {
    let h = params.b * T::half();
    let (s, c) = params.beta.sin_cos();
    HermitianOp2::new(h, h * params.r * c, h * params.r * s, T::zero())
}

/// Projector onto `cos(theta)|H> + sin(theta)|V>`.
pub fn projector<T: Real>(theta: T) -> HermitianOp2<T> {
    let (s, c) = (theta + theta).sin_cos();
    let h = T::half();
    HermitianOp2::new(h, h * c, h * s, T::zero())
}

/// `B` written as a weighted sum of two orthogonal polarization projectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorDecomposition<T> {
    pub weights: [T; 2],
    pub angles: [T; 2],
}

impl<T: Real> ProjectorDecomposition<T> {
    pub fn reconstruct(&self) -> HermitianOp2<T> {
        projector(self.angles[0]).scale(self.weights[0])
            + projector(self.angles[1]).scale(self.weights[1])
    }
}

/// `B = b(1+r)/2 P(beta/2) + b(1-r)/2 P((beta+pi)/2)`.
pub fn decompose_b<T: Real>(params: &ObservableParams<T>) -> ProjectorDecomposition<T> {
    let h = params.b * T::half();
    let half_beta = params.beta * T::half();
    ProjectorDecomposition {
        weights: [h * (T::one() + params.r), h * (T::one() - params.r)],
        angles: [half_beta, (params.beta + T::PI()) * T::half()],
    }
}

pub fn expectation<T: Real>(op: &HermitianOp2<T>, state: &QubitState<T>) -> T {
    op.expectation(state)
}

/// `<state| op^2 |state>` using the exact operator square.
pub fn expectation_sq<T: Real>(op: &HermitianOp2<T>, state: &QubitState<T>) -> T {
    op.square().expectation(state)
}

pub fn min_eigenvalue<T: Real>(op: &HermitianOp2<T>) -> T {
    op.min_eigenvalue()
}
