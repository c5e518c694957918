use std::f64::consts::PI;

use num_complex::Complex64;

use super::theta::Theta1;
use super::{check_k2, complete_k};
use crate::error::{Error, Result};

/// Default radius of the exclusion disc around lattice points and `sn` poles.
pub const DEFAULT_POLE_RADIUS: f64 = 1e-9;

/// Constants of the rectangular lattice attached to a modulus `k²`.
///
/// With the default scale the half-periods are `ω₁ = K`, `ω₃ = iK′` and
/// `ē₃ = e₁ − e₃ = 1`. [`LatticeData::with_scale`] multiplies every `eᵢ` by a
/// positive factor `s` and divides the half-periods by `√s`; all consumers
/// carry `ē₃` explicitly, so results are independent of the choice.
#[derive(Debug, Clone)]
pub struct LatticeData {
    k2: f64,
    kk: f64,
    kp: f64,
    e: [f64; 3],
    omega1: f64,
    omega3: f64,
    g2: f64,
    g3: f64,
    eta1: f64,
    eta3: Complex64,
    pub(crate) theta: Theta1,
    theta1p0: f64,
    pole_radius: f64,
}

/// The lattice with `ē₃ = 1`, i.e. half-periods `K` and `iK′`.
pub fn lattice_from_modulus(k2: f64) -> Result<LatticeData> {
    LatticeData::with_scale(k2, 1.0)
}

impl LatticeData {
    pub fn new(k2: f64) -> Result<Self> {
        lattice_from_modulus(k2)
    }

    /// The lattice with `ē₃ = scale`.
    pub fn with_scale(k2: f64, scale: f64) -> Result<Self> {
        check_k2(k2)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "lattice scale {scale} must be positive"
            )));
        }
        let kk = complete_k(k2)?;
        let kp = complete_k(1.0 - k2)?;
        let e = [
            scale * (2.0 - k2) / 3.0,
            scale * (2.0 * k2 - 1.0) / 3.0,
            -scale * (1.0 + k2) / 3.0,
        ];
        let g2 = 2.0 * (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
        let g3 = 4.0 * e[0] * e[1] * e[2];
        let root = scale.sqrt();
        let omega1 = kk / root;
        let omega3 = kp / root;
        let theta = Theta1::new(PI * kp / kk);
        let (d1, d3) = theta.odd_derivatives_at_zero();
        let eta1 = -PI * PI * d3 / (12.0 * omega1 * d1);
        // Legendre relation η₁ω₃ − η₃ω₁ = iπ/2
        let eta3 = (Complex64::new(0.0, eta1 * omega3) - Complex64::new(0.0, PI / 2.0)) / omega1;
        Ok(LatticeData {
            k2,
            kk,
            kp,
            e,
            omega1,
            omega3,
            g2,
            g3,
            eta1,
            eta3,
            theta,
            theta1p0: d1,
            pole_radius: DEFAULT_POLE_RADIUS,
        })
    }

    /// Same lattice with a different pole exclusion radius.
    pub fn with_pole_radius(mut self, radius: f64) -> Self {
        self.pole_radius = radius;
        self
    }

    pub fn pole_radius(&self) -> f64 {
        self.pole_radius
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn kprime2(&self) -> f64 {
        1.0 - self.k2
    }

    /// Quarter period `K`.
    #[allow(non_snake_case)]
    pub fn K(&self) -> f64 {
        self.kk
    }

    /// Complementary quarter period `K′`.
    #[allow(non_snake_case)]
    pub fn Kprime(&self) -> f64 {
        self.kp
    }

    pub fn e1(&self) -> f64 {
        self.e[0]
    }

    pub fn e2(&self) -> f64 {
        self.e[1]
    }

    pub fn e3(&self) -> f64 {
        self.e[2]
    }

    /// `ē₂ = e₁ − e₂`.
    pub fn ebar2(&self) -> f64 {
        self.e[0] - self.e[1]
    }

    /// `ē₃ = e₁ − e₃`, the lattice scale.
    pub fn ebar3(&self) -> f64 {
        self.e[0] - self.e[2]
    }

    pub fn omega1(&self) -> Complex64 {
        Complex64::new(self.omega1, 0.0)
    }

    pub fn omega2(&self) -> Complex64 {
        Complex64::new(self.omega1, self.omega3)
    }

    pub fn omega3(&self) -> Complex64 {
        Complex64::new(0.0, self.omega3)
    }

    pub fn g2(&self) -> f64 {
        self.g2
    }

    pub fn g3(&self) -> f64 {
        self.g3
    }

    /// `g₂³ − 27g₃²`.
    pub fn discriminant(&self) -> f64 {
        self.g2.powi(3) - 27.0 * self.g3 * self.g3
    }

    /// `η₁ = ζ(ω₁)`.
    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    /// `η₃ = ζ(ω₃)`.
    pub fn eta3(&self) -> Complex64 {
        self.eta3
    }

    pub(crate) fn omega1_re(&self) -> f64 {
        self.omega1
    }

    pub(crate) fn omega3_im(&self) -> f64 {
        self.omega3
    }

    pub(crate) fn theta1p0(&self) -> f64 {
        self.theta1p0
    }

    /// The argument `z = (x − iK′)/√ē₃` at which the real line is embedded.
    pub fn z_of_x(&self, x: f64) -> Complex64 {
        let root = self.ebar3().sqrt();
        Complex64::new(x / root, -self.kp / root)
    }
}
