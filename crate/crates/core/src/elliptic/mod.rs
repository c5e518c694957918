//! Jacobian and Weierstrass elliptic functions on rectangular lattices.
//!
//! Everything downstream is expressed through a [`LatticeData`] built from the
//! modulus `k²`. Jacobi functions of real argument come from the descending
//! Landen (AGM) scheme and are continued to complex arguments with the
//! imaginary-argument addition theorem. The Weierstrass functions `℘`, `ζ`
//! and `σ` are evaluated from rapidly convergent `θ₁` series after reducing
//! the argument into the fundamental cell; the defining lattice sums are only
//! used by the tests as slow oracles.

mod carlson;
mod jacobi;
mod lattice;
mod theta;
mod weierstrass;

use std::f64::consts::FRAC_PI_2;

pub use carlson::carlson_rf;
pub use jacobi::{jacobi, jacobi_real, Jacobi};
pub(crate) use jacobi::{jacobi_real_with_k, jacobi_with_periods};
pub use lattice::{lattice_from_modulus, LatticeData, DEFAULT_POLE_RADIUS};
pub use weierstrass::{
    inverse_wp, ln_wsigma, reduce_to_cell, wp, wp_derivs, wp_prime, wsigma, wzeta, WpDerivs,
};

use crate::error::{Error, Result};

/// The modulus parameter `k²` together with its complement `k′² = 1 − k²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k2: f64,
    kprime2: f64,
}

impl Modulus {
    pub fn new(k2: f64) -> Result<Self> {
        check_k2(k2)?;
        Ok(Modulus {
            k2,
            kprime2: 1.0 - k2,
        })
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn kprime2(&self) -> f64 {
        self.kprime2
    }

    pub fn k(&self) -> f64 {
        self.k2.sqrt()
    }

    pub fn kprime(&self) -> f64 {
        self.kprime2.sqrt()
    }

    /// The complementary modulus `k′²` as a modulus in its own right.
    pub fn complement(&self) -> Modulus {
        Modulus {
            k2: self.kprime2,
            kprime2: self.k2,
        }
    }
}

pub(crate) fn check_k2(k2: f64) -> Result<()> {
    if k2.is_finite() && k2 > 0.0 && k2 < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "modulus parameter k² = {k2} must lie in (0, 1)"
        )))
    }
}

/// Arithmetic-geometric mean of two positive reals.
pub(crate) fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 4.0 * f64::EPSILON * an {
            return an;
        }
        a = an;
        b = bn;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral `K(k) = ∫₀^{π/2} dφ / √(1 − k² sin²φ)`.
///
/// Computed as `π / (2·AGM(1, k′))`. The complementary quarter period is
/// `complete_k(1 − k²)`.
pub fn complete_k(k2: f64) -> Result<f64> {
    check_k2(k2)?;
    Ok(FRAC_PI_2 / agm(1.0, (1.0 - k2).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson_k(k2: f64, n: usize) -> f64 {
        // composite Simpson on the defining integral
        let h = FRAC_PI_2 / n as f64;
        let f = |phi: f64| 1.0 / (1.0 - k2 * phi.sin().powi(2)).sqrt();
        let mut s = f(0.0) + f(FRAC_PI_2);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn k_small_modulus_tends_to_half_pi() {
        let k = complete_k(1e-14).unwrap();
        assert!((k - FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn k_half_matches_quadrature() {
        let k = complete_k(0.5).unwrap();
        let quad = simpson_k(0.5, 2000);
        assert!((k - quad).abs() < 1e-12, "{k} vs {quad}");
        assert!((k - 1.854_074_677).abs() < 1e-9);
    }

    #[test]
    fn k_matches_carlson_route() {
        for &k2 in &[0.05, 0.25, 0.5, 0.75, 0.95, 0.999] {
            let k = complete_k(k2).unwrap();
            let rf = carlson_rf(0.0.into(), (1.0 - k2).into(), 1.0.into());
            assert!((k - rf.re).abs() < 1e-13 * k, "k2={k2}");
        }
    }

    #[test]
    fn complementary_symmetry() {
        let kp = complete_k(0.05).unwrap();
        let m = Modulus::new(0.95).unwrap();
        assert_eq!(complete_k(m.complement().k2()).unwrap(), kp);
    }

    #[test]
    fn rejects_out_of_range() {
        for &k2 in &[0.0, 1.0, 1.5, -0.2, f64::NAN] {
            assert!(matches!(complete_k(k2), Err(Error::Domain(_))));
        }
    }
}
