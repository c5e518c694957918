//! Weierstrass `℘`, `℘′`, `ζ` and `σ` through `θ₁`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::carlson::carlson_rf;
use super::lattice::LatticeData;
use crate::error::{Error, Result};

/// `ζ`, `℘` and `℘′` at one point, from a single theta evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpDerivs {
    pub zeta: Complex64,
    pub wp: Complex64,
    pub wp_prime: Complex64,
}

struct Reduced {
    z0: Complex64,
    m: f64,
    n: f64,
}

fn reduce(z: Complex64, lat: &LatticeData) -> Result<Reduced> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    let w1 = lat.omega1_re();
    let w3 = lat.omega3_im();
    let m = (z.re / (2.0 * w1)).round();
    let n = (z.im / (2.0 * w3)).round();
    let z0 = Complex64::new(z.re - 2.0 * m * w1, z.im - 2.0 * n * w3);
    Ok(Reduced { z0, m, n })
}

fn lattice_shift(r: &Reduced, lat: &LatticeData) -> Complex64 {
    2.0 * r.m * lat.eta1() + 2.0 * r.n * lat.eta3()
}

fn check_pole(r: &Reduced, z: Complex64, lat: &LatticeData, function: &'static str) -> Result<()> {
    if r.z0.norm() < lat.pole_radius() {
        Err(Error::Pole {
            function,
            at: z - r.z0,
        })
    } else {
        Ok(())
    }
}

/// `ζ`, `℘`, `℘′` at `z`.
pub fn wp_derivs(z: Complex64, lat: &LatticeData) -> Result<WpDerivs> {
    let r = reduce(z, lat)?;
    check_pole(&r, z, lat, "wp")?;
    let w1 = lat.omega1_re();
    let c = PI / (2.0 * w1);
    let th = lat.theta.eval(c * r.z0);
    let l1 = th[1] / th[0];
    let l2 = th[2] / th[0];
    let l3 = th[3] / th[0];
    let eta1 = lat.eta1();
    Ok(WpDerivs {
        zeta: eta1 * r.z0 / w1 + c * l1 + lattice_shift(&r, lat),
        wp: -eta1 / w1 - c * c * (l2 - l1 * l1),
        wp_prime: -c * c * c * (l3 - 3.0 * l1 * l2 + 2.0 * l1 * l1 * l1),
    })
}

/// Weierstrass `℘(z)`.
pub fn wp(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    Ok(wp_derivs(z, lat)?.wp)
}

/// `℘′(z)`.
pub fn wp_prime(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    Ok(wp_derivs(z, lat)?.wp_prime)
}

/// Weierstrass `ζ(z)`.
pub fn wzeta(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let r = reduce(z, lat)?;
    check_pole(&r, z, lat, "zeta")?;
    let w1 = lat.omega1_re();
    let c = PI / (2.0 * w1);
    let th = lat.theta.eval(c * r.z0);
    Ok(lat.eta1() * r.z0 / w1 + c * th[1] / th[0] + lattice_shift(&r, lat))
}

/// `ln σ(z)`, defined up to multiples of `2πi`.
///
/// Returns a real part of `−∞` at lattice points.
pub fn ln_wsigma(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let r = reduce(z, lat)?;
    let w1 = lat.omega1_re();
    let c = PI / (2.0 * w1);
    let th = lat.theta.eval(c * r.z0)[0];
    if th == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
    }
    let shift = lattice_shift(&r, lat);
    let centre = r.z0 + r.m * lat.omega1() + r.n * lat.omega3();
    let parity = r.m + r.n + r.m * r.n;
    Ok(
        (2.0 * w1 / PI).ln() + lat.eta1() * r.z0 * r.z0 / (2.0 * w1) + th.ln()
            - lat.theta1p0().ln()
            + shift * centre
            + Complex64::new(0.0, PI * parity.rem_euclid(2.0)),
    )
}

/// Weierstrass `σ(z)`.
pub fn wsigma(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let l = ln_wsigma(z, lat)?;
    if l.re == f64::NEG_INFINITY {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(l.exp())
}

/// A point `b` of the fundamental cell with `℘(b) = c`.
///
/// The representative lies in `[0, 2ω₁) × [0, 2|ω₃|)`; of the two solutions
/// `±b` the one with `Re b ≤ ω₁` is returned, ties broken by `Im b ≤ |ω₃|`.
pub fn inverse_wp(c: Complex64, lat: &LatticeData) -> Result<Complex64> {
    if !(c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite value {c}")));
    }
    let tol = 1e-12 * c.norm().max(1.0);
    let guess = carlson_rf(c - lat.e1(), c - lat.e2(), c - lat.e3());
    let b = match newton(guess, c, tol, lat) {
        Ok(b) => b,
        Err(_) => {
            let start = grid_start(c, lat);
            newton(start, c, tol, lat)?
        }
    };
    Ok(canonical(b, lat))
}

fn newton(mut b: Complex64, c: Complex64, tol: f64, lat: &LatticeData) -> Result<Complex64> {
    let mut best = (f64::INFINITY, b);
    for _ in 0..60 {
        let d = match wp_derivs(b, lat) {
            Ok(d) => d,
            Err(_) => break,
        };
        let f = d.wp - c;
        if f.norm() < best.0 {
            best = (f.norm(), b);
        }
        if f.norm() <= 0.1 * tol {
            return Ok(b);
        }
        if d.wp_prime.norm() == 0.0 {
            break;
        }
        let step = f / d.wp_prime;
        b -= step;
        if step.norm() <= 1e-16 * b.norm().max(1.0) {
            break;
        }
    }
    if best.0 <= tol {
        Ok(best.1)
    } else {
        Err(Error::numeric("inverse of wp", Some(best.1)))
    }
}

fn grid_start(c: Complex64, lat: &LatticeData) -> Complex64 {
    const N: usize = 48;
    let w1 = lat.omega1_re();
    let w3 = lat.omega3_im();
    let mut best = (f64::INFINITY, Complex64::new(w1, 0.0));
    for i in 0..N {
        for j in 0..=N / 2 {
            let z = Complex64::new(
                2.0 * w1 * (i as f64 + 0.5) / N as f64,
                2.0 * w3 * (j as f64 + 0.5) / N as f64,
            );
            if let Ok(p) = wp(z, lat) {
                let r = (p - c).norm();
                if r < best.0 {
                    best = (r, z);
                }
            }
        }
    }
    best.1
}

/// Reduce into `[0, 2ω₁) × [0, 2|ω₃|)`.
pub fn reduce_to_cell(z: Complex64, lat: &LatticeData) -> Complex64 {
    let p1 = 2.0 * lat.omega1_re();
    let p3 = 2.0 * lat.omega3_im();
    let snap = |x: f64, p: f64| {
        let mut r = x.rem_euclid(p);
        if p - r < 1e-13 * p {
            r = 0.0;
        }
        r
    };
    Complex64::new(snap(z.re, p1), snap(z.im, p3))
}

pub(crate) fn canonical(b: Complex64, lat: &LatticeData) -> Complex64 {
    let a = reduce_to_cell(b, lat);
    let n = reduce_to_cell(-b, lat);
    let w1 = lat.omega1_re();
    let w3 = lat.omega3_im();
    let eps = 1e-12 * w1;
    if (a.re - n.re).abs() > eps {
        if a.re <= w1 {
            a
        } else {
            n
        }
    } else if a.im <= w3 + eps {
        a
    } else {
        n
    }
}
