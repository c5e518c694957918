//! Jacobi `sn`, `cn`, `dn`.

use num_complex::Complex64;

use super::{check_k2, complete_k, DEFAULT_POLE_RADIUS};
use crate::error::{Error, Result};

/// The triple `(sn, cn, dn)` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi<T> {
    pub sn: T,
    pub cn: T,
    pub dn: T,
}

/// `sn`, `cn`, `dn` of real argument by the descending Landen transformation.
///
/// The argument is first reduced modulo `4K`. `dn` is recovered from
/// `dn² = k′² + k² cn²`, which stays accurate as `k → 1`.
pub fn jacobi_real(u: f64, k2: f64) -> Result<Jacobi<f64>> {
    check_k2(k2)?;
    if !u.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {u}")));
    }
    let kk = complete_k(k2)?;
    Ok(jacobi_real_with_k(u, k2, kk))
}

/// As [`jacobi_real`] with `K` supplied by the caller.
pub(crate) fn jacobi_real_with_k(u: f64, k2: f64, kk: f64) -> Jacobi<f64> {
    landen(reduce(u, 4.0 * kk), k2)
}

fn reduce(u: f64, period: f64) -> f64 {
    u - period * (u / period).round()
}

pub(crate) fn landen(u: f64, k2: f64) -> Jacobi<f64> {
    const MAX: usize = 16;
    let mut a = [0.0f64; MAX + 1];
    let mut c = [0.0f64; MAX + 1];
    a[0] = 1.0;
    c[0] = k2.sqrt();
    let mut b = (1.0 - k2).sqrt();
    let mut n = 0;
    while n < MAX && c[n].abs() > f64::EPSILON {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] * phi.sin() / a[j]).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = ((1.0 - k2) + k2 * cn * cn).sqrt();
    Jacobi { sn, cn, dn }
}

/// `sn`, `cn`, `dn` of complex argument `u = x + iy`.
///
/// Real-argument values at `(x, k)` and `(y, k′)` are combined with the
/// imaginary-argument addition theorem. Arguments within the pole exclusion
/// radius of a pole `2jK + (2l+1)iK′` are rejected.
pub fn jacobi(u: Complex64, k2: f64) -> Result<Jacobi<Complex64>> {
    check_k2(k2)?;
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {u}")));
    }
    let kk = complete_k(k2)?;
    let kp = complete_k(1.0 - k2)?;
    jacobi_with_periods(u, k2, kk, kp, DEFAULT_POLE_RADIUS)
}

pub(crate) fn jacobi_with_periods(
    u: Complex64,
    k2: f64,
    kk: f64,
    kp: f64,
    pole_radius: f64,
) -> Result<Jacobi<Complex64>> {
    // nearest pole 2jK + (2l+1)iK'
    let j = (u.re / (2.0 * kk)).round();
    let l = ((u.im / kp - 1.0) / 2.0).round();
    let pole = Complex64::new(2.0 * j * kk, (2.0 * l + 1.0) * kp);
    if (u - pole).norm() < pole_radius {
        return Err(Error::Pole {
            function: "sn",
            at: pole,
        });
    }

    let x = reduce(u.re, 4.0 * kk);
    let y = reduce(u.im, 4.0 * kp);
    let r = landen(x, k2);
    if y == 0.0 {
        return Ok(Jacobi {
            sn: r.sn.into(),
            cn: r.cn.into(),
            dn: r.dn.into(),
        });
    }
    let i = landen(y, 1.0 - k2);
    let (s, c, d) = (r.sn, r.cn, r.dn);
    let (s1, c1, d1) = (i.sn, i.cn, i.dn);
    let delta = c1 * c1 + k2 * s * s * s1 * s1;
    Ok(Jacobi {
        sn: Complex64::new(s * d1, c * d * s1 * c1) / delta,
        cn: Complex64::new(c * c1, -s * d * s1 * d1) / delta,
        dn: Complex64::new(d * c1 * d1, -k2 * s * c * s1) / delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const K2S: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

    #[test]
    fn origin_and_quarter_period() {
        for &k2 in &K2S {
            let j = jacobi_real(0.0, k2).unwrap();
            assert_eq!((j.sn, j.cn, j.dn), (0.0, 1.0, 1.0));
            let kk = complete_k(k2).unwrap();
            let j = jacobi_real(kk, k2).unwrap();
            assert!((j.sn - 1.0).abs() < 1e-14);
            assert!(j.cn.abs() < 1e-14);
            assert!((j.dn - (1.0 - k2).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn small_modulus_is_circular() {
        let j = jacobi_real(0.7, 1e-12).unwrap();
        assert!((j.sn - 0.7f64.sin()).abs() < 1e-11);
        assert!((j.cn - 0.7f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn derivative_of_sn_is_cn_dn() {
        let k2 = 0.6;
        let h = 1e-4;
        for &x in &[0.1, 0.9, 1.7, 3.2, -2.4] {
            let f = |t: f64| jacobi_real(t, k2).unwrap().sn;
            let d =
                (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
            let j = jacobi_real(x, k2).unwrap();
            assert!((d - j.cn * j.dn).abs() < 1e-11);
        }
    }

    #[test]
    fn imaginary_shift_inverts_sn() {
        for &k2 in &K2S {
            let kp = complete_k(1.0 - k2).unwrap();
            for &x in &[0.3, 1.1, -0.8, 2.5] {
                let s = jacobi_real(x, k2).unwrap().sn;
                let shifted = jacobi(Complex64::new(x, kp), k2).unwrap().sn;
                let expect = 1.0 / (k2.sqrt() * s);
                assert!((shifted - expect).norm() < 1e-12 * expect.abs());
            }
        }
    }

    #[test]
    fn pole_is_rejected() {
        let k2 = 0.3;
        let kk = complete_k(k2).unwrap();
        let kp = complete_k(1.0 - k2).unwrap();
        let err = jacobi(Complex64::new(2.0 * kk, 3.0 * kp), k2).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }));
    }
}
