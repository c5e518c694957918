//! Terminating Frobenius solution of the product equation.
//!
//! The product `Ψ = ψ⁺ψ⁻` of the two Bloch solutions is, in the variable
//! `t = ℘(z)`, a polynomial of degree `m + ℓ` divided by `(t − e₁)^ℓ`. Its
//! coefficients in `y = (e₁ − t)/ē₂` obey the three-term recurrence
//!
//! `f₀(r+1) a_{r+1} + f₁(r) a_r + f₂(r−1) a_{r−1} = 0`.
//!
//! Coefficients up to `a_{2ℓ}` come from banded determinants `F_r`; the tail
//! is fixed by the truncation `a_{m+ℓ+1} = 0` through trailing minors `D_r`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::{inverse_wp, reduce_to_cell, wp_derivs, LatticeData};
use crate::error::{Error, Result};

type C = Complex64;

/// Integer parameters `(m, ℓ)` of the potential and the modulus `k²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub m: u32,
    pub ell: u32,
    pub k2: f64,
}

impl ModelParams {
    pub fn new(m: u32, ell: u32, k2: f64) -> Result<Self> {
        if ell > m {
            return Err(Error::Domain(format!("need m ≥ ℓ, got m = {m}, ℓ = {ell}")));
        }
        crate::elliptic::Modulus::new(k2)?;
        Ok(ModelParams { m, ell, k2 })
    }

    /// Degree `N = m + ℓ` of the polynomial part.
    pub fn degree(&self) -> usize {
        (self.m + self.ell) as usize
    }

    pub(crate) fn mm1(&self) -> f64 {
        let m = self.m as f64;
        m * (m + 1.0)
    }

    pub(crate) fn ll1(&self) -> f64 {
        let l = self.ell as f64;
        l * (l + 1.0)
    }
}

/// Result of the Frobenius construction at one energy.
#[derive(Debug, Clone)]
pub struct FrobeniusSolution {
    pub params: ModelParams,
    pub energy: C,
    pub etilde: C,
    /// `a_0 … a_{m+ℓ}` with `a_0 = 1`.
    pub a: Vec<C>,
    /// Zeros `c_r` of the polynomial in `t`, sorted by real then imaginary part.
    pub c: Vec<C>,
    /// Multiplicity of each entry of `c`.
    pub multiplicity: Vec<usize>,
    /// Points with `℘(b_r) = c_r`, signs fixed by the `Ψ′` convention.
    pub b: Vec<C>,
    /// For each `r`, whether `b_r` is the negation of the canonical
    /// representative returned by [`inverse_wp`].
    pub negated: Vec<bool>,
    /// Common value of `Ψ′(b_r)` for the unscaled product.
    pub psi_prime_at_b: C,
    /// Roots `0`, `2ℓ+1`, `ℓ+½` of the indicial polynomial.
    pub indicial_exponents: [f64; 3],
}

/// `Ẽ = e₃ m(m+1) + [E − ℓ(ℓ+1)] ē₃`.
pub fn shift_energy(energy: C, p: &ModelParams, lat: &LatticeData) -> C {
    lat.e3() * p.mm1() + (energy - p.ll1()) * lat.ebar3()
}

/// `(f₀(ρ), f₁(ρ), f₂(ρ))`.
pub fn f_triplet(rho: i64, p: &ModelParams, etilde: C, lat: &LatticeData) -> (C, C, C) {
    let r = rho as f64;
    let l = p.ell as f64;
    let m = p.m as f64;
    let f0 = lat.ebar3() * r * (r - 1.0 - 2.0 * l) * (2.0 * r - 2.0 * l - 1.0);
    let d = r - l;
    let f1 = 2.0 * d * (lat.e1() * (p.mm1() - 3.0 * d * d) - etilde);
    let f2 = lat.ebar2() * (r - m - l) * (r + m - l + 1.0) * (2.0 * r + 1.0 - 2.0 * l);
    (f0.into(), f1, f2.into())
}

/// The banded determinant `F_r`.
pub fn det_f(r: usize, p: &ModelParams, etilde: C, lat: &LatticeData) -> C {
    det_f_sequence(r, p, etilde, lat)[r]
}

/// `[F_0, F_1, …, F_r]` by the three-term recurrence.
pub fn det_f_sequence(r: usize, p: &ModelParams, etilde: C, lat: &LatticeData) -> Vec<C> {
    let f = |rho: i64| f_triplet(rho, p, etilde, lat);
    let mut out = Vec::with_capacity(r + 1);
    out.push(C::new(1.0, 0.0));
    if r == 0 {
        return out;
    }
    out.push(f(0).1);
    for s in 2..=r {
        let (_, f1, _) = f(s as i64 - 1);
        let (f0, _, _) = f(s as i64 - 1);
        let (_, _, f2) = f(s as i64 - 2);
        out.push(f1 * out[s - 1] - f0 * f2 * out[s - 2]);
    }
    out
}

/// The `r × r` band matrix with determinant `F_r`: row `s` holds
/// `f₂(s−1), f₁(s), f₀(s+1)`.
pub fn f_matrix(r: usize, p: &ModelParams, etilde: C, lat: &LatticeData) -> DMatrix<C> {
    let mut m = DMatrix::zeros(r, r);
    for s in 0..r {
        let rho = s as i64;
        m[(s, s)] = f_triplet(rho, p, etilde, lat).1;
        if s + 1 < r {
            m[(s, s + 1)] = f_triplet(rho + 1, p, etilde, lat).0;
            m[(s + 1, s)] = f_triplet(rho, p, etilde, lat).2;
        }
    }
    m
}

/// `∏ |row|` of the band matrix behind `F_r`, the natural scale of `F_r`.
pub fn det_f_scale(r: usize, p: &ModelParams, etilde: C, lat: &LatticeData) -> f64 {
    (0..r as i64)
        .map(|s| {
            let (_, f1, _) = f_triplet(s, p, etilde, lat);
            let up = if s + 1 < r as i64 {
                f_triplet(s + 1, p, etilde, lat).0.norm()
            } else {
                0.0
            };
            let down = if s > 0 {
                f_triplet(s - 1, p, etilde, lat).2.norm()
            } else {
                0.0
            };
            f1.norm() + up + down
        })
        .product()
}

/// Coefficients `a_0 … a_{m+ℓ}` at energy `E`.
///
/// The returned solution has `c`, `b` empty; see [`char_roots`] and
/// [`locate_b`], or [`solve`] for the whole chain.
pub fn coefficients(p: &ModelParams, energy: C, lat: &LatticeData) -> Result<FrobeniusSolution> {
    let etilde = shift_energy(energy, p, lat);
    let l2 = 2 * p.ell as usize;
    let n = p.degree();
    let f = |rho: i64| f_triplet(rho, p, etilde, lat);

    let big_f = det_f_sequence(l2, p, etilde, lat);
    let mut a = Vec::with_capacity(n + 1);
    let mut denom = C::new(1.0, 0.0);
    a.push(C::new(1.0, 0.0));
    for (r, fr) in big_f.iter().enumerate().take(l2 + 1).skip(1) {
        denom *= f(r as i64).0;
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        a.push(sign * fr / denom);
    }

    let nu = n - l2;
    if nu > 0 {
        // trailing minors D_0 … D_ν of the rows 2ℓ+1 … N
        let mut d = vec![C::new(1.0, 0.0); nu + 1];
        d[1] = f(n as i64).1;
        for r in 2..=nu {
            let top = (n - r + 1) as i64;
            d[r] = f(top).1 * d[r - 1] - f(top + 1).0 * f(top).2 * d[r - 2];
        }
        let scale: f64 = ((l2 + 1)..=n)
            .map(|s| {
                let s = s as i64;
                let up = if s < n as i64 { f(s + 1).0.norm() } else { 0.0 };
                let down = if s > (l2 + 1) as i64 {
                    f(s - 1).2.norm()
                } else {
                    0.0
                };
                f(s).1.norm() + up + down
            })
            .product();
        if d[nu].norm() <= 1e-13 * scale {
            return Err(Error::degenerate(
                energy,
                format!("the truncation minor D_{nu} vanishes"),
            ));
        }
        let a2l = a[l2];
        let mut prod = C::new(1.0, 0.0);
        for r in 1..=nu {
            prod *= f((l2 + r - 1) as i64).2;
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            a.push(sign * d[nu - r] * prod / d[nu] * a2l);
        }
    }

    let amax = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if a[n].norm() <= 1e-13 * amax {
        return Err(Error::degenerate(
            energy,
            "leading coefficient vanishes, the polynomial drops degree",
        ));
    }

    Ok(FrobeniusSolution {
        params: *p,
        energy,
        etilde,
        a,
        c: Vec::new(),
        multiplicity: Vec::new(),
        b: Vec::new(),
        negated: Vec::new(),
        psi_prime_at_b: C::new(0.0, 0.0),
        indicial_exponents: [0.0, 2.0 * p.ell as f64 + 1.0, p.ell as f64 + 0.5],
    })
}

/// Residuals of the recurrence for `r = 0 … N+1`, relative to `max |a|`.
///
/// Entries `N` and `N+1` are the conditions `a_{N+1} = a_{N+2} = 0`.
pub fn recurrence_residuals(sol: &FrobeniusSolution, lat: &LatticeData) -> Vec<f64> {
    let p = &sol.params;
    let n = p.degree();
    let at = |r: i64| -> C {
        if r < 0 || r as usize > n {
            C::new(0.0, 0.0)
        } else {
            sol.a[r as usize]
        }
    };
    let amax = sol.a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    (0..=(n as i64 + 1))
        .map(|r| {
            let (f0, _, _) = f_triplet(r + 1, p, sol.etilde, lat);
            let (_, f1, _) = f_triplet(r, p, sol.etilde, lat);
            let (_, _, f2) = f_triplet(r - 1, p, sol.etilde, lat);
            let res = f0 * at(r + 1) + f1 * at(r) + f2 * at(r - 1);
            let scale = (f0.norm() + f1.norm() + f2.norm()) * amax;
            if scale == 0.0 {
                0.0
            } else {
                res.norm() / scale
            }
        })
        .collect()
}

fn horner(coef: &[C], y: C) -> (C, C) {
    let mut p = C::new(0.0, 0.0);
    let mut dp = C::new(0.0, 0.0);
    for &a in coef.iter().rev() {
        dp = dp * y + p;
        p = p * y + a;
    }
    (p, dp)
}

/// Zeros `y_r` of `Σ a_r y^r`.
fn poly_roots(a: &[C]) -> Result<Vec<C>> {
    let n = a.len() - 1;
    let lead = a[n];
    let mut comp = DMatrix::<C>::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -a[n - 1 - j] / lead;
    }
    for i in 1..n {
        comp[(i, i - 1)] = C::new(1.0, 0.0);
    }
    let eig = comp
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::numeric("companion eigenvalues", None))?;
    let scale = |y: C| {
        a.iter()
            .enumerate()
            .map(|(r, c)| c.norm() * y.norm().powi(r as i32))
            .sum::<f64>()
    };
    let mut roots = Vec::with_capacity(n);
    for &y0 in eig.iter() {
        let mut y = y0;
        for _ in 0..8 {
            let (p, dp) = horner(a, y);
            if dp.norm() == 0.0 || p.norm() <= 1e-16 * scale(y) {
                break;
            }
            let step = p / dp;
            let next = y - step;
            if horner(a, next).0.norm() >= p.norm() {
                break;
            }
            y = next;
        }
        if horner(a, y).0.norm() > 1e-9 * scale(y) {
            return Err(Error::numeric("polynomial root polish", Some(y)));
        }
        roots.push(y);
    }
    Ok(roots)
}

fn cmp_c(a: &C, b: &C) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Zeros `c_r` of the polynomial `Σ a_r [(e₁ − t)/ē₂]^r` in `t`.
pub fn char_roots(sol: &FrobeniusSolution, lat: &LatticeData) -> Result<(Vec<C>, Vec<usize>)> {
    if sol.a.len() < 2 {
        return Ok((Vec::new(), Vec::new()));
    }
    let ys = poly_roots(&sol.a)?;
    let mut c: Vec<C> = ys.iter().map(|&y| lat.e1() - lat.ebar2() * y).collect();
    c.sort_by(cmp_c);
    let mult = c
        .iter()
        .map(|ci| {
            c.iter()
                .filter(|cj| (*ci - **cj).norm() <= 1e-6 * ci.norm().max(1.0))
                .count()
        })
        .collect();
    Ok((c, mult))
}

/// `Ψ′(b_j)` for the unscaled product `∏(℘ − c_r)/(℘ − e₁)^ℓ`.
fn psi_prime_at(j: usize, wp_prime_b: C, c: &[C], ell: u32, lat: &LatticeData) -> C {
    let mut v = wp_prime_b / (c[j] - lat.e1()).powu(ell);
    for (r, cr) in c.iter().enumerate() {
        if r != j {
            v *= c[j] - cr;
        }
    }
    v
}

/// Fix `b_r` with `℘(b_r) = c_r` so that all `Ψ′(b_r)` agree.
pub fn locate_b(mut sol: FrobeniusSolution, lat: &LatticeData) -> Result<FrobeniusSolution> {
    if sol.c.is_empty() && sol.params.degree() > 0 {
        let (c, mult) = char_roots(&sol, lat)?;
        sol.c = c;
        sol.multiplicity = mult;
    }
    if sol.multiplicity.iter().any(|&k| k > 1) {
        return Err(Error::degenerate(
            sol.energy,
            "repeated zeros of the product polynomial (band edge)",
        ));
    }
    let ell = sol.params.ell;
    let mut b = Vec::with_capacity(sol.c.len());
    let mut negated = Vec::with_capacity(sol.c.len());
    let mut common: Option<C> = None;
    for j in 0..sol.c.len() {
        let cj = sol.c[j];
        let near_half_period = [lat.e1(), lat.e2(), lat.e3()]
            .iter()
            .any(|&e| (cj - e).norm() < 1e-9 * lat.ebar3());
        if near_half_period {
            return Err(Error::degenerate(
                sol.energy,
                "a zero coincides with a half-period value e_i (band edge)",
            ));
        }
        let bj = inverse_wp(cj, lat)?;
        let d = wp_derivs(bj, lat)?;
        let v = psi_prime_at(j, d.wp_prime, &sol.c, ell, lat);
        match common {
            None => {
                common = Some(v);
                b.push(bj);
                negated.push(false);
            }
            Some(w) => {
                let tol = 1e-8 * w.norm();
                if (v - w).norm() <= tol {
                    b.push(bj);
                    negated.push(false);
                } else if (v + w).norm() <= tol {
                    b.push(reduce_to_cell(-bj, lat));
                    negated.push(true);
                } else {
                    return Err(Error::Consistency(format!(
                        "Ψ′(b_{j}) = {v} does not match ±{w}"
                    )));
                }
            }
        }
    }
    sol.b = b;
    sol.negated = negated;
    sol.psi_prime_at_b = common.unwrap_or(C::new(1.0, 0.0));
    if sol.psi_prime_at_b.norm() == 0.0 {
        return Err(Error::degenerate(sol.energy, "Ψ′ vanishes at the zeros"));
    }
    Ok(sol)
}

/// `Ψ′(b_r)` for every located `b_r`, recomputed from `℘′(b_r)`.
pub fn psi_prime_values(sol: &FrobeniusSolution, lat: &LatticeData) -> Result<Vec<C>> {
    sol.b
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let d = wp_derivs(*b, lat)?;
            Ok(psi_prime_at(j, d.wp_prime, &sol.c, sol.params.ell, lat))
        })
        .collect()
}

/// Coefficients, zeros and sign-fixed `b_r` in one call.
pub fn solve(p: &ModelParams, energy: C, lat: &LatticeData) -> Result<FrobeniusSolution> {
    let mut sol = coefficients(p, energy, lat)?;
    let (c, mult) = char_roots(&sol, lat)?;
    sol.c = c;
    sol.multiplicity = mult;
    locate_b(sol, lat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{lattice_from_modulus, wp};

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn shifted_energy_specialisations() {
        let lat = lattice_from_modulus(0.95).unwrap();
        let p = ModelParams::new(3, 1, 0.95).unwrap();
        let e = c(4.75);
        let et = shift_energy(e, &p, &lat);
        assert!((et - (lat.ebar3() * (e - 2.0) + 12.0 * lat.e3())).norm() < 1e-15);
        let et = shift_energy(c(2.0), &p, &lat);
        assert!((et - 12.0 * lat.e3()).norm() < 1e-15);
    }

    #[test]
    fn f_symmetries() {
        let lat = lattice_from_modulus(0.37).unwrap();
        for &(m, l) in &[(3u32, 1u32), (4, 2), (2, 2), (5, 0)] {
            let p = ModelParams::new(m, l, 0.37).unwrap();
            let et = C::new(0.3, -0.2);
            let l2 = 2 * l as i64;
            for nu in 1..=5i64 {
                let f = |r| f_triplet(r, &p, et, &lat);
                assert!((f(l2 - nu).0 + f(nu + 1).0).norm() < 1e-12);
                assert!((f(l2 - nu).1 + f(nu).1).norm() < 1e-12);
                assert!((f(l2 - nu - 1).2 + f(nu).2).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn specialised_f_for_three_one() {
        let lat = lattice_from_modulus(0.95).unwrap();
        let p = ModelParams::new(3, 1, 0.95).unwrap();
        for r in -2..7i64 {
            let (f0, _, f2) = f_triplet(r, &p, c(0.0), &lat);
            let x = r as f64;
            assert!((f0.re - lat.ebar3() * x * (x - 3.0) * (2.0 * x - 3.0)).abs() < 1e-12);
            assert!((f2.re - lat.ebar2() * (x - 4.0) * (x + 3.0) * (2.0 * x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn first_determinants() {
        let lat = lattice_from_modulus(0.6).unwrap();
        let p = ModelParams::new(3, 2, 0.6).unwrap();
        let et = c(0.8);
        let f = |r| f_triplet(r, &p, et, &lat);
        assert_eq!(det_f(1, &p, et, &lat), f(0).1);
        let f2 = f(1).1 * f(0).1 - f(0).2 * f(1).0;
        assert!((det_f(2, &p, et, &lat) - f2).norm() < 1e-13 * f2.norm());
    }

    #[test]
    fn lame_one_single_coefficient() {
        let lat = lattice_from_modulus(0.5).unwrap();
        let p = ModelParams::new(1, 0, 0.5).unwrap();
        let sol = solve(&p, c(0.3), &lat).unwrap();
        assert_eq!(sol.a.len(), 2);
        // 1 + a₁y = 0 with y = (e₁ − t)/ē₂
        let t = lat.e1() + lat.ebar2() / sol.a[1];
        assert!((sol.c[0] - t).norm() < 1e-13);
        // classical Lamé relation ℘(b) = −E − 2e₃
        assert!((sol.c[0] - (-0.3 - 2.0 * lat.e3())).norm() < 1e-13);
        assert!(recurrence_residuals(&sol, &lat).iter().all(|&r| r < 1e-14));
        assert!((wp(sol.b[0], &lat).unwrap() - sol.c[0]).norm() < 1e-11);
    }

    #[test]
    fn equal_indices_give_zero_odd_coefficient() {
        let lat = lattice_from_modulus(0.8).unwrap();
        for l in 1..=3u32 {
            let p = ModelParams::new(l, l, 0.8).unwrap();
            let sol = coefficients(&p, c(3.3), &lat).unwrap();
            assert_eq!(sol.a.len(), 2 * l as usize + 1);
            let res = recurrence_residuals(&sol, &lat);
            assert!(res.iter().all(|&r| r < 1e-12), "{res:?}");
        }
    }

    #[test]
    fn band_edge_is_degenerate() {
        let lat = lattice_from_modulus(0.95).unwrap();
        let p = ModelParams::new(3, 1, 0.95).unwrap();
        let err = solve(&p, c(4.8), &lat).unwrap_err();
        assert!(matches!(err, Error::DegenerateEnergy { .. }), "{err}");
    }

    #[test]
    fn rejects_ell_above_m() {
        assert!(ModelParams::new(1, 2, 0.5).is_err());
    }
}
