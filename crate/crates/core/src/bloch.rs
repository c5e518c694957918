//! The potential, the product solution and the Bloch pair `ψ±`.

use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::{
    jacobi_real_with_k, lattice_from_modulus, ln_wsigma, wp, wp_derivs, wzeta, LatticeData,
};
use crate::error::{Error, Result};
use crate::frobenius::{self, FrobeniusSolution, ModelParams};

type C = Complex64;

/// Which of the two Bloch solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// `V(x) = m(m+1)k² sn²x + ℓ(ℓ+1)k² cn²x / dn²x`.
#[derive(Debug, Clone, Copy)]
pub struct PotentialFn {
    pub params: ModelParams,
    kk: f64,
}

impl PotentialFn {
    pub fn new(params: ModelParams) -> Result<Self> {
        let kk = crate::elliptic::complete_k(params.k2)?;
        Ok(PotentialFn { params, kk })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k2 = self.params.k2;
        let j = jacobi_real_with_k(x, k2, self.kk);
        self.params.mm1() * k2 * j.sn * j.sn + self.params.ll1() * k2 * j.cn * j.cn / (j.dn * j.dn)
    }

    /// `2K`, or `K` when `m = ℓ`.
    pub fn period(&self) -> f64 {
        period_of(&self.params, self.kk)
    }

    /// `K`.
    pub fn quarter_period(&self) -> f64 {
        self.kk
    }

    /// Largest value of `V` on a period.
    pub fn max_value(&self) -> f64 {
        let n = 512;
        (0..=n)
            .map(|i| self.eval(self.period() * i as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn period_of(p: &ModelParams, kk: f64) -> f64 {
    if p.m == p.ell {
        kk
    } else {
        2.0 * kk
    }
}

/// `V(x)` for the parameters `p`.
pub fn potential(x: f64, p: &ModelParams) -> Result<f64> {
    Ok(PotentialFn::new(*p)?.eval(x))
}

/// `Ψ(z) = ∏[℘(z) − c_r] / [℘(z) − e₁]^ℓ`, scaled so that `Ψ′(b_r) = 1`.
pub fn product_solution(z: C, sol: &FrobeniusSolution, lat: &LatticeData) -> Result<C> {
    let p = wp(z, lat)?;
    let mut v = C::new(1.0, 0.0);
    for c in &sol.c {
        v *= p - c;
    }
    Ok(v / (p - lat.e1()).powu(sol.params.ell) / sol.psi_prime_at_b)
}

/// The two Bloch solutions at a fixed real energy.
#[derive(Debug, Clone)]
pub struct BlochPair {
    pub params: ModelParams,
    pub energy: f64,
    pub sol: FrobeniusSolution,
    lat: LatticeData,
    root: f64,
    sum_zeta_b: C,
    sum_b: C,
    ln_norm: [C; 2],
    x0: f64,
    multiplier: C,
}

impl BlochPair {
    /// Builds `ψ±` on the default lattice.
    pub fn new(params: ModelParams, energy: f64) -> Result<Self> {
        let lat = lattice_from_modulus(params.k2)?;
        bloch_pair(&params, energy, &lat)
    }

    pub fn lattice(&self) -> &LatticeData {
        &self.lat
    }

    /// The `b_r` used by `ψ⁺`.
    pub fn b(&self) -> &[C] {
        &self.sol.b
    }

    /// Period `T` of the potential.
    pub fn period(&self) -> f64 {
        period_of(&self.params, self.lat.K())
    }

    /// Floquet multiplier `ψ⁺(x + T) / ψ⁺(x)`.
    pub fn multiplier(&self) -> C {
        self.multiplier
    }

    /// `ln` of the multiplier, with imaginary part in `(−π, π]`.
    pub fn floquet_exponent(&self) -> C {
        self.multiplier.ln()
    }

    /// `x₀` with `ψ⁺(x₀) = ψ⁻(−x₀) = 1`.
    pub fn normalization_point(&self) -> f64 {
        self.x0
    }

    /// `ln` of the factor removed from the σ-product form of `ψ±`.
    pub fn ln_normalization(&self, sign: Sign) -> C {
        self.ln_norm[idx(sign)]
    }

    fn ln_psi_raw(&self, x: f64, sign: Sign) -> Result<C> {
        let lat = &self.lat;
        let z = lat.z_of_x(x);
        let s = sign.value();
        let mut acc = C::new(0.0, 0.0);
        for b in &self.sol.b {
            acc += ln_wsigma(z + s * b, lat)?;
        }
        let ell = self.params.ell as f64;
        let m = self.params.m as f64;
        if ell > 0.0 {
            acc -= ell * ln_wsigma(z + lat.omega1(), lat)?;
        }
        acc -= m * ln_wsigma(z, lat)?;
        acc += (x / self.root) * (ell * lat.eta1() - s * self.sum_zeta_b);
        Ok(acc)
    }

    /// `ln ψ±(x)`, defined up to multiples of `2πi`.
    pub fn ln_psi(&self, x: f64, sign: Sign) -> Result<C> {
        Ok(self.ln_psi_raw(x, sign)? - self.ln_norm[idx(sign)])
    }

    /// `ψ±(x)`.
    pub fn psi(&self, x: f64, sign: Sign) -> Result<C> {
        let l = self.ln_psi(x, sign)?;
        if l.re == f64::NEG_INFINITY {
            Ok(C::new(0.0, 0.0))
        } else {
            Ok(l.exp())
        }
    }

    /// First three `x`-derivatives of `ln ψ±`.
    pub fn log_derivs(&self, x: f64, sign: Sign) -> Result<[C; 3]> {
        let lat = &self.lat;
        let z = lat.z_of_x(x);
        let s = sign.value();
        let ell = self.params.ell as f64;
        let m = self.params.m as f64;
        let mut d = [C::new(0.0, 0.0); 3];
        for b in &self.sol.b {
            let w = wp_derivs(z + s * b, lat)?;
            d[0] += w.zeta;
            d[1] -= w.wp;
            d[2] -= w.wp_prime;
        }
        let w = wp_derivs(z + lat.omega1(), lat)?;
        d[0] -= ell * w.zeta;
        d[1] += ell * w.wp;
        d[2] += ell * w.wp_prime;
        let w = wp_derivs(z, lat)?;
        d[0] -= m * w.zeta;
        d[1] += m * w.wp;
        d[2] += m * w.wp_prime;
        d[0] += ell * lat.eta1() - s * self.sum_zeta_b;
        let r = self.root;
        Ok([d[0] / r, d[1] / (r * r), d[2] / (r * r * r)])
    }

    /// `(ψ±, ψ±′)` at `x`.
    pub fn psi_and_derivative(&self, x: f64, sign: Sign) -> Result<(C, C)> {
        let psi = self.psi(x, sign)?;
        let d = self.log_derivs(x, sign)?;
        Ok((psi, psi * d[0]))
    }

    /// `W(ψ⁺, ψ⁻) = ψ⁺ψ⁻′ − ψ⁺′ψ⁻`.
    pub fn wronskian(&self, x: f64) -> Result<C> {
        let lp = self.log_derivs(x, Sign::Plus)?[0];
        let lm = self.log_derivs(x, Sign::Minus)?[0];
        let prod = (self.ln_psi(x, Sign::Plus)? + self.ln_psi(x, Sign::Minus)?).exp();
        Ok(prod * (lm - lp))
    }

    /// `Ψ(z)` from the product formula with the `Ψ′(b) = 1` scaling.
    pub fn product_solution(&self, z: C) -> Result<C> {
        product_solution(z, &self.sol, &self.lat)
    }

    /// `Σ b_r`.
    pub fn sum_b(&self) -> C {
        self.sum_b
    }

    /// `Σ ζ(b_r)`.
    pub fn sum_zeta_b(&self) -> C {
        self.sum_zeta_b
    }
}

fn idx(sign: Sign) -> usize {
    match sign {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

/// Builds the Bloch pair at real energy `E`.
///
/// Normalized so that `ψ⁺(x₀) = ψ⁻(−x₀) = 1` with `x₀ = K` (or `K/2` when
/// a solution vanishes there). Since `V` is even this gives `ψ⁻(x) = ψ⁺(−x)`.
pub fn bloch_pair(p: &ModelParams, energy: f64, lat: &LatticeData) -> Result<BlochPair> {
    if p.m == 0 {
        return Err(Error::Domain(
            "m = 0 gives the free particle; need m ≥ 1".into(),
        ));
    }
    if (lat.k2() - p.k2).abs() > 1e-15 {
        return Err(Error::Domain(format!(
            "lattice modulus {} differs from the model modulus {}",
            lat.k2(),
            p.k2
        )));
    }
    if !energy.is_finite() {
        return Err(Error::Domain(format!("non-finite energy {energy}")));
    }
    let sol = frobenius::solve(p, energy.into(), lat)?;
    let mut sum_zeta_b = C::new(0.0, 0.0);
    let mut sum_b = C::new(0.0, 0.0);
    let mut lift = C::new(0.0, 0.0);
    for b in &sol.b {
        let zb = wzeta(*b, lat)?;
        sum_zeta_b += zb;
        sum_b += b;
        lift += lat.eta1() * b - lat.omega1() * zb;
    }
    let mut pair = BlochPair {
        params: *p,
        energy,
        sol,
        lat: lat.clone(),
        root: lat.ebar3().sqrt(),
        sum_zeta_b,
        sum_b,
        ln_norm: [C::new(0.0, 0.0); 2],
        x0: lat.K(),
        multiplier: (2.0 * lift).exp(),
    };

    for x0 in [lat.K(), 0.5 * lat.K(), 0.3 * lat.K()] {
        let lp = pair.ln_psi_raw(x0, Sign::Plus)?;
        let lm = pair.ln_psi_raw(-x0, Sign::Minus)?;
        if lp.re.is_finite() && lm.re.is_finite() && lp.re > -600.0 && lm.re > -600.0 {
            pair.ln_norm = [lp, lm];
            pair.x0 = x0;
            break;
        }
    }

    if p.m == p.ell {
        // the potential has period K; pick the root of the 2K multiplier
        let x = pair.x0 + 0.1234;
        let ratio = (pair.ln_psi(x + lat.K(), Sign::Plus)? - pair.ln_psi(x, Sign::Plus)?).exp();
        let root = lift.exp();
        pair.multiplier = if (ratio - root).norm() <= (ratio + root).norm() {
            root
        } else {
            -root
        };
    }
    Ok(pair)
}

/// Residual `max |−ψ″ + (V − E)ψ| / max |ψ|` over one period, from
/// five-point central differences with step `h`.
pub fn schrodinger_residual(pair: &BlochPair, sign: Sign, h: f64, samples: usize) -> Result<f64> {
    let v = PotentialFn::new(pair.params)?;
    let t = pair.period();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..samples {
        let x = t * (i as f64 + 0.5) / samples as f64;
        let f = |y: f64| pair.psi(y, sign);
        let (fm2, fm1, f0, fp1, fp2) = (
            f(x - 2.0 * h)?,
            f(x - h)?,
            f(x)?,
            f(x + h)?,
            f(x + 2.0 * h)?,
        );
        let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
        let res = -d2 + (v.eval(x) - pair.energy) * f0;
        worst = worst.max(res.norm());
        scale = scale.max(f0.norm());
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_special_points() {
        let p = ModelParams::new(3, 1, 0.95).unwrap();
        let v = PotentialFn::new(p).unwrap();
        assert!((v.eval(0.0) - 2.0 * 0.95).abs() < 1e-14);
        assert!((v.eval(v.quarter_period()) - 12.0 * 0.95).abs() < 1e-12);
        for x in [0.3, 1.7, -2.2] {
            assert!((v.eval(x + v.period()) - v.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn lame_one_pair_solves_equation() {
        let p = ModelParams::new(1, 0, 0.5).unwrap();
        let pair = BlochPair::new(p, 0.3).unwrap();
        let r = schrodinger_residual(&pair, Sign::Plus, 1e-3, 64).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn three_one_gap_energy() {
        let p = ModelParams::new(3, 1, 0.95).unwrap();
        let pair = BlochPair::new(p, 4.75).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let r = schrodinger_residual(&pair, sign, 1e-3, 64).unwrap();
            assert!(r < 1e-6, "{r}");
        }
        let mu = pair.multiplier();
        assert!(mu.im.abs() < 1e-7 * mu.norm(), "{mu}");
    }

    #[test]
    fn zero_m_rejected() {
        let p = ModelParams::new(0, 0, 0.5).unwrap();
        assert!(matches!(BlochPair::new(p, 1.0), Err(Error::Domain(_))));
    }
}
