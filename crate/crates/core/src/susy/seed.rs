//! Seed solutions `u = ψ_s + λ ψ_{−s}` at a factorization energy.

use num_complex::Complex64;

use crate::bloch::{BlochPair, Sign};
use crate::error::Result;

type C = Complex64;

/// A seed built from the Bloch pair at its energy.
#[derive(Debug, Clone)]
pub struct SeedFn {
    pub pair: BlochPair,
    pub sign: Sign,
    pub lambda: f64,
}

impl SeedFn {
    pub fn new(pair: BlochPair, sign: Sign, lambda: f64) -> Self {
        SeedFn { pair, sign, lambda }
    }

    pub fn energy(&self) -> f64 {
        self.pair.energy
    }

    /// `ln(λ R)` with `R = ψ_{−s}/ψ_s`, or `None` when `λ = 0`.
    fn ln_lambda_r(&self, x: f64) -> Result<Option<C>> {
        if self.lambda == 0.0 {
            return Ok(None);
        }
        let lr = self.pair.ln_psi(x, self.sign.flip())? - self.pair.ln_psi(x, self.sign)?;
        Ok(Some(C::new(self.lambda, 0.0).ln() + lr))
    }

    /// `ln u(x)`.
    pub fn ln_u(&self, x: f64) -> Result<C> {
        let base = self.pair.ln_psi(x, self.sign)?;
        Ok(match self.ln_lambda_r(x)? {
            None => base,
            Some(l) => base + ln_one_plus_exp(l),
        })
    }

    /// `u(x)`.
    pub fn value(&self, x: f64) -> Result<C> {
        Ok(self.ln_u(x)?.exp())
    }

    /// `(u, u′)` divided by a common positive factor.
    ///
    /// The factor keeps values representable far from the origin; ratios
    /// such as `u′/u` or Wronskian quotients are unaffected.
    pub fn scaled_value_and_derivative(&self, x: f64) -> Result<(C, C, f64)> {
        let la = self.pair.ln_psi(x, self.sign)?;
        let da = self.pair.log_derivs(x, self.sign)?[0];
        if self.lambda == 0.0 {
            let a = C::new(0.0, la.im).exp();
            return Ok((a, a * da, la.re));
        }
        let lb = self.pair.ln_psi(x, self.sign.flip())? + C::new(self.lambda, 0.0).ln();
        let db = self.pair.log_derivs(x, self.sign.flip())?[0];
        let scale = la.re.max(lb.re);
        let a = (la - scale).exp();
        let b = (lb - scale).exp();
        Ok((a + b, a * da + b * db, scale))
    }

    /// `(u, u′)` without rescaling.
    pub fn value_and_derivative(&self, x: f64) -> Result<(C, C)> {
        let (u, du, s) = self.scaled_value_and_derivative(x)?;
        let f = s.exp();
        Ok((u * f, du * f))
    }

    /// First three derivatives of `ln u`.
    pub fn log_derivs(&self, x: f64) -> Result<[C; 3]> {
        let base = self.pair.log_derivs(x, self.sign)?;
        let l = match self.ln_lambda_r(x)? {
            None => return Ok(base),
            Some(l) => l,
        };
        let other = self.pair.log_derivs(x, self.sign.flip())?;
        let (q, h) = mix(l, &base, &other);
        let p = q * (1.0 - q);
        Ok([
            base[0] + h[0] * q,
            base[1] + h[1] * q + h[0] * h[0] * p,
            base[2] + h[2] * q + 3.0 * h[0] * h[1] * p + h[0] * h[0] * h[0] * p * (1.0 - 2.0 * q),
        ])
    }

    /// Derivatives of `ln φ = ln(1 + λR)`, the part of `ln u` beyond `ln ψ_s`.
    pub fn defect_log_derivs(&self, x: f64) -> Result<[C; 3]> {
        let l = match self.ln_lambda_r(x)? {
            None => return Ok([C::new(0.0, 0.0); 3]),
            Some(l) => l,
        };
        let base = self.pair.log_derivs(x, self.sign)?;
        let other = self.pair.log_derivs(x, self.sign.flip())?;
        let (q, h) = mix(l, &base, &other);
        let p = q * (1.0 - q);
        Ok([
            h[0] * q,
            h[1] * q + h[0] * h[0] * p,
            h[2] * q + 3.0 * h[0] * h[1] * p + h[0] * h[0] * h[0] * p * (1.0 - 2.0 * q),
        ])
    }

    /// Multiplier of `ψ_s` over one period.
    pub fn multiplier(&self) -> C {
        match self.sign {
            Sign::Plus => self.pair.multiplier(),
            Sign::Minus => 1.0 / self.pair.multiplier(),
        }
    }

    /// Sign of the Bloch component that dominates `u` as `x → +∞`
    /// (`direction > 0`) or `x → −∞`.
    pub fn dominant(&self, direction: f64) -> Sign {
        if self.lambda == 0.0 {
            return self.sign;
        }
        let grows = self.multiplier().norm() > 1.0;
        if grows == (direction > 0.0) {
            self.sign
        } else {
            self.sign.flip()
        }
    }
}

/// `q = λR/(1 + λR)` and `h = (ln R)′, (ln R)″, (ln R)‴`.
fn mix(l: C, base: &[C; 3], other: &[C; 3]) -> (C, [C; 3]) {
    let q = 1.0 / (1.0 + (-l).exp());
    let h = [other[0] - base[0], other[1] - base[1], other[2] - base[2]];
    (q, h)
}

/// `ln(1 + eˡ)` without overflow.
pub(crate) fn ln_one_plus_exp(l: C) -> C {
    if l.re > 0.0 {
        l + (1.0 + (-l).exp()).ln()
    } else {
        (1.0 + l.exp()).ln()
    }
}
