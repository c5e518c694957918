//! The odd theta function `θ₁(v | q)` and its first three derivatives.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub(crate) struct Theta1 {
    /// `2(−1)ⁿ q^{(n+½)²}` for `n = 0, 1, …`
    weights: Vec<f64>,
}

impl Theta1 {
    /// Series for the nome `q = exp(−a)`, `a > 0`.
    pub(crate) fn new(a: f64) -> Self {
        let n_terms = (((45.0 / a).sqrt()).ceil() as usize + 2).min(200);
        let weights = (0..n_terms)
            .map(|n| {
                let h = n as f64 + 0.5;
                let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
                sign * (-a * h * h).exp()
            })
            .collect();
        Theta1 { weights }
    }

    /// `[θ₁, θ₁′, θ₁″, θ₁‴]` at `v`, derivatives taken in `v`.
    pub(crate) fn eval(&self, v: Complex64) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (n, &w) in self.weights.iter().enumerate() {
            let k = (2 * n + 1) as f64;
            let (s, c) = ((k * v).sin(), (k * v).cos());
            out[0] += w * s;
            out[1] += w * k * c;
            out[2] -= w * k * k * s;
            out[3] -= w * k * k * k * c;
        }
        out
    }

    /// `θ₁′(0)` and `θ₁‴(0)`.
    pub(crate) fn odd_derivatives_at_zero(&self) -> (f64, f64) {
        let mut d1 = 0.0;
        let mut d3 = 0.0;
        for (n, &w) in self.weights.iter().enumerate() {
            let k = (2 * n + 1) as f64;
            d1 += w * k;
            d3 -= w * k * k * k;
        }
        (d1, d3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_triple_product_at_zero() {
        // θ₁′(0) = 2 q^{1/4} ∏ (1 − q^{2n})³
        let a: f64 = 1.3;
        let q = (-a).exp();
        let th = Theta1::new(a);
        let (d1, _) = th.odd_derivatives_at_zero();
        let mut prod = 2.0 * q.powf(0.25);
        for n in 1..60 {
            prod *= (1.0 - q.powi(2 * n)).powi(3);
        }
        assert!((d1 - prod).abs() < 1e-14 * prod);
    }

    #[test]
    fn derivatives_match_differences() {
        let th = Theta1::new(0.9);
        let v = Complex64::new(0.4, 0.3);
        let h = 1e-3;
        let f = |t: Complex64| th.eval(t);
        for k in 0..3 {
            let d = (f(v - 2.0 * h)[k] - 8.0 * f(v - h)[k] + 8.0 * f(v + h)[k] - f(v + 2.0 * h)[k])
                / (12.0 * h);
            let exact = f(v)[k + 1];
            assert!(
                (d - exact).norm() < 1e-9 * (1.0 + exact.norm()),
                "order {k}"
            );
        }
    }
}
