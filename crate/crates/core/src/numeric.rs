//! Small numerical helpers shared by the checks.

use num_complex::Complex64;

use crate::error::Result;

/// Five-point central second derivative.
pub fn second_derivative(
    f: impl Fn(f64) -> Result<Complex64>,
    x: f64,
    h: f64,
) -> Result<Complex64> {
    let (a, b, c, d, e) = (
        f(x - 2.0 * h)?,
        f(x - h)?,
        f(x)?,
        f(x + h)?,
        f(x + 2.0 * h)?,
    );
    Ok((-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h))
}

/// Eighth-order central first derivative.
pub fn first_derivative8(
    f: impl Fn(f64) -> Result<Complex64>,
    x: f64,
    h: f64,
) -> Result<Complex64> {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let mut s = Complex64::new(0.0, 0.0);
    for (k, w) in W.iter().enumerate() {
        let t = (k + 1) as f64 * h;
        s += *w * (f(x + t)? - f(x - t)?);
    }
    Ok(s / h)
}

/// Eighth-order central second derivative.
pub fn second_derivative8(
    f: impl Fn(f64) -> Result<Complex64>,
    x: f64,
    h: f64,
) -> Result<Complex64> {
    const W: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    let mut s = -205.0 / 72.0 * f(x)?;
    for (k, w) in W.iter().enumerate() {
        let t = (k + 1) as f64 * h;
        s += *w * (f(x + t)? + f(x - t)?);
    }
    Ok(s / (h * h))
}

/// Composite Simpson rule on `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, n: usize) -> Result<f64> {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64)?;
    }
    Ok(s * h / 3.0)
}

/// Uniform grid of `n` points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_exponential() {
        let f = |x: f64| Ok(Complex64::new(x.exp(), 0.0));
        let d1 = first_derivative8(f, 0.3, 1e-2).unwrap();
        let d2 = second_derivative8(f, 0.3, 1e-2).unwrap();
        let d2b = second_derivative(f, 0.3, 1e-3).unwrap();
        let e = 0.3f64.exp();
        assert!((d1.re - e).abs() < 1e-13);
        assert!((d2.re - e).abs() < 1e-11);
        assert!((d2b.re - e).abs() < 1e-8);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| Ok(x * x * x - x), 0.0, 2.0, 4).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }
}
