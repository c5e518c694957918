//! Transfer matrix over one period and the Hill discriminant.
//!
//! Used as an independent check on the closed-form Bloch solutions and to
//! locate band edges for general `(m, ℓ)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::bloch::PotentialFn;
use crate::elliptic::LatticeData;
use crate::error::{Error, Result};
use crate::frobenius::ModelParams;

/// Default number of RK4 steps per period.
pub const DEFAULT_STEPS: usize = 16384;

/// Classical RK4 integrator of `y″ = (V − E) y` over one period.
#[derive(Debug, Clone)]
pub struct HillSolver {
    pub params: ModelParams,
    period: f64,
    steps: usize,
    v_half: Vec<f64>,
    v_max: f64,
}

impl HillSolver {
    pub fn new(params: ModelParams, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Domain("need at least two integration steps".into()));
        }
        let v = PotentialFn::new(params)?;
        let period = v.period();
        let h = period / steps as f64;
        let v_half: Vec<f64> = (0..=2 * steps)
            .map(|j| v.eval(0.5 * h * j as f64))
            .collect();
        let v_max = v_half.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(HillSolver {
            params,
            period,
            steps,
            v_half,
            v_max,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn max_potential(&self) -> f64 {
        self.v_max
    }

    /// Monodromy matrix `[[y₁, y₂], [y₁′, y₂′]]` at `x = T` from the identity.
    pub fn monodromy(&self, energy: f64) -> [[f64; 2]; 2] {
        let h = self.period / self.steps as f64;
        // columns: (y, y') of the two fundamental solutions
        let mut y = [[1.0, 0.0], [0.0, 1.0]];
        let f = |q: f64, s: &[[f64; 2]; 2]| -> [[f64; 2]; 2] {
            [[s[1][0], s[1][1]], [q * s[0][0], q * s[0][1]]]
        };
        let add = |s: &[[f64; 2]; 2], k: &[[f64; 2]; 2], c: f64| -> [[f64; 2]; 2] {
            [
                [s[0][0] + c * k[0][0], s[0][1] + c * k[0][1]],
                [s[1][0] + c * k[1][0], s[1][1] + c * k[1][1]],
            ]
        };
        for i in 0..self.steps {
            let q0 = self.v_half[2 * i] - energy;
            let q1 = self.v_half[2 * i + 1] - energy;
            let q2 = self.v_half[2 * i + 2] - energy;
            let k1 = f(q0, &y);
            let k2 = f(q1, &add(&y, &k1, 0.5 * h));
            let k3 = f(q1, &add(&y, &k2, 0.5 * h));
            let k4 = f(q2, &add(&y, &k3, h));
            for r in 0..2 {
                for c in 0..2 {
                    y[r][c] += h / 6.0 * (k1[r][c] + 2.0 * k2[r][c] + 2.0 * k3[r][c] + k4[r][c]);
                }
            }
        }
        y
    }

    /// Trace of the monodromy matrix.
    pub fn discriminant(&self, energy: f64) -> f64 {
        let m = self.monodromy(energy);
        m[0][0] + m[1][1]
    }

    /// The two Floquet multipliers, larger modulus first.
    pub fn multipliers(&self, energy: f64) -> (Complex64, Complex64) {
        let d = self.discriminant(energy);
        let disc = Complex64::new(d * d / 4.0 - 1.0, 0.0).sqrt();
        let half = Complex64::new(d / 2.0, 0.0);
        let a = if d >= 0.0 { half + disc } else { half - disc };
        (a, 1.0 / a)
    }
}

/// Hill discriminant of the potential at energy `E`.
pub fn hill_discriminant(p: &ModelParams, energy: f64, lat: &LatticeData) -> Result<f64> {
    if (lat.k2() - p.k2).abs() > 1e-15 {
        return Err(Error::Domain("lattice and model moduli differ".into()));
    }
    let d = HillSolver::new(*p, DEFAULT_STEPS)?.discriminant(energy);
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::numeric(
            format!("transfer matrix at E = {energy}"),
            None,
        ))
    }
}

/// Settings of the band-edge scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub e_lo: f64,
    /// Upper end; `None` picks `max V + ((m+ℓ+1)π/2K)² + 1`.
    pub e_hi: Option<f64>,
    pub samples: usize,
    pub coarse_steps: usize,
    pub fine_steps: usize,
    /// Bisection tolerance in `E`.
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            e_lo: -1.0,
            e_hi: None,
            samples: 2000,
            coarse_steps: 2048,
            fine_steps: DEFAULT_STEPS,
            tol: 1e-11,
        }
    }
}

/// Band edges found by the discriminant scan.
#[derive(Debug, Clone, Serialize)]
pub struct BandScan {
    /// `E₀` followed by the endpoints of each open gap, increasing.
    pub edges: Vec<f64>,
    pub gaps: Vec<(f64, f64)>,
    pub scanned: (f64, f64),
}

impl BandScan {
    pub fn e0(&self) -> f64 {
        self.edges[0]
    }
}

fn bisect(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let c = 0.5 * (a + b);
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if (fc > 0.0) == (fa > 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

fn golden_max(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Locate `E₀` and all open gaps below the scan limit.
pub fn scan_band_edges(p: &ModelParams, opts: &ScanOptions) -> Result<BandScan> {
    let coarse = HillSolver::new(*p, opts.coarse_steps)?;
    let fine = HillSolver::new(*p, opts.fine_steps)?;
    let kk = fine.period() / if p.m == p.ell { 1.0 } else { 2.0 };
    let e_hi = opts.e_hi.unwrap_or_else(|| {
        let w = (p.m + p.ell + 1) as f64 * std::f64::consts::PI / (2.0 * kk);
        fine.max_potential() + w * w + 1.0
    });
    let e_lo = opts.e_lo;
    if e_hi.is_nan() || e_hi <= e_lo || opts.samples < 3 {
        return Err(Error::Domain(format!("empty scan range [{e_lo}, {e_hi}]")));
    }
    let n = opts.samples;
    let es: Vec<f64> = (0..n)
        .map(|i| e_lo + (e_hi - e_lo) * i as f64 / (n - 1) as f64)
        .collect();
    let ds: Vec<f64> = es.iter().map(|&e| coarse.discriminant(e)).collect();
    if ds[0] <= 2.0 {
        return Err(Error::numeric(
            format!("scan start E = {e_lo} is not below the spectrum"),
            None,
        ));
    }
    let fd = |e: f64| fine.discriminant(e);

    let first = (1..n)
        .find(|&i| ds[i] < 2.0)
        .ok_or_else(|| Error::numeric(format!("no band found in [{e_lo}, {e_hi}]"), None))?;
    let e0 = bisect(es[first - 1], es[first], opts.tol, |e| fd(e) - 2.0);

    let mut zeros = Vec::new();
    for i in first..n {
        if (ds[i - 1] > 0.0) != (ds[i] > 0.0) {
            zeros.push(bisect(es[i - 1], es[i], opts.tol, fd));
        }
    }

    let mut edges = vec![e0];
    let mut gaps = Vec::new();
    for w in zeros.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (emax, dmax) = golden_max(lo, hi, 1e-9 * (1.0 + hi.abs()), |e| fd(e).abs());
        if dmax > 2.0 + 1e-7 {
            let a = bisect(lo, emax, opts.tol, |e| fd(e).abs() - 2.0);
            let b = bisect(emax, hi, opts.tol, |e| fd(e).abs() - 2.0);
            edges.push(a);
            edges.push(b);
            gaps.push((a, b));
        }
    }
    Ok(BandScan {
        edges,
        gaps,
        scanned: (e_lo, e_hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particle_limit_has_trace_from_cosine() {
        // tiny modulus: V ≈ 2k² sn² ≈ 0 ⇒ D ≈ 2 cos(√E T)
        let p = ModelParams::new(1, 0, 1e-10).unwrap();
        let s = HillSolver::new(p, 4096).unwrap();
        let e = 2.3f64;
        let d = s.discriminant(e);
        assert!((d - 2.0 * (e.sqrt() * s.period()).cos()).abs() < 1e-7);
    }

    #[test]
    fn unimodular_monodromy() {
        let p = ModelParams::new(3, 1, 0.95).unwrap();
        let m = HillSolver::new(p, 4096).unwrap().monodromy(7.0);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let big = m.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
        assert!((det - 1.0).abs() < 1e-9 * big * big, "{det}");
    }

    #[test]
    fn lame_one_edges() {
        let k2 = 0.5;
        let p = ModelParams::new(1, 0, k2).unwrap();
        let scan = scan_band_edges(&p, &ScanOptions::default()).unwrap();
        let expect = [k2, 1.0, 1.0 + k2];
        assert_eq!(scan.edges.len(), 3, "{:?}", scan.edges);
        for (a, b) in scan.edges.iter().zip(expect) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }
}
