//! Verification suites with machine-readable reports.
//!
//! Every check records the worst measured deviation next to its tolerance.
//! Random sample points come from a seeded ChaCha generator, so a report is
//! reproducible from its seed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bloch::{bloch_pair, BlochPair, Sign};
use crate::elliptic::{
    jacobi, lattice_from_modulus, wp, wp_derivs, wsigma, wzeta, LatticeData,
};
use crate::error::{Error, Result};
use crate::frobenius::{
    coefficients, det_f, det_f_scale, f_matrix, f_triplet, psi_prime_values, recurrence_residuals,
    solve, ModelParams,
};
use crate::hill::{scan_band_edges, HillSolver, ScanOptions, DEFAULT_STEPS};
use crate::numeric::{first_derivative8, second_derivative8};
use crate::susy::{
    bound_state_check, intertwine_check, susy1_defect, susy1_periodic, susy2_defect,
    susy2_periodic, PartnerPotential, SeedFn, DEFECT_THRESHOLD,
};

type C = Complex64;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_1a3e;

/// Moduli of the identity suite.
pub const IDENTITY_MODULI: [f64; 3] = [0.05, 0.5, 0.95];

/// Moduli of the lattice checks.
pub const LATTICE_MODULI: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Random points per identity and modulus.
pub const IDENTITY_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Elliptic,
    Frobenius,
    Bloch,
    Susy,
    All,
}

impl Suite {
    pub const EACH: [Suite; 4] = [Suite::Elliptic, Suite::Frobenius, Suite::Bloch, Suite::Susy];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Elliptic => "elliptic",
            Suite::Frobenius => "frobenius",
            Suite::Bloch => "bloch",
            Suite::Susy => "susy",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "elliptic" => Ok(Suite::Elliptic),
            "frobenius" => Ok(Suite::Frobenius),
            "bloch" => Ok(Suite::Bloch),
            "susy" => Ok(Suite::Susy),
            "all" => Ok(Suite::All),
            other => Err(Error::Domain(format!(
                "unknown suite '{other}' (elliptic, frobenius, bloch, susy, all)"
            ))),
        }
    }
}

/// One named check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, checks: Vec<Check>) -> Self {
        SuiteReport {
            suite,
            seed,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Run one suite, or all four.
pub fn run(suite: Suite, seed: u64) -> Vec<SuiteReport> {
    match suite {
        Suite::All => Suite::EACH.iter().map(|&s| run(s, seed).remove(0)).collect(),
        Suite::Elliptic => vec![SuiteReport::new(suite, seed, elliptic_checks(seed))],
        Suite::Frobenius => vec![SuiteReport::new(suite, seed, frobenius_checks(seed))],
        Suite::Bloch => vec![SuiteReport::new(suite, seed, bloch_checks())],
        Suite::Susy => vec![SuiteReport::new(suite, seed, susy_checks())],
    }
}

/// Running maximum of a deviation; an evaluation error fails the check.
struct Tally {
    name: String,
    tolerance: f64,
    worst: f64,
    samples: usize,
    error: Option<String>,
}

impl Tally {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Tally {
            name: name.into(),
            tolerance,
            worst: 0.0,
            samples: 0,
            error: None,
        }
    }

    fn add(&mut self, r: Result<f64>) {
        self.samples += 1;
        match r {
            Ok(d) if d.is_nan() => self.worst = f64::INFINITY,
            Ok(d) => self.worst = self.worst.max(d),
            Err(e) => {
                self.worst = f64::INFINITY;
                self.error.get_or_insert_with(|| e.to_string());
            }
        }
    }

    fn finish(self) -> Check {
        Check {
            passed: self.error.is_none() && self.worst <= self.tolerance,
            name: self.name,
            worst: self.worst,
            tolerance: self.tolerance,
            samples: self.samples,
            error: self.error,
        }
    }
}

/// `|a − b| / scale`.
fn rel(a: C, b: C, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

fn big(xs: &[C]) -> f64 {
    xs.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `order`-th derivative of an analytic function from the trapezoid rule on
/// a circle of radius `r` (32 nodes).
pub fn cauchy_derivative(f: impl Fn(C) -> Result<C>, z: C, r: f64, order: u32) -> Result<C> {
    let n = 32;
    let mut acc = C::new(0.0, 0.0);
    for k in 0..n {
        let w = C::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
        acc += f(z + r * w)? * w.powi(-(order as i32));
    }
    let fact: f64 = (1..=order).map(f64::from).product();
    Ok(acc / n as f64 * fact / r.powi(order as i32))
}

// ---------------------------------------------------------------- elliptic

fn elliptic_checks(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    for &k2 in &IDENTITY_MODULI {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k2.to_bits());
        match lattice_from_modulus(k2) {
            Ok(lat) => out.extend(identity_checks(&lat, &mut rng)),
            Err(e) => out.push(failed(format!("lattice k²={k2}"), 1e-10, e)),
        }
    }
    for &k2 in &LATTICE_MODULI {
        out.extend(lattice_checks(k2));
    }
    out
}

fn failed(name: String, tolerance: f64, e: Error) -> Check {
    let mut t = Tally::new(name, tolerance);
    t.add(Err(e));
    t.finish()
}

/// Complex argument `u` for the Jacobi functions, away from their poles.
fn jacobi_point(rng: &mut ChaCha8Rng, lat: &LatticeData) -> C {
    C::new(
        rng.random_range(-2.0..2.0) * lat.K(),
        rng.random_range(-0.9..0.9) * lat.Kprime(),
    )
}

/// Point of the period cell `[0, 2ω₁] × [0, 2ω₃]` at least 5% of a side away
/// from its corners.
fn cell_point(rng: &mut ChaCha8Rng, lat: &LatticeData) -> C {
    2.0 * (rng.random_range(0.05..0.95) * lat.omega1() + rng.random_range(0.05..0.95) * lat.omega3())
}

/// Identities checked pointwise; `f` returns the deviation at one sample.
fn sampled(
    name: &str,
    k2: f64,
    rng: &mut ChaCha8Rng,
    mut f: impl FnMut(&mut ChaCha8Rng) -> Result<f64>,
) -> Check {
    let mut t = Tally::new(format!("{name} [k²={k2}]"), 1e-10);
    for _ in 0..IDENTITY_SAMPLES {
        t.add(f(rng));
    }
    t.finish()
}

fn identity_checks(lat: &LatticeData, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let k2 = lat.k2();
    let k = k2.sqrt();
    let kp = lat.kprime2().sqrt();
    let kk = lat.K();
    let ikp = C::new(0.0, lat.Kprime());
    let i = C::new(0.0, 1.0);
    let one = C::new(1.0, 0.0);
    let mut out = Vec::new();

    out.push(sampled("sn² + cn² = 1", k2, rng, |r| {
        let j = jacobi(jacobi_point(r, lat), k2)?;
        let (a, b) = (j.sn * j.sn, j.cn * j.cn);
        Ok(rel(a + b, one, big(&[a, b, one])))
    }));
    out.push(sampled("dn² + k²sn² = 1", k2, rng, |r| {
        let j = jacobi(jacobi_point(r, lat), k2)?;
        let (a, b) = (j.dn * j.dn, k2 * j.sn * j.sn);
        Ok(rel(a + b, one, big(&[a, b, one])))
    }));
    out.push(sampled("shift u+K", k2, rng, |r| {
        let u = jacobi_point(r, lat);
        let (j, s) = (jacobi(u, k2)?, jacobi(u + kk, k2)?);
        let rhs = [j.cn / j.dn, -kp * j.sn / j.dn, kp / j.dn];
        let lhs = [s.sn, s.cn, s.dn];
        Ok((0..3).map(|q| rel(lhs[q], rhs[q], big(&[lhs[q], rhs[q]]))).fold(0.0, f64::max))
    }));
    out.push(sampled("shift u+2K", k2, rng, |r| {
        let u = jacobi_point(r, lat);
        let (j, s) = (jacobi(u, k2)?, jacobi(u + 2.0 * kk, k2)?);
        let rhs = [-j.sn, -j.cn, j.dn];
        let lhs = [s.sn, s.cn, s.dn];
        Ok((0..3).map(|q| rel(lhs[q], rhs[q], big(&[lhs[q], rhs[q]]))).fold(0.0, f64::max))
    }));
    out.push(sampled("shift u+iK′", k2, rng, |r| {
        let u = jacobi_point(r, lat);
        let (j, s) = (jacobi(u, k2)?, jacobi(u + ikp, k2)?);
        let rhs = [1.0 / (k * j.sn), -i / k * j.dn / j.sn, -i * j.cn / j.sn];
        let lhs = [s.sn, s.cn, s.dn];
        Ok((0..3).map(|q| rel(lhs[q], rhs[q], big(&[lhs[q], rhs[q]]))).fold(0.0, f64::max))
    }));
    out.push(sampled("sn′, cn′, dn′", k2, rng, |r| {
        let u = jacobi_point(r, lat);
        let j = jacobi(u, k2)?;
        let h = 0.05 * lat.Kprime().min(kk);
        let d = [
            cauchy_derivative(|w| Ok(jacobi(w, k2)?.sn), u, h, 1)?,
            cauchy_derivative(|w| Ok(jacobi(w, k2)?.cn), u, h, 1)?,
            cauchy_derivative(|w| Ok(jacobi(w, k2)?.dn), u, h, 1)?,
        ];
        let rhs = [j.cn * j.dn, -j.sn * j.dn, -k2 * j.sn * j.cn];
        let scale = big(&[j.sn, j.cn, j.dn]).powi(2).max(1.0);
        Ok((0..3).map(|q| rel(d[q], rhs[q], scale)).fold(0.0, f64::max))
    }));

    let e = [lat.e1(), lat.e2(), lat.e3()];
    let r_c = 0.05 * lat.omega1_re().min(lat.omega3_im());
    out.push(sampled("℘′² = 4∏(℘ − e_i)", k2, rng, |r| {
        let w = wp_derivs(cell_point(r, lat), lat)?;
        let lhs = w.wp_prime * w.wp_prime;
        let rhs = 4.0 * (w.wp - e[0]) * (w.wp - e[1]) * (w.wp - e[2]);
        Ok(rel(lhs, rhs, big(&[lhs, rhs, 4.0 * w.wp.powu(3)])))
    }));
    out.push(sampled("℘″ = 6℘² − g₂/2", k2, rng, |r| {
        let z = cell_point(r, lat);
        let w = wp_derivs(z, lat)?;
        let d2 = cauchy_derivative(|t| Ok(wp_derivs(t, lat)?.wp_prime), z, r_c, 1)?;
        let rhs = 6.0 * w.wp * w.wp - lat.g2() / 2.0;
        Ok(rel(d2, rhs, big(&[d2, 6.0 * w.wp * w.wp]).max(lat.g2().abs())))
    }));
    out.push(sampled("℘‴ = 12℘℘′", k2, rng, |r| {
        let z = cell_point(r, lat);
        let w = wp_derivs(z, lat)?;
        let d3 = cauchy_derivative(|t| Ok(wp_derivs(t, lat)?.wp_prime), z, r_c, 2)?;
        let rhs = 12.0 * w.wp * w.wp_prime;
        Ok(rel(d3, rhs, big(&[d3, rhs])))
    }));
    out.push(sampled("ζ′ = −℘, (ln σ)′ = ζ", k2, rng, |r| {
        let z = cell_point(r, lat);
        let w = wp_derivs(z, lat)?;
        let dz = cauchy_derivative(|t| wzeta(t, lat), z, r_c, 1)?;
        let ds = cauchy_derivative(|t| wsigma(t, lat), z, r_c, 1)?;
        let s = wsigma(z, lat)?;
        Ok(rel(dz, -w.wp, big(&[dz, w.wp])).max(rel(ds, w.zeta * s, big(&[ds, w.zeta * s]))))
    }));
    let half = [lat.omega1(), lat.omega2(), lat.omega3()];
    out.push(sampled("ζ quasi-periodicity and parity", k2, rng, |r| {
        let z = cell_point(r, lat);
        let zz = wzeta(z, lat)?;
        let mut worst = rel(wzeta(-z, lat)?, -zz, zz.norm());
        for om in half {
            let eta = wzeta(om, lat)?;
            let lhs = wzeta(z + 2.0 * om, lat)?;
            let rhs = zz + 2.0 * eta;
            worst = worst.max(rel(lhs, rhs, big(&[lhs, zz, 2.0 * eta])));
        }
        Ok(worst)
    }));
    out.push(sampled("σ quasi-periodicity and parity", k2, rng, |r| {
        let z = cell_point(r, lat);
        let s = wsigma(z, lat)?;
        let mut worst = rel(wsigma(-z, lat)?, -s, s.norm());
        for om in half {
            let eta = wzeta(om, lat)?;
            let lhs = wsigma(z + 2.0 * om, lat)?;
            let rhs = -(2.0 * eta * (z + om)).exp() * s;
            worst = worst.max(rel(lhs, rhs, big(&[lhs, rhs])));
        }
        Ok(worst)
    }));
    out.push(sampled("ζ addition formula", k2, rng, |r| {
        let (z, y) = (cell_point(r, lat), cell_point(r, lat));
        let (a, b) = (wp_derivs(z, lat)?, wp_derivs(y, lat)?);
        let q = 0.5 * (a.wp_prime - b.wp_prime) / (a.wp - b.wp);
        let lhs = wzeta(z + y, lat)?;
        let general = rel(lhs, a.zeta + b.zeta + q, big(&[lhs, a.zeta, b.zeta, q]));
        let diff = wzeta(z - y, lat)? - lhs;
        let q2 = b.wp_prime / (a.wp - b.wp);
        let rewritten = rel(diff, q2 - 2.0 * b.zeta, big(&[diff, q2, 2.0 * b.zeta, lhs]));
        Ok(general.max(rewritten))
    }));
    out.push(sampled("σ addition formula", k2, rng, |r| {
        let (z, y) = (cell_point(r, lat), cell_point(r, lat));
        let lhs = wsigma(z + y, lat)? * wsigma(z - y, lat)?;
        let (sz, sy) = (wsigma(z, lat)?, wsigma(y, lat)?);
        let (pz, py) = (wp(z, lat)?, wp(y, lat)?);
        let rhs = -sz * sz * sy * sy * (pz - py);
        let scale = (sz * sz * sy * sy).norm() * (pz.norm() + py.norm());
        Ok(rel(lhs, rhs, scale.max(lhs.norm())))
    }));
    for scale in [1.0, 2.5] {
        let name = format!("℘(u/√ē₃) = e_i + ē₃·(cn², dn², 1)/sn² [ē₃={scale}]");
        let scaled = match LatticeData::with_scale(k2, scale) {
            Ok(l) => l,
            Err(e) => {
                out.push(failed(name, 1e-10, e));
                continue;
            }
        };
        out.push(sampled(&name, k2, rng, |r| {
            let u = jacobi_point(r, lat);
            let j = jacobi(u, k2)?;
            let p = wp(u / scaled.ebar3().sqrt(), &scaled)?;
            let b3 = scaled.ebar3();
            let s2 = j.sn * j.sn;
            let rhs = [
                scaled.e1() + b3 * j.cn * j.cn / s2,
                scaled.e2() + b3 * j.dn * j.dn / s2,
                scaled.e3() + b3 / s2,
            ];
            let sc = big(&[p, b3 / s2]).max(b3);
            Ok(rhs.iter().map(|v| rel(p, *v, sc)).fold(0.0, f64::max))
        }));
    }
    out
}

fn lattice_checks(k2: f64) -> Vec<Check> {
    let lat = match lattice_from_modulus(k2) {
        Ok(l) => l,
        Err(e) => return vec![failed(format!("lattice [k²={k2}]"), 1e-10, e)],
    };
    let e = [lat.e1(), lat.e2(), lat.e3()];
    let mut t = Tally::new(format!("lattice invariants [k²={k2}]"), 1e-10);
    t.add(Ok((e[0] + e[1] + e[2]).abs()));
    t.add(Ok(if e[0] > e[1] && e[1] > e[2] && lat.discriminant() > 0.0 {
        0.0
    } else {
        f64::INFINITY
    }));
    let g2 = -4.0 * (e[0] * e[1] + e[0] * e[2] + e[1] * e[2]);
    let g3 = 4.0 * e[0] * e[1] * e[2];
    t.add(Ok((lat.g2() - g2).abs() / g2.abs().max(1.0)));
    t.add(Ok((lat.g3() - g3).abs() / g3.abs().max(1.0)));
    for (om, ei) in [lat.omega1(), lat.omega2(), lat.omega3()].iter().zip(e) {
        t.add(wp(*om, &lat).map(|v| rel(v, ei.into(), ei.abs().max(1.0))));
    }
    let legendre = C::new(lat.eta1(), 0.0) * lat.omega3() - lat.eta3() * lat.omega1();
    t.add(Ok(rel(legendre, C::new(0.0, PI / 2.0), PI / 2.0)));
    t.add(wzeta(lat.omega1(), &lat).map(|v| rel(v, lat.eta1().into(), lat.eta1().abs().max(1.0))));
    vec![t.finish()]
}

// --------------------------------------------------------------- frobenius

/// Index pairs on which `F_{2ℓ+1}` is checked.
pub const VANISHING_PAIRS: [(u32, u32); 5] = [(1, 1), (2, 1), (3, 1), (2, 2), (3, 2)];

/// `(3,1)` coefficients in closed form.
pub fn closed_form_coefficients_31(etilde: C, lat: &LatticeData) -> [C; 5] {
    let (e1, b2, b3) = (lat.e1(), lat.ebar2(), lat.ebar3());
    let den = (etilde * etilde + 15.0 * e1 * etilde + 25.0 * b2 * b3) * b3;
    [
        C::new(1.0, 0.0),
        (9.0 * e1 - etilde) / b3,
        C::new(6.0 * b2 / b3, 0.0),
        -45.0 * (etilde + 15.0 * e1) * b2 * b2 / den,
        225.0 * b2 * b2 * b2 / den,
    ]
}

fn frobenius_checks(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf0);
    let mut out = Vec::new();
    let k2 = 0.95;
    let lat = match lattice_from_modulus(k2) {
        Ok(l) => l,
        Err(e) => return vec![failed("lattice".into(), 0.0, e)],
    };

    for &(m, l) in &VANISHING_PAIRS {
        let p = ModelParams::new(m, l, k2).expect("valid pair");
        let mut t = Tally::new(format!("F_(2ℓ+1) vanishes (m,ℓ)=({m},{l})"), 1e-10);
        let mut w = Tally::new(format!("skew-symmetry witness (m,ℓ)=({m},{l})"), 1e-13);
        for _ in 0..20 {
            let et = crate::frobenius::shift_energy(rng.random_range(-5.0..40.0).into(), &p, &lat);
            let r = 2 * l as usize + 1;
            t.add(Ok(det_f(r, &p, et, &lat).norm() / det_f_scale(r, &p, et, &lat)));
            let mm = f_matrix(r, &p, et, &lat);
            let mut worst = 0.0f64;
            for i in 0..r {
                for j in 0..r {
                    let refl = mm[(r - 1 - i, r - 1 - j)];
                    worst = worst.max((refl + mm[(j, i)]).norm());
                }
            }
            let scale = mm.iter().map(|v| v.norm()).fold(0.0, f64::max);
            w.add(Ok(worst / scale));
        }
        out.push(t.finish());
        out.push(w.finish());
    }

    let mut t = Tally::new("f₀, f₁, f₂ reflection symmetries", 1e-12);
    for _ in 0..20 {
        let m = rng.random_range(1..6u32);
        let l = rng.random_range(0..=m);
        let kk2 = rng.random_range(0.05..0.95);
        let la = match lattice_from_modulus(kk2) {
            Ok(v) => v,
            Err(e) => {
                t.add(Err(e));
                continue;
            }
        };
        let p = ModelParams::new(m, l, kk2).expect("valid pair");
        let et = C::new(rng.random_range(-10.0..10.0), rng.random_range(-1.0..1.0));
        let l2 = 2 * l as i64;
        for nu in 1..=5i64 {
            let f = |r| f_triplet(r, &p, et, &la);
            let scale = f(nu).1.norm().max(f(nu + 1).0.norm()).max(f(nu).2.norm()).max(1.0);
            t.add(Ok((f(l2 - nu).0 + f(nu + 1).0).norm() / scale));
            t.add(Ok((f(l2 - nu).1 + f(nu).1).norm() / scale));
            t.add(Ok((f(l2 - nu - 1).2 + f(nu).2).norm() / scale));
        }
    }
    out.push(t.finish());

    for kk2 in [0.5, 0.95] {
        let la = lattice_from_modulus(kk2).expect("valid modulus");
        let p = ModelParams::new(3, 1, kk2).expect("valid pair");
        let mut t = Tally::new(format!("(3,1) coefficients in closed form [k²={kk2}]"), 1e-12);
        for _ in 0..10 {
            let energy = rng.random_range(-5.0..40.0);
            t.add(coefficients(&p, energy.into(), &la).map(|sol| {
                let expect = closed_form_coefficients_31(sol.etilde, &la);
                (0..5)
                    .map(|r| rel(sol.a[r], expect[r], big(&[sol.a[r], expect[r]])))
                    .fold(0.0, f64::max)
            }));
        }
        out.push(t.finish());
    }

    let pairs = [(1, 0), (2, 0), (1, 1), (2, 1), (3, 1), (2, 2), (3, 2), (4, 1), (4, 3), (5, 2)];
    let mut rec = Tally::new("recurrence and truncation residuals", 1e-10);
    let mut roots = Tally::new("℘(b_r) = c_r and Σ a_r y_r^r = 0", 1e-9);
    let mut conv = Tally::new("Ψ′(b_r) take one common value", 1e-8);
    let mut det = Tally::new("locate_b is deterministic", 0.0);
    for &(m, l) in &pairs {
        let p = ModelParams::new(m, l, k2).expect("valid pair");
        for _ in 0..4 {
            let energy: C = rng.random_range(-3.0..30.0).into();
            match solve(&p, energy, &lat) {
                Ok(sol) => {
                    rec.add(Ok(recurrence_residuals(&sol, &lat).into_iter().fold(0.0, f64::max)));
                    for (c, b) in sol.c.iter().zip(&sol.b) {
                        roots.add(wp(*b, &lat).map(|v| rel(v, *c, c.norm().max(1.0))));
                        let y = (lat.e1() - c) / lat.ebar2();
                        let terms: Vec<C> = sol.a.iter().enumerate().map(|(r, a)| a * y.powu(r as u32)).collect();
                        roots.add(Ok(terms.iter().sum::<C>().norm() / big(&terms)));
                    }
                    conv.add(psi_prime_values(&sol, &lat).map(|v| {
                        v.iter().map(|w| rel(*w, v[0], v[0].norm())).fold(0.0, f64::max)
                    }));
                    det.add(solve(&p, energy, &lat).map(|again| {
                        let same = again.b.iter().zip(&sol.b).all(|(x, y)| {
                            x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
                        });
                        if same { 0.0 } else { f64::INFINITY }
                    }));
                }
                Err(Error::DegenerateEnergy { .. }) => {}
                Err(e) => rec.add(Err(e)),
            }
        }
    }
    out.extend([rec.finish(), roots.finish(), conv.finish(), det.finish()]);
    out
}

// ------------------------------------------------------------------- bloch

/// Index pairs of the Bloch checks.
pub const BLOCH_PAIRS: [(u32, u32); 6] = [(1, 0), (2, 0), (1, 1), (2, 1), (3, 1), (2, 2)];

/// Energies inside bands and gaps, away from the edges found by a scan.
///
/// Returns `(energy, in_band)`.
pub fn sample_energies(p: &ModelParams) -> Result<Vec<(f64, bool)>> {
    let scan = scan_band_edges(p, &ScanOptions::default())?;
    let e = &scan.edges;
    let mut out = vec![(e[0] - 2.0, false), (e[0] - 0.4, false)];
    let mut lo = e[0];
    for &(a, b) in &scan.gaps {
        if a - lo > 1e-3 {
            out.push((0.5 * (lo + a), true));
        }
        out.push((0.5 * (a + b), false));
        lo = b;
    }
    out.push((lo + 1.3, true));
    Ok(out)
}

/// Deviation of the pair's multiplier from the nearer period-map multiplier.
pub fn multiplier_deviation(pair: &BlochPair, hill: &HillSolver) -> f64 {
    let mu = pair.multiplier();
    let (a, b) = hill.multipliers(pair.energy);
    (rel(mu, a, mu.norm())).min(rel(mu, b, mu.norm()))
}

fn bloch_checks() -> Vec<Check> {
    let k2 = 0.95;
    let lat = lattice_from_modulus(k2).expect("valid modulus");
    let mut residual = Tally::new("Schrödinger residual of ψ± / max|ψ|", 1e-6);
    let mut mult = Tally::new("multiplier vs period map (relative)", 1e-6);
    let mut wr = Tally::new("W(ψ⁺, ψ⁻) constant on [−4K, 4K]", 1e-8);
    let mut conv = Tally::new("Ψ′(b_r) agree before rescaling", 1e-8);
    let mut floquet = Tally::new("Floquet exponent imaginary in bands, real (mod iπ) in gaps", 1e-7);
    let mut product = Tally::new("ψ⁺ψ⁻ ∝ Ψ", 1e-8);
    let mut parity = Tally::new("ψ⁻(x) = ψ⁺(−x)", 1e-8);
    let mut real = Tally::new("ψ± real in gaps", 1e-8);
    for &(m, l) in &BLOCH_PAIRS {
        let p = ModelParams::new(m, l, k2).expect("valid pair");
        let energies = match sample_energies(&p) {
            Ok(v) => v,
            Err(e) => {
                residual.add(Err(e));
                continue;
            }
        };
        let hill = HillSolver::new(p, DEFAULT_STEPS).expect("valid solver");
        for (energy, in_band) in energies {
            let pair = match bloch_pair(&p, energy, &lat) {
                Ok(v) => v,
                Err(e) => {
                    residual.add(Err(e));
                    continue;
                }
            };
            for sign in [Sign::Plus, Sign::Minus] {
                residual.add(crate::bloch::schrodinger_residual(&pair, sign, 1e-3, 400));
            }
            mult.add(Ok(multiplier_deviation(&pair, &hill)));
            wr.add(wronskian_variation(&pair, &lat));
            conv.add(psi_prime_values(&pair.sol, &lat).map(|v| {
                v.iter().map(|w| rel(*w, v[0], v[0].norm())).fold(0.0, f64::max)
            }));
            let ex = pair.floquet_exponent();
            floquet.add(Ok(if in_band {
                ex.re.abs()
            } else {
                let im = ex.im.abs();
                im.min((im - PI).abs())
            }));
            product.add(product_deviation(&pair));
            parity.add(parity_deviation(&pair));
            if !in_band {
                real.add(imaginary_part(&pair));
            }
        }
    }
    vec![
        residual.finish(),
        mult.finish(),
        wr.finish(),
        conv.finish(),
        floquet.finish(),
        product.finish(),
        parity.finish(),
        real.finish(),
    ]
}

fn wronskian_variation(pair: &BlochPair, lat: &LatticeData) -> Result<f64> {
    let w0 = pair.wronskian(0.1)?;
    let mut worst = 0.0f64;
    for i in 0..=200 {
        let x = -4.0 * lat.K() + 8.0 * lat.K() * i as f64 / 200.0 + 1e-3;
        worst = worst.max(rel(pair.wronskian(x)?, w0, w0.norm()));
    }
    Ok(worst)
}

fn product_deviation(pair: &BlochPair) -> Result<f64> {
    let lat = pair.lattice();
    let ratio = |x: f64| -> Result<C> {
        let prod = (pair.ln_psi(x, Sign::Plus)? + pair.ln_psi(x, Sign::Minus)?).exp();
        Ok(prod / pair.product_solution(lat.z_of_x(x))?)
    };
    let r0 = ratio(0.37)?;
    let mut worst = 0.0f64;
    for i in 0..50 {
        let x = -pair.period() + 2.0 * pair.period() * i as f64 / 50.0 + 0.011;
        worst = worst.max(rel(ratio(x)?, r0, r0.norm()));
    }
    Ok(worst)
}

fn parity_deviation(pair: &BlochPair) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..40 {
        let x = -2.0 * pair.period() + 4.0 * pair.period() * i as f64 / 40.0 + 0.013;
        let a = pair.ln_psi(x, Sign::Minus)?;
        let b = pair.ln_psi(-x, Sign::Plus)?;
        worst = worst.max((a - b).exp().sub(1.0).norm());
    }
    Ok(worst)
}

fn imaginary_part(pair: &BlochPair) -> Result<f64> {
    let mut worst = 0.0f64;
    for sign in [Sign::Plus, Sign::Minus] {
        let mut top = 0.0f64;
        let mut im = 0.0f64;
        for i in 0..100 {
            let x = pair.period() * i as f64 / 100.0 + 0.007;
            let v = pair.psi(x, sign)?;
            top = top.max(v.norm());
            im = im.max(v.im.abs());
        }
        worst = worst.max(im / top);
    }
    Ok(worst)
}

trait Sub1 {
    fn sub(self, v: f64) -> C;
}

impl Sub1 for C {
    fn sub(self, v: f64) -> C {
        self - v
    }
}

// -------------------------------------------------------------------- susy

/// The four figure configurations for `(3,1)`, `k² = 0.95`.
pub fn figure_partners(lat: &LatticeData) -> Result<[PartnerPotential; 4]> {
    let p = ModelParams::new(3, 1, 0.95)?;
    Ok([
        susy1_periodic(&p, 4.75, Sign::Plus, lat)?,
        susy1_defect(&p, 4.75, 1.0, lat)?,
        susy2_periodic(&p, 9.4, 9.5, lat)?,
        susy2_defect(&p, 9.4, 9.5, 1.0, -2.0, lat)?,
    ])
}

/// `V − 2[ln W(u₁, …)]″` from finite differences of the seed evaluators.
pub fn partner_by_differences(partner: &PartnerPotential, x: f64) -> Result<f64> {
    let s: &[SeedFn] = partner.seeds();
    let ln_w = |y: f64| -> Result<C> {
        if s.len() == 1 {
            return s[0].ln_u(y);
        }
        let h = 2e-2;
        let d = |f: &SeedFn| first_derivative8(|t| f.value(t), y, h);
        let w = s[0].value(y)? * d(&s[1])? - d(&s[0])? * s[1].value(y)?;
        Ok(w.ln())
    };
    let h = if s.len() == 1 { 1e-2 } else { 2e-2 };
    Ok(partner.original(x) - 2.0 * second_derivative8(ln_w, x, h)?.re)
}

fn susy_checks() -> Vec<Check> {
    let lat = lattice_from_modulus(0.95).expect("valid modulus");
    let figs = match figure_partners(&lat) {
        Ok(f) => f,
        Err(e) => return vec![failed("figure configurations".into(), 0.0, e)],
    };
    let mut out = Vec::new();
    let kk = lat.K();
    for (n, f) in figs.iter().enumerate() {
        let tag = format!("fig{}", n + 1);
        let tol = if f.spec.order == 1 { 1e-7 } else { 1e-6 };
        let mut t = Tally::new(format!("{tag}: closed form = V − 2(ln W)″ by differences"), tol);
        let window = f.defect_window;
        for i in 0..400 {
            let x = -8.0 * kk + 16.0 * kk * (i as f64 + 0.5) / 400.0;
            t.add(f.eval(x).and_then(|v| Ok((v - partner_by_differences(f, x)?).abs())));
        }
        out.push(t.finish());

        let mut fin = Tally::new(format!("{tag}: finite on [−6K, 6K]"), 0.0);
        for i in 0..=2400 {
            let x = -6.0 * kk + 12.0 * kk * i as f64 / 2400.0;
            fin.add(f.eval(x).map(|v| if v.is_finite() { 0.0 } else { f64::INFINITY }));
        }
        out.push(fin.finish());

        if f.periodic {
            let mut t = Tally::new(format!("{tag}: Ṽ(x + 2K) = Ṽ(x)"), 1e-8);
            for i in 0..400 {
                let x = -8.0 * kk + 16.0 * kk * i as f64 / 400.0 + 0.003;
                t.add(f.eval(x).and_then(|v| Ok((f.eval(x + 2.0 * kk)? - v).abs())));
            }
            out.push(t.finish());
        } else {
            let mut t = Tally::new(format!("{tag}: |Ṽ − Ṽ_periodic| outside the defect window"), DEFECT_THRESHOLD);
            match window {
                Some((a, b)) => {
                    for i in 0..4000 {
                        let x = a - 40.0 * kk + (b - a + 80.0 * kk) * i as f64 / 4000.0;
                        if x < a || x > b {
                            t.add(f.eval(x).and_then(|v| Ok((v - f.reference(x)?).abs())));
                        }
                    }
                }
                None => t.add(Err(Error::Consistency("no defect window reported".into()))),
            }
            out.push(t.finish());
            for i in 0..f.bound_state_energies.len() {
                let r = bound_state_check(f, i);
                let mut a = Tally::new(format!("{tag}: bound state {i} residual"), 1e-6);
                let mut b = Tally::new(format!("{tag}: bound state {i} tail increment"), 1e-8);
                match r {
                    Ok(r) => {
                        a.add(Ok(r.residual));
                        b.add(Ok(r.tail_increment));
                    }
                    Err(e) => a.add(Err(e)),
                }
                out.push(a.finish());
                out.push(b.finish());
            }
        }

        let tol = if f.spec.order == 1 { 1e-6 } else { 1e-5 };
        let mut it = Tally::new(format!("{tag}: intertwining residual at E = 12, 7"), tol);
        let mut ann = Tally::new(format!("{tag}: seeds annihilated by B"), 1e-8);
        for e in [12.0, 7.0] {
            match intertwine_check(f, e, &lat) {
                Ok(r) => {
                    it.add(Ok(r.residual));
                    ann.add(Ok(r.seed_annihilation));
                }
                Err(err) => it.add(Err(err)),
            }
        }
        out.push(it.finish());
        out.push(ann.finish());
        out.push(growth_check(&tag, f, &lat));
    }

    let mut t = Tally::new("sign − partner is the reflection of the sign + partner", 1e-10);
    let p = ModelParams::new(3, 1, 0.95).expect("valid pair");
    match susy1_periodic(&p, 4.75, Sign::Minus, &lat) {
        Ok(minus) => {
            for i in 0..100 {
                let x = -4.0 * kk + 8.0 * kk * i as f64 / 100.0 + 0.01;
                t.add(minus.eval(x).and_then(|v| {
                    let w = figs[0].eval(-x)?;
                    Ok((v - w).abs() / w.abs().max(1.0))
                }));
            }
        }
        Err(e) => t.add(Err(e)),
    }
    out.push(t.finish());
    out
}

/// Bψ stays bounded over six periods for a band energy and grows on at
/// least one side for a gap energy. The deviation is `0` when both hold.
fn growth_check(tag: &str, f: &PartnerPotential, lat: &LatticeData) -> Check {
    let mut t = Tally::new(format!("{tag}: spectrum preserved (growth of Bψ)"), 0.0);
    let t_per = f.period();
    let c = f.defect_centre();
    let profile = |energy: f64| -> Result<(f64, f64, f64)> {
        let pair = bloch_pair(&f.base, energy, lat)?;
        let mut mid = 0.0f64;
        let mut left = 0.0f64;
        let mut right = 0.0f64;
        for i in 0..=1200 {
            let x = c - 6.0 * t_per + 12.0 * t_per * i as f64 / 1200.0;
            let v = crate::susy::apply_intertwiner(f, &pair, x)?.norm();
            if (x - c).abs() <= t_per {
                mid = mid.max(v);
            } else if x < c {
                left = left.max(v);
            } else {
                right = right.max(v);
            }
        }
        Ok((left / mid, mid, right / mid))
    };
    t.add(profile(12.0).map(|(l, _, r)| if l < 10.0 && r < 10.0 { 0.0 } else { l.max(r) }));
    t.add(profile(7.0).map(|(l, _, r)| if l.max(r) > 100.0 { 0.0 } else { f64::INFINITY }));
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in [Suite::Elliptic, Suite::Frobenius, Suite::Bloch, Suite::Susy, Suite::All] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn cauchy_derivative_of_exponential() {
        let z = C::new(0.3, -0.2);
        let d = cauchy_derivative(|w| Ok(w.exp()), z, 0.1, 2).unwrap();
        assert!((d - z.exp()).norm() < 1e-13);
    }

    #[test]
    fn closed_form_coefficients_match_at_one_energy() {
        let lat = lattice_from_modulus(0.95).unwrap();
        let p = ModelParams::new(3, 1, 0.95).unwrap();
        let sol = coefficients(&p, C::new(7.3, 0.0), &lat).unwrap();
        let a = closed_form_coefficients_31(sol.etilde, &lat);
        for (got, want) in sol.a.iter().zip(&a) {
            assert!((got - want).norm() < 1e-13 * want.norm().max(1.0));
        }
    }
}
