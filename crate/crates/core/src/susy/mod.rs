//! First- and second-order SUSY partners of the associated Lamé potential.
//!
//! A partner is `Ṽ = V − 2[ln W(u₁, …, u_k)]″` for seed solutions `u_i` at
//! factorization energies `ε_i`. Seeds are Bloch solutions (periodic
//! partners) or combinations `ψ⁺ + λψ⁻` (partners with a periodicity defect
//! and extra bound states at the `ε_i`).

mod edges;
mod seed;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use edges::{band_edges_31, band_structure, cubic_edges_31, BandEdges31, BandStructure};
pub use seed::SeedFn;

use crate::bloch::{bloch_pair, BlochPair, PotentialFn, Sign};
use crate::elliptic::{jacobi_real, jacobi_with_periods, LatticeData};
use crate::error::{Error, Result};
use crate::frobenius::ModelParams;
use crate::numeric::{second_derivative, simpson};

type C = Complex64;

/// Deviation below which a defect partner counts as periodic.
pub const DEFECT_THRESHOLD: f64 = 1e-6;

/// Largest ratio of a closed-form term to the result before switching to
/// the Wronskian route.
const CONDITION_LIMIT: f64 = 1e3;

/// Largest distance from the crossover, in periods, searched for the defect.
const MAX_WINDOW_PERIODS: usize = 60;

/// How a seed is built from the Bloch pair at its energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedKind {
    BlochPlus,
    BlochMinus,
    /// `ψ⁺ + λψ⁻`.
    Combination,
}

/// One seed: energy, kind and weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub energy: f64,
    pub kind: SeedKind,
    pub lambda: f64,
}

impl SeedSpec {
    pub fn bloch(energy: f64, sign: Sign) -> Self {
        SeedSpec {
            energy,
            kind: match sign {
                Sign::Plus => SeedKind::BlochPlus,
                Sign::Minus => SeedKind::BlochMinus,
            },
            lambda: 0.0,
        }
    }

    pub fn combination(energy: f64, lambda: f64) -> Self {
        SeedSpec {
            energy,
            kind: SeedKind::Combination,
            lambda,
        }
    }

    fn sign_lambda(&self) -> (Sign, f64) {
        match self.kind {
            SeedKind::BlochPlus => (Sign::Plus, 0.0),
            SeedKind::BlochMinus => (Sign::Minus, 0.0),
            SeedKind::Combination => (Sign::Plus, self.lambda),
        }
    }
}

/// Order and seeds of a transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusySpec {
    pub order: u8,
    pub seeds: Vec<SeedSpec>,
}

impl SusySpec {
    pub fn first_order(seed: SeedSpec) -> Self {
        SusySpec {
            order: 1,
            seeds: vec![seed],
        }
    }

    pub fn second_order(first: SeedSpec, second: SeedSpec) -> Self {
        SusySpec {
            order: 2,
            seeds: vec![first, second],
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        self.seeds.iter().map(|s| s.energy).collect()
    }

    /// True when no seed mixes the two Bloch solutions.
    pub fn is_periodic(&self) -> bool {
        self.seeds
            .iter()
            .all(|s| s.kind != SeedKind::Combination || s.lambda == 0.0)
    }
}

/// Check the placement rules and nodelessness; return the `SusySpec` unchanged.
pub fn validate_spec(spec: &SusySpec, p: &ModelParams, lat: &LatticeData) -> Result<SusySpec> {
    prepare(spec, p, lat)?;
    Ok(spec.clone())
}

fn prepare(
    spec: &SusySpec,
    p: &ModelParams,
    lat: &LatticeData,
) -> Result<(BandStructure, Vec<SeedFn>)> {
    if spec.order != 1 && spec.order != 2 {
        return Err(Error::Spec(format!(
            "order {} is not supported (1 or 2)",
            spec.order
        )));
    }
    if spec.seeds.len() != spec.order as usize {
        return Err(Error::Spec(format!(
            "order {} needs {} seed(s), got {}",
            spec.order,
            spec.order,
            spec.seeds.len()
        )));
    }
    for s in &spec.seeds {
        if !s.energy.is_finite() || !s.lambda.is_finite() {
            return Err(Error::Spec("energies and weights must be finite".into()));
        }
    }
    let bands = band_structure(p, false)?;
    let e0 = bands.e0();
    if spec.order == 1 {
        let eps = spec.seeds[0].energy;
        if (eps - e0).abs() <= 1e-12 * e0.abs().max(1.0) {
            return Err(Error::Spec(format!(
                "ε = {eps} sits on the lowest band edge E₀ = {e0}; first order needs ε < E₀ strictly"
            )));
        }
        if eps > e0 {
            return Err(Error::Spec(format!(
                "first order needs ε < E₀ = {e0}, got ε = {eps}"
            )));
        }
    } else {
        let (e1, e2) = (spec.seeds[0].energy, spec.seeds[1].energy);
        if (e1 - e2).abs() <= 1e-12 * e1.abs().max(1.0) {
            return Err(Error::Spec(format!(
                "second order needs ε₁ ≠ ε₂, got both = {e1}"
            )));
        }
        let g1 = bands.gap_index(e1);
        let g2 = bands.gap_index(e2);
        if g1.is_none() || g2.is_none() || g1 != g2 {
            return Err(Error::Spec(format!(
                "ε₁ = {e1} and ε₂ = {e2} must lie in the same forbidden gap"
            )));
        }
    }
    let mut seeds = Vec::with_capacity(spec.seeds.len());
    for s in &spec.seeds {
        let pair = bloch_pair(p, s.energy, lat)?;
        let (sign, lambda) = s.sign_lambda();
        seeds.push(SeedFn::new(pair, sign, lambda));
    }
    if spec.order == 1 {
        check_seed_nodeless(&seeds[0], lat)?;
    } else {
        check_wronskian_nodeless(&seeds[0], &seeds[1], lat)?;
    }
    Ok((bands, seeds))
}

/// Sign-change scan over three periods either side, step `2K/2000`.
fn scan_sign_changes(
    f: impl Fn(f64) -> Result<f64>,
    lat: &LatticeData,
    what: &'static str,
) -> Result<()> {
    let step = 2.0 * lat.K() / 2000.0;
    let n = 3 * 2000;
    let mut prev = f(-(n as f64) * step)?;
    for i in (-(n as i64) + 1)..=(n as i64) {
        let x = i as f64 * step;
        let v = f(x)?;
        if v == 0.0 || (v > 0.0) != (prev > 0.0) {
            let (mut a, mut b) = (x - step, x);
            let fa = prev;
            for _ in 0..60 {
                let c = 0.5 * (a + b);
                let fc = f(c)?;
                if (fc > 0.0) == (fa > 0.0) {
                    a = c;
                } else {
                    b = c;
                }
            }
            return Err(Error::Node {
                what,
                at: 0.5 * (a + b),
            });
        }
        prev = v;
    }
    Ok(())
}

fn check_seed_nodeless(seed: &SeedFn, lat: &LatticeData) -> Result<()> {
    if seed.lambda < 0.0 {
        // 1 + λR changes sign where Re ln(−λR) = 0; R is monotone in the mean
        let f = |x: f64| -> Result<f64> {
            let lr = seed.pair.ln_psi(x, seed.sign.flip())? - seed.pair.ln_psi(x, seed.sign)?;
            Ok(lr.re + (-seed.lambda).ln())
        };
        let step = seed.pair.period() / 20.0;
        let f0 = f(0.0)?;
        for dir in [1.0, -1.0] {
            let mut a = 0.0;
            for i in 1..=20 * 400 {
                let b = dir * i as f64 * step;
                let fb = f(b)?;
                if (fb > 0.0) != (f0 > 0.0) {
                    let (mut lo, mut hi) = (a, b);
                    for _ in 0..60 {
                        let c = 0.5 * (lo + hi);
                        if (f(c)? > 0.0) == (f0 > 0.0) {
                            lo = c;
                        } else {
                            hi = c;
                        }
                    }
                    return Err(Error::Node {
                        what: "seed",
                        at: 0.5 * (lo + hi),
                    });
                }
                a = b;
            }
        }
    }
    scan_sign_changes(
        |x| {
            let (u, _, _) = seed.scaled_value_and_derivative(x)?;
            Ok(u.re)
        },
        lat,
        "seed",
    )
}

fn scaled_wronskian(u1: &SeedFn, u2: &SeedFn, x: f64) -> Result<(C, C, C, C)> {
    let (a, da, _) = u1.scaled_value_and_derivative(x)?;
    let (b, db, _) = u2.scaled_value_and_derivative(x)?;
    Ok((a * db - da * b, a, b, da * b + a * db))
}

fn check_wronskian_nodeless(u1: &SeedFn, u2: &SeedFn, lat: &LatticeData) -> Result<()> {
    scan_sign_changes(
        |x| Ok(scaled_wronskian(u1, u2, x)?.0.re),
        lat,
        "seed Wronskian",
    )
}

/// A partner potential with its evaluator and diagnostics.
#[derive(Debug, Clone)]
pub struct PartnerPotential {
    pub spec: SusySpec,
    pub base: ModelParams,
    pub periodic: bool,
    pub bound_state_energies: Vec<f64>,
    /// Smallest interval outside which `|Ṽ − Ṽ_periodic| < 1e-6`.
    pub defect_window: Option<(f64, f64)>,
    pub bands: BandStructure,
    seeds: Vec<SeedFn>,
    /// Each seed's pure Bloch components `[ψ_s, ψ_{−s}]`.
    pure: Vec<[SeedFn; 2]>,
    v: PotentialFn,
    lat: LatticeData,
}

/// Expression used for one evaluation of `Ṽ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    ClosedForm,
    Wronskian,
}

impl PartnerPotential {
    fn build(spec: SusySpec, p: &ModelParams, lat: &LatticeData) -> Result<Self> {
        let (bands, seeds) = prepare(&spec, p, lat)?;
        let periodic = spec.is_periodic();
        let bound_state_energies = if periodic {
            Vec::new()
        } else {
            spec.energies()
        };
        let mut out = PartnerPotential {
            spec,
            base: *p,
            periodic,
            bound_state_energies,
            defect_window: None,
            bands,
            pure: seeds
                .iter()
                .map(|s| {
                    [
                        SeedFn::new(s.pair.clone(), s.sign, 0.0),
                        SeedFn::new(s.pair.clone(), s.sign.flip(), 0.0),
                    ]
                })
                .collect(),
            seeds,
            v: PotentialFn::new(*p)?,
            lat: lat.clone(),
        };
        if !periodic {
            out.defect_window = out.locate_defect_window()?;
        }
        Ok(out)
    }

    pub fn seeds(&self) -> &[SeedFn] {
        &self.seeds
    }

    pub fn lattice(&self) -> &LatticeData {
        &self.lat
    }

    /// Original potential `V(x)`.
    pub fn original(&self, x: f64) -> f64 {
        self.v.eval(x)
    }

    /// Period of the original potential.
    pub fn period(&self) -> f64 {
        self.v.period()
    }

    /// `Ṽ(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_with_route(x)?.0.re)
    }

    /// `Ṽ(x)` together with the evaluation route taken.
    ///
    /// The closed form is used unless one of its terms exceeds the result by
    /// three orders of magnitude (close to a zero of a seed), where the
    /// algebraic Wronskian expression is better conditioned.
    pub fn eval_with_route(&self, x: f64) -> Result<(C, Route)> {
        let seeds: Vec<&SeedFn> = self.seeds.iter().collect();
        self.eval_seeds(&seeds, x)
    }

    fn eval_seeds(&self, seeds: &[&SeedFn], x: f64) -> Result<(C, Route)> {
        match self.closed_form_terms(seeds, x) {
            Ok((value, biggest)) if biggest <= CONDITION_LIMIT * (1.0 + value.norm()) => {
                Ok((value, Route::ClosedForm))
            }
            _ => Ok((self.wronskian_route(seeds, x)?, Route::Wronskian)),
        }
    }

    /// `Ṽ(x)` from the `sn²` closed form plus the analytic defect terms.
    pub fn eval_closed_form(&self, x: f64) -> Result<C> {
        let seeds: Vec<&SeedFn> = self.seeds.iter().collect();
        Ok(self.closed_form_terms(&seeds, x)?.0)
    }

    fn sn2_sum(&self, xr: f64, seed: &SeedFn) -> Result<C> {
        let root = self.lat.ebar3().sqrt();
        let s = seed.sign.value();
        let mut acc = C::new(0.0, 0.0);
        for b in seed.pair.b() {
            let j = jacobi_with_periods(
                xr + s * root * b,
                self.lat.k2(),
                self.lat.K(),
                self.lat.Kprime(),
                self.lat.pole_radius(),
            )?;
            acc += j.sn * j.sn;
        }
        Ok(acc)
    }

    fn closed_form_terms(&self, seeds: &[&SeedFn], x: f64) -> Result<(C, f64)> {
        let p = &self.base;
        let k2 = p.k2;
        // the sn² terms have period 2K; reducing first keeps x + √ē₃b accurate
        let two_k = 2.0 * self.lat.K();
        let xr = x - two_k * (x / two_k).round();
        let j = jacobi_real(xr, k2)?;
        let (m, l) = (p.m as f64, p.ell as f64);
        let sn2 = j.sn * j.sn;
        let cd2 = j.cn * j.cn / (j.dn * j.dn);
        let order = self.spec.order as f64;
        let a = m * (m + 1.0 - 2.0 * order) * k2 * sn2;
        let b = l * (l + 1.0 - 2.0 * order) * k2 * cd2;
        let mut terms: Vec<C> = vec![a.into(), b.into()];
        for seed in seeds {
            terms.push(2.0 * k2 * self.sn2_sum(xr, seed)?);
            terms.push(-2.0 * seed.defect_log_derivs(x)?[1]);
        }
        if seeds.len() == 2 {
            let d1 = seeds[0].log_derivs(x)?;
            let d2 = seeds[1].log_derivs(x)?;
            let g = d2[0] - d1[0];
            let g1 = d2[1] - d1[1];
            let g2 = d2[2] - d1[2];
            terms.push(-2.0 * g2 / g);
            terms.push(2.0 * (g1 / g) * (g1 / g));
        }
        let value: C = terms.iter().sum();
        let biggest = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::numeric(
                format!("closed-form partner at x = {x}"),
                None,
            ));
        }
        Ok((value, biggest))
    }

    /// `Ṽ(x)` from seed values and first derivatives only.
    ///
    /// Order 1: `Ṽ = 2ε − V + 2(u′/u)²`. Order 2: with `W = u₁u₂′ − u₁′u₂`,
    /// `W′ = (ε₁ − ε₂)u₁u₂` and `W″ = (ε₁ − ε₂)(u₁′u₂ + u₁u₂′)`.
    pub fn eval_wronskian(&self, x: f64) -> Result<C> {
        let seeds: Vec<&SeedFn> = self.seeds.iter().collect();
        self.wronskian_route(&seeds, x)
    }

    fn wronskian_route(&self, seeds: &[&SeedFn], x: f64) -> Result<C> {
        let v = self.v.eval(x);
        if seeds.len() == 1 {
            let s = seeds[0];
            let (u, du, _) = s.scaled_value_and_derivative(x)?;
            let r = du / u;
            return Ok(2.0 * s.energy() - v + 2.0 * r * r);
        }
        let (u1, u2) = (seeds[0], seeds[1]);
        let de = u1.energy() - u2.energy();
        let (w, a, b, cross) = scaled_wronskian(u1, u2, x)?;
        let w1 = de * a * b / w;
        let w2 = de * cross / w;
        Ok(v - 2.0 * (w2 - w1 * w1))
    }

    /// The periodic partner that `Ṽ` approaches near `x`.
    ///
    /// Each combination seed is replaced by whichever Bloch component
    /// dominates it at `x`; for periodic partners this is `Ṽ` itself.
    pub fn reference(&self, x: f64) -> Result<f64> {
        if self.periodic {
            return self.eval(x);
        }
        let mut seeds = Vec::with_capacity(self.seeds.len());
        for (s, [same, flipped]) in self.seeds.iter().zip(&self.pure) {
            let lr = s.pair.ln_psi(x, s.sign.flip())? - s.pair.ln_psi(x, s.sign)?;
            if s.lambda != 0.0 && lr.re + s.lambda.abs().ln() > 0.0 {
                seeds.push(flipped);
            } else {
                seeds.push(same);
            }
        }
        Ok(self.eval_seeds(&seeds, x)?.0.re)
    }

    /// Point where the combination seeds switch dominant component, averaged.
    ///
    /// With `ψ⁻(x) = ψ⁺(−x)` the periodic part of `ln|ψ⁻/ψ⁺|` has zero mean,
    /// so `|λψ⁻/ψ⁺| = 1` on average at `T ln|λ| / (2 ln|μ|)`.
    fn crossover(&self) -> f64 {
        let t = self.period();
        let xs: Vec<f64> = self
            .seeds
            .iter()
            .filter(|s| s.lambda != 0.0)
            .filter_map(|s| {
                let lm = s.multiplier().norm().ln();
                (lm.abs() > 1e-12).then(|| t * s.lambda.abs().ln() / (2.0 * lm))
            })
            .collect();
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    }

    /// Scan outward from the crossover in steps of `T/200` until three
    /// consecutive periods stay below `1e-8`, or sixty periods.
    fn locate_defect_window(&self) -> Result<Option<(f64, f64)>> {
        let t = self.period();
        let centre = self.crossover();
        let per_period = 200;
        let step = t / per_period as f64;
        let mut ends = [centre, centre];
        let mut found = false;
        for (side, dir) in [(0usize, -1.0), (1usize, 1.0)] {
            let mut quiet = 0;
            for period in 0..MAX_WINDOW_PERIODS {
                let mut worst = 0.0f64;
                for i in 0..per_period {
                    let x = centre + dir * (period * per_period + i) as f64 * step;
                    let dev = (self.eval(x)? - self.reference(x)?).abs();
                    if dev >= DEFECT_THRESHOLD {
                        ends[side] = x;
                        found = true;
                    }
                    worst = worst.max(dev);
                }
                if worst < 1e-2 * DEFECT_THRESHOLD {
                    quiet += 1;
                    if quiet == 3 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
        }
        if !found {
            return Ok(None);
        }
        // resolve each end on a grid fifty times finer, then pad by one step
        let fine = step / 50.0;
        for (side, dir) in [(0usize, -1.0), (1usize, 1.0)] {
            let start = ends[side];
            for i in 1..=100 {
                let x = start + dir * i as f64 * fine;
                if (self.eval(x)? - self.reference(x)?).abs() >= DEFECT_THRESHOLD {
                    ends[side] = x;
                }
            }
            ends[side] += dir * fine;
        }
        Ok(Some((ends[0], ends[1])))
    }

    /// Unnormalized bound state `i` at `bound_state_energies[i]`.
    ///
    /// Order 1: `1/u`. Order 2: `u₂/W` at `ε₁` and `u₁/W` at `ε₂`.
    pub fn bound_state(&self, i: usize, x: f64) -> Result<C> {
        Ok(self.ln_bound_state(i, x)?.exp())
    }

    /// `ln` of [`Self::bound_state`].
    pub fn ln_bound_state(&self, i: usize, x: f64) -> Result<C> {
        if self.periodic || i >= self.bound_state_energies.len() {
            return Err(Error::Domain(format!("no bound state with index {i}")));
        }
        if self.spec.order == 1 {
            return Ok(-self.seeds[0].ln_u(x)?);
        }
        let (u1, u2) = (&self.seeds[0], &self.seeds[1]);
        let (a, da, s1) = u1.scaled_value_and_derivative(x)?;
        let (b, db, s2) = u2.scaled_value_and_derivative(x)?;
        let w = a * db - da * b;
        Ok(if i == 0 {
            (b / w).ln() - s1
        } else {
            (a / w).ln() - s2
        })
    }

    /// Centre of the defect: where the combination seeds change dominant
    /// component.
    pub fn defect_centre(&self) -> f64 {
        self.crossover()
    }
}

/// Outcome of [`bound_state_check`].
#[derive(Debug, Clone, Serialize)]
pub struct BoundStateReport {
    pub energy: f64,
    /// `max |−φ″ + (Ṽ − ε)φ|` with `max |φ| = 1`.
    pub residual: f64,
    /// `∫|φ|²` with `max |φ| = 1`.
    pub norm: f64,
    /// Contribution of the last period added on each side.
    pub tail_increment: f64,
    pub periods: usize,
    pub converged: bool,
}

/// Residual and square-integrability of bound state `i`.
///
/// `∫|φ|²` is accumulated one period at a time on both sides of the defect
/// until a period adds less than `1e-8`, or 200 periods.
pub fn bound_state_check(partner: &PartnerPotential, i: usize) -> Result<BoundStateReport> {
    let energy = *partner
        .bound_state_energies
        .get(i)
        .ok_or_else(|| Error::Domain(format!("no bound state with index {i}")))?;
    let t = partner.period();
    let c = partner.defect_centre();
    let (lo, hi) = partner.defect_window.unwrap_or((c - t, c + t));
    let (lo, hi) = (lo.min(c - 2.0 * t), hi.max(c + 2.0 * t));
    let n = 2000;
    let mut ln_max = f64::NEG_INFINITY;
    for k in 0..=n {
        let x = lo + (hi - lo) * k as f64 / n as f64;
        ln_max = ln_max.max(partner.ln_bound_state(i, x)?.re);
    }
    let phi = |x: f64| -> Result<C> { Ok((partner.ln_bound_state(i, x)? - ln_max).exp()) };

    let mut residual = 0.0f64;
    for k in 0..n {
        let x = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
        let d2 = second_derivative(phi, x, 1e-3)?;
        let r = -d2 + (partner.eval(x)? - energy) * phi(x)?;
        residual = residual.max(r.norm());
    }

    let density = |x: f64| -> Result<f64> { Ok(phi(x)?.norm_sqr()) };
    let mut norm = simpson(density, c - t, c + t, 800)?;
    let mut tail_increment = f64::INFINITY;
    let mut periods = 1;
    while periods < 200 {
        let a = c + periods as f64 * t;
        let b = c - periods as f64 * t;
        tail_increment = simpson(density, a, a + t, 400)? + simpson(density, b - t, b, 400)?;
        norm += tail_increment;
        periods += 1;
        if tail_increment < 1e-8 && periods > 2 {
            break;
        }
    }
    Ok(BoundStateReport {
        energy,
        residual,
        norm,
        tail_increment,
        periods,
        converged: tail_increment < 1e-8,
    })
}

/// First-order periodic partner from `ψ±` at `ε < E₀`.
pub fn susy1_periodic(
    p: &ModelParams,
    eps: f64,
    sign: Sign,
    lat: &LatticeData,
) -> Result<PartnerPotential> {
    PartnerPotential::build(SusySpec::first_order(SeedSpec::bloch(eps, sign)), p, lat)
}

/// First-order partner from `u = ψ⁺ + λψ⁻` at `ε < E₀`.
pub fn susy1_defect(
    p: &ModelParams,
    eps: f64,
    lambda: f64,
    lat: &LatticeData,
) -> Result<PartnerPotential> {
    PartnerPotential::build(
        SusySpec::first_order(SeedSpec::combination(eps, lambda)),
        p,
        lat,
    )
}

/// Second-order periodic partner from `ψ₁⁺`, `ψ₂⁺` in one gap.
pub fn susy2_periodic(
    p: &ModelParams,
    eps1: f64,
    eps2: f64,
    lat: &LatticeData,
) -> Result<PartnerPotential> {
    PartnerPotential::build(
        SusySpec::second_order(
            SeedSpec::bloch(eps1, Sign::Plus),
            SeedSpec::bloch(eps2, Sign::Plus),
        ),
        p,
        lat,
    )
}

/// Second-order partner from `u_i = ψ_i⁺ + λ_iψ_i⁻`.
pub fn susy2_defect(
    p: &ModelParams,
    eps1: f64,
    eps2: f64,
    lambda1: f64,
    lambda2: f64,
    lat: &LatticeData,
) -> Result<PartnerPotential> {
    PartnerPotential::build(
        SusySpec::second_order(
            SeedSpec::combination(eps1, lambda1),
            SeedSpec::combination(eps2, lambda2),
        ),
        p,
        lat,
    )
}

/// Any validated spec.
pub fn build_partner(
    spec: &SusySpec,
    p: &ModelParams,
    lat: &LatticeData,
) -> Result<PartnerPotential> {
    PartnerPotential::build(spec.clone(), p, lat)
}

/// Outcome of [`intertwine_check`].
#[derive(Debug, Clone, Serialize)]
pub struct IntertwineReport {
    pub test_energy: f64,
    /// `max |−f″ + (Ṽ − E) f| / max |f|` for `f = Bψ`.
    pub residual: f64,
    /// `max |B u_i| / max |u_i|` over the seeds.
    pub seed_annihilation: f64,
    pub points: usize,
    pub excluded: usize,
}

/// Apply the intertwiner to `ψ⁺` at `test_e` and measure how well the result
/// solves the partner equation at the same energy.
pub fn intertwine_check(
    partner: &PartnerPotential,
    test_e: f64,
    lat: &LatticeData,
) -> Result<IntertwineReport> {
    if partner
        .spec
        .energies()
        .iter()
        .any(|e| (e - test_e).abs() < 1e-9)
    {
        return Err(Error::Domain(
            "test energy equals a factorization energy".into(),
        ));
    }
    let pair = bloch_pair(&partner.base, test_e, lat)?;
    let t = partner.period();
    let (lo, hi) = match partner.defect_window {
        Some((a, b)) => (a.min(-t), b.max(t)),
        None => (-t, t),
    };
    let n = 240;
    let h = 1e-3;
    let apply = |x: f64| -> Result<C> { apply_intertwiner(partner, &pair, x) };
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut excluded = 0;
    for i in 0..n {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        let r = (|| -> Result<(f64, f64)> {
            let f = apply(x)?;
            let d2 = second_derivative(apply, x, h)?;
            let res = -d2 + (partner.eval(x)? - test_e) * f;
            Ok((res.norm(), f.norm()))
        })();
        match r {
            Ok((res, f)) if res.is_finite() => {
                worst = worst.max(res);
                scale = scale.max(f);
            }
            _ => excluded += 1,
        }
    }
    let mut ann = 0.0f64;
    for (k, seed) in partner.seeds.iter().enumerate() {
        let mut top = 0.0f64;
        let mut big = 0.0f64;
        for i in 0..n {
            let x = -t + 2.0 * t * i as f64 / n as f64;
            let (u, du) = seed.value_and_derivative(x)?;
            let b = apply_to_seed(partner, k, x, u, du)?;
            top = top.max(b.norm());
            big = big.max(u.norm()).max(du.norm());
        }
        ann = ann.max(top / big);
    }
    Ok(IntertwineReport {
        test_energy: test_e,
        residual: worst / scale,
        seed_annihilation: ann,
        points: n - excluded,
        excluded,
    })
}

/// `(B f)(x)` given `f`, `f′` and `f″` at `x`.
fn intertwine_values(partner: &PartnerPotential, x: f64, f: C, df: C, d2f: C) -> Result<C> {
    let d1 = partner.seeds[0].log_derivs(x)?;
    let b1 = df - d1[0] * f;
    if partner.spec.order == 1 {
        return Ok(b1);
    }
    let db1 = d2f - d1[1] * f - d1[0] * df;
    let d2 = partner.seeds[1].log_derivs(x)?;
    let g = d2[0] - d1[0];
    let g1 = d2[1] - d1[1];
    Ok(db1 - (d2[0] + g1 / g) * b1)
}

/// `(Bψ)(x)`. Order 2 uses `W(u₁, u₂, ψ)/W(u₁, u₂)`, which has no poles at
/// the zeros of the seeds.
pub fn apply_intertwiner(partner: &PartnerPotential, pair: &BlochPair, x: f64) -> Result<C> {
    let (psi, dpsi) = pair.psi_and_derivative(x, Sign::Plus)?;
    let v = partner.original(x);
    let d2 = (v - pair.energy) * psi;
    if partner.spec.order == 1 {
        return intertwine_values(partner, x, psi, dpsi, d2);
    }
    let (u1, u2) = (&partner.seeds[0], &partner.seeds[1]);
    let (a, da, _) = u1.scaled_value_and_derivative(x)?;
    let (b, db, _) = u2.scaled_value_and_derivative(x)?;
    let dda = (v - u1.energy()) * a;
    let ddb = (v - u2.energy()) * b;
    let w3 = a * (db * d2 - dpsi * ddb) - b * (da * d2 - dpsi * dda) + psi * (da * ddb - db * dda);
    Ok(w3 / (a * db - da * b))
}

fn apply_to_seed(partner: &PartnerPotential, k: usize, x: f64, u: C, du: C) -> Result<C> {
    let e = partner.seeds[k].energy();
    let d2 = (partner.original(x) - e) * u;
    intertwine_values(partner, x, u, du, d2)
}
