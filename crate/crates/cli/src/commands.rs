//! The four subcommands. Each returns the rendered output; nothing is written
//! until every value has been computed.

use assoc_lame::bloch::{bloch_pair, potential, BlochPair, Sign};
use assoc_lame::elliptic::lattice_from_modulus;
use assoc_lame::frobenius::ModelParams;
use assoc_lame::numeric::linspace;
use assoc_lame::susy::{
    band_edges_31, band_structure, build_partner, SeedSpec, SusySpec,
};
use assoc_lame::verify::{self, SuiteReport};
use assoc_lame::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::series::{fmt17, GridSeries};
use crate::CliError;

/// Rendered result of a command.
pub struct Rendered {
    pub body: String,
    pub svg: Option<String>,
    /// Lines for standard error.
    pub notes: Vec<String>,
    pub failed: Option<String>,
}

impl Rendered {
    fn text(body: String) -> Self {
        Rendered {
            body,
            svg: None,
            notes: Vec::new(),
            failed: None,
        }
    }
}

fn params(cfg: &RunConfig) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(cfg.m, cfg.ell, cfg.k2)?)
}

fn render_series(series: &GridSeries, cfg: &RunConfig) -> Rendered {
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => series.to_csv(),
        Format::Json => series.to_json(),
    };
    Rendered {
        body,
        svg: cfg.plot.as_ref().map(|_| series.to_svg()),
        notes: Vec::new(),
        failed: None,
    }
}

fn no_plot(cfg: &RunConfig, cmd: &str) -> Result<(), CliError> {
    if cfg.plot.is_some() {
        return Err(CliError::Usage(format!("--plot does not apply to {cmd}")));
    }
    Ok(())
}

/// Uniform grid, `[−4K, 4K]` unless overridden.
pub fn grid(cfg: &RunConfig, kk: f64) -> Result<Vec<f64>, CliError> {
    let a = cfg.xmin.unwrap_or(-4.0 * kk);
    let b = cfg.xmax.unwrap_or(4.0 * kk);
    if a >= b {
        return Err(CliError::Usage(format!("xmin ({a}) must be below xmax ({b})")));
    }
    Ok(linspace(a, b, cfg.samples))
}

fn base_meta(series: &mut GridSeries, cfg: &RunConfig, kk: f64) {
    series.set_meta("m", json!(cfg.m));
    series.set_meta("ell", json!(cfg.ell));
    series.set_meta("k2", json!(cfg.k2));
    series.set_meta("K", json!(kk));
    series.set_meta("samples", json!(cfg.samples));
}

pub fn edges(cfg: &RunConfig) -> Result<Rendered, CliError> {
    no_plot(cfg, "edges")?;
    let p = params(cfg)?;
    let bands = band_structure(&p, cfg.scan)?;
    let mut labelled: Vec<(String, f64)> = if bands.closed_form && !cfg.scan {
        band_edges_31(cfg.k2)?.labelled
    } else {
        let mut v = vec![("E0".to_string(), bands.e0())];
        for (j, (a, b)) in bands.gaps.iter().enumerate() {
            v.push((format!("gap{}_lo", j + 1), *a));
            v.push((format!("gap{}_hi", j + 1), *b));
        }
        for (j, e) in bands.closed_gaps.iter().enumerate() {
            v.push((format!("closed{}", j + 1), *e));
        }
        v
    };
    labelled.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut notes = Vec::new();
    let source = if bands.closed_form && !cfg.scan {
        "closed-form"
    } else {
        let (lo, hi) = bands.scanned;
        notes.push(format!(
            "warning: edges from a discriminant scan over E in [{lo}, {hi}]; edges above {hi} are not reported"
        ));
        "discriminant-scan"
    };
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("label,energy\n");
            for (l, e) in &labelled {
                s.push_str(&format!("{l},{}\n", fmt17(*e)));
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "meta": { "m": cfg.m, "ell": cfg.ell, "k2": cfg.k2, "source": source,
                          "scanned": [bands.scanned.0, bands.scanned.1] },
                "edges": labelled.iter().map(|(l, e)| json!({"label": l, "energy": e})).collect::<Vec<_>>(),
                "gaps": bands.gaps,
                "closed_gaps": bands.closed_gaps,
            });
            pretty(&doc)
        }
    };
    let mut r = Rendered::text(body);
    r.notes = notes;
    Ok(r)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Explain a degenerate energy by the nearest band edge.
fn explain_degenerate(e: Error, p: &ModelParams, energy: f64) -> CliError {
    if let Error::DegenerateEnergy { .. } = e {
        if let Ok(bands) = band_structure(p, false) {
            let edge = bands.nearest_edge(energy);
            return CliError::Usage(format!(
                "{e}; the nearest band edge is {edge}, where the two Bloch solutions merge"
            ));
        }
    }
    e.into()
}

pub fn solve(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let energy = cfg
        .energy
        .ok_or_else(|| CliError::Usage("solve needs --energy".into()))?;
    let p = params(cfg)?;
    let lat = lattice_from_modulus(cfg.k2)?;
    let xs = grid(cfg, lat.K())?;
    let pair = bloch_pair(&p, energy, &lat).map_err(|e| explain_degenerate(e, &p, energy))?;

    let rows: Vec<[f64; 7]> = xs
        .par_iter()
        .map(|&x| solve_row(&pair, &p, x))
        .collect::<Result<_, Error>>()?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let top = |a: usize, b: usize| {
        rows.iter()
            .map(|r| r[a].hypot(r[b]))
            .fold(0.0, f64::max)
    };
    let (top_p, top_m) = (top(1, 2), top(3, 4));
    let res_p: Vec<f64> = col(5).iter().map(|r| r / top_p).collect();
    let res_m: Vec<f64> = col(6).iter().map(|r| r / top_m).collect();
    let max_res = res_p.iter().chain(&res_m).cloned().fold(0.0, f64::max);

    let w0 = pair.wronskian(xs[0])?;
    let mut w_var = 0.0f64;
    for &x in &xs {
        w_var = w_var.max((pair.wronskian(x)? - w0).norm() / w0.norm());
    }

    let mut s = GridSeries::new(xs);
    s.push("V", col(0));
    s.push("psi_plus_re", col(1));
    s.push("psi_plus_im", col(2));
    s.push("psi_minus_re", col(3));
    s.push("psi_minus_im", col(4));
    s.push("residual_plus", res_p);
    s.push("residual_minus", res_m);
    base_meta(&mut s, cfg, lat.K());
    let mu = pair.multiplier();
    let fe = pair.floquet_exponent();
    s.set_meta("energy", json!(energy));
    s.set_meta("period", json!(pair.period()));
    s.set_meta("multiplier", json!([mu.re, mu.im]));
    s.set_meta("floquet_exponent", json!([fe.re, fe.im]));
    s.set_meta("max_residual", json!(max_res));
    s.set_meta("wronskian", json!([w0.re, w0.im]));
    s.set_meta("wronskian_variation", json!(w_var));
    let mut r = render_series(&s, cfg);
    r.notes.push(format!(
        "E = {energy}: max residual {max_res:.3e}, Wronskian variation {w_var:.3e}, multiplier {mu:.12}"
    ));
    Ok(r)
}

/// `[V, Re ψ⁺, Im ψ⁺, Re ψ⁻, Im ψ⁻, |res⁺|, |res⁻|]` with 5-point residuals
/// at step `1e-3`.
fn solve_row(pair: &BlochPair, p: &ModelParams, x: f64) -> Result<[f64; 7], Error> {
    let v = potential(x, p)?;
    let h = 1e-3;
    let mut out = [v, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    for (k, sign) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
        let f = |y: f64| pair.psi(y, sign);
        let c = f(x)?;
        let d2 = (-f(x - 2.0 * h)? + 16.0 * f(x - h)? - 30.0 * c + 16.0 * f(x + h)?
            - f(x + 2.0 * h)?)
            / (12.0 * h * h);
        let res = -d2 + (v - pair.energy) * c;
        out[1 + 2 * k] = c.re;
        out[2 + 2 * k] = c.im;
        out[5 + k] = res.norm();
    }
    Ok(out)
}

/// Seeds from the energies, weights and sign in `cfg`.
pub fn partner_spec(cfg: &RunConfig, order: Option<u8>) -> Result<SusySpec, CliError> {
    let order = order.unwrap_or(if cfg.epsilon2.is_some() { 2 } else { 1 });
    let seed = |eps: Option<f64>, lambda: Option<f64>, name: &str| -> Result<SeedSpec, CliError> {
        let eps = eps.ok_or_else(|| CliError::Usage(format!("partner needs --{name}")))?;
        Ok(match lambda {
            Some(l) => SeedSpec::combination(eps, l),
            None => SeedSpec::bloch(eps, cfg.sign),
        })
    };
    match order {
        1 => {
            if cfg.epsilon2.is_some() || cfg.lambda2.is_some() {
                return Err(CliError::Usage(
                    "--epsilon2 and --lambda2 need --order 2".into(),
                ));
            }
            Ok(SusySpec::first_order(seed(
                cfg.epsilon1.or(cfg.energy),
                cfg.lambda1,
                "epsilon1",
            )?))
        }
        2 => Ok(SusySpec::second_order(
            seed(cfg.epsilon1, cfg.lambda1, "epsilon1")?,
            seed(cfg.epsilon2, cfg.lambda2, "epsilon2")?,
        )),
        n => Err(CliError::Usage(format!("order must be 1 or 2, got {n}"))),
    }
}

pub fn partner(cfg: &RunConfig, order: Option<u8>) -> Result<Rendered, CliError> {
    let p = params(cfg)?;
    let lat = lattice_from_modulus(cfg.k2)?;
    let spec = partner_spec(cfg, order)?;
    let xs = grid(cfg, lat.K())?;
    let f = build_partner(&spec, &p, &lat)?;
    let rows: Vec<[f64; 3]> = xs
        .par_iter()
        .map(|&x| -> Result<[f64; 3], Error> {
            let r = if f.periodic { f64::NAN } else { f.reference(x)? };
            Ok([f.original(x), f.eval(x)?, r])
        })
        .collect::<Result<_, Error>>()?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let mut s = GridSeries::new(xs);
    s.push("V", col(0));
    s.push("V_partner", col(1));
    if !f.periodic {
        s.push("V_partner_periodic", col(2));
    }
    base_meta(&mut s, cfg, lat.K());
    s.set_meta("order", json!(spec.order));
    s.set_meta("seeds", serde_json::to_value(&spec.seeds).expect("serializable"));
    s.set_meta("periodic", json!(f.periodic));
    s.set_meta(
        "defect_window",
        f.defect_window.map_or(Value::Null, |(a, b)| json!([a, b])),
    );
    s.set_meta("bound_state_energies", json!(f.bound_state_energies));
    s.set_meta("E0", json!(f.bands.e0()));
    let mut r = render_series(&s, cfg);
    if let Some((a, b)) = f.defect_window {
        r.notes.push(format!("defect window ({a:.6}, {b:.6})"));
        let (lo, hi) = (s.xs[0], *s.xs.last().unwrap());
        if a < lo || b > hi {
            r.notes.push(format!(
                "note: the defect window extends beyond the grid [{lo:.4}, {hi:.4}]"
            ));
        }
    }
    Ok(r)
}

pub fn verify(cfg: &RunConfig) -> Result<Rendered, CliError> {
    no_plot(cfg, "verify")?;
    let reports = verify::run(cfg.suite, cfg.seed);
    let passed = reports.iter().all(|r| r.passed);
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&json!({
            "seed": cfg.seed,
            "passed": passed,
            "suites": reports,
        })),
        Format::Csv => {
            let mut s = String::from("suite,check,worst,tolerance,samples,passed\n");
            for r in &reports {
                for c in &r.checks {
                    s.push_str(&format!(
                        "{},\"{}\",{},{},{},{}\n",
                        r.suite,
                        c.name.replace('"', "\"\""),
                        fmt17(c.worst),
                        fmt17(c.tolerance),
                        c.samples,
                        c.passed
                    ));
                }
            }
            s
        }
    };
    let mut out = Rendered::text(body);
    out.notes = summary(&reports);
    if !passed {
        let names: Vec<String> = reports
            .iter()
            .flat_map(|r| r.failures().map(move |c| format!("{}: {}", r.suite, c.name)))
            .collect();
        out.failed = Some(names.join("\n  "));
    }
    Ok(out)
}

fn summary(reports: &[SuiteReport]) -> Vec<String> {
    reports
        .iter()
        .map(|r| {
            let ok = r.checks.iter().filter(|c| c.passed).count();
            format!(
                "{:<10} {} ({ok}/{} checks)",
                r.suite.to_string(),
                if r.passed { "pass" } else { "FAIL" },
                r.checks.len()
            )
        })
        .collect()
}
