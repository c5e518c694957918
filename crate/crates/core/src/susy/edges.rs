//! Band edges: closed forms for `(m, ℓ) = (3, 1)` and the general scan.

use serde::Serialize;

use crate::elliptic::Modulus;
use crate::error::{Error, Result};
use crate::frobenius::ModelParams;
use crate::hill::{scan_band_edges, HillSolver, ScanOptions, DEFAULT_STEPS};

/// Closed-form band edges of the `(3, 1)` potential.
#[derive(Debug, Clone, Serialize)]
pub struct BandEdges31 {
    pub k2: f64,
    /// `(label, value)` pairs sorted by value.
    pub labelled: Vec<(String, f64)>,
}

impl BandEdges31 {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.labelled
            .iter()
            .find(|(l, _)| l == label)
            .map(|&(_, v)| v)
    }

    pub fn e0(&self) -> f64 {
        self.get("E0").unwrap_or(f64::NAN)
    }

    pub fn values(&self) -> Vec<f64> {
        self.labelled.iter().map(|&(_, v)| v).collect()
    }

    /// Open gaps with both endpoints known in closed form.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        [("E1", "E2"), ("E3", "E4"), ("E7", "E8")]
            .iter()
            .filter_map(|(a, b)| Some((self.get(a)?, self.get(b)?)))
            .collect()
    }
}

/// The three real roots of `E³ − (11k²+20)E² + (19k⁴+216k²+64)E − (9k⁶+388k⁴+448k²)`.
pub fn cubic_edges_31(k2: f64) -> Result<[f64; 3]> {
    let b = -(11.0 * k2 + 20.0);
    let c = 19.0 * k2 * k2 + 216.0 * k2 + 64.0;
    let d = -(9.0 * k2.powi(3) + 388.0 * k2 * k2 + 448.0 * k2);
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b.powi(3) / 27.0 - b * c / 3.0 + d;
    if p >= 0.0 {
        return Err(Error::numeric(
            "cubic band-edge equation has complex roots",
            None,
        ));
    }
    let r = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let poly = |e: f64| ((e + b) * e + c) * e + d;
    let dpoly = |e: f64| (3.0 * e + 2.0 * b) * e + c;
    let mut roots = [0.0; 3];
    for (j, root) in roots.iter_mut().enumerate() {
        let mut e = r * (phi - 2.0 * std::f64::consts::PI * j as f64 / 3.0).cos() - shift;
        for _ in 0..3 {
            let dp = dpoly(e);
            if dp != 0.0 {
                e -= poly(e) / dp;
            }
        }
        *root = e;
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Closed-form band edges of the `(3, 1)` potential at modulus `k²`.
///
/// `E₁ = 1 + 4k²`, `E₂ = 1 + 9k²`, `E₃,₈ = 10 + 2k² ∓ 2√(k⁴ + 9k′²)` and the
/// three roots `E₀ < E₄ < E₇` of the cubic. `E₅ = E₆` has no closed form.
pub fn band_edges_31(k2: f64) -> Result<BandEdges31> {
    let m = Modulus::new(k2)?;
    let kp2 = m.kprime2();
    let root = (k2 * k2 + 9.0 * kp2).sqrt();
    let [e0, e4, e7] = cubic_edges_31(k2)?;
    let mut labelled = vec![
        ("E0".to_string(), e0),
        ("E1".to_string(), 1.0 + 4.0 * k2),
        ("E2".to_string(), 1.0 + 9.0 * k2),
        ("E3".to_string(), 10.0 + 2.0 * k2 - 2.0 * root),
        ("E4".to_string(), e4),
        ("E7".to_string(), e7),
        ("E8".to_string(), 10.0 + 2.0 * k2 + 2.0 * root),
    ];
    labelled.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(BandEdges31 { k2, labelled })
}

/// Band structure below the scan limit.
#[derive(Debug, Clone, Serialize)]
pub struct BandStructure {
    pub params: ModelParams,
    /// `E₀` followed by the endpoints of each open gap.
    pub edges: Vec<f64>,
    pub gaps: Vec<(f64, f64)>,
    /// Energies where a gap closes (`|D| = 2` without crossing).
    pub closed_gaps: Vec<f64>,
    /// Energy range covered by the discriminant scan.
    pub scanned: (f64, f64),
    /// Whether closed forms were used.
    pub closed_form: bool,
}

impl BandStructure {
    pub fn e0(&self) -> f64 {
        self.edges[0]
    }

    /// Index of the gap containing `E`: `Some(0)` below `E₀`, `Some(j)` for
    /// the `j`-th finite gap, `None` inside a band.
    pub fn gap_index(&self, e: f64) -> Option<usize> {
        if e < self.e0() {
            return Some(0);
        }
        self.gaps
            .iter()
            .position(|&(a, b)| e > a && e < b)
            .map(|j| j + 1)
    }

    /// Nearest band edge to `E`.
    pub fn nearest_edge(&self, e: f64) -> f64 {
        self.edges
            .iter()
            .chain(self.closed_gaps.iter())
            .cloned()
            .min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()))
            .unwrap_or(f64::NAN)
    }
}

/// Band structure from the closed forms when available, else from the scan.
///
/// For `(3, 1)` the closed forms fix `E₀` and the open gaps immediately. With
/// `scan = true` the discriminant scan also runs and its edges are snapped to
/// the closed forms they match within `1e-5`, which adds `E₅ = E₆`.
pub fn band_structure(p: &ModelParams, scan: bool) -> Result<BandStructure> {
    let is31 = p.m == 3 && p.ell == 1;
    if is31 && !scan {
        let b = band_edges_31(p.k2)?;
        let gaps = b.gaps();
        let mut edges = vec![b.e0()];
        for &(a, c) in &gaps {
            edges.push(a);
            edges.push(c);
        }
        return Ok(BandStructure {
            params: *p,
            edges,
            gaps,
            closed_gaps: Vec::new(),
            scanned: (f64::NAN, f64::NAN),
            closed_form: true,
        });
    }
    let s = scan_band_edges(p, &ScanOptions::default())?;
    let closed_gaps = find_closed_gaps(p, &s.edges, s.scanned.1)?;
    let mut edges = s.edges.clone();
    let mut gaps = s.gaps.clone();
    if is31 {
        let known = band_edges_31(p.k2)?.values();
        let snap = |e: &mut f64| {
            if let Some(k) = known.iter().find(|k| (**k - *e).abs() < 1e-5) {
                *e = *k;
            }
        };
        edges.iter_mut().for_each(snap);
        for g in gaps.iter_mut() {
            snap(&mut g.0);
            snap(&mut g.1);
        }
    }
    Ok(BandStructure {
        params: *p,
        edges,
        gaps,
        closed_gaps,
        scanned: s.scanned,
        closed_form: is31,
    })
}

fn find_closed_gaps(p: &ModelParams, edges: &[f64], e_hi: f64) -> Result<Vec<f64>> {
    // inside bands look for extrema of |D| that touch 2
    let fine = HillSolver::new(*p, DEFAULT_STEPS)?;
    let mut bands = vec![];
    let mut lo = edges[0];
    for pair in edges[1..].chunks(2) {
        bands.push((lo, pair[0]));
        lo = *pair.get(1).unwrap_or(&e_hi);
    }
    if lo < e_hi {
        bands.push((lo, e_hi));
    }
    let mut out = Vec::new();
    for (a, b) in bands {
        let n = 400;
        let es: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        let ds: Vec<f64> = es.iter().map(|&e| fine.discriminant(e).abs()).collect();
        for i in 1..n {
            if ds[i] >= ds[i - 1] && ds[i] >= ds[i + 1] && ds[i] > 2.0 - 1e-3 {
                let (mut x0, mut x1) = (es[i - 1], es[i + 1]);
                for _ in 0..80 {
                    let c = x0 + 0.381_966 * (x1 - x0);
                    let d = x0 + 0.618_034 * (x1 - x0);
                    if fine.discriminant(c).abs() > fine.discriminant(d).abs() {
                        x1 = d;
                    } else {
                        x0 = c;
                    }
                }
                let e = 0.5 * (x0 + x1);
                if (fine.discriminant(e).abs() - 2.0).abs() < 1e-6 {
                    out.push(e);
                }
            }
        }
    }
    Ok(out)
}
