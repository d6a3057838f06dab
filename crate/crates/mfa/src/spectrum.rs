//! The multifractal spectrum as a parametric curve over `q`, its Legendre
//! structure, and deterministic CSV export.
//!
//! ```
//! use mfa::builtin;
//! use mfa::potential::PotentialFamily;
//! use mfa::spectrum::{legendre_check, spectrum_curve, QGrid};
//! use mfa::thermo::SolveOpts;
//!
//! let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
//! let hd = 2.0f64.ln() / 3.0f64.ln();
//! let fam = PotentialFamily::measure_weights(&sys, &[0.3, 0.7], hd).unwrap();
//! let grid = QGrid::new(-1.0, 1.0, 5).unwrap();
//! let curve = spectrum_curve(&sys, &fam, grid, &SolveOpts::default());
//!
//! // the curve satisfies the Legendre identity and peaks at the dimension
//! assert!(legendre_check(&curve) < 1e-6);
//! let peak = curve.solved_points().map(|p| p.f_value).fold(0.0, f64::max);
//! assert!((peak - hd).abs() < 1e-6);
//! ```

use std::io::Write;

use crate::error::{MfaError, Result};
use crate::potential::PotentialFamily;
use crate::system::SystemSpec;
use crate::thermo::{solve_temperature, SolveOpts, ThermoPoint};

/// Uniform grid in `q`.
#[derive(Debug, Clone, Copy)]
pub struct QGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl QGrid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min < max) || steps < 2 {
            return Err(MfaError::Parameter(
                "q grid needs min < max and at least 2 steps".into(),
            ));
        }
        Ok(QGrid { min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.min + k as f64 * h).collect()
    }
}

/// One grid point: solved or recorded as a gap.
#[derive(Debug, Clone)]
pub enum CurvePoint {
    Solved(ThermoPoint),
    Failed { q: f64, reason: String },
}

impl CurvePoint {
    pub fn q(&self) -> f64 {
        match self {
            CurvePoint::Solved(p) => p.q,
            CurvePoint::Failed { q, .. } => *q,
        }
    }

    pub fn solved(&self) -> Option<&ThermoPoint> {
        match self {
            CurvePoint::Solved(p) => Some(p),
            CurvePoint::Failed { .. } => None,
        }
    }
}

/// The spectrum curve over a `q` grid, ordered by ascending `q`.
#[derive(Debug, Clone)]
pub struct SpectrumCurve {
    pub points: Vec<CurvePoint>,
    pub system: String,
    pub grid: QGrid,
}

impl SpectrumCurve {
    pub fn solved_points(&self) -> impl Iterator<Item = &ThermoPoint> {
        self.points.iter().filter_map(|p| p.solved())
    }

    /// Observed `(alpha_min, alpha_max)` along the curve.
    pub fn alpha_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for p in self.solved_points() {
            let a = p.alpha_grad;
            range = Some(match range {
                None => (a, a),
                Some((lo, hi)) => (lo.min(a), hi.max(a)),
            });
        }
        range
    }
}

/// Solve the temperature point for every grid `q`, reusing each root as the
/// starting bracket hint for the next (continuation). Failures are recorded
/// as gaps rather than aborting the curve.
pub fn spectrum_curve(
    sys: &SystemSpec,
    family: &PotentialFamily,
    grid: QGrid,
    opts: &SolveOpts,
) -> SpectrumCurve {
    let points = curve_chunk(sys, family, &grid.values(), opts);
    SpectrumCurve {
        points,
        system: sys.name().to_string(),
        grid,
    }
}

/// Same curve split over `threads` contiguous chunks; continuation is applied
/// within each chunk only, and the output order is the grid order regardless
/// of scheduling.
pub fn spectrum_curve_parallel(
    sys: &SystemSpec,
    family: &PotentialFamily,
    grid: QGrid,
    opts: &SolveOpts,
    threads: usize,
) -> SpectrumCurve {
    let qs = grid.values();
    let threads = threads.max(1).min(qs.len());
    if threads == 1 {
        return spectrum_curve(sys, family, grid, opts);
    }
    let chunk = qs.len().div_ceil(threads);
    let mut points: Vec<Vec<CurvePoint>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for part in qs.chunks(chunk) {
            handles.push(scope.spawn(move || curve_chunk(sys, family, part, opts)));
        }
        for h in handles {
            points.push(h.join().expect("curve worker panicked"));
        }
    });
    SpectrumCurve {
        points: points.into_iter().flatten().collect(),
        system: sys.name().to_string(),
        grid,
    }
}

fn curve_chunk(
    sys: &SystemSpec,
    family: &PotentialFamily,
    qs: &[f64],
    opts: &SolveOpts,
) -> Vec<CurvePoint> {
    let mut out = Vec::with_capacity(qs.len());
    let mut hint: Option<f64> = None;
    for &q in qs {
        match solve_temperature(sys, family, q, hint, opts) {
            Ok(p) => {
                hint = Some(p.t);
                out.push(CurvePoint::Solved(p));
            }
            Err(e) => out.push(CurvePoint::Failed {
                q,
                reason: e.to_string(),
            }),
        }
    }
    out
}

/// Largest Legendre-identity residual over the solved points:
/// `|f - (T - q T')|` with `T' = -alpha_fd`, the estimator independent of the
/// one inside `f`. The residual therefore scales with the cross-estimator
/// disagreement `|q| * |alpha_grad - alpha_fd|`.
pub fn legendre_check(curve: &SpectrumCurve) -> f64 {
    curve
        .solved_points()
        .map(|p| (p.f_value - (p.t + p.q * p.alpha_fd)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Default)]
pub struct ConvexityReport {
    /// Smallest second difference of `T` over the grid.
    pub min_t_second_diff: f64,
    /// Grid `q` values where the second difference drops below `-1e-7`.
    pub t_violations: Vec<f64>,
    /// Largest amount by which `f` falls below a chord of its neighbours.
    pub max_f_chord_defect: f64,
    pub f_violations: Vec<f64>,
}

/// Second differences of `T` (convexity) and chord tests on `f` over `alpha`
/// (concavity of the Legendre transform). Assumes a uniform grid.
pub fn convexity_report(curve: &SpectrumCurve) -> ConvexityReport {
    let pts: Vec<&ThermoPoint> = curve.solved_points().collect();
    let mut rep = ConvexityReport {
        min_t_second_diff: f64::INFINITY,
        ..Default::default()
    };
    for w in pts.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let d2 = c.t - 2.0 * b.t + a.t;
        rep.min_t_second_diff = rep.min_t_second_diff.min(d2);
        if d2 < -1e-7 {
            rep.t_violations.push(b.q);
        }
        // alpha decreases in q; chord over (alpha_a, alpha_c) evaluated at alpha_b
        let (xa, xb, xc) = (a.alpha_grad, b.alpha_grad, c.alpha_grad);
        if (xa - xc).abs() > 1e-12 {
            let lam = (xb - xc) / (xa - xc);
            if (0.0..=1.0).contains(&lam) {
                let chord = lam * a.f_value + (1.0 - lam) * c.f_value;
                let defect = chord - b.f_value;
                rep.max_f_chord_defect = rep.max_f_chord_defect.max(defect);
                if defect > 1e-7 {
                    rep.f_violations.push(b.q);
                }
            }
        }
    }
    if pts.len() < 3 {
        rep.min_t_second_diff = 0.0;
    }
    rep
}

/// Format with 17 significant digits, locale-independent.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the curve as CSV: header `q,T,alpha_fd,alpha_grad,f,chi,residual`,
/// one row per solved point in ascending `q`, 17 significant digits.
/// Byte-identical for identical inputs.
pub fn export_curve<W: Write>(curve: &SpectrumCurve, dest: &mut W) -> Result<()> {
    writeln!(dest, "q,T,alpha_fd,alpha_grad,f,chi,residual")?;
    for p in curve.solved_points() {
        writeln!(
            dest,
            "{},{},{},{},{},{},{}",
            fmt_g17(p.q),
            fmt_g17(p.t),
            fmt_g17(p.alpha_fd),
            fmt_g17(p.alpha_grad),
            fmt_g17(p.f_value),
            fmt_g17(p.chi),
            fmt_g17(p.root_residual),
        )?;
    }
    Ok(())
}
