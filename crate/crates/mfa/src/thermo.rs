//! Roots of the pressure equation: Hausdorff dimension and the temperature
//! function, with Lyapunov exponents and two independent estimators of the
//! spectrum slope `alpha(q) = -T'(q)`.
//!
//! ```
//! use mfa::builtin;
//! use mfa::thermo::hausdorff_dimension;
//!
//! // ratios (1/2, 1/4): 2^-t + 4^-t = 1 has the golden-ratio root
//! let sys = builtin::affine_cantor(&[0.5, 0.25]).unwrap();
//! let dim = hausdorff_dimension(&sys).unwrap();
//! let golden = ((1.0 + 5.0f64.sqrt()) / 2.0).ln() / 2.0f64.ln();
//! assert!((dim.value - golden).abs() < 1e-10);
//! ```

use crate::error::{MfaError, Result};
use crate::potential::PotentialFamily;
use crate::pressure::{self, PressureMethod};
use crate::system::SystemSpec;

/// One solved point of the temperature curve.
#[derive(Debug, Clone)]
pub struct ThermoPoint {
    pub q: f64,
    /// Root of `t -> P(q, t)`.
    pub t: f64,
    /// `-T'(q)` from Richardson-refined central differences of the solved curve.
    pub alpha_fd: f64,
    /// `(dP/dq) / (-dP/dt)` at `(q, T(q))`; the published estimator.
    pub alpha_grad: f64,
    /// Lyapunov exponent `-dP/dt > 0`.
    pub chi: f64,
    /// Spectrum value `q * alpha_grad + T(q)`.
    pub f_value: f64,
    /// `|P(q, T(q))|` at the accepted root.
    pub root_residual: f64,
    /// Whether `q*alpha + T(q) > theta` holds at this point — the standing
    /// hypothesis under which the tilted state concentrates on the
    /// corresponding level set.
    pub hypothesis_ok: bool,
}

/// Dimension estimate with an optional certified bracket.
#[derive(Debug, Clone)]
pub struct DimensionEstimate {
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub residual: f64,
    /// Collocation nodes used for the root solve.
    pub nodes: usize,
    /// Partition depth used for the bracket, when one was produced.
    pub bracket_depth: Option<usize>,
}

/// Solver knobs. `nodes = 0` lets collocation pick the node count by
/// doubling until two successive eigenvalues agree.
#[derive(Debug, Clone, Copy)]
pub struct SolveOpts {
    pub nodes: usize,
    pub residual_tol: f64,
    pub fd_step_t: f64,
    pub fd_step_p: f64,
    pub word_budget: u128,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            nodes: 0,
            residual_tol: 1e-10,
            fd_step_t: 1e-3,
            fd_step_p: 1e-4,
            word_budget: pressure::DEFAULT_WORD_BUDGET,
        }
    }
}

/// Pick a node count: fixed when requested, otherwise doubled until stable.
fn settle_nodes(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    t: f64,
    opts: &SolveOpts,
) -> Result<usize> {
    if opts.nodes > 0 {
        return Ok(opts.nodes);
    }
    let est = pressure::pressure_auto(sys, family, q, t, 32)?;
    match est.method {
        PressureMethod::Collocation { m } => Ok(m),
        _ => Ok(32),
    }
}

/// Solve `P(q, t) = 0` in `t` on `(theta - q*u, infinity)`.
///
/// The pressure is strictly decreasing in `t`, so a sign change brackets the
/// unique root. The bracket is grown geometrically from the starting guess
/// (downwards only to the summability barrier); inside it a
/// bisection-safeguarded secant iteration runs to machine width.
pub fn solve_pressure_root(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    hint: Option<f64>,
    nodes: usize,
    residual_tol: f64,
) -> Result<(f64, f64)> {
    let theta = sys.finiteness_parameter();
    let barrier = theta - q * family.u();
    let margin = 1e-9 * barrier.abs().max(1.0);
    let floor = barrier + margin;
    let press = |t: f64| -> Result<f64> {
        Ok(pressure::pressure_collocation(sys, family, q, t, nodes)?.value)
    };

    let mut t0 = hint.unwrap_or(barrier + 1.0).max(floor);
    let mut f0 = press(t0)?;
    let (mut lo, mut flo, mut hi, mut fhi);
    if f0 > 0.0 {
        lo = t0;
        flo = f0;
        let mut step = 0.5;
        loop {
            let cand = lo + step;
            let fc = press(cand)?;
            if fc <= 0.0 {
                hi = cand;
                fhi = fc;
                break;
            }
            lo = cand;
            flo = fc;
            step *= 2.0;
            if step > 1e6 {
                return Err(MfaError::Convergence(
                    "pressure stays positive: no root within expansion budget".into(),
                ));
            }
        }
    } else {
        hi = t0;
        fhi = f0;
        let mut step = 0.5;
        loop {
            if hi <= floor + 1e-15 * floor.abs().max(1.0) {
                return Err(MfaError::Domain(
                    "bracket cannot be established before q*u + t reaches theta".into(),
                ));
            }
            let cand = (hi - step).max(floor);
            let fc = press(cand)?;
            if fc > 0.0 {
                lo = cand;
                flo = fc;
                break;
            }
            hi = cand;
            fhi = fc;
            step *= 2.0;
            if cand <= floor {
                return Err(MfaError::Domain(
                    "bracket cannot be established before q*u + t reaches theta".into(),
                ));
            }
        }
        t0 = hi;
        f0 = fhi;
    }
    let _ = (t0, f0);

    // safeguarded secant / bisection on [lo, hi] with flo > 0 > fhi
    let mut a = lo;
    let mut fa = flo;
    let mut b = hi;
    let mut fb = fhi;
    for _ in 0..200 {
        if fa == 0.0 {
            return Ok((a, 0.0));
        }
        if fb == 0.0 {
            return Ok((b, 0.0));
        }
        let width = b - a;
        if width <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        // secant proposal, clipped into the open bracket
        let mut cand = b - fb * (b - a) / (fb - fa);
        let guard = 0.01 * width;
        if !(cand > a + guard && cand < b - guard) {
            cand = 0.5 * (a + b);
        }
        let fc = press(cand)?;
        if fc > 0.0 {
            a = cand;
            fa = fc;
        } else {
            b = cand;
            fb = fc;
        }
    }
    let root = if fa.abs() <= fb.abs() { a } else { b };
    let residual = fa.abs().min(fb.abs());
    if residual > residual_tol {
        return Err(MfaError::Convergence(format!(
            "root residual {residual} exceeds tolerance {residual_tol}"
        )));
    }
    Ok((root, residual))
}

/// Hausdorff dimension of the limit set as the unique root of the geometric
/// pressure, with a certified partition bracket when the structure allows
/// one (full-shift analytic systems).
pub fn hausdorff_dimension(sys: &SystemSpec) -> Result<DimensionEstimate> {
    hausdorff_dimension_opts(sys, &SolveOpts::default(), 16)
}

pub fn hausdorff_dimension_opts(
    sys: &SystemSpec,
    opts: &SolveOpts,
    bracket_depth: usize,
) -> Result<DimensionEstimate> {
    let theta = sys.finiteness_parameter();
    let family = PotentialFamily::geometric(sys, theta + 1.0)?;
    // q = 0: the exponent u is inert, the root is the geometric pressure zero
    let nodes = settle_nodes(sys, &family, 0.0, theta + 1.0, opts)?;
    let (value, residual) =
        solve_pressure_root(sys, &family, 0.0, None, nodes, 1e-12)?;
    let bracket = dimension_bracket(sys, bracket_depth, opts.word_budget)?;
    Ok(DimensionEstimate {
        value,
        lower: bracket.map(|b| b.0),
        upper: bracket.map(|b| b.1),
        residual,
        nodes,
        bracket_depth: bracket.is_some().then_some(bracket_depth),
    })
}

/// Certified dimension bracket from partition rates.
///
/// The sup-rate curve `t -> min_n (1/n) log Z_sup(n)(t)` dominates the
/// pressure, so its zero bounds the dimension from above; the inf-rate curve
/// bounds it from below. Returns `None` for structures where the rates are
/// not certified bounds (non-full-shift or non-analytic systems).
pub fn dimension_bracket(
    sys: &SystemSpec,
    n_max: usize,
    budget: u128,
) -> Result<Option<(f64, f64)>> {
    if !sys.is_full_shift_ifs() || sys.edges().iter().any(|e| !e.kind.is_analytic()) {
        return Ok(None);
    }
    // cache endpoint log-derivative ranges per level; cap the cache size
    let cache_budget = budget.min(1 << 21);
    let mut levels: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for n in 1..=n_max {
        if sys.count_words(n) > cache_budget {
            break;
        }
        let mut lo = Vec::with_capacity(sys.count_words(n) as usize);
        let mut hi = Vec::with_capacity(lo.capacity());
        for w in sys.enumerate_words(n, cache_budget)? {
            let (dlo, dhi) = sys.word_deriv_range(&w)?;
            lo.push(dlo.ln());
            hi.push(dhi.ln());
        }
        levels.push((n, lo, hi));
    }
    if levels.is_empty() {
        return Ok(None);
    }
    let rate = |t: f64, upper: bool| -> f64 {
        let mut best = f64::INFINITY * if upper { 1.0 } else { -1.0 };
        for (n, lo, hi) in &levels {
            let logs = if upper { hi } else { lo };
            let z: f64 = logs.iter().map(|&l| (t * l).exp()).sum();
            let r = z.ln() / *n as f64;
            best = if upper { best.min(r) } else { best.max(r) };
        }
        best
    };
    let theta = sys.finiteness_parameter();
    let root = |upper: bool| -> Result<f64> {
        let mut a = theta + 1e-9;
        let mut b = a + 1.0;
        if rate(a, upper) <= 0.0 {
            return Err(MfaError::Convergence(
                "partition rate already negative at the barrier".into(),
            ));
        }
        while rate(b, upper) > 0.0 {
            b += 1.0;
            if b > 100.0 {
                return Err(MfaError::Convergence("no partition-rate root".into()));
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if rate(mid, upper) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-13 * b.abs().max(1.0) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    };
    let upper_root = root(true)?;
    let lower_root = root(false)?;
    // the two rate curves coincide to roundoff for affine systems, which can
    // invert the pair by a few ulps
    Ok(Some((
        lower_root.min(upper_root),
        lower_root.max(upper_root),
    )))
}

/// The unique `T(q)` with `P(q, T(q)) = 0`, together with both slope
/// estimators, the Lyapunov exponent and the spectrum value.
pub fn solve_temperature(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    hint: Option<f64>,
    opts: &SolveOpts,
) -> Result<ThermoPoint> {
    let nodes = settle_nodes(sys, family, q, hint.unwrap_or(sys.finiteness_parameter() - q * family.u() + 1.0), opts)?;
    let (t, root_residual) =
        solve_pressure_root(sys, family, q, hint, nodes, opts.residual_tol)?;
    let alpha_fd = alpha_from_t_derivative(sys, family, q, opts.fd_step_t, Some(t), nodes, opts)?;
    let (alpha_grad, chi) =
        alpha_from_pressure_gradient(sys, family, q, t, nodes, opts.fd_step_p)?;
    let f_value = q * alpha_grad + t;
    let theta = sys.finiteness_parameter();
    Ok(ThermoPoint {
        q,
        t,
        alpha_fd,
        alpha_grad,
        chi,
        f_value,
        root_residual,
        hypothesis_ok: f_value > theta,
    })
}

/// `alpha(q) = -T'(q)` by central differences of the solved temperature with
/// one Richardson refinement at half step.
pub fn alpha_from_t_derivative(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    h: f64,
    hint: Option<f64>,
    nodes: usize,
    opts: &SolveOpts,
) -> Result<f64> {
    let solve = |qq: f64| -> Result<f64> {
        Ok(solve_pressure_root(sys, family, qq, hint, nodes, opts.residual_tol)?.0)
    };
    let d_h = (solve(q + h)? - solve(q - h)?) / (2.0 * h);
    let d_h2 = (solve(q + 0.5 * h)? - solve(q - 0.5 * h)?) / h;
    Ok(-(4.0 * d_h2 - d_h) / 3.0)
}

/// `alpha(q)` from the pressure gradient at `(q, T(q))`:
/// differentiating `P(q, T(q)) = 0` gives `0 = dP/dq + dP/dt * T'(q)`, so
/// `alpha = -T'(q) = -(dP/dq) / chi`; the second return value is the
/// Lyapunov exponent `chi = -dP/dt`.
pub fn alpha_from_pressure_gradient(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    t: f64,
    nodes: usize,
    step: f64,
) -> Result<(f64, f64)> {
    let press = |qq: f64, tt: f64| -> Result<f64> {
        Ok(pressure::pressure_collocation(sys, family, qq, tt, nodes)?.value)
    };
    let central = |f: &dyn Fn(f64) -> Result<f64>, d: f64| -> Result<f64> {
        let g_d = (f(d)? - f(-d)?) / (2.0 * d);
        let g_d2 = (f(0.5 * d)? - f(-0.5 * d)?) / d;
        Ok((4.0 * g_d2 - g_d) / 3.0)
    };
    let dp_dq = central(&|d| press(q + d, t), step)?;
    let dp_dt = central(&|d| press(q, t + d), step)?;
    if dp_dt.abs() < 1e-6 {
        return Err(MfaError::Convergence(format!(
            "ill-conditioned gradient: |dP/dt| = {} < 1e-6",
            dp_dt.abs()
        )));
    }
    let chi = -dp_dt;
    if !(chi > 0.0) {
        return Err(MfaError::Convergence(format!(
            "Lyapunov exponent must be positive, got {chi}"
        )));
    }
    Ok((-dp_dq / chi, chi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    fn binomial() -> (SystemSpec, PotentialFamily) {
        let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let u = 2.0f64.ln() / 3.0f64.ln();
        let fam = PotentialFamily::measure_weights(&sys, &[0.3, 0.7], u).unwrap();
        (sys, fam)
    }

    /// Closed-form temperature of the binomial benchmark:
    /// `T(q) = log(0.3^q + 0.7^q) / log 3`.
    fn binomial_t(q: f64) -> f64 {
        (0.3f64.powf(q) + 0.7f64.powf(q)).ln() / 3.0f64.ln()
    }

    fn binomial_alpha(q: f64) -> f64 {
        let (p1, p2) = (0.3f64, 0.7f64);
        let num = p1.powf(q) * p1.ln() + p2.powf(q) * p2.ln();
        let den = p1.powf(q) + p2.powf(q);
        -(num / den) / 3.0f64.ln()
    }

    #[test]
    fn cantor_dimension_to_machine_precision() {
        let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let est = hausdorff_dimension(&sys).unwrap();
        let expected = 2.0f64.ln() / 3.0f64.ln();
        assert!((est.value - expected).abs() < 1e-12, "{}", est.value);
        // zero-width certified bracket for the affine system
        let (lo, hi) = (est.lower.unwrap(), est.upper.unwrap());
        assert!(hi - lo < 1e-12);
        assert!(lo - 1e-12 <= est.value && est.value <= hi + 1e-12);
    }

    #[test]
    fn two_ratio_dimension_matches_scalar_root() {
        // oracle: bisection on 2^-t + 4^-t - 1
        let f = |t: f64| 2.0f64.powf(-t) + 4.0f64.powf(-t) - 1.0;
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if f(mid) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let oracle = 0.5 * (a + b);
        let golden = ((1.0 + 5.0f64.sqrt()) / 2.0).ln() / 2.0f64.ln();
        assert!((oracle - golden).abs() < 1e-13);

        let sys = builtin::affine_cantor(&[0.5, 0.25]).unwrap();
        let est = hausdorff_dimension(&sys).unwrap();
        assert!((est.value - oracle).abs() < 1e-10, "{}", est.value);
    }

    #[test]
    fn temperature_at_one_vanishes() {
        let (sys, fam) = binomial();
        let opts = SolveOpts::default();
        let pt = solve_temperature(&sys, &fam, 1.0, None, &opts).unwrap();
        assert!(pt.t.abs() < 1e-8, "T(1) = {}", pt.t);
    }

    #[test]
    fn binomial_temperature_matches_closed_form() {
        let (sys, fam) = binomial();
        let opts = SolveOpts::default();
        for q in [-3.0, -1.0, 0.0, 0.5, 2.0, 4.0] {
            let pt = solve_temperature(&sys, &fam, q, None, &opts).unwrap();
            let expected = binomial_t(q);
            assert!(
                (pt.t - expected).abs() < 1e-9,
                "q = {q}: {} vs {expected}",
                pt.t
            );
        }
    }

    #[test]
    fn binomial_alpha_estimators_agree_with_closed_form() {
        let (sys, fam) = binomial();
        let opts = SolveOpts::default();
        for q in [0.0, 1.0, 2.0] {
            let pt = solve_temperature(&sys, &fam, q, None, &opts).unwrap();
            let expected = binomial_alpha(q);
            assert!((pt.alpha_fd - expected).abs() < 1e-6, "fd at q = {q}");
            assert!((pt.alpha_grad - expected).abs() < 1e-7, "grad at q = {q}");
            assert!((pt.alpha_fd - pt.alpha_grad).abs() < 1e-4);
        }
    }

    #[test]
    fn binomial_lyapunov_is_log_three() {
        let (sys, fam) = binomial();
        let opts = SolveOpts::default();
        for q in [0.0, 1.0, 3.0] {
            let pt = solve_temperature(&sys, &fam, q, None, &opts).unwrap();
            assert!((pt.chi - 3.0f64.ln()).abs() < 1e-7, "chi(q={q}) = {}", pt.chi);
        }
    }

    #[test]
    fn degenerate_family_gives_affine_temperature() {
        let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let hd = 2.0f64.ln() / 3.0f64.ln();
        let fam = PotentialFamily::geometric(&sys, hd).unwrap();
        let opts = SolveOpts::default();
        for q in [-2.0, 0.0, 0.7, 3.0] {
            let pt = solve_temperature(&sys, &fam, q, None, &opts).unwrap();
            assert!(
                (pt.t - hd * (1.0 - q)).abs() < 1e-10,
                "T({q}) = {} vs {}",
                pt.t,
                hd * (1.0 - q)
            );
            assert!((pt.alpha_grad - hd).abs() < 1e-7);
        }
    }

    #[test]
    fn temperature_zero_equals_dimension() {
        let (sys, fam) = binomial();
        let opts = SolveOpts::default();
        let pt = solve_temperature(&sys, &fam, 0.0, None, &opts).unwrap();
        let dim = hausdorff_dimension(&sys).unwrap();
        assert!((pt.t - dim.value).abs() < 1e-8);
    }

    #[test]
    fn cf_dimension_bracket_contains_collocation_root() {
        let sys = builtin::cf_digits(&[1, 2]).unwrap();
        let est = hausdorff_dimension(&sys).unwrap();
        let (lo, hi) = (est.lower.unwrap(), est.upper.unwrap());
        assert!(lo <= est.value && est.value <= hi);
        assert!(hi - lo <= 0.03, "bracket width {}", hi - lo);
        // literature cross-check, informational
        assert!((est.value - 0.53128).abs() < 5e-3);
    }

    #[test]
    fn u_invariance_of_the_temperature() {
        // same benchmark encoded with two different exponents
        let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let fam1 = PotentialFamily::measure_weights(&sys, &[0.3, 0.7], 0.4).unwrap();
        let fam2 = PotentialFamily::measure_weights(&sys, &[0.3, 0.7], 1.7).unwrap();
        let opts = SolveOpts::default();
        for q in [0.0, 1.0, 1.5] {
            let t1 = solve_temperature(&sys, &fam1, q, None, &opts).unwrap().t;
            let t2 = solve_temperature(&sys, &fam2, q, None, &opts).unwrap().t;
            assert!((t1 - t2).abs() < 1e-8, "q = {q}: {t1} vs {t2}");
        }
    }

    #[test]
    fn domain_exhaustion_when_no_root_above_barrier() {
        // strongly negative weights keep the truncated pressure below zero all
        // the way down to the summability barrier, so no root can be bracketed
        let sys = builtin::cf_full(5).unwrap();
        let fam =
            PotentialFamily::edge_constants(&sys, vec![-5.0; 5], 0.9).unwrap();
        let r = solve_pressure_root(&sys, &fam, 2.0, None, 24, 1e-9);
        assert!(matches!(r, Err(MfaError::Domain(_))), "{r:?}");
    }
}
