//! Cylinder-level measure models, ball measures, local dimensions, and
//! Monte-Carlo sampling of tilted equilibrium states.
//!
//! ```
//! use mfa::builtin;
//! use mfa::measure::{ball_measure, cylinder_weights, MeasureContext};
//! use mfa::potential::PotentialFamily;
//!
//! let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
//! let hd = 2.0f64.ln() / 3.0f64.ln();
//! let fam = PotentialFamily::measure_weights(&sys, &[0.3, 0.7], hd).unwrap();
//! let model = cylinder_weights(&sys, &fam, MeasureContext::Base, 3, 10_000).unwrap();
//!
//! // a ball covering the whole space has measure one
//! let (lo, hi) = ball_measure(&model, 0.5, 1.0);
//! assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
//! ```

use crate::diagnostics;
use crate::error::{MfaError, Result};
use crate::interval::Interval;
use crate::potential::{self, PotentialFamily, QtWeights};
use crate::pressure;
use crate::rng::CounterRng;
use crate::system::{SystemSpec, Word};
use crate::thermo::{self, SolveOpts};

/// Which weights a measure model carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureContext {
    /// The base family `F` (conformal measure `m_F`).
    Base,
    /// The tilted family at `(q, t)`.
    Tilted { q: f64, t: f64 },
}

#[derive(Debug, Clone)]
pub struct Cylinder {
    pub word: Word,
    pub interval: Interval,
    pub low: f64,
    pub high: f64,
}

/// Generation-`n` cylinder intervals with certified weight brackets.
///
/// For single-vertex systems the brackets `[exp(inf S), exp(sup S)]` enclose
/// the conformal measure of each cylinder rigorously. Multi-vertex systems
/// scale by collocation estimates of the piece masses, which are accurate but
/// not certified.
#[derive(Debug, Clone)]
pub struct MeasureModel {
    pub generation: usize,
    pub context: MeasureContext,
    cylinders: Vec<Cylinder>,
    prefix_low: Vec<f64>,
    prefix_high: Vec<f64>,
    /// Normalization defect: how far the bracket sums fail to straddle 1.
    pub defect: f64,
    pub max_cylinder_len: f64,
}

impl MeasureModel {
    pub fn cylinders(&self) -> &[Cylinder] {
        &self.cylinders
    }

    /// Sum of bracket midpoints (close to 1 for a normalized context).
    pub fn midpoint_total(&self) -> f64 {
        self.cylinders.iter().map(|c| 0.5 * (c.low + c.high)).sum()
    }
}

/// Build the generation-`n` measure model for the given context.
pub fn cylinder_weights(
    sys: &SystemSpec,
    family: &PotentialFamily,
    context: MeasureContext,
    n: usize,
    budget: u128,
) -> Result<MeasureModel> {
    let qt = match context {
        MeasureContext::Base => QtWeights::base(sys, family)?,
        MeasureContext::Tilted { q, t } => QtWeights::new(sys, family, q, t)?,
    };
    // ball geometry needs the pieces to be genuinely disjoint on the line,
    // not just disjoint copies
    for (i, a) in sys.vertices().iter().enumerate() {
        for b in &sys.vertices()[i + 1..] {
            if a.interval.interior_overlap(&b.interval) > 0.0 {
                return Err(MfaError::Unsupported(
                    "measure models need vertex pieces with disjoint interiors on the line"
                        .into(),
                ));
            }
        }
    }
    let masses = piece_masses(sys, family, &qt)?;
    let mut cylinders = Vec::new();
    let mut max_len = 0.0f64;
    for w in sys.enumerate_words(n, budget)? {
        let (lo, hi) = potential::cylinder_qt_bracket(sys, family, &qt, &w)?;
        let interval = sys.cylinder_interval(&w)?;
        let target = sys.edges()[*w.edges().last().unwrap()].target;
        let mass = masses[target];
        max_len = max_len.max(interval.len());
        cylinders.push(Cylinder {
            word: w,
            interval,
            low: lo.exp() * mass,
            high: hi.exp() * mass,
        });
    }
    cylinders.sort_by(|a, b| {
        a.interval
            .lo
            .total_cmp(&b.interval.lo)
            .then(a.interval.hi.total_cmp(&b.interval.hi))
    });
    let mut prefix_low = Vec::with_capacity(cylinders.len() + 1);
    let mut prefix_high = Vec::with_capacity(cylinders.len() + 1);
    prefix_low.push(0.0);
    prefix_high.push(0.0);
    let (mut sl, mut sh) = (0.0, 0.0);
    for c in &cylinders {
        sl += c.low;
        sh += c.high;
        prefix_low.push(sl);
        prefix_high.push(sh);
    }
    // worst deviation of the bracket sums from a probability vector
    let defect = (sl - 1.0).abs().max((sh - 1.0).abs());
    Ok(MeasureModel {
        generation: n,
        context,
        cylinders,
        prefix_low,
        prefix_high,
        defect,
        max_cylinder_len: max_len,
    })
}

/// Measure of each vertex piece: exactly 1 for single-vertex systems, the
/// left-Perron-vector estimate from the collocation matrix otherwise.
fn piece_masses(sys: &SystemSpec, family: &PotentialFamily, qt: &QtWeights) -> Result<Vec<f64>> {
    if sys.vertices().len() == 1 {
        return Ok(vec![1.0]);
    }
    let est = pressure::eigen_masses(sys, family, qt, 32)?;
    Ok(est)
}

/// Models at every generation from 1 to `max_generation`, stopping early when
/// the word budget is exhausted.
pub fn model_ladder(
    sys: &SystemSpec,
    family: &PotentialFamily,
    context: MeasureContext,
    max_generation: usize,
    budget: u128,
) -> Result<Vec<MeasureModel>> {
    let mut out = Vec::new();
    for n in 1..=max_generation {
        if sys.count_words(n) > budget {
            break;
        }
        out.push(cylinder_weights(sys, family, context, n, budget)?);
    }
    if out.is_empty() {
        return Err(MfaError::Budget(
            "word budget admits no measure model at all".into(),
        ));
    }
    Ok(out)
}

/// Bracket for the measure of the ball `B(x, r)`: the lower bound sums
/// `weight_low` over cylinders contained in the ball, the upper bound sums
/// `weight_high` over cylinders meeting it.
pub fn ball_measure(model: &MeasureModel, x: f64, r: f64) -> (f64, f64) {
    let lo_edge = x - r;
    let hi_edge = x + r;
    let cyls = &model.cylinders;
    let n = cyls.len();
    // cylinders have disjoint interiors and are sorted, so hi is monotone too
    let first_meet = cyls.partition_point(|c| c.interval.hi < lo_edge);
    let last_meet = cyls.partition_point(|c| c.interval.lo <= hi_edge);
    let high = if first_meet < last_meet {
        model.prefix_high[last_meet] - model.prefix_high[first_meet]
    } else {
        0.0
    };
    let first_cont = cyls.partition_point(|c| c.interval.lo < lo_edge);
    let mut last_cont = cyls.partition_point(|c| c.interval.hi <= hi_edge);
    last_cont = last_cont.min(n);
    let low = if first_cont < last_cont {
        model.prefix_low[last_cont] - model.prefix_low[first_cont]
    } else {
        0.0
    };
    (low, high)
}

/// Local dimension estimate from a log-log fit.
#[derive(Debug, Clone)]
pub struct LocalDimEstimate {
    pub x: f64,
    pub radii: Vec<f64>,
    pub slope: f64,
    pub slope_stderr: f64,
    /// Radii for which no model resolved the ball comfortably.
    pub wide_radii: usize,
}

/// Least-squares slope of `log mu(B(x, r))` against `log r` over the given
/// radii, using bracket midpoints. Radii must be strictly decreasing. For
/// each radius the deepest model whose largest cylinder is at most `r/2` is
/// used (falling back to the deepest available, counted in `wide_radii`).
pub fn local_dimension(
    models: &[MeasureModel],
    x: f64,
    radii: &[f64],
) -> Result<LocalDimEstimate> {
    if radii.len() < 6 {
        return Err(MfaError::Parameter("need at least 6 radii".into()));
    }
    if radii.windows(2).any(|p| p[1] >= p[0]) {
        return Err(MfaError::Parameter("radii must be strictly decreasing".into()));
    }
    if models.is_empty() {
        return Err(MfaError::Parameter("no measure models supplied".into()));
    }
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    let mut wide = 0usize;
    for &r in radii {
        let model = models
            .iter()
            .rev()
            .find(|m| m.max_cylinder_len <= 0.5 * r)
            .unwrap_or_else(|| {
                models.last().unwrap()
            });
        if model.max_cylinder_len > 0.5 * r {
            wide += 1;
        }
        let (lo, hi) = ball_measure(model, x, r);
        let mid = 0.5 * (lo + hi);
        if !(mid > 0.0) {
            return Err(MfaError::Domain(format!(
                "degenerate ball measure at x = {x}, r = {r}"
            )));
        }
        xs.push(r.ln());
        ys.push(mid.ln());
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let resid_ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = ybar + slope * (x - xbar);
            (y - fit).powi(2)
        })
        .sum();
    let stderr = (resid_ss / (n - 2.0) / sxx).sqrt();
    Ok(LocalDimEstimate {
        x,
        radii: radii.to_vec(),
        slope,
        slope_stderr: stderr,
        wide_radii: wide,
    })
}

/// First-order Markov approximation of the tilted equilibrium state at
/// `(q, T(q))` and deterministic sampling from it.
///
/// The edge-pair weight matrix is `M[e][f] = A[e][f] * exp(w_e(x_f))` where
/// `x_f` is the image of the left endpoint under `phi_f` (a reference point
/// inside the cylinder of `f`). Its Perron data induce the stationary chain
/// `P[e][f] = M[e][f] r_f / (lambda r_e)` started from `l_e r_e`. Sampled
/// words are projected to cylinder midpoints at the requested depth. Exact
/// for edge-constant weights on full shifts.
pub fn sample_mu_q(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    count: usize,
    word_length: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    // Wielandt bound on the index of primitivity, capped for huge alphabets
    let ne = sys.edge_count();
    let p_max = (ne.saturating_sub(1).pow(2) + 1).min(128);
    let prim = diagnostics::check_finitely_primitive(sys, p_max);
    if !prim.primitive {
        return Err(MfaError::Unsupported(
            "sampling needs a finitely primitive incidence matrix".into(),
        ));
    }
    let opts = SolveOpts::default();
    let (t, _res) = thermo::solve_pressure_root(sys, family, q, None, 32, opts.residual_tol)?;
    let qt = QtWeights::new(sys, family, q, t)?;

    let mut m = vec![0.0f64; ne * ne];
    for f in 0..ne {
        let dom_f = &sys.vertices()[sys.edges()[f].target].interval;
        let x_f = sys.edges()[f].kind.value(dom_f.lo);
        for e in 0..ne {
            if sys.incidence().allows(e, f) {
                m[e * ne + f] = qt.log_weight(sys, family, e, x_f).exp();
            }
        }
    }
    let (lambda, _resid, right) = pressure::power_iteration(&m, ne)?;
    let (_ll, left) = pressure::left_power_iteration(&m, ne)?;

    // stationary chain
    let mut rows = vec![0.0f64; ne * ne];
    for e in 0..ne {
        let mut sum = 0.0;
        for f in 0..ne {
            let v = m[e * ne + f] * right[f] / (lambda * right[e]);
            rows[e * ne + f] = v;
            sum += v;
        }
        for f in 0..ne {
            rows[e * ne + f] /= sum;
        }
    }
    let mut init: Vec<f64> = (0..ne).map(|e| left[e].max(0.0) * right[e].max(0.0)).collect();
    let tot: f64 = init.iter().sum();
    init.iter_mut().for_each(|v| *v /= tot);

    let mut points = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = CounterRng::new(seed, k as u64);
        let mut word = Vec::with_capacity(word_length);
        let mut cur = pick(&init, rng.next_uniform());
        word.push(cur);
        for _ in 1..word_length {
            let row = &rows[cur * ne..(cur + 1) * ne];
            cur = pick(row, rng.next_uniform());
            word.push(cur);
        }
        let w = Word::new(word);
        points.push(sys.cylinder_interval(&w)?.mid());
    }
    Ok(points)
}

fn pick(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Result of the concentration check at one `q`.
#[derive(Debug, Clone)]
pub struct ConcentrationReport {
    pub q: f64,
    /// Reference value `alpha(q)` from the pressure gradient.
    pub alpha: f64,
    pub fraction_in_band: f64,
    pub count: usize,
    pub in_band: usize,
    pub estimates: Vec<LocalDimEstimate>,
}

/// Sample `count` points from the tilted state at `q` and estimate the local
/// dimension of the *base* measure at each; report the fraction within
/// `band` of `alpha(q)`.
pub fn concentration_test(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    count: usize,
    word_length: usize,
    seed: u64,
    band: f64,
    budget: u128,
) -> Result<ConcentrationReport> {
    let opts = SolveOpts::default();
    let point = thermo::solve_temperature(sys, family, q, None, &opts)?;
    let alpha = point.alpha_grad;

    let points = sample_mu_q(sys, family, q, count, word_length, seed)?;
    let max_gen = word_length + 2;
    let models = model_ladder(sys, family, MeasureContext::Base, max_gen, budget)?;
    let deepest = models.last().unwrap();
    let r_min = (deepest.max_cylinder_len * 2.0).max(1e-300);
    let r_max = sys.diameter() / 4.0;
    let mut radii = Vec::new();
    let mut r = r_max;
    while r >= r_min {
        radii.push(r);
        r *= 0.5;
    }
    if radii.len() < 6 {
        return Err(MfaError::Parameter(
            "radius range too short; increase word length or budget".into(),
        ));
    }

    let mut in_band = 0usize;
    let mut estimates = Vec::with_capacity(points.len());
    for &x in &points {
        let est = local_dimension(&models, x, &radii)?;
        if (est.slope - alpha).abs() <= band {
            in_band += 1;
        }
        estimates.push(est);
    }
    Ok(ConcentrationReport {
        q,
        alpha,
        fraction_in_band: in_band as f64 / points.len() as f64,
        count: points.len(),
        in_band,
        estimates,
    })
}
