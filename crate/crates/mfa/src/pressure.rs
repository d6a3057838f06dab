//! Topological pressure of tilted weight families.
//!
//! Two routes with distinct roles:
//!
//! * **Partition bracketing** sums certified cylinder brackets of the tilted
//!   ergodic sums over all words of each length. On full-shift systems the
//!   sup-sums are submultiplicative and the inf-sums supermultiplicative, so
//!   every length yields a certified upper/lower bound on the pressure. Slow
//!   but rigorous; used as the oracle.
//! * **Collocation** discretizes the weighted transfer operator on Chebyshev
//!   grids and takes the log of its leading eigenvalue via power iteration.
//!   Superexponentially accurate for analytic maps; used for production
//!   curves.
//!
//! ```
//! use mfa::builtin;
//! use mfa::potential::PotentialFamily;
//! use mfa::pressure::{pressure_bracket, pressure_collocation};
//!
//! // middle-third Cantor at exponent t: pressure log(2 * 3^-t), exactly
//! // recovered by collocation and enclosed by the partition bracket
//! let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
//! let fam = PotentialFamily::geometric(&sys, 0.8).unwrap();
//! let t = 0.5;
//! let coll = pressure_collocation(&sys, &fam, 0.0, t, 16).unwrap();
//! let expected = (2.0 * 3.0f64.powf(-t)).ln();
//! assert!((coll.value - expected).abs() < 1e-13);
//!
//! let bracket = pressure_bracket(&sys, &fam, 0.0, t, 4, 10_000).unwrap();
//! assert!(bracket.lower.unwrap() - 1e-12 <= coll.value);
//! assert!(coll.value <= bracket.upper.unwrap() + 1e-12);
//! ```

use crate::cheb;
use crate::error::{MfaError, Result};
use crate::potential::{PotentialFamily, QtWeights};
use crate::system::SystemSpec;

pub use crate::diagnostics::check_cofinite_regularity;

/// Default cap on enumerated words per partition level.
pub const DEFAULT_WORD_BUDGET: u128 = 20_000_000;

/// How a pressure value was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PressureMethod {
    /// Partition sums up to length `n`.
    Partition { n: usize },
    /// Transfer-operator collocation on `m` Chebyshev nodes per interval.
    Collocation { m: usize },
}

impl std::fmt::Display for PressureMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PressureMethod::Partition { n } => write!(f, "partition({n})"),
            PressureMethod::Collocation { m } => write!(f, "collocation({m})"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PressureDiagnostics {
    pub word_count: u128,
    pub eigen_residual: f64,
    pub bracket_width: f64,
}

/// A pressure value with optional certified bounds.
#[derive(Debug, Clone)]
pub struct PressureEstimate {
    pub q: f64,
    pub t: f64,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub method: PressureMethod,
    pub diagnostics: PressureDiagnostics,
}

impl PressureEstimate {
    pub fn certified(&self) -> bool {
        self.lower.is_some() && self.upper.is_some()
    }
}

/// The finiteness parameter used by all domain guards: the parent family's
/// `theta` when a tail model is declared, 0 for finite systems.
pub fn finiteness_parameter(sys: &SystemSpec) -> f64 {
    sys.finiteness_parameter()
}

/// Partition sums at length `n`: `Z_sup = sum_w exp(sup S_w)` and `Z_inf`
/// likewise with the infimum, both over certified cylinder brackets.
pub fn partition_sum(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    t: f64,
    n: usize,
    budget: u128,
) -> Result<(f64, f64)> {
    let qt = QtWeights::new(sys, family, q, t)?;
    partition_sum_qt(sys, family, &qt, n, budget)
}

fn partition_sum_qt(
    sys: &SystemSpec,
    family: &PotentialFamily,
    qt: &QtWeights,
    n: usize,
    budget: u128,
) -> Result<(f64, f64)> {
    let mut z_inf = 0.0f64;
    let mut z_sup = 0.0f64;
    for w in sys.enumerate_words(n, budget)? {
        let (lo, hi) = crate::potential::cylinder_qt_bracket(sys, family, qt, &w)?;
        z_inf += lo.exp();
        z_sup += hi.exp();
    }
    if !z_inf.is_finite() || !z_sup.is_finite() {
        return Err(MfaError::Convergence(format!(
            "partition sum overflowed at n = {n}"
        )));
    }
    Ok((z_inf, z_sup))
}

/// Certified pressure bracket from partition sums up to length `n_max`.
///
/// On full-shift systems with edge-constant weights and analytic maps,
/// `(1/n) log Z_sup(n)` is a valid upper bound for every `n` and
/// `(1/n) log Z_inf(n)` a valid lower bound; the bracket takes the best of
/// each. Other structures get the same computation without certification
/// (bounds left empty).
pub fn pressure_bracket(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    t: f64,
    n_max: usize,
    budget: u128,
) -> Result<PressureEstimate> {
    let qt = QtWeights::new(sys, family, q, t)?;
    let certifiable = sys.is_full_shift_ifs()
        && family.psi_is_edge_constant()
        && sys.edges().iter().all(|e| e.kind.is_analytic());

    let mut best_upper = f64::INFINITY;
    let mut best_lower = f64::NEG_INFINITY;
    let mut words_total: u128 = 0;
    let mut last_mid = 0.0;
    let mut levels = 0usize;
    for n in 1..=n_max {
        if sys.count_words(n) > budget {
            break;
        }
        let (zi, zs) = partition_sum_qt(sys, family, &qt, n, budget)?;
        words_total = words_total.saturating_add(sys.count_words(n));
        let up = zs.ln() / n as f64;
        let lo = zi.ln() / n as f64;
        best_upper = best_upper.min(up);
        best_lower = best_lower.max(lo);
        last_mid = 0.5 * (up + lo);
        levels = n;
    }
    if levels == 0 {
        return Err(MfaError::Budget(format!(
            "word budget {budget} admits no partition level"
        )));
    }
    let (lower, upper, value, width) = if certifiable {
        let v = 0.5 * (best_lower + best_upper);
        (
            Some(best_lower),
            Some(best_upper),
            v,
            best_upper - best_lower,
        )
    } else {
        (None, None, last_mid, f64::NAN)
    };
    Ok(PressureEstimate {
        q,
        t,
        value,
        lower,
        upper,
        method: PressureMethod::Partition { n: levels },
        diagnostics: PressureDiagnostics {
            word_count: words_total,
            eigen_residual: f64::NAN,
            bracket_width: width,
        },
    })
}

/// Pressure as the log of the leading eigenvalue of the weighted transfer
/// operator, discretized by polynomial collocation on `m` Chebyshev nodes per
/// vertex interval.
///
/// The operator sends `g` to `x -> sum_e w_e(x) g(phi_e(x))` where the sum
/// runs over edges defined at `x` and `w_e(x)` is the exponential of the
/// tilted log-weight. When incidence is not determined by vertex adjacency
/// the operator acts on edge-indexed functions with incidence masking.
pub fn pressure_collocation(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    t: f64,
    m: usize,
) -> Result<PressureEstimate> {
    let qt = QtWeights::new(sys, family, q, t)?;
    if sys.edges().iter().any(|e| !e.kind.is_analytic()) {
        return Err(MfaError::Unsupported(
            "collocation needs analytic (affine/moebius) maps".into(),
        ));
    }
    let matrix = if sys.is_vertex_determined() {
        build_vertex_matrix(sys, family, &qt, m)
    } else {
        build_edge_matrix(sys, family, &qt, m)
    };
    let (lambda, residual, _v) = power_iteration(&matrix.data, matrix.dim)?;
    if !(lambda > 0.0) {
        return Err(MfaError::Convergence(format!(
            "leading eigenvalue {lambda} not positive at m = {m}"
        )));
    }
    Ok(PressureEstimate {
        q,
        t,
        value: lambda.ln(),
        lower: None,
        upper: None,
        method: PressureMethod::Collocation { m },
        diagnostics: PressureDiagnostics {
            word_count: 0,
            eigen_residual: residual,
            bracket_width: f64::NAN,
        },
    })
}

/// Collocation with node doubling: starts at `m0` and doubles until two
/// successive eigenvalue logs agree to `1e-10` or the node count reaches 256.
pub fn pressure_auto(
    sys: &SystemSpec,
    family: &PotentialFamily,
    q: f64,
    t: f64,
    m0: usize,
) -> Result<PressureEstimate> {
    let mut m = m0.max(8);
    let mut prev = pressure_collocation(sys, family, q, t, m)?;
    while m < 256 {
        let m2 = (m * 2).min(256);
        let next = pressure_collocation(sys, family, q, t, m2)?;
        if (next.value - prev.value).abs() <= 1e-10 {
            return Ok(next);
        }
        prev = next;
        m = m2;
    }
    Ok(prev)
}

pub(crate) struct CollocationMatrix {
    pub data: Vec<f64>,
    pub dim: usize,
    /// Start offset of each block (per vertex or per edge) plus `dim`.
    pub offsets: Vec<usize>,
}

fn build_vertex_matrix(
    sys: &SystemSpec,
    family: &PotentialFamily,
    qt: &QtWeights,
    m: usize,
) -> CollocationMatrix {
    let nv = sys.vertices().len();
    let dim = nv * m;
    let ws = cheb::bary_weights(m);
    let nodes: Vec<Vec<f64>> = sys
        .vertices()
        .iter()
        .map(|v| cheb::nodes(m, v.interval.lo, v.interval.hi))
        .collect();
    let mut data = vec![0.0; dim * dim];
    let mut coeffs = vec![0.0; m];
    for (eid, e) in sys.edges().iter().enumerate() {
        let row_block = e.target; // operator sums over edges defined on the row's piece
        let col_block = e.source;
        for i in 0..m {
            let x = nodes[row_block][i];
            let (y, deriv) = e.kind.eval(x);
            let w = (qt.q * (family.psi_value(eid, x) - family.normalization())
                + qt.exponent() * deriv.ln())
            .exp();
            cheb::eval_coeffs(&nodes[col_block], &ws, y, &mut coeffs);
            let row = row_block * m + i;
            for (j, &c) in coeffs.iter().enumerate() {
                data[row * dim + col_block * m + j] += w * c;
            }
        }
    }
    CollocationMatrix {
        data,
        dim,
        offsets: (0..=nv).map(|k| k * m).collect(),
    }
}

fn build_edge_matrix(
    sys: &SystemSpec,
    family: &PotentialFamily,
    qt: &QtWeights,
    m: usize,
) -> CollocationMatrix {
    let ne = sys.edge_count();
    let dim = ne * m;
    let ws = cheb::bary_weights(m);
    // block b holds a function on the piece the image of b lands in, i(b)
    let nodes: Vec<Vec<f64>> = sys
        .edges()
        .iter()
        .map(|e| {
            let iv = sys.vertices()[e.source].interval;
            cheb::nodes(m, iv.lo, iv.hi)
        })
        .collect();
    let mut data = vec![0.0; dim * dim];
    let mut coeffs = vec![0.0; m];
    for b in 0..ne {
        for (eid, e) in sys.edges().iter().enumerate() {
            if !sys.incidence().allows(eid, b) {
                continue;
            }
            // t(e) = i(b): rows of block b are nodes on X_{i(b)} = domain of e
            for i in 0..m {
                let x = nodes[b][i];
                let (y, deriv) = e.kind.eval(x);
                let w = (qt.q * (family.psi_value(eid, x) - family.normalization())
                    + qt.exponent() * deriv.ln())
                .exp();
                cheb::eval_coeffs(&nodes[eid], &ws, y, &mut coeffs);
                let row = b * m + i;
                for (j, &c) in coeffs.iter().enumerate() {
                    data[row * dim + eid * m + j] += w * c;
                }
            }
        }
    }
    CollocationMatrix {
        data,
        dim,
        offsets: (0..=ne).map(|k| k * m).collect(),
    }
}

/// Power iteration on the collocation matrix. Starts from the constant
/// function, normalizes by the max-abs entry, estimates the eigenvalue by the
/// Rayleigh quotient, and stops when successive estimates agree to `1e-13`.
///
/// Far from the pressure roots the true eigenvalue can be tiny, and spurious
/// discretization modes (the interpolation coefficients are not all positive)
/// may dominate it in modulus. The operator itself is positivity-preserving
/// with real leading spectrum, so when the plain iteration converges to a
/// non-positive value it is rerun on the shifted matrix `L + sigma I`, which
/// moves the Perron mode back to the top.
pub(crate) fn power_iteration(data: &[f64], dim: usize) -> Result<(f64, f64, Vec<f64>)> {
    match power_iteration_shifted(data, dim, 0.0) {
        Ok((lam, resid, v)) if lam > 0.0 => Ok((lam, resid, v)),
        _ => {
            let sigma = (0..dim)
                .map(|i| data[i * dim..(i + 1) * dim].iter().map(|x| x.abs()).sum())
                .fold(0.0f64, f64::max);
            let (lam, resid, v) = power_iteration_shifted(data, dim, sigma)?;
            Ok((lam, resid, v))
        }
    }
}

fn power_iteration_shifted(
    data: &[f64],
    dim: usize,
    sigma: f64,
) -> Result<(f64, f64, Vec<f64>)> {
    let mut v = vec![1.0f64; dim];
    let mut lam_old = f64::NAN;
    let mut mv = vec![0.0f64; dim];
    let step = |v: &[f64], mv: &mut [f64]| {
        mat_vec(data, dim, v, mv);
        if sigma != 0.0 {
            mv.iter_mut().zip(v).for_each(|(o, &x)| *o += sigma * x);
        }
    };
    for _ in 0..10_000 {
        step(&v, &mut mv);
        let scale = mv.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if scale == 0.0 {
            return Err(MfaError::Convergence("operator annihilated the cone".into()));
        }
        let num: f64 = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        let lam = num / den - sigma;
        v.iter_mut().zip(&mv).for_each(|(a, &b)| *a = b / scale);
        if (lam - lam_old).abs() <= 1e-13 * lam.abs().max(1.0) {
            mat_vec(data, dim, &v, &mut mv);
            let resid = v
                .iter()
                .zip(&mv)
                .map(|(a, b)| (b - lam * a).abs())
                .fold(0.0f64, f64::max)
                / v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            return Ok((lam, resid, v));
        }
        lam_old = lam;
    }
    Err(MfaError::Convergence(
        "power iteration did not settle within 10000 steps".into(),
    ))
}

fn mat_vec(data: &[f64], dim: usize, v: &[f64], out: &mut [f64]) {
    for i in 0..dim {
        let row = &data[i * dim..(i + 1) * dim];
        out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// Left Perron vector (eigenvector of the transpose), used for eigenmeasure
/// piece masses.
pub(crate) fn left_power_iteration(data: &[f64], dim: usize) -> Result<(f64, Vec<f64>)> {
    let mut tr = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            tr[j * dim + i] = data[i * dim + j];
        }
    }
    let (lam, _res, v) = power_iteration(&tr, dim)?;
    Ok((lam, v))
}

/// Eigenmeasure mass of each vertex piece, from block sums of the left
/// Perron vector of the collocation matrix. The left vector represents the
/// eigenfunctional through the Lagrange basis, so summing its entries over a
/// block evaluates the functional on the indicator of that piece.
pub(crate) fn eigen_masses(
    sys: &SystemSpec,
    family: &PotentialFamily,
    qt: &QtWeights,
    m: usize,
) -> Result<Vec<f64>> {
    let (matrix, per_edge) = if sys.is_vertex_determined() {
        (build_vertex_matrix(sys, family, qt, m), false)
    } else {
        (build_edge_matrix(sys, family, qt, m), true)
    };
    let (_lam, left) = left_power_iteration(&matrix.data, matrix.dim)?;
    let nblocks = matrix.offsets.len() - 1;
    let mut block_mass = vec![0.0f64; nblocks];
    for (k, bm) in block_mass.iter_mut().enumerate() {
        *bm = left[matrix.offsets[k]..matrix.offsets[k + 1]]
            .iter()
            .map(|v| v.max(0.0))
            .sum();
    }
    let mut masses = vec![0.0f64; sys.vertices().len()];
    if per_edge {
        for (b, e) in sys.edges().iter().enumerate() {
            masses[e.source] += block_mass[b];
        }
    } else {
        masses.copy_from_slice(&block_mass);
    }
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(MfaError::Convergence("left Perron vector degenerated".into()));
    }
    masses.iter_mut().for_each(|v| *v /= total);
    Ok(masses)
}
