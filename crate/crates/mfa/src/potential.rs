//! Weight families on edges and the two-parameter tilt used throughout.
//!
//! A family pairs per-edge weights `psi_e` with the geometric log-derivative
//! family scaled by an exponent `u`, giving per-edge functions
//! `f_e = psi_e + u * log|phi'_e| - c` where `c` is the pressure
//! normalization. The two-parameter tilt combines `q` copies of `f` with `t`
//! extra powers of the derivative, so its per-edge log-weight is
//! `q*(psi_e - c) + (q*u + t) * log|phi'_e|`.
//!
//! ```
//! use mfa::builtin;
//! use mfa::potential::{ergodic_sum, PotentialFamily};
//! use mfa::system::Word;
//!
//! // the measure-weights encoding makes f_e = log p_e exactly, so ergodic
//! // sums just add digit log-probabilities
//! let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
//! let fam = PotentialFamily::measure_weights(&sys, &[0.3, 0.7], 0.9).unwrap();
//! let s = ergodic_sum(&sys, &fam, &Word::new(vec![1, 0]), 0.0).unwrap();
//! assert!((s - (0.7f64.ln() + 0.3f64.ln())).abs() < 1e-13);
//! ```

use std::sync::Arc;

use crate::error::{MfaError, Result};
use crate::system::{EdgeId, SystemSpec, Word};

/// Per-edge weight specification.
#[derive(Clone)]
pub enum PsiSpec {
    /// `psi_e == 0` for every edge (pure geometric analysis).
    Zero,
    /// One constant per edge, in edge-id order.
    EdgeConstants(Vec<f64>),
    /// `psi_e(x) = a_e * x + b_e`.
    AffineInX(Vec<(f64, f64)>),
    /// Black-box weights; brackets then need declared Hoelder metadata.
    Custom(Arc<dyn Fn(EdgeId, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for PsiSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PsiSpec::Zero => write!(f, "Zero"),
            PsiSpec::EdgeConstants(c) => write!(f, "EdgeConstants({c:?})"),
            PsiSpec::AffineInX(c) => write!(f, "AffineInX({c:?})"),
            PsiSpec::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Declared Hoelder regularity of the weight family.
#[derive(Debug, Clone, Copy)]
pub struct HolderMeta {
    pub beta: f64,
    pub v_beta: f64,
}

/// A bounded Hoelder weight family together with the derivative exponent `u`
/// and the pressure normalization constant.
#[derive(Debug, Clone)]
pub struct PotentialFamily {
    psi: PsiSpec,
    u: f64,
    normalization: f64,
    sup_norm: f64,
    sup_psi: f64,
    inf_psi: f64,
    holder: Option<HolderMeta>,
    normalization_method: Option<String>,
}

impl PotentialFamily {
    /// Pure geometric family (`psi == 0`) with exponent `u`.
    pub fn geometric(sys: &SystemSpec, u: f64) -> Result<Self> {
        Self::new(sys, PsiSpec::Zero, u, None)
    }

    /// One constant weight per edge.
    pub fn edge_constants(sys: &SystemSpec, constants: Vec<f64>, u: f64) -> Result<Self> {
        Self::new(sys, PsiSpec::EdgeConstants(constants), u, None)
    }

    /// Encode a self-similar measure benchmark: probabilities `p_e` on affine
    /// maps with ratios `r_e` via `psi_e = log p_e - u * log r_e`, so that
    /// `f_e = log p_e` exactly and the family is already normalized when
    /// `sum p_e = 1`.
    pub fn measure_weights(sys: &SystemSpec, probs: &[f64], u: f64) -> Result<Self> {
        if probs.len() != sys.edge_count() {
            return Err(MfaError::Parameter(
                "one probability per edge is required".into(),
            ));
        }
        if probs.iter().any(|&p| p <= 0.0) {
            return Err(MfaError::Parameter("probabilities must be positive".into()));
        }
        let mut constants = Vec::with_capacity(probs.len());
        for (e, &p) in sys.edges().iter().zip(probs) {
            match e.kind {
                crate::maps::MapKind::Affine { slope, .. } => {
                    constants.push(p.ln() - u * slope.abs().ln());
                }
                _ => {
                    return Err(MfaError::Parameter(
                        "measure_weights needs affine edges (constant derivatives)".into(),
                    ))
                }
            }
        }
        Self::new(sys, PsiSpec::EdgeConstants(constants), u, None)
    }

    pub fn new(
        sys: &SystemSpec,
        psi: PsiSpec,
        u: f64,
        holder: Option<HolderMeta>,
    ) -> Result<Self> {
        let theta = sys.finiteness_parameter();
        if !(u > theta) {
            return Err(MfaError::Parameter(format!(
                "exponent u = {u} must exceed the finiteness parameter {theta}"
            )));
        }
        match &psi {
            PsiSpec::EdgeConstants(c) if c.len() != sys.edge_count() => {
                return Err(MfaError::Parameter(
                    "edge-constant weights must match the edge count".into(),
                ))
            }
            PsiSpec::AffineInX(c) if c.len() != sys.edge_count() => {
                return Err(MfaError::Parameter(
                    "affine weights must match the edge count".into(),
                ))
            }
            PsiSpec::Custom(_) if holder.is_none() => {
                return Err(MfaError::Parameter(
                    "custom weights need declared Hoelder metadata".into(),
                ))
            }
            _ => {}
        }
        let (sup_psi, inf_psi, sup_norm) = psi_bounds(sys, &psi)?;
        if !sup_norm.is_finite() {
            return Err(MfaError::Parameter("unbounded weight family".into()));
        }
        Ok(PotentialFamily {
            psi,
            u,
            normalization: 0.0,
            sup_norm,
            sup_psi,
            inf_psi,
            holder,
            normalization_method: None,
        })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn normalization_method(&self) -> Option<&str> {
        self.normalization_method.as_deref()
    }

    /// `||Psi|| = sup_e sup_x |psi_e(x)|` (before normalization).
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Sup norm of the family actually in force, `psi - c`.
    pub fn eff_sup_norm(&self) -> f64 {
        (self.sup_psi - self.normalization)
            .abs()
            .max((self.inf_psi - self.normalization).abs())
    }

    pub fn sup_psi(&self) -> f64 {
        self.sup_psi
    }

    pub fn inf_psi(&self) -> f64 {
        self.inf_psi
    }

    pub fn holder(&self) -> Option<HolderMeta> {
        self.holder
    }

    pub fn psi_value(&self, e: EdgeId, x: f64) -> f64 {
        match &self.psi {
            PsiSpec::Zero => 0.0,
            PsiSpec::EdgeConstants(c) => c[e],
            PsiSpec::AffineInX(c) => c[e].0 * x + c[e].1,
            PsiSpec::Custom(f) => f(e, x),
        }
    }

    pub fn psi_is_edge_constant(&self) -> bool {
        matches!(self.psi, PsiSpec::Zero | PsiSpec::EdgeConstants(_))
    }

    /// Copy of the family with the normalization constant replaced.
    pub fn with_normalization(&self, c: f64, method: impl Into<String>) -> Self {
        let mut out = self.clone();
        out.normalization = c;
        out.normalization_method = Some(method.into());
        out
    }

    /// Shift every `psi_e` by a constant (pressure shifts by the same amount).
    pub fn shifted(&self, sys: &SystemSpec, delta: f64) -> Result<Self> {
        let psi = match &self.psi {
            PsiSpec::Zero => PsiSpec::EdgeConstants(vec![delta; sys.edge_count()]),
            PsiSpec::EdgeConstants(c) => {
                PsiSpec::EdgeConstants(c.iter().map(|v| v + delta).collect())
            }
            PsiSpec::AffineInX(c) => {
                PsiSpec::AffineInX(c.iter().map(|&(a, b)| (a, b + delta)).collect())
            }
            PsiSpec::Custom(f) => {
                let f = f.clone();
                PsiSpec::Custom(Arc::new(move |e, x| f(e, x) + delta))
            }
        };
        let mut out = Self::new(sys, psi, self.u, self.holder)?;
        out.normalization = self.normalization;
        out.normalization_method = self.normalization_method.clone();
        Ok(out)
    }

    /// Per-edge Lipschitz bound for `x -> psi_e(x)` where available.
    fn psi_lipschitz(&self, e: EdgeId) -> Option<f64> {
        match &self.psi {
            PsiSpec::Zero | PsiSpec::EdgeConstants(_) => Some(0.0),
            PsiSpec::AffineInX(c) => Some(c[e].0.abs()),
            PsiSpec::Custom(_) => None,
        }
    }
}

fn psi_bounds(sys: &SystemSpec, psi: &PsiSpec) -> Result<(f64, f64, f64)> {
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    match psi {
        PsiSpec::Zero => return Ok((0.0, 0.0, 0.0)),
        PsiSpec::EdgeConstants(c) => {
            for &v in c {
                sup = sup.max(v);
                inf = inf.min(v);
            }
        }
        PsiSpec::AffineInX(c) => {
            for (e, &(a, b)) in c.iter().enumerate() {
                let dom = &sys.vertices()[sys.edges()[e].target].interval;
                let v0 = a * dom.lo + b;
                let v1 = a * dom.hi + b;
                sup = sup.max(v0).max(v1);
                inf = inf.min(v0).min(v1);
            }
        }
        PsiSpec::Custom(f) => {
            for (e, edge) in sys.edges().iter().enumerate() {
                let dom = &sys.vertices()[edge.target].interval;
                for k in 0..=32 {
                    let x = dom.lo + dom.len() * (k as f64) / 32.0;
                    let v = f(e, x);
                    sup = sup.max(v);
                    inf = inf.min(v);
                }
            }
        }
    }
    Ok((sup, inf, sup.abs().max(inf.abs())))
}

/// The tilt parameters `(q, t)`; construction enforces the summability guard
/// `q*u + t > theta`.
#[derive(Debug, Clone, Copy)]
pub struct QtWeights {
    pub q: f64,
    pub t: f64,
    exponent: f64,
}

impl QtWeights {
    pub fn new(sys: &SystemSpec, family: &PotentialFamily, q: f64, t: f64) -> Result<Self> {
        let theta = sys.finiteness_parameter();
        let exponent = q * family.u() + t;
        if !(exponent > theta) {
            return Err(MfaError::Domain(format!(
                "q*u + t = {exponent} <= theta = {theta}: the tilted family is not summable"
            )));
        }
        Ok(QtWeights { q, t, exponent })
    }

    /// The base family itself: `(q, t) = (1, 0)`.
    pub fn base(sys: &SystemSpec, family: &PotentialFamily) -> Result<Self> {
        Self::new(sys, family, 1.0, 0.0)
    }

    /// Bypass the guard (negative-exponent bracket logic is unreachable
    /// through `new` because `theta >= 0`).
    #[cfg(test)]
    pub(crate) fn raw(q: f64, t: f64, exponent: f64) -> Self {
        QtWeights { q, t, exponent }
    }

    /// Derivative exponent `q*u + t`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Log-weight of a single edge at `x`:
    /// `q*(psi_e(x) - c) + (q*u + t) * log|phi'_e(x)|`.
    pub fn log_weight(
        &self,
        sys: &SystemSpec,
        family: &PotentialFamily,
        e: EdgeId,
        x: f64,
    ) -> f64 {
        let (_, deriv) = sys.edges()[e].kind.eval(x);
        self.q * (family.psi_value(e, x) - family.normalization()) + self.exponent * deriv.ln()
    }
}

impl SystemSpec {
    /// Finiteness parameter used for domain guards: the parent family's
    /// `theta = 1/gamma` when a tail model is declared, 0 for genuinely
    /// finite systems.
    pub fn finiteness_parameter(&self) -> f64 {
        self.tail().map(|t| t.theta()).unwrap_or(0.0)
    }
}

/// Replace the normalization constant by the current pressure of the base
/// family, so that the re-computed pressure vanishes.
///
/// Subtracting a constant `c` from every `psi_e` shifts every length-`n` sum
/// by `n*c` and hence the pressure by exactly `c`; storing `c` as the
/// normalization achieves the same without touching the weights. The method
/// used (collocation at the settled node count) is recorded on the family.
pub fn normalize(
    sys: &SystemSpec,
    family: &PotentialFamily,
    tol: f64,
) -> Result<PotentialFamily> {
    let est = crate::pressure::pressure_auto(sys, family, 1.0, 0.0, 32)?;
    let out = family.with_normalization(
        family.normalization() + est.value,
        est.method.to_string(),
    );
    let check = crate::pressure::pressure_auto(sys, &out, 1.0, 0.0, 32)?;
    if check.value.abs() > tol {
        return Err(MfaError::Convergence(format!(
            "pressure after normalization is {} (tolerance {tol})",
            check.value
        )));
    }
    Ok(out)
}

/// Ergodic sum of the base family along the orbit of `x` under the word `w`:
/// `sum_i [psi_{w_i} + u*log|phi'_{w_i}|]` evaluated along the orbit, minus
/// `|w|` times the normalization constant.
pub fn ergodic_sum(
    sys: &SystemSpec,
    family: &PotentialFamily,
    w: &Word,
    x: f64,
) -> Result<f64> {
    sys.check_admissible(w)?;
    let dom = sys.word_domain(w);
    if !dom.contains_with_tol(x, 1e-12 * (1.0 + dom.len())) {
        return Err(MfaError::Domain(format!(
            "x = {x} outside domain [{}, {}]",
            dom.lo, dom.hi
        )));
    }
    let mut acc = 0.0;
    let mut cur = x;
    for &e in w.edges().iter().rev() {
        let (value, deriv) = sys.edges()[e].kind.eval(cur);
        acc += family.psi_value(e, cur) + family.u() * deriv.ln();
        cur = value;
    }
    Ok(acc - w.len() as f64 * family.normalization())
}

/// Certified bracket `[inf, sup]` of the base-family ergodic sum over the
/// cylinder of `w` (i.e. over all `x` in the domain interval of `w`).
pub fn cylinder_sum_bracket(
    sys: &SystemSpec,
    family: &PotentialFamily,
    w: &Word,
) -> Result<(f64, f64)> {
    let (psi_lo, psi_hi) = bracket_psi_sum(sys, family, w)?;
    let (d_lo, d_hi) = sys.word_deriv_range(w)?;
    let shift = w.len() as f64 * family.normalization();
    // u > theta >= 0, so the sup pairs with the derivative sup
    Ok((
        psi_lo + family.u() * d_lo.ln() - shift,
        psi_hi + family.u() * d_hi.ln() - shift,
    ))
}

/// Bracket of the tilted sum `S_w F_{q,t}` over the cylinder of `w`. The
/// derivative exponent `q*u + t` may be negative, in which case it pairs with
/// the opposite derivative extremum.
pub fn cylinder_qt_bracket(
    sys: &SystemSpec,
    family: &PotentialFamily,
    qt: &QtWeights,
    w: &Word,
) -> Result<(f64, f64)> {
    let (psi_lo, psi_hi) = bracket_psi_sum(sys, family, w)?;
    let (d_lo, d_hi) = sys.word_deriv_range(w)?;
    let n = w.len() as f64;
    let c = family.normalization();
    let (qpsi_lo, qpsi_hi) = if qt.q >= 0.0 {
        (qt.q * (psi_lo - n * c), qt.q * (psi_hi - n * c))
    } else {
        (qt.q * (psi_hi - n * c), qt.q * (psi_lo - n * c))
    };
    let ex = qt.exponent();
    let (geo_lo, geo_hi) = if ex >= 0.0 {
        (ex * d_lo.ln(), ex * d_hi.ln())
    } else {
        (ex * d_hi.ln(), ex * d_lo.ln())
    };
    Ok((qpsi_lo + geo_lo, qpsi_hi + geo_hi))
}

/// Bracket of `sum_i psi_{w_i}` over the cylinder. Exact for edge-constant
/// weights; grid plus declared slack otherwise.
fn bracket_psi_sum(
    sys: &SystemSpec,
    family: &PotentialFamily,
    w: &Word,
) -> Result<(f64, f64)> {
    if family.psi_is_edge_constant() {
        let s: f64 = w.edges().iter().map(|&e| family.psi_value(e, 0.0)).sum();
        return Ok((s, s));
    }
    sys.check_admissible(w)?;
    let dom = *sys.word_domain(w);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..=32 {
        let x = dom.lo + dom.len() * (k as f64) / 32.0;
        let mut acc = 0.0;
        let mut cur = x;
        for &e in w.edges().iter().rev() {
            acc += family.psi_value(e, cur);
            cur = sys.edges()[e].kind.value(cur);
        }
        lo = lo.min(acc);
        hi = hi.max(acc);
    }
    let slack = psi_grid_slack(sys, family, w, dom.len() / 32.0)?;
    Ok((lo - slack, hi + slack))
}

fn psi_grid_slack(
    sys: &SystemSpec,
    family: &PotentialFamily,
    w: &Word,
    gap: f64,
) -> Result<f64> {
    let mut total = 0.0;
    let mut shrink = 1.0;
    for &e in w.edges().iter().rev() {
        match family.psi_lipschitz(e) {
            Some(l) => total += l * shrink,
            None => {
                let h = family.holder().ok_or_else(|| {
                    MfaError::Unknown("custom weights without Hoelder metadata".into())
                })?;
                // oscillation over a gap-sized set: V_beta * len^beta
                total += h.v_beta * (shrink * gap).powf(h.beta) / gap.max(f64::MIN_POSITIVE);
            }
        }
        shrink *= sys.edges()[e].contraction_bound;
    }
    Ok(total * gap / 2.0)
}
