//! Contraction maps attached to edges: affine, Moebius, or custom evaluators.

use std::fmt;
use std::sync::Arc;

use crate::error::{MfaError, Result};
use crate::interval::Interval;

/// Value-and-absolute-derivative evaluator for custom maps.
pub type CustomEval = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// The analytic form of an edge map.
#[derive(Clone)]
pub enum MapKind {
    /// `x -> slope*x + offset` with `0 < |slope| < 1`.
    Affine { slope: f64, offset: f64 },
    /// `x -> (a*x + b)/(c*x + d)` with `a*d - b*c != 0`.
    Moebius { a: f64, b: f64, c: f64, d: f64 },
    /// Black-box evaluator returning `(value, |derivative|)`.
    ///
    /// `log_deriv_lipschitz` is an optional declared Lipschitz constant of
    /// `x -> log|phi'(x)|` on the domain interval, used to pad grid-based
    /// extrema into certified brackets.
    Custom {
        eval: CustomEval,
        log_deriv_lipschitz: Option<f64>,
    },
}

impl fmt::Debug for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Affine { slope, offset } => {
                write!(f, "Affine {{ slope: {slope}, offset: {offset} }}")
            }
            MapKind::Moebius { a, b, c, d } => {
                write!(f, "Moebius {{ a: {a}, b: {b}, c: {c}, d: {d} }}")
            }
            MapKind::Custom { .. } => write!(f, "Custom {{ .. }}"),
        }
    }
}

impl MapKind {
    /// The continued-fraction branch `x -> 1/(n + x)`.
    pub fn cf_digit(n: u32) -> Self {
        MapKind::Moebius {
            a: 0.0,
            b: 1.0,
            c: 1.0,
            d: n as f64,
        }
    }

    /// Evaluate `(phi(x), |phi'(x)|)`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            MapKind::Affine { slope, offset } => (slope * x + offset, slope.abs()),
            MapKind::Moebius { a, b, c, d } => {
                let den = c * x + d;
                let value = (a * x + b) / den;
                let deriv = (a * d - b * c).abs() / (den * den);
                (value, deriv)
            }
            MapKind::Custom { eval, .. } => eval(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn abs_deriv(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    /// True for the analytic kinds (affine, Moebius) whose derivative modulus
    /// is monotone on any interval avoiding the pole.
    pub fn is_analytic(&self) -> bool {
        !matches!(self, MapKind::Custom { .. })
    }

    /// Image of an interval. Exact for analytic kinds (monotone); for custom
    /// maps the hull of a 33-point grid.
    pub fn image(&self, domain: &Interval) -> Interval {
        if self.is_analytic() {
            Interval::spanning(self.value(domain.lo), self.value(domain.hi))
        } else {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in 0..=32 {
                let x = domain.lo + domain.len() * (k as f64) / 32.0;
                let v = self.value(x);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Interval::new(lo, hi)
        }
    }

    /// Range `[inf, sup]` of `|phi'|` over an interval. Exact endpoint extrema
    /// for analytic kinds; 33-point grid otherwise (no slack applied here).
    pub fn deriv_range(&self, domain: &Interval) -> (f64, f64) {
        match self {
            MapKind::Affine { slope, .. } => (slope.abs(), slope.abs()),
            MapKind::Moebius { .. } => {
                let d0 = self.abs_deriv(domain.lo);
                let d1 = self.abs_deriv(domain.hi);
                (d0.min(d1), d0.max(d1))
            }
            MapKind::Custom { .. } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for k in 0..=32 {
                    let x = domain.lo + domain.len() * (k as f64) / 32.0;
                    let d = self.abs_deriv(x);
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
                (lo, hi)
            }
        }
    }

    /// Lipschitz bound for `x -> log|phi'(x)|` on the domain. Exact for the
    /// analytic kinds, declared metadata for custom maps.
    pub fn log_deriv_lipschitz(&self, domain: &Interval) -> Result<f64> {
        match self {
            MapKind::Affine { .. } => Ok(0.0),
            MapKind::Moebius { c, d, .. } => {
                if *c == 0.0 {
                    return Ok(0.0);
                }
                // |d/dx log|phi'|| = |2c/(cx+d)|, monotone on a pole-free interval
                let l0 = (2.0 * c / (c * domain.lo + d)).abs();
                let l1 = (2.0 * c / (c * domain.hi + d)).abs();
                Ok(l0.max(l1))
            }
            MapKind::Custom {
                log_deriv_lipschitz,
                ..
            } => log_deriv_lipschitz.ok_or_else(|| {
                MfaError::Unknown("custom map without log-derivative Lipschitz metadata".into())
            }),
        }
    }

    /// Validate the map on its domain: injectivity, image inside `codomain`,
    /// contraction, pole position. Returns the contraction bound `sup |phi'|`.
    pub fn validate(&self, domain: &Interval, codomain: &Interval) -> Result<f64> {
        if let MapKind::Moebius { a, b, c, d } = self {
            if (a * d - b * c).abs() == 0.0 {
                return Err(MfaError::Parameter("moebius determinant is zero".into()));
            }
            if *c != 0.0 {
                let pole = -d / c;
                if domain.contains(pole) {
                    return Err(MfaError::Parameter(format!(
                        "moebius pole {pole} inside domain [{}, {}]",
                        domain.lo, domain.hi
                    )));
                }
            }
        }
        let image = self.image(domain);
        let tol = 1e-12 * (1.0 + codomain.len());
        if !(codomain.contains_with_tol(image.lo, tol) && codomain.contains_with_tol(image.hi, tol))
        {
            return Err(MfaError::Parameter(format!(
                "image [{}, {}] escapes codomain [{}, {}]",
                image.lo, image.hi, codomain.lo, codomain.hi
            )));
        }
        let (dmin, dmax) = self.deriv_range(domain);
        if dmin <= 0.0 {
            return Err(MfaError::Parameter(
                "map is not injective: derivative vanishes on the domain".into(),
            ));
        }
        if dmax > 1.0 + 1e-12 {
            return Err(MfaError::Parameter(format!(
                "map expands: sup |phi'| = {dmax} > 1"
            )));
        }
        Ok(dmax.min(1.0))
    }
}
