//! Ready-made systems: continued-fraction families and affine Cantor sets.

use crate::error::{MfaError, Result};
use crate::interval::Interval;
use crate::maps::MapKind;
use crate::system::{EdgeMap, Incidence, SystemSpec, TailModel, VertexPiece};

/// Truncated full continued fractions: `phi_n(x) = 1/(n+x)` for `n = 1..=n_max`
/// on `X = [0, 1]`, full incidence.
///
/// The parent family has `||phi'_n|| = n^{-2}`, so the tail model carries
/// `gamma = 2` (finiteness parameter 1/2) and first-level images accumulate
/// at 0.
pub fn cf_full(n_max: u32) -> Result<SystemSpec> {
    if n_max < 1 {
        return Err(MfaError::Parameter("cf_full needs n_max >= 1".into()));
    }
    let vertices = vec![VertexPiece {
        id: 0,
        interval: Interval::new(0.0, 1.0),
    }];
    let edges = (1..=n_max)
        .map(|n| EdgeMap {
            source: 0,
            target: 0,
            kind: MapKind::cf_digit(n),
            contraction_bound: 0.0,
            label: n.to_string(),
        })
        .collect();
    let tail = TailModel {
        gamma: 2.0,
        log_power: 0.0,
        accumulation: vec![0.0],
    };
    SystemSpec::new(
        format!("cf_full({n_max})"),
        vertices,
        edges,
        Incidence::full(n_max as usize),
        Some(tail),
        None,
    )
}

/// Continued fractions with the digit 1 deleted: `phi_n(x) = 1/(n+x)` for
/// `n = 2..=n_max` on `X = [eps, 3/4]` with `eps` in `[-1/4, 0)`.
///
/// With 0 interior to `X` every first-level image of the full family stays
/// inside `X`, and the boundary is uniformly separated from the images.
pub fn cf_no_one(n_max: u32, eps: f64) -> Result<SystemSpec> {
    if n_max < 2 {
        return Err(MfaError::Parameter("cf_no_one needs n_max >= 2".into()));
    }
    if !(-0.25..0.0).contains(&eps) {
        return Err(MfaError::Parameter(format!(
            "cf_no_one needs eps in [-1/4, 0), got {eps}"
        )));
    }
    let vertices = vec![VertexPiece {
        id: 0,
        interval: Interval::new(eps, 0.75),
    }];
    let edges = (2..=n_max)
        .map(|n| EdgeMap {
            source: 0,
            target: 0,
            kind: MapKind::cf_digit(n),
            contraction_bound: 0.0,
            label: n.to_string(),
        })
        .collect();
    let tail = TailModel {
        gamma: 2.0,
        log_power: 0.0,
        accumulation: vec![0.0],
    };
    SystemSpec::new(
        format!("cf_no_one({n_max}, {eps})"),
        vertices,
        edges,
        Incidence::full((n_max - 1) as usize),
        Some(tail),
        None,
    )
}

/// Continued fractions restricted to an explicit digit set on `X = [0, 1]`.
pub fn cf_digits(digits: &[u32]) -> Result<SystemSpec> {
    if digits.is_empty() || digits.iter().any(|&d| d < 1) {
        return Err(MfaError::Parameter("cf_digits needs digits >= 1".into()));
    }
    let vertices = vec![VertexPiece {
        id: 0,
        interval: Interval::new(0.0, 1.0),
    }];
    let edges = digits
        .iter()
        .map(|&n| EdgeMap {
            source: 0,
            target: 0,
            kind: MapKind::cf_digit(n),
            contraction_bound: 0.0,
            label: n.to_string(),
        })
        .collect();
    let name = format!(
        "cf_digits({})",
        digits
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    SystemSpec::new(name, vertices, edges, Incidence::full(digits.len()), None, None)
}

/// Orientation-preserving affine maps on `[0, 1]` with the given contraction
/// ratios, images packed left-to-right with equal gaps.
///
/// `affine_cantor(&[1/3, 1/3])` is the middle-third Cantor system with images
/// `[0, 1/3]` and `[2/3, 1]`.
pub fn affine_cantor(ratios: &[f64]) -> Result<SystemSpec> {
    let total: f64 = ratios.iter().sum();
    if ratios.len() < 2 {
        return Err(MfaError::Parameter("affine_cantor needs >= 2 ratios".into()));
    }
    if ratios.iter().any(|&r| !(0.0 < r && r < 1.0)) || total >= 1.0 {
        return Err(MfaError::Parameter(
            "affine_cantor ratios must lie in (0,1) and sum below 1".into(),
        ));
    }
    let gap = (1.0 - total) / (ratios.len() as f64 - 1.0);
    let mut offsets = Vec::with_capacity(ratios.len());
    let mut x = 0.0;
    for &r in ratios {
        offsets.push(x);
        x += r + gap;
    }
    affine_cantor_placed(ratios, &offsets)
}

/// Affine maps `x -> r_i * x + b_i` on `[0, 1]` with explicit image offsets.
pub fn affine_cantor_placed(ratios: &[f64], offsets: &[f64]) -> Result<SystemSpec> {
    if ratios.len() != offsets.len() {
        return Err(MfaError::Parameter(
            "ratios and offsets must have equal length".into(),
        ));
    }
    // reject interior overlaps up front
    let mut images: Vec<Interval> = ratios
        .iter()
        .zip(offsets)
        .map(|(&r, &b)| Interval::new(b, b + r))
        .collect();
    images.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for pair in images.windows(2) {
        if pair[0].interior_overlap(&pair[1]) > 0.0 {
            return Err(MfaError::Parameter("affine images overlap".into()));
        }
    }
    let vertices = vec![VertexPiece {
        id: 0,
        interval: Interval::new(0.0, 1.0),
    }];
    let edges = ratios
        .iter()
        .zip(offsets)
        .enumerate()
        .map(|(k, (&r, &b))| EdgeMap {
            source: 0,
            target: 0,
            kind: MapKind::Affine { slope: r, offset: b },
            contraction_bound: 0.0,
            label: format!("{k}"),
        })
        .collect();
    let name = format!(
        "affine_cantor({})",
        ratios
            .iter()
            .map(|r| format!("{r}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    SystemSpec::new(name, vertices, edges, Incidence::full(ratios.len()), None, None)
}
