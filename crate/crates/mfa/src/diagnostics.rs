//! Structural diagnostics: separation, primitivity, distortion.

use crate::error::{MfaError, Result};
use crate::interval::Interval;
use crate::system::{SystemSpec, Word};

/// Three-valued verdict with a human-readable reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Yes(String),
    No(String),
    Unknown(String),
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "yes",
            Verdict::No(_) => "no",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn reason(&self) -> &str {
        match self {
            Verdict::Yes(r) | Verdict::No(r) | Verdict::Unknown(r) => r,
        }
    }
}

/// Result of the finite-primitivity search.
#[derive(Debug, Clone)]
pub struct PrimitivityReport {
    pub primitive: bool,
    /// Smallest connecting word length `p` such that `A^{p+1}` is entrywise
    /// positive, when found within budget.
    pub witness_length: Option<usize>,
    /// One connecting word per ordered edge pair, kept only for small alphabets.
    pub witness_words: Vec<((usize, usize), Word)>,
    pub searched_up_to: usize,
}

/// Overall diagnostics bundle as printed by `mfa check`.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub osc_ok: bool,
    pub worst_overlap: f64,
    pub primitivity: PrimitivityReport,
    pub bsc_gap: Option<f64>,
    pub cofinitely_regular: Verdict,
    pub norm_comparability_constant: f64,
    pub distortion_constant: Option<f64>,
}

/// Open set condition at level one: interiors of first-level images within
/// each vertex piece are pairwise disjoint. Exact on endpoints; touching
/// images are allowed.
pub fn check_osc(sys: &SystemSpec) -> (bool, f64) {
    let mut worst = 0.0f64;
    for v in sys.vertices() {
        let mut images: Vec<Interval> = sys
            .edges()
            .iter()
            .filter(|e| e.source == v.id)
            .map(|e| e.kind.image(&sys.vertices()[e.target].interval))
            .collect();
        images.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for pair in images.windows(2) {
            worst = worst.max(pair[0].interior_overlap(&pair[1]));
        }
    }
    (worst == 0.0, worst)
}

/// Search for the smallest `p <= p_max` with `A^{p+1}` entrywise positive.
/// For every ordered pair `(e, f)` there is then a connecting word of length
/// `p`. Witness words are materialized only when the alphabet is small.
pub fn check_finitely_primitive(sys: &SystemSpec, p_max: usize) -> PrimitivityReport {
    let inc = sys.incidence();
    for p in 0..=p_max {
        if inc.power_positive(p + 1) {
            let witness_words = if sys.edge_count() <= 8 {
                collect_witnesses(sys, p)
            } else {
                Vec::new()
            };
            return PrimitivityReport {
                primitive: true,
                witness_length: Some(p),
                witness_words,
                searched_up_to: p_max,
            };
        }
    }
    PrimitivityReport {
        primitive: false,
        witness_length: None,
        witness_words: Vec::new(),
        searched_up_to: p_max,
    }
}

fn collect_witnesses(sys: &SystemSpec, p: usize) -> Vec<((usize, usize), Word)> {
    if p == 0 {
        // the empty word connects every pair; nothing to materialize
        return Vec::new();
    }
    let ne = sys.edge_count();
    let mut out = Vec::new();
    for e in 0..ne {
        for f in 0..ne {
            if let Some(mid) = connect(sys, e, f, p) {
                out.push(((e, f), Word::new(mid)));
            }
        }
    }
    out
}

/// Find a word `m` of length `p` with `e m f` admissible (DFS).
fn connect(sys: &SystemSpec, e: usize, f: usize, p: usize) -> Option<Vec<usize>> {
    fn go(sys: &SystemSpec, last: usize, f: usize, left: usize, acc: &mut Vec<usize>) -> bool {
        if left == 0 {
            return sys.incidence().allows(last, f);
        }
        for cand in 0..sys.edge_count() {
            if sys.incidence().allows(last, cand) {
                acc.push(cand);
                if go(sys, cand, f, left - 1, acc) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }
    let mut acc = Vec::with_capacity(p);
    if p == 0 {
        return sys.incidence().allows(e, f).then(Vec::new);
    }
    go(sys, e, f, p, &mut acc).then_some(acc)
}

/// Boundary separation: distance from the boundary points of each vertex
/// piece to the closure of the union of the first-level images landing in
/// that piece.
///
/// Pieces are disjoint copies even when their intervals overlap numerically,
/// so boundaries are only compared against images (and declared accumulation
/// points) inside the same piece. Exact endpoint arithmetic for analytic
/// maps; custom maps without a tail model yield an unknown verdict.
pub fn check_bsc(sys: &SystemSpec) -> Result<f64> {
    if sys.edges().iter().any(|e| !e.kind.is_analytic()) && sys.tail().is_none() {
        return Err(MfaError::Unknown(
            "bsc needs analytic maps or a tail model describing image accumulation".into(),
        ));
    }
    let mut gap = f64::INFINITY;
    for v in sys.vertices() {
        let mut images: Vec<Interval> = sys
            .edges()
            .iter()
            .filter(|e| e.source == v.id)
            .map(|e| e.kind.image(&sys.vertices()[e.target].interval))
            .collect();
        if let Some(tail) = sys.tail() {
            for &a in &tail.accumulation {
                if v.interval.contains(a) {
                    images.push(Interval::new(a, a));
                }
            }
        }
        for b in [v.interval.lo, v.interval.hi] {
            let d = images
                .iter()
                .map(|img| img.dist(b))
                .fold(f64::INFINITY, f64::min);
            gap = gap.min(d);
        }
    }
    Ok(gap)
}

/// Cofinite regularity from the declared tail decay
/// `||phi'_n|| ~ n^{-gamma} (log n)^{-delta}`: the theta-series
/// `sum_n ||phi'_n||^theta` with `theta = 1/gamma` behaves like
/// `sum 1/(n (log n)^{delta/gamma})`, which diverges exactly when
/// `delta/gamma <= 1`.
pub fn check_cofinite_regularity(sys: &SystemSpec) -> Verdict {
    match sys.tail() {
        None => Verdict::Unknown(
            "finite system without a parent tail model (finite systems are regular)".into(),
        ),
        Some(tail) => {
            let decay = if tail.log_power == 0.0 {
                format!("n^-{}", tail.gamma)
            } else {
                format!("n^-{} (log n)^-{}", tail.gamma, tail.log_power)
            };
            if tail.log_power / tail.gamma <= 1.0 {
                Verdict::Yes(format!(
                    "theta-series diverges: decay {decay} gives a harmonic-type sum"
                ))
            } else {
                Verdict::No(format!(
                    "theta-series converges by the integral test: decay {decay} with log power above gamma"
                ))
            }
        }
    }
}

/// Largest ratio of derivative sup-norms between consecutive edges (in edge
/// id order), the comparability constant for one-dimensional families.
pub fn norm_comparability_constant(sys: &SystemSpec) -> f64 {
    let norms: Vec<f64> = sys.edges().iter().map(|e| e.contraction_bound).collect();
    let mut c = 1.0f64;
    for pair in norms.windows(2) {
        let r = pair[1] / pair[0];
        c = c.max(r).max(1.0 / r);
    }
    c
}

/// Certified uniform distortion bound `K >= 1` with
/// `|phi'_w(y)| <= K |phi'_w(x)|` for every admissible word.
///
/// Pure affine systems get `K = 1` exactly. For analytic systems the exact
/// per-word endpoint ratio is maximized over all words up to a depth chosen
/// by the word budget, then multiplied by a tail factor
/// `exp(L * sum_{k >= k0} len_k)` where `len_k` bounds cylinder diameters at
/// depth `k` via the two-step contraction rate. Custom maps fall back to the
/// global bound `exp(L (1-s)^{-1} diam^alpha)` from declared `(L, alpha)`
/// metadata and need `s < 1`.
pub fn estimate_distortion_constant(sys: &SystemSpec) -> Result<f64> {
    if let Some(k) = sys.supplied_distortion() {
        return Ok(k);
    }
    if sys.edges().iter().all(|e| matches!(e.kind, crate::maps::MapKind::Affine { .. })) {
        return Ok(1.0);
    }
    if sys.edges().iter().all(|e| e.kind.is_analytic()) {
        return analytic_distortion(sys);
    }
    custom_distortion(sys)
}

fn analytic_distortion(sys: &SystemSpec) -> Result<f64> {
    let budget_per_level: u128 = 200_000;
    let mut depth = 1usize;
    while depth < 12 && sys.count_words(depth + 1) <= budget_per_level {
        depth += 1;
    }

    let mut max_ratio = 1.0f64;
    let mut len_at_depth = 0.0f64;
    for n in 1..=depth {
        let mut level_len = 0.0f64;
        for w in sys.enumerate_words(n, budget_per_level)? {
            let (lo, hi) = sys.word_deriv_range(&w)?;
            max_ratio = max_ratio.max(hi / lo);
            level_len = level_len.max(sys.cylinder_interval(&w)?.len());
        }
        if n == depth {
            len_at_depth = level_len;
        }
    }
    // Tail: a word longer than `depth` factors as u*v with |v| = depth, and
    // the extra head ratio is bounded by the oscillation of log|phi'| along
    // iterated images of the depth-level cylinders. Cylinder diameters are
    // non-increasing in length (single steps never expand) and contract by
    // s2 every two steps, so
    //   sum_{k >= depth} len_k  <=  2 * len_depth / (1 - s2).
    let mut lip = 0.0f64;
    for e in sys.edges() {
        let dom = &sys.vertices()[e.target].interval;
        lip = lip.max(e.kind.log_deriv_lipschitz(dom)?);
    }
    let s2 = sys.two_step_contraction();
    if s2 >= 1.0 {
        return Err(MfaError::Unknown(
            "no two-step contraction; distortion tail cannot be summed".into(),
        ));
    }
    let tail = lip * 2.0 * len_at_depth / (1.0 - s2);
    Ok(max_ratio * tail.exp())
}

fn custom_distortion(sys: &SystemSpec) -> Result<f64> {
    let mut lip = 0.0f64;
    for e in sys.edges() {
        let dom = &sys.vertices()[e.target].interval;
        lip = lip.max(e.kind.log_deriv_lipschitz(dom)?);
    }
    let s = sys.global_contraction();
    if s >= 1.0 {
        return Err(MfaError::Unknown(
            "custom maps with s = 1: no uniform distortion bound available".into(),
        ));
    }
    Ok((lip * sys.diameter() / (1.0 - s)).exp())
}

/// Assemble the full report.
pub fn diagnostics_report(sys: &SystemSpec, p_max: usize) -> DiagnosticsReport {
    let (osc_ok, worst_overlap) = check_osc(sys);
    DiagnosticsReport {
        osc_ok,
        worst_overlap,
        primitivity: check_finitely_primitive(sys, p_max),
        bsc_gap: check_bsc(sys).ok(),
        cofinitely_regular: check_cofinite_regularity(sys),
        norm_comparability_constant: norm_comparability_constant(sys),
        distortion_constant: estimate_distortion_constant(sys).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::interval::Interval;
    use crate::maps::MapKind;
    use crate::system::{EdgeMap, Incidence, SystemSpec, VertexPiece};

    #[test]
    fn full_shift_is_primitive_at_zero() {
        let sys = builtin::cf_full(3).unwrap();
        let rep = check_finitely_primitive(&sys, 4);
        assert!(rep.primitive);
        assert_eq!(rep.witness_length, Some(0));
    }

    #[test]
    fn alternating_matrix_is_not_primitive() {
        // A = [[0,1],[1,0]]: powers alternate between A and I, never positive
        let v = vec![VertexPiece { id: 0, interval: Interval::new(0.0, 1.0) }];
        let mk = |b: f64| EdgeMap {
            source: 0,
            target: 0,
            kind: MapKind::Affine { slope: 0.3, offset: b },
            contraction_bound: 0.0,
            label: String::new(),
        };
        let inc = Incidence::from_rows(vec![vec![false, true], vec![true, false]]).unwrap();
        let sys = SystemSpec::new("alt", v, vec![mk(0.0), mk(0.7)], inc, None, None).unwrap();
        let rep = check_finitely_primitive(&sys, 8);
        assert!(!rep.primitive);
    }

    #[test]
    fn golden_mean_shift_primitive_at_one() {
        let v = vec![VertexPiece { id: 0, interval: Interval::new(0.0, 1.0) }];
        let mk = |b: f64| EdgeMap {
            source: 0,
            target: 0,
            kind: MapKind::Affine { slope: 0.3, offset: b },
            contraction_bound: 0.0,
            label: String::new(),
        };
        let inc = Incidence::from_rows(vec![vec![true, true], vec![true, false]]).unwrap();
        let sys = SystemSpec::new("fib", v, vec![mk(0.0), mk(0.7)], inc, None, None).unwrap();
        let rep = check_finitely_primitive(&sys, 8);
        assert!(rep.primitive);
        assert_eq!(rep.witness_length, Some(1));
        // every ordered pair gets a middle word of length 1
        assert_eq!(rep.witness_words.len(), 4);
    }

    #[test]
    fn bsc_gap_cf_full_is_zero() {
        let sys = builtin::cf_full(30).unwrap();
        assert_eq!(check_bsc(&sys).unwrap(), 0.0);
    }

    #[test]
    fn bsc_gap_digit_one_deleted() {
        // min of left gap 1/4 and right gap 3/4 - 4/7 = 5/28
        let sys = builtin::cf_no_one(50, -0.25).unwrap();
        let gap = check_bsc(&sys).unwrap();
        assert!((gap - 5.0 / 28.0).abs() < 1e-15, "gap = {gap}");
    }

    #[test]
    fn bsc_gap_cantor_touches_boundary() {
        let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert_eq!(check_bsc(&sys).unwrap(), 0.0);
    }

    #[test]
    fn affine_distortion_is_one() {
        let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert_eq!(estimate_distortion_constant(&sys).unwrap(), 1.0);
    }

    #[test]
    fn single_moebius_level_one_ratio() {
        // phi(x) = 1/(2+x) on [0,1]: |phi'(0)|/|phi'(1)| = (3/2)^2 = 2.25
        let sys = builtin::cf_digits(&[2]).unwrap();
        let w = crate::system::Word::new(vec![0]);
        let (lo, hi) = sys.word_deriv_range(&w).unwrap();
        assert!((hi / lo - 2.25).abs() < 1e-12);
        let k = estimate_distortion_constant(&sys).unwrap();
        assert!(k >= 2.25);
    }

    #[test]
    fn cf_distortion_dominates_sampled_ratios() {
        let sys = builtin::cf_digits(&[1, 2]).unwrap();
        let k = estimate_distortion_constant(&sys).unwrap();
        // true constant is 4 (attained by the single-letter word 1)
        assert!(k >= 4.0);
        assert!(k < 10.0, "bound should stay within an order of magnitude: {k}");
    }

    #[test]
    fn cofinite_regularity_verdicts() {
        assert_eq!(check_cofinite_regularity(&builtin::cf_full(5).unwrap()).as_str(), "yes");
        assert_eq!(
            check_cofinite_regularity(&builtin::cf_no_one(5, -0.25).unwrap()).as_str(),
            "yes"
        );
        // declared tail n^-2 (log n)^-4: theta-series converges
        let mut sys = builtin::cf_full(5).unwrap();
        let _ = &mut sys;
        let v = vec![VertexPiece { id: 0, interval: Interval::new(0.0, 1.0) }];
        let edges: Vec<EdgeMap> = (1..=5)
            .map(|n| EdgeMap {
                source: 0,
                target: 0,
                kind: MapKind::cf_digit(n),
                contraction_bound: 0.0,
                label: n.to_string(),
            })
            .collect();
        let tail = crate::system::TailModel {
            gamma: 2.0,
            log_power: 4.0,
            accumulation: vec![0.0],
        };
        let sys2 = SystemSpec::new("logtail", v, edges, Incidence::full(5), Some(tail), None)
            .unwrap();
        assert_eq!(check_cofinite_regularity(&sys2).as_str(), "no");
    }

    #[test]
    fn osc_holds_on_builtins() {
        for sys in [
            builtin::cf_full(10).unwrap(),
            builtin::cf_no_one(10, -0.25).unwrap(),
            builtin::affine_cantor(&[0.5, 0.25]).unwrap(),
        ] {
            let (ok, overlap) = check_osc(&sys);
            assert!(ok, "overlap {overlap}");
        }
    }

    #[test]
    fn norm_comparability_cf() {
        // consecutive digit norm ratios ((n+1)/n)^2, max 4 at n = 1
        let sys = builtin::cf_full(10).unwrap();
        let c = norm_comparability_constant(&sys);
        assert!((c - 4.0).abs() < 1e-12);
    }
}
