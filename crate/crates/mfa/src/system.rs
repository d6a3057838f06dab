//! Conformal graph directed Markov systems over interval pieces.
//!
//! A system consists of vertex intervals, edge contractions between them, and
//! an edge incidence matrix restricting which edge may follow which. Words are
//! finite admissible edge sequences; their composed maps define cylinder
//! intervals whose nested intersections make up the limit set.
//!
//! ```
//! use mfa::builtin;
//! use mfa::system::Word;
//!
//! // continued fractions: the word (1, 2) maps [0,1] onto [2/3, 3/4]
//! let sys = builtin::cf_full(3).unwrap();
//! let cyl = sys.cylinder_interval(&Word::new(vec![0, 1])).unwrap();
//! assert!((cyl.lo - 2.0 / 3.0).abs() < 1e-15);
//! assert!((cyl.hi - 0.75).abs() < 1e-15);
//! ```

use crate::error::{MfaError, Result};
use crate::interval::Interval;
use crate::maps::MapKind;

pub type EdgeId = usize;
pub type VertexId = usize;

/// One compact interval piece of the phase space.
#[derive(Debug, Clone)]
pub struct VertexPiece {
    pub id: VertexId,
    pub interval: Interval,
}

/// A one-to-one contraction from the target vertex piece into the source piece.
#[derive(Debug, Clone)]
pub struct EdgeMap {
    /// Initial vertex `i(e)`: the piece the image lands in.
    pub source: VertexId,
    /// Terminal vertex `t(e)`: the piece the map is defined on.
    pub target: VertexId,
    pub kind: MapKind,
    /// `sup |phi'|` over the domain interval, filled in during validation.
    pub contraction_bound: f64,
    /// Human-readable label (e.g. the continued-fraction digit).
    pub label: String,
}

/// Dense edge incidence matrix `A`: `A[e][f] = 1` iff `f` may follow `e`.
#[derive(Debug, Clone)]
pub struct Incidence {
    n: usize,
    bits: Vec<bool>,
}

impl Incidence {
    pub fn full(n: usize) -> Self {
        Incidence {
            n,
            bits: vec![true; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MfaError::Parameter("incidence matrix is not square".into()));
        }
        Ok(Incidence {
            n,
            bits: rows.into_iter().flatten().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn allows(&self, e: EdgeId, f: EdgeId) -> bool {
        self.bits[e * self.n + f]
    }

    /// Boolean matrix power positivity: whether `A^k` is entrywise positive.
    pub fn power_positive(&self, k: usize) -> bool {
        let n = self.n;
        let mut acc: Vec<bool> = (0..n * n).map(|i| i / n == i % n).collect(); // identity
        let mut base = self.bits.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = bool_mat_mul(&acc, &base, n);
            }
            base = bool_mat_mul(&base, &base, n);
            k >>= 1;
        }
        acc.iter().all(|&b| b)
    }

    /// Count of admissible words of length `n` (sum of entries of `A^{n-1}`),
    /// saturating at `u128::MAX`.
    pub fn word_count(&self, len: usize) -> u128 {
        assert!(len >= 1);
        let n = self.n;
        let mut counts = vec![1u128; n]; // words of length 1 ending at each edge
        for _ in 1..len {
            let next: Vec<u128> = (0..n)
                .map(|f| {
                    counts
                        .iter()
                        .enumerate()
                        .filter(|&(e, _)| self.allows(e, f))
                        .fold(0u128, |acc, (_, &c)| acc.saturating_add(c))
                })
                .collect();
            counts = next;
        }
        counts.iter().fold(0u128, |a, &b| a.saturating_add(b))
    }
}

fn bool_mat_mul(a: &[bool], b: &[bool], n: usize) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k] {
                for j in 0..n {
                    if b[k * n + j] {
                        out[i * n + j] = true;
                    }
                }
            }
        }
    }
    out
}

/// Power-law tail metadata for truncations of infinite families:
/// `||phi'_n|| ~ n^{-gamma} (log n)^{-log_power}`.
#[derive(Debug, Clone)]
pub struct TailModel {
    pub gamma: f64,
    /// Extra logarithmic decay exponent (0 for a pure power law).
    pub log_power: f64,
    /// Accumulation points of the first-level images of the full family.
    pub accumulation: Vec<f64>,
}

impl TailModel {
    pub fn power_law(gamma: f64) -> Self {
        TailModel {
            gamma,
            log_power: 0.0,
            accumulation: Vec::new(),
        }
    }

    /// Finiteness parameter of the parent family: `theta = 1/gamma`.
    pub fn theta(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// A finite admissible edge word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<EdgeId>);

impl Word {
    pub fn new(edges: Vec<EdgeId>) -> Self {
        assert!(!edges.is_empty(), "words have length >= 1");
        Word(edges)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.0
    }
}

/// A validated conformal GDMS/IFS instance.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    vertices: Vec<VertexPiece>,
    edges: Vec<EdgeMap>,
    incidence: Incidence,
    /// `s = max_e sup |phi'_e|` (may equal 1 for continued-fraction families).
    global_contraction: f64,
    /// `max ||phi'_{ef}||` over admissible pairs; `< 1` even when `s = 1`.
    two_step_contraction: f64,
    tail: Option<TailModel>,
    /// Supplied distortion constant, if any; otherwise estimated on demand.
    supplied_distortion: Option<f64>,
    /// Whether `A[e][f] = 1` exactly when `t(e) = i(f)`.
    vertex_determined: bool,
    name: String,
}

impl SystemSpec {
    /// Validate and assemble a system. Checks interval sanity, map
    /// injectivity/containment/contraction, incidence-multigraph consistency,
    /// and (when some edge has `sup |phi'| = 1`) that all two-step
    /// compositions still contract.
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<VertexPiece>,
        mut edges: Vec<EdgeMap>,
        incidence: Incidence,
        tail: Option<TailModel>,
        supplied_distortion: Option<f64>,
    ) -> Result<Self> {
        if vertices.is_empty() || edges.is_empty() {
            return Err(MfaError::Parameter("system needs vertices and edges".into()));
        }
        for (k, v) in vertices.iter().enumerate() {
            if v.id != k {
                return Err(MfaError::Parameter("vertex ids must be 0..n in order".into()));
            }
            if !(v.interval.len() > 0.0) {
                return Err(MfaError::Parameter(format!(
                    "vertex {k} interval has non-positive length"
                )));
            }
        }
        if incidence.size() != edges.len() {
            return Err(MfaError::Parameter(
                "incidence size does not match edge count".into(),
            ));
        }
        let mut s = 0.0f64;
        for e in edges.iter_mut() {
            if e.source >= vertices.len() || e.target >= vertices.len() {
                return Err(MfaError::Parameter("edge references missing vertex".into()));
            }
            let dom = &vertices[e.target].interval;
            let cod = &vertices[e.source].interval;
            e.contraction_bound = e.kind.validate(dom, cod)?;
            s = s.max(e.contraction_bound);
        }
        for e in 0..edges.len() {
            for f in 0..edges.len() {
                if incidence.allows(e, f) && edges[e].target != edges[f].source {
                    return Err(MfaError::Parameter(format!(
                        "incidence allows {e} -> {f} but t({e}) != i({f})"
                    )));
                }
            }
        }
        let vertex_determined = (0..edges.len()).all(|e| {
            (0..edges.len())
                .all(|f| incidence.allows(e, f) == (edges[e].target == edges[f].source))
        });

        let mut sys = SystemSpec {
            vertices,
            edges,
            incidence,
            global_contraction: s,
            two_step_contraction: s * s,
            tail,
            supplied_distortion,
            vertex_determined,
            name: name.into(),
        };
        sys.two_step_contraction = sys.compute_two_step_contraction();
        if sys.global_contraction >= 1.0 && sys.two_step_contraction >= 1.0 {
            return Err(MfaError::Parameter(
                "system does not contract: some two-step composition has sup |phi'| >= 1".into(),
            ));
        }
        Ok(sys)
    }

    fn compute_two_step_contraction(&self) -> f64 {
        let mut s2: f64 = 0.0;
        for e in 0..self.edges.len() {
            for f in 0..self.edges.len() {
                if !self.incidence.allows(e, f) {
                    continue;
                }
                let w = Word::new(vec![e, f]);
                let (_, hi) = self.word_deriv_range(&w).unwrap_or((1.0, 1.0));
                s2 = s2.max(hi);
            }
        }
        s2
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[VertexPiece] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeMap] {
        &self.edges
    }

    pub fn incidence(&self) -> &Incidence {
        &self.incidence
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    pub fn supplied_distortion(&self) -> Option<f64> {
        self.supplied_distortion
    }

    /// `s = max_e sup |phi'_e|`.
    pub fn global_contraction(&self) -> f64 {
        self.global_contraction
    }

    /// Largest `sup |phi'_{ef}|` over admissible two-letter words.
    pub fn two_step_contraction(&self) -> f64 {
        self.two_step_contraction
    }

    /// Whether incidence is determined by vertex adjacency (IFS-like), so the
    /// transfer operator can act on functions of the phase point alone.
    pub fn is_vertex_determined(&self) -> bool {
        self.vertex_determined
    }

    pub fn is_full_shift_ifs(&self) -> bool {
        self.vertices.len() == 1 && self.incidence.bits.iter().all(|&b| b)
    }

    /// Largest vertex interval length.
    pub fn diameter(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.interval.len())
            .fold(0.0, f64::max)
    }

    /// Domain interval of a word: the interval of `t(w)` (its last edge's target).
    pub fn word_domain(&self, w: &Word) -> &Interval {
        &self.vertices[self.edges[*w.edges().last().unwrap()].target].interval
    }

    pub fn check_admissible(&self, w: &Word) -> Result<()> {
        for e in w.edges() {
            if *e >= self.edges.len() {
                return Err(MfaError::Admissibility(format!("edge id {e} out of range")));
            }
        }
        for pair in w.edges().windows(2) {
            if !self.incidence.allows(pair[0], pair[1]) {
                return Err(MfaError::Admissibility(format!(
                    "pair ({}, {}) not allowed by incidence",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(())
    }

    /// Evaluate the composed map `phi_w` and its absolute derivative at `x`
    /// by chain rule along the orbit.
    ///
    /// `x` must lie in the interval of `t(w)`; derivatives accumulate as
    /// `|phi'_w(x)| = prod_i |phi'_{w_i}(phi_{sigma^i w}(x))|`.
    pub fn evaluate_word_map(&self, w: &Word, x: f64) -> Result<(f64, f64)> {
        self.check_admissible(w)?;
        let dom = self.word_domain(w);
        if !dom.contains_with_tol(x, 1e-12 * (1.0 + dom.len())) {
            return Err(MfaError::Domain(format!(
                "x = {x} outside domain [{}, {}]",
                dom.lo, dom.hi
            )));
        }
        let mut value = x;
        let mut deriv = 1.0;
        for &e in w.edges().iter().rev() {
            let (v, d) = self.edges[e].kind.eval(value);
            value = v;
            deriv *= d;
        }
        Ok((value, deriv))
    }

    /// The image `phi_w(X_{t(w)})` as a closed interval.
    ///
    /// For analytic systems this is exact endpoint arithmetic; cylinders nest
    /// along word extensions and shrink at the contraction rate.
    pub fn cylinder_interval(&self, w: &Word) -> Result<Interval> {
        self.check_admissible(w)?;
        let dom = *self.word_domain(w);
        if self.edges.iter().all(|e| e.kind.is_analytic()) {
            let a = self.orbit_value(w, dom.lo);
            let b = self.orbit_value(w, dom.hi);
            Ok(Interval::spanning(a, b))
        } else {
            let mut img = dom;
            for &e in w.edges().iter().rev() {
                img = self.edges[e].kind.image(&img);
            }
            Ok(img)
        }
    }

    fn orbit_value(&self, w: &Word, x: f64) -> f64 {
        let mut value = x;
        for &e in w.edges().iter().rev() {
            value = self.edges[e].kind.value(value);
        }
        value
    }

    /// `[inf, sup]` of `|phi'_w|` over the domain interval of `w`.
    ///
    /// When every edge in `w` is analytic the composition is again analytic
    /// with monotone derivative modulus, so the extrema sit at the endpoints
    /// and are evaluated exactly. Otherwise a 33-point grid is used and padded
    /// by the declared Lipschitz slack.
    pub fn word_deriv_range(&self, w: &Word) -> Result<(f64, f64)> {
        self.check_admissible(w)?;
        let dom = *self.word_domain(w);
        let analytic = w.edges().iter().all(|&e| self.edges[e].kind.is_analytic());
        if analytic {
            let (_, d0) = self.evaluate_word_map(w, dom.lo)?;
            let (_, d1) = self.evaluate_word_map(w, dom.hi)?;
            Ok((d0.min(d1), d0.max(d1)))
        } else {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in 0..=32 {
                let x = dom.lo + dom.len() * (k as f64) / 32.0;
                let (_, d) = self.evaluate_word_map(w, x)?;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            let slack = self.grid_log_slack(w, dom.len() / 32.0)?;
            Ok((lo * (-slack).exp(), hi * slack.exp()))
        }
    }

    /// Oscillation bound of `log |phi'_w|` between adjacent grid points.
    fn grid_log_slack(&self, w: &Word, gap: f64) -> Result<f64> {
        let mut lip_total = 0.0;
        let mut shrink = 1.0;
        for &e in w.edges().iter().rev() {
            let edge = &self.edges[e];
            let dom = &self.vertices[edge.target].interval;
            lip_total += edge.kind.log_deriv_lipschitz(dom)? * shrink;
            shrink *= edge.contraction_bound;
        }
        Ok(lip_total * gap / 2.0)
    }

    /// Stream the admissible words of length `n` in lexicographic edge-id
    /// order. Errors when the count predicted from the incidence matrix
    /// exceeds `budget`.
    pub fn enumerate_words(&self, n: usize, budget: u128) -> Result<WordIter<'_>> {
        if n == 0 {
            return Err(MfaError::Parameter("word length must be >= 1".into()));
        }
        let count = self.incidence.word_count(n);
        if count > budget {
            return Err(MfaError::Budget(format!(
                "{count} admissible words of length {n} exceed budget {budget}"
            )));
        }
        Ok(WordIter {
            sys: self,
            n,
            stack: vec![0],
            done: false,
        })
    }

    /// Exact admissible word count at length `n` (entry sum of `A^{n-1}`).
    pub fn count_words(&self, n: usize) -> u128 {
        self.incidence.word_count(n)
    }
}

/// Depth-first lexicographic enumeration of admissible words.
pub struct WordIter<'a> {
    sys: &'a SystemSpec,
    n: usize,
    stack: Vec<EdgeId>,
    done: bool,
}

impl<'a> WordIter<'a> {
    /// Advance the last letter, backtracking as needed. Returns false when
    /// the enumeration is exhausted.
    fn bump(&mut self) -> bool {
        let ne = self.sys.edge_count();
        while let Some(last) = self.stack.pop() {
            let prev = self.stack.last().copied();
            let mut cand = last + 1;
            while cand < ne {
                let ok = match prev {
                    Some(p) => self.sys.incidence.allows(p, cand),
                    None => true,
                };
                if ok {
                    self.stack.push(cand);
                    return true;
                }
                cand += 1;
            }
        }
        false
    }

    /// Extend the current prefix to full length with smallest admissible
    /// letters. Returns false if no extension exists and bumping is needed.
    fn extend(&mut self) -> bool {
        let ne = self.sys.edge_count();
        'outer: while self.stack.len() < self.n {
            let prev = *self.stack.last().unwrap();
            for cand in 0..ne {
                if self.sys.incidence.allows(prev, cand) {
                    self.stack.push(cand);
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }
}

impl<'a> Iterator for WordIter<'a> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        loop {
            if self.extend() {
                let w = Word::new(self.stack.clone());
                if !self.bump() {
                    self.done = true;
                }
                return Some(w);
            }
            if !self.bump() {
                self.done = true;
                return None;
            }
        }
    }
}
