//! Multi-vertex and incidence-restricted systems: the parts of the machinery
//! that single-vertex full-shift benchmarks do not reach.

use mfa::builtin;
use mfa::interval::Interval;
use mfa::maps::MapKind;
use mfa::measure::{ball_measure, cylinder_weights, MeasureContext};
use mfa::potential::PotentialFamily;
use mfa::pressure::pressure_bracket;
use mfa::system::{EdgeMap, Incidence, SystemSpec, VertexPiece};
use mfa::thermo::hausdorff_dimension;

fn affine(source: usize, target: usize, slope: f64, offset: f64) -> EdgeMap {
    EdgeMap {
        source,
        target,
        kind: MapKind::Affine { slope, offset },
        contraction_bound: 0.0,
        label: String::new(),
    }
}

/// Two vertex pieces on disjoint intervals, three ratio-1/3 edges wired as
/// the golden-mean graph: the vertex count matrix is 3^-t [[1,1],[1,0]],
/// so the dimension is log(golden)/log 3.
fn golden_gdms() -> SystemSpec {
    let vertices = vec![
        VertexPiece { id: 0, interval: Interval::new(0.0, 1.0) },
        VertexPiece { id: 1, interval: Interval::new(2.0, 3.0) },
    ];
    let third = 1.0 / 3.0;
    let edges = vec![
        affine(0, 0, third, 0.0),       // X_0 -> [0, 1/3]
        affine(0, 1, third, 0.0),       // X_1 -> [2/3, 1]
        affine(1, 0, third, 2.0),       // X_0 -> [2, 7/3]
    ];
    // incidence determined by vertex adjacency: f may follow e iff t(e) = i(f)
    let rows = vec![
        vec![true, true, false],
        vec![false, false, true],
        vec![true, true, false],
    ];
    SystemSpec::new(
        "golden_gdms",
        vertices,
        edges,
        Incidence::from_rows(rows).unwrap(),
        None,
        None,
    )
    .unwrap()
}

#[test]
fn golden_gdms_dimension() {
    let sys = golden_gdms();
    assert!(sys.is_vertex_determined());
    assert!(!sys.is_full_shift_ifs());
    let est = hausdorff_dimension(&sys).unwrap();
    let expected = ((1.0 + 5.0f64.sqrt()) / 2.0).ln() / 3.0f64.ln();
    assert!(
        (est.value - expected).abs() < 1e-10,
        "dim {} vs {expected}",
        est.value
    );
    // non-full-shift: no certified bracket is claimed
    assert!(est.lower.is_none() && est.upper.is_none());
}

#[test]
fn golden_gdms_measure_model_uses_piece_masses() {
    let sys = golden_gdms();
    let dim = hausdorff_dimension(&sys).unwrap().value;
    let fam = PotentialFamily::geometric(&sys, dim).unwrap();
    let model = cylinder_weights(&sys, &fam, MeasureContext::Base, 6, 1 << 20).unwrap();
    let total = model.midpoint_total();
    assert!(
        (total - 1.0).abs() < 1e-6,
        "midpoint total {total}, defect {}",
        model.defect
    );
    // both pieces carry mass
    let (lo0, hi0) = ball_measure(&model, 0.5, 0.6);
    let (lo1, hi1) = ball_measure(&model, 2.5, 0.6);
    assert!(lo0 > 0.0 && lo1 > 0.0);
    assert!(hi0 < 1.0 && hi1 < 1.0);
    assert!((0.5 * (lo0 + hi0) + 0.5 * (lo1 + hi1) - 1.0).abs() < 1e-6);
}

/// Single vertex, three ratio-1/3 maps, incidence graph with spectral radius
/// equal to the plastic number (the real root of x^3 = x + 1); the dimension
/// is log(plastic)/log 3. Not vertex-determined, so this exercises the
/// edge-lifted transfer operator.
#[test]
fn plastic_subshift_dimension() {
    let vertices = vec![VertexPiece { id: 0, interval: Interval::new(0.0, 1.0) }];
    let third = 1.0 / 3.0;
    let edges = vec![
        affine(0, 0, third, 0.0),
        affine(0, 0, third, third),
        affine(0, 0, third, 2.0 * third),
    ];
    let rows = vec![
        vec![false, true, false],
        vec![false, false, true],
        vec![true, true, false],
    ];
    let sys = SystemSpec::new(
        "plastic_sft",
        vertices,
        edges,
        Incidence::from_rows(rows).unwrap(),
        None,
        None,
    )
    .unwrap();
    assert!(!sys.is_vertex_determined());

    // oracle: the plastic number by bisection on x^3 - x - 1
    let (mut a, mut b) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m * m * m - m - 1.0 < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let plastic = 0.5 * (a + b);
    let expected = plastic.ln() / 3.0f64.ln();

    let est = hausdorff_dimension(&sys).unwrap();
    assert!(
        (est.value - expected).abs() < 1e-10,
        "dim {} vs {expected}",
        est.value
    );

    // partition estimate exists but carries no certified bounds off the full shift
    let fam = PotentialFamily::geometric(&sys, 1.0).unwrap();
    let part = pressure_bracket(&sys, &fam, 0.0, expected, 8, 1 << 20).unwrap();
    assert!(!part.certified());
    assert!(part.value.abs() < 0.05, "partition estimate {}", part.value);
}

/// Truncations of the digit-1-deleted family: dimensions frozen from an
/// independent dense-eigenvalue computation, increasing in the truncation.
#[test]
fn cf_no_one_truncation_dimensions() {
    let d10 = hausdorff_dimension(&builtin::cf_no_one(10, -0.25).unwrap())
        .unwrap()
        .value;
    let d50 = hausdorff_dimension(&builtin::cf_no_one(50, -0.25).unwrap())
        .unwrap()
        .value;
    assert!((d10 - 0.7028540149435725).abs() < 1e-6, "dim(10) = {d10}");
    assert!((d50 - 0.8074541880134203).abs() < 1e-6, "dim(50) = {d50}");
    assert!(d10 < d50);
}

/// Overlapping numeric copies are fine for pressure but rejected by the
/// ball-geometry machinery.
#[test]
fn overlapping_pieces_rejected_for_measures() {
    let vertices = vec![
        VertexPiece { id: 0, interval: Interval::new(0.0, 1.0) },
        VertexPiece { id: 1, interval: Interval::new(0.0, 1.0) },
    ];
    let third = 1.0 / 3.0;
    let edges = vec![
        affine(0, 0, third, 0.0),
        affine(0, 1, third, 2.0 * third),
        affine(1, 0, third, 0.0),
    ];
    let rows = vec![
        vec![true, true, false],
        vec![false, false, true],
        vec![true, true, false],
    ];
    let sys = SystemSpec::new(
        "copies",
        vertices,
        edges,
        Incidence::from_rows(rows).unwrap(),
        None,
        None,
    )
    .unwrap();
    let dim = hausdorff_dimension(&sys).unwrap().value;
    let fam = PotentialFamily::geometric(&sys, dim).unwrap();
    let res = cylinder_weights(&sys, &fam, MeasureContext::Base, 4, 10_000);
    assert!(res.is_err());
}
