use lebesgue_core::fem::{assemble, solve_with_matrix, two_constant_oracle, BoundaryData, Datum, DEFAULT_CG_TOL};
use lebesgue_core::mesh::{build_cross_section, mesh_quality, triangulate, BoundaryTag};
use lebesgue_core::probe::{sample_path, PathKind, PathSpec, Source};
use lebesgue_core::{CrossSection64, Error, PotentialField64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn canonical() -> CrossSection64 {
    build_cross_section(&PotentialField64::lebesgue(), 0.5, 2.0, None).unwrap()
}

fn random_datum(rng: &mut ChaCha8Rng, arc_len: f64) -> Datum<f64> {
    if rng.random_bool(0.5) {
        Datum::constant(rng.random_range(-2.0..2.0))
    } else {
        Datum::Bump {
            center: rng.random_range(0.0..arc_len),
            width: rng.random_range(0.05..0.5) * arc_len,
            amplitude: rng.random_range(-2.0..2.0),
        }
    }
}

#[test]
fn random_data_respect_the_maximum_principle() {
    let cs = canonical();
    let mesh = triangulate(&cs, 16, 64).unwrap();
    let k = assemble(&mesh).unwrap();
    let outer_len = mesh.nodes_with_tag(BoundaryTag::OuterLevel).iter().map(|&i| mesh.arc[i]).fold(0.0, f64::max);
    let inner_len = mesh.nodes_with_tag(BoundaryTag::InnerLevel).iter().map(|&i| mesh.arc[i]).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let data = BoundaryData {
            outer: random_datum(&mut rng, outer_len),
            inner: random_datum(&mut rng, inner_len),
            cap: None,
        };
        let sol = solve_with_matrix(&mesh, &k, &data, DEFAULT_CG_TOL).unwrap();
        let (lo, hi) = sol.max_principle_margins();
        assert!(lo >= -1e-8 && hi >= -1e-8, "case {case}: margins {lo}, {hi} for {data:?}");
    }
}

#[test]
fn two_constant_solutions_are_affine_images() {
    let cs = canonical();
    let mesh = triangulate(&cs, 12, 48).unwrap();
    let k = assemble(&mesh).unwrap();
    let base = solve_with_matrix(&mesh, &k, &BoundaryData::constants(0.5, 2.0), 1e-12).unwrap();
    let other = solve_with_matrix(&mesh, &k, &BoundaryData::constants(-1.0, 3.0), 1e-12).unwrap();
    for (u, v) in base.values.iter().zip(&other.values) {
        let mapped = -1.0 + 4.0 * (u - 0.5) / 1.5;
        assert!((mapped - v).abs() < 1e-8);
    }
}

#[test]
fn fem_probe_agrees_with_oracle_outside_truncation_zone() {
    let cs = canonical();
    let mesh = triangulate(&cs, 16, 64).unwrap();
    let sol = lebesgue_core::fem::solve_dirichlet(&mesh, &BoundaryData::constants(0.5, 2.0), DEFAULT_CG_TOL).unwrap();
    let spec = PathSpec { kind: PathKind::LevelCurve { c: 1.5 }, start: Some(0.8), factor: 0.5, stations: 3 };
    let fem = sample_path(&cs, &Source::Fem(&sol), &spec).unwrap();
    let pts: Vec<(f64, f64)> = fem.stations.clone();
    let exact = two_constant_oracle(cs.field(), 0.5, 2.0, 0.5, 2.0, &pts).unwrap();
    for (a, b) in fem.values.iter().zip(&exact) {
        assert!((a - b).abs() / b < 0.02, "{a} vs {b}");
    }
    let deep = PathSpec { stations: 8, ..spec };
    assert!(matches!(sample_path(&cs, &Source::Fem(&sol), &deep), Err(Error::Domain(_))));
}

#[test]
fn canonical_mesh_is_valid() {
    let cs = canonical();
    let mesh = triangulate(&cs, 16, 64).unwrap();
    let q = mesh_quality(&mesh);
    assert!(q.non_positive_areas == 0 && q.euler_ok && q.boundary_consistent, "{q:?}");
    assert_eq!(mesh.nodes_with_tag(BoundaryTag::CuspCap).len(), 1);
}
