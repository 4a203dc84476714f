use lebesgue_core::contour::{radius_at, Level};
use lebesgue_core::fem::{affine_level_map, element_stiffness};
use lebesgue_core::potential::{closed_form, ClosedForm, DensityProfile, PotentialField};
use lebesgue_core::{PotentialField32, PotentialField64};
use proptest::prelude::*;

fn lebesgue() -> PotentialField64 {
    PotentialField::lebesgue()
}

fn off_rod() -> impl Strategy<Value = (f64, f64)> {
    (1e-3f64..3.0, -2.0f64..3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quadrature_agrees_with_closed_form((r, z) in off_rod()) {
        let exact = closed_form(r, z, ClosedForm::Lebesgue).unwrap();
        let quad = lebesgue().quadrature_value(r, z).unwrap();
        prop_assert!(((quad - exact) / exact).abs() <= 1e-8, "{quad} vs {exact}");
    }

    #[test]
    fn potential_decreases_away_from_axis((r, z) in off_rod(), dr in 1e-3f64..1.0) {
        let f = lebesgue();
        prop_assert!(f.value(r + dr, z).unwrap() < f.value(r, z).unwrap());
    }

    #[test]
    fn contour_radius_reproduces_level(c in 0.3f64..3.0, s in 0.02f64..0.98) {
        let f = lebesgue();
        let level = Level::new(&f, c).unwrap();
        let x = level.crossings();
        let z = x.z1 + s * (x.z2 - x.z1);
        let r = radius_at(&f, c, z).unwrap();
        if r > 1e-300 {
            prop_assert!((f.value(r, z).unwrap() - c).abs() <= 1e-10 * c);
        }
    }

    #[test]
    fn higher_levels_lie_inside_lower_ones(c in 0.3f64..2.5, dc in 0.05f64..1.0, z in 0.05f64..0.95) {
        let f = lebesgue();
        prop_assert!(radius_at(&f, c + dc, z).unwrap() < radius_at(&f, c, z).unwrap());
    }

    #[test]
    fn element_stiffness_is_symmetric_with_zero_row_sums(
        pts in prop::array::uniform3((0.0f64..2.0, -1.0f64..1.0))
    ) {
        let area = 0.5 * ((pts[1].0 - pts[0].0) * (pts[2].1 - pts[0].1) - (pts[2].0 - pts[0].0) * (pts[1].1 - pts[0].1));
        prop_assume!(area > 1e-3);
        let k = element_stiffness(pts).unwrap();
        for i in 0..3 {
            let row: f64 = k[i].iter().sum();
            prop_assert!(row.abs() < 1e-10 * k[i][i].abs().max(1.0));
            for j in 0..3 {
                prop_assert!((k[i][j] - k[j][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn affine_map_fixes_endpoints(a in 0.1f64..1.0, b in 1.5f64..3.0, alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        prop_assert!((affine_level_map(a, a, b, alpha, beta) - alpha).abs() < 1e-12);
        prop_assert!((affine_level_map(b, a, b, alpha, beta) - beta).abs() < 1e-12);
    }
}

#[test]
fn power_density_matches_lebesgue_at_unit_exponent() {
    let f: PotentialField64 = PotentialField::new(DensityProfile::power(1.0, 1.0).unwrap()).unwrap();
    for &(r, z) in &[(0.3, 0.4), (1.0, -0.5), (0.01, 2.0)] {
        let exact = closed_form(r, z, ClosedForm::Lebesgue).unwrap();
        assert!((f.value(r, z).unwrap() / exact - 1.0).abs() < 1e-9);
    }
}

#[test]
fn single_precision_tracks_double() {
    let f32_field = PotentialField32::lebesgue();
    let f64_field = lebesgue();
    for &(r, z) in &[(0.5f32, 0.5f32), (0.1, -0.3), (2.0, 1.5)] {
        let lo = f32_field.value(r, z).unwrap() as f64;
        let hi = f64_field.value(r as f64, z as f64).unwrap();
        assert!((lo / hi - 1.0).abs() < 1e-5, "{lo} vs {hi}");
    }
    let c = Level::new(&f32_field, 2.0f32).unwrap().crossings();
    assert!((c.z2 as f64 - 1.0632870688777625).abs() < 1e-5);
}
