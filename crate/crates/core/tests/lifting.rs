use ferroconnect::connection::solve_min_connection;
use ferroconnect::geom::{kidney, unit_disk, Vec2, DEFAULT_VERTICES};
use ferroconnect::lifting::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair() -> [Vec2; 2] {
    [Vec2::new(-0.3, 0.05), Vec2::new(0.35, 0.0)]
}

#[test]
fn vortex_pair_lifts_with_jumps_on_the_connection_band() {
    let g = Grid::for_domain(&unit_disk(), 64).unwrap();
    let q = vortex_field(&g, &pair(), 1);
    let report = detect_singularities(&q);
    assert_eq!(report.non_orientable().count(), 2);
    let conn = solve_min_connection(&unit_disk(), &pair()).unwrap();
    let l = construct_lifting(&q, &conn).unwrap();
    assert_eq!(l.jumps, l.band.edges);
}

#[test]
fn field_files_reload_exactly() {
    let g = Grid::for_domain(&kidney(DEFAULT_VERTICES).unwrap(), 40).unwrap();
    let q = vortex_field(&g, &[Vec2::new(0.0, 0.0)], 1);
    let text = field_to_text(&q);
    assert_eq!(field_to_text(&field_from_text(&text).unwrap()), text);
    let bytes = field_to_bytes(&q);
    assert_eq!(field_to_bytes(&field_from_bytes(&bytes).unwrap()), bytes);
}

#[test]
fn audit_on_the_kidney_passes() {
    let audit = LowerBoundAudit::new(&kidney(DEFAULT_VERTICES).unwrap(), &[Vec2::new(-0.2, 0.1), Vec2::new(0.2, 0.1)], 64).unwrap();
    let s = audit.run(100, 3);
    assert_eq!(s.passed, 100, "{s:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn symmetric_difference_identity(seed in 0u64..10_000) {
        let g = Grid::for_domain(&unit_disk(), 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_pixel_set(&g, &mut rng);
        let b = random_pixel_set(&g, &mut rng);
        prop_assert!(symdiff_boundary_check(&g, &a, &b));
    }

    #[test]
    fn flipping_a_set_round_trips(seed in 0u64..10_000) {
        let g = Grid::for_domain(&unit_disk(), 32).unwrap();
        let q = vortex_field(&g, &pair(), 1);
        let conn = solve_min_connection(&unit_disk(), &pair()).unwrap();
        let base = construct_lifting(&q, &conn).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_pixel_set(&g, &mut rng);
        let (flipped, _) = lifting_from_set(&base, &a);
        let back = set_from_lifting(&base, &flipped).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn lower_bound_holds_for_random_sets(seed in 0u64..10_000) {
        let audit = LowerBoundAudit::new(&unit_disk(), &pair(), 48).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = audit.check(&random_pixel_set(&audit.grid, &mut rng)).unwrap();
        prop_assert!(c.pass, "{:?}", c);
    }
}
