use cellpp::analytics::{vacancy_probability, PcfFamily};
use cellpp::runner::{run_experiment, ExperimentConfig, ModelKind};
use cellpp::sampling::sample_ppp;
use cellpp::tessellation::locate_cell;
use cellpp::{build_voronoi, type1_users, type2_users, Execution, Seed, Window};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cells_tile_the_torus(seed in any::<u64>(), side in 10.0f64..16.0, lambda in 1.0f64..3.0) {
        let bs = sample_ppp(lambda, Window::torus(side).unwrap(), Seed(seed)).unwrap();
        prop_assume!(bs.len() >= 3);
        let tess = build_voronoi(&bs).unwrap();
        let total: f64 = tess.areas().sum();
        prop_assert!((total - side * side).abs() < 1e-8 * side * side);
        prop_assert!(tess.areas().all(|a| a > 0.0));
    }

    #[test]
    fn users_lie_in_their_cells(seed in any::<u64>(), eta in 0.1f64..5.0) {
        let w = Window::torus(10.0).unwrap();
        let bs = sample_ppp(1.0, w, Seed(seed)).unwrap();
        prop_assume!(bs.len() >= 3);
        let tess = build_voronoi(&bs).unwrap();
        let t1 = type1_users(tess.clone(), Seed(seed).derive(1));
        prop_assert_eq!(t1.n_vacant(), 0);
        let pop = sample_ppp(eta, w, Seed(seed).derive(2)).unwrap();
        let t2 = type2_users(tess, &pop, Seed(seed).derive(3)).unwrap();
        prop_assert!(t2.n_active() <= pop.len());
        for a in [&t1, &t2] {
            for e in &a.entries {
                if let Some(u) = e.user {
                    prop_assert_eq!(locate_cell(&a.tess, u), e.bs_index);
                }
            }
        }
    }

    #[test]
    fn vacancy_decreases_with_density(eta in 0.01f64..50.0, step in 0.01f64..5.0) {
        let (lo, hi) = (vacancy_probability(eta).unwrap(), vacancy_probability(eta + step).unwrap());
        prop_assert!(hi < lo && hi > 0.0 && lo < 1.0);
    }

    #[test]
    fn published_models_start_at_zero_and_tend_to_one(r in 0.0f64..1e-4) {
        for fam in PcfFamily::ALL {
            let m = fam.published();
            prop_assert!(m.value(r) < 1e-3, "{fam}");
            prop_assert!((m.value(60.0) - 1.0).abs() < 1e-9, "{fam}");
        }
    }

    #[test]
    fn seeds_determine_realizations(seed in any::<u64>()) {
        let w = Window::torus(10.0).unwrap();
        let a = sample_ppp(1.0, w, Seed(seed).realization(3)).unwrap();
        let b = sample_ppp(1.0, w, Seed(seed).realization(3)).unwrap();
        prop_assert_eq!(a.points, b.points);
    }
}

#[test]
fn bundle_written_to_disk_matches_memory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { model: ModelKind::TypeII, eta: Some(2.0), n_realizations: 2, ..Default::default() };
    let out = run_experiment(&cfg, Execution::Sequential).unwrap();
    let paths = out.write_to(dir.path()).unwrap();
    assert_eq!(paths.len(), out.files.len());
    for (path, file) in paths.iter().zip(&out.files) {
        assert_eq!(std::fs::read_to_string(path).unwrap(), file.table.render());
    }
}
