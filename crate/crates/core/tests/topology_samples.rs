use dkit_core::causality::fixtures::{random_longest_path_matrix, Fixture};
use dkit_core::models::{ModelKind, SampleMode, SampleSpace, SampleSpec, SpacetimeModel};
use dkit_core::topology::{alexandrov_topology, initial_topology};
use dkit_core::CoordBox;

fn small_grid(kind: ModelKind<f64>) -> SampleSpace<f64> {
    let model = SpacetimeModel::new(kind, CoordBox::square(-3.0, 3.0)).unwrap();
    let spec = SampleSpec::new(SampleMode::GridWithProbes, 16, CoordBox::square(-1.0, 1.0));
    SampleSpace::generate(model, &spec, 0).unwrap()
}

#[test]
fn minkowski_grid_topology_is_discrete() {
    let s = small_grid(ModelKind::Minkowski);
    assert!(s.len() <= 60);
    let alex = alexandrov_topology(&s.matrix);
    assert_eq!(alex.len(), 16);
    let h = alex.is_hausdorff();
    assert!(h.hausdorff && h.discrete, "{h:?}");
    assert!(initial_topology(&s.matrix).finer_than(&alex).unwrap());
}

#[test]
fn alexandrov_is_coarser_than_initial_everywhere() {
    for f in Fixture::ALL {
        let d = f.matrix::<f64>();
        assert!(
            initial_topology(&d).finer_than(&alexandrov_topology(&d)).unwrap(),
            "{}",
            f.name()
        );
    }
    for seed in 0..300u64 {
        let d = random_longest_path_matrix::<f64>(2 + (seed % 11) as usize, 0.4, seed);
        assert!(
            initial_topology(&d).finer_than(&alexandrov_topology(&d)).unwrap(),
            "seed {seed}"
        );
    }
    for kind in [ModelKind::Minkowski, ModelKind::SlitMinkowski] {
        let s = small_grid(kind);
        assert!(initial_topology(&s.matrix)
            .finer_than(&alexandrov_topology(&s.matrix))
            .unwrap());
    }
}
