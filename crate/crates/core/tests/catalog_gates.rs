use dkit_core::causality::{
    distinction_report, eq1_relations, inclusion_equivalence_check, reflectivity_report, relation_d, D_REFLECTIVITY,
    FUTURE_D_DISTINCTION, PAST_D_DISTINCTION, WEAK_D_DISTINCTION,
};
use dkit_core::distance::check_reverse_triangle;
use dkit_core::gate::{
    diamond_gate, reconstruction_excess, thm_main_gate, GateInput, Verdict, CONTINUITY_SURROGATE,
    DIAMOND_PRECOMPACTNESS, FINITENESS,
};
use dkit_core::models::{ModelKind, SampleMode, SampleSpace, SampleSpec, SpacetimeModel};
use dkit_core::topology::reflectivity_continuity_consistency;
use dkit_core::{CoordBox, Point};

fn grid_sample(kind: ModelKind<f64>) -> SampleSpace<f64> {
    let model = SpacetimeModel::new(kind, CoordBox::square(-3.0, 3.0)).unwrap();
    let spec = SampleSpec::new(SampleMode::GridWithProbes, 100, CoordBox::square(-1.0, 1.0));
    SampleSpace::generate(model, &spec, 0).unwrap()
}

#[test]
fn minkowski_sample_is_consistent_with_global_hyperbolicity() {
    let s = grid_sample(ModelKind::Minkowski);
    assert!(check_reverse_triangle(&s.matrix).passed());
    let main = thm_main_gate(GateInput::Sample(&s)).unwrap();
    assert_eq!(main.verdict, Verdict::ConsistentWithGh, "{:?}", main.conditions);
    let dia = diamond_gate(GateInput::Sample(&s)).unwrap();
    assert_eq!(dia.verdict, Verdict::ConsistentWithGh, "{:?}", dia.conditions);
    let excess = reconstruction_excess(&s, &main.reconstructed_j).unwrap();
    assert_eq!(excess.missing_pairs, 0);
    let gt = s.exact_i_relation().unwrap();
    let refl = reflectivity_report(&s.matrix, Some(&gt));
    assert!(refl.lattice_violations().is_empty());
    assert_eq!(refl.passed(D_REFLECTIVITY), Some(true));
    assert!(eq1_relations(&s.matrix).equal);
    let inc = inclusion_equivalence_check(&s.matrix, &gt);
    assert_eq!(inc.exact_direction_failures, 0);
    assert_eq!(inc.surrogate_failures, 0);
    let cons = reflectivity_continuity_consistency(&s).unwrap();
    assert!(cons.consistent && cons.probes.all_pass());
}

#[test]
fn cylinder_is_refuted_by_finiteness() {
    let model = SpacetimeModel::new(
        ModelKind::CtcCylinder { period: 1.0 },
        CoordBox::new((0.0, 1.0), (-1.0, 1.0)),
    )
    .unwrap();
    let spec = SampleSpec::new(SampleMode::Poisson, 50, model.domain);
    let s = SampleSpace::generate(model, &spec, 5).unwrap();
    let g = thm_main_gate(GateInput::Sample(&s)).unwrap();
    assert!(g.verdict.refutes(FINITENESS));
    let r = distinction_report(&s.matrix);
    for k in [FUTURE_D_DISTINCTION, PAST_D_DISTINCTION, WEAK_D_DISTINCTION] {
        assert_eq!(r.passed(k), Some(false));
    }
}

#[test]
fn slit_fails_reflectivity_and_precompactness() {
    let s = grid_sample(ModelKind::SlitMinkowski);
    let gt = s.exact_i_relation().unwrap();
    let refl = reflectivity_report(&s.matrix, Some(&gt));
    assert_eq!(refl.passed(D_REFLECTIVITY), Some(false));
    let eq1 = eq1_relations(&s.matrix);
    assert!(!eq1.equal);
    let cons = reflectivity_continuity_consistency(&s).unwrap();
    assert!(cons.consistent);
    assert!(cons.probes.upper_failures > 0);
    let g = thm_main_gate(GateInput::Sample(&s)).unwrap();
    assert!(g.verdict.refutes(DIAMOND_PRECOMPACTNESS), "{:?}", g.verdict);
    assert!(g.verdict.refutes(CONTINUITY_SURROGATE), "{:?}", g.verdict);
}

#[test]
fn punctured_fails_precompactness_only() {
    let s = grid_sample(ModelKind::PuncturedMinkowski {
        removed: Point::new(0.0, 0.0),
    });
    let dia = diamond_gate(GateInput::Sample(&s)).unwrap();
    assert!(dia.verdict.refutes(DIAMOND_PRECOMPACTNESS));
    assert!(!dia.verdict.refutes("alexandrov_hausdorff"));
    let main = thm_main_gate(GateInput::Sample(&s)).unwrap();
    assert_eq!(
        main.verdict,
        Verdict::Refuted {
            conditions: vec![DIAMOND_PRECOMPACTNESS.to_string()]
        }
    );
    assert!(relation_d(&s.matrix).is_transitive());
}
