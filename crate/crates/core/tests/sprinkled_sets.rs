use dkit_core::causal_set::*;
use dkit_core::distance::check_reverse_triangle;
use dkit_core::gate::lms_axiom_check;
use dkit_core::SpacetimeModel64;

#[test]
fn sprinkles_satisfy_axioms_up_to_order_coincidences() {
    let model = SpacetimeModel64::minkowski(dkit_core::CoordBox64::square(-3.0, 3.0)).unwrap();
    let mut undistinguished = 0;
    for seed in 0..20u64 {
        let c = sprinkle(&model, SprinkleRegion::unit_diamond(), 500.0, seed).unwrap();
        assert!(c.len() <= 300 && c.len() > 150, "seed {seed}: N = {}", c.len());
        let d = c.chain_distance_matrix().unwrap();
        assert!(check_reverse_triangle(&d).passed(), "seed {seed}");
        let ax = lms_axiom_check(&d);
        assert!(ax.finiteness && ax.reverse_triangle);
        // Flagged points really have an empty past or future.
        for b in &ax.boundary_points {
            let i = d.index_of(b).unwrap();
            let past = (0..d.len()).any(|p| d.get(p, i).finite() != Some(0.0));
            let fut = (0..d.len()).any(|q| d.get(i, q).finite() != Some(0.0));
            assert!(!(past && fut), "{b}");
        }
        // A pair the distance cannot tell apart has identical causal past
        // and future in the sprinkled order itself.
        if let Some((p, q)) = &ax.undistinguished_pair {
            undistinguished += 1;
            let (p, q) = (d.index_of(p).unwrap(), d.index_of(q).unwrap());
            let order = c.order();
            assert!(!order.get(p, q) && !order.get(q, p));
            for r in 0..c.len() {
                assert_eq!(order.get(p, r), order.get(q, r));
                assert_eq!(order.get(r, p), order.get(r, q));
            }
        }
        assert_eq!(ax.passed, ax.undistinguished_pair.is_none());
    }
    // Poisson sprinkles at this density are often not distinguishing.
    assert!(undistinguished > 0);
}

#[test]
fn chain_distance_is_order_compatible() {
    let model = SpacetimeModel64::minkowski(dkit_core::CoordBox64::square(-3.0, 3.0)).unwrap();
    let c = sprinkle(&model, SprinkleRegion::unit_diamond(), 200.0, 3).unwrap();
    let d = c.chain_distance_matrix().unwrap();
    let order = c.order();
    let links = c.links();
    for i in 0..c.len() {
        for j in 0..c.len() {
            let v = d.get(i, j).finite().unwrap();
            assert_eq!(v > 0.0, order.get(i, j));
            if links.get(i, j) {
                assert_eq!(v, 1.0);
            }
        }
    }
}
