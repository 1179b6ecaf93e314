use dkit_core::finsler::*;
use dkit_core::{FinslerNorm64, Point64};

fn pt(t: f64, x: f64) -> Point64 {
    Point64::new(t, x)
}

#[test]
fn perturbed_spray_converges_at_fourth_order() {
    let spray = Spray::Polynomial { eps: 0.01 };
    let sc = self_convergence(&spray, pt(0.0, 0.0), pt(2.0, 1.5), 10.0, &[16, 32, 64], 4096).unwrap();
    // Errors must sit well above roundoff for the orders to mean anything.
    assert!(sc.errors[2] > 1e-11, "{:?}", sc.errors);
    let order = sc.min_order().unwrap();
    assert!((3.5..4.5).contains(&order), "{:?}", sc.orders);
}

#[test]
fn jacobian_deviation_shrinks_with_radius() {
    let spray = Spray::Polynomial { eps: 0.01 };
    let devs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&r| exp_zero_section_probe(&spray, pt(0.0, 0.0), r, 8).unwrap())
        .map(|rep| {
            assert!(rep.lipschitz.is_finite() && rep.lipschitz < 1.0);
            rep.deviation_at_zero
        })
        .collect();
    assert!(devs[0] < 1e-6);
    assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
}

#[test]
fn randers_recovered_by_both_formulas() {
    let field = FlatField {
        norm: FinslerNorm64::randers(0.1).unwrap(),
    };
    let (p, v) = (pt(0.3, -0.2), pt(1.0, 0.3));
    let exact = 0.91f64.sqrt() - 0.03;
    let sched = default_schedule();
    let a1 = busemann_mayer_first(&field, p, v, pt(0.0, 0.2), &sched).unwrap();
    let a2 = busemann_mayer_first(&field, p, v, pt(0.5, -0.4), &sched).unwrap();
    assert!((a1.estimate - exact).abs() < 1e-3);
    assert!((a1.estimate - a2.estimate).abs() < 1e-3);
    let sq = busemann_mayer_second(&field, p, v, pt(0.0, 0.2), &sched).unwrap();
    assert!((sq.estimate - a1.estimate * a1.estimate).abs() < 1e-3);
    // Raw quotients converge at first order before extrapolation.
    let order = a1.empirical_order.unwrap();
    assert!((0.5..1.5).contains(&order), "{order}");
}

#[test]
fn second_formula_refuses_cone_boundary() {
    let field = FlatField {
        norm: FinslerNorm64::minkowski(),
    };
    let err = busemann_mayer_second(&field, pt(0.0, 0.0), pt(1.0, 1.0), pt(0.0, 0.0), &default_schedule());
    assert!(err.unwrap_err().to_string().contains("strictly inside the cone"));
}

#[test]
fn quadraticity_deficit_tracks_drift() {
    let deficits: Vec<f64> = [0.0, 0.05, 0.1]
        .iter()
        .map(|&b| {
            quadraticity_test(&FinslerNorm64::randers(b).unwrap(), pt(0.0, 0.0), 9)
                .unwrap()
                .deficit
        })
        .collect();
    assert!(deficits[0] <= 1e-6);
    assert!(deficits[0] < deficits[1] && deficits[1] < deficits[2]);
    assert!(deficits[2] > 10.0 * deficits[0]);
}
