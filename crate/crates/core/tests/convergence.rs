//! Manufactured-solution convergence of the implicit scheme: second order in
//! space, first order in time.

use dcmd_core::pde::mms;

#[test]
fn spatial_order_is_at_least_1_9() {
    let study = mms::spatial_order_study().unwrap();
    for (h, e) in &study.samples {
        println!("spatial: h = {h:.5}, error = {e:.3e}");
    }
    println!("observed spatial order: {:.3}", study.order);
    assert!(study.order >= 1.9, "observed order {}", study.order);
}

#[test]
fn temporal_order_is_at_least_0_9() {
    let study = mms::temporal_order_study().unwrap();
    for (dt, e) in &study.samples {
        println!("temporal: dt = {dt:.5}, error = {e:.3e}");
    }
    println!("observed temporal order: {:.3}", study.order);
    assert!(study.order >= 0.9, "observed order {}", study.order);
}

#[test]
fn spatial_errors_decrease_monotonically() {
    let study = mms::spatial_order_study().unwrap();
    for pair in study.samples.windows(2) {
        assert!(
            pair[1].1 < pair[0].1,
            "error grew under refinement: {:?}",
            study.samples
        );
    }
}
