use jumpstat_wasm::{deviation_curve_data, rates_report, trace_data};

#[test]
fn rates_report_lists_both_methods() {
    let rep = rates_report(1.5, jumpstat::sweep::optimal_rabi(), 0.0, false).unwrap();
    assert_eq!(rep.methods.len(), 2);
    for (a, b) in rep.methods[0].rates.iter().zip(&rep.methods[1].rates) {
        assert!((a - b).abs() <= 1e-6 * a);
    }
    assert_eq!(rep.independent.len(), 6);
}

#[test]
fn deviation_curve_stays_within_bound() {
    let c = deviation_curve_data(jumpstat::sweep::optimal_rabi(), 0.0, 1.0, 10.0, 50).unwrap();
    assert_eq!(c.r.len(), 50);
    assert!(c.triple_exact.iter().all(|d| d.abs() <= 0.05));
    assert!(c.triple_exact.iter().zip(&c.triple_first_order).all(|(a, b)| (a - b).abs() < 1e-3));
}

#[test]
fn trace_is_reproducible() {
    let a = trace_data(2.0, 0.5, 0.0, 300, 9).unwrap();
    let b = trace_data(2.0, 0.5, 0.0, 300, 9).unwrap();
    assert_eq!(a.times, b.times);
    assert!((a.occupation.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(a.times.len() > 100);
}

#[test]
fn bad_input_is_an_error() {
    assert!(rates_report(-1.0, 0.5, 0.0, false).is_err());
    assert!(deviation_curve_data(0.5, 0.0, 2.0, 1.0, 10).is_err());
}
