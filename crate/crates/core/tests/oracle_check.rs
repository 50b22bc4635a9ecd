mod oracle;

use fracsl::mittleff::ml;

#[test]
fn machin_pi_matches_constant() {
    assert_eq!(oracle::pi_f64(), std::f64::consts::PI);
}

#[test]
fn oracle_matches_erfc_form_at_small_arguments() {
    // e^{x^2} erfc(x) = 1 - 2x/sqrt(pi) + x^2 - ... near zero.
    let v = oracle::ml_half(1, 1000);
    let x: f64 = 1e-3;
    let approx = 1.0 - 2.0 * x / std::f64::consts::PI.sqrt() + x * x;
    assert!((v - approx).abs() < 1e-9);
    assert_eq!(oracle::ml_half(0, 1), 1.0);
}

#[test]
fn library_matches_oracle_on_half_order() {
    for i in 0..=40u64 {
        let x = i as f64 / 4.0;
        let want = oracle::ml_half(i, 4);
        let got = ml(0.5, 1.0, -x).unwrap();
        assert!(oracle::rel_err(got, want, 1e-300) < 1e-9, "x = {x}: {got} vs {want}");
    }
}
