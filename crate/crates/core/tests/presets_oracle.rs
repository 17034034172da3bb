mod support;

use qdirac::presets::{Preset, DEFAULT_Q};
use qdirac::qcore::QParam;
use qdirac::spectrum::scan_eigenvalues;

#[test]
fn eigenvalues_are_roots_of_the_closed_form() {
    let q = QParam::new(DEFAULT_Q).unwrap();
    for preset in [Preset::One, Preset::Two, Preset::Three] {
        let spec = scan_eigenvalues(&preset.problem(q).unwrap(), 8).unwrap();
        assert!(spec.symmetric_order() >= 8, "{preset:?}");
        for ev in &spec.eigenvalues {
            let omega = support::omega_oracle(preset, ev.lambda, preset.a(), DEFAULT_Q);
            // distance to the closed-form root, from one Newton step
            let step = omega / ev.omega_prime;
            assert!(
                step.abs() <= 1e-12 * ev.lambda.abs(),
                "{preset:?} n = {}: lambda = {}, step {step:e}",
                ev.n,
                ev.lambda
            );
        }
    }
}

#[test]
fn first_two_examples_have_q_geometric_spectra() {
    let q = QParam::new(DEFAULT_Q).unwrap();
    for preset in [Preset::One, Preset::Two] {
        let spec = scan_eigenvalues(&preset.problem(q).unwrap(), 8).unwrap();
        let deviation = |n: i32| {
            (spec.get(n + 1).unwrap().lambda / spec.get(n).unwrap().lambda * DEFAULT_Q - 1.0).abs()
        };
        for n in 1..7 {
            assert!(deviation(n + 1) <= deviation(n), "{preset:?} n = {n}");
            assert_eq!(spec.get(-n).unwrap().lambda, -spec.get(n).unwrap().lambda);
        }
        assert!(deviation(4) < 1e-8, "{preset:?}");
    }
}
