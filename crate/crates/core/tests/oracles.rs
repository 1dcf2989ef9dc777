use std::f64::consts::PI;

use osclab::bessel::{j_nu, j_nu_batch, log_grid, transitional_threshold};
use osclab::quadoracle::{osc_integral_interval, QuadConfig};
use osclab::ComplexVal;
use proptest::prelude::*;

/// `J_n(r)` for integer `n` by Miller's backward recurrence.
fn miller(n: usize, r: f64) -> f64 {
    let top = n.max(r as usize) + 20 + (40.0 * (n.max(r as usize) as f64)).sqrt() as usize;
    let m = top + top % 2;
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let (mut norm, mut want) = (0.0, 0.0);
    for k in (1..=m).rev() {
        let prev = 2.0 * k as f64 / r * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            want *= 1e-250;
        }
        if k - 1 == n {
            want = cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
    }
    norm += cur;
    if n == 0 {
        want = cur;
    }
    want / norm
}

#[test]
fn miller_sanity() {
    assert!((miller(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
    assert!((miller(1, 2.0) - 0.576_724_807_756_873_4).abs() < 1e-14);
}

#[test]
fn bessel_matches_backward_recurrence() {
    for n in [11usize, 20, 37, 50, 64] {
        let nu = n as f64;
        for r in log_grid(transitional_threshold(nu), 10.0 * nu, 25) {
            let got = j_nu(nu, r).unwrap().j;
            let want = miller(n, r);
            assert!((got - want).abs() < 1e-10, "J_{n}({r}) = {got} vs {want}");
        }
    }
}

#[test]
fn batch_matches_pointwise() {
    let pts: Vec<(f64, f64)> = (0..12).map(|i| (10.5 + 3.5 * i as f64, 15.0 + 11.0 * i as f64)).collect();
    let batch = j_nu_batch(&pts).unwrap();
    for (&(nu, r), e) in pts.iter().zip(&batch) {
        assert_eq!(e.j.to_bits(), j_nu(nu, r).unwrap().j.to_bits());
    }
}

fn linear_phase_exact(lambda: f64, a: f64, b: f64) -> ComplexVal {
    let i = ComplexVal::i();
    ((i * lambda * b).exp() - (i * lambda * a).exp()) / (i * lambda)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linear_phase_closed_form(lambda in 1.0f64..2000.0, a in -1.0f64..0.0, w in 0.1f64..2.0) {
        let b = a + w;
        let cfg = QuadConfig::new(1e-12);
        let got = osc_integral_interval(&|x| x, &|_| 1.0, a, b, lambda, &cfg).unwrap().value;
        prop_assert!((got - linear_phase_exact(lambda, a, b)).norm() < 1e-10);
    }

    #[test]
    fn quadratic_phase_tends_to_fresnel(lambda in 200.0f64..5000.0) {
        // ∫_{-1}^{1} e^{iλx²/2} = √(2π/λ) e^{iπ/4} - endpoint terms of size 2/λ
        let cfg = QuadConfig::new(1e-12);
        let got = osc_integral_interval(&|x| 0.5 * x * x, &|_| 1.0, -1.0, 1.0, lambda, &cfg).unwrap().value;
        let lead = ComplexVal::from_polar((2.0 * PI / lambda).sqrt(), PI / 4.0);
        let endpoint = 2.0 * ComplexVal::from_polar(1.0, lambda / 2.0) / (ComplexVal::i() * lambda);
        prop_assert!((got - lead - endpoint).norm() < 3.0 / (lambda * lambda));
    }

    #[test]
    fn reflection_symmetry(lambda in 1.0f64..500.0, c in -2.0f64..2.0) {
        // even phase, odd amplitude part integrates to zero
        let cfg = QuadConfig::new(1e-12);
        let even = osc_integral_interval(&|x| x * x + c * x.powi(4), &|x| 1.0 - x * x, -1.0, 1.0, lambda, &cfg).unwrap().value;
        let mixed = osc_integral_interval(&|x| x * x + c * x.powi(4), &|x| 1.0 - x * x + x * x * x, -1.0, 1.0, lambda, &cfg).unwrap().value;
        prop_assert!((even - mixed).norm() < 1e-10);
    }
}
