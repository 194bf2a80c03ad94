use proptest::prelude::*;
use wronski::expr::parse_str;
use wronski::jet::{evaluate_jet, Jet};

const STEP: f64 = 1e-5;

/// Relative error with a floor of 1e-3 on the magnitude, so that points
/// where a derivative crosses zero do not blow the ratio up.
fn rel_err(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(1e-3)
}

/// One expression per catalog function, wrapped around a non-trivial inner
/// function that stays positive for t > 0.
const CATALOG: [&str; 7] = [
    "exp(0.7*t + 0.3*t^2)",
    "ln(0.7*t + 0.3*t^2)",
    "sin(0.7*t + 0.3*t^2)",
    "cos(0.7*t + 0.3*t^2)",
    "sqrt(0.7*t + 0.3*t^2)",
    "t^2.5",
    "1/(1 + t^2)",
];

fn arb_jet(max_order: usize, lo: f64, hi: f64) -> impl Strategy<Value = Jet> {
    (0..=max_order).prop_flat_map(move |m| {
        prop::collection::vec(lo..hi, m + 1).prop_map(|c| Jet::from_coeffs(0.0, c))
    })
}

fn arb_jet_pair(max_order: usize) -> impl Strategy<Value = (Jet, Jet)> {
    (0..=max_order).prop_flat_map(|m| {
        (
            prop::collection::vec(-2.0..2.0, m + 1),
            prop::collection::vec(-2.0..2.0, m + 1),
        )
            .prop_map(|(a, b)| (Jet::from_coeffs(0.0, a), Jet::from_coeffs(0.0, b)))
    })
}

fn arb_jet_triple(max_order: usize) -> impl Strategy<Value = (Jet, Jet, Jet)> {
    (0..=max_order).prop_flat_map(|m| {
        let v = || prop::collection::vec(-2.0..2.0, m + 1);
        (v(), v(), v()).prop_map(|(a, b, c)| {
            (
                Jet::from_coeffs(0.0, a),
                Jet::from_coeffs(0.0, b),
                Jet::from_coeffs(0.0, c),
            )
        })
    })
}

fn max_coeff_diff(a: &Jet, b: &Jet) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn first_and_second_derivatives_match_central_differences(t0 in 0.5f64..3.0) {
        for src in CATALOG {
            let e = parse_str(src).unwrap();
            let jet = evaluate_jet(&e, t0, 2).unwrap();
            let d1 = jet.derivative(1).unwrap();
            let d2 = jet.derivative(2).unwrap();

            let fd1 = (e.eval(t0 + STEP) - e.eval(t0 - STEP)) / (2.0 * STEP);
            prop_assert!(rel_err(fd1, d1) <= 1e-6, "{} f' at {}: {} vs {}", src, t0, fd1, d1);

            // differencing the (already checked) first derivative avoids the
            // 1/h^2 rounding blow-up of a three-point second difference
            let slope = |t: f64| evaluate_jet(&e, t, 1).unwrap().derivative(1).unwrap();
            let fd2 = (slope(t0 + STEP) - slope(t0 - STEP)) / (2.0 * STEP);
            prop_assert!(rel_err(fd2, d2) <= 1e-6, "{} f'' at {}: {} vs {}", src, t0, fd2, d2);
        }
    }

    #[test]
    fn sin_squared_plus_cos_squared_is_one(f in arb_jet(6, -1.0, 1.0)) {
        let (s, c) = f.sin_cos();
        let sum = s.mul(&s).unwrap().add(&c.mul(&c).unwrap()).unwrap();
        let one = Jet::constant(0.0, f.order(), 1.0);
        prop_assert!(max_coeff_diff(&sum, &one) <= 1e-12);
    }

    #[test]
    fn ln_inverts_exp(f in arb_jet(6, -1.0, 1.0)) {
        let back = f.exp().ln().unwrap();
        prop_assert!(max_coeff_diff(&back, &f) <= 1e-12);
    }

    #[test]
    fn multiplication_is_commutative((f, g) in arb_jet_pair(6)) {
        prop_assert!(max_coeff_diff(&f.mul(&g).unwrap(), &g.mul(&f).unwrap()) <= 1e-12);
    }

    #[test]
    fn multiplication_is_associative((f, g, h) in arb_jet_triple(6)) {
        let left = f.mul(&g).unwrap().mul(&h).unwrap();
        let right = f.mul(&g.mul(&h).unwrap()).unwrap();
        prop_assert!(max_coeff_diff(&left, &right) <= 1e-12);
    }

    #[test]
    fn division_is_right_inverse_of_multiplication(
        (f, g) in arb_jet_pair(6),
        g0 in prop_oneof![0.5f64..2.0, -2.0f64..-0.5],
    ) {
        let mut gc = g.coeffs().to_vec();
        gc[0] = g0;
        let g = Jet::from_coeffs(0.0, gc);
        let q = f.div(&g).unwrap();
        prop_assert!(max_coeff_diff(&q.mul(&g).unwrap(), &f) <= 1e-12);
    }

    #[test]
    fn product_rule((f, g) in arb_jet_pair(6)) {
        prop_assume!(f.order() >= 1);
        let lhs = f.mul(&g).unwrap().derivative(1).unwrap();
        let rhs = f.derivative(1).unwrap() * g.value() + f.value() * g.derivative(1).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn sqrt_squares_back(f in arb_jet(6, 0.5, 2.0)) {
        let r = f.sqrt().unwrap();
        prop_assert!(max_coeff_diff(&r.mul(&r).unwrap(), &f) <= 1e-12);
    }
}

#[test]
fn higher_derivatives_match_closed_forms() {
    // d^k/dt^k e^{2t} = 2^k e^{2t}
    let j = evaluate_jet(&parse_str("exp(2*t)").unwrap(), 0.4, 6).unwrap();
    for k in 0..=6 {
        let exact = 2f64.powi(k as i32) * (0.8f64).exp();
        assert!(rel_err(j.derivative(k).unwrap(), exact) < 1e-13);
    }
    // d^k/dt^k sin t = sin(t + kπ/2)
    let j = evaluate_jet(&parse_str("sin(t)").unwrap(), 1.1, 6).unwrap();
    for k in 0..=6 {
        let exact = (1.1 + k as f64 * std::f64::consts::FRAC_PI_2).sin();
        assert!((j.derivative(k).unwrap() - exact).abs() < 1e-13);
    }
    // d^k/dt^k ln t = (-1)^(k-1) (k-1)! / t^k
    let j = evaluate_jet(&parse_str("ln(t)").unwrap(), 2.0, 5).unwrap();
    for k in 1..=5 {
        let fact: f64 = (1..k).map(|i| i as f64).product();
        let exact = if k % 2 == 1 { fact } else { -fact } / 2f64.powi(k as i32);
        assert!(rel_err(j.derivative(k).unwrap(), exact) < 1e-13);
    }
}
