use defq::trace_grid::{chi_tr_u0, corpus_from_json, mu_tilde, trace, Bump, GridSpec, GridSymbol};
use num_complex::Complex64;
use proptest::prelude::*;
use serde_json::json;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_bumps(seed: &[(f64, f64, f64, f64, f64)], n: usize, order: usize) -> Vec<Bump> {
    seed.iter()
        .enumerate()
        .map(|(k, &(cx, cxi, w, re, im))| Bump {
            center: (cx, cxi),
            width: w,
            matrix: (0..n * n).map(|e| c(re + 0.3 * e as f64, im - 0.2 * (e * e) as f64)).collect(),
            hbar_order: k % (order + 1),
        })
        .collect()
}

/// Gaussian sum with closed-form first derivatives, evaluated off-grid.
struct Analytic<'a>(&'a [Bump], usize);

impl Analytic<'_> {
    fn eval(&self, x: f64, xi: f64, dx: usize, dxi: usize) -> Vec<Complex64> {
        let n = self.1;
        let mut out = vec![c(0.0, 0.0); n * n];
        for b in self.0.iter().filter(|b| b.hbar_order == 0) {
            let (u, v) = (x - b.center.0, xi - b.center.1);
            let w2 = b.width * b.width;
            let e = (-(u * u + v * v) / w2).exp();
            let f = match (dx, dxi) {
                (0, 0) => e,
                (1, 0) => -2.0 * u / w2 * e,
                (0, 1) => -2.0 * v / w2 * e,
                _ => unreachable!(),
            };
            for (o, m) in out.iter_mut().zip(&b.matrix) {
                *o += m * f;
            }
        }
        out
    }
}

fn mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    (0..n * n).map(|p| (0..n).map(|k| a[(p / n) * n + k] * b[k * n + p % n]).sum()).collect()
}

/// Midpoint quadrature of `1/2 tr(a0 (∂_xi a1 ∂_x a2 - ∂_x a1 ∂_xi a2))` with
/// analytic derivatives.
fn jacobian_oracle(l: f64, g: usize, n: usize, word: [&[Bump]; 3]) -> Complex64 {
    let h = 2.0 * l / g as f64;
    let mut s = c(0.0, 0.0);
    for i in 0..g {
        for j in 0..g {
            let (x, xi) = (-l + (i as f64 + 0.5) * h, -l + (j as f64 + 0.5) * h);
            let a0 = Analytic(word[0], n).eval(x, xi, 0, 0);
            let (a1, a2) = (Analytic(word[1], n), Analytic(word[2], n));
            let first = mul(&a1.eval(x, xi, 0, 1), &a2.eval(x, xi, 1, 0), n);
            let second = mul(&a1.eval(x, xi, 1, 0), &a2.eval(x, xi, 0, 1), n);
            let diff: Vec<Complex64> = first.iter().zip(&second).map(|(p, q)| p - q).collect();
            let m = mul(&a0, &diff, n);
            s += (0..n).map(|r| m[r * n + r]).sum::<Complex64>();
        }
    }
    s * h * h * 0.5 / n as f64
}

#[test]
fn first_order_commutator_is_the_poisson_bracket() {
    let spec = GridSpec::new(10.0, 96, 1, 1).unwrap();
    let a = random_bumps(&[(0.5, -0.2, 1.0, 1.0, 0.0)], 1, 0);
    let b = random_bumps(&[(-0.4, 0.3, 0.9, 0.5, 0.5)], 1, 0);
    let (ga, gb) = (GridSymbol::from_bumps(spec, &a).unwrap(), GridSymbol::from_bumps(spec, &b).unwrap());
    let comm = ga.commutator(&gb).unwrap();
    let (oa, ob) = (Analytic(&a, 1), Analytic(&b, 1));
    let mut worst: f64 = 0.0;
    for i in 0..spec.points {
        for j in 0..spec.points {
            let (x, xi) = (spec.coordinate(i), spec.coordinate(j));
            let bracket = oa.eval(x, xi, 1, 0)[0] * ob.eval(x, xi, 0, 1)[0] - oa.eval(x, xi, 0, 1)[0] * ob.eval(x, xi, 1, 0)[0];
            worst = worst.max((comm.value(1, i, j)[0] - c(0.0, 1.0) * bracket).norm());
            worst = worst.max(comm.value(0, i, j)[0].norm());
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn moyal_product_is_associative_on_the_grid() {
    let spec = GridSpec::new(10.0, 128, 2, 2).unwrap();
    let make = |s: &[(f64, f64, f64, f64, f64)]| GridSymbol::from_bumps(spec, &random_bumps(s, 2, 0)).unwrap();
    let a = make(&[(0.3, 0.1, 1.0, 1.0, 0.2)]);
    let b = make(&[(-0.2, 0.4, 1.0, 0.4, -0.3)]);
    let d = make(&[(0.0, -0.5, 0.9, -0.7, 0.1)]);
    let left = a.moyal(&b).unwrap().moyal(&d).unwrap();
    let right = a.moyal(&b.moyal(&d).unwrap()).unwrap();
    let diff = left.sub(&right).unwrap().norm();
    assert!(diff < 1e-9, "{diff}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn trace_vanishes_on_commutators(
        a in prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64, 0.7..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 1..3),
        b in prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64, 0.7..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 1..3),
        n in 1usize..3,
    ) {
        let spec = GridSpec::new(10.0, 64, 3, n).unwrap();
        let ga = GridSymbol::from_bumps(spec, &random_bumps(&a, n, 3)).unwrap();
        let gb = GridSymbol::from_bumps(spec, &random_bumps(&b, n, 3)).unwrap();
        let t = trace(&ga.commutator(&gb).unwrap(), true);
        prop_assert!(t.max_abs() <= 1e-10 * ga.norm() * gb.norm() * spec.area());
    }
}

#[test]
fn mu_tilde_matches_jacobian_quadrature() {
    let n = 2;
    let spec = GridSpec::new(10.0, 128, 0, n).unwrap();
    let w0 = random_bumps(&[(0.2, 0.1, 1.0, 1.0, 0.0), (-0.5, 0.3, 1.0, 0.2, 0.4)], n, 0);
    let w1 = random_bumps(&[(0.4, -0.3, 1.0, 0.8, -0.1)], n, 0);
    let w2 = random_bumps(&[(-0.1, 0.5, 0.9, -0.3, 0.6)], n, 0);
    let word: Vec<GridSymbol> = [&w0, &w1, &w2].iter().map(|w| GridSymbol::from_bumps(spec, w).unwrap()).collect();
    let got = mu_tilde(&word, true).unwrap();
    // ∫ over dξ∧dx orientation: integrand (∂_xi a1 ∂_x a2 - ∂_x a1 ∂_xi a2)
    let oracle = jacobian_oracle(10.0, 256, n, [&w0, &w1, &w2]);
    assert!(oracle.norm() > 1e-3);
    assert!((got - oracle).norm() <= 1e-6 * oracle.norm(), "{got} vs {oracle}");
}

#[test]
fn pairing_with_u0_tends_to_minus_mu_tilde() {
    let spec = GridSpec::new(10.0, 96, 3, 1).unwrap();
    let word: Vec<GridSymbol> = [
        vec![(0.2, 0.1, 1.0, 1.0, 0.0), (0.1, -0.2, 1.0, 0.3, 0.2)],
        vec![(0.4, -0.3, 1.0, 0.8, -0.1)],
        vec![(-0.1, 0.5, 0.9, -0.3, 0.6)],
    ]
    .iter()
    .map(|s| GridSymbol::from_bumps(spec, &random_bumps(s, 1, 1)).unwrap())
    .collect();
    let chi = chi_tr_u0(&word, true, true).unwrap();
    let mu = mu_tilde(&word, true).unwrap();
    assert!(chi.singular_part() <= 1e-12 * chi.max_abs());
    assert!((chi.coefficient(0) + mu).norm() <= 1e-9 * mu.norm());
    let errors: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&h| (chi.eval(h) + mu).norm()).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..=2.4).contains(&ratio), "{ratio}");
    }

    let unsigned = chi_tr_u0(&word, false, true).unwrap();
    assert!(unsigned.max_abs() <= 1e-12 * chi.max_abs());
}

#[test]
fn corpus_parses_and_rejects_bad_support() {
    let v = json!({"L": 8.0, "G": 32, "K": 1, "N": 2, "bumps": [
        {"symbol": 0, "center": [0.0, 0.0], "width": 1.0, "matrix": [[1, 0], [0, [0, 1]]]},
        {"symbol": 2, "center": [0.5, 0.0], "width": 1.0, "matrix": [[0, 1], [1, 0]], "hbar_order": 1}
    ]});
    let (spec, symbols) = corpus_from_json(&v).unwrap();
    assert_eq!(spec.points, 32);
    assert_eq!(symbols.len(), 3);
    assert_eq!(symbols[1].norm(), 0.0);
    assert_eq!(symbols[0].value(0, 16, 16)[3], c(0.0, 1.0));

    let bad = json!({"L": 8.0, "G": 32, "K": 1, "N": 1, "bumps": [{"center": [7.5, 0.0], "width": 1.0, "matrix": [[1]]}]});
    assert!(corpus_from_json(&bad).is_err());
}

/// Fourth-order central differences with spacing `h` of a closed-form function.
fn central(f: &dyn Fn(f64, f64) -> f64, x: f64, xi: f64, h: f64, axis: usize) -> f64 {
    let at = |t: f64| if axis == 0 { f(x + t, xi) } else { f(x, xi + t) };
    (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
}

#[test]
fn first_order_commutator_matches_finite_differences() {
    let spec = GridSpec::new(10.0, 256, 1, 1).unwrap();
    let fa = |x: f64, xi: f64| (-((x - 0.3).powi(2) + (xi + 0.2).powi(2))).exp();
    let fb = |x: f64, xi: f64| 0.5 * (-((x + 0.4).powi(2) + (xi - 0.1).powi(2)) / 0.8).exp();
    let sample = |f: &dyn Fn(f64, f64) -> f64| GridSymbol::from_fn(spec, |m, x, xi| vec![c(if m == 0 { f(x, xi) } else { 0.0 }, 0.0)]);
    let comm = sample(&fa).commutator(&sample(&fb)).unwrap();
    // Richardson combination of two spacings removes the h^4 term
    let bracket = |x: f64, xi: f64, h: f64| {
        central(&fa, x, xi, h, 0) * central(&fb, x, xi, h, 1) - central(&fa, x, xi, h, 1) * central(&fb, x, xi, h, 0)
    };
    let (mut worst, mut scale): (f64, f64) = (0.0, 0.0);
    for i in (0..spec.points).step_by(3) {
        for j in (0..spec.points).step_by(3) {
            let (x, xi) = (spec.coordinate(i), spec.coordinate(j));
            let h = 1e-2;
            let oracle = (16.0 * bracket(x, xi, h / 2.0) - bracket(x, xi, h)) / 15.0;
            worst = worst.max((comm.value(1, i, j)[0] - c(0.0, oracle)).norm());
            scale = scale.max(oracle.abs());
        }
    }
    assert!(worst <= 1e-6 * scale, "{worst} vs {scale}");
}

#[test]
fn disjoint_bumps_multiply_to_zero() {
    let spec = GridSpec::new(10.0, 256, 3, 1).unwrap();
    let a = GridSymbol::from_bumps(spec, &random_bumps(&[(-4.0, 0.0, 0.6, 1.0, 0.0)], 1, 0)).unwrap();
    let b = GridSymbol::from_bumps(spec, &random_bumps(&[(4.0, 0.0, 0.6, 1.0, 0.0)], 1, 0)).unwrap();
    assert!(a.moyal(&b).unwrap().norm() < 1e-12);
    assert_eq!(trace(&GridSymbol::zero(spec), true).max_abs(), 0.0);
}

#[test]
fn mu_tilde_is_antisymmetric_and_kills_constants() {
    let spec = GridSpec::new(10.0, 96, 0, 2).unwrap();
    let make = |s: &[(f64, f64, f64, f64, f64)]| GridSymbol::from_bumps(spec, &random_bumps(s, 2, 0)).unwrap();
    let a0 = make(&[(0.2, 0.1, 1.0, 1.0, 0.0)]);
    let a1 = make(&[(0.4, -0.3, 1.0, 0.8, -0.1)]);
    let a2 = make(&[(-0.1, 0.5, 0.9, -0.3, 0.6)]);
    let forward = mu_tilde(&[a0.clone(), a1.clone(), a2.clone()], true).unwrap();
    let swapped = mu_tilde(&[a0.clone(), a2.clone(), a1.clone()], true).unwrap();
    assert!(forward.norm() > 1e-4);
    assert!((forward + swapped).norm() <= 1e-10 * forward.norm());
    let constant = GridSymbol::from_fn(spec, |_, _, _| vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 1.0)]);
    assert!(mu_tilde(&[a0.clone(), constant, a2.clone()], true).unwrap().norm() <= 1e-10 * forward.norm());
    assert!(mu_tilde(&[a0.clone(), a1.clone()], true).is_err());

    let unnormalized = mu_tilde(&[a0, a1, a2], false).unwrap();
    assert!((unnormalized - forward * 2.0).norm() <= 1e-12 * forward.norm());
}

#[test]
fn pairing_with_repeated_factor_has_no_leading_term() {
    let spec = GridSpec::new(10.0, 96, 3, 2).unwrap();
    let make = |s: &[(f64, f64, f64, f64, f64)]| GridSymbol::from_bumps(spec, &random_bumps(s, 2, 0)).unwrap();
    let a0 = make(&[(0.2, 0.1, 1.0, 1.0, 0.0)]);
    let a1 = make(&[(0.4, -0.3, 1.0, 0.8, -0.1)]);
    let chi = chi_tr_u0(&[a0.clone(), a1.clone(), a1.clone()], true, true).unwrap();
    assert!(chi.coefficient(0).norm() <= 1e-10 * chi.max_abs().max(1e-300));
    assert!(mu_tilde(&[a0.clone(), a1.clone(), a1.clone()], true).unwrap().norm() < 1e-12);
    assert!(chi_tr_u0(&[a0, a1], true, true).is_err());
}
