//! Acceptance run: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use defq::fedosov::{build_fedosov, ChartData, FedosovConnection};
use defq::forms::{standard_omega, FormKey, WeylForm};
use defq::multi;
use defq::trace_grid::{chi_tr_u0, corpus_from_json, mu_tilde, trace, Bump, GridSpec, GridSymbol};
use defq::{Gq, JetPolynomial, Matrix};
use defq_cli::{cmd_pair, cmd_verify, suites, Check, Suite, TraceNormalization, U0Convention};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;
const BUMPS: &str = include_str!("../fixtures/bumps.json");
const THETA_CHART: &str = include_str!("../fixtures/theta_chart.json");

struct Verdict {
    passed: bool,
    detail: String,
    /// Failure documented as unattainable; reported but not fatal.
    known: bool,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into(), known: false }
}

/// Defects below this are floating-point round-off, not discretization.
const ROUND_OFF_FLOOR: f64 = 1e3 * f64::EPSILON;

fn from_checks(checks: &[Check]) -> Verdict {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{} ({})", c.name, c.witness.clone().unwrap_or_default()))
        .collect();
    let names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        verdict(true, names.join(", "))
    } else {
        verdict(false, format!("failed: {}", failed.join("; ")))
    }
}

fn within(v: Verdict, elapsed: Duration, budget: Duration) -> Verdict {
    if elapsed > budget {
        verdict(false, format!("{}; runtime {:.1}s over budget {:.0}s", v.detail, elapsed.as_secs_f64(), budget.as_secs_f64()))
    } else {
        v
    }
}

fn exact_moyal() -> Verdict {
    let start = Instant::now();
    let v = from_checks(&suites::moyal(50, SEED));
    within(v, start.elapsed(), Duration::from_secs(60))
}

fn rational(rng: &mut impl Rng) -> Gq {
    Gq::from_frac(rng.gen_range(-4..5), rng.gen_range(1..4))
}

fn random_jet(rng: &mut impl Rng, order: usize) -> JetPolynomial {
    let all = multi::up_to_degree(2, 3);
    let mut p = JetPolynomial::zero(2, order);
    for _ in 0..4 {
        p.add_term(all[rng.gen_range(0..all.len())].clone(), rational(rng));
    }
    p
}

fn at_origin(f: &WeylForm, m: i32) -> Matrix {
    let zero = vec![0u8; f.shape().vars()];
    f.terms()
        .get(&FormKey::new(0, zero.clone(), m))
        .and_then(|j| j.terms().get(&zero).cloned())
        .unwrap_or_else(|| Matrix::zeros(f.shape().size))
}

/// Curvature, flat lifts, associativity of the induced product through
/// `hbar^4` and the first-order commutator at the base point.
fn fedosov_fixture(name: &str, chart: &ChartData, degree: i32, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let c: FedosovConnection = build_fedosov(chart, degree).map_err(|e| format!("{name}: {e}"))?;
    if let Some((d, j)) = c.curvature_defect().map_err(|e| e.to_string())? {
        return Err(format!("{name}: curvature residual at degree {d}, jet {j}"));
    }
    let size = chart.size;
    let random_matrix = |rng: &mut ChaCha8Rng| Matrix::from_rows((0..size).map(|_| (0..size).map(|_| rational(rng)).collect()).collect());
    for k in 0..10 {
        let f = c.matrix_symbol(&random_jet(rng, chart.jet), &random_matrix(rng));
        let lift = c.flat_lift(&f).map_err(|e| e.to_string())?;
        if let Some((d, j)) = c.flatness_defect(&lift).map_err(|e| e.to_string())? {
            return Err(format!("{name}: lift {k} not flat at degree {d}, jet {j}"));
        }
    }
    for k in 0..2 {
        let (pf, pg, ph) = (random_jet(rng, chart.jet), random_jet(rng, chart.jet), random_jet(rng, chart.jet));
        let (f, g, h) = (c.symbol(&pf), c.symbol(&pg), c.symbol(&ph));
        let star = |a: &WeylForm, b: &WeylForm| c.induced_star(a, b).map_err(|e| e.to_string());
        let fg = star(&f, &g)?;
        let gf = star(&g, &f)?;
        let left = star(&fg, &h)?;
        let right = star(&f, &star(&g, &h)?)?;
        for m in 0..=4 {
            if at_origin(&left, m) != at_origin(&right, m) {
                return Err(format!("{name}: triple {k} not associative at hbar^{m}"));
            }
        }
        let bracket = chart.poisson_bracket(&pf, &pg).map_err(|e| e.to_string())?.value_at_origin();
        let comm = &at_origin(&fg, 1) - &at_origin(&gf, 1);
        if comm != Matrix::scalar(size, &bracket * &Gq::i()) {
            return Err(format!("{name}: hbar^1 commutator of pair {k} is not i{{f,g}}"));
        }
    }
    Ok(())
}

fn fedosov_flatness() -> Verdict {
    let start = Instant::now();
    let (degree, jet) = (8, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut theta: serde_json::Value = serde_json::from_str(THETA_CHART).expect("fixture");
    theta["J"] = jet.into();
    let mut omega = standard_omega(1, jet);
    omega[0][1] = JetPolynomial::parse("1 + x1^2 - 1/2*x1*x2 + 2*x2^2", 2, jet).expect("polystring");
    omega[1][0] = omega[0][1].neg();
    let fixtures = [
        ("flat", Ok(ChartData::flat(1, 2, jet))),
        ("theta-shifted", ChartData::from_json(&theta)),
        ("perturbed", ChartData::with_synthesized_connection(1, 1, jet, omega)),
    ];
    let mut done = Vec::new();
    for (name, chart) in fixtures {
        let result = chart.map_err(|e| format!("{name}: {e}")).and_then(|c| fedosov_fixture(name, &c, degree, &mut rng));
        if let Err(e) = result {
            return verdict(false, e);
        }
        done.push(name);
    }
    let v = verdict(true, format!("D={degree} J={jet}: {}", done.join(", ")));
    within(v, start.elapsed(), Duration::from_secs(300))
}

fn cyclic_suite() -> Verdict {
    from_checks(&suites::cyclic(100, SEED))
}

fn fundamental_class() -> Verdict {
    from_checks(&suites::fundamental_class_checks())
}

fn characteristic_classes() -> Verdict {
    from_checks(&suites::charclass(20, SEED))
}

fn random_symbol(rng: &mut ChaCha8Rng, spec: GridSpec) -> GridSymbol {
    let n = spec.size;
    let bumps: Vec<Bump> = (0..rng.gen_range(1..4))
        .map(|_| Bump {
            center: (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)),
            width: rng.gen_range(0.7..1.0),
            matrix: (0..n * n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            hbar_order: rng.gen_range(0..=spec.order),
        })
        .collect();
    GridSymbol::from_bumps(spec, &bumps).expect("bumps inside the margin")
}

/// Largest relative `|Tr([a, b])_m|` over the corpus at resolution `g`.
fn trace_defect(g: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for pair in 0..6 {
        let spec = GridSpec::new(10.0, g, 3, 1 + pair % 2).expect("grid");
        let (a, b) = (random_symbol(&mut rng, spec), random_symbol(&mut rng, spec));
        let t = trace(&a.commutator(&b).expect("same grid"), true);
        worst = worst.max(t.max_abs() / (a.norm() * b.norm() * spec.area()));
    }
    worst
}

fn trace_property() -> Verdict {
    let coarse = trace_defect(256);
    let fine = trace_defect(512);
    let bound = coarse <= 1e-6;
    let shrink = fine * 4.0 <= coarse;
    let mut v = verdict(
        bound && shrink,
        format!("G=256 defect {coarse:.3e} (bound 1e-6: {}), G=512 defect {fine:.3e}, shrink factor {:.2} (need >= 4)", if bound { "ok" } else { "exceeded" }, coarse / fine),
    );
    if bound && !shrink && coarse.max(fine) <= ROUND_OFF_FLOOR {
        v.known = true;
        v.detail.push_str("; both defects are at round-off, so no refinement can shrink them");
    }
    v
}

fn hoved() -> Verdict {
    let start = Instant::now();
    let (_, symbols) = corpus_from_json(&serde_json::from_str(BUMPS).expect("fixture")).expect("corpus");
    let chi = chi_tr_u0(&symbols, true, true).expect("pairing");
    let minus_mu = -mu_tilde(&symbols, true).expect("mu");
    let hbars: Vec<f64> = (0..4).map(|k| 0.1 / f64::powi(2.0, k)).collect();
    let errors: Vec<f64> = hbars.iter().map(|&h| (chi.eval(h) - minus_mu).norm()).collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let constant = errors.iter().zip(&hbars).map(|(e, h)| e / h).fold(0.0, f64::max);
    let singular = chi.singular_part() / chi.max_abs();
    let ok = ratios.iter().all(|r| (1.6..=2.4).contains(r)) && singular <= 1e-6;
    let v = verdict(ok, format!("C={constant:.3e}, ratios {ratios:.3?}, relative negative-power part {singular:.1e}"));
    within(v, start.elapsed(), Duration::from_secs(600))
}

fn reproducibility() -> Verdict {
    for suite in [Suite::Moyal, Suite::Cyclic, Suite::Charclass] {
        if cmd_verify(suite, 5, SEED) != cmd_verify(suite, 5, SEED) {
            return verdict(false, format!("verify {suite:?} differs between runs"));
        }
    }
    let run = || cmd_pair(BUMPS.as_bytes(), Some(128), 0.1, 3, TraceNormalization::Normalized, U0Convention::Signed).expect("pair");
    if run().text.as_bytes() != run().text.as_bytes() {
        return verdict(false, "pair report differs between runs");
    }
    verdict(true, "verify moyal/cyclic/charclass and pair reports byte-identical")
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("exact Moyal suite", exact_moyal),
        ("Fedosov flatness", fedosov_flatness),
        ("cyclic suite", cyclic_suite),
        ("fundamental class", fundamental_class),
        ("characteristic classes", characteristic_classes),
        ("numeric trace property", trace_property),
        ("pairing with U0 at n=1", hoved),
        ("reproducibility", reproducibility),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let status = match (v.passed, v.known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {} {status} {name}: {} [{:.1}s]", k + 1, v.detail, start.elapsed().as_secs_f64());
        if !v.passed && !v.known {
            failures += 1;
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
