//! Seeded exact property suites behind `defq verify`.

use defq::charclass::{a_hat, ch, jlo, CurvatureMatrix, FormMatrix, NilForm, PowerSeries};
use defq::cyclic::{
    alg_delta, brodzki, chern_character, connes_b, cyclic_tau, fundamental_class, hochschild_b, BrodzkiBlocks, FiniteAlgebra, MatrixBasis,
    MatrixOver, Reduction, TensorChain, word_degree,
};
use defq::multi;
use defq::{Gq, Matrix, Shape, WeylElement, WeylKey};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::Check;

pub const MOYAL_DEGREE: i32 = 10;
pub const MOYAL_FIBER_DEGREE: u32 = 4;
pub const CHAIN_LENGTH: usize = 5;
pub const CHERN_LENGTH: usize = 7;
pub const CHERN_PROJECTIONS: usize = 10;
pub const A_HAT_ORDER: usize = 4;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rational(rng: &mut impl Rng) -> Gq {
    Gq::from_frac(rng.gen_range(-4..5), rng.gen_range(1..4))
}

fn gaussian(rng: &mut impl Rng) -> Gq {
    Gq::from_parts((rng.gen_range(-3..4), rng.gen_range(1..3)), (rng.gen_range(-2..3), rng.gen_range(1..3)))
}

fn matrix(rng: &mut impl Rng, n: usize) -> Matrix {
    Matrix::from_rows((0..n).map(|_| (0..n).map(|_| gaussian(rng)).collect()).collect())
}

fn weyl(rng: &mut impl Rng, shape: Shape, terms: usize) -> WeylElement {
    let all = multi::up_to_degree(shape.vars(), MOYAL_FIBER_DEGREE);
    let items: Vec<(WeylKey, Matrix)> = (0..terms)
        .map(|_| {
            let beta = all[rng.gen_range(0..all.len())].clone();
            let m = rng.gen_range(0..2);
            (WeylKey::new(beta, m), matrix(rng, shape.size))
        })
        .collect();
    WeylElement::from_terms(shape, items).expect("generated terms fit the shape")
}

fn chain(rng: &mut impl Rng, alg: &FiniteAlgebra, reduction: Reduction, terms: usize) -> TensorChain {
    let mut c = TensorChain::zero(alg, reduction);
    for _ in 0..terms {
        let len = rng.gen_range(1..=CHAIN_LENGTH);
        let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..alg.dim())).collect();
        c.add_term(w, rational(rng));
    }
    c
}

/// First trial index (with a label) where `fails` holds.
fn first_failure(trials: usize, mut fails: impl FnMut(usize) -> Option<String>) -> Option<String> {
    (0..trials).find_map(|t| fails(t).map(|w| format!("trial {t}: {w}")))
}

pub fn moyal(trials: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let assoc = first_failure(trials, |t| {
        let shape = Shape::new(1 + t % 2, 1 + t % 3, MOYAL_DEGREE);
        let (a, b, c) = (weyl(&mut r, shape, 3), weyl(&mut r, shape, 3), weyl(&mut r, shape, 3));
        let left = a.star(&b).and_then(|ab| ab.star(&c));
        let right = b.star(&c).and_then(|bc| a.star(&bc));
        match (left, right) {
            (Ok(l), Ok(rr)) if l == rr => None,
            _ => Some(format!("n={} N={}", shape.n, shape.size)),
        }
    });

    let mut ccr = None;
    'outer: for n in 1..=3 {
        let s = Shape::new(n, 2, MOYAL_DEGREE);
        let ihbar = WeylElement::hbar(s).scale(&Gq::i());
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { ihbar.clone() } else { WeylElement::zero(s) };
                let xp = WeylElement::x(s, i).commutator(&WeylElement::xi(s, j)).ok();
                let xx = WeylElement::x(s, i).commutator(&WeylElement::x(s, j)).ok();
                let pp = WeylElement::xi(s, i).commutator(&WeylElement::xi(s, j)).ok();
                if xp != Some(expected) || !xx.is_some_and(|c| c.is_zero()) || !pp.is_some_and(|c| c.is_zero()) {
                    ccr = Some(format!("n={n} i={i} j={j}"));
                    break 'outer;
                }
            }
        }
    }

    let units = first_failure(trials, |t| {
        let shape = Shape::new(1 + t % 2, 1 + t % 3, MOYAL_DEGREE);
        let a = weyl(&mut r, shape, 3);
        let one = WeylElement::one(shape);
        let ok = one.star(&a).ok() == Some(a.clone()) && a.star(&one).ok() == Some(a);
        (!ok).then(|| format!("n={} N={}", shape.n, shape.size))
    });

    vec![Check::exact("associativity", assoc), Check::exact("canonical_commutation", ccr), Check::exact("unit_laws", units)]
}

pub fn cyclic_algebras() -> Vec<(&'static str, FiniteAlgebra)> {
    vec![
        ("M2", FiniteAlgebra::matrices(2)),
        ("M2[eta]", FiniteAlgebra::matrices(2).adjoin_eta()),
        ("Weyl n=1 D=4", FiniteAlgebra::truncated_weyl(Shape::new(1, 1, 4))),
        ("M2 Weyl n=1 D=2", FiniteAlgebra::truncated_weyl(Shape::new(1, 2, 2))),
    ]
}

pub fn rank_one_projection(rng: &mut impl Rng, n: usize) -> Matrix {
    loop {
        let v: Vec<Gq> = (0..n).map(|_| Gq::from_int(rng.gen_range(-3..4))).collect();
        let w: Vec<Gq> = (0..n).map(|_| Gq::from_int(rng.gen_range(-3..4))).collect();
        let dot = v.iter().zip(&w).fold(Gq::zero(), |a, (x, y)| &a + &(x * y));
        if let Some(inv) = dot.inv() {
            return Matrix::from_rows((0..n).map(|i| (0..n).map(|j| &(&v[i] * &w[j]) * &inv).collect()).collect());
        }
    }
}

pub fn cyclic(trials: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let algebras = cyclic_algebras();
    let total = |alg: &FiniteAlgebra, c: &TensorChain| hochschild_b(alg, c).add(&connes_b(alg, c)).add(&alg_delta(alg, c));

    let mut b2 = None;
    let mut total2 = None;
    for t in 0..trials {
        for (name, alg) in &algebras {
            let c = chain(&mut r, alg, Reduction::Normalized, 3);
            if b2.is_none() && !hochschild_b(alg, &hochschild_b(alg, &c)).is_zero() {
                b2 = Some(format!("trial {t}: {name}"));
            }
            if total2.is_none() && !total(alg, &total(alg, &c)).is_zero() {
                total2 = Some(format!("trial {t}: {name}"));
            }
        }
    }

    let alg = FiniteAlgebra::matrices(2).adjoin_eta();
    let mut even_zero = None;
    let br = first_failure(trials, |t| {
        let mut l: Vec<Gq> = (0..alg.dim()).map(|_| rational(&mut r)).collect();
        l[alg.unit()] = Gq::one();
        let c = chain(&mut r, &alg, Reduction::Reduced, 3);
        let even = c.filter(|w| word_degree(&alg, w) % 2 == 0);
        let odd = c.filter(|w| word_degree(&alg, w) % 2 == 1);
        let vanishes = |x: &TensorChain| brodzki(&alg, &l, x, BrodzkiBlocks::Exact).map(|m| m.is_empty()).unwrap_or(false);
        if even_zero.is_none() && !vanishes(&even) {
            even_zero = Some(format!("trial {t}"));
        }
        let image_even = hochschild_b(&alg, &even).add(&alg_delta(&alg, &even));
        if !vanishes(&image_even) {
            return Some("Br∘(b+δ) != 0".into());
        }
        let moved = odd.sub(&cyclic_tau(&alg, &odd));
        (!vanishes(&moved)).then(|| "Br∘(1-τ) != 0".to_string())
    });

    let chern = first_failure(trials.min(CHERN_PROJECTIONS), |_| {
        let p = rank_one_projection(&mut r, 3);
        let basis = match MatrixBasis::adapted(&p) {
            Ok(b) => b,
            Err(e) => return Some(e.to_string()),
        };
        let mo = MatrixOver::with_basis(basis, &FiniteAlgebra::ground());
        let pe = mo.element(&p, &[Gq::one()]);
        let ok = chern_character(&mo.algebra, &pe, CHERN_LENGTH)
            .map(|c| hochschild_b(&mo.algebra, &c).add(&connes_b(&mo.algebra, &c)).filter(|w| w.len() <= CHERN_LENGTH).is_zero())
            .unwrap_or(false);
        (!ok).then(|| "(b+B)ch(p) != 0".to_string())
    });

    let mut checks = vec![
        Check::exact("b_squared", b2),
        Check::exact("total_differential_squared", total2),
        Check::exact("brodzki_chain_map", br),
        Check::exact("brodzki_even_vanishes", even_zero),
        Check::exact("chern_character_cycle", chern),
    ];
    checks.extend(fundamental_class_checks());
    checks
}

/// Signed `U0` at `n = 1` survives in the cyclic quotient and is a reduced
/// cycle; the unsigned one vanishes there.
pub fn fundamental_class_checks() -> Vec<Check> {
    let shape = Shape::new(1, 1, 2);
    let fail = |s: &str| Some(s.to_string());
    let (signed_nonzero, signed_cycle) = match fundamental_class(shape, true) {
        Ok((alg, u0)) => (
            if u0.is_zero_mod_tau(&alg) { fail("U0 is zero in the quotient") } else { None },
            if u0.map(&alg, |c| hochschild_b(&alg, c)).is_zero_mod_tau(&alg) { None } else { fail("b(U0) != 0") },
        ),
        Err(e) => (Some(e.to_string()), Some(e.to_string())),
    };
    let unsigned_zero = match fundamental_class(shape, false) {
        Ok((alg, u0)) => (!u0.is_zero_mod_tau(&alg)).then(|| "unsigned U0 is nonzero in the quotient".to_string()),
        Err(e) => Some(e.to_string()),
    };
    vec![
        Check::exact("u0_signed_nonzero_in_quotient", signed_nonzero),
        Check::exact("u0_signed_reduced_cycle", signed_cycle),
        Check::exact("u0_unsigned_vanishes_in_quotient", unsigned_zero),
    ]
}

/// Coefficients of `(h/2)/sinh(h/2)` by long division, independent of the
/// power series code in the library.
pub fn a_hat_division_oracle(order: usize) -> Vec<Gq> {
    let mut fact = vec![Gq::one()];
    for k in 1..=order + 1 {
        let prev = fact[k - 1].clone();
        fact.push(&prev * &Gq::from_int(k as i64));
    }
    let denom: Vec<Gq> = (0..=order)
        .map(|k| if k % 2 == 0 { (&fact[k + 1] * &Gq::from_int(1 << k)).inv().expect("nonzero") } else { Gq::zero() })
        .collect();
    let mut remainder: Vec<Gq> = (0..=order).map(|k| if k == 0 { Gq::one() } else { Gq::zero() }).collect();
    let mut quotient = vec![Gq::zero(); order + 1];
    for k in 0..=order {
        let q = remainder[k].clone();
        for j in 0..=order - k {
            remainder[k + j] -= &(&q * &denom[j]);
        }
        quotient[k] = q;
    }
    quotient
}

fn random_even(rng: &mut impl Rng, q: usize, terms: usize) -> NilForm {
    let mut f = NilForm::zero(q);
    for _ in 0..terms {
        let a = rng.gen_range(0..q);
        let b = (a + rng.gen_range(1..q)) % q;
        f = f.add(&NilForm::monomial(q, &[a, b], rational(rng)));
    }
    f
}

fn random_odd(rng: &mut impl Rng, q: usize, terms: usize) -> NilForm {
    let mut f = NilForm::zero(q);
    for _ in 0..terms {
        f = f.add(&NilForm::monomial(q, &[rng.gen_range(0..q)], rational(rng)));
    }
    f
}

fn random_curvature(rng: &mut impl Rng, n: usize, q: usize) -> CurvatureMatrix {
    let entries = (0..n * n).map(|_| random_even(rng, q, 2)).collect();
    CurvatureMatrix::new(FormMatrix::from_entries(n, entries).expect("n^2 entries")).expect("even entries")
}

pub fn charclass(trials: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let order = 2 * A_HAT_ORDER;
    let oracle = a_hat_division_oracle(order);
    let q = order;
    // e1e2 + e3e4 + ... has nonzero top power
    let spread = (0..q / 2).fold(NilForm::zero(q), |acc, i| acc.add(&NilForm::monomial(q, &[2 * i, 2 * i + 1], Gq::one())));
    let generator = PowerSeries::a_hat_generator(order + 1).0;
    let mut oracle_failure = (generator[..=order] != oracle[..]).then(|| "generator coefficients".to_string());
    if oracle_failure.is_none() {
        let curv = CurvatureMatrix::new(FormMatrix::from_entries(1, vec![spread.clone()]).expect("1x1")).expect("even");
        let expected = (0..=A_HAT_ORDER).fold(NilForm::zero(q), |acc, k| acc.add(&spread.pow(k).scale(&oracle[k])));
        if a_hat(&curv) != expected {
            oracle_failure = Some("a_hat of e1e2+...+e7e8".into());
        }
    }

    let mut additive = None;
    let multiplicative = first_failure(trials, |t| {
        let q = 6;
        let r1 = random_curvature(&mut r, 2, q);
        let n2 = r.gen_range(1..3);
        let r2 = random_curvature(&mut r, n2, q);
        let sum = r1.direct_sum(&r2);
        if additive.is_none() && ch(&sum, false) != ch(&r1, false).add(&ch(&r2, false)) {
            additive = Some(format!("trial {t}"));
        }
        (a_hat(&sum) != a_hat(&r1).mul(&a_hat(&r2))).then(|| format!("blocks 2 and {n2}"))
    });

    let heat = first_failure(trials, |_| {
        let n = 2;
        let a = FormMatrix::from_entries(n, (0..n * n).map(|_| random_odd(&mut r, 6, 2)).collect()).expect("n^2 entries");
        let f = a.mul(&a).expect("same shape").scale(&-Gq::one());
        let expected = f.series(&PowerSeries::exp_coefficients(4)).trace(false);
        (jlo(&a, &[Matrix::identity(n)]).ok() != Some(expected)).then(|| "jlo(A, 1) != tr exp(-A^2)".to_string())
    });

    vec![
        Check::exact("a_hat_oracle", oracle_failure),
        Check::exact("a_hat_multiplicative", multiplicative),
        Check::exact("ch_additive", additive),
        Check::exact("jlo_heat_trace", heat),
    ]
}
