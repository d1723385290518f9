mod common;

use defq::cyclic::*;
use defq::{Gq, Matrix, Shape, WeylElement};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn algebras() -> Vec<(&'static str, FiniteAlgebra)> {
    vec![
        ("M2", FiniteAlgebra::matrices(2)),
        ("M2[eta]", FiniteAlgebra::matrices(2).adjoin_eta()),
        ("Weyl n=1 D=4", FiniteAlgebra::truncated_weyl(Shape::new(1, 1, 4))),
        ("M2 Weyl n=1 D=2", FiniteAlgebra::truncated_weyl(Shape::new(1, 2, 2))),
    ]
}

fn total(alg: &FiniteAlgebra, c: &TensorChain) -> TensorChain {
    hochschild_b(alg, c).add(&connes_b(alg, c)).add(&alg_delta(alg, c))
}

fn unital_functional(rng: &mut impl Rng, alg: &FiniteAlgebra) -> Vec<Gq> {
    let mut l: Vec<Gq> = (0..alg.dim()).map(|_| common::rational(rng)).collect();
    l[alg.unit()] = Gq::one();
    l
}

fn rank_one_projection(rng: &mut impl Rng, n: usize) -> Matrix {
    loop {
        let v: Vec<Gq> = (0..n).map(|_| Gq::from_int(rng.gen_range(-3..4))).collect();
        let w: Vec<Gq> = (0..n).map(|_| Gq::from_int(rng.gen_range(-3..4))).collect();
        let dot = v.iter().zip(&w).fold(Gq::zero(), |a, (x, y)| &a + &(x * y));
        if let Some(inv) = dot.inv() {
            return Matrix::from_rows((0..n).map(|i| (0..n).map(|j| &(&v[i] * &w[j]) * &inv).collect()).collect());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn complex_identities_hold_exactly(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, alg) in algebras() {
            let c = common::chain(&mut rng, &alg, Reduction::Normalized, 5, 3);
            prop_assert!(hochschild_b(&alg, &hochschild_b(&alg, &c)).is_zero(), "b^2 on {}", name);
            prop_assert!(total(&alg, &total(&alg, &c)).is_zero(), "(b+B+delta)^2 on {}", name);
            let raw = c.with_reduction(Reduction::None);
            let moved = raw.sub(&cyclic_tau(&alg, &raw));
            prop_assert!(is_zero_mod_tau(&alg, &hochschild_b(&alg, &moved)), "b descends to the quotient on {}", name);
        }
    }

    #[test]
    fn brodzki_is_a_chain_map(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alg = FiniteAlgebra::matrices(2).adjoin_eta();
        let l = unital_functional(&mut rng, &alg);
        let c = common::chain(&mut rng, &alg, Reduction::Reduced, 5, 3);
        let even = c.filter(|w| word_degree(&alg, w) % 2 == 0);
        let odd = c.filter(|w| word_degree(&alg, w) % 2 == 1);
        prop_assert!(brodzki(&alg, &l, &even, BrodzkiBlocks::Exact).unwrap().is_empty());
        // on even chains the image of b + delta is odd; the target differential
        // vanishes on k^{⊗(2n+1)} in the quotient, so both sides are zero
        let image = hochschild_b(&alg, &even).add(&alg_delta(&alg, &even));
        prop_assert!(brodzki(&alg, &l, &image, BrodzkiBlocks::Exact).unwrap().is_empty());
        let moved = odd.sub(&cyclic_tau(&alg, &odd));
        prop_assert!(brodzki(&alg, &l, &moved, BrodzkiBlocks::Exact).unwrap().is_empty());
    }

    #[test]
    fn morita_trace_commutes_with_differentials(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = FiniteAlgebra::eta();
        let mo = MatrixOver::new(2, &base);
        let c = common::chain(&mut rng, &mo.algebra, Reduction::None, 4, 3);
        for normalized in [true, false] {
            let tr = |x: &TensorChain| mo.trace_map(x, normalized);
            prop_assert_eq!(tr(&hochschild_b(&mo.algebra, &c)), hochschild_b(&base, &tr(&c)));
            prop_assert_eq!(tr(&alg_delta(&mo.algebra, &c)), alg_delta(&base, &tr(&c)));
            let n = c.with_reduction(Reduction::Normalized);
            prop_assert_eq!(tr(&connes_b(&mo.algebra, &n)), connes_b(&base, &tr(&n)));
        }
    }

    #[test]
    fn pairing_is_multilinear(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = Shape::new(1, 1, 8);
        let ring = WeylRing(shape);
        let el = |rng: &mut ChaCha8Rng| common::weyl(rng, shape, 2, 2, true);
        let b: Vec<WeylElement> = (0..2).map(|_| el(&mut rng)).collect();
        let a: Vec<WeylElement> = (0..3).map(|_| el(&mut rng)).collect();
        let extra = el(&mut rng);
        let c = common::rational(&mut rng);
        for slot in 0..3 {
            let mut a2 = a.clone();
            a2[slot] = a[slot].scale(&c).add(&extra).unwrap();
            let mut a3 = a.clone();
            a3[slot] = extra.clone();
            let lhs = pair_a_component(&ring, &b, &a2);
            let rhs = pair_a_component(&ring, &b, &a).scale(&c).add(&pair_a_component(&ring, &b, &a3)).unwrap();
            prop_assert_eq!(lhs.truncate(8), rhs.truncate(8));
        }
    }
}

#[test]
fn printed_connes_sign_breaks_anticommutation() {
    let alg = FiniteAlgebra::matrices(2);
    let c = TensorChain::word(&alg, Reduction::Normalized, vec![1, 2], Gq::one());
    let printed = |x: &TensorChain| connes_b_with(&alg, x, BSign::Printed);
    let anti = hochschild_b(&alg, &printed(&c)).add(&printed(&hochschild_b(&alg, &c)));
    assert!(!anti.is_zero());
    let fixed = hochschild_b(&alg, &connes_b(&alg, &c)).add(&connes_b(&alg, &hochschild_b(&alg, &c)));
    assert!(fixed.is_zero());
}

#[test]
fn printed_delta_sign_is_not_a_differential() {
    let alg = FiniteAlgebra::matrices(2).adjoin_eta();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let failures = (0..20)
        .filter(|_| {
            let c = common::chain(&mut rng, &alg, Reduction::Normalized, 4, 3);
            let d = |x: &TensorChain| alg_delta_with(&alg, x, DeltaSign::Printed);
            let b = |x: &TensorChain| hochschild_b(&alg, x);
            !b(&d(&c)).add(&d(&b(&c))).is_zero()
        })
        .count();
    assert!(failures > 0);
}

#[test]
fn brodzki_in_degree_one_matches_a_commutator() {
    let alg = FiniteAlgebra::matrices(2);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let l = unital_functional(&mut rng, &alg);
    for (i, j) in [(1, 2), (2, 3), (3, 1)] {
        let c = TensorChain::word(&alg, Reduction::Reduced, vec![i, j], Gq::one());
        let got = brodzki(&alg, &l, &c, BrodzkiBlocks::Exact).unwrap();
        let comm = alg.mul(&alg.basis(j), &alg.basis(i)).iter().zip(alg.mul(&alg.basis(i), &alg.basis(j))).map(|(x, y)| x - &y).collect::<Vec<_>>();
        let expected = comm.iter().zip(&l).fold(Gq::zero(), |a, (x, y)| &a + &(x * y));
        assert_eq!(got.get(&1).cloned().unwrap_or_else(Gq::zero), expected);
    }
}

#[test]
fn brodzki_rejects_non_unital_functionals() {
    let alg = FiniteAlgebra::matrices(2);
    let l = vec![Gq::from_int(3); 4];
    let c = TensorChain::word(&alg, Reduction::Reduced, vec![1, 2], Gq::one());
    assert!(matches!(brodzki(&alg, &l, &c, BrodzkiBlocks::Exact), Err(defq::CyclicError::NonUnitalFunctional(_))));
}

#[test]
fn arbitrary_block_counts_break_the_chain_map() {
    let alg = FiniteAlgebra::matrices(2).adjoin_eta();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let failures = (0..40)
        .filter(|_| {
            let l = unital_functional(&mut rng, &alg);
            let c = common::chain(&mut rng, &alg, Reduction::Reduced, 5, 3);
            let even = c.filter(|w| word_degree(&alg, w) % 2 == 0);
            let image = hochschild_b(&alg, &even).add(&alg_delta(&alg, &even));
            !brodzki(&alg, &l, &image, BrodzkiBlocks::Any).unwrap().is_empty()
        })
        .count();
    assert!(failures > 0);
}

#[test]
fn chern_character_of_rank_one_projections() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let p = rank_one_projection(&mut rng, 3);
        let mo = MatrixOver::with_basis(MatrixBasis::adapted(&p).unwrap(), &FiniteAlgebra::ground());
        let pe = mo.element(&p, &[Gq::one()]);
        let ch = chern_character(&mo.algebra, &pe, 7).unwrap();
        let boundary = hochschild_b(&mo.algebra, &ch).add(&connes_b(&mo.algebra, &ch)).filter(|w| w.len() <= 7);
        assert!(boundary.is_zero());
        let traced = mo.chern_character(&pe, 7, true).unwrap();
        assert_eq!(traced.length_part(1), TensorChain::word(&mo.base, Reduction::Normalized, vec![0], Gq::from_frac(1, 3)));
    }
}

#[test]
fn printed_chern_coefficients_are_not_a_cycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = rank_one_projection(&mut rng, 3);
    let mo = MatrixOver::with_basis(MatrixBasis::adapted(&p).unwrap(), &FiniteAlgebra::ground());
    let pe = mo.element(&p, &[Gq::one()]);
    let ch = chern_character(&mo.algebra, &pe, 5).unwrap();
    let printed = ch.filter(|w| w.len() % 4 == 1).sub(&ch.filter(|w| w.len() % 4 == 3));
    let boundary = hochschild_b(&mo.algebra, &printed).add(&connes_b(&mo.algebra, &printed)).filter(|w| w.len() <= 5);
    assert!(!boundary.is_zero());
}

#[test]
fn chern_character_edge_cases() {
    let k = FiniteAlgebra::ground();
    let one = chern_character(&k, &[Gq::one()], 7).unwrap();
    assert_eq!(one, TensorChain::word(&k, Reduction::Normalized, vec![0], Gq::one()));
    let zero = chern_character(&k, &[Gq::zero()], 7).unwrap();
    assert!(zero.is_zero());
    let m2 = FiniteAlgebra::matrices(2);
    let not_idempotent = m2.basis(2);
    assert!(matches!(chern_character(&m2, &not_idempotent, 5), Err(defq::CyclicError::NotIdempotent(_))));
}

#[test]
fn fundamental_class_in_one_dimension() {
    let shape = Shape::new(1, 1, 2);
    let (alg, signed) = fundamental_class(shape, true).unwrap();
    let (_, unsigned) = fundamental_class(shape, false).unwrap();
    assert_eq!(signed.lowest_power(), Some(-1));
    assert!(!signed.is_zero_mod_tau(&alg));
    assert!(unsigned.is_zero_mod_tau(&alg));

    // b(U0) = hbar^{-1} (1/2i)(2 i hbar) = 1 before reduction
    let unreduced = signed.map(&alg, |c| c.with_reduction(Reduction::None));
    let b = unreduced.map(&alg, |c| hochschild_b(&alg, c));
    assert_eq!(b.parts().len(), 1);
    assert_eq!(b.parts()[&0], TensorChain::word(&alg, Reduction::None, vec![alg.unit()], Gq::one()));
    assert!(signed.map(&alg, |c| hochschild_b(&alg, c)).is_zero_mod_tau(&alg));
    assert!(signed.map(&alg, |c| connes_b(&alg, c)).is_zero());

    // equals (1/(i hbar)) x ⊗ xi in the quotient
    let x = FiniteAlgebra::weyl_index(shape, &[1, 0], 0).unwrap();
    let xi = FiniteAlgebra::weyl_index(shape, &[0, 1], 0).unwrap();
    let expected = TensorChain::word(&alg, Reduction::Reduced, vec![x, xi], Gq::i_pow(1).inv().unwrap());
    assert!(is_zero_mod_tau(&alg, &signed.parts()[&-1].sub(&expected)));
}

#[test]
fn fundamental_class_in_two_dimensions_is_a_cycle() {
    let shape = Shape::new(2, 1, 2);
    let (alg, u0) = fundamental_class(shape, true).unwrap();
    assert_eq!(u0.parts()[&-2].terms().len(), 24);
    assert!(u0.map(&alg, |c| hochschild_b(&alg, c)).is_zero_mod_tau(&alg));
    assert!(u0.map(&alg, |c| connes_b(&alg, c)).is_zero());
    assert!(!u0.is_zero_mod_tau(&alg));
}

#[test]
fn pairing_component_matches_explicit_formula() {
    let shape = Shape::new(1, 1, 8);
    let ring = WeylRing(shape);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let el = |rng: &mut ChaCha8Rng| common::weyl(rng, shape, 2, 2, true);
    let comm = |x: &WeylElement, y: &WeylElement| x.commutator(y).unwrap();
    let b: Vec<WeylElement> = (0..2).map(|_| el(&mut rng)).collect();
    let a: Vec<WeylElement> = (0..3).map(|_| el(&mut rng)).collect();

    let n1 = pair_a_component(&ring, &b[..1], &a[..2]);
    assert_eq!(n1, a[0].star(&comm(&b[0], &a[1])).unwrap());

    let first = a[0].star(&comm(&b[0], &a[1])).unwrap().star(&comm(&b[1], &a[2])).unwrap();
    let second = a[0].star(&comm(&b[1], &a[1])).unwrap().star(&comm(&b[0], &a[2])).unwrap();
    let expected = first.sub(&second).unwrap().scale(&Gq::from_frac(1, 2));
    assert_eq!(pair_a_component(&ring, &b, &a), expected);

    assert!(pair_a_component(&ring, &b, &a[..2]).is_zero());
    let central = WeylElement::hbar(shape);
    assert!(pair_a_component(&ring, &[central], &a[..2]).is_zero());
}
