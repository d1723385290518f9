#![allow(dead_code)]

use defq::multi::{self, Mono};
use defq::{Gq, JetPolynomial, Matrix, Shape, WeylElement, WeylKey};
use rand::Rng;

pub fn rational(rng: &mut impl Rng) -> Gq {
    Gq::from_frac(rng.gen_range(-4..5), rng.gen_range(1..4))
}

pub fn gaussian(rng: &mut impl Rng) -> Gq {
    Gq::from_parts((rng.gen_range(-3..4), rng.gen_range(1..3)), (rng.gen_range(-2..3), rng.gen_range(1..3)))
}

pub fn matrix(rng: &mut impl Rng, n: usize) -> Matrix {
    Matrix::from_rows((0..n).map(|_| (0..n).map(|_| gaussian(rng)).collect()).collect())
}

/// Random element with `terms` monomials of fiber degree `<= fiber` and
/// hbar power `<= 1`.
pub fn weyl(rng: &mut impl Rng, shape: Shape, fiber: u32, terms: usize, scalar: bool) -> WeylElement {
    let all = multi::up_to_degree(shape.vars() as usize, fiber);
    let items: Vec<(WeylKey, Matrix)> = (0..terms)
        .map(|_| {
            let beta: Mono = all[rng.gen_range(0..all.len())].clone();
            let m = rng.gen_range(0..2);
            let c = if scalar { Matrix::scalar(shape.size, rational(rng)) } else { matrix(rng, shape.size) };
            (WeylKey::new(beta, m), c)
        })
        .collect();
    WeylElement::from_terms(shape, items).unwrap()
}

pub fn jet(rng: &mut impl Rng, vars: usize, order: usize, max_deg: u32, terms: usize) -> JetPolynomial {
    let all = multi::up_to_degree(vars, max_deg);
    let mut p = JetPolynomial::zero(vars, order);
    for _ in 0..terms {
        p.add_term(all[rng.gen_range(0..all.len())].clone(), rational(rng));
    }
    p
}

/// Random chain of `terms` basis words with lengths in `1..=max_len`.
pub fn chain(rng: &mut impl Rng, alg: &defq::cyclic::FiniteAlgebra, reduction: defq::cyclic::Reduction, max_len: usize, terms: usize) -> defq::cyclic::TensorChain {
    let mut c = defq::cyclic::TensorChain::zero(alg, reduction);
    for _ in 0..terms {
        let len = rng.gen_range(1..=max_len);
        let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..alg.dim())).collect();
        c.add_term(w, rational(rng));
    }
    c
}
