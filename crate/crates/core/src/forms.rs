//! Differential forms on a coordinate chart with values in the matrix Weyl
//! algebra whose coefficients are truncated jets in the base coordinates.
//!
//! A component is indexed by `(I, beta, m)`: the form `dx^I` (a bitmask of
//! base indices), the fiber monomial `yhat^beta` in the ordering
//! `(xhat_1..xhat_n, xihat_1..xihat_n)` and the power `hbar^m`.

use std::collections::BTreeMap;

use num_traits::One;

use crate::error::WeylError;
use crate::jets::{JetMatrix, JetPolynomial};
use crate::matrix::Matrix;
use crate::multi::{self, Mono};
use crate::scalar::Gq;
use crate::weyl::{Shape, WeylElement};

/// Truncation data shared by all forms of one computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FormShape {
    pub n: usize,
    pub size: usize,
    pub degree: i32,
    pub jet: usize,
    /// When set, a component of Fedosov degree `d` keeps jets up to order
    /// `jet - d - 1` only.
    pub graded: bool,
}

impl FormShape {
    pub fn new(n: usize, size: usize, degree: i32, jet: usize) -> Self {
        Self { n, size, degree, jet, graded: false }
    }

    pub fn graded(n: usize, size: usize, degree: i32, jet: usize) -> Self {
        Self { n, size, degree, jet, graded: true }
    }

    pub fn vars(&self) -> usize {
        2 * self.n
    }

    pub fn weyl_shape(&self) -> Shape {
        Shape::new(self.n, self.size, self.degree)
    }

    /// Highest jet order stored at Fedosov degree `d`, `None` if nothing is kept.
    pub fn jet_cap(&self, d: i32) -> Option<usize> {
        if !self.graded {
            return Some(self.jet);
        }
        let c = self.jet as i64 - d as i64 - 1;
        if c < 0 {
            None
        } else {
            Some((c as usize).min(self.jet))
        }
    }

    fn compatible(&self, o: &Self) -> Result<Self, WeylError> {
        if self.n != o.n || self.size != o.size || self.degree != o.degree || self.graded != o.graded {
            return Err(WeylError::ShapeMismatch(format!("{self:?} vs {o:?}")));
        }
        Ok(Self { jet: self.jet.min(o.jet), ..*self })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormKey {
    pub mask: u32,
    pub beta: Mono,
    pub m: i32,
}

impl FormKey {
    pub fn new(mask: u32, beta: Mono, m: i32) -> Self {
        Self { mask, beta, m }
    }

    pub fn degree(&self) -> i32 {
        multi::degree(&self.beta) as i32 + 2 * self.m
    }

    pub fn form_degree(&self) -> u32 {
        self.mask.count_ones()
    }
}

/// `(-1)^{#{(i, j) : i in a, j in b, i > j}}`, the sign of `dx^a ∧ dx^b`
/// relative to the sorted basis element.
pub fn wedge_sign(a: u32, b: u32) -> bool {
    let mut count = 0;
    for j in 0..32 {
        if b & (1 << j) != 0 {
            count += (a >> (j + 1)).count_ones();
        }
    }
    count % 2 == 1
}

fn below(mask: u32, k: usize) -> u32 {
    (mask & ((1u32 << k) - 1)).count_ones()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylForm {
    shape: FormShape,
    terms: BTreeMap<FormKey, JetMatrix>,
}

impl WeylForm {
    pub fn zero(shape: FormShape) -> Self {
        Self { shape, terms: BTreeMap::new() }
    }

    pub fn one(shape: FormShape) -> Self {
        Self::term(shape, 0, vec![0; shape.vars()], 0, JetMatrix::constant(shape.vars(), Matrix::identity(shape.size)))
    }

    pub fn term(shape: FormShape, mask: u32, beta: Mono, m: i32, c: JetMatrix) -> Self {
        let mut f = Self::zero(shape);
        f.add_term(FormKey::new(mask, beta, m), c);
        f
    }

    /// `dx^I · yhat^beta · hbar^m · c` with a constant matrix `c`.
    pub fn constant_term(shape: FormShape, indices: &[usize], beta: Mono, m: i32, c: Matrix) -> Self {
        let mut mask = 0u32;
        let mut sign = false;
        for &k in indices {
            if mask & (1 << k) != 0 {
                return Self::zero(shape);
            }
            sign ^= wedge_sign(mask, 1 << k);
            mask |= 1 << k;
        }
        let c = if sign { -&c } else { c };
        Self::term(shape, mask, beta, m, JetMatrix::constant(shape.vars(), c))
    }

    /// Degree-zero form from a Weyl element with constant coefficients.
    pub fn from_weyl(shape: FormShape, a: &WeylElement) -> Self {
        let mut f = Self::zero(shape);
        for (k, c) in a.terms() {
            f.add_term(FormKey::new(0, k.beta.clone(), k.m), JetMatrix::constant(shape.vars(), c.clone()));
        }
        f
    }

    /// The function `p(x) · Id` as a form of degree zero.
    pub fn from_jet(shape: FormShape, p: &JetPolynomial) -> Self {
        Self::term(shape, 0, vec![0; shape.vars()], 0, JetMatrix::from_scalar_jet(p, shape.size))
    }

    pub fn shape(&self) -> FormShape {
        self.shape
    }

    pub fn terms(&self) -> &BTreeMap<FormKey, JetMatrix> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, k: FormKey, c: JetMatrix) {
        if k.degree() > self.shape.degree {
            return;
        }
        let Some(cap) = self.shape.jet_cap(k.degree()) else {
            return;
        };
        let c = c.truncate(cap);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c, cap);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn with_shape(&self, shape: FormShape) -> Self {
        let mut r = Self::zero(shape);
        for (k, c) in &self.terms {
            r.add_term(k.clone(), c.clone());
        }
        r
    }

    pub fn add(&self, o: &Self) -> Result<Self, WeylError> {
        let shape = self.shape.compatible(&o.shape)?;
        let mut r = self.with_shape(shape);
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, WeylError> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Gq) -> Self {
        let mut r = Self::zero(self.shape);
        for (k, v) in &self.terms {
            r.add_term(k.clone(), v.scale(c));
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Gq::one())
    }

    pub fn filter(&self, keep: impl Fn(&FormKey) -> bool) -> Self {
        Self {
            shape: self.shape,
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    pub fn homogeneous_part(&self, d: i32) -> Self {
        self.filter(|k| k.degree() == d)
    }

    pub fn form_part(&self, p: u32) -> Self {
        self.filter(|k| k.form_degree() == p)
    }

    /// Fiber-degree-zero part.
    pub fn symbol_part(&self) -> Self {
        self.filter(|k| k.beta.iter().all(|&e| e == 0))
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms.keys().map(FormKey::degree).min()
    }

    /// Drops jet orders above `cap(d)` in each degree-`d` component.
    pub fn restrict_jets(&self, cap: impl Fn(i32) -> Option<usize>) -> Self {
        let mut r = Self::zero(self.shape);
        for (k, v) in &self.terms {
            if let Some(c) = cap(k.degree()) {
                r.add_term(k.clone(), v.truncate(c));
            }
        }
        r
    }

    /// Lowest jet order at which some component of degree `d` is nonzero.
    pub fn lowest_jet_order(&self) -> Option<usize> {
        self.terms.values().flat_map(|v| v.terms().keys().map(|a| multi::degree(a) as usize)).min()
    }

    /// Value at the base point `x = 0` of a degree-zero form, as a Weyl element.
    pub fn at_origin(&self) -> WeylElement {
        let shape = self.shape.weyl_shape();
        let zero = vec![0u8; self.shape.vars()];
        let mut out = WeylElement::zero(shape);
        for (k, v) in &self.terms {
            if k.mask != 0 {
                continue;
            }
            if let Some(m) = v.terms().get(&zero) {
                if k.m >= -1 {
                    out = out
                        .add(&WeylElement::monomial(shape, k.beta.clone(), k.m, m.clone()))
                        .expect("same shape");
                }
            }
        }
        out
    }

    /// Exterior derivative in the base coordinates; the jet order drops by one.
    pub fn base_d(&self) -> Self {
        let shape = FormShape { jet: self.shape.jet.saturating_sub(1), ..self.shape };
        self.base_d_raw().with_shape(shape)
    }

    /// Exterior derivative without lowering the recorded jet order; the top
    /// stored jet order of the result is incomplete.
    pub(crate) fn base_d_raw(&self) -> Self {
        let mut r = Self::zero(self.shape);
        for (key, v) in &self.terms {
            for k in 0..self.shape.vars() {
                if key.mask & (1 << k) != 0 {
                    continue;
                }
                let dv = v.derivative(k);
                if dv.is_zero() {
                    continue;
                }
                let dv = if below(key.mask, k) % 2 == 1 { dv.scale(&-Gq::one()) } else { dv };
                r.add_term(FormKey::new(key.mask | (1 << k), key.beta.clone(), key.m), dv);
            }
        }
        r
    }

    /// `delta = sum_k dx^k ∧ d/d yhat^k`.
    pub fn delta(&self) -> Self {
        let mut r = Self::zero(self.shape);
        for (key, v) in &self.terms {
            for k in 0..self.shape.vars() {
                if key.beta[k] == 0 || key.mask & (1 << k) != 0 {
                    continue;
                }
                let mut beta = key.beta.clone();
                beta[k] -= 1;
                let mut c = Gq::from_int(key.beta[k] as i64);
                if below(key.mask, k) % 2 == 1 {
                    c = -c;
                }
                r.add_term(FormKey::new(key.mask | (1 << k), beta, key.m), v.scale(&c));
            }
        }
        r
    }

    /// Euler homotopy `(1/(p+q)) sum_k yhat^k ι_k` on the sector of fiber
    /// degree `p` and form degree `q`, zero when `p + q = 0`.
    pub fn delta_inv(&self) -> Self {
        let mut r = Self::zero(self.shape);
        for (key, v) in &self.terms {
            let pq = multi::degree(&key.beta) + key.form_degree();
            if pq == 0 {
                continue;
            }
            for k in 0..self.shape.vars() {
                if key.mask & (1 << k) == 0 {
                    continue;
                }
                let mut beta = key.beta.clone();
                beta[k] += 1;
                let mut c = Gq::from_frac(1, pq as i64);
                if below(key.mask, k) % 2 == 1 {
                    c = -c;
                }
                r.add_term(FormKey::new(key.mask & !(1 << k), beta, key.m), v.scale(&c));
            }
        }
        r
    }

    /// Returns `(delta delta_inv a, delta_inv delta a, a_00)`; intermediate
    /// terms one degree above the truncation are retained.
    pub fn hodge_parts(&self) -> (Self, Self, Self) {
        let wide = FormShape { degree: self.shape.degree + 1, ..self.shape };
        let a = self.with_shape(wide);
        let p1 = a.delta_inv().delta().with_shape(self.shape);
        let p2 = a.delta().delta_inv().with_shape(self.shape);
        let p0 = self.filter(|k| k.mask == 0 && k.beta.iter().all(|&e| e == 0));
        (p1, p2, p0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(k, v)| {
                let form: Vec<usize> = (0..32).filter(|i| k.mask & (1 << i) != 0).map(|i| i + 1).collect();
                let jets: Vec<serde_json::Value> = v
                    .terms()
                    .iter()
                    .map(|(a, m)| {
                        serde_json::json!({
                            "alpha": a,
                            "matrix": m.rows().iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                serde_json::json!({"form": form, "beta": k.beta, "m": k.m, "jets": jets})
            })
            .collect();
        serde_json::json!({
            "n": self.shape.n,
            "N": self.shape.size,
            "D": self.shape.degree,
            "J": self.shape.jet,
            "terms": terms,
        })
    }
}

/// Coefficients of `P^k / k!` with `P = sum_{a,b} Pi^{ab}(x) s_a t_b`,
/// indexed by the exponents of `s` (left factor) and `t` (right factor).
#[derive(Clone, Debug)]
pub struct PoissonKernel {
    levels: Vec<Vec<(Mono, Mono, JetPolynomial)>>,
}

impl PoissonKernel {
    pub fn new(pi: &[Vec<JetPolynomial>], max_level: usize) -> Self {
        let vars = pi.len();
        let mut levels = vec![vec![(vec![0; vars], vec![0; vars], JetPolynomial::one(vars, pi[0][0].order()))]];
        let mut cur: BTreeMap<(Mono, Mono), JetPolynomial> = levels[0].iter().map(|(a, b, c)| ((a.clone(), b.clone()), c.clone())).collect();
        for k in 1..=max_level {
            let mut next: BTreeMap<(Mono, Mono), JetPolynomial> = BTreeMap::new();
            let inv_k = Gq::from_frac(1, k as i64);
            for ((mu, nu), c) in &cur {
                for (a, row) in pi.iter().enumerate() {
                    for (b, p) in row.iter().enumerate() {
                        if p.is_zero() {
                            continue;
                        }
                        let mut mu2 = mu.clone();
                        mu2[a] += 1;
                        let mut nu2 = nu.clone();
                        nu2[b] += 1;
                        let add = c.mul(p).scale(&inv_k);
                        let e = next.entry((mu2, nu2)).or_insert_with(|| JetPolynomial::zero(vars, add.order()));
                        *e = e.add(&add);
                    }
                }
            }
            next.retain(|_, v| !v.is_zero());
            levels.push(next.iter().map(|((a, b), c)| (a.clone(), b.clone(), c.clone())).collect());
            cur = next;
        }
        Self { levels }
    }

    /// The constant kernel of the standard form: `Pi^{x_j xi_j} = 1`.
    pub fn standard(n: usize, jet: usize, max_level: usize) -> Self {
        Self::new(&standard_poisson(n, jet), max_level)
    }
}

/// `Pi = -omega_st^{-1}` for `omega_st(d xhat_j, d xihat_j) = 1`.
pub fn standard_poisson(n: usize, jet: usize) -> Vec<Vec<JetPolynomial>> {
    let vars = 2 * n;
    let mut pi = vec![vec![JetPolynomial::zero(vars, jet); vars]; vars];
    for j in 0..n {
        pi[j][n + j] = JetPolynomial::one(vars, jet);
        pi[n + j][j] = JetPolynomial::one(vars, jet).neg();
    }
    pi
}

/// The standard symplectic matrix `omega_{x_j xi_j} = 1`.
pub fn standard_omega(n: usize, jet: usize) -> Vec<Vec<JetPolynomial>> {
    let vars = 2 * n;
    let mut om = vec![vec![JetPolynomial::zero(vars, jet); vars]; vars];
    for j in 0..n {
        om[j][n + j] = JetPolynomial::one(vars, jet);
        om[n + j][j] = JetPolynomial::one(vars, jet).neg();
    }
    om
}

/// Forms over one chart together with the fiberwise Poisson kernel.
#[derive(Clone, Debug)]
pub struct FormAlgebra {
    shape: FormShape,
    kernel: PoissonKernel,
}

impl FormAlgebra {
    pub fn standard(shape: FormShape) -> Self {
        let levels = (shape.degree + 2).max(0) as usize;
        Self { shape, kernel: PoissonKernel::standard(shape.n, shape.jet, levels) }
    }

    /// Star product with `Pi = -omega(x)^{-1}`.
    pub fn with_poisson(shape: FormShape, pi: &[Vec<JetPolynomial>]) -> Self {
        let levels = (shape.degree + 2).max(0) as usize;
        Self { shape, kernel: PoissonKernel::new(pi, levels) }
    }

    pub fn shape(&self) -> FormShape {
        self.shape
    }

    /// Exterior product on `dx^I` combined with the star product on values.
    pub fn wedge_star(&self, a: &WeylForm, b: &WeylForm) -> Result<WeylForm, WeylError> {
        self.product(a, b, |_, _| false)
    }

    /// Graded commutator `a ∧⋆ b - (-1)^{pq} b ∧⋆ a`, bilinear in the
    /// homogeneous components.
    pub fn commutator(&self, a: &WeylForm, b: &WeylForm) -> Result<WeylForm, WeylError> {
        let ab = self.wedge_star(a, b)?;
        let ba = self.product(b, a, |kb, ka| (kb.form_degree() * ka.form_degree()) % 2 == 1)?;
        ab.sub(&ba)
    }

    fn product(
        &self,
        a: &WeylForm,
        b: &WeylForm,
        extra_sign: impl Fn(&FormKey, &FormKey) -> bool,
    ) -> Result<WeylForm, WeylError> {
        let shape = a.shape.compatible(&b.shape)?.compatible(&self.shape)?;
        let vars = shape.vars();
        let mut r = WeylForm::zero(shape);
        for (k1, v1) in &a.terms {
            let d1 = k1.degree();
            let p1 = multi::degree(&k1.beta) as usize;
            for (k2, v2) in &b.terms {
                if k1.mask & k2.mask != 0 {
                    continue;
                }
                let d = d1 + k2.degree();
                if d > shape.degree {
                    continue;
                }
                let Some(cap) = shape.jet_cap(d) else { continue };
                let negate = wedge_sign(k1.mask, k2.mask) ^ extra_sign(k1, k2);
                let mask = k1.mask | k2.mask;
                let p2 = multi::degree(&k2.beta) as usize;
                for (lvl, entries) in self.kernel.levels.iter().enumerate().take(p1.min(p2) + 1) {
                    for (mu, nu, c) in entries {
                        if (0..vars).any(|j| mu[j] > k1.beta[j] || nu[j] > k2.beta[j]) {
                            continue;
                        }
                        let mut num: u64 = 1;
                        for j in 0..vars {
                            num *= multi::falling(k1.beta[j], mu[j]) * multi::falling(k2.beta[j], nu[j]);
                        }
                        let mut coef = Gq::i_pow(lvl as i64).scale_rational(&num_rational::BigRational::new(
                            (num as i64).into(),
                            (1i64 << lvl).into(),
                        ));
                        if negate {
                            coef = -coef;
                        }
                        let beta: Mono = (0..vars).map(|j| k1.beta[j] - mu[j] + k2.beta[j] - nu[j]).collect();
                        let jets = v1.mul_scaled(v2, &c.scale(&coef), cap);
                        r.add_term(FormKey::new(mask, beta, k1.m + k2.m + lvl as i32), jets);
                    }
                }
            }
        }
        Ok(r)
    }
}

/// `A_{-1} = (1/hbar) sum_{k,l} omega_{kl}(x) yhat^k dx^l`.
pub fn a_minus_one(shape: FormShape, omega: &[Vec<JetPolynomial>]) -> WeylForm {
    let vars = shape.vars();
    let mut r = WeylForm::zero(shape);
    for k in 0..vars {
        for l in 0..vars {
            if omega[k][l].is_zero() {
                continue;
            }
            r.add_term(FormKey::new(1 << l, multi::unit(vars, k), -1), JetMatrix::from_scalar_jet(&omega[k][l], shape.size));
        }
    }
    r
}

/// Finds the fourth root of unity `c` with `delta(a) = c [A_{-1}, a]` on the
/// fiber generators of the standard chart.
pub fn delta_constant(n: usize) -> Option<Gq> {
    let shape = FormShape::new(n, 1, 3, 0);
    let alg = FormAlgebra::standard(shape);
    let a = a_minus_one(shape, &standard_omega(n, 0));
    let candidates = [Gq::one(), Gq::i(), -Gq::one(), -Gq::i()];
    candidates.into_iter().find(|c| {
        (0..2 * n).all(|k| {
            let y = WeylForm::term(shape, 0, multi::unit(2 * n, k), 0, JetMatrix::constant(2 * n, Matrix::identity(1)));
            let lhs = y.delta();
            let rhs = alg.commutator(&a, &y).map(|r| r.scale(c));
            rhs.is_ok_and(|r| r == lhs)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn id1(vars: usize) -> JetMatrix {
        JetMatrix::constant(vars, Matrix::identity(1))
    }

    fn random_form(rng: &mut impl Rng, shape: FormShape, terms: usize) -> WeylForm {
        let vars = shape.vars();
        let mut f = WeylForm::zero(shape);
        for _ in 0..terms {
            let mask: u32 = rng.gen_range(0..(1u32 << vars));
            let beta: Mono = (0..vars).map(|_| rng.gen_range(0..3)).collect();
            let m = rng.gen_range(0..2);
            let mut jets = JetMatrix::new();
            for _ in 0..2 {
                let alpha: Mono = (0..vars).map(|_| rng.gen_range(0..2)).collect();
                let rows: Vec<Vec<Gq>> = (0..shape.size)
                    .map(|_| (0..shape.size).map(|_| Gq::from_frac(rng.gen_range(-3..4), rng.gen_range(1..3))).collect())
                    .collect();
                jets.add_term(alpha, Matrix::from_rows(rows), shape.jet);
            }
            f.add_term(FormKey::new(mask, beta, m), jets);
        }
        f
    }

    #[test]
    fn wedge_with_one_and_repeated_index() {
        let s = FormShape::new(1, 1, 4, 2);
        let alg = FormAlgebra::standard(s);
        let a = WeylForm::term(s, 1, vec![1, 0], 0, id1(2));
        assert_eq!(alg.wedge_star(&a, &WeylForm::one(s)).unwrap(), a);
        let b = WeylForm::term(s, 1, vec![0, 1], 0, id1(2));
        assert!(alg.wedge_star(&a, &b).unwrap().is_zero());
    }

    #[test]
    fn bracket_of_one_forms_reorders_the_wedge() {
        let s = FormShape::new(1, 1, 4, 2);
        let alg = FormAlgebra::standard(s);
        let a = WeylForm::term(s, 0b01, vec![1, 0], 0, id1(2));
        let b = WeylForm::term(s, 0b10, vec![0, 1], 0, id1(2));
        let br = alg.commutator(&a, &b).unwrap();
        let ws = Shape::new(1, 1, 4);
        let x = WeylElement::x(ws, 0);
        let xi = WeylElement::xi(ws, 0);
        // dx2 ∧ dx1 = -dx1 ∧ dx2 turns the graded sign into a plain commutator
        let anti = x.commutator(&xi).unwrap();
        let expected = WeylForm::from_weyl(s, &anti);
        let expected = WeylForm {
            shape: s,
            terms: expected.terms.into_iter().map(|(k, v)| (FormKey::new(0b11, k.beta, k.m), v)).collect(),
        };
        assert_eq!(br, expected);
    }

    #[test]
    fn base_d_examples() {
        let s = FormShape::new(1, 1, 4, 3);
        let x1 = JetPolynomial::coordinate(2, 3, 0);
        let f = WeylForm::term(s, 0b10, vec![0, 0], 0, JetMatrix::from_scalar_jet(&x1, 1));
        let df = f.base_d();
        assert_eq!(df.shape().jet, 2);
        let expected = WeylForm::term(df.shape(), 0b11, vec![0, 0], 0, id1(2));
        assert_eq!(df, expected);
        assert!(WeylForm::one(s).base_d().is_zero());
    }

    #[test]
    fn delta_examples() {
        let s = FormShape::new(1, 1, 4, 2);
        let y1 = WeylForm::term(s, 0, vec![1, 0], 0, id1(2));
        let dx1 = WeylForm::term(s, 1, vec![0, 0], 0, id1(2));
        assert_eq!(y1.delta(), dx1);
        assert_eq!(dx1.delta_inv(), y1);
    }

    #[test]
    fn delta_matches_ad_a_minus_one() {
        assert_eq!(delta_constant(1), Some(-Gq::i()));
        assert_eq!(delta_constant(2), Some(-Gq::i()));
    }

    #[test]
    fn wedge_sign_basics() {
        assert!(!wedge_sign(0b01, 0b10));
        assert!(wedge_sign(0b10, 0b01));
        assert!(!wedge_sign(0b100, 0b011));
    }

    #[test]
    fn complex_identities_on_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = FormShape::new(1, 2, 5, 3);
        for _ in 0..20 {
            let a = random_form(&mut rng, s, 4);
            assert!(a.delta().delta().is_zero());
            assert!(a.delta_inv().delta_inv().is_zero());
            assert!(a.base_d().base_d().is_zero());
            let dd = a.base_d().delta().add(&a.delta().base_d()).unwrap();
            assert!(dd.is_zero());
            let (p1, p2, p0) = a.hodge_parts();
            assert_eq!(p1.add(&p2).unwrap().add(&p0).unwrap(), a);
        }
    }

    #[test]
    fn graded_associativity_and_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = FormShape::new(1, 2, 4, 2);
        let alg = FormAlgebra::standard(s);
        for _ in 0..4 {
            let a = random_form(&mut rng, s, 2);
            let b = random_form(&mut rng, s, 2);
            let c = random_form(&mut rng, s, 2);
            let l = alg.wedge_star(&alg.wedge_star(&a, &b).unwrap(), &c).unwrap();
            let r = alg.wedge_star(&a, &alg.wedge_star(&b, &c).unwrap()).unwrap();
            assert_eq!(l, r);
        }
        // Jacobi on homogeneous forms
        for _ in 0..4 {
            let pick = |rng: &mut ChaCha8Rng| {
                let p = rng.gen_range(0..3);
                random_form(rng, s, 2).form_part(p)
            };
            let a = pick(&mut rng);
            let b = pick(&mut rng);
            let c = pick(&mut rng);
            let deg = |f: &WeylForm| f.terms.keys().next().map(|k| k.form_degree()).unwrap_or(0);
            let (p, q, r) = (deg(&a), deg(&b), deg(&c));
            let sgn = |e: u32| if e % 2 == 1 { -Gq::one() } else { Gq::one() };
            let t1 = alg.commutator(&a, &alg.commutator(&b, &c).unwrap()).unwrap().scale(&sgn(p * r));
            let t2 = alg.commutator(&b, &alg.commutator(&c, &a).unwrap()).unwrap().scale(&sgn(q * p));
            let t3 = alg.commutator(&c, &alg.commutator(&a, &b).unwrap()).unwrap().scale(&sgn(r * q));
            assert!(t1.add(&t2).unwrap().add(&t3).unwrap().is_zero());
        }
    }

    #[test]
    fn jet_dependent_kernel_is_associative() {
        // Pi(x) = (1 + x1) Pi_st in one degree of freedom
        let s = FormShape::new(1, 1, 4, 3);
        let f = JetPolynomial::parse("1 + x1", 2, 3).unwrap();
        let mut pi = standard_poisson(1, 3);
        pi[0][1] = f.clone();
        pi[1][0] = f.neg();
        let alg = FormAlgebra::with_poisson(s, &pi);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let a = random_form(&mut rng, s, 2).form_part(0);
            let b = random_form(&mut rng, s, 2).form_part(0);
            let c = random_form(&mut rng, s, 2).form_part(0);
            let l = alg.wedge_star(&alg.wedge_star(&a, &b).unwrap(), &c).unwrap();
            let r = alg.wedge_star(&a, &alg.wedge_star(&b, &c).unwrap()).unwrap();
            assert_eq!(l, r);
        }
    }
}
