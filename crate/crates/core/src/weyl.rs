//! Truncated matrix Weyl algebra `M_N(A^hbar)`.
//!
//! Elements are finite sums of terms `c * yhat^beta * hbar^m` with `N x N`
//! matrix coefficients `c`. Fiber variables are ordered
//! `(xhat_1..xhat_n, xihat_1..xihat_n)`. The Fedosov degree of a term is
//! `|beta| + 2m` and every element is truncated at a fixed degree `D`.

use std::collections::BTreeMap;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::WeylError;
use crate::matrix::Matrix;
use crate::multi::{self, Mono};
use crate::scalar::Gq;

/// The triple `(n, N, D)` shared by elements that may be combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    /// Number of position variables; there are `2n` fiber symbols.
    pub n: usize,
    /// Matrix size `N`.
    pub size: usize,
    /// Fedosov truncation degree `D`.
    pub degree: i32,
}

impl Shape {
    pub fn new(n: usize, size: usize, degree: i32) -> Self {
        Self { n, size, degree }
    }

    pub fn vars(&self) -> usize {
        2 * self.n
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeylKey {
    pub beta: Mono,
    pub m: i32,
}

impl WeylKey {
    pub fn new(beta: Mono, m: i32) -> Self {
        Self { beta, m }
    }

    pub fn degree(&self) -> i32 {
        multi::degree(&self.beta) as i32 + 2 * self.m
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElement {
    shape: Shape,
    terms: BTreeMap<WeylKey, Matrix>,
}

/// Coefficient of the `(s, t)` term of the Moyal expansion applied to
/// `yhat^b1 ⋆ yhat^b2`, or `None` when it vanishes.
fn moyal_coefficient(n: usize, b1: &[u8], b2: &[u8], s: &[u8], t: &[u8]) -> Option<Gq> {
    let mut num: u64 = 1;
    let mut den: u64 = 1;
    for j in 0..n {
        // d_x^s d_xi^t on the left factor, d_xi^s d_x^t on the right
        let f = multi::falling(b1[j], s[j])
            * multi::falling(b1[n + j], t[j])
            * multi::falling(b2[n + j], s[j])
            * multi::falling(b2[j], t[j]);
        if f == 0 {
            return None;
        }
        num *= f;
        den *= multi::factorial(s[j] as u32) * multi::factorial(t[j] as u32);
    }
    let k = multi::degree(s) + multi::degree(t);
    let sign = if multi::degree(t) % 2 == 1 { -1 } else { 1 };
    // (i/2)^k
    let c = Gq::i_pow(k as i64).scale_rational(&num_rational::BigRational::new(
        (sign * num as i64).into(),
        (den as i64 * (1i64 << k)).into(),
    ));
    Some(c)
}

impl WeylElement {
    pub fn zero(shape: Shape) -> Self {
        Self { shape, terms: BTreeMap::new() }
    }

    pub fn one(shape: Shape) -> Self {
        Self::constant(shape, Matrix::identity(shape.size))
    }

    pub fn scalar(shape: Shape, c: Gq) -> Self {
        Self::constant(shape, Matrix::scalar(shape.size, c))
    }

    pub fn constant(shape: Shape, m: Matrix) -> Self {
        Self::monomial(shape, vec![0; shape.vars()], 0, m)
    }

    /// `hbar^m * yhat^beta * c`, dropped if above the truncation degree.
    pub fn monomial(shape: Shape, beta: Mono, m: i32, c: Matrix) -> Self {
        let mut e = Self::zero(shape);
        e.add_term(WeylKey::new(beta, m), c);
        e
    }

    /// The fiber symbol `xhat_j` (0-based).
    pub fn x(shape: Shape, j: usize) -> Self {
        Self::monomial(shape, multi::unit(shape.vars(), j), 0, Matrix::identity(shape.size))
    }

    /// The fiber symbol `xihat_j` (0-based).
    pub fn xi(shape: Shape, j: usize) -> Self {
        Self::monomial(shape, multi::unit(shape.vars(), shape.n + j), 0, Matrix::identity(shape.size))
    }

    /// Fiber generator `v_k` in the order `(xhat_1..xhat_n, xihat_1..xihat_n)`.
    pub fn generator(shape: Shape, k: usize) -> Self {
        Self::monomial(shape, multi::unit(shape.vars(), k), 0, Matrix::identity(shape.size))
    }

    pub fn hbar(shape: Shape) -> Self {
        Self::monomial(shape, vec![0; shape.vars()], 1, Matrix::identity(shape.size))
    }

    /// Builds an element from raw terms, validating the degree bounds.
    pub fn from_terms(
        shape: Shape,
        terms: impl IntoIterator<Item = (WeylKey, Matrix)>,
    ) -> Result<Self, WeylError> {
        let mut e = Self::zero(shape);
        for (k, m) in terms {
            if k.beta.len() != shape.vars() || m.size() != shape.size {
                return Err(WeylError::ShapeMismatch(format!("term {k:?}")));
            }
            if k.m < -1 {
                return Err(WeylError::HbarUnderflow(k.m));
            }
            e.add_term(k, m);
        }
        Ok(e)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn terms(&self) -> &BTreeMap<WeylKey, Matrix> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, beta: &[u8], m: i32) -> Option<&Matrix> {
        self.terms.get(&WeylKey::new(beta.to_vec(), m))
    }

    pub(crate) fn add_term(&mut self, k: WeylKey, c: Matrix) {
        if k.degree() > self.shape.degree || c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add_term_scaled(&mut self, k: WeylKey, c: &Matrix, s: &Gq) {
        if k.degree() > self.shape.degree {
            return;
        }
        self.add_term(k, c.scale(s));
    }

    fn check_shape(&self, o: &Self) -> Result<(), WeylError> {
        if self.shape != o.shape {
            return Err(WeylError::ShapeMismatch(format!("{:?} vs {:?}", self.shape, o.shape)));
        }
        Ok(())
    }

    pub fn has_negative_hbar(&self) -> bool {
        self.terms.keys().any(|k| k.m < 0)
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms.keys().map(WeylKey::degree).min()
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms.keys().map(WeylKey::degree).max()
    }

    pub fn add(&self, o: &Self) -> Result<Self, WeylError> {
        self.check_shape(o)?;
        let mut r = self.clone();
        for (k, m) in &o.terms {
            r.add_term(k.clone(), m.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, WeylError> {
        self.check_shape(o)?;
        let mut r = self.clone();
        for (k, m) in &o.terms {
            r.add_term(k.clone(), -m);
        }
        Ok(r)
    }

    pub fn scale(&self, c: &Gq) -> Self {
        let mut r = Self::zero(self.shape);
        for (k, m) in &self.terms {
            r.add_term(k.clone(), m.scale(c));
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Gq::one())
    }

    /// Left multiplication of every coefficient by a constant matrix.
    pub fn left_matrix(&self, a: &Matrix) -> Self {
        let mut r = Self::zero(self.shape);
        for (k, m) in &self.terms {
            r.add_term(k.clone(), a * m);
        }
        r
    }

    /// Multiplies by `hbar^k` (truncating), `k` may be negative.
    pub fn shift_hbar(&self, k: i32) -> Result<Self, WeylError> {
        let mut r = Self::zero(self.shape);
        for (key, m) in &self.terms {
            let nm = key.m + k;
            if nm < -1 {
                return Err(WeylError::HbarUnderflow(nm));
            }
            r.add_term(WeylKey::new(key.beta.clone(), nm), m.clone());
        }
        Ok(r)
    }

    /// Undeformed product: commutative in the fiber symbols, matrix product
    /// on coefficients.
    pub fn mul_pointwise(&self, o: &Self) -> Result<Self, WeylError> {
        self.check_shape(o)?;
        let mut r = Self::zero(self.shape);
        for (k1, a) in &self.terms {
            for (k2, b) in &o.terms {
                if k1.degree() + k2.degree() > self.shape.degree {
                    continue;
                }
                r.add_term(WeylKey::new(multi::add(&k1.beta, &k2.beta), k1.m + k2.m), a * b);
            }
        }
        Ok(r)
    }

    fn star_unchecked(&self, o: &Self) -> Self {
        let n = self.shape.n;
        let mut r = Self::zero(self.shape);
        for (k1, a) in &self.terms {
            let d1 = k1.degree();
            for (k2, b) in &o.terms {
                if d1 + k2.degree() > self.shape.degree {
                    continue;
                }
                let ab = a * b;
                if ab.is_zero() {
                    continue;
                }
                let s_bound: Vec<u8> = (0..n).map(|j| k1.beta[j].min(k2.beta[n + j])).collect();
                let t_bound: Vec<u8> = (0..n).map(|j| k1.beta[n + j].min(k2.beta[j])).collect();
                multi::for_each_below(&s_bound, |s| {
                    multi::for_each_below(&t_bound, |t| {
                        let Some(c) = moyal_coefficient(n, &k1.beta, &k2.beta, s, t) else {
                            return;
                        };
                        let mut beta = multi::add(&k1.beta, &k2.beta);
                        for j in 0..n {
                            beta[j] -= s[j] + t[j];
                            beta[n + j] -= s[j] + t[j];
                        }
                        let m = k1.m + k2.m + (multi::degree(s) + multi::degree(t)) as i32;
                        r.add_term_scaled(WeylKey::new(beta, m), &ab, &c);
                    })
                });
            }
        }
        r
    }

    /// Moyal star product with matrix multiplication of coefficients.
    pub fn star(&self, o: &Self) -> Result<Self, WeylError> {
        self.check_shape(o)?;
        if self.has_negative_hbar() || o.has_negative_hbar() {
            return Err(WeylError::NegativeHbarSector);
        }
        Ok(self.star_unchecked(o))
    }

    /// `a ⋆ b - b ⋆ a`, admitting scalar `hbar^-1` sectors in either operand.
    pub fn commutator(&self, o: &Self) -> Result<Self, WeylError> {
        self.check_shape(o)?;
        for e in [self, o] {
            if e.terms.iter().any(|(k, m)| k.m < 0 && !m.is_scalar()) {
                return Err(WeylError::NonScalarHbarInverse);
            }
        }
        let r = self.star_unchecked(o).sub(&o.star_unchecked(self))?;
        if let Some(k) = r.terms.keys().find(|k| k.m < -1) {
            return Err(WeylError::HbarUnderflow(k.m));
        }
        Ok(r)
    }

    /// The fiber-degree-zero part (evaluation at `yhat = 0`).
    pub fn symbol_part(&self) -> Self {
        let mut r = Self::zero(self.shape);
        for (k, m) in &self.terms {
            if k.beta.iter().all(|&e| e == 0) {
                r.terms.insert(k.clone(), m.clone());
            }
        }
        r
    }

    pub fn homogeneous_part(&self, d: i32) -> Self {
        self.filter(|k| k.degree() == d)
    }

    pub fn filter(&self, keep: impl Fn(&WeylKey) -> bool) -> Self {
        Self {
            shape: self.shape,
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, m)| (k.clone(), m.clone())).collect(),
        }
    }

    /// Re-truncates to a lower degree.
    pub fn truncate(&self, d: i32) -> Self {
        let mut s = self.shape;
        s.degree = d.min(s.degree);
        Self {
            shape: s,
            terms: self.terms.iter().filter(|(k, _)| k.degree() <= d).map(|(k, m)| (k.clone(), m.clone())).collect(),
        }
    }

    /// Removes the central component: for every fiber-constant term the
    /// multiple `tr(c)/N` of the identity is subtracted.
    pub fn remove_central(&self) -> Self {
        let nn = self.shape.size as i64;
        let mut r = self.clone();
        for (k, m) in &self.terms {
            if k.beta.iter().all(|&e| e == 0) {
                let c = m.trace().scale_rational(&num_rational::BigRational::new(1.into(), nn.into()));
                r.add_term(k.clone(), -&Matrix::scalar(self.shape.size, c));
            }
        }
        r
    }

    /// `exp_⋆(self)`; requires every term to have degree at least 1.
    pub fn exp_star(&self) -> Result<Self, WeylError> {
        self.require_positive("exp_star")?;
        let mut acc = Self::one(self.shape);
        let mut pow = Self::one(self.shape);
        let mut k = 1i64;
        loop {
            pow = pow.star(self)?.scale(&Gq::from_frac(1, k));
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow)?;
            k += 1;
        }
        Ok(acc)
    }

    /// `log_⋆(self)` for `self = 1 + u` with `u` of degree at least 1.
    pub fn log_star(&self) -> Result<Self, WeylError> {
        let u = self.sub(&Self::one(self.shape))?;
        u.require_positive("log_star")?;
        let mut acc = Self::zero(self.shape);
        let mut pow = Self::one(self.shape);
        let mut k = 1i64;
        loop {
            pow = pow.star(&u)?;
            if pow.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&pow.scale(&Gq::from_frac(sign, k)))?;
            k += 1;
        }
        Ok(acc)
    }

    /// `exp(ad self)(a) = Σ (ad self)^k a / k!`; requires degree >= 1.
    pub fn ad_exp(&self, a: &Self) -> Result<Self, WeylError> {
        self.require_positive("ad_exp")?;
        let mut acc = a.clone();
        let mut cur = a.clone();
        let mut k = 1i64;
        loop {
            cur = self.commutator(&cur)?.scale(&Gq::from_frac(1, k));
            if cur.is_zero() {
                break;
            }
            acc = acc.add(&cur)?;
            k += 1;
        }
        Ok(acc)
    }

    fn require_positive(&self, what: &str) -> Result<(), WeylError> {
        match self.min_degree() {
            Some(d) if d < 1 => Err(WeylError::DegreeBound(format!("{what} needs degree >= 1, found {d}"))),
            _ => Ok(()),
        }
    }

    /// Canonical JSON form.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|(k, m)| {
                serde_json::json!({
                    "beta": k.beta,
                    "m": k.m,
                    "matrix": m.rows().iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "n": self.shape.n,
            "N": self.shape.size,
            "D": self.shape.degree,
            "terms": terms,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, WeylError> {
        let bad = |s: &str| WeylError::ShapeMismatch(format!("json: {s}"));
        let get = |k: &str| v.get(k).and_then(|x| x.as_i64()).ok_or_else(|| bad(k));
        let shape = Shape::new(get("n")? as usize, get("N")? as usize, get("D")? as i32);
        let mut terms = Vec::new();
        for t in v.get("terms").and_then(|t| t.as_array()).ok_or_else(|| bad("terms"))? {
            let beta: Mono = serde_json::from_value(t["beta"].clone()).map_err(|_| bad("beta"))?;
            let m = t["m"].as_i64().ok_or_else(|| bad("m"))? as i32;
            let rows: Vec<Vec<Gq>> = serde_json::from_value(t["matrix"].clone()).map_err(|_| bad("matrix"))?;
            terms.push((WeylKey::new(beta, m), Matrix::from_rows(rows)));
        }
        Self::from_terms(shape, terms)
    }
}
