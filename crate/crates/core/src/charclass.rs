//! Characteristic classes of concrete curvature matrices with entries in a
//! finite exterior algebra.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::Value;

use crate::error::CharClassError;
use crate::forms::wedge_sign;
use crate::matrix::Matrix;
use crate::multi;
use crate::scalar::Gq;

/// Element of the exterior algebra on `q` generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilForm {
    q: usize,
    terms: BTreeMap<u32, Gq>,
}

impl NilForm {
    pub fn zero(q: usize) -> Self {
        assert!(q <= 31, "at most 31 generators");
        Self { q, terms: BTreeMap::new() }
    }

    pub fn scalar(q: usize, c: Gq) -> Self {
        let mut f = Self::zero(q);
        f.add_term(0, c);
        f
    }

    pub fn one(q: usize) -> Self {
        Self::scalar(q, Gq::one())
    }

    /// `c e_{i_1} ... e_{i_k}` for 0-based indices in the given order.
    pub fn monomial(q: usize, gens: &[usize], c: Gq) -> Self {
        let mut f = Self::one(q).scale(&c);
        for &g in gens {
            f = f.mul(&Self::generator(q, g));
        }
        f
    }

    pub fn generator(q: usize, k: usize) -> Self {
        assert!(k < q, "generator index out of range");
        let mut f = Self::zero(q);
        f.add_term(1 << k, Gq::one());
        f
    }

    pub fn generators(&self) -> usize {
        self.q
    }

    pub fn terms(&self) -> &BTreeMap<u32, Gq> {
        &self.terms
    }

    pub fn coefficient(&self, mask: u32) -> Gq {
        self.terms.get(&mask).cloned().unwrap_or_else(Gq::zero)
    }

    pub fn constant(&self) -> Gq {
        self.coefficient(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    pub fn add_term(&mut self, mask: u32, c: Gq) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(mask).or_insert_with(Gq::zero);
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&mask);
        }
    }

    /// Same element viewed with `q >= self.q` generators.
    pub fn pad(&self, q: usize) -> Self {
        assert!(q >= self.q && q <= 31);
        Self { q, terms: self.terms.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.pad(self.q.max(o.q));
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Gq::one())
    }

    pub fn scale(&self, c: &Gq) -> Self {
        let mut r = Self::zero(self.q);
        for (m, v) in &self.terms {
            r.add_term(*m, v * c);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.q.max(o.q));
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                if a & b != 0 {
                    continue;
                }
                let v = x * y;
                r.add_term(a | b, if wedge_sign(*a, *b) { -v } else { v });
            }
        }
        r
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(self.q), |acc, _| acc.mul(self))
    }

    /// `sum_k c_k x^k` for `x` with vanishing constant term; terminates by
    /// nilpotency.
    pub fn series(&self, coeffs: &[Gq]) -> Result<Self, CharClassError> {
        if !self.constant().is_zero() {
            return Err(CharClassError::Parity("series argument must have no scalar part".into()));
        }
        let mut out = Self::zero(self.q);
        let mut power = Self::one(self.q);
        for c in coeffs {
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scale(c));
            power = power.mul(self);
        }
        Ok(out)
    }

    pub fn exp(&self) -> Result<Self, CharClassError> {
        self.series(&PowerSeries::exp_coefficients(self.q / 2 + 1))
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| serde_json::json!({"subset": (0..self.q).filter(|k| m & (1 << k) != 0).map(|k| k + 1).collect::<Vec<_>>(), "coefficient": c.to_string()}))
            .collect();
        serde_json::json!({"generators": self.q, "terms": terms})
    }
}

/// Truncated power series with exact coefficients, used to produce the
/// scalar series behind the characteristic classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries(pub Vec<Gq>);

impl PowerSeries {
    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let mut out = vec![Gq::zero(); n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += &(&self.0[i] * &o.0[j]);
            }
        }
        Self(out)
    }

    pub fn inverse(&self) -> Option<Self> {
        let inv0 = self.0.first()?.inv()?;
        let n = self.order();
        let mut out = vec![Gq::zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            let mut s = Gq::zero();
            for j in 1..=k {
                s += &(&self.0[j] * &out[k - j]);
            }
            out[k] = -(&s * &inv0);
        }
        Some(Self(out))
    }

    /// `log` of a series with constant term 1.
    pub fn log(&self) -> Option<Self> {
        if !self.0.first()?.is_one() {
            return None;
        }
        let n = self.order();
        let mut u = self.clone();
        u.0[0] = Gq::zero();
        let mut out = Self(vec![Gq::zero(); n]);
        let mut power = Self(std::iter::once(Gq::one()).chain(std::iter::repeat(Gq::zero())).take(n).collect());
        for k in 1..n {
            power = power.mul(&u);
            let c = Gq::from_frac(if k % 2 == 1 { 1 } else { -1 }, k as i64);
            for (o, p) in out.0.iter_mut().zip(&power.0) {
                *o += &(&c * p);
            }
        }
        Some(out)
    }

    pub fn exp_coefficients(n: usize) -> Vec<Gq> {
        (0..n).map(|k| Gq::from_frac(1, multi::factorial(k as u32) as i64)).collect()
    }

    /// `(h/2) / sinh(h/2)` through `h^{n-1}`.
    pub fn a_hat_generator(n: usize) -> Self {
        let sinhc = Self(
            (0..n)
                .map(|k| if k % 2 == 0 { Gq::from_frac(1, (multi::factorial(k as u32 + 1) as i64) * (1i64 << k)) } else { Gq::zero() })
                .collect(),
        );
        sinhc.inverse().expect("constant term 1")
    }
}

/// Square matrix with [`NilForm`] entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormMatrix {
    n: usize,
    q: usize,
    entries: Vec<NilForm>,
}

impl FormMatrix {
    pub fn zero(n: usize, q: usize) -> Self {
        Self { n, q, entries: vec![NilForm::zero(q); n * n] }
    }

    pub fn identity(n: usize, q: usize) -> Self {
        let mut m = Self::zero(n, q);
        for i in 0..n {
            m.entries[i * n + i] = NilForm::one(q);
        }
        m
    }

    pub fn from_entries(n: usize, entries: Vec<NilForm>) -> Result<Self, CharClassError> {
        if entries.len() != n * n || n == 0 {
            return Err(CharClassError::Shape(format!("expected {} entries", n * n)));
        }
        let q = entries.iter().map(NilForm::generators).max().unwrap_or(0);
        Ok(Self { n, q, entries: entries.into_iter().map(|e| e.pad(q)).collect() })
    }

    /// `M ⊗ f` for a constant matrix.
    pub fn from_matrix(m: &Matrix, f: &NilForm) -> Self {
        let n = m.size();
        let entries = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| f.scale(m.get(i, j))).collect();
        Self { n, q: f.generators(), entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> usize {
        self.q
    }

    pub fn get(&self, i: usize, j: usize) -> &NilForm {
        &self.entries[i * self.n + j]
    }

    pub fn pad(&self, q: usize) -> Self {
        Self { n: self.n, q, entries: self.entries.iter().map(|e| e.pad(q)).collect() }
    }

    fn same(&self, o: &Self) -> Result<usize, CharClassError> {
        if self.n != o.n {
            return Err(CharClassError::Shape(format!("{}x{} vs {}x{}", self.n, self.n, o.n, o.n)));
        }
        Ok(self.q.max(o.q))
    }

    pub fn add(&self, o: &Self) -> Result<Self, CharClassError> {
        let q = self.same(o)?;
        Ok(Self { n: self.n, q, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, CharClassError> {
        self.add(&o.scale(&-Gq::one()))
    }

    pub fn scale(&self, c: &Gq) -> Self {
        Self { n: self.n, q: self.q, entries: self.entries.iter().map(|e| e.scale(c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self, CharClassError> {
        let q = self.same(o)?;
        let n = self.n;
        let mut out = Self::zero(n, q);
        for i in 0..n {
            for j in 0..n {
                let mut acc = NilForm::zero(q);
                for k in 0..n {
                    acc = acc.add(&self.get(i, k).mul(o.get(k, j)));
                }
                out.entries[i * n + j] = acc;
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(NilForm::is_zero)
    }

    pub fn is_even(&self) -> bool {
        self.entries.iter().all(NilForm::is_even)
    }

    pub fn is_odd(&self) -> bool {
        self.entries.iter().all(NilForm::is_odd)
    }

    pub fn trace(&self, normalized: bool) -> NilForm {
        let t = (0..self.n).fold(NilForm::zero(self.q), |acc, i| acc.add(self.get(i, i)));
        if normalized {
            t.scale(&Gq::from_frac(1, self.n as i64))
        } else {
            t
        }
    }

    /// Block direct sum.
    pub fn direct_sum(&self, o: &Self) -> Self {
        let q = self.q.max(o.q);
        let n = self.n + o.n;
        let mut out = Self::zero(n, q);
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[i * n + j] = self.get(i, j).pad(q);
            }
        }
        for i in 0..o.n {
            for j in 0..o.n {
                out.entries[(self.n + i) * n + self.n + j] = o.get(i, j).pad(q);
            }
        }
        out
    }

    /// `sum_k c_k M^k`, stopping once powers vanish.
    pub fn series(&self, coeffs: &[Gq]) -> Self {
        let mut out = Self::zero(self.n, self.q);
        let mut power = Self::identity(self.n, self.q);
        for c in coeffs {
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scale(c)).expect("same shape");
            power = power.mul(self).expect("same shape");
        }
        out
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({"size": self.n, "entries": self.entries.iter().map(NilForm::to_json).collect::<Vec<_>>()})
    }
}

/// Curvature: a square matrix of even forms without scalar part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvatureMatrix(FormMatrix);

impl CurvatureMatrix {
    pub fn new(m: FormMatrix) -> Result<Self, CharClassError> {
        if !m.is_even() {
            return Err(CharClassError::Parity("curvature entries must be even".into()));
        }
        if m.entries.iter().any(|e| !e.constant().is_zero()) {
            return Err(CharClassError::Parity("curvature entries must have no scalar part".into()));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &FormMatrix {
        &self.0
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        Self(self.0.direct_sum(&o.0))
    }

    /// Largest power that can be nonzero.
    pub fn nilpotency_bound(&self) -> usize {
        self.0.q / 2
    }
}

/// Coefficients of `log((h/2)/sinh(h/2))` through `h^{2k}`.
pub fn a_hat_log_coefficients(k: usize) -> Vec<Gq> {
    PowerSeries::a_hat_generator(2 * k + 1).log().expect("constant term 1").0
}

/// `det((R/2)/sinh(R/2)) = exp(tr log((R/2)/sinh(R/2)))`.
pub fn a_hat(r: &CurvatureMatrix) -> NilForm {
    let bound = r.nilpotency_bound();
    let coeffs = a_hat_log_coefficients(bound);
    let log = r.0.series(&coeffs);
    log.trace(false).exp().expect("trace of nilpotent log has no scalar part")
}

/// `sum_k tr(R^k)/k!`.
pub fn ch(r: &CurvatureMatrix, normalized: bool) -> NilForm {
    r.0.series(&PowerSeries::exp_coefficients(r.nilpotency_bound() + 1)).trace(normalized)
}

/// `e^theta` for an even form without scalar part.
pub fn exp_theta(theta: &NilForm) -> Result<NilForm, CharClassError> {
    if !theta.is_even() {
        return Err(CharClassError::Parity("theta must be even".into()));
    }
    theta.exp()
}

/// JLO cocycle of the connection `A` on constant matrices, with curvature
/// `A^2`.
pub fn jlo(a: &FormMatrix, word: &[Matrix]) -> Result<NilForm, CharClassError> {
    let f = a.mul(a)?;
    jlo_with_curvature(a, &CurvatureMatrix::new(f)?, word)
}

/// `∫_{Δ_k} tr(a_0 e^{-t_0 F} ∇a_1 e^{-t_1 F} ... ∇a_k e^{-t_k F})` with
/// `∇a = [A, a]` on constant matrices and a given curvature `F`. Uses
/// `∫_{Δ_k} t^j = j_0! ... j_k! / (k + |j|)!`.
pub fn jlo_with_curvature(a: &FormMatrix, f: &CurvatureMatrix, word: &[Matrix]) -> Result<NilForm, CharClassError> {
    if !a.is_odd() {
        return Err(CharClassError::Parity("connection form must be odd".into()));
    }
    let Some(first) = word.first() else {
        return Err(CharClassError::Shape("empty word".into()));
    };
    let n = a.size();
    if f.0.size() != n || word.iter().any(|m| m.size() != n) {
        return Err(CharClassError::Shape("connection, curvature and word sizes differ".into()));
    }
    let q = a.generators().max(f.0.generators());
    let a = a.pad(q);
    let unit = NilForm::one(q);
    let lift = |m: &Matrix| FormMatrix::from_matrix(m, &unit);
    let nabla: Vec<FormMatrix> = word[1..].iter().map(|m| {
        let m = lift(m);
        a.mul(&m).and_then(|x| x.sub(&m.mul(&a)?)).expect("same shape")
    }).collect();
    let k = nabla.len();
    let bound = f.nilpotency_bound();
    let fpow: Vec<FormMatrix> = {
        let fq = f.0.pad(q);
        let mut v = vec![FormMatrix::identity(n, q)];
        for _ in 0..bound {
            let next = v.last().unwrap().mul(&fq)?;
            v.push(next);
        }
        v
    };
    let mut total = NilForm::zero(q);
    let mut exps = vec![0usize; k + 1];
    loop {
        let sum: usize = exps.iter().sum();
        if sum <= bound {
            let mut prod = lift(first).mul(&fpow[exps[0]])?;
            for (i, d) in nabla.iter().enumerate() {
                prod = prod.mul(d)?.mul(&fpow[exps[i + 1]])?;
            }
            let c = Gq::from_frac(if sum % 2 == 0 { 1 } else { -1 }, multi::factorial((k + sum) as u32) as i64);
            total = total.add(&prod.trace(false).scale(&c));
        }
        // next multi-index with entries <= bound
        let mut i = 0;
        loop {
            if i > k {
                return Ok(total);
            }
            exps[i] += 1;
            if exps[i] <= bound {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_signs() {
        let e1 = NilForm::generator(3, 0);
        let e2 = NilForm::generator(3, 1);
        assert!(e1.mul(&e1).is_zero());
        assert_eq!(e1.mul(&e2), e2.mul(&e1).neg());
        let e12 = e1.mul(&e2);
        assert_eq!(e12.mul(&NilForm::generator(3, 2)), NilForm::generator(3, 2).mul(&e12));
    }

    #[test]
    fn series_inverse_and_log() {
        let s = PowerSeries::a_hat_generator(7);
        assert_eq!(s.0[2], Gq::from_frac(-1, 24));
        assert_eq!(s.0[4], Gq::from_frac(7, 5760));
        let l = s.log().unwrap();
        assert_eq!(l.0[2], Gq::from_frac(-1, 24));
        assert!(l.0[1].is_zero() && l.0[3].is_zero());
    }

    #[test]
    fn zero_curvature() {
        let r = CurvatureMatrix::new(FormMatrix::zero(2, 4)).unwrap();
        assert_eq!(a_hat(&r), NilForm::one(4));
        assert_eq!(ch(&r, true), NilForm::one(4));
        assert_eq!(ch(&r, false), NilForm::scalar(4, Gq::from_int(2)));
        assert_eq!(exp_theta(&NilForm::zero(4)).unwrap(), NilForm::one(4));
    }

    #[test]
    fn parity_errors() {
        let odd = FormMatrix::from_matrix(&Matrix::identity(1), &NilForm::generator(2, 0));
        assert!(CurvatureMatrix::new(odd.clone()).is_err());
        assert!(jlo(&FormMatrix::identity(1, 2), &[Matrix::identity(1)]).is_err());
        assert!(exp_theta(&NilForm::generator(2, 0)).is_err());
        assert!(jlo(&odd, &[Matrix::identity(1)]).is_ok());
    }
}
