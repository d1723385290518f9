//! Truncated polynomial jets in the base coordinates of a chart.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::matrix::Matrix;
use crate::multi::{self, Mono};
use crate::scalar::Gq;

/// Polynomial in `vars` base coordinates, truncated at total degree `order`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetPolynomial {
    vars: usize,
    order: usize,
    terms: BTreeMap<Mono, Gq>,
}

impl JetPolynomial {
    pub fn zero(vars: usize, order: usize) -> Self {
        Self { vars, order, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, order: usize, c: Gq) -> Self {
        let mut p = Self::zero(vars, order);
        p.add_term(vec![0; vars], c);
        p
    }

    pub fn one(vars: usize, order: usize) -> Self {
        Self::constant(vars, order, Gq::one())
    }

    /// The coordinate function `x_k` (0-based).
    pub fn coordinate(vars: usize, order: usize, k: usize) -> Self {
        let mut p = Self::zero(vars, order);
        p.add_term(multi::unit(vars, k), Gq::one());
        p
    }

    pub fn monomial(vars: usize, order: usize, alpha: Mono, c: Gq) -> Self {
        let mut p = Self::zero(vars, order);
        p.add_term(alpha, c);
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Mono, Gq> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, alpha: Mono, c: Gq) {
        if multi::degree(&alpha) as usize > self.order || c.is_zero() {
            return;
        }
        let e = self.terms.entry(alpha).or_insert_with(Gq::zero);
        *e += &c;
        if e.is_zero() {
            let key: Vec<Mono> = self.terms.iter().filter(|(_, v)| v.is_zero()).map(|(k, _)| k.clone()).collect();
            for k in key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn coefficient(&self, alpha: &[u8]) -> Gq {
        self.terms.get(alpha).cloned().unwrap_or_else(Gq::zero)
    }

    pub fn value_at_origin(&self) -> Gq {
        self.coefficient(&vec![0; self.vars])
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.order = r.order.min(o.order);
        r.terms.retain(|k, _| multi::degree(k) as usize <= r.order);
        for (k, v) in &o.terms {
            r.add_term(k.clone(), v.clone());
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
        let mut r = Self::zero(self.vars, self.order);
        for (k, v) in &self.terms {
            r.add_term(k.clone(), v * c);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut r = Self::zero(self.vars, order);
        for (k1, a) in &self.terms {
            let d1 = multi::degree(k1) as usize;
            for (k2, b) in &o.terms {
                if d1 + multi::degree(k2) as usize > order {
                    continue;
                }
                r.add_term(multi::add(k1, k2), a * b);
            }
        }
        r
    }

    /// Partial derivative in `x_k`; the result is a jet of order `J - 1`.
    pub fn derivative(&self, k: usize) -> Self {
        let mut r = Self::zero(self.vars, self.order.saturating_sub(1));
        for (alpha, c) in &self.terms {
            if alpha[k] == 0 {
                continue;
            }
            let mut a = alpha.clone();
            a[k] -= 1;
            r.add_term(a, c * &Gq::from_int(alpha[k] as i64));
        }
        r
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut r = self.clone();
        r.order = order.min(self.order);
        r.terms.retain(|k, _| multi::degree(k) as usize <= r.order);
        r
    }

    /// Multiplicative inverse of a jet with invertible constant term.
    pub fn inverse(&self) -> Option<Self> {
        let c0 = self.value_at_origin();
        let c0_inv = c0.inv()?;
        // self = c0 (1 + v), v without constant term
        let v = self.scale(&c0_inv).sub(&Self::one(self.vars, self.order));
        let mut acc = Self::one(self.vars, self.order);
        let mut pow = Self::one(self.vars, self.order);
        for k in 1..=self.order {
            pow = pow.mul(&v);
            if pow.is_zero() {
                break;
            }
            let s = if k % 2 == 1 { -Gq::one() } else { Gq::one() };
            acc = acc.add(&pow.scale(&s));
        }
        Some(acc.scale(&c0_inv))
    }

    /// Lowest total degree with a nonzero coefficient.
    pub fn min_order(&self) -> Option<usize> {
        self.terms.keys().map(|k| multi::degree(k) as usize).min()
    }

    pub fn to_polystring(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (alpha, c) in &self.terms {
            let mut t = format!("({c})");
            for (k, &e) in alpha.iter().enumerate() {
                match e {
                    0 => {}
                    1 => t.push_str(&format!("*x{}", k + 1)),
                    _ => t.push_str(&format!("*x{}^{}", k + 1, e)),
                }
            }
            parts.push(t);
        }
        parts.join(" + ")
    }

    /// Parses a sparse monomial list such as `"1 - 3/2*x1^2*x2 + (1/2+i)*x2"`.
    pub fn parse(s: &str, vars: usize, order: usize) -> Result<Self, String> {
        let mut p = Self::zero(vars, order);
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err("empty polynomial".into());
        }
        // split at top-level signs
        let mut terms = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        for (i, &c) in chars.iter().enumerate() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && i > start && chars[i - 1] != '^' => {
                    terms.push(chars[start..i].iter().collect::<String>());
                    start = i;
                }
                _ => {}
            }
        }
        terms.push(chars[start..].iter().collect::<String>());
        for term in terms {
            let (neg, body) = match term.strip_prefix('-') {
                Some(b) => (true, b.to_string()),
                None => (false, term.strip_prefix('+').unwrap_or(&term).to_string()),
            };
            let mut coef = Gq::one();
            let mut alpha = vec![0u8; vars];
            for factor in split_factors(&body) {
                if let Some(v) = factor.strip_prefix('x') {
                    let (idx, pow) = match v.split_once('^') {
                        Some((a, b)) => (a, b.parse::<u8>().map_err(|_| format!("bad exponent in {factor}"))?),
                        None => (v, 1),
                    };
                    let idx: usize = idx.parse().map_err(|_| format!("bad variable {factor}"))?;
                    if idx == 0 || idx > vars {
                        return Err(format!("variable {factor} out of range"));
                    }
                    alpha[idx - 1] += pow;
                } else {
                    let inner = factor.trim_start_matches('(').trim_end_matches(')');
                    let c: Gq = inner.parse().map_err(|_| format!("bad coefficient {factor}"))?;
                    coef = &coef * &c;
                }
            }
            if neg {
                coef = -coef;
            }
            p.add_term(alpha, coef);
        }
        Ok(p)
    }
}

fn split_factors(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            '*' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Polynomial jet with `N x N` matrix coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetMatrix {
    pub(crate) terms: BTreeMap<Mono, Matrix>,
}

impl JetMatrix {
    pub fn new() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, m: Matrix) -> Self {
        let mut j = Self::new();
        j.add_term(vec![0; vars], m, usize::MAX);
        j
    }

    pub fn from_scalar_jet(p: &JetPolynomial, size: usize) -> Self {
        let mut j = Self::new();
        for (k, c) in p.terms() {
            j.add_term(k.clone(), Matrix::scalar(size, c.clone()), usize::MAX);
        }
        j
    }

    pub fn terms(&self) -> &BTreeMap<Mono, Matrix> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, alpha: Mono, m: Matrix, cap: usize) {
        if multi::degree(&alpha) as usize > cap || m.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(m);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&m);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, o: &JetMatrix, cap: usize) {
        for (k, m) in &o.terms {
            self.add_term(k.clone(), m.clone(), cap);
        }
    }

    pub fn scale(&self, c: &Gq) -> Self {
        let mut r = Self::new();
        for (k, m) in &self.terms {
            r.add_term(k.clone(), m.scale(c), usize::MAX);
        }
        r
    }

    /// Product `self * o * scalar` truncated at total degree `cap`.
    pub fn mul_scaled(&self, o: &JetMatrix, scalar: &JetPolynomial, cap: usize) -> Self {
        let mut r = Self::new();
        for (k1, a) in &self.terms {
            let d1 = multi::degree(k1) as usize;
            if d1 > cap {
                continue;
            }
            for (k2, b) in &o.terms {
                let d12 = d1 + multi::degree(k2) as usize;
                if d12 > cap {
                    continue;
                }
                let ab = a * b;
                if ab.is_zero() {
                    continue;
                }
                let k12 = multi::add(k1, k2);
                for (k3, c) in scalar.terms() {
                    if d12 + multi::degree(k3) as usize > cap {
                        continue;
                    }
                    r.add_term(multi::add(&k12, k3), ab.scale(c), cap);
                }
            }
        }
        r
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut r = Self::new();
        for (alpha, m) in &self.terms {
            if alpha[k] == 0 {
                continue;
            }
            let mut a = alpha.clone();
            a[k] -= 1;
            r.add_term(a, m.scale(&Gq::from_int(alpha[k] as i64)), usize::MAX);
        }
        r
    }

    pub fn truncate(&self, cap: usize) -> Self {
        Self { terms: self.terms.iter().filter(|(k, _)| multi::degree(k) as usize <= cap).map(|(k, m)| (k.clone(), m.clone())).collect() }
    }
}

impl Default for JetMatrix {
    fn default() -> Self {
        Self::new()
    }
}

/// Inverse of a square matrix of jets whose value at the origin is invertible.
pub fn invert_jet_matrix(m: &[Vec<JetPolynomial>]) -> Option<Vec<Vec<JetPolynomial>>> {
    let n = m.len();
    let vars = m[0][0].vars();
    let order = m.iter().flatten().map(|p| p.order()).min()?;
    let mut a: Vec<Vec<JetPolynomial>> = m.to_vec();
    let mut inv: Vec<Vec<JetPolynomial>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { JetPolynomial::one(vars, order) } else { JetPolynomial::zero(vars, order) }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].value_at_origin().is_zero())?;
        a.swap(piv, col);
        inv.swap(piv, col);
        let p = a[col][col].inverse()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul(&p);
            inv[col][j] = inv[col][j].mul(&p);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                a[r][j] = a[r][j].sub(&a[col][j].mul(&f));
                inv[r][j] = inv[r][j].sub(&inv[col][j].mul(&f));
            }
        }
    }
    Some(inv)
}
