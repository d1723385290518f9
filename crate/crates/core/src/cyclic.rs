//! Chain-level cyclic complexes of small differential graded algebras.
//!
//! An algebra is given by structure constants on a basis containing the unit;
//! chains are formal sums of basis words `a_0 ⊗ ... ⊗ a_k`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::Value;

use crate::error::CyclicError;
use crate::matrix::Matrix;
use crate::multi;
use crate::scalar::Gq;
use crate::weyl::{Shape, WeylElement, WeylKey};

/// Sparse linear combination of basis vectors.
pub type Sparse = Vec<(usize, Gq)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    names: Vec<String>,
    unit: usize,
    degrees: Vec<i32>,
    mult: Vec<Vec<Sparse>>,
    diff: Vec<Sparse>,
    hbar: Vec<(i32, usize)>,
}

fn sign(odd: bool) -> Gq {
    if odd {
        -Gq::one()
    } else {
        Gq::one()
    }
}

fn sparse_from_dense(v: &[Gq]) -> Sparse {
    v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect()
}

/// Coordinates of a matrix in the basis `{I} ∪ {E_ab : (a,b) != (N-1,N-1)}`.
fn matrix_coordinates(m: &Matrix) -> Vec<Gq> {
    let n = m.size();
    let c = m.get(n - 1, n - 1).clone();
    let mut out = vec![c.clone()];
    for a in 0..n {
        for b in 0..n {
            if a == n - 1 && b == n - 1 {
                continue;
            }
            let v = if a == b { m.get(a, b) - &c } else { m.get(a, b).clone() };
            out.push(v);
        }
    }
    out
}

/// The basis matrices matching [`matrix_coordinates`].
pub fn matrix_basis(n: usize) -> Vec<Matrix> {
    let mut out = vec![Matrix::identity(n)];
    for a in 0..n {
        for b in 0..n {
            if a == n - 1 && b == n - 1 {
                continue;
            }
            out.push(Matrix::unit(n, a, b));
        }
    }
    out
}

/// A basis of `M_N` whose first element is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixBasis {
    n: usize,
    mats: Vec<Matrix>,
    inv: Matrix,
}

fn flatten(m: &Matrix) -> Vec<Gq> {
    m.rows().into_iter().flatten().collect()
}

fn rank(vectors: &[Vec<Gq>]) -> usize {
    let mut rows: Vec<Vec<Gq>> = vectors.to_vec();
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, piv);
        let inv = rows[r][c].inv().expect("nonzero pivot");
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] * &inv;
                for j in 0..cols {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= &t;
                }
            }
        }
        r += 1;
    }
    r
}

impl MatrixBasis {
    pub fn new(mats: Vec<Matrix>) -> Result<Self, CyclicError> {
        let n = mats.first().map_or(0, Matrix::size);
        if n == 0 || mats.len() != n * n || mats.iter().any(|m| m.size() != n) || mats[0] != Matrix::identity(n) {
            return Err(CyclicError::Malformed("need N^2 matrices starting with the identity".into()));
        }
        let cols: Vec<Vec<Gq>> = mats.iter().map(flatten).collect();
        let t = Matrix::from_rows((0..n * n).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect());
        let inv = t.inverse().ok_or_else(|| CyclicError::Malformed("matrices are linearly dependent".into()))?;
        Ok(Self { n, mats, inv })
    }

    /// `{I} ∪ {E_ab : (a,b) != (N,N)}`.
    pub fn standard(n: usize) -> Self {
        Self::new(matrix_basis(n)).expect("standard basis")
    }

    /// `{I, p, ...}` completed greedily by matrix units.
    pub fn adapted(p: &Matrix) -> Result<Self, CyclicError> {
        let n = p.size();
        let mut mats = vec![Matrix::identity(n)];
        if rank(&[flatten(&mats[0]), flatten(p)]) == 2 {
            mats.push(p.clone());
        }
        for a in 0..n {
            for b in 0..n {
                let e = Matrix::unit(n, a, b);
                let mut v: Vec<Vec<Gq>> = mats.iter().map(flatten).collect();
                v.push(flatten(&e));
                if rank(&v) == v.len() {
                    mats.push(e);
                }
            }
        }
        Self::new(mats)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn coordinates(&self, m: &Matrix) -> Vec<Gq> {
        let v = flatten(m);
        (0..self.n * self.n).map(|i| (0..self.n * self.n).fold(Gq::zero(), |acc, j| &acc + &(self.inv.get(i, j) * &v[j]))).collect()
    }

    pub fn algebra(&self) -> FiniteAlgebra {
        let names = (0..self.mats.len()).map(|i| if i == 0 { "I".to_string() } else { format!("M{i}") }).collect();
        let mult = self.mats.iter().map(|x| self.mats.iter().map(|y| sparse_from_dense(&self.coordinates(&(x * y)))).collect()).collect();
        let d = self.mats.len();
        FiniteAlgebra::new(names, 0, vec![0; d], mult, vec![vec![]; d]).expect("matrix algebra")
    }
}

impl FiniteAlgebra {
    /// Validates associativity, the unit law, and (when present) that the
    /// differential is a square-zero derivation of degree -1.
    pub fn new(
        names: Vec<String>,
        unit: usize,
        degrees: Vec<i32>,
        mult: Vec<Vec<Sparse>>,
        diff: Vec<Sparse>,
    ) -> Result<Self, CyclicError> {
        let d = names.len();
        if unit >= d || degrees.len() != d || mult.len() != d || mult.iter().any(|r| r.len() != d) || diff.len() != d {
            return Err(CyclicError::Malformed("dimension mismatch".into()));
        }
        let hbar = (0..d).map(|i| (0, i)).collect();
        let alg = Self { names, unit, degrees, mult, diff, hbar };
        alg.check()?;
        Ok(alg)
    }

    fn check(&self) -> Result<(), CyclicError> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                for (k, _) in &self.mult[i][j] {
                    if self.degrees[*k] != self.degrees[i] + self.degrees[j] {
                        return Err(CyclicError::Malformed(format!("product e{i} e{j} is not homogeneous")));
                    }
                }
            }
        }
        for i in 0..d {
            let e = self.basis(i);
            if self.mul(&self.unit_element(), &e) != e || self.mul(&e, &self.unit_element()) != e {
                return Err(CyclicError::NotUnital(i));
            }
            for (k, _) in &self.diff[i] {
                if self.degrees[*k] != self.degrees[i] - 1 {
                    return Err(CyclicError::Malformed(format!("differential of e{i} has wrong degree")));
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                let ij = self.mul(&self.basis(i), &self.basis(j));
                for k in 0..d {
                    let l = self.mul(&ij, &self.basis(k));
                    let r = self.mul(&self.basis(i), &self.mul(&self.basis(j), &self.basis(k)));
                    if l != r {
                        return Err(CyclicError::NotAssociative(i, j, k));
                    }
                }
                let lhs = self.differential(&self.mul(&self.basis(i), &self.basis(j)));
                let mut rhs = self.mul(&self.differential(&self.basis(i)), &self.basis(j));
                let t = self.mul(&self.basis(i), &self.differential(&self.basis(j)));
                let s = sign(self.degrees[i] % 2 != 0);
                for (a, b) in rhs.iter_mut().zip(&t) {
                    *a += &(&s * b);
                }
                if lhs != rhs {
                    return Err(CyclicError::NotDerivation(i, j));
                }
            }
            if self.differential(&self.differential(&self.basis(i))).iter().any(|c| !c.is_zero()) {
                return Err(CyclicError::DifferentialNotNilpotent(i));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.degrees[i]
    }

    pub fn is_graded(&self) -> bool {
        self.degrees.iter().any(|&d| d != 0) || self.diff.iter().any(|v| !v.is_empty())
    }

    pub fn basis(&self, i: usize) -> Vec<Gq> {
        let mut v = vec![Gq::zero(); self.dim()];
        v[i] = Gq::one();
        v
    }

    pub fn unit_element(&self) -> Vec<Gq> {
        self.basis(self.unit)
    }

    /// `e_i = hbar^m e_j` as `(m, j)`, with `e_j` free of `hbar`.
    pub fn hbar_split(&self, i: usize) -> (i32, usize) {
        self.hbar[i]
    }

    pub fn mul_basis(&self, i: usize, j: usize) -> &Sparse {
        &self.mult[i][j]
    }

    pub fn diff_basis(&self, i: usize) -> &Sparse {
        &self.diff[i]
    }

    pub fn mul(&self, a: &[Gq], b: &[Gq]) -> Vec<Gq> {
        let mut out = vec![Gq::zero(); self.dim()];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = x * y;
                for (k, c) in &self.mult[i][j] {
                    out[*k] += &(&xy * c);
                }
            }
        }
        out
    }

    pub fn differential(&self, a: &[Gq]) -> Vec<Gq> {
        let mut out = vec![Gq::zero(); self.dim()];
        for (i, x) in a.iter().enumerate() {
            for (k, c) in &self.diff[i] {
                out[*k] += &(x * c);
            }
        }
        out
    }

    /// The ground ring `k`.
    pub fn ground() -> Self {
        Self::new(vec!["1".into()], 0, vec![0], vec![vec![vec![(0, Gq::one())]]], vec![vec![]]).expect("ground ring")
    }

    /// `k[eta]` with `|eta| = 1`, `eta^2 = 0` and `d eta = 1`.
    pub fn eta() -> Self {
        let one = Gq::one();
        Self::new(
            vec!["1".into(), "eta".into()],
            0,
            vec![0, 1],
            vec![vec![vec![(0, one.clone())], vec![(1, one.clone())]], vec![vec![(1, one.clone())], vec![]]],
            vec![vec![], vec![(0, one)]],
        )
        .expect("k[eta]")
    }

    /// `M_N` over the basis `{I} ∪ {E_ab}` with `E_{NN}` omitted.
    pub fn matrices(n: usize) -> Self {
        let basis = matrix_basis(n);
        let names = std::iter::once("I".to_string())
            .chain((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| !(a == n - 1 && b == n - 1)).map(|(a, b)| format!("E{}{}", a + 1, b + 1)))
            .collect::<Vec<_>>();
        let mult = basis
            .iter()
            .map(|x| basis.iter().map(|y| sparse_from_dense(&matrix_coordinates(&(x * y)))).collect())
            .collect();
        let d = basis.len();
        Self::new(names, 0, vec![0; d], mult, vec![vec![]; d]).expect("matrix algebra")
    }

    /// Graded tensor product with Koszul signs.
    pub fn tensor(&self, o: &Self) -> Self {
        let (da, db) = (self.dim(), o.dim());
        let idx = |i: usize, j: usize| i * db + j;
        let mut names = Vec::new();
        let mut degrees = Vec::new();
        for i in 0..da {
            for j in 0..db {
                names.push(if o.dim() == 1 {
                    self.names[i].clone()
                } else if j == o.unit {
                    self.names[i].clone()
                } else if i == self.unit {
                    o.names[j].clone()
                } else {
                    format!("{}*{}", self.names[i], o.names[j])
                });
                degrees.push(self.degrees[i] + o.degrees[j]);
            }
        }
        let mut mult = vec![vec![Vec::new(); da * db]; da * db];
        for (a, x) in (0..da).flat_map(|a| (0..db).map(move |x| (a, x))) {
            for (b, y) in (0..da).flat_map(|b| (0..db).map(move |y| (b, y))) {
                let s = sign((o.degrees[x] * self.degrees[b]) % 2 != 0);
                let mut acc: BTreeMap<usize, Gq> = BTreeMap::new();
                for (k, c) in &self.mult[a][b] {
                    for (l, e) in &o.mult[x][y] {
                        *acc.entry(idx(*k, *l)).or_insert_with(Gq::zero) += &(&(c * e) * &s);
                    }
                }
                mult[idx(a, x)][idx(b, y)] = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            }
        }
        let mut diff = vec![Vec::new(); da * db];
        for a in 0..da {
            for x in 0..db {
                let mut acc: BTreeMap<usize, Gq> = BTreeMap::new();
                for (k, c) in &self.diff[a] {
                    *acc.entry(idx(*k, x)).or_insert_with(Gq::zero) += c;
                }
                let s = sign(self.degrees[a] % 2 != 0);
                for (l, e) in &o.diff[x] {
                    *acc.entry(idx(a, *l)).or_insert_with(Gq::zero) += &(&s * e);
                }
                diff[idx(a, x)] = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            }
        }
        let mut out = Self::new(names, idx(self.unit, o.unit), degrees, mult, diff).expect("tensor product of valid algebras");
        for i in 0..da {
            for j in 0..db {
                let (ma, ba) = self.hbar[i];
                let (mb, bb) = o.hbar[j];
                out.hbar[idx(i, j)] = (ma + mb, idx(ba, bb));
            }
        }
        out
    }

    pub fn adjoin_eta(&self) -> Self {
        self.tensor(&Self::eta())
    }

    /// `M_N(A^hbar)` modulo terms of Fedosov degree above `shape.degree`.
    pub fn truncated_weyl(shape: Shape) -> Self {
        let keys: Vec<WeylKey> = (0..=shape.degree / 2)
            .flat_map(|m| multi::up_to_degree(shape.vars(), (shape.degree - 2 * m) as u32).into_iter().map(move |b| WeylKey::new(b, m)))
            .collect();
        let mats = matrix_basis(shape.size);
        let dm = mats.len();
        let mut names = Vec::new();
        for k in &keys {
            for (mi, _) in mats.iter().enumerate() {
                let mono = describe_monomial(shape.n, &k.beta, k.m);
                names.push(if shape.size == 1 || mi == 0 { mono } else { format!("{mono}*{}", matrix_name(shape.size, mi)) });
            }
        }
        let position: BTreeMap<WeylKey, usize> = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let elems: Vec<WeylElement> = keys
            .iter()
            .flat_map(|k| mats.iter().map(move |m| WeylElement::monomial(shape, k.beta.clone(), k.m, m.clone())))
            .collect();
        let mult = elems
            .iter()
            .map(|x| {
                elems
                    .iter()
                    .map(|y| {
                        let p = x.star(y).expect("nonnegative hbar powers");
                        let mut out = Vec::new();
                        for (k, m) in p.terms() {
                            let base = position[k] * dm;
                            for (j, c) in matrix_coordinates(m).into_iter().enumerate() {
                                if !c.is_zero() {
                                    out.push((base + j, c));
                                }
                            }
                        }
                        out.sort_by_key(|(i, _)| *i);
                        out
                    })
                    .collect()
            })
            .collect();
        let d = elems.len();
        let mut out = Self::new(names, 0, vec![0; d], mult, vec![vec![]; d]).expect("truncated Weyl algebra");
        for (ki, k) in keys.iter().enumerate() {
            let free = position[&WeylKey::new(k.beta.clone(), 0)];
            for j in 0..dm {
                out.hbar[ki * dm + j] = (k.m, free * dm + j);
            }
        }
        out
    }

    /// Basis index of `yhat^beta hbar^m` (identity matrix part) in
    /// [`FiniteAlgebra::truncated_weyl`], when it is not truncated away.
    pub fn weyl_index(shape: Shape, beta: &[u8], m: i32) -> Option<usize> {
        let key = WeylKey::new(beta.to_vec(), m);
        let keys: Vec<WeylKey> = (0..=shape.degree / 2)
            .flat_map(|mm| multi::up_to_degree(shape.vars(), (shape.degree - 2 * mm) as u32).into_iter().map(move |b| WeylKey::new(b, mm)))
            .collect();
        let dm = matrix_basis(shape.size).len();
        keys.iter().position(|k| *k == key).map(|p| p * dm)
    }

    pub fn from_json(v: &Value) -> Result<Self, CyclicError> {
        let bad = |s: &str| CyclicError::Malformed(s.to_string());
        let names: Vec<String> = v
            .get("basis")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing basis"))?
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or_else(|| bad("basis names must be strings")))
            .collect::<Result<_, _>>()?;
        let d = names.len();
        let unit = v.get("unit").and_then(Value::as_u64).ok_or_else(|| bad("missing unit"))? as usize;
        let degrees = match v.get("degrees") {
            Some(x) => x.as_array().ok_or_else(|| bad("degrees"))?.iter().map(|e| e.as_i64().map(|z| z as i32).ok_or_else(|| bad("degree"))).collect::<Result<_, _>>()?,
            None => vec![0; d],
        };
        let sparse = |x: &Value| -> Result<Sparse, CyclicError> {
            x.as_array()
                .ok_or_else(|| bad("result must be a list"))?
                .iter()
                .map(|p| {
                    let k = p.get(0).and_then(Value::as_u64).ok_or_else(|| bad("index"))? as usize;
                    let c: Gq = match p.get(1) {
                        Some(Value::String(s)) => s.parse().map_err(|_| bad("coefficient"))?,
                        Some(Value::Number(n)) => n.to_string().parse().map_err(|_| bad("coefficient"))?,
                        _ => return Err(bad("coefficient")),
                    };
                    if k >= d {
                        return Err(bad("index out of range"));
                    }
                    Ok((k, c))
                })
                .collect()
        };
        let mut mult = vec![vec![Vec::new(); d]; d];
        for p in v.get("products").and_then(Value::as_array).ok_or_else(|| bad("missing products"))? {
            let i = p.get("i").and_then(Value::as_u64).ok_or_else(|| bad("i"))? as usize;
            let j = p.get("j").and_then(Value::as_u64).ok_or_else(|| bad("j"))? as usize;
            if i >= d || j >= d {
                return Err(bad("index out of range"));
            }
            mult[i][j] = sparse(p.get("result").ok_or_else(|| bad("result"))?)?;
        }
        let mut diff = vec![Vec::new(); d];
        if let Some(list) = v.get("differential").and_then(Value::as_array) {
            for p in list {
                let i = p.get("i").and_then(Value::as_u64).ok_or_else(|| bad("i"))? as usize;
                if i >= d {
                    return Err(bad("index out of range"));
                }
                diff[i] = sparse(p.get("result").ok_or_else(|| bad("result"))?)?;
            }
        }
        Self::new(names, unit, degrees, mult, diff)
    }

    pub fn to_json(&self) -> Value {
        let sp = |s: &Sparse| -> Value { s.iter().map(|(k, c)| serde_json::json!([k, c.to_string()])).collect() };
        let mut products = Vec::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if !self.mult[i][j].is_empty() {
                    products.push(serde_json::json!({"i": i, "j": j, "result": sp(&self.mult[i][j])}));
                }
            }
        }
        let differential: Vec<Value> =
            (0..self.dim()).filter(|&i| !self.diff[i].is_empty()).map(|i| serde_json::json!({"i": i, "result": sp(&self.diff[i])})).collect();
        serde_json::json!({
            "basis": self.names,
            "unit": self.unit,
            "degrees": self.degrees,
            "products": products,
            "differential": differential,
        })
    }
}

fn describe_monomial(n: usize, beta: &[u8], m: i32) -> String {
    let mut parts = Vec::new();
    if m > 0 {
        parts.push(if m == 1 { "h".to_string() } else { format!("h^{m}") });
    }
    for (k, &e) in beta.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let v = if k < n { format!("x{}", k + 1) } else { format!("p{}", k - n + 1) };
        parts.push(if e == 1 { v } else { format!("{v}^{e}") });
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn matrix_name(n: usize, idx: usize) -> String {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| !(a == n - 1 && b == n - 1)).collect();
    let (a, b) = pairs[idx - 1];
    format!("E{}{}", a + 1, b + 1)
}

/// Which positions are taken modulo the unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reduction {
    None,
    /// Positions `>= 1` (the normalized and periodic complexes).
    Normalized,
    /// Every position (the reduced complex built on `A/k·1`).
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorChain {
    reduction: Reduction,
    unit: usize,
    terms: BTreeMap<Vec<usize>, Gq>,
}

impl TensorChain {
    pub fn zero(alg: &FiniteAlgebra, reduction: Reduction) -> Self {
        Self { reduction, unit: alg.unit, terms: BTreeMap::new() }
    }

    pub fn word(alg: &FiniteAlgebra, reduction: Reduction, word: Vec<usize>, c: Gq) -> Self {
        let mut t = Self::zero(alg, reduction);
        t.add_term(word, c);
        t
    }

    /// Multilinear expansion of `a_0 ⊗ ... ⊗ a_k` for algebra elements.
    pub fn from_elements(alg: &FiniteAlgebra, reduction: Reduction, elems: &[Vec<Gq>]) -> Self {
        let mut t = Self::zero(alg, reduction);
        let mut partial: Vec<(Vec<usize>, Gq)> = vec![(Vec::new(), Gq::one())];
        for e in elems {
            let mut next = Vec::new();
            for (w, c) in &partial {
                for (i, x) in e.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let mut w2 = w.clone();
                    w2.push(i);
                    next.push((w2, c * x));
                }
            }
            partial = next;
        }
        for (w, c) in partial {
            t.add_term(w, c);
        }
        t
    }

    pub fn reduction(&self) -> Reduction {
        self.reduction
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Gq> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn killed(&self, w: &[usize]) -> bool {
        match self.reduction {
            Reduction::None => false,
            Reduction::Normalized => w.iter().skip(1).any(|&i| i == self.unit),
            Reduction::Reduced => w.iter().any(|&i| i == self.unit),
        }
    }

    pub fn add_term(&mut self, w: Vec<usize>, c: Gq) {
        if c.is_zero() || self.killed(&w) {
            return;
        }
        let e = self.terms.entry(w).or_insert_with(Gq::zero);
        *e += &c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn with_reduction(&self, reduction: Reduction) -> Self {
        let mut t = Self { reduction, unit: self.unit, terms: BTreeMap::new() };
        for (w, c) in &self.terms {
            t.add_term(w.clone(), c.clone());
        }
        t
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(w.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Gq::one()))
    }

    pub fn scale(&self, c: &Gq) -> Self {
        let mut r = Self { reduction: self.reduction, unit: self.unit, terms: BTreeMap::new() };
        for (w, v) in &self.terms {
            r.add_term(w.clone(), v * c);
        }
        r
    }

    pub fn filter(&self, keep: impl Fn(&[usize]) -> bool) -> Self {
        Self { reduction: self.reduction, unit: self.unit, terms: self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, c)| (w.clone(), c.clone())).collect() }
    }

    /// Part made of words with `len` tensor factors.
    pub fn length_part(&self, len: usize) -> Self {
        self.filter(|w| w.len() == len)
    }

    pub fn max_length(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_json(&self, alg: &FiniteAlgebra) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(w, c)| serde_json::json!({"word": w.iter().map(|&i| alg.names[i].clone()).collect::<Vec<_>>(), "coefficient": c.to_string()}))
            .collect();
        serde_json::json!({"reduction": format!("{:?}", self.reduction), "terms": terms})
    }
}

/// Degree `k + sum |a_i|` of a word `a_0 ⊗ ... ⊗ a_k`.
pub fn word_degree(alg: &FiniteAlgebra, w: &[usize]) -> i32 {
    w.len() as i32 - 1 + w.iter().map(|&i| alg.degrees[i]).sum::<i32>()
}

fn shifted(alg: &FiniteAlgebra, i: usize) -> i32 {
    alg.degrees[i] + 1
}

/// Sign convention for the algebra differential on chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaSign {
    /// `(-1)^{sum_{i=1}^{k-1}(|a_i|+1)}` as printed.
    Printed,
    /// `-(-1)^{sum_{i=0}^{k-1}(|a_i|+1)}`: the Koszul sign of moving the odd
    /// operator past `a_0 ⊗ ... ⊗ a_{k-1}` in shifted degrees, with the
    /// overall sign fixed so that the Brodzki map is a chain map.
    Koszul,
}

/// Sign convention for Connes' operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BSign {
    /// `(-1)^{(sum_{j<=i}(|a_j|+1))(sum_{j>=i+1}(|a_j|+1))}` with the word
    /// `1 ⊗ a_i ⊗ ... ⊗ a_{i-1}` as printed.
    Printed,
    /// The rotation sign `(-1)^{(sum_{j<i}(|a_j|+1))(sum_{j>=i}(|a_j|+1))}`
    /// for the same word.
    Rotation,
}

pub fn hochschild_b(alg: &FiniteAlgebra, c: &TensorChain) -> TensorChain {
    let mut out = TensorChain::zero(alg, c.reduction);
    for (w, coef) in &c.terms {
        let n = w.len() - 1;
        if n == 0 {
            continue;
        }
        let mut deg_prefix = 0;
        for k in 0..n {
            deg_prefix += alg.degrees[w[k]];
            let s = sign((k as i32 + deg_prefix) % 2 != 0);
            for (p, pc) in &alg.mult[w[k]][w[k + 1]] {
                let mut nw = Vec::with_capacity(n);
                nw.extend_from_slice(&w[..k]);
                nw.push(*p);
                nw.extend_from_slice(&w[k + 2..]);
                out.add_term(nw, &(coef * pc) * &s);
            }
        }
        let rest: i32 = w[..n].iter().map(|&i| shifted(alg, i)).sum();
        let an = w[n];
        let s = sign((shifted(alg, an) * rest + alg.degrees[an]) % 2 != 0);
        for (p, pc) in &alg.mult[an][w[0]] {
            let mut nw = Vec::with_capacity(n);
            nw.push(*p);
            nw.extend_from_slice(&w[1..n]);
            out.add_term(nw, &(coef * pc) * &s);
        }
    }
    out
}

pub fn cyclic_tau(alg: &FiniteAlgebra, c: &TensorChain) -> TensorChain {
    let mut out = TensorChain::zero(alg, c.reduction);
    for (w, coef) in &c.terms {
        let n = w.len() - 1;
        let rest: i32 = w[..n].iter().map(|&i| shifted(alg, i)).sum();
        let s = sign((shifted(alg, w[n]) * rest) % 2 != 0);
        let mut nw = Vec::with_capacity(n + 1);
        nw.push(w[n]);
        nw.extend_from_slice(&w[..n]);
        out.add_term(nw, coef * &s);
    }
    out
}

pub fn alg_delta_with(alg: &FiniteAlgebra, c: &TensorChain, convention: DeltaSign) -> TensorChain {
    let mut out = TensorChain::zero(alg, c.reduction);
    for (w, coef) in &c.terms {
        for k in 0..w.len() {
            let from = if convention == DeltaSign::Koszul { 0 } else { 1 };
            let mut e: i32 = w[from.min(k)..k].iter().map(|&i| shifted(alg, i)).sum();
            if convention == DeltaSign::Koszul {
                e += 1;
            }
            let s = sign(e % 2 != 0);
            for (p, pc) in &alg.diff[w[k]] {
                let mut nw = w.clone();
                nw[k] = *p;
                out.add_term(nw, &(coef * pc) * &s);
            }
        }
    }
    out
}

pub fn alg_delta(alg: &FiniteAlgebra, c: &TensorChain) -> TensorChain {
    alg_delta_with(alg, c, DeltaSign::Koszul)
}

pub fn connes_b_with(alg: &FiniteAlgebra, c: &TensorChain, convention: BSign) -> TensorChain {
    let mut out = TensorChain::zero(alg, c.reduction);
    for (w, coef) in &c.terms {
        let len = w.len();
        let total: i32 = w.iter().map(|&i| shifted(alg, i)).sum();
        let mut before = 0;
        for i in 0..len {
            let (a, b) = match convention {
                BSign::Rotation => (before, total - before),
                BSign::Printed => (before + shifted(alg, w[i]), total - before - shifted(alg, w[i])),
            };
            before += shifted(alg, w[i]);
            let s = sign((a * b) % 2 != 0);
            let mut nw = Vec::with_capacity(len + 1);
            nw.push(alg.unit);
            nw.extend_from_slice(&w[i..]);
            nw.extend_from_slice(&w[..i]);
            out.add_term(nw, coef * &s);
        }
    }
    out
}

pub fn connes_b(alg: &FiniteAlgebra, c: &TensorChain) -> TensorChain {
    connes_b_with(alg, c, BSign::Rotation)
}

/// Whether `c` lies in the image of `1 - tau`.
pub fn is_zero_mod_tau(alg: &FiniteAlgebra, c: &TensorChain) -> bool {
    // tau^{len} = ±1 on words of length len, so averaging over 2 len powers
    // projects onto the invariants along Im(1 - tau)
    let mut acc = TensorChain::zero(alg, c.reduction);
    let mut lens: Vec<usize> = c.terms.keys().map(Vec::len).collect();
    lens.dedup();
    for len in lens {
        let mut cur = c.length_part(len);
        for _ in 0..2 * len {
            acc = acc.add(&cur);
            cur = cyclic_tau(alg, &cur);
        }
    }
    acc.is_zero()
}

/// `sum_k hbar^k c_k` with each `c_k` free of `hbar`, i.e. a chain over the
/// ground ring `k[hbar, hbar^{-1}]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentChain {
    parts: BTreeMap<i32, TensorChain>,
}

impl LaurentChain {
    /// `hbar^shift · chain`, brought to normal form.
    pub fn new(alg: &FiniteAlgebra, shift: i32, chain: TensorChain) -> Self {
        let mut parts: BTreeMap<i32, TensorChain> = BTreeMap::new();
        for (w, c) in &chain.terms {
            let mut m = shift;
            let free: Vec<usize> = w
                .iter()
                .map(|&i| {
                    let (k, j) = alg.hbar[i];
                    m += k;
                    j
                })
                .collect();
            let part = parts.entry(m).or_insert_with(|| TensorChain::zero(alg, chain.reduction));
            part.add_term(free, c.clone());
        }
        parts.retain(|_, c| !c.is_zero());
        Self { parts }
    }

    pub fn parts(&self) -> &BTreeMap<i32, TensorChain> {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn lowest_power(&self) -> Option<i32> {
        self.parts.keys().next().copied()
    }

    /// Applies a `k`-linear chain operator and renormalizes.
    pub fn map(&self, alg: &FiniteAlgebra, f: impl Fn(&TensorChain) -> TensorChain) -> Self {
        let mut out = Self { parts: BTreeMap::new() };
        for (m, c) in &self.parts {
            for (k, v) in Self::new(alg, *m, f(c)).parts {
                let e = out.parts.entry(k).or_insert_with(|| TensorChain::zero(alg, v.reduction));
                *e = e.add(&v);
            }
        }
        out.parts.retain(|_, c| !c.is_zero());
        out
    }

    pub fn is_zero_mod_tau(&self, alg: &FiniteAlgebra) -> bool {
        self.parts.values().all(|c| is_zero_mod_tau(alg, c))
    }
}

/// Fundamental cycle of the Weyl algebra in `2n` generators, in the reduced
/// complex over `truncated_weyl(shape)` with `shape.size = 1`. The prefactor
/// `1/(2n (i hbar)^n)` is split into a scalar and `hbar^{-n}`.
pub fn fundamental_class(shape: Shape, signed: bool) -> Result<(FiniteAlgebra, LaurentChain), CyclicError> {
    if shape.size != 1 || shape.degree < 2 {
        return Err(CyclicError::Malformed("fundamental class needs N = 1 and degree >= 2".into()));
    }
    let n = shape.n;
    let alg = FiniteAlgebra::truncated_weyl(shape);
    // v = (x1, xi1, x2, xi2, ...)
    let gens: Vec<usize> = (0..n)
        .flat_map(|j| [j, n + j])
        .map(|k| FiniteAlgebra::weyl_index(shape, &multi::unit(2 * n, k), 0).expect("generators survive truncation"))
        .collect();
    let prefactor = {
        let i_pow = Gq::i_pow(n as i64).inv().expect("nonzero");
        i_pow.scale_rational(&num_rational::BigRational::new(1.into(), (2 * n as i64).into()))
    };
    let mut chain = TensorChain::zero(&alg, Reduction::Reduced);
    for (perm, odd) in permutations(2 * n) {
        let s = if signed { sign(odd) } else { Gq::one() };
        chain.add_term(perm.iter().map(|&p| gens[p]).collect(), &prefactor * &s);
    }
    let u0 = LaurentChain::new(&alg, -(n as i32), chain);
    Ok((alg, u0))
}

/// All permutations of `0..k` with their parity.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, bool)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, bool)>) {
        if cur.len() == used.len() {
            let mut inv = 0;
            for i in 0..cur.len() {
                for j in (i + 1)..cur.len() {
                    if cur[i] > cur[j] {
                        inv += 1;
                    }
                }
            }
            out.push((cur.clone(), inv % 2 == 1));
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// How the `rho` blocks of the Brodzki map are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BrodzkiBlocks {
    /// Any decomposition into consecutive blocks of one or two factors.
    Any,
    /// Exactly `n + 1` blocks on chains of degree `2n + 1`.
    Exact,
}

/// Brodzki's map to the cyclic complex of the ground ring. The image of a
/// degree `2n + 1` chain is `c · 1^{⊗(2n+1)}`, returned as the map
/// `2n + 1 -> c`; even-degree words contribute nothing.
pub fn brodzki(alg: &FiniteAlgebra, l: &[Gq], c: &TensorChain, blocks: BrodzkiBlocks) -> Result<BTreeMap<usize, Gq>, CyclicError> {
    if l.len() != alg.dim() {
        return Err(CyclicError::Malformed("functional has wrong length".into()));
    }
    if !l[alg.unit].is_one() {
        return Err(CyclicError::NonUnitalFunctional(l[alg.unit].to_string()));
    }
    let lin = |v: &[Gq]| -> Gq { v.iter().zip(l).fold(Gq::zero(), |acc, (a, b)| acc + a * b) };
    let rho1: Vec<Gq> = (0..alg.dim()).map(|i| lin(&alg.differential(&alg.basis(i)))).collect();
    let mut out: BTreeMap<usize, Gq> = BTreeMap::new();
    for (w, coef) in &c.terms {
        let deg = word_degree(alg, w);
        if deg < 1 || deg % 2 == 0 {
            continue;
        }
        let n = ((deg - 1) / 2) as usize;
        let total: i32 = w.iter().map(|&i| shifted(alg, i)).sum();
        let mut before = 0;
        let mut sum = Gq::zero();
        for i in 0..w.len() {
            let s = sign((before * (total - before)) % 2 != 0);
            before += shifted(alg, w[i]);
            let mut rot = Vec::with_capacity(w.len());
            rot.extend_from_slice(&w[i..]);
            rot.extend_from_slice(&w[..i]);
            let v = rho_blocks(alg, &rot, &rho1, l, match blocks {
                BrodzkiBlocks::Any => None,
                BrodzkiBlocks::Exact => Some(n + 1),
            });
            sum += &(&s * &v);
        }
        let fact = Gq::from_int(multi::factorial(n as u32 + 1) as i64);
        *out.entry(2 * n + 1).or_insert_with(Gq::zero) += &(&(coef * &sum) * &fact);
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

fn rho_blocks(alg: &FiniteAlgebra, w: &[usize], rho1: &[Gq], l: &[Gq], count: Option<usize>) -> Gq {
    // dp over prefix length and number of blocks
    let len = w.len();
    let mut dp: Vec<BTreeMap<usize, Gq>> = vec![BTreeMap::new(); len + 1];
    dp[0].insert(0, Gq::one());
    for p in 0..len {
        let cur = dp[p].clone();
        for (blocks, v) in cur {
            if v.is_zero() {
                continue;
            }
            let r1 = &rho1[w[p]];
            if !r1.is_zero() {
                *dp[p + 1].entry(blocks + 1).or_insert_with(Gq::zero) += &(&v * r1);
            }
            if p + 1 < len {
                let (a, b) = (w[p], w[p + 1]);
                let prod = alg.mult[a][b].iter().fold(Gq::zero(), |acc, (k, c)| acc + c * &l[*k]);
                let r2 = &(&l[a] * &l[b]) - &prod;
                if !r2.is_zero() {
                    *dp[p + 2].entry(blocks + 1).or_insert_with(Gq::zero) += &(&v * &r2);
                }
            }
        }
    }
    match count {
        Some(k) => dp[len].get(&k).cloned().unwrap_or_else(Gq::zero),
        None => dp[len].values().fold(Gq::zero(), |a, b| &a + b),
    }
}

/// Minimal ring interface used by [`pair_a_component`].
pub trait RingOps<T> {
    fn zero(&self) -> T;
    fn add(&self, a: &T, b: &T) -> T;
    fn sub(&self, a: &T, b: &T) -> T;
    fn mul(&self, a: &T, b: &T) -> T;
    fn scale(&self, a: &T, c: &Gq) -> T;
}

impl RingOps<Vec<Gq>> for FiniteAlgebra {
    fn zero(&self) -> Vec<Gq> {
        vec![Gq::zero(); self.dim()]
    }
    fn add(&self, a: &Vec<Gq>, b: &Vec<Gq>) -> Vec<Gq> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn sub(&self, a: &Vec<Gq>, b: &Vec<Gq>) -> Vec<Gq> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }
    fn mul(&self, a: &Vec<Gq>, b: &Vec<Gq>) -> Vec<Gq> {
        FiniteAlgebra::mul(self, a, b)
    }
    fn scale(&self, a: &Vec<Gq>, c: &Gq) -> Vec<Gq> {
        a.iter().map(|x| x * c).collect()
    }
}

/// Star-product ring on Weyl elements of a fixed shape.
pub struct WeylRing(pub Shape);

impl RingOps<WeylElement> for WeylRing {
    fn zero(&self) -> WeylElement {
        WeylElement::zero(self.0)
    }
    fn add(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        a.add(b).expect("same shape")
    }
    fn sub(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        a.sub(b).expect("same shape")
    }
    fn mul(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        a.star(b).expect("algebra elements")
    }
    fn scale(&self, a: &WeylElement, c: &Gq) -> WeylElement {
        a.scale(c)
    }
}

/// The `A`-component of `(b_1 ⊗ ... ⊗ b_n) · (a_0 ⊗ ... ⊗ a_m)`:
/// `sum_i (1/n!) (-1)^{i(n-1)} a_0 [b_{i+1}, a_1] ... [b_i, a_n]`, zero when
/// `m != n`.
pub fn pair_a_component<T: Clone, R: RingOps<T>>(ring: &R, b: &[T], a: &[T]) -> T {
    let n = b.len();
    if a.is_empty() || a.len() - 1 != n {
        return ring.zero();
    }
    let inv_fact = Gq::from_frac(1, multi::factorial(n as u32) as i64);
    let mut total = ring.zero();
    for i in 0..n {
        let mut term = a[0].clone();
        for j in 1..=n {
            let bj = &b[(i + j - 1) % n];
            let comm = ring.sub(&ring.mul(bj, &a[j]), &ring.mul(&a[j], bj));
            term = ring.mul(&term, &comm);
        }
        let s = sign((i * (n - 1)) % 2 == 1);
        total = ring.add(&total, &ring.scale(&term, &(&s * &inv_fact)));
    }
    total
}

/// Default tensor-length cutoff for periodic chains over `M_N`.
pub fn default_cutoff(matrix_size: usize) -> usize {
    2 * matrix_size + 3
}

/// `ch(p) = p + sum_{k=1}^{K} (-1)^k (2k)!/k! (p - 1/2) ⊗ p^{⊗2k}` in the
/// normalized complex, with `2K + 1 <= max_length`.
pub fn chern_character(alg: &FiniteAlgebra, p: &[Gq], max_length: usize) -> Result<TensorChain, CyclicError> {
    let p2 = alg.mul(p, p);
    let resid = p2.iter().zip(p).filter(|(a, b)| a != b).count();
    if resid != 0 {
        return Err(CyclicError::NotIdempotent(resid));
    }
    let mut out = TensorChain::from_elements(alg, Reduction::Normalized, &[p.to_vec()]);
    let half = Gq::from_frac(1, 2);
    let mut p_half = p.to_vec();
    p_half[alg.unit] -= &half;
    let mut k = 1;
    while 2 * k + 1 <= max_length {
        let mut elems = vec![p_half.clone()];
        elems.extend(std::iter::repeat(p.to_vec()).take(2 * k));
        let coef = Gq::from_int((multi::factorial(2 * k as u32) / multi::factorial(k as u32)) as i64) * sign(k % 2 == 1);
        out = out.add(&TensorChain::from_elements(alg, Reduction::Normalized, &elems).scale(&coef));
        k += 1;
    }
    Ok(out)
}

/// `M_N(A)` realized as `M_N ⊗ A`, with the componentwise trace map back to `A`.
#[derive(Clone, Debug)]
pub struct MatrixOver {
    pub n: usize,
    pub base: FiniteAlgebra,
    pub algebra: FiniteAlgebra,
    basis: MatrixBasis,
}

impl MatrixOver {
    pub fn new(n: usize, base: &FiniteAlgebra) -> Self {
        Self::with_basis(MatrixBasis::standard(n), base)
    }

    pub fn with_basis(basis: MatrixBasis, base: &FiniteAlgebra) -> Self {
        let algebra = if basis == MatrixBasis::standard(basis.n) { FiniteAlgebra::matrices(basis.n) } else { basis.algebra() }.tensor(base);
        Self { n: basis.n, base: base.clone(), algebra, basis }
    }

    /// `(M_1 ⊗ a_1) ⊗ ... ⊗ (M_k ⊗ a_k) -> tr(M_1 ... M_k) a_1 ⊗ ... ⊗ a_k`,
    /// with `tr(1) = 1` when `normalized`.
    pub fn trace_map(&self, c: &TensorChain, normalized: bool) -> TensorChain {
        let db = self.base.dim();
        let mut out = TensorChain::zero(&self.base, c.reduction);
        let scale = if normalized { Gq::from_frac(1, self.n as i64) } else { Gq::one() };
        for (w, coef) in &c.terms {
            let mut prod = Matrix::identity(self.n);
            let mut bw = Vec::with_capacity(w.len());
            for &i in w {
                prod = &prod * &self.basis.mats[i / db];
                bw.push(i % db);
            }
            let t = prod.trace();
            if t.is_zero() {
                continue;
            }
            out.add_term(bw, &(coef * &t) * &scale);
        }
        out
    }

    /// `tr ch(p)` for an idempotent `p` of `M_N(A)`.
    pub fn chern_character(&self, p: &[Gq], max_length: usize, normalized: bool) -> Result<TensorChain, CyclicError> {
        Ok(self.trace_map(&chern_character(&self.algebra, p, max_length)?, normalized))
    }

    /// Element `M ⊗ a` of the matrix algebra.
    pub fn element(&self, m: &Matrix, a: &[Gq]) -> Vec<Gq> {
        let coords = self.basis.coordinates(m);
        let db = self.base.dim();
        let mut out = vec![Gq::zero(); self.algebra.dim()];
        for (i, x) in coords.iter().enumerate() {
            for (j, y) in a.iter().enumerate() {
                out[i * db + j] = x * y;
            }
        }
        out
    }
}
