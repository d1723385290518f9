//! Grid realization of the trace and of the pairing with the fundamental
//! class on one Darboux chart of `R^2`, with spectral derivatives on a
//! periodified box.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde_json::Value;

use crate::error::GridError;

/// Fraction of the half-width inside which symbols may be supported.
pub const DEFAULT_MARGIN: f64 = 0.8;
/// Largest admissible value outside the margin, relative to the sup norm.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Box half-width `L`; the grid covers `[-L, L)^2`.
    pub half_width: f64,
    /// Points per axis `G`.
    pub points: usize,
    /// Highest hbar order `K`.
    pub order: usize,
    /// Matrix size `N`.
    pub size: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize, order: usize, size: usize) -> Result<Self, GridError> {
        if points < 4 || points % 2 != 0 || size == 0 || half_width <= 0.0 {
            return Err(GridError::Shape(format!("invalid grid L={half_width} G={points} N={size}")));
        }
        Ok(Self { half_width, points, order, size })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_width * self.half_width
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + self.spacing() * i as f64
    }

    fn cells(&self) -> usize {
        self.points * self.points * self.size * self.size
    }
}

/// A Gaussian bump `matrix · exp(-|z - center|^2 / width^2)` at one hbar order.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub center: (f64, f64),
    pub width: f64,
    pub matrix: Vec<Complex64>,
    pub hbar_order: usize,
}

/// `(a, b) -> ∂_x^a ∂_xi^b` of one symbol.
pub type Derivatives = BTreeMap<(usize, usize), GridSymbol>;

/// `sum_m hbar^m a_m(x, xi)` with `N x N` complex matrix values on the grid.
/// Layout of `a_m`: `[(i * G + j) * N^2 + (r * N + c)]` for `x_i`, `xi_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSymbol {
    spec: GridSpec,
    coeffs: Vec<Vec<Complex64>>,
}

fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

fn matmul(a: &[Complex64], b: &[Complex64], n: usize, out: &mut [Complex64]) {
    for r in 0..n {
        for c in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += a[r * n + k] * b[k * n + c];
            }
            out[r * n + c] = s;
        }
    }
}

/// Largest singular value of a small complex matrix.
pub fn operator_norm(a: &[Complex64], n: usize) -> f64 {
    if n == 1 {
        return a[0].norm();
    }
    if n == 2 {
        let frob: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let det = (a[0] * a[3] - a[1] * a[2]).norm_sqr();
        return ((frob + (frob * frob - 4.0 * det).max(0.0).sqrt()) / 2.0).sqrt();
    }
    // power iteration on A^* A from a fixed start
    let mut v: Vec<Complex64> = (0..n).map(|k| Complex64::new(1.0 + k as f64 * 0.1, 0.0)).collect();
    let mut lambda = 0.0;
    for _ in 0..200 {
        let av: Vec<Complex64> = (0..n).map(|r| (0..n).map(|c| a[r * n + c] * v[c]).sum()).collect();
        let w: Vec<Complex64> = (0..n).map(|c| (0..n).map(|r| a[r * n + c].conj() * av[r]).sum()).collect();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let done = (norm - lambda).abs() <= 1e-15 * norm;
        lambda = norm;
        v = w.into_iter().map(|z| z / norm).collect();
        if done {
            break;
        }
    }
    lambda.sqrt()
}

struct Fft2 {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    g: usize,
}

impl Fft2 {
    fn new(g: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(g), inverse: planner.plan_fft_inverse(g), g }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let g = self.g;
        let plan = if inverse { &self.inverse } else { &self.forward };
        plan.process(data);
        let mut col = zeros(g);
        for j in 0..g {
            for i in 0..g {
                col[i] = data[i * g + j];
            }
            plan.process(&mut col);
            for i in 0..g {
                data[i * g + j] = col[i];
            }
        }
        if inverse {
            let s = 1.0 / (g * g) as f64;
            data.iter_mut().for_each(|z| *z *= s);
        }
    }
}

fn wavenumber(m: usize, g: usize, half_width: f64, power: usize) -> Complex64 {
    if power == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if m == g / 2 && power % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let f = if m <= g / 2 { m as f64 } else { m as f64 - g as f64 };
    let k = std::f64::consts::PI * f / half_width;
    Complex64::new(0.0, k).powu(power as u32)
}

impl GridSymbol {
    pub fn zero(spec: GridSpec) -> Self {
        Self { spec, coeffs: (0..=spec.order).map(|_| zeros(spec.cells())).collect() }
    }

    /// Samples `f(order, x, xi)`, which returns a row-major `N x N` matrix.
    pub fn from_fn(spec: GridSpec, f: impl Fn(usize, f64, f64) -> Vec<Complex64>) -> Self {
        let nn = spec.size * spec.size;
        let mut out = Self::zero(spec);
        for m in 0..=spec.order {
            for i in 0..spec.points {
                for j in 0..spec.points {
                    let v = f(m, spec.coordinate(i), spec.coordinate(j));
                    assert_eq!(v.len(), nn, "matrix size");
                    out.coeffs[m][(i * spec.points + j) * nn..][..nn].copy_from_slice(&v);
                }
            }
        }
        out
    }

    pub fn from_bumps(spec: GridSpec, bumps: &[Bump]) -> Result<Self, GridError> {
        let nn = spec.size * spec.size;
        for b in bumps {
            if b.matrix.len() != nn || b.hbar_order > spec.order || b.width <= 0.0 {
                return Err(GridError::Shape("bump matrix size, width or hbar order".into()));
            }
        }
        let s = Self::from_fn(spec, |m, x, xi| {
            let mut v = zeros(nn);
            for b in bumps.iter().filter(|b| b.hbar_order == m) {
                let r2 = (x - b.center.0).powi(2) + (xi - b.center.1).powi(2);
                let e = (-r2 / (b.width * b.width)).exp();
                for (o, c) in v.iter_mut().zip(&b.matrix) {
                    *o += c * e;
                }
            }
            v
        });
        s.check_support(DEFAULT_MARGIN)?;
        Ok(s)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn coefficient(&self, m: usize) -> &[Complex64] {
        &self.coeffs[m]
    }

    /// Matrix value of the `hbar^m` coefficient at `(x_i, xi_j)`.
    pub fn value(&self, m: usize, i: usize, j: usize) -> &[Complex64] {
        let nn = self.spec.size * self.spec.size;
        &self.coeffs[m][(i * self.spec.points + j) * nn..][..nn]
    }

    /// Max over orders and grid points of the matrix operator norm.
    pub fn norm(&self) -> f64 {
        let n = self.spec.size;
        let nn = n * n;
        self.coeffs.iter().flat_map(|c| c.chunks(nn).map(|m| operator_norm(m, n))).fold(0.0, f64::max)
    }

    pub fn check_support(&self, margin: f64) -> Result<(), GridError> {
        let scale = self.norm();
        if scale == 0.0 {
            return Ok(());
        }
        let n = self.spec.size;
        let limit = margin * self.spec.half_width;
        for m in 0..=self.spec.order {
            for i in 0..self.spec.points {
                for j in 0..self.spec.points {
                    let (x, xi) = (self.spec.coordinate(i), self.spec.coordinate(j));
                    if x.abs() <= limit && xi.abs() <= limit {
                        continue;
                    }
                    let v = operator_norm(self.value(m, i, j), n);
                    if v > SUPPORT_TOLERANCE * scale {
                        return Err(GridError::SupportMargin { value: v, x, xi, tol: SUPPORT_TOLERANCE * scale });
                    }
                }
            }
        }
        Ok(())
    }

    fn compatible(&self, o: &Self) -> Result<(), GridError> {
        if self.spec != o.spec {
            return Err(GridError::Shape(format!("{:?} vs {:?}", self.spec, o.spec)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, GridError> {
        self.compatible(o)?;
        Ok(Self { spec: self.spec, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, GridError> {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { spec: self.spec, coeffs: self.coeffs.iter().map(|a| a.iter().map(|x| x * c).collect()).collect() }
    }

    /// Multiplies by `hbar^s`, dropping orders above `K`.
    pub fn shift_hbar(&self, s: usize) -> Self {
        let mut out = Self::zero(self.spec);
        for m in 0..=self.spec.order {
            if m + s <= self.spec.order {
                out.coeffs[m + s] = self.coeffs[m].clone();
            }
        }
        out
    }

    /// Only the `hbar^0` part.
    pub fn classical(&self) -> Self {
        let mut out = Self::zero(self.spec);
        out.coeffs[0] = self.coeffs[0].clone();
        out
    }

    /// Spectral derivatives `∂_x^a ∂_xi^b` for all `a + b <= max`.
    pub fn derivatives(&self, max: usize) -> Derivatives {
        let spec = self.spec;
        let g = spec.points;
        let nn = spec.size * spec.size;
        let fft = Fft2::new(g);
        let spectra: Vec<Vec<Vec<Complex64>>> = self
            .coeffs
            .iter()
            .map(|c| {
                (0..nn)
                    .map(|e| {
                        let mut plane: Vec<Complex64> = (0..g * g).map(|p| c[p * nn + e]).collect();
                        fft.run(&mut plane, false);
                        plane
                    })
                    .collect()
            })
            .collect();
        let mut out = BTreeMap::new();
        for total in 0..=max {
            for a in 0..=total {
                let b = total - a;
                let mut d = Self::zero(spec);
                for (m, entries) in spectra.iter().enumerate() {
                    if entries.iter().all(|p| p.iter().all(|z| z.norm_sqr() == 0.0)) {
                        continue;
                    }
                    for (e, plane) in entries.iter().enumerate() {
                        let mut work: Vec<Complex64> = plane
                            .iter()
                            .enumerate()
                            .map(|(p, z)| z * wavenumber(p / g, g, spec.half_width, a) * wavenumber(p % g, g, spec.half_width, b))
                            .collect();
                        fft.run(&mut work, true);
                        for (p, z) in work.into_iter().enumerate() {
                            d.coeffs[m][p * nn + e] = z;
                        }
                    }
                }
                out.insert((a, b), d);
            }
        }
        out
    }

    pub fn derivative(&self, dx: usize, dxi: usize) -> GridSymbol {
        let all = self.derivatives(dx + dxi);
        all[&(dx, dxi)].clone()
    }

    /// Pointwise matrix product of two coefficient arrays.
    fn pointwise(spec: GridSpec, a: &[Complex64], b: &[Complex64], out: &mut [Complex64], c: Complex64) {
        let n = spec.size;
        let nn = n * n;
        let mut tmp = zeros(nn);
        for p in 0..spec.points * spec.points {
            matmul(&a[p * nn..][..nn], &b[p * nn..][..nn], n, &mut tmp);
            for (o, t) in out[p * nn..][..nn].iter_mut().zip(&tmp) {
                *o += t * c;
            }
        }
    }

    /// Moyal product truncated at order `K`:
    /// `sum_k (i hbar/2)^k/k! sum_s C(k,s)(-1)^s ∂_x^{k-s}∂_xi^s a · ∂_xi^{k-s}∂_x^s b`.
    pub fn moyal(&self, o: &Self) -> Result<Self, GridError> {
        self.compatible(o)?;
        let k_max = self.spec.order;
        Ok(Self::moyal_from(self.spec, &self.derivatives(k_max), &o.derivatives(k_max)))
    }

    /// Moyal product from precomputed derivative tables of both factors.
    fn moyal_from(spec: GridSpec, da: &Derivatives, db: &Derivatives) -> Self {
        let k_max = spec.order;
        let mut out = Self::zero(spec);
        let mut fact = 1.0;
        for k in 0..=k_max {
            if k > 0 {
                fact *= k as f64;
            }
            let pref = Complex64::new(0.0, 0.5).powu(k as u32) / fact;
            for s in 0..=k {
                let binom = (0..s).fold(1.0, |acc, t| acc * (k - t) as f64 / (t + 1) as f64);
                let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                let c = pref * binom * sign;
                let left = &da[&(k - s, s)];
                let right = &db[&(s, k - s)];
                for p in 0..=k_max {
                    if left.coeffs[p].iter().all(|z| z.norm_sqr() == 0.0) {
                        continue;
                    }
                    for q in 0..=(k_max - p) {
                        let m = p + q + k;
                        if m > k_max || right.coeffs[q].iter().all(|z| z.norm_sqr() == 0.0) {
                            continue;
                        }
                        Self::pointwise(spec, &left.coeffs[p], &right.coeffs[q], &mut out.coeffs[m], c);
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, o: &Self) -> Result<Self, GridError> {
        self.moyal(o)?.sub(&o.moyal(self)?)
    }

    /// `[x̂, a] = i hbar ∂_xi a` (`coordinate = 0`) or `[ξ̂, a] = -i hbar ∂_x a`
    /// (`coordinate = 1`); exact for the Moyal product.
    pub fn coordinate_commutator(&self, coordinate: usize) -> Self {
        let (d, c) = if coordinate == 0 { (self.derivative(0, 1), Complex64::new(0.0, 1.0)) } else { (self.derivative(1, 0), Complex64::new(0.0, -1.0)) };
        d.scale(c).shift_hbar(1)
    }

    /// `max_grid |energy in the top quarter of frequencies| / |total|`, a
    /// resolution indicator.
    pub fn spectral_tail(&self) -> f64 {
        let spec = self.spec;
        let g = spec.points;
        let nn = spec.size * spec.size;
        let fft = Fft2::new(g);
        let mut worst: f64 = 0.0;
        for c in &self.coeffs {
            for e in 0..nn {
                let mut plane: Vec<Complex64> = (0..g * g).map(|p| c[p * nn + e]).collect();
                fft.run(&mut plane, false);
                let total: f64 = plane.iter().map(|z| z.norm_sqr()).sum();
                if total == 0.0 {
                    continue;
                }
                let high = |m: usize| {
                    let f = if m <= g / 2 { m } else { g - m };
                    f >= 3 * g / 8
                };
                let tail: f64 = plane.iter().enumerate().filter(|(p, _)| high(p / g) || high(p % g)).map(|(_, z)| z.norm_sqr()).sum();
                worst = worst.max((tail / total).sqrt());
            }
        }
        worst
    }
}

/// `sum_k coeffs[k] hbar^{lowest + k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent {
    pub lowest: i32,
    pub coeffs: Vec<Complex64>,
}

impl Laurent {
    pub fn coefficient(&self, power: i32) -> Complex64 {
        let k = power - self.lowest;
        if k < 0 || k as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[k as usize]
        }
    }

    pub fn eval(&self, hbar: f64) -> Complex64 {
        self.coeffs.iter().enumerate().map(|(k, c)| c * hbar.powi(self.lowest + k as i32)).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { lowest: self.lowest, coeffs: self.coeffs.iter().map(|z| z * c).collect() }
    }

    pub fn shift(&self, s: i32) -> Self {
        Self { lowest: self.lowest + s, coeffs: self.coeffs.clone() }
    }

    /// Largest magnitude among coefficients of negative powers.
    pub fn singular_part(&self) -> f64 {
        (self.lowest..0).map(|p| self.coefficient(p).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn integrate_trace(spec: GridSpec, a: &[Complex64], normalized: bool) -> Complex64 {
    let n = spec.size;
    let nn = n * n;
    let mut s = Complex64::new(0.0, 0.0);
    for p in 0..spec.points * spec.points {
        for r in 0..n {
            s += a[p * nn + r * n + r];
        }
    }
    let h = spec.spacing();
    let norm = if normalized { 1.0 / n as f64 } else { 1.0 };
    s * h * h * norm
}

/// `Tr(a) = (1/(i hbar)) sum_m hbar^m ∫ tr(a_m) dx dxi`.
pub fn trace(a: &GridSymbol, normalized: bool) -> Laurent {
    let spec = a.spec;
    let coeffs = (0..=spec.order).map(|m| integrate_trace(spec, &a.coeffs[m], normalized) / Complex64::new(0.0, 1.0)).collect();
    Laurent { lowest: -1, coeffs }
}

/// `∫ (1/2) tr(a_0 da_1 ∧ da_2)` on the chart oriented by `ω_st = dξ∧dx`,
/// using the `hbar^0` parts.
pub fn mu_tilde(word: &[GridSymbol], normalized: bool) -> Result<Complex64, GridError> {
    match word.len() {
        3 => {}
        1 => return Ok(integrate_trace(word[0].spec, &word[0].coeffs[0], normalized)),
        k => return Err(GridError::Unsupported(format!("mu_tilde on {k} tensor factors"))),
    }
    word[0].compatible(&word[1])?;
    word[0].compatible(&word[2])?;
    let spec = word[0].spec;
    let d1 = word[1].classical().derivatives(1);
    let d2 = word[2].classical().derivatives(1);
    let mut integrand = zeros(spec.cells());
    let mut tmp = zeros(spec.cells());
    // (∂_x a1 ∂_xi a2 - ∂_xi a1 ∂_x a2) dx∧dξ
    GridSymbol::pointwise(spec, &d1[&(1, 0)].coeffs[0], &d2[&(0, 1)].coeffs[0], &mut tmp, Complex64::new(1.0, 0.0));
    GridSymbol::pointwise(spec, &d1[&(0, 1)].coeffs[0], &d2[&(1, 0)].coeffs[0], &mut tmp, Complex64::new(-1.0, 0.0));
    GridSymbol::pointwise(spec, &word[0].coeffs[0], &tmp, &mut integrand, Complex64::new(1.0, 0.0));
    // dx∧dξ = -dξ∧dx
    Ok(integrate_trace(spec, &integrand, normalized) * -0.5)
}

/// `χ_Tr(U_0)(a_0 ⊗ a_1 ⊗ a_2) = Tr(U_0 · a)` at `n = 1`, with
/// `U_0 = (1/(2 i hbar)) sum_σ [sgn σ] v_σ(1) ⊗ v_σ(2)` and the
/// `A`-component of the action.
pub fn chi_tr_u0(word: &[GridSymbol], signed: bool, normalized: bool) -> Result<Laurent, GridError> {
    if word.len() != 3 {
        return Err(GridError::Unsupported(format!("pairing with U0 needs 3 tensor factors, got {}", word.len())));
    }
    word[0].compatible(&word[1])?;
    word[0].compatible(&word[2])?;
    for w in word {
        w.check_support(DEFAULT_MARGIN)?;
    }
    let spec = word[0].spec;
    let k_max = spec.order;
    let d0 = word[0].derivatives(k_max);
    // derivative tables of [v_k, a_j] for j = 1, 2
    let comm: Vec<[Derivatives; 2]> = word[1..]
        .iter()
        .map(|a| [a.coordinate_commutator(0).derivatives(k_max), a.coordinate_commutator(1).derivatives(k_max)])
        .collect();
    let mut products: BTreeMap<(usize, usize), GridSymbol> = BTreeMap::new();
    let mut total = GridSymbol::zero(spec);
    for (perm, odd) in [([0usize, 1usize], false), ([1, 0], true)] {
        let s = if signed && odd { -1.0 } else { 1.0 };
        // sum_i (1/2!) (-1)^{i} a_0 [b_{i+1}, a_1][b_{i+2}, a_2]
        for i in 0..2 {
            let key = (perm[i % 2], perm[(i + 1) % 2]);
            let term = products.entry(key).or_insert_with(|| {
                let left = GridSymbol::moyal_from(spec, &d0, &comm[0][key.0]);
                GridSymbol::moyal_from(spec, &left.derivatives(k_max), &comm[1][key.1])
            });
            let c = s * 0.5 * if i % 2 == 0 { 1.0 } else { -1.0 };
            total = total.add(&term.scale(Complex64::new(c, 0.0)))?;
        }
    }
    // prefactor 1/(2 i hbar) from U_0, then the trace
    let tr = trace(&total, normalized);
    Ok(tr.scale(Complex64::new(0.0, -0.5)).shift(-1))
}

/// Parses `{L, G, K, N, bumps: [{symbol, center, width, matrix, hbar_order}]}`
/// into the listed symbols. Matrix entries are numbers or `[re, im]`.
pub fn corpus_from_json(v: &Value) -> Result<(GridSpec, Vec<GridSymbol>), GridError> {
    let bad = |s: &str| GridError::Shape(s.to_string());
    let num = |k: &str| v.get(k).and_then(Value::as_f64).ok_or_else(|| bad(&format!("missing {k}")));
    let spec = GridSpec::new(num("L")?, num("G")? as usize, num("K")? as usize, num("N")? as usize)?;
    let mut groups: BTreeMap<usize, Vec<Bump>> = BTreeMap::new();
    for b in v.get("bumps").and_then(Value::as_array).ok_or_else(|| bad("missing bumps"))? {
        let symbol = b.get("symbol").and_then(Value::as_u64).unwrap_or(0) as usize;
        let center = b.get("center").and_then(Value::as_array).ok_or_else(|| bad("center"))?;
        if center.len() != 2 {
            return Err(bad("center must have two coordinates"));
        }
        let cx = center[0].as_f64().ok_or_else(|| bad("center"))?;
        let cxi = center[1].as_f64().ok_or_else(|| bad("center"))?;
        let width = b.get("width").and_then(Value::as_f64).ok_or_else(|| bad("width"))?;
        let hbar_order = b.get("hbar_order").and_then(Value::as_u64).unwrap_or(0) as usize;
        let rows = b.get("matrix").and_then(Value::as_array).ok_or_else(|| bad("matrix"))?;
        let mut matrix = Vec::new();
        for r in rows {
            for e in r.as_array().ok_or_else(|| bad("matrix rows"))? {
                matrix.push(match e {
                    Value::Array(p) if p.len() == 2 => Complex64::new(p[0].as_f64().ok_or_else(|| bad("entry"))?, p[1].as_f64().ok_or_else(|| bad("entry"))?),
                    x => Complex64::new(x.as_f64().ok_or_else(|| bad("entry"))?, 0.0),
                });
            }
        }
        groups.entry(symbol).or_default().push(Bump { center: (cx, cxi), width, matrix, hbar_order });
    }
    let count = groups.keys().next_back().map_or(0, |k| k + 1);
    let symbols = (0..count).map(|k| GridSymbol::from_bumps(spec, groups.get(&k).map_or(&[][..], Vec::as_slice))).collect::<Result<_, _>>()?;
    Ok((spec, symbols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(g: usize) -> GridSpec {
        GridSpec::new(8.0, g, 2, 1).unwrap()
    }

    fn bump(s: GridSpec, c: (f64, f64), w: f64) -> GridSymbol {
        GridSymbol::from_bumps(s, &[Bump { center: c, width: w, matrix: vec![Complex64::new(1.0, 0.0)], hbar_order: 0 }]).unwrap()
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let s = spec(128);
        let a = bump(s, (0.5, -0.3), 1.0);
        let d = a.derivative(1, 0);
        let mut worst: f64 = 0.0;
        for i in 0..s.points {
            for j in 0..s.points {
                let (x, xi) = (s.coordinate(i), s.coordinate(j));
                let exact = -2.0 * (x - 0.5) * (-((x - 0.5).powi(2) + (xi + 0.3).powi(2))).exp();
                worst = worst.max((d.value(0, i, j)[0].re - exact).abs());
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn classical_product_is_pointwise() {
        let s = spec(64);
        let a = bump(s, (0.0, 0.0), 1.0);
        let b = bump(s, (0.5, 0.0), 1.0);
        let p = a.moyal(&b).unwrap();
        for i in 0..s.points {
            for j in 0..s.points {
                let expected = a.value(0, i, j)[0] * b.value(0, i, j)[0];
                assert!((p.value(0, i, j)[0] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn support_margin_is_enforced() {
        let s = spec(64);
        let r = GridSymbol::from_bumps(s, &[Bump { center: (7.0, 0.0), width: 1.0, matrix: vec![Complex64::new(1.0, 0.0)], hbar_order: 0 }]);
        assert!(matches!(r, Err(GridError::SupportMargin { .. })));
    }

    #[test]
    fn normalized_bump_trace() {
        let s = spec(128);
        let w: f64 = 1.0;
        let a = bump(s, (0.0, 0.0), w).scale(Complex64::new(1.0 / (std::f64::consts::PI * w * w), 0.0));
        let t = trace(&a, true);
        let expected = Complex64::new(0.0, -1.0);
        assert!((t.coefficient(-1) - expected).norm() < 1e-12);
        assert_eq!(t.coefficient(0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let m = vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, -5.0)];
        assert!((operator_norm(&m, 2) - 5.0).abs() < 1e-9);
        // [[1, 1], [0, 1]] has largest singular value the golden ratio
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((operator_norm(&[one, one, zero, one], 2) - golden).abs() < 1e-12);
        let three = [one, one, zero, zero, one, zero, zero, zero, Complex64::new(0.5, 0.0)];
        assert!((operator_norm(&three, 3) - golden).abs() < 1e-9);
    }
}
