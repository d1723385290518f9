//! Fedosov connections on a single chart: the degree-by-degree recursion for
//! a connection with prescribed central curvature, flat sections and the
//! induced star product on matrix-valued symbols.
//!
//! Conventions: `nabla = d_Gamma + ad Q` with `Q = Q_{-1} + r`, where
//! `Q_{-1} = (i/hbar) sum omega_kl(x) yhat^k dx^l` so that
//! `[Q_{-1}, a] = -delta a`; the fiber product uses `Pi = -omega^{-1}`.

use serde_json::Value;

use crate::error::{ChartError, WeylError};
use crate::forms::{FormAlgebra, FormKey, FormShape, WeylForm};
use crate::jets::{invert_jet_matrix, JetMatrix, JetPolynomial};
use crate::matrix::Matrix;
use crate::multi;
use crate::scalar::Gq;

pub type JetGrid = Vec<Vec<JetPolynomial>>;

/// Geometric input on one chart, all functions given as jets at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartData {
    pub n: usize,
    pub size: usize,
    pub jet: usize,
    /// `omega[i][j] = omega_ij(x)`.
    pub omega: JetGrid,
    /// `gamma[k][i][j] = Gamma^k_ij(x)`.
    pub gamma: Vec<JetGrid>,
    /// `(t, theta_t)` with `theta_t[i][j]` antisymmetric.
    pub theta: Vec<(usize, JetGrid)>,
}

fn lowest_order(p: &JetPolynomial) -> Option<usize> {
    p.min_order()
}

impl ChartData {
    /// Constant standard form, zero connection, no correction.
    pub fn flat(n: usize, size: usize, jet: usize) -> Self {
        let vars = 2 * n;
        Self {
            n,
            size,
            jet,
            omega: crate::forms::standard_omega(n, jet),
            gamma: vec![vec![vec![JetPolynomial::zero(vars, jet); vars]; vars]; vars],
            theta: Vec::new(),
        }
    }

    /// Chart with the given symplectic form and the connection
    /// `Gamma_{mkl} = (d_m omega_kl + d_k omega_ml) / 3` raised with `omega^{-1}`.
    pub fn with_synthesized_connection(n: usize, size: usize, jet: usize, omega: JetGrid) -> Result<Self, ChartError> {
        let gamma = symplectic_connection(&omega)?;
        let chart = Self { n, size, jet, omega, gamma, theta: Vec::new() };
        chart.validate()?;
        Ok(chart)
    }

    pub fn vars(&self) -> usize {
        2 * self.n
    }

    pub fn validate(&self) -> Result<(), ChartError> {
        let v = self.vars();
        let zero_ok = |p: &JetPolynomial| p.is_zero();
        if self.omega.len() != v || self.omega.iter().any(|r| r.len() != v) {
            return Err(ChartError::Shape(format!("omega must be {v}x{v}")));
        }
        if self.gamma.len() != v || self.gamma.iter().any(|g| g.len() != v || g.iter().any(|r| r.len() != v)) {
            return Err(ChartError::Shape(format!("gamma must be {v}x{v}x{v}")));
        }
        for i in 0..v {
            for j in 0..v {
                if !zero_ok(&self.omega[i][j].add(&self.omega[j][i])) {
                    return Err(ChartError::OmegaNotAntisymmetric { i, j });
                }
            }
        }
        let origin = Matrix::from_rows(self.omega.iter().map(|r| r.iter().map(|p| p.value_at_origin()).collect()).collect());
        if origin.inverse().is_none() {
            return Err(ChartError::OmegaDegenerate);
        }
        if let Some((component, jet_order)) = closedness_defect(&self.omega) {
            return Err(ChartError::OmegaNotClosed { component, jet_order });
        }
        for k in 0..v {
            for i in 0..v {
                for j in 0..v {
                    let d = self.gamma[k][i][j].sub(&self.gamma[k][j][i]);
                    if let Some(o) = lowest_order(&d) {
                        return Err(ChartError::GammaNotSymmetric { k, i, j, jet_order: o });
                    }
                }
            }
        }
        for m in 0..v {
            for k in 0..v {
                for l in 0..v {
                    let mut e = self.omega[k][l].derivative(m);
                    for p in 0..v {
                        e = e.sub(&self.gamma[p][m][k].mul(&self.omega[p][l]));
                        e = e.sub(&self.gamma[p][m][l].mul(&self.omega[k][p]));
                    }
                    if let Some(o) = lowest_order(&e.truncate(self.jet.saturating_sub(1))) {
                        return Err(ChartError::GammaNotSymplectic { m, k, l, jet_order: o });
                    }
                }
            }
        }
        for (t, th) in &self.theta {
            if th.len() != v || th.iter().any(|r| r.len() != v) {
                return Err(ChartError::Shape(format!("theta_{t} must be {v}x{v}")));
            }
            for i in 0..v {
                for j in 0..v {
                    if !th[i][j].add(&th[j][i]).is_zero() {
                        return Err(ChartError::ThetaNotAntisymmetric { t: *t, i, j });
                    }
                }
            }
            if let Some((component, jet_order)) = closedness_defect(th) {
                return Err(ChartError::ThetaNotClosed { t: *t, component, jet_order });
            }
        }
        Ok(())
    }

    /// `Pi = -omega^{-1}` as a jet matrix.
    pub fn poisson_tensor(&self) -> Result<JetGrid, ChartError> {
        let inv = invert_jet_matrix(&self.omega).ok_or(ChartError::OmegaDegenerate)?;
        Ok(inv.into_iter().map(|r| r.into_iter().map(|p| p.neg()).collect()).collect())
    }

    /// `{f, g} = sum Pi^{ab} d_a f d_b g`.
    pub fn poisson_bracket(&self, f: &JetPolynomial, g: &JetPolynomial) -> Result<JetPolynomial, ChartError> {
        let pi = self.poisson_tensor()?;
        let v = self.vars();
        let mut r = JetPolynomial::zero(v, self.jet.saturating_sub(1));
        for a in 0..v {
            for b in 0..v {
                r = r.add(&pi[a][b].mul(&f.derivative(a)).mul(&g.derivative(b)));
            }
        }
        Ok(r)
    }

    pub fn from_json(v: &Value) -> Result<Self, ChartError> {
        let get_usize = |k: &str| {
            v.get(k).and_then(Value::as_u64).map(|x| x as usize).ok_or_else(|| ChartError::Parse(format!("missing integer field {k}")))
        };
        let n = get_usize("n")?;
        let size = get_usize("N")?;
        let jet = get_usize("J")?;
        let vars = 2 * n;
        let poly = |x: &Value| -> Result<JetPolynomial, ChartError> {
            match x {
                Value::String(s) => JetPolynomial::parse(s, vars, jet).map_err(ChartError::Parse),
                Value::Number(num) => JetPolynomial::parse(&num.to_string(), vars, jet).map_err(ChartError::Parse),
                _ => Err(ChartError::Parse(format!("expected polystring, got {x}"))),
            }
        };
        let grid = |x: &Value| -> Result<JetGrid, ChartError> {
            let rows = x.as_array().ok_or_else(|| ChartError::Parse("expected matrix of polystrings".into()))?;
            rows.iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| ChartError::Parse("expected row of polystrings".into()))?
                        .iter()
                        .map(poly)
                        .collect()
                })
                .collect()
        };
        let omega = grid(v.get("omega").ok_or_else(|| ChartError::Parse("missing omega".into()))?)?;
        let gamma = match v.get("gamma") {
            Some(g) => g
                .as_array()
                .ok_or_else(|| ChartError::Parse("gamma must be a list of matrices".into()))?
                .iter()
                .map(grid)
                .collect::<Result<Vec<_>, _>>()?,
            None => return Err(ChartError::Parse("missing gamma".into())),
        };
        let mut theta = Vec::new();
        if let Some(list) = v.get("theta") {
            for item in list.as_array().ok_or_else(|| ChartError::Parse("theta must be a list".into()))? {
                let t = item.get("t").and_then(Value::as_u64).ok_or_else(|| ChartError::Parse("theta entry needs t".into()))?;
                let form = grid(item.get("form").ok_or_else(|| ChartError::Parse("theta entry needs form".into()))?)?;
                theta.push((t as usize, form));
            }
        }
        let chart = Self { n, size, jet, omega, gamma, theta };
        chart.validate()?;
        Ok(chart)
    }

    pub fn to_json(&self) -> Value {
        let grid = |g: &JetGrid| -> Value { g.iter().map(|r| r.iter().map(|p| p.to_polystring()).collect::<Vec<_>>()).collect() };
        serde_json::json!({
            "n": self.n,
            "N": self.size,
            "J": self.jet,
            "omega": grid(&self.omega),
            "gamma": self.gamma.iter().map(grid).collect::<Vec<_>>(),
            "theta": self.theta.iter().map(|(t, f)| serde_json::json!({"t": t, "form": grid(f)})).collect::<Vec<_>>(),
        })
    }
}

/// First failure of `d_i w_jk + d_j w_ki + d_k w_ij = 0`.
fn closedness_defect(w: &JetGrid) -> Option<((usize, usize, usize), usize)> {
    let v = w.len();
    for i in 0..v {
        for j in (i + 1)..v {
            for k in (j + 1)..v {
                let e = w[j][k].derivative(i).add(&w[k][i].derivative(j)).add(&w[i][j].derivative(k));
                if let Some(o) = e.min_order() {
                    return Some(((i, j, k), o));
                }
            }
        }
    }
    None
}

/// Torsion-free connection preserving a closed `omega`.
pub fn symplectic_connection(omega: &JetGrid) -> Result<Vec<JetGrid>, ChartError> {
    let v = omega.len();
    let inv = invert_jet_matrix(omega).ok_or(ChartError::OmegaDegenerate)?;
    let third = Gq::from_frac(1, 3);
    let order = omega[0][0].order();
    let mut gamma = vec![vec![vec![JetPolynomial::zero(v, order); v]; v]; v];
    for m in 0..v {
        for k in 0..v {
            for l in 0..v {
                let lowered = omega[k][l].derivative(m).add(&omega[m][l].derivative(k)).scale(&third);
                if lowered.is_zero() {
                    continue;
                }
                for q in 0..v {
                    gamma[q][m][k] = gamma[q][m][k].add(&lowered.mul(&inv[l][q]));
                }
            }
        }
    }
    Ok(gamma)
}

/// The target `omega/(i hbar) + sum_t hbar^t theta_t`, kept apart from the
/// connection data.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralCurvature {
    pub omega: JetGrid,
    pub theta: Vec<(usize, JetGrid)>,
}

impl CentralCurvature {
    pub fn to_form(&self, shape: FormShape) -> WeylForm {
        let v = shape.vars();
        let mut f = WeylForm::zero(shape);
        let zero = vec![0u8; v];
        let minus_i = -Gq::i();
        for a in 0..v {
            for b in (a + 1)..v {
                let mask = (1u32 << a) | (1u32 << b);
                let w = &self.omega[a][b];
                if !w.is_zero() {
                    f.add_term(FormKey::new(mask, zero.clone(), -1), JetMatrix::from_scalar_jet(&w.scale(&minus_i), shape.size));
                }
                for (t, th) in &self.theta {
                    if !th[a][b].is_zero() {
                        f.add_term(FormKey::new(mask, zero.clone(), *t as i32), JetMatrix::from_scalar_jet(&th[a][b], shape.size));
                    }
                }
            }
        }
        f
    }
}

/// First nonzero residual reported as `(Fedosov degree, jet order)`.
pub type Defect = Option<(i32, usize)>;

#[derive(Clone, Debug)]
pub struct FedosovConnection {
    chart: ChartData,
    degree: i32,
    alg: FormAlgebra,
    q_minus_one: WeylForm,
    /// The correction `A_0 + A_1 + ...`, one degree beyond `degree`.
    r: WeylForm,
    target: CentralCurvature,
    rhat: WeylForm,
}

/// Builds the connection to Fedosov degree `degree` (`r` is carried one
/// degree further so the curvature is exact through `degree`).
pub fn build_fedosov(chart: &ChartData, degree: i32) -> Result<FedosovConnection, ChartError> {
    chart.validate()?;
    if (chart.jet as i64) < degree as i64 + 2 {
        return Err(ChartError::JetBudget { jet: chart.jet, degree });
    }
    let shape = FormShape::graded(chart.n, chart.size, degree + 1, chart.jet);
    let pi = chart.poisson_tensor()?;
    let alg = FormAlgebra::with_poisson(shape, &pi);
    let q_minus_one = crate::forms::a_minus_one(shape, &chart.omega).scale(&Gq::i());
    let target = CentralCurvature { omega: chart.omega.clone(), theta: chart.theta.clone() };
    let mut conn = FedosovConnection {
        chart: chart.clone(),
        degree,
        alg,
        q_minus_one,
        r: WeylForm::zero(shape),
        target,
        rhat: WeylForm::zero(shape),
    };
    conn.rhat = conn.curvature_of_gamma()?;
    let target_form = conn.target.to_form(shape);
    for k in -1..=degree {
        let f = conn.curvature()?;
        let resid = f.sub(&target_form)?.homogeneous_part(k);
        let step = resid.delta_inv();
        conn.r = conn.r.add(&step)?;
    }
    Ok(conn)
}

impl FedosovConnection {
    pub fn chart(&self) -> &ChartData {
        &self.chart
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn shape(&self) -> FormShape {
        self.alg.shape()
    }

    pub fn algebra(&self) -> &FormAlgebra {
        &self.alg
    }

    pub fn correction(&self) -> &WeylForm {
        &self.r
    }

    pub fn target(&self) -> &CentralCurvature {
        &self.target
    }

    pub fn q(&self) -> Result<WeylForm, WeylError> {
        self.q_minus_one.add(&self.r)
    }

    /// `d_Gamma a = dx^m ∧ (d_m a - Gamma^p_mk yhat^k d a / d yhat^p)`.
    pub fn partial_gamma(&self, a: &WeylForm) -> WeylForm {
        partial_gamma(&self.chart.gamma, a)
    }

    fn curvature_of_gamma(&self) -> Result<WeylForm, WeylError> {
        let shape = self.shape();
        let v = shape.vars();
        let mut rhat = WeylForm::zero(shape);
        // d_Gamma^2 yhat^p = C^p_b yhat^b; S_ab = sum_p C^p_a omega_pb
        let mut c: Vec<Vec<Vec<JetPolynomial>>> = Vec::new(); // c[p][b] per 2-form mask below
        let masks: Vec<u32> = (0..v).flat_map(|a| ((a + 1)..v).map(move |b| (1u32 << a) | (1u32 << b))).collect();
        let order = self.chart.jet;
        for p in 0..v {
            let y = WeylForm::term(shape, 0, multi::unit(v, p), 0, JetMatrix::constant(v, Matrix::identity(shape.size)));
            let dd = self.partial_gamma(&self.partial_gamma(&y));
            let mut per_mask = Vec::new();
            for &mask in &masks {
                let mut row = vec![JetPolynomial::zero(v, order); v];
                for (key, val) in dd.terms() {
                    if key.mask != mask || key.m != 0 {
                        continue;
                    }
                    let b = key.beta.iter().position(|&e| e == 1).expect("linear in yhat");
                    let mut jet = JetPolynomial::zero(v, order);
                    for (alpha, m) in val.terms() {
                        jet.add_term(alpha.clone(), m.get(0, 0).clone());
                    }
                    row[b] = jet;
                }
                per_mask.push(row);
            }
            c.push(per_mask);
        }
        let half_i = Gq::from_parts((0, 1), (1, 2));
        for (mi, &mask) in masks.iter().enumerate() {
            for a in 0..v {
                for b in 0..v {
                    let mut s = JetPolynomial::zero(v, order);
                    for p in 0..v {
                        s = s.add(&c[p][mi][a].mul(&self.chart.omega[p][b]).scale(&Gq::from_frac(1, 2)));
                        s = s.add(&c[p][mi][b].mul(&self.chart.omega[p][a]).scale(&Gq::from_frac(1, 2)));
                    }
                    if s.is_zero() {
                        continue;
                    }
                    let beta = multi::add(&multi::unit(v, a), &multi::unit(v, b));
                    rhat.add_term(FormKey::new(mask, beta, -1), JetMatrix::from_scalar_jet(&s.scale(&half_i), shape.size));
                }
            }
        }
        Ok(rhat)
    }

    /// `R + d_Gamma Q + Q ∧⋆ Q`.
    pub fn curvature(&self) -> Result<WeylForm, WeylError> {
        let q = self.q()?;
        let qq = self.alg.wedge_star(&q, &q)?;
        self.rhat.add(&self.partial_gamma(&q))?.add(&qq)
    }

    fn valid_cap(&self) -> impl Fn(i32) -> Option<usize> + '_ {
        let jet = self.chart.jet as i64;
        move |k: i32| {
            let c = jet - k as i64 - 2;
            if c < 0 {
                None
            } else {
                Some((c as usize).min(self.chart.jet))
            }
        }
    }

    /// Lowest `(degree, jet order)` at which the curvature differs from the
    /// central target, restricted to degrees `<= degree` and reliable jets.
    pub fn curvature_defect(&self) -> Result<Defect, WeylError> {
        let diff = self.curvature()?.sub(&self.target.to_form(self.shape()))?;
        Ok(self.defect_of(&diff))
    }

    /// Number of nonzero coefficients of `curvature - target` in each degree
    /// `<= degree`, on reliable jets.
    pub fn curvature_residuals(&self) -> Result<Vec<(i32, usize)>, WeylError> {
        let diff = self.curvature()?.sub(&self.target.to_form(self.shape()))?;
        let diff = diff.filter(|k| k.degree() <= self.degree).restrict_jets(self.valid_cap());
        let low = self.q_minus_one.min_degree().unwrap_or(0).min(diff.min_degree().unwrap_or(0));
        Ok((low..=self.degree).map(|d| (d, diff.homogeneous_part(d).terms().values().map(|j| j.terms().len()).sum())).collect())
    }

    /// Whether the normalization `delta_inv(r) = 0` holds for the correction.
    pub fn gauge_holds(&self) -> bool {
        self.r.delta_inv().is_zero()
    }

    fn defect_of(&self, diff: &WeylForm) -> Defect {
        let diff = diff.filter(|k| k.degree() <= self.degree).restrict_jets(self.valid_cap());
        let d = diff.min_degree()?;
        Some((d, diff.homogeneous_part(d).lowest_jet_order().unwrap_or(0)))
    }

    /// `nabla a = d_Gamma a + [Q, a]`.
    pub fn nabla(&self, a: &WeylForm) -> Result<WeylForm, WeylError> {
        self.partial_gamma(a).add(&self.alg.commutator(&self.q()?, a)?)
    }

    /// Flat section whose symbol part is `f` (a form of degree zero with no
    /// fiber dependence).
    pub fn flat_lift(&self, f: &WeylForm) -> Result<WeylForm, WeylError> {
        if f.terms().keys().any(|k| k.mask != 0 || k.beta.iter().any(|&e| e != 0) || k.m < 0) {
            return Err(WeylError::DegreeBound("flat_lift expects a symbol: no form or fiber degree, hbar^m with m >= 0".into()));
        }
        let f = f.with_shape(self.shape());
        // sigma = sum_j L^j f with L = delta_inv(d_Gamma + [r, .])
        let mut sigma = f.clone();
        let mut step = f;
        for _ in 0..=(self.degree + 2) {
            step = self.partial_gamma(&step).add(&self.alg.commutator(&self.r, &step)?)?.delta_inv();
            if step.is_zero() {
                break;
            }
            sigma = sigma.add(&step)?;
        }
        Ok(sigma)
    }

    /// Defect of `nabla sigma = 0` through the construction degree.
    pub fn flatness_defect(&self, sigma: &WeylForm) -> Result<Defect, WeylError> {
        Ok(self.defect_of(&self.nabla(sigma)?))
    }

    /// `symbol_part(sigma(f) ⋆ sigma(g))`, truncated at the construction degree.
    pub fn induced_star(&self, f: &WeylForm, g: &WeylForm) -> Result<WeylForm, WeylError> {
        let sf = self.flat_lift(f)?;
        let sg = self.flat_lift(g)?;
        let p = self.alg.wedge_star(&sf, &sg)?.symbol_part();
        Ok(p.filter(|k| k.degree() <= self.degree))
    }

    /// Scalar symbol `p(x) · Id` in the connection's shape.
    pub fn symbol(&self, p: &JetPolynomial) -> WeylForm {
        WeylForm::from_jet(self.shape(), p)
    }

    /// Symbol `p(x) · M`.
    pub fn matrix_symbol(&self, p: &JetPolynomial, m: &Matrix) -> WeylForm {
        let jets = JetMatrix::from_scalar_jet(p, self.shape().size);
        let mut jm = JetMatrix::new();
        for (alpha, c) in jets.terms() {
            jm.add_term(alpha.clone(), c * m, usize::MAX);
        }
        WeylForm::term(self.shape(), 0, vec![0; self.shape().vars()], 0, jm)
    }

    /// `e^{ad g} Q - sum_k (ad g)^k / (k+1)! d_Gamma g`: the connection form
    /// after conjugation by `exp_⋆ g`.
    pub fn gauge_transform(&self, q: &WeylForm, g: &WeylForm) -> Result<WeylForm, WeylError> {
        let ad = |a: &WeylForm| self.alg.commutator(g, a);
        let mut out = q.clone();
        let mut term = q.clone();
        let mut k = 1i64;
        loop {
            term = ad(&term)?.scale(&Gq::from_frac(1, k));
            if term.is_zero() {
                break;
            }
            out = out.add(&term)?;
            k += 1;
        }
        let dg = self.partial_gamma(g);
        let mut term = dg.clone();
        out = out.sub(&dg)?;
        let mut k = 1i64;
        loop {
            term = ad(&term)?.scale(&Gq::from_frac(1, k + 1));
            if term.is_zero() {
                break;
            }
            out = out.sub(&term)?;
            k += 1;
        }
        Ok(out)
    }
}

pub fn partial_gamma(gamma: &[JetGrid], a: &WeylForm) -> WeylForm {
    let shape = a.shape();
    let v = shape.vars();
    let mut r = a.base_d_raw();
    let ident = JetMatrix::constant(v, Matrix::identity(shape.size));
    for (key, val) in a.terms() {
        for m in 0..v {
            if key.mask & (1 << m) != 0 {
                continue;
            }
            let sign_neg = (key.mask & ((1u32 << m) - 1)).count_ones() % 2 == 1;
            for p in 0..v {
                if key.beta[p] == 0 {
                    continue;
                }
                for k in 0..v {
                    let g = &gamma[p][m][k];
                    if g.is_zero() {
                        continue;
                    }
                    let mut beta = key.beta.clone();
                    beta[p] -= 1;
                    beta[k] += 1;
                    let mut c = Gq::from_int(-(key.beta[p] as i64));
                    if sign_neg {
                        c = -c;
                    }
                    let jets = val.mul_scaled(&ident, &g.scale(&c), usize::MAX);
                    r.add_term(FormKey::new(key.mask | (1 << m), beta, key.m), jets);
                }
            }
        }
    }
    r
}

/// Result of comparing the connections for `theta` and `theta + d alpha`.
#[derive(Clone, Debug)]
pub struct ThetaShift {
    /// Generator of the conjugating section `exp_⋆ g`.
    pub g: WeylForm,
    /// Lowest failure of `Q_g = Q_2`, `None` when they agree through the degree.
    pub defect: Defect,
}

/// Builds the connections for `theta` and `theta + hbar^t d alpha` and
/// constructs `g` with `exp(ad g)` carrying `Q_1 + hbar^t alpha` to `Q_2`.
pub fn theta_shift_conjugator(chart: &ChartData, degree: i32, t: usize, alpha: &[JetPolynomial]) -> Result<ThetaShift, ChartError> {
    let v = chart.vars();
    if alpha.len() != v {
        return Err(ChartError::Shape(format!("alpha must have {v} components")));
    }
    let mut shifted = chart.clone();
    let mut d_alpha = vec![vec![JetPolynomial::zero(v, chart.jet); v]; v];
    for i in 0..v {
        for j in 0..v {
            d_alpha[i][j] = alpha[j].derivative(i).sub(&alpha[i].derivative(j));
        }
    }
    match shifted.theta.iter_mut().find(|(tt, _)| *tt == t) {
        Some((_, th)) => {
            for i in 0..v {
                for j in 0..v {
                    th[i][j] = th[i][j].add(&d_alpha[i][j]);
                }
            }
        }
        None => shifted.theta.push((t, d_alpha)),
    }
    let c1 = build_fedosov(chart, degree)?;
    let c2 = build_fedosov(&shifted, degree)?;
    let shape = c1.shape();
    let mut q1 = c1.q()?;
    for (k, a) in alpha.iter().enumerate() {
        q1.add_term(FormKey::new(1 << k, vec![0; v], t as i32), JetMatrix::from_scalar_jet(a, shape.size));
    }
    let q2 = c2.q()?;
    let mut g = WeylForm::zero(shape);
    for k in 0..=degree {
        let qg = c1.gauge_transform(&q1, &g)?;
        let diff = q2.sub(&qg)?.homogeneous_part(k);
        g = g.add(&diff.delta_inv())?;
    }
    let qg = c1.gauge_transform(&q1, &g)?;
    let defect = c1.defect_of(&q2.sub(&qg)?);
    Ok(ThetaShift { g, defect })
}
