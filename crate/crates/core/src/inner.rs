//! Recovering the conjugating element of an automorphism of `M_N(A^hbar)`
//! over the identity symplectomorphism.
//!
//! The automorphism is peeled off one Fedosov shift order at a time: the
//! leading deviation from the identity is a derivation, which is inner; its
//! generator is integrated from the images of the fiber symbols and the
//! matrix units, and the automorphism is composed with `exp(-ad g_k)`.

use num_traits::Zero;

use crate::error::WeylError;
use crate::matrix::Matrix;
use crate::multi;
use crate::scalar::Gq;
use crate::weyl::{Shape, WeylElement, WeylKey};

/// Images of the algebra generators under an automorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorImages {
    pub shape: Shape,
    /// Images of `xhat_1..xhat_n, xihat_1..xihat_n`.
    pub fiber: Vec<WeylElement>,
    /// `units[a][b]` is the image of the matrix unit `E_ab`.
    pub units: Vec<Vec<WeylElement>>,
}

impl GeneratorImages {
    pub fn identity(shape: Shape) -> Self {
        Self::from_fn(shape, |v| Ok(v.clone())).expect("identity is infallible")
    }

    /// Images under `Ad(exp_⋆ g) = exp(ad g)`.
    pub fn from_inner(g: &WeylElement) -> Result<Self, WeylError> {
        Self::from_fn(g.shape(), |v| g.ad_exp(v))
    }

    fn from_fn(
        shape: Shape,
        mut f: impl FnMut(&WeylElement) -> Result<WeylElement, WeylError>,
    ) -> Result<Self, WeylError> {
        let fiber = (0..shape.vars())
            .map(|k| f(&WeylElement::generator(shape, k)))
            .collect::<Result<_, _>>()?;
        let units = (0..shape.size)
            .map(|a| {
                (0..shape.size)
                    .map(|b| f(&WeylElement::constant(shape, Matrix::unit(shape.size, a, b))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { shape, fiber, units })
    }

    fn map(&self, mut f: impl FnMut(&WeylElement) -> Result<WeylElement, WeylError>) -> Result<Self, WeylError> {
        Ok(Self {
            shape: self.shape,
            fiber: self.fiber.iter().map(&mut f).collect::<Result<_, _>>()?,
            units: self
                .units
                .iter()
                .map(|row| row.iter().map(&mut f).collect::<Result<Vec<_>, _>>())
                .collect::<Result<_, _>>()?,
        })
    }

    fn generator_name(&self, k: usize) -> String {
        let n = self.shape.n;
        if k < n { format!("xhat_{}", k + 1) } else { format!("xihat_{}", k - n + 1) }
    }

    /// Lowest-degree failure of the defining relations, if any.
    pub fn multiplicativity_defect(&self) -> Result<Option<(String, i32)>, WeylError> {
        let shape = self.shape;
        let n = shape.n;
        let size = shape.size;
        let mut worst: Option<(String, i32)> = None;
        let mut note = |name: String, r: WeylElement| {
            if let Some(d) = r.min_degree() {
                if worst.as_ref().is_none_or(|(_, w)| d < *w) {
                    worst = Some((name, d));
                }
            }
        };
        // canonical commutation relations
        for a in 0..2 * n {
            for b in (a + 1)..2 * n {
                let lhs = self.fiber[a].commutator(&self.fiber[b])?;
                let rhs = if b == a + n {
                    WeylElement::hbar(shape).scale(&Gq::i())
                } else {
                    WeylElement::zero(shape)
                };
                note(format!("[{}, {}]", self.generator_name(a), self.generator_name(b)), lhs.sub(&rhs)?);
            }
        }
        // matrix units: E_ab E_cd = delta_bc E_ad, sum E_aa = 1
        let mut sum = WeylElement::zero(shape);
        for a in 0..size {
            sum = sum.add(&self.units[a][a])?;
            for b in 0..size {
                for c in 0..size {
                    for d in 0..size {
                        let lhs = self.units[a][b].star(&self.units[c][d])?;
                        let rhs = if b == c { self.units[a][d].clone() } else { WeylElement::zero(shape) };
                        note(format!("E_{a}{b} E_{c}{d}"), lhs.sub(&rhs)?);
                    }
                }
            }
        }
        note("sum E_aa = 1".into(), sum.sub(&WeylElement::one(shape))?);
        // fiber symbols are central with respect to matrix units
        for k in 0..2 * n {
            for a in 0..size {
                for b in 0..size {
                    let r = self.fiber[k].commutator(&self.units[a][b])?;
                    note(format!("[{}, E_{a}{b}]", self.generator_name(k)), r);
                }
            }
        }
        Ok(worst)
    }
}

/// Finds `g` with `Ad(exp_⋆ g)` equal to the given automorphism up to the
/// truncation degree. The central component of `g` is set to zero.
pub fn conjugator_from_automorphism(phi: &GeneratorImages) -> Result<WeylElement, WeylError> {
    let shape = phi.shape;
    let n = shape.n;
    let size = shape.size;
    let d_max = shape.degree;

    if let Some((relation, degree)) = phi.multiplicativity_defect()? {
        return Err(WeylError::NotMultiplicative { relation, degree });
    }
    for (k, img) in phi.fiber.iter().enumerate() {
        let dev = img.sub(&WeylElement::generator(shape, k))?;
        // deviations must carry at least one power of hbar
        if dev.terms().keys().any(|key| key.m <= 0) {
            return Err(WeylError::CenterNotIdentity(phi.generator_name(k)));
        }
    }
    for a in 0..size {
        for b in 0..size {
            let dev = phi.units[a][b].sub(&WeylElement::constant(shape, Matrix::unit(size, a, b)))?;
            if let Some(d) = dev.min_degree() {
                if d < 1 {
                    return Err(WeylError::NotUnipotent { generator: format!("E_{a}{b}"), degree: d });
                }
            }
        }
    }

    let minus_i = -Gq::i();
    let mut psi = phi.clone();
    let mut factors = Vec::new();
    for k in 1..=d_max {
        // leading derivation D_k on the generators
        let mut grad = vec![WeylElement::zero(shape); 2 * n];
        for j in 0..n {
            let u = psi.fiber[j].sub(&WeylElement::x(shape, j))?.homogeneous_part(1 + k);
            let w = psi.fiber[n + j].sub(&WeylElement::xi(shape, j))?.homogeneous_part(1 + k);
            // d_x g = w / (i hbar), d_xi g = -u / (i hbar)
            grad[j] = w.shift_hbar(-1)?.scale(&minus_i);
            grad[n + j] = u.shift_hbar(-1)?.scale(&Gq::i());
            if grad[j].has_negative_hbar() || grad[n + j].has_negative_hbar() {
                return Err(WeylError::CenterNotIdentity(format!("order {k}")));
            }
        }
        // Euler integration of the gradient
        let mut g = WeylElement::zero(shape);
        for (var, gr) in grad.iter().enumerate() {
            for (key, m) in gr.terms() {
                let mut beta = key.beta.clone();
                beta[var] += 1;
                let r = multi::degree(&beta) as i64;
                g.add_term(WeylKey::new(beta, key.m), m.scale(&Gq::from_frac(1, r)));
            }
        }
        // fiber-constant part from the matrix units
        let mut c = WeylElement::zero(shape);
        for a in 0..size {
            let e_a0 = WeylElement::constant(shape, Matrix::unit(size, a, 0));
            let d = psi.units[a][0].sub(&e_a0)?.homogeneous_part(k);
            let resid = d.sub(&g.commutator(&e_a0)?)?;
            c = c.add(&resid.star(&WeylElement::constant(shape, Matrix::unit(size, 0, a)))?)?;
        }
        let gk = g.add(&c)?.remove_central();
        if gk.is_zero() {
            continue;
        }
        let minus = gk.neg();
        psi = psi.map(|v| minus.ad_exp(v))?;
        factors.push(gk);
    }

    let ident = GeneratorImages::identity(shape);
    if psi != ident {
        return Err(WeylError::NoConjugator("residual automorphism is not the identity".into()));
    }
    let mut prod = WeylElement::one(shape);
    for f in &factors {
        prod = prod.star(&f.exp_star()?)?;
    }
    let g = prod.log_star()?.remove_central();
    debug_assert!(g.terms().values().all(|m| !m.is_zero()));
    if GeneratorImages::from_inner(&g)? != *phi {
        return Err(WeylError::NoConjugator("recombined conjugator does not reproduce the images".into()));
    }
    Ok(g)
}

/// Checks that a candidate conjugator has no central component.
pub fn is_central_free(g: &WeylElement) -> bool {
    g.terms()
        .iter()
        .filter(|(k, _)| k.beta.iter().all(|&e| e == 0))
        .all(|(_, m)| m.trace().is_zero())
}
