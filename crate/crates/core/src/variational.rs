//! Quadratic densities on the field space, the admissible functions they
//! generate, the derivative Dk in its converted two-integral form, and the
//! covector pairing against (G, J) representatives.
//!
//! The density blocks live over the 4-dimensional space: λ pairs two even
//! 1-covectors, μ an even 1-covector with an even 2-covector, ν two even
//! 2-covectors, all into odd 4-covectors.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::GradedElement;
use crate::error::{Error, Result};
use crate::forms::{Current, CurrentKind, Domain, SmoothForm};
use crate::space::{Kind, Parity, SpaceDescriptor};
use crate::weyl::BilinearMap;

/// One bilinear block of a quadratic density: constant in v1, or an arbitrary
/// point-dependent coefficient tensor.
#[derive(Clone)]
pub enum Block {
    Constant(BilinearMap),
    PointDependent(Arc<dyn Fn(&[f64]) -> BilinearMap + Send + Sync>),
}

impl Block {
    fn at(&self, x: &[f64]) -> BilinearMap {
        match self {
            Block::Constant(b) => b.clone(),
            Block::PointDependent(f) => f(x),
        }
    }

    fn constant_part(&self) -> Option<&BilinearMap> {
        match self {
            Block::Constant(b) => Some(b),
            Block::PointDependent(_) => None,
        }
    }
}

/// A quadratic mapping κ given through its polarization blocks λ, μ, ν, plus
/// an optional constant odd 4-covector term (the probe densities of the field
/// equivalence relation are constants).
#[derive(Clone)]
pub struct QuadraticDensity {
    space: SpaceDescriptor,
    lambda: Block,
    mu: Block,
    nu: Block,
    offset: Option<GradedElement>,
}

impl QuadraticDensity {
    pub fn new(space: SpaceDescriptor, lambda: Block, mu: Block, nu: Block) -> Result<Self> {
        for (block, qa, qb, symmetric) in [
            (&lambda, 1usize, 1usize, true),
            (&mu, 1, 2, false),
            (&nu, 2, 2, true),
        ] {
            if let Some(b) = block.constant_part() {
                b.space().same_space(&space)?;
                let (ba, bb) = b.grades();
                if (ba, bb) != (qa, qb) {
                    return Err(Error::ShapeMismatch {
                        expected_rows: crate::space::binomial(space.dim(), qa),
                        expected_cols: crate::space::binomial(space.dim(), qb),
                        rows: b.coeffs().nrows(),
                        cols: b.coeffs().ncols(),
                    });
                }
                if symmetric {
                    let dev = b.symmetry_deviation();
                    if dev > 1e-12 {
                        return Err(Error::NonSymmetricBlock { deviation: dev });
                    }
                }
            }
        }
        Ok(Self {
            space,
            lambda,
            mu,
            nu,
            offset: None,
        })
    }

    pub fn zero(space: SpaceDescriptor) -> Self {
        Self {
            space,
            lambda: Block::Constant(BilinearMap::zero(space, 1, 1)),
            mu: Block::Constant(BilinearMap::zero(space, 1, 2)),
            nu: Block::Constant(BilinearMap::zero(space, 2, 2)),
            offset: None,
        }
    }

    /// The probe density κ(x, a, f) = μ₀ for a constant odd 4-covector μ₀.
    pub fn constant_form(space: SpaceDescriptor, mu0: GradedElement) -> Result<Self> {
        if mu0.kind() != Kind::Covector
            || mu0.parity() != Parity::Odd
            || mu0.grade() != space.dim()
        {
            return Err(Error::KindMismatch {
                expected: "constant odd top covector",
            });
        }
        let mut k = Self::zero(space);
        k.offset = Some(mu0);
        Ok(k)
    }

    /// Adds a constant odd 4-covector term to the quadratic part.
    pub fn with_offset(mut self, mu0: GradedElement) -> Self {
        self.offset = Some(mu0);
        self
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn is_constant(&self) -> bool {
        self.lambda.constant_part().is_some()
            && self.mu.constant_part().is_some()
            && self.nu.constant_part().is_some()
    }

    pub fn blocks_at(&self, x: &[f64]) -> (BilinearMap, BilinearMap, BilinearMap) {
        (self.lambda.at(x), self.mu.at(x), self.nu.at(x))
    }

    /// κ_x(a, f) = offset + ½λ_x(a,a) + μ_x(a,f) + ½ν_x(f,f).
    pub fn eval(&self, x: &[f64], a: &GradedElement, f: &GradedElement) -> Result<GradedElement> {
        let (lambda, mu, nu) = self.blocks_at(x);
        let mut out = lambda.eval(a, a)?.scaled(0.5);
        out = out.try_add(&mu.eval(a, f)?)?;
        out = out.try_add(&nu.eval(f, f)?.scaled(0.5))?;
        if let Some(offset) = &self.offset {
            out = out.try_add(offset)?;
        }
        Ok(out)
    }

    /// The polarization δ²κ_x((a,f),(a',f')) assembled from the blocks.
    pub fn delta2(
        &self,
        x: &[f64],
        (a, f): (&GradedElement, &GradedElement),
        (ap, fp): (&GradedElement, &GradedElement),
    ) -> Result<GradedElement> {
        let (lambda, mu, nu) = self.blocks_at(x);
        let mut out = lambda.eval(a, ap)?;
        out = out.try_add(&mu.eval(a, fp)?)?;
        out = out.try_add(&mu.eval(ap, f)?)?;
        out = out.try_add(&nu.eval(f, fp)?)?;
        Ok(out)
    }

    /// Directional derivative Dκ_x(a, f, δa ⊕ δf) through the block chain
    /// rule: λ_x(a,δa) + μ_x(a,δf) + μ_x(δa,f) + ν_x(f,δf).
    pub fn directional(
        &self,
        x: &[f64],
        a: &GradedElement,
        f: &GradedElement,
        da: &GradedElement,
        df: &GradedElement,
    ) -> Result<GradedElement> {
        let (lambda, mu, nu) = self.blocks_at(x);
        let mut out = lambda.eval(a, da)?;
        out = out.try_add(&mu.eval(a, df)?)?;
        out = out.try_add(&mu.eval(da, f)?)?;
        out = out.try_add(&nu.eval(f, df)?)?;
        Ok(out)
    }
}

/// A field representative q(A, c): a local even 1-form defined on a domain
/// containing the support of the odd 4-current.
#[derive(Clone)]
pub struct FieldRep {
    potential: SmoothForm,
    domain: Domain,
    current: Current,
}

impl FieldRep {
    pub fn new(potential: SmoothForm, domain: Domain, current: Current) -> Result<Self> {
        potential.space().same_space(&current.space())?;
        if potential.grade() != 1 || potential.parity() != Parity::Even {
            return Err(Error::KindMismatch {
                expected: "even 1-form potential",
            });
        }
        if !domain.contains_current(&current) {
            return Err(Error::SupportViolation);
        }
        Ok(Self {
            potential,
            domain,
            current,
        })
    }

    pub fn potential(&self) -> &SmoothForm {
        &self.potential
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn current(&self) -> &Current {
        &self.current
    }

    /// The same current with a different potential (a tangent move in Q_c).
    pub fn with_potential(&self, potential: SmoothForm) -> Result<Self> {
        Self::new(potential, self.domain.clone(), self.current.clone())
    }
}

/// A covector representative p(G, J, c): induction, source, current and the
/// speed of light entering the pairing constants.
#[derive(Clone)]
pub struct CovectorRep {
    induction: SmoothForm,
    source: SmoothForm,
    current: Current,
    c_light: f64,
}

impl CovectorRep {
    pub fn new(
        induction: SmoothForm,
        source: SmoothForm,
        current: Current,
        c_light: f64,
    ) -> Result<Self> {
        induction.space().same_space(&current.space())?;
        source.space().same_space(&current.space())?;
        if induction.grade() != 2 || induction.parity() != Parity::Odd {
            return Err(Error::KindMismatch {
                expected: "odd 2-form induction",
            });
        }
        if source.grade() != 3 || source.parity() != Parity::Odd {
            return Err(Error::KindMismatch {
                expected: "odd 3-form source",
            });
        }
        if !(c_light > 0.0) {
            return Err(Error::NonPositiveSpeedOfLight(c_light));
        }
        Ok(Self {
            induction,
            source,
            current,
            c_light,
        })
    }

    pub fn induction(&self) -> &SmoothForm {
        &self.induction
    }

    pub fn source(&self) -> &SmoothForm {
        &self.source
    }

    pub fn current(&self) -> &Current {
        &self.current
    }

    pub fn c_light(&self) -> f64 {
        self.c_light
    }
}

/// k(q(A, c)) = ∫_c κ ∘ (x, A, dA).
pub fn k_eval(kappa: &QuadraticDensity, q: &FieldRep) -> Result<f64> {
    kappa.space().same_space(&q.potential().space())?;
    let space = kappa.space();
    let a = q.potential().clone();
    let f = a.exterior_derivative()?;
    let kap = kappa.clone();
    let integrand = SmoothForm::from_callback(
        space,
        Parity::Odd,
        space.dim(),
        move |x| {
            kap.eval(x, &a.eval(x), &f.eval(x))
                .expect("validated shapes")
        },
        crate::forms::DEFAULT_FD_STEP,
    )?;
    q.current().integrate(&integrand)
}

/// The two composite forms of the converted derivative expression: an odd
/// 3-form paired with δA inside the current and an odd 2-form whose exact
/// differential produces the boundary term.
fn omega_forms(
    kappa: &QuadraticDensity,
    potential: &SmoothForm,
) -> Result<(SmoothForm, SmoothForm)> {
    let space = kappa.space();
    let field = potential.exterior_derivative()?;
    if kappa.is_constant() {
        let (lambda, mu, nu) = kappa.blocks_at(&vec![0.0; space.dim()]);
        // ω₁ = We₁(λ̄ A) + We₁(μ̿ F), an odd 3-form
        let omega1 = potential
            .linear_image(&lambda.we_bar_matrix(), Parity::Odd, 3)?
            .try_add(&field.linear_image(&mu.we_barbar_matrix(), Parity::Odd, 3)?)?;
        // ω₂ = We₂(μ̄ A) + We₂(ν̄ F), an odd 2-form
        let omega2 = potential
            .linear_image(&mu.we_bar_matrix(), Parity::Odd, 2)?
            .try_add(&field.linear_image(&nu.we_bar_matrix(), Parity::Odd, 2)?)?;
        Ok((omega1, omega2))
    } else {
        let (kap1, kap2) = (kappa.clone(), kappa.clone());
        let (a1, a2) = (potential.clone(), potential.clone());
        let (f1, f2) = (field.clone(), field);
        let omega1 = SmoothForm::from_callback(
            space,
            Parity::Odd,
            3,
            move |x| {
                let (lambda, mu, _) = kap1.blocks_at(x);
                let t = lambda
                    .bar(&a1.eval(x))
                    .and_then(|t| crate::weyl::weyl_map(&t))
                    .expect("shapes");
                let u = mu
                    .barbar(&f1.eval(x))
                    .and_then(|t| crate::weyl::weyl_map(&t))
                    .expect("shapes");
                t.try_add(&u).expect("same shape")
            },
            crate::forms::DEFAULT_FD_STEP,
        )?;
        let omega2 = SmoothForm::from_callback(
            space,
            Parity::Odd,
            2,
            move |x| {
                let (_, mu, nu) = kap2.blocks_at(x);
                let t = mu
                    .bar(&a2.eval(x))
                    .and_then(|t| crate::weyl::weyl_map(&t))
                    .expect("shapes");
                let u = nu
                    .bar(&f2.eval(x))
                    .and_then(|t| crate::weyl::weyl_map(&t))
                    .expect("shapes");
                t.try_add(&u).expect("same shape")
            },
            crate::forms::DEFAULT_FD_STEP,
        )?;
        Ok((omega1, omega2))
    }
}

/// Analytic derivative Dk(q(A,c), q(δA,c)) in the converted two-integral
/// form: −∫_c (ω₁ + dω₂) ∧ δA plus the exact term ∫_c d(ω₂ ∧ δA), the latter
/// evaluated through the boundary of the current.
pub fn dk_analytic(kappa: &QuadraticDensity, q: &FieldRep, delta_a: &SmoothForm) -> Result<f64> {
    kappa.space().same_space(&q.potential().space())?;
    if delta_a.grade() != 1 || delta_a.parity() != Parity::Even {
        return Err(Error::KindMismatch {
            expected: "even 1-form variation",
        });
    }
    let (omega1, omega2) = omega_forms(kappa, q.potential())?;
    let bulk = omega1
        .try_add(&omega2.exterior_derivative()?)?
        .wedge(delta_a)?;
    let interior = q.current().integrate(&bulk)?;
    let boundary = q.current().integrate_boundary(&omega2.wedge(delta_a)?)?;
    Ok(-interior + boundary)
}

/// Finite-difference derivative: the centered difference of k along δA. For
/// quadratic densities this is exact in the step, so two widely separated
/// steps must agree to rounding.
pub fn dk_fd(
    kappa: &QuadraticDensity,
    q: &FieldRep,
    delta_a: &SmoothForm,
    step: f64,
) -> Result<f64> {
    let plus = q.with_potential(q.potential().try_add(&delta_a.scaled(step))?)?;
    let minus = q.with_potential(q.potential().try_sub(&delta_a.scaled(step))?)?;
    Ok((k_eval(kappa, &plus)? - k_eval(kappa, &minus)?) / (2.0 * step))
}

/// The pairing ⟨p, δq⟩_c = ∫_c (1/c² J ∧ δA − 1/(4πc) d(G ∧ δA)), evaluated
/// by the route natural to the current variant: interior+boundary integrals
/// for cube domains, the closed pointwise form for Dirac currents, the direct
/// integrand for chain-backed currents.
pub fn covector_pairing(p: &CovectorRep, delta_a: &SmoothForm) -> Result<f64> {
    if delta_a.grade() != 1 || delta_a.parity() != Parity::Even {
        return Err(Error::KindMismatch {
            expected: "even 1-form variation",
        });
    }
    p.current().space().same_space(&delta_a.space())?;
    let c = p.c_light();
    let source_coupling = 1.0 / (c * c);
    let induction_coupling = 1.0 / (4.0 * std::f64::consts::PI * c);
    match p.current().kind() {
        CurrentKind::CubeDomain { .. } => {
            let interior = p.current().integrate(&p.source().wedge(delta_a)?)?;
            let boundary = p
                .current()
                .integrate_boundary(&p.induction().wedge(delta_a)?)?;
            Ok(source_coupling * interior - induction_coupling * boundary)
        }
        CurrentKind::Dirac { point, weight } => {
            let x = point.as_slice();
            let delta_f = delta_a.exterior_derivative()?;
            let dg = p.induction().exterior_derivative()?;
            let maxwell_gap = dg
                .eval(x)
                .try_sub(&p.source().eval(x).scaled(4.0 * std::f64::consts::PI / c))?;
            let term = maxwell_gap
                .wedge(&delta_a.eval(x))?
                .try_add(&p.induction().eval(x).wedge(&delta_f.eval(x))?)?;
            Ok(-induction_coupling * term.pair(weight)?)
        }
        CurrentKind::ChainBacked(_) => covector_pairing_direct(p, delta_a),
    }
}

/// Reference route for the pairing: integrates the literal integrand
/// 1/c² J ∧ δA − 1/(4πc) d(G ∧ δA) against the current.
pub fn covector_pairing_direct(p: &CovectorRep, delta_a: &SmoothForm) -> Result<f64> {
    let c = p.c_light();
    let integrand = p
        .source()
        .wedge(delta_a)?
        .scaled(1.0 / (c * c))
        .try_sub(
            &p.induction()
                .wedge(delta_a)?
                .exterior_derivative()?
                .scaled(1.0 / (4.0 * std::f64::consts::PI * c)),
        )?;
    p.current().integrate(&integrand)
}

/// The finite probe family standing in for the universal quantifier of the
/// field equivalence relation: every constant basis block of λ, μ, ν (the
/// symmetric blocks symmetrized) plus the constant top-covector probe.
pub fn probe_densities(space: SpaceDescriptor) -> Vec<QuadraticDensity> {
    let m = space.dim();
    let n1 = crate::space::binomial(m, 1);
    let n2 = crate::space::binomial(m, 2);
    let mut probes = Vec::new();
    probes.push(
        QuadraticDensity::constant_form(space, GradedElement::odd_top_covector(space))
            .expect("valid probe"),
    );
    for i in 0..n1 {
        for j in i..n1 {
            let mut mat = DMatrix::zeros(n1, n1);
            mat[(i, j)] += 1.0;
            mat[(j, i)] += 1.0;
            let lambda = BilinearMap::new(space, 1, 1, mat).expect("shape");
            probes.push(
                QuadraticDensity::new(
                    space,
                    Block::Constant(lambda),
                    Block::Constant(BilinearMap::zero(space, 1, 2)),
                    Block::Constant(BilinearMap::zero(space, 2, 2)),
                )
                .expect("valid probe"),
            );
        }
    }
    for i in 0..n1 {
        for j in 0..n2 {
            let mut mat = DMatrix::zeros(n1, n2);
            mat[(i, j)] = 1.0;
            let mu = BilinearMap::new(space, 1, 2, mat).expect("shape");
            probes.push(
                QuadraticDensity::new(
                    space,
                    Block::Constant(BilinearMap::zero(space, 1, 1)),
                    Block::Constant(mu),
                    Block::Constant(BilinearMap::zero(space, 2, 2)),
                )
                .expect("valid probe"),
            );
        }
    }
    for i in 0..n2 {
        for j in i..n2 {
            let mut mat = DMatrix::zeros(n2, n2);
            mat[(i, j)] += 1.0;
            mat[(j, i)] += 1.0;
            let nu = BilinearMap::new(space, 2, 2, mat).expect("shape");
            probes.push(
                QuadraticDensity::new(
                    space,
                    Block::Constant(BilinearMap::zero(space, 1, 1)),
                    Block::Constant(BilinearMap::zero(space, 1, 2)),
                    Block::Constant(nu),
                )
                .expect("valid probe"),
            );
        }
    }
    probes
}

/// Whether the probe family fails to separate two field representatives.
pub fn fields_equivalent(q1: &FieldRep, q2: &FieldRep, tol: f64) -> Result<bool> {
    for probe in probe_densities(q1.potential().space()) {
        if (k_eval(&probe, q1)? - k_eval(&probe, q2)?).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
