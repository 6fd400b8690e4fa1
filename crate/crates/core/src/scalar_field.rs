//! Scalar coefficient functions with exact recursive partial derivatives.
//!
//! Differential-form coefficients in the built-in field families are drawn
//! from a small closed class (polynomials, plane waves, radial rationals and
//! their sums/products), so exterior derivatives of any order evaluate to
//! machine precision instead of through finite differences.

use std::collections::BTreeMap;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn ScalarField>;

pub trait ScalarField: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    /// Exact partial derivative along an axis, as another field.
    fn partial(&self, axis: usize) -> ScalarFn;
    /// Structural zero detection, used to prune derivative trees.
    fn is_zero(&self) -> bool {
        false
    }
    /// Scales the field by a constant, staying in the same representation.
    fn scaled(&self, factor: f64) -> ScalarFn;
}

/// The identically zero field.
#[derive(Clone, Debug)]
pub struct Zero;

impl ScalarField for Zero {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn partial(&self, _axis: usize) -> ScalarFn {
        Arc::new(Zero)
    }
    fn is_zero(&self) -> bool {
        true
    }
    fn scaled(&self, _factor: f64) -> ScalarFn {
        Arc::new(Zero)
    }
}

#[derive(Clone, Debug)]
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn value(&self, _x: &[f64]) -> f64 {
        self.0
    }
    fn partial(&self, _axis: usize) -> ScalarFn {
        Arc::new(Zero)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn scaled(&self, factor: f64) -> ScalarFn {
        Arc::new(Constant(self.0 * factor))
    }
}

/// Multivariate polynomial in canonical form: exponent tuple -> coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        let mut p = Self::zero(dim);
        if value != 0.0 {
            p.terms.insert(vec![0; dim], value);
        }
        p
    }

    /// The coordinate monomial `x_axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut exps = vec![0u32; dim];
        exps[axis] = 1;
        let mut p = Self::zero(dim);
        p.terms.insert(exps, 1.0);
        p
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: f64) {
        assert_eq!(exponents.len(), self.dim);
        let entry = self.terms.entry(exponents).or_insert(0.0);
        *entry += coeff;
        // drop exact zeros so canonical form stays minimal
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn plus(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        out
    }

    pub fn times_monomial(&self, axis: usize) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[axis] += 1;
            out.terms.insert(e2, *c);
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Poly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out
    }

    pub fn derivative(&self, axis: usize) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            if e[axis] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[axis] -= 1;
            out.terms.insert(e2, c * f64::from(e[axis]));
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (axis, &p) in e.iter().enumerate() {
                for _ in 0..p {
                    t *= x[axis];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn is_structural_zero(&self) -> bool {
        self.terms.values().all(|c| *c == 0.0)
    }
}

impl ScalarField for Poly {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
    fn partial(&self, axis: usize) -> ScalarFn {
        Arc::new(self.derivative(axis))
    }
    fn is_zero(&self) -> bool {
        self.is_structural_zero()
    }
    fn scaled(&self, factor: f64) -> ScalarFn {
        Arc::new(self.scale(factor))
    }
}

/// `a·cos(k·x) + b·sin(k·x)` for a fixed wave covector `k`.
#[derive(Clone, Debug)]
pub struct Wave {
    pub cos_amp: f64,
    pub sin_amp: f64,
    pub k: Vec<f64>,
}

impl Wave {
    pub fn cosine(amp: f64, k: Vec<f64>) -> Self {
        Self {
            cos_amp: amp,
            sin_amp: 0.0,
            k,
        }
    }
}

impl ScalarField for Wave {
    fn value(&self, x: &[f64]) -> f64 {
        let theta: f64 = self.k.iter().zip(x).map(|(k, x)| k * x).sum();
        self.cos_amp * theta.cos() + self.sin_amp * theta.sin()
    }
    fn partial(&self, axis: usize) -> ScalarFn {
        let k_mu = self.k[axis];
        Arc::new(Wave {
            cos_amp: self.sin_amp * k_mu,
            sin_amp: -self.cos_amp * k_mu,
            k: self.k.clone(),
        })
    }
    fn is_zero(&self) -> bool {
        self.cos_amp == 0.0 && self.sin_amp == 0.0
    }
    fn scaled(&self, factor: f64) -> ScalarFn {
        Arc::new(Wave {
            cos_amp: self.cos_amp * factor,
            sin_amp: self.sin_amp * factor,
            k: self.k.clone(),
        })
    }
}

/// `Σ_n P_n(x) / r^n` where `r² = Σ_{axes} x_axis²`. Closed under partial
/// derivatives, which is what the Coulomb family needs.
#[derive(Clone, Debug)]
pub struct RadialPoly {
    dim: usize,
    axes: Vec<usize>,
    terms: BTreeMap<i32, Poly>,
}

impl RadialPoly {
    pub fn new(dim: usize, axes: Vec<usize>) -> Self {
        Self {
            dim,
            axes,
            terms: BTreeMap::new(),
        }
    }

    pub fn with_term(mut self, power: i32, poly: Poly) -> Self {
        match self.terms.entry(power) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(poly);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = e.get().plus(&poly);
                e.insert(merged);
            }
        }
        self
    }

    fn r2(&self, x: &[f64]) -> f64 {
        self.axes.iter().map(|&a| x[a] * x[a]).sum()
    }
}

impl ScalarField for RadialPoly {
    fn value(&self, x: &[f64]) -> f64 {
        let r = self.r2(x).sqrt();
        let mut acc = 0.0;
        for (n, p) in &self.terms {
            acc += p.eval(x) * r.powi(-n);
        }
        acc
    }
    fn partial(&self, axis: usize) -> ScalarFn {
        let mut out = RadialPoly::new(self.dim, self.axes.clone());
        for (n, p) in &self.terms {
            let dp = p.derivative(axis);
            if !dp.is_structural_zero() {
                out = out.with_term(*n, dp);
            }
            if *n != 0 && self.axes.contains(&axis) {
                // d(r^-n)/dx = -n x r^(-n-2)
                out = out.with_term(n + 2, p.times_monomial(axis).scale(-f64::from(*n)));
            }
        }
        Arc::new(out)
    }
    fn is_zero(&self) -> bool {
        self.terms.values().all(|p| p.is_structural_zero())
    }
    fn scaled(&self, factor: f64) -> ScalarFn {
        let mut out = RadialPoly::new(self.dim, self.axes.clone());
        for (n, p) in &self.terms {
            out = out.with_term(*n, p.scale(factor));
        }
        Arc::new(out)
    }
}

/// Linear combination of fields. Coefficients stay at the outer level so that
/// structurally identical sub-values cancel exactly.
#[derive(Clone)]
pub struct LinComb {
    pub terms: Vec<(f64, ScalarFn)>,
}

impl LinComb {
    pub fn of(terms: Vec<(f64, ScalarFn)>) -> ScalarFn {
        let kept: Vec<(f64, ScalarFn)> = terms
            .into_iter()
            .filter(|(c, f)| *c != 0.0 && !f.is_zero())
            .collect();
        if kept.is_empty() {
            Arc::new(Zero)
        } else if kept.len() == 1 && kept[0].0 == 1.0 {
            kept.into_iter().next().expect("single term").1
        } else {
            Arc::new(LinComb { terms: kept })
        }
    }
}

impl ScalarField for LinComb {
    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(x)).sum()
    }
    fn partial(&self, axis: usize) -> ScalarFn {
        LinComb::of(
            self.terms
                .iter()
                .map(|(c, f)| (*c, f.partial(axis)))
                .collect(),
        )
    }
    fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, f)| *c == 0.0 || f.is_zero())
    }
    fn scaled(&self, factor: f64) -> ScalarFn {
        LinComb::of(
            self.terms
                .iter()
                .map(|(c, f)| (c * factor, f.clone()))
                .collect(),
        )
    }
}

/// Pointwise product with the Leibniz rule for partials.
#[derive(Clone)]
pub struct Product(pub ScalarFn, pub ScalarFn);

impl ScalarField for Product {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x) * self.1.value(x)
    }
    fn partial(&self, axis: usize) -> ScalarFn {
        LinComb::of(vec![
            (1.0, Arc::new(Product(self.0.partial(axis), self.1.clone())) as ScalarFn),
            (1.0, Arc::new(Product(self.0.clone(), self.1.partial(axis))) as ScalarFn),
        ])
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero() || self.1.is_zero()
    }
    fn scaled(&self, factor: f64) -> ScalarFn {
        Arc::new(Product(self.0.scaled(factor), self.1.clone()))
    }
}

/// Central-difference cross-check for a field's analytic partial.
pub fn fd_partial(field: &dyn ScalarField, x: &[f64], axis: usize, step: f64) -> f64 {
    let mut hi = x.to_vec();
    let mut lo = x.to_vec();
    hi[axis] += step;
    lo[axis] -= step;
    (field.value(&hi) - field.value(&lo)) / (2.0 * step)
}
