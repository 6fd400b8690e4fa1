//! Even/odd multivectors and multicovectors over a finite-dimensional space:
//! pairings, exterior products, interior products, and reorientation.
//!
//! Every element stores its coefficient table at the reference orientation of
//! its space descriptor; orientation dependence is reconstructed by
//! [`GradedElement::reorient`]. Coefficients are keyed by strictly increasing
//! index tuples, so equality is plain table comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{
    binomial, index_tuples, merge_with_sign, sort_with_sign, tuple_rank, Kind, Orientation,
    Parity, SpaceDescriptor,
};

/// A q-vector or q-covector of definite parity, with coefficients on the
/// strictly increasing basis tuples, stored at the reference orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedElement {
    space: SpaceDescriptor,
    kind: Kind,
    parity: Parity,
    grade: usize,
    /// Dense coefficients, indexed by the lexicographic rank of the tuple.
    coeffs: Vec<f64>,
}

impl GradedElement {
    pub fn zero(space: SpaceDescriptor, kind: Kind, parity: Parity, grade: usize) -> Result<Self> {
        if grade > space.dim() {
            return Err(Error::GradeOutOfRange {
                grade,
                dim: space.dim(),
            });
        }
        Ok(Self {
            space,
            kind,
            parity,
            grade,
            coeffs: vec![0.0; binomial(space.dim(), grade)],
        })
    }

    /// A basis element `e_{labels}` (or `e^{labels}` for covectors) with
    /// coefficient 1. Labels must be given in the descriptor's label range;
    /// out-of-order labels are normalized with the permutation sign.
    pub fn basis(
        space: SpaceDescriptor,
        kind: Kind,
        parity: Parity,
        labels: &[usize],
    ) -> Result<Self> {
        let mut el = Self::zero(space, kind, parity, labels.len())?;
        let positions: Vec<usize> = labels
            .iter()
            .map(|&l| space.position(l))
            .collect::<Result<_>>()?;
        match sort_with_sign(&positions) {
            Some((sign, sorted)) => {
                let rank = tuple_rank(space.dim(), &sorted);
                el.coeffs[rank] = sign;
                Ok(el)
            }
            // repeated index wedges to zero
            None => Ok(el),
        }
    }

    /// The even 0-covector `e_e` (value 1 at both orientations).
    pub fn even_unit(space: SpaceDescriptor) -> Self {
        let mut el = Self::zero(space, Kind::Covector, Parity::Even, 0).expect("grade 0");
        el.coeffs[0] = 1.0;
        el
    }

    /// The odd 0-covector `e_o` (value 1 at the reference orientation).
    pub fn odd_unit(space: SpaceDescriptor) -> Self {
        let mut el = Self::zero(space, Kind::Covector, Parity::Odd, 0).expect("grade 0");
        el.coeffs[0] = 1.0;
        el
    }

    /// The unit odd m-covector `e_o ∧ e^1 ∧ … ∧ e^m`.
    pub fn odd_top_covector(space: SpaceDescriptor) -> Self {
        let mut el =
            Self::zero(space, Kind::Covector, Parity::Odd, space.dim()).expect("grade m");
        el.coeffs[0] = 1.0;
        el
    }

    /// The unit odd m-vector dual to [`Self::odd_top_covector`].
    pub fn odd_top_vector(space: SpaceDescriptor) -> Self {
        let mut el = Self::zero(space, Kind::Vector, Parity::Odd, space.dim()).expect("grade m");
        el.coeffs[0] = 1.0;
        el
    }

    /// Builds an element from (position tuple, coefficient) pairs. Tuples must
    /// be 0-based positions; they are normalized by sorting with sign.
    pub fn from_position_coeffs(
        space: SpaceDescriptor,
        kind: Kind,
        parity: Parity,
        grade: usize,
        entries: &[(Vec<usize>, f64)],
    ) -> Result<Self> {
        let mut el = Self::zero(space, kind, parity, grade)?;
        for (tuple, value) in entries {
            if tuple.len() != grade {
                return Err(Error::GradeMismatch {
                    left: tuple.len(),
                    right: grade,
                });
            }
            for &p in tuple {
                if p >= space.dim() {
                    return Err(Error::LabelOutOfRange {
                        label: p + space.label_base(),
                        dim: space.dim(),
                    });
                }
            }
            if let Some((sign, sorted)) = sort_with_sign(tuple) {
                el.coeffs[tuple_rank(space.dim(), &sorted)] += sign * value;
            }
        }
        Ok(el)
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    /// Coefficient slice in lexicographic tuple order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient at a strictly increasing 0-based position tuple.
    pub fn coeff_at(&self, positions: &[usize]) -> f64 {
        self.coeffs[tuple_rank(self.space.dim(), positions)]
    }

    pub fn set_coeff(&mut self, positions: &[usize], value: f64) {
        let rank = tuple_rank(self.space.dim(), positions);
        self.coeffs[rank] = value;
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.sup_norm() <= tol
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= factor;
        }
        out
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        self.space.same_space(&other.space)?;
        if self.grade != other.grade {
            return Err(Error::GradeMismatch {
                left: self.grade,
                right: other.grade,
            });
        }
        if self.parity != other.parity {
            return Err(Error::ParityMismatch);
        }
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                expected: "matching kinds",
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c -= o;
        }
        Ok(out)
    }

    /// Evaluation of a q-covector on a q-vector of the same parity: the sum of
    /// coefficient products over increasing tuples.
    pub fn pair(&self, w: &GradedElement) -> Result<f64> {
        if self.kind != Kind::Covector {
            return Err(Error::KindMismatch {
                expected: "covector on the left of the pairing",
            });
        }
        if w.kind != Kind::Vector {
            return Err(Error::KindMismatch {
                expected: "vector on the right of the pairing",
            });
        }
        self.space.same_space(&w.space)?;
        if self.grade != w.grade {
            return Err(Error::GradeMismatch {
                left: self.grade,
                right: w.grade,
            });
        }
        if self.parity != w.parity {
            return Err(Error::ParityMismatch);
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&w.coeffs)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Exterior product. The parity is odd exactly when one factor is odd; the
    /// grade is the sum of grades, which must not exceed the dimension.
    pub fn wedge(&self, other: &GradedElement) -> Result<GradedElement> {
        self.space.same_space(&other.space)?;
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                expected: "factors of the same kind",
            });
        }
        let m = self.space.dim();
        let grade = self.grade + other.grade;
        if grade > m {
            return Err(Error::GradeOverflow {
                left: self.grade,
                right: other.grade,
                dim: m,
            });
        }
        let mut out = GradedElement::zero(
            self.space,
            self.kind,
            self.parity.product(other.parity),
            grade,
        )?;
        let left_tuples = index_tuples(m, self.grade);
        let right_tuples = index_tuples(m, other.grade);
        for (i, lt) in left_tuples.iter().enumerate() {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            for (j, rt) in right_tuples.iter().enumerate() {
                let b = other.coeffs[j];
                if b == 0.0 {
                    continue;
                }
                if let Some((sign, merged)) = merge_with_sign(lt, rt) {
                    out.coeffs[tuple_rank(m, &merged)] += sign * a * b;
                }
            }
        }
        Ok(out)
    }

    /// Left interior product `w ⌟ a` of a q-vector with a q'-covector,
    /// `q <= q'`, characterized by `⟨w ⌟ a, w'⟩ = ⟨a, w ∧ w'⟩`. The result is
    /// a (q'-q)-covector whose parity is the product of the factor parities.
    pub fn interior_left(&self, a: &GradedElement) -> Result<GradedElement> {
        if self.kind != Kind::Vector {
            return Err(Error::KindMismatch {
                expected: "vector on the left of ⌟",
            });
        }
        if a.kind != Kind::Covector {
            return Err(Error::KindMismatch {
                expected: "covector on the right of ⌟",
            });
        }
        self.space.same_space(&a.space)?;
        if self.grade > a.grade {
            return Err(Error::InteriorGrade {
                lo: self.grade,
                hi: a.grade,
            });
        }
        let m = self.space.dim();
        let mut out = GradedElement::zero(
            self.space,
            Kind::Covector,
            self.parity.product(a.parity),
            a.grade - self.grade,
        )?;
        let w_tuples = index_tuples(m, self.grade);
        let t_tuples = index_tuples(m, a.grade - self.grade);
        for (ti, t) in t_tuples.iter().enumerate() {
            let mut acc = 0.0;
            for (si, s) in w_tuples.iter().enumerate() {
                let ws = self.coeffs[si];
                if ws == 0.0 {
                    continue;
                }
                if let Some((sign, merged)) = merge_with_sign(s, t) {
                    acc += sign * ws * a.coeffs[tuple_rank(m, &merged)];
                }
            }
            out.coeffs[ti] = acc;
        }
        Ok(out)
    }

    /// Right interior product `w ⌞ a` of a q-vector with a q'-covector,
    /// `q >= q'`, characterized by `⟨a', w ⌞ a⟩ = ⟨a' ∧ a, w⟩`. The adjunction
    /// forces the result to be a (q-q')-vector of the product parity, against
    /// which the (q-q')-covectors a' are paired.
    pub fn interior_right(&self, a: &GradedElement) -> Result<GradedElement> {
        if self.kind != Kind::Vector {
            return Err(Error::KindMismatch {
                expected: "vector on the left of ⌞",
            });
        }
        if a.kind != Kind::Covector {
            return Err(Error::KindMismatch {
                expected: "covector on the right of ⌞",
            });
        }
        self.space.same_space(&a.space)?;
        if a.grade > self.grade {
            return Err(Error::UnbalancedAdjunction {
                aprime: 0,
                a: a.grade,
                w: self.grade,
            });
        }
        let m = self.space.dim();
        let mut out = GradedElement::zero(
            self.space,
            Kind::Vector,
            self.parity.product(a.parity),
            self.grade - a.grade,
        )?;
        let t_tuples = index_tuples(m, self.grade - a.grade);
        let s_tuples = index_tuples(m, a.grade);
        for (ti, t) in t_tuples.iter().enumerate() {
            let mut acc = 0.0;
            for (si, s) in s_tuples.iter().enumerate() {
                let as_ = a.coeffs[si];
                if as_ == 0.0 {
                    continue;
                }
                if let Some((sign, merged)) = merge_with_sign(t, s) {
                    acc += sign * as_ * self.coeffs[tuple_rank(m, &merged)];
                }
            }
            out.coeffs[ti] = acc;
        }
        Ok(out)
    }

    /// Coefficient table of the element as evaluated at the orientation `o`:
    /// even elements are orientation-independent, odd elements flip sign at
    /// the non-reference orientation.
    pub fn reorient(&self, o: Orientation) -> GradedElement {
        match self.parity {
            Parity::Even => self.clone(),
            Parity::Odd => self.scaled(o.odd_sign()),
        }
    }

    /// The complementary-tuple dual used by integration: pairs this element's
    /// coefficients against those of a same-shape element.
    pub fn coeff_dot(&self, other: &[f64]) -> f64 {
        self.coeffs.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    /// Serializable view with labels joined per the descriptor convention.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(GradedElementRepr::from(self)).expect("serializable")
    }

    pub fn from_json_value(value: &serde_json::Value) -> Result<Self> {
        let repr: GradedElementRepr = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidFieldSpec(e.to_string()))?;
        repr.try_into()
    }
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tuples = index_tuples(self.space.dim(), self.grade);
        let mut first = true;
        for (i, t) in tuples.iter().enumerate() {
            if self.coeffs[i] == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let labels: Vec<String> = t
                .iter()
                .map(|p| (p + self.space.label_base()).to_string())
                .collect();
            write!(f, "{}*[{}]", self.coeffs[i], labels.join(","))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &GradedElement {
    type Output = GradedElement;
    fn add(self, rhs: &GradedElement) -> GradedElement {
        self.try_add(rhs).expect("incompatible operands")
    }
}

impl Sub for &GradedElement {
    type Output = GradedElement;
    fn sub(self, rhs: &GradedElement) -> GradedElement {
        self.try_sub(rhs).expect("incompatible operands")
    }
}

impl Neg for &GradedElement {
    type Output = GradedElement;
    fn neg(self) -> GradedElement {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &GradedElement {
    type Output = GradedElement;
    fn mul(self, rhs: f64) -> GradedElement {
        self.scaled(rhs)
    }
}

/// Wire format: `{"kind","parity","grade","dim","coeffs":{"0,1":…}}` with
/// coefficient keys as comma-joined ascending basis labels. `label_base`
/// records whether labels start at 0 (Minkowski mode) or 1.
#[derive(Serialize, Deserialize)]
struct GradedElementRepr {
    kind: Kind,
    parity: Parity,
    grade: usize,
    dim: usize,
    #[serde(default)]
    label_base: usize,
    coeffs: BTreeMap<String, f64>,
}

impl From<&GradedElement> for GradedElementRepr {
    fn from(el: &GradedElement) -> Self {
        let mut coeffs = BTreeMap::new();
        for (i, t) in index_tuples(el.space.dim(), el.grade).iter().enumerate() {
            if el.coeffs[i] != 0.0 {
                let key = t
                    .iter()
                    .map(|p| (p + el.space.label_base()).to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                coeffs.insert(key, el.coeffs[i]);
            }
        }
        Self {
            kind: el.kind,
            parity: el.parity,
            grade: el.grade,
            dim: el.space.dim(),
            label_base: el.space.label_base(),
            coeffs,
        }
    }
}

impl TryFrom<GradedElementRepr> for GradedElement {
    type Error = Error;

    fn try_from(repr: GradedElementRepr) -> Result<Self> {
        let space = match repr.label_base {
            0 if repr.dim == 4 => SpaceDescriptor::minkowski(),
            0 => {
                return Err(Error::InvalidFieldSpec(
                    "label_base 0 is only defined for dimension 4".into(),
                ))
            }
            1 => SpaceDescriptor::new(repr.dim)?,
            other => {
                return Err(Error::InvalidFieldSpec(format!(
                    "unsupported label_base {other}"
                )))
            }
        };
        let mut el = GradedElement::zero(space, repr.kind, repr.parity, repr.grade)?;
        for (key, value) in &repr.coeffs {
            let labels: Vec<usize> = if key.is_empty() {
                Vec::new()
            } else {
                key.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidFieldSpec(format!("bad tuple key {key:?}")))
                    })
                    .collect::<Result<_>>()?
            };
            if labels.len() != repr.grade {
                return Err(Error::InvalidFieldSpec(format!(
                    "tuple {key:?} has length {} but grade is {}",
                    labels.len(),
                    repr.grade
                )));
            }
            let positions: Vec<usize> = labels
                .iter()
                .map(|&l| space.position(l))
                .collect::<Result<_>>()?;
            for w in positions.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidFieldSpec(format!(
                        "tuple {key:?} is not strictly increasing"
                    )));
                }
            }
            el.coeffs[tuple_rank(space.dim(), &positions)] = *value;
        }
        Ok(el)
    }
}
