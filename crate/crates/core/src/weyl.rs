//! The Weyl isomorphism between even q-vectors tensored with odd m-covectors
//! and odd (m−q)-covectors, the i_q isomorphism with Hom spaces, and the
//! representation of odd-top-valued bilinear maps through exterior products.

use nalgebra::DMatrix;

use crate::algebra::GradedElement;
use crate::error::{Error, Result};
use crate::space::{binomial, complement, index_tuples, Kind, Parity, SpaceDescriptor};

/// A tensor `w ⊗ e` with `w` an even q-vector and `e` an odd m-covector.
///
/// Since the odd m-covector factor is one-dimensional, the normal form
/// absorbs the scale into `w` and fixes `e` to the unit odd top covector,
/// making `(λw) ⊗ e = w ⊗ (λe)` hold on the nose.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorQM {
    w: GradedElement,
    e: GradedElement,
}

impl TensorQM {
    pub fn new(w: GradedElement, e: GradedElement) -> Result<Self> {
        let space = w.space();
        space.same_space(&e.space())?;
        if w.kind() != Kind::Vector || w.parity() != Parity::Even {
            return Err(Error::KindMismatch {
                expected: "even q-vector factor",
            });
        }
        if e.kind() != Kind::Covector
            || e.parity() != Parity::Odd
            || e.grade() != space.dim()
        {
            return Err(Error::KindMismatch {
                expected: "odd m-covector factor",
            });
        }
        let scale = e.coeffs()[0];
        Ok(Self {
            w: w.scaled(scale),
            e: GradedElement::odd_top_covector(space),
        })
    }

    pub fn zero(space: SpaceDescriptor, q: usize) -> Result<Self> {
        Ok(Self {
            w: GradedElement::zero(space, Kind::Vector, Parity::Even, q)?,
            e: GradedElement::odd_top_covector(space),
        })
    }

    /// The even q-vector factor in normal form (scale absorbed).
    pub fn w(&self) -> &GradedElement {
        &self.w
    }

    /// The odd m-covector factor in normal form (always the unit).
    pub fn e(&self) -> &GradedElement {
        &self.e
    }

    pub fn grade(&self) -> usize {
        self.w.grade()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            w: self.w.try_add(&other.w)?,
            e: self.e.clone(),
        })
    }

    /// The pairing `⟨w ⊗ e, a ⊗ u⟩ = ⟨a, w⟩⟨e, u⟩` against a covector-vector
    /// tensor given by its two factors.
    pub fn pair(&self, a: &GradedElement, u: &GradedElement) -> Result<f64> {
        Ok(a.pair(&self.w)? * self.e.pair(u)?)
    }
}

/// A linear mapping from even q-covectors to odd m-covectors, stored as its
/// 1 × C(m,q) matrix in the canonical bases.
#[derive(Clone, Debug, PartialEq)]
pub struct HomQM {
    space: SpaceDescriptor,
    q: usize,
    row: Vec<f64>,
}

impl HomQM {
    pub fn new(space: SpaceDescriptor, q: usize, row: Vec<f64>) -> Result<Self> {
        let expected = binomial(space.dim(), q);
        if row.len() != expected {
            return Err(Error::ShapeMismatch {
                expected_rows: 1,
                expected_cols: expected,
                rows: 1,
                cols: row.len(),
            });
        }
        Ok(Self { space, q, row })
    }

    pub fn zero(space: SpaceDescriptor, q: usize) -> Self {
        Self {
            space,
            q,
            row: vec![0.0; binomial(space.dim(), q)],
        }
    }

    pub fn row(&self) -> &[f64] {
        &self.row
    }

    pub fn grade(&self) -> usize {
        self.q
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    /// Applies the mapping to an even q-covector, producing an odd m-covector.
    pub fn apply(&self, a: &GradedElement) -> Result<GradedElement> {
        self.space.same_space(&a.space())?;
        if a.grade() != self.q {
            return Err(Error::GradeMismatch {
                left: a.grade(),
                right: self.q,
            });
        }
        if a.kind() != Kind::Covector || a.parity() != Parity::Even {
            return Err(Error::KindMismatch {
                expected: "even q-covector argument",
            });
        }
        let value: f64 = self.row.iter().zip(a.coeffs()).map(|(l, c)| l * c).sum();
        Ok(GradedElement::odd_top_covector(self.space).scaled(value))
    }
}

/// The Weyl map `We_q(w ⊗ e) = w ⌟ e`, an odd (m−q)-covector.
pub fn weyl_map(t: &TensorQM) -> Result<GradedElement> {
    t.w().interior_left(t.e())
}

/// Direct minor-expansion form of the Weyl map: the sum over increasing
/// q-tuples ν with sign `(−1)^{Σ(ν_i − i)}`, coefficient `⟨e^ν, w⟩`, and the
/// complementary (m−q)-tuple as the surviving covector. This is the
/// independent oracle for [`weyl_map`].
pub fn minor_expansion(w: &GradedElement, e: &GradedElement) -> Result<GradedElement> {
    let space = w.space();
    space.same_space(&e.space())?;
    if w.kind() != Kind::Vector || w.parity() != Parity::Even {
        return Err(Error::KindMismatch {
            expected: "even q-vector",
        });
    }
    if e.kind() != Kind::Covector || e.parity() != Parity::Odd || e.grade() != space.dim() {
        return Err(Error::KindMismatch {
            expected: "odd m-covector",
        });
    }
    let m = space.dim();
    let q = w.grade();
    let scale = e.coeffs()[0];
    let mut out = GradedElement::zero(space, Kind::Covector, Parity::Odd, m - q)?;
    for (i, nu) in index_tuples(m, q).iter().enumerate() {
        // positions are 0-based; the 1-based exponent Σ(ν_i − i) becomes Σ p_i − q(q−1)/2
        let exponent = nu.iter().sum::<usize>() - q * (q.saturating_sub(1)) / 2;
        let sign = if exponent % 2 == 0 { 1.0 } else { -1.0 };
        let comp = complement(m, nu);
        out.set_coeff(&comp, sign * w.coeffs()[i] * scale);
    }
    Ok(out)
}

/// Matrix of the Weyl map in the canonical bases: column S holds the
/// coefficients of `We_q(e_S ⊗ unit)`. Square of size C(m,q).
pub fn weyl_matrix(space: SpaceDescriptor, q: usize) -> DMatrix<f64> {
    let m = space.dim();
    let n = binomial(m, q);
    let mut mat = DMatrix::zeros(n, n);
    for col in 0..n {
        let mut w = GradedElement::zero(space, Kind::Vector, Parity::Even, q).expect("grade");
        w.coeffs_mut()[col] = 1.0;
        let img = minor_expansion(&w, &GradedElement::odd_top_covector(space)).expect("shapes");
        for (row, c) in img.coeffs().iter().enumerate() {
            mat[(row, col)] = *c;
        }
    }
    mat
}

/// The isomorphism `i_q` sending a Hom element to the tensor characterized by
/// `⟨i_q(l), a' ⊗ u⟩ = ⟨l(a'), u⟩`.
pub fn iq_forward(l: &HomQM) -> Result<TensorQM> {
    let space = l.space();
    let mut w = GradedElement::zero(space, Kind::Vector, Parity::Even, l.grade())?;
    w.coeffs_mut().copy_from_slice(l.row());
    TensorQM::new(w, GradedElement::odd_top_covector(space))
}

/// Inverse of [`iq_forward`]: reads the Hom matrix off the tensor's normal form.
pub fn iq_inverse(t: &TensorQM) -> Result<HomQM> {
    let space = t.w().space();
    HomQM::new(space, t.grade(), t.w().coeffs().to_vec())
}

/// A bilinear map `b : ∧_e^q V* × ∧_e^{q'} V* → ∧_o^m V*` stored as a dense
/// coefficient tensor against the unit odd top covector.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearMap {
    space: SpaceDescriptor,
    qa: usize,
    qb: usize,
    coeffs: DMatrix<f64>,
}

impl BilinearMap {
    pub fn new(space: SpaceDescriptor, qa: usize, qb: usize, coeffs: DMatrix<f64>) -> Result<Self> {
        let rows = binomial(space.dim(), qa);
        let cols = binomial(space.dim(), qb);
        if coeffs.nrows() != rows || coeffs.ncols() != cols {
            return Err(Error::ShapeMismatch {
                expected_rows: rows,
                expected_cols: cols,
                rows: coeffs.nrows(),
                cols: coeffs.ncols(),
            });
        }
        Ok(Self {
            space,
            qa,
            qb,
            coeffs,
        })
    }

    pub fn zero(space: SpaceDescriptor, qa: usize, qb: usize) -> Self {
        let rows = binomial(space.dim(), qa);
        let cols = binomial(space.dim(), qb);
        Self {
            space,
            qa,
            qb,
            coeffs: DMatrix::zeros(rows, cols),
        }
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn grades(&self) -> (usize, usize) {
        (self.qa, self.qb)
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn symmetry_deviation(&self) -> f64 {
        if self.qa != self.qb {
            return f64::INFINITY;
        }
        let diff = &self.coeffs - self.coeffs.transpose();
        diff.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn check_arg(&self, a: &GradedElement, grade: usize) -> Result<()> {
        self.space.same_space(&a.space())?;
        if a.grade() != grade {
            return Err(Error::GradeMismatch {
                left: a.grade(),
                right: grade,
            });
        }
        if a.kind() != Kind::Covector || a.parity() != Parity::Even {
            return Err(Error::KindMismatch {
                expected: "even covector argument",
            });
        }
        Ok(())
    }

    /// Direct evaluation `b(a, a')` as an odd m-covector.
    pub fn eval(&self, a: &GradedElement, aprime: &GradedElement) -> Result<GradedElement> {
        self.check_arg(a, self.qa)?;
        self.check_arg(aprime, self.qb)?;
        let mut value = 0.0;
        for (i, ai) in a.coeffs().iter().enumerate() {
            if *ai == 0.0 {
                continue;
            }
            for (j, bj) in aprime.coeffs().iter().enumerate() {
                value += ai * self.coeffs[(i, j)] * bj;
            }
        }
        Ok(GradedElement::odd_top_covector(self.space).scaled(value))
    }

    /// The associated mapping `b̄ : a ↦ i_{q'}(b(a, ·))`.
    pub fn bar(&self, a: &GradedElement) -> Result<TensorQM> {
        self.check_arg(a, self.qa)?;
        let mut w = GradedElement::zero(self.space, Kind::Vector, Parity::Even, self.qb)?;
        for j in 0..self.coeffs.ncols() {
            let mut acc = 0.0;
            for (i, ai) in a.coeffs().iter().enumerate() {
                acc += ai * self.coeffs[(i, j)];
            }
            w.coeffs_mut()[j] = acc;
        }
        TensorQM::new(w, GradedElement::odd_top_covector(self.space))
    }

    /// The associated mapping `b̿ : a' ↦ i_q(b(·, a'))`.
    pub fn barbar(&self, aprime: &GradedElement) -> Result<TensorQM> {
        self.check_arg(aprime, self.qb)?;
        let mut w = GradedElement::zero(self.space, Kind::Vector, Parity::Even, self.qa)?;
        for i in 0..self.coeffs.nrows() {
            let mut acc = 0.0;
            for (j, bj) in aprime.coeffs().iter().enumerate() {
                acc += self.coeffs[(i, j)] * bj;
            }
            w.coeffs_mut()[i] = acc;
        }
        TensorQM::new(w, GradedElement::odd_top_covector(self.space))
    }

    /// Constant matrix of the composite `a ↦ We_{q'}(b̄(a))`, mapping q-covector
    /// coefficients to odd (m−q')-covector coefficients.
    pub fn we_bar_matrix(&self) -> DMatrix<f64> {
        weyl_matrix(self.space, self.qb) * self.coeffs.transpose()
    }

    /// Constant matrix of the composite `a' ↦ We_q(b̿(a'))`.
    pub fn we_barbar_matrix(&self) -> DMatrix<f64> {
        weyl_matrix(self.space, self.qa) * &self.coeffs
    }
}

/// The two representations of Proposition 2: closures computing
/// `a' ∧ We_{q'}(b̄(a))` and `a ∧ We_q(b̿(a'))`, which both reproduce `b(a, a')`.
pub fn represent_bilinear(
    b: &BilinearMap,
) -> (
    impl Fn(&GradedElement, &GradedElement) -> Result<GradedElement> + '_,
    impl Fn(&GradedElement, &GradedElement) -> Result<GradedElement> + '_,
) {
    let via_bar = move |a: &GradedElement, aprime: &GradedElement| -> Result<GradedElement> {
        aprime.wedge(&weyl_map(&b.bar(a)?)?)
    };
    let via_barbar = move |a: &GradedElement, aprime: &GradedElement| -> Result<GradedElement> {
        a.wedge(&weyl_map(&b.barbar(aprime)?)?)
    };
    (via_bar, via_barbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Orientation;

    fn std_space(m: usize) -> SpaceDescriptor {
        SpaceDescriptor::new(m).unwrap()
    }

    fn dyadic(seed: &mut u64) -> f64 {
        *seed ^= *seed << 13;
        *seed ^= *seed >> 7;
        *seed ^= *seed << 17;
        ((*seed % 257) as f64 - 128.0) / 64.0
    }

    #[test]
    fn tensor_normal_form_balances_scale() {
        let s = std_space(3);
        let w = GradedElement::basis(s, Kind::Vector, Parity::Even, &[1, 2]).unwrap();
        let e = GradedElement::odd_top_covector(s);
        let lhs = TensorQM::new(w.scaled(2.5), e.clone()).unwrap();
        let rhs = TensorQM::new(w, e.scaled(2.5)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn minor_expansion_m2_instances() {
        let s = std_space(2);
        let e = GradedElement::odd_top_covector(s);
        // w = e_1: single term ν = (1), sign (−1)^0, complement (2)
        let w1 = GradedElement::basis(s, Kind::Vector, Parity::Even, &[1]).unwrap();
        let r1 = minor_expansion(&w1, &e).unwrap();
        assert_eq!(r1.coeff_at(&[1]), 1.0);
        assert_eq!(r1.coeff_at(&[0]), 0.0);
        // w = e_2: ν = (2), sign (−1)^1, complement (1)
        let w2 = GradedElement::basis(s, Kind::Vector, Parity::Even, &[2]).unwrap();
        let r2 = minor_expansion(&w2, &e).unwrap();
        assert_eq!(r2.coeff_at(&[0]), -1.0);
        // linearity through zero
        let z = GradedElement::zero(s, Kind::Vector, Parity::Even, 1).unwrap();
        assert!(minor_expansion(&z, &e).unwrap().is_zero(0.0));
    }

    #[test]
    fn weyl_map_agrees_with_minor_expansion() {
        for m in 2..=5 {
            let s = std_space(m);
            let e = GradedElement::odd_top_covector(s);
            let mut seed = 0x9e3779b9u64 + m as u64;
            for q in 0..=m {
                for _ in 0..20 {
                    let mut w = GradedElement::zero(s, Kind::Vector, Parity::Even, q).unwrap();
                    for c in w.coeffs_mut() {
                        *c = dyadic(&mut seed);
                    }
                    let t = TensorQM::new(w.clone(), e.clone()).unwrap();
                    let lhs = weyl_map(&t).unwrap();
                    let rhs = minor_expansion(&w, &e).unwrap();
                    let diff = lhs.try_sub(&rhs).unwrap();
                    assert!(diff.sup_norm() < 1e-12, "m={m} q={q}");
                }
            }
        }
    }

    #[test]
    fn weyl_map_fixed_instance_m4() {
        // w = e_1 ∧ e_2 against the unit odd 4-covector: +e_o ∧ e^3 ∧ e^4
        let s = std_space(4);
        let w = GradedElement::basis(s, Kind::Vector, Parity::Even, &[1, 2]).unwrap();
        let t = TensorQM::new(w, GradedElement::odd_top_covector(s)).unwrap();
        let r = weyl_map(&t).unwrap();
        assert_eq!(r.coeff_at(&[2, 3]), 1.0);
        assert_eq!(r.parity(), Parity::Odd);
    }

    #[test]
    fn weyl_map_degenerate_grades() {
        let s = std_space(3);
        // q = 0: 1 ⊗ e → e
        let one = {
            let mut z = GradedElement::zero(s, Kind::Vector, Parity::Even, 0).unwrap();
            z.coeffs_mut()[0] = 1.0;
            z
        };
        let e = GradedElement::odd_top_covector(s);
        let t = TensorQM::new(one, e.clone()).unwrap();
        assert_eq!(weyl_map(&t).unwrap(), e);
        // q = m: u ⊗ e → odd 0-covector with value ⟨e, u⟩
        let u = GradedElement::odd_top_vector(s);
        // the tensor factor must be even; use the coefficient table directly
        let mut u_even = GradedElement::zero(s, Kind::Vector, Parity::Even, 3).unwrap();
        u_even.coeffs_mut()[0] = 2.0;
        let t = TensorQM::new(u_even, e.clone()).unwrap();
        let r = weyl_map(&t).unwrap();
        assert_eq!(r.grade(), 0);
        assert_eq!(r.parity(), Parity::Odd);
        assert_eq!(r.coeffs()[0], 2.0 * e.pair(&u).unwrap());
    }

    #[test]
    fn weyl_matrix_is_invertible() {
        for m in 1..=5 {
            let s = std_space(m);
            for q in 0..=m {
                let mat = weyl_matrix(s, q);
                let n = binomial(m, q);
                assert_eq!((mat.nrows(), mat.ncols()), (n, n));
                assert!(mat.determinant().abs() > 1e-9, "m={m} q={q}");
            }
        }
    }

    #[test]
    fn iq_round_trip_and_characterization() {
        let s = std_space(3);
        let q = 1;
        let l = HomQM::new(s, q, vec![0.5, -2.0, 3.25]).unwrap();
        let t = iq_forward(&l).unwrap();
        assert_eq!(iq_inverse(&t).unwrap(), l);
        // ⟨i_q(l), a' ⊗ u⟩ = ⟨l(a'), u⟩ over the basis
        let u = GradedElement::odd_top_vector(s);
        for labels in [[1], [2], [3]] {
            let a = GradedElement::basis(s, Kind::Covector, Parity::Even, &labels).unwrap();
            let lhs = t.pair(&a, &u).unwrap();
            let rhs = l.apply(&a).unwrap().pair(&u).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
        // zero maps to the zero tensor
        let z = iq_forward(&HomQM::zero(s, q)).unwrap();
        assert!(z.w().is_zero(0.0));
    }

    #[test]
    fn iq_dimension_count_m2_q1() {
        let s = std_space(2);
        let l = HomQM::zero(s, 1);
        assert_eq!(l.row().len(), 2);
        let t = iq_forward(&l).unwrap();
        assert_eq!(t.w().coeffs().len(), 2);
    }

    #[test]
    fn lemma2_pairing_identity() {
        // ⟨a, w⟩ e = a ∧ We_q(w ⊗ e)
        let mut seed = 42u64;
        for m in 2..=4 {
            let s = std_space(m);
            for q in 0..=m {
                let mut a = GradedElement::zero(s, Kind::Covector, Parity::Even, q).unwrap();
                let mut w = GradedElement::zero(s, Kind::Vector, Parity::Even, q).unwrap();
                for c in a.coeffs_mut() {
                    *c = dyadic(&mut seed);
                }
                for c in w.coeffs_mut() {
                    *c = dyadic(&mut seed);
                }
                let e = GradedElement::odd_top_covector(s).scaled(dyadic(&mut seed));
                let t = TensorQM::new(w.clone(), e.clone()).unwrap();
                let lhs = e.scaled(a.pair(&w).unwrap());
                let rhs = a.wedge(&weyl_map(&t).unwrap()).unwrap();
                assert!(lhs.try_sub(&rhs).unwrap().sup_norm() < 1e-12, "m={m} q={q}");
            }
        }
    }

    #[test]
    fn lemma3_hom_identity() {
        // l(a) = a ∧ We_q(i_q(l))
        let mut seed = 7u64;
        for m in 2..=4 {
            let s = std_space(m);
            for q in 0..=m {
                let row: Vec<f64> = (0..binomial(m, q)).map(|_| dyadic(&mut seed)).collect();
                let l = HomQM::new(s, q, row).unwrap();
                let t = iq_forward(&l).unwrap();
                let we = weyl_map(&t).unwrap();
                let mut a = GradedElement::zero(s, Kind::Covector, Parity::Even, q).unwrap();
                for c in a.coeffs_mut() {
                    *c = dyadic(&mut seed);
                }
                let lhs = l.apply(&a).unwrap();
                let rhs = a.wedge(&we).unwrap();
                assert!(lhs.try_sub(&rhs).unwrap().sup_norm() < 1e-12, "m={m} q={q}");
            }
        }
    }

    #[test]
    fn prop2_both_representations() {
        let mut seed = 99u64;
        let s = std_space(4);
        for (qa, qb) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
            let rows = binomial(4, qa);
            let cols = binomial(4, qb);
            let data: Vec<f64> = (0..rows * cols).map(|_| dyadic(&mut seed)).collect();
            let b = BilinearMap::new(s, qa, qb, DMatrix::from_row_slice(rows, cols, &data)).unwrap();
            let (via_bar, via_barbar) = represent_bilinear(&b);
            for _ in 0..5 {
                let mut a = GradedElement::zero(s, Kind::Covector, Parity::Even, qa).unwrap();
                let mut ap = GradedElement::zero(s, Kind::Covector, Parity::Even, qb).unwrap();
                for c in a.coeffs_mut() {
                    *c = dyadic(&mut seed);
                }
                for c in ap.coeffs_mut() {
                    *c = dyadic(&mut seed);
                }
                let direct = b.eval(&a, &ap).unwrap();
                let one = via_bar(&a, &ap).unwrap();
                let two = via_barbar(&a, &ap).unwrap();
                assert!(direct.try_sub(&one).unwrap().sup_norm() < 1e-12);
                assert!(direct.try_sub(&two).unwrap().sup_norm() < 1e-12);
            }
        }
        // zero map gives zero representations
        let b0 = BilinearMap::zero(s, 2, 2);
        let t = b0
            .bar(&GradedElement::basis(s, Kind::Covector, Parity::Even, &[1, 2]).unwrap())
            .unwrap();
        assert!(t.w().is_zero(0.0));
    }

    #[test]
    fn symmetric_bilinear_bar_equals_barbar() {
        let s = std_space(3);
        let data = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, 2.0, -1.0, 4.0, 0.5, 4.0, 3.0]);
        let b = BilinearMap::new(s, 1, 1, data).unwrap();
        assert_eq!(b.symmetry_deviation(), 0.0);
        let a = GradedElement::basis(s, Kind::Covector, Parity::Even, &[2]).unwrap();
        assert_eq!(b.bar(&a).unwrap(), b.barbar(&a).unwrap());
    }

    #[test]
    fn weyl_output_parity_flips_with_orientation() {
        let s = std_space(2);
        let w = GradedElement::basis(s, Kind::Vector, Parity::Even, &[1]).unwrap();
        let t = TensorQM::new(w, GradedElement::odd_top_covector(s)).unwrap();
        let r = weyl_map(&t).unwrap();
        let at_p = r.reorient(Orientation::Opposite);
        assert_eq!(at_p.coeff_at(&[1]), -r.coeff_at(&[1]));
    }
}
