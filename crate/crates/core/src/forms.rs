//! Differential forms on an affine space, exterior derivative, cells and
//! chains with boundary and integration, and de Rham currents (chain-backed,
//! cube-domain and Dirac).
//!
//! Forms are covector fields. A form either carries symbolic coefficient
//! functions (exact derivatives of every order) or a plain evaluator with a
//! central finite-difference fallback for its derivative.

use std::sync::Arc;

use crate::algebra::GradedElement;
use crate::error::{Error, Result};
use crate::quadrature::integrate_unit_cube;
use crate::scalar_field::{LinComb, Product, ScalarFn, Zero};
use crate::space::{index_tuples, merge_with_sign, tuple_rank, Kind, Orientation, Parity, SpaceDescriptor};

pub type PointFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;
type EvalFn = Arc<dyn Fn(&[f64]) -> GradedElement + Send + Sync>;

/// Default central-difference step for forms without analytic derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Clone)]
enum FormRepr {
    /// One scalar field per increasing coefficient tuple; partials are exact.
    Symbolic(Vec<ScalarFn>),
    /// Opaque evaluator; partials by central differences with the given step.
    Callback { eval: EvalFn, step: f64 },
}

/// A point-dependent q-covector field of definite parity.
#[derive(Clone)]
pub struct SmoothForm {
    space: SpaceDescriptor,
    parity: Parity,
    grade: usize,
    repr: FormRepr,
}

impl SmoothForm {
    pub fn zero(space: SpaceDescriptor, parity: Parity, grade: usize) -> Result<Self> {
        if grade > space.dim() {
            return Err(Error::GradeOutOfRange {
                grade,
                dim: space.dim(),
            });
        }
        let n = crate::space::binomial(space.dim(), grade);
        Ok(Self {
            space,
            parity,
            grade,
            repr: FormRepr::Symbolic(vec![Arc::new(Zero) as ScalarFn; n]),
        })
    }

    /// The constant field with the given covector value everywhere.
    pub fn constant(value: &GradedElement) -> Result<Self> {
        if value.kind() != Kind::Covector {
            return Err(Error::KindMismatch {
                expected: "covector field",
            });
        }
        let coeffs = value
            .coeffs()
            .iter()
            .map(|&c| {
                if c == 0.0 {
                    Arc::new(Zero) as ScalarFn
                } else {
                    Arc::new(crate::scalar_field::Constant(c)) as ScalarFn
                }
            })
            .collect();
        Ok(Self {
            space: value.space(),
            parity: value.parity(),
            grade: value.grade(),
            repr: FormRepr::Symbolic(coeffs),
        })
    }

    /// Builds a form from one scalar field per increasing coefficient tuple.
    pub fn from_fields(
        space: SpaceDescriptor,
        parity: Parity,
        grade: usize,
        fields: Vec<ScalarFn>,
    ) -> Result<Self> {
        let n = crate::space::binomial(space.dim(), grade);
        if fields.len() != n {
            return Err(Error::ShapeMismatch {
                expected_rows: 1,
                expected_cols: n,
                rows: 1,
                cols: fields.len(),
            });
        }
        if grade > space.dim() {
            return Err(Error::GradeOutOfRange {
                grade,
                dim: space.dim(),
            });
        }
        Ok(Self {
            space,
            parity,
            grade,
            repr: FormRepr::Symbolic(fields),
        })
    }

    /// Wraps an opaque evaluator; its exterior derivative falls back to
    /// central finite differences with the given step.
    pub fn from_callback<F>(
        space: SpaceDescriptor,
        parity: Parity,
        grade: usize,
        eval: F,
        fd_step: f64,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> GradedElement + Send + Sync + 'static,
    {
        if grade > space.dim() {
            return Err(Error::GradeOutOfRange {
                grade,
                dim: space.dim(),
            });
        }
        Ok(Self {
            space,
            parity,
            grade,
            repr: FormRepr::Callback {
                eval: Arc::new(eval),
                step: fd_step,
            },
        })
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn has_analytic_derivative(&self) -> bool {
        matches!(self.repr, FormRepr::Symbolic(_))
    }

    /// The covector value at a point, at the reference orientation.
    pub fn eval(&self, x: &[f64]) -> GradedElement {
        match &self.repr {
            FormRepr::Symbolic(fields) => {
                let mut el = GradedElement::zero(self.space, Kind::Covector, self.parity, self.grade)
                    .expect("valid grade");
                for (i, f) in fields.iter().enumerate() {
                    el.coeffs_mut()[i] = f.value(x);
                }
                el
            }
            FormRepr::Callback { eval, .. } => eval(x),
        }
    }

    /// Coefficient-wise partial derivatives along every axis.
    pub fn partials(&self, x: &[f64]) -> Vec<GradedElement> {
        match &self.repr {
            FormRepr::Symbolic(fields) => (0..self.space.dim())
                .map(|axis| {
                    let mut el =
                        GradedElement::zero(self.space, Kind::Covector, self.parity, self.grade)
                            .expect("valid grade");
                    for (i, f) in fields.iter().enumerate() {
                        el.coeffs_mut()[i] = f.partial(axis).value(x);
                    }
                    el
                })
                .collect(),
            FormRepr::Callback { eval, step } => (0..self.space.dim())
                .map(|axis| {
                    let mut hi = x.to_vec();
                    let mut lo = x.to_vec();
                    hi[axis] += step;
                    lo[axis] -= step;
                    eval(&hi)
                        .try_sub(&eval(&lo))
                        .expect("same shape")
                        .scaled(1.0 / (2.0 * step))
                })
                .collect(),
        }
    }

    /// Exterior derivative: grade q+1, same parity. Rejected at top grade.
    pub fn exterior_derivative(&self) -> Result<SmoothForm> {
        let m = self.space.dim();
        if self.grade >= m {
            return Err(Error::GradeOutOfRange {
                grade: self.grade + 1,
                dim: m,
            });
        }
        let grade = self.grade + 1;
        match &self.repr {
            FormRepr::Symbolic(fields) => {
                let targets = index_tuples(m, grade);
                let mut out = Vec::with_capacity(targets.len());
                for t in &targets {
                    let mut terms: Vec<(f64, ScalarFn)> = Vec::with_capacity(grade);
                    for (j, &axis) in t.iter().enumerate() {
                        let mut rest = t.clone();
                        rest.remove(j);
                        let source = tuple_rank(m, &rest);
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        let part = fields[source].partial(axis);
                        if !part.is_zero() {
                            terms.push((sign, part));
                        }
                    }
                    out.push(LinComb::of(terms));
                }
                SmoothForm::from_fields(self.space, self.parity, grade, out)
            }
            FormRepr::Callback { step, .. } => {
                let inner = self.clone();
                let step = *step;
                let space = self.space;
                let parity = self.parity;
                SmoothForm::from_callback(
                    space,
                    parity,
                    grade,
                    move |x| {
                        assemble_derivative(space, parity, grade, &inner.partials(x))
                    },
                    step,
                )
            }
        }
    }

    pub fn try_add(&self, other: &SmoothForm) -> Result<SmoothForm> {
        self.combine(other, 1.0)
    }

    pub fn try_sub(&self, other: &SmoothForm) -> Result<SmoothForm> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &SmoothForm, factor: f64) -> Result<SmoothForm> {
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
        match (&self.repr, &other.repr) {
            (FormRepr::Symbolic(a), FormRepr::Symbolic(b)) => {
                let fields = a
                    .iter()
                    .zip(b)
                    .map(|(fa, fb)| LinComb::of(vec![(1.0, fa.clone()), (factor, fb.clone())]))
                    .collect();
                SmoothForm::from_fields(self.space, self.parity, self.grade, fields)
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                SmoothForm::from_callback(
                    self.space,
                    self.parity,
                    self.grade,
                    move |x| {
                        a.eval(x)
                            .try_add(&b.eval(x).scaled(factor))
                            .expect("same shape")
                    },
                    self.fd_step(),
                )
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> SmoothForm {
        match &self.repr {
            FormRepr::Symbolic(fields) => {
                let scaled = fields.iter().map(|f| f.scaled(factor)).collect();
                SmoothForm::from_fields(self.space, self.parity, self.grade, scaled)
                    .expect("same shape")
            }
            FormRepr::Callback { eval, step } => {
                let eval = eval.clone();
                SmoothForm::from_callback(
                    self.space,
                    self.parity,
                    self.grade,
                    move |x| eval(x).scaled(factor),
                    *step,
                )
                .expect("same shape")
            }
        }
    }

    /// Pointwise exterior product of two covector fields.
    pub fn wedge(&self, other: &SmoothForm) -> Result<SmoothForm> {
        self.space.same_space(&other.space)?;
        let m = self.space.dim();
        let grade = self.grade + other.grade;
        if grade > m {
            return Err(Error::GradeOverflow {
                left: self.grade,
                right: other.grade,
                dim: m,
            });
        }
        let parity = self.parity.product(other.parity);
        match (&self.repr, &other.repr) {
            (FormRepr::Symbolic(a), FormRepr::Symbolic(b)) => {
                let left_tuples = index_tuples(m, self.grade);
                let right_tuples = index_tuples(m, other.grade);
                let n = crate::space::binomial(m, grade);
                let mut terms: Vec<Vec<(f64, ScalarFn)>> = vec![Vec::new(); n];
                for (i, lt) in left_tuples.iter().enumerate() {
                    if a[i].is_zero() {
                        continue;
                    }
                    for (j, rt) in right_tuples.iter().enumerate() {
                        if b[j].is_zero() {
                            continue;
                        }
                        if let Some((sign, merged)) = merge_with_sign(lt, rt) {
                            terms[tuple_rank(m, &merged)].push((
                                sign,
                                Arc::new(Product(a[i].clone(), b[j].clone())) as ScalarFn,
                            ));
                        }
                    }
                }
                let fields = terms.into_iter().map(LinComb::of).collect();
                SmoothForm::from_fields(self.space, parity, grade, fields)
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                SmoothForm::from_callback(
                    self.space,
                    parity,
                    grade,
                    move |x| a.eval(x).wedge(&b.eval(x)).expect("grades fit"),
                    self.fd_step().min(other.fd_step()),
                )
            }
        }
    }

    /// Image under a constant linear map on coefficient vectors. The matrix
    /// maps this form's coefficients to those of a grade/parity given by the
    /// caller (rows must match the target coefficient count).
    pub fn linear_image(
        &self,
        matrix: &nalgebra::DMatrix<f64>,
        parity: Parity,
        grade: usize,
    ) -> Result<SmoothForm> {
        let n_in = crate::space::binomial(self.space.dim(), self.grade);
        let n_out = crate::space::binomial(self.space.dim(), grade);
        if matrix.ncols() != n_in || matrix.nrows() != n_out {
            return Err(Error::ShapeMismatch {
                expected_rows: n_out,
                expected_cols: n_in,
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        match &self.repr {
            FormRepr::Symbolic(fields) => {
                let mut out = Vec::with_capacity(n_out);
                for row in 0..n_out {
                    let terms = (0..n_in)
                        .filter(|&col| matrix[(row, col)] != 0.0)
                        .map(|col| (matrix[(row, col)], fields[col].clone()))
                        .collect();
                    out.push(LinComb::of(terms));
                }
                SmoothForm::from_fields(self.space, parity, grade, out)
            }
            FormRepr::Callback { eval, step } => {
                let eval = eval.clone();
                let matrix = matrix.clone();
                let space = self.space;
                SmoothForm::from_callback(
                    space,
                    parity,
                    grade,
                    move |x| {
                        let input = eval(x);
                        let mut out = GradedElement::zero(space, Kind::Covector, parity, grade)
                            .expect("valid grade");
                        for row in 0..matrix.nrows() {
                            let mut acc = 0.0;
                            for (col, c) in input.coeffs().iter().enumerate() {
                                acc += matrix[(row, col)] * c;
                            }
                            out.coeffs_mut()[row] = acc;
                        }
                        out
                    },
                    *step,
                )
            }
        }
    }

    fn fd_step(&self) -> f64 {
        match &self.repr {
            FormRepr::Symbolic(_) => DEFAULT_FD_STEP,
            FormRepr::Callback { step, .. } => *step,
        }
    }

    /// Largest coefficient magnitude over a set of sample points.
    pub fn sup_norm_at(&self, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .fold(0.0, |acc, p| acc.max(self.eval(p).sup_norm()))
    }
}

/// Assembles `dA(x)` from the coefficient-wise partial derivatives.
fn assemble_derivative(
    space: SpaceDescriptor,
    parity: Parity,
    grade: usize,
    partials: &[GradedElement],
) -> GradedElement {
    let m = space.dim();
    let mut out = GradedElement::zero(space, Kind::Covector, parity, grade).expect("valid grade");
    let targets = index_tuples(m, grade);
    for (ti, t) in targets.iter().enumerate() {
        let mut acc = 0.0;
        for (j, &axis) in t.iter().enumerate() {
            let mut rest = t.clone();
            rest.remove(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * partials[axis].coeff_at(&rest);
        }
        out.coeffs_mut()[ti] = acc;
    }
    out
}

/// A q-cell: a differentiable map of the unit cube into the affine space,
/// together with an orientation of the model space.
#[derive(Clone)]
pub struct Cell {
    space: SpaceDescriptor,
    grade: usize,
    orientation: Orientation,
    map: PointFn,
    jacobian: JacobianFn,
}

impl Cell {
    pub fn new(
        space: SpaceDescriptor,
        grade: usize,
        orientation: Orientation,
        map: PointFn,
        jacobian: JacobianFn,
    ) -> Result<Self> {
        if grade > space.dim() {
            return Err(Error::CellGradeOutOfRange {
                grade,
                dim: space.dim(),
            });
        }
        Ok(Self {
            space,
            grade,
            orientation,
            map,
            jacobian,
        })
    }

    /// The 0-cell (x, o).
    pub fn zero_cell(space: SpaceDescriptor, point: Vec<f64>, orientation: Orientation) -> Self {
        Self {
            space,
            grade: 0,
            orientation,
            map: Arc::new(move |_s| point.clone()),
            jacobian: Arc::new(|_s| Vec::new()),
        }
    }

    /// Affine cell `s ↦ origin + Σ s_i columns_i`.
    pub fn affine(
        space: SpaceDescriptor,
        origin: Vec<f64>,
        columns: Vec<Vec<f64>>,
        orientation: Orientation,
    ) -> Result<Self> {
        let grade = columns.len();
        let cols = columns.clone();
        let map: PointFn = Arc::new(move |s: &[f64]| {
            let mut x = origin.clone();
            for (i, col) in cols.iter().enumerate() {
                for (xa, ca) in x.iter_mut().zip(col) {
                    *xa += s[i] * ca;
                }
            }
            x
        });
        let jac: JacobianFn = Arc::new(move |_s| columns.clone());
        Self::new(space, grade, orientation, map, jac)
    }

    /// The axis-aligned box [min, max] as a single m-cell.
    pub fn box_cell(
        space: SpaceDescriptor,
        min: &[f64],
        max: &[f64],
        orientation: Orientation,
    ) -> Result<Self> {
        let m = space.dim();
        if min.len() != m || max.len() != m || min.iter().zip(max).any(|(a, b)| a >= b) {
            return Err(Error::DegenerateCube);
        }
        let origin = min.to_vec();
        let columns: Vec<Vec<f64>> = (0..m)
            .map(|axis| {
                let mut col = vec![0.0; m];
                col[axis] = max[axis] - min[axis];
                col
            })
            .collect();
        Self::affine(space, origin, columns, orientation)
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn point(&self, s: &[f64]) -> Vec<f64> {
        (self.map)(s)
    }

    /// The face χ^{(i,end)} of Eq.-style boundary decomposition; `i` is the
    /// 0-based parameter slot and `end` is 0.0 or 1.0.
    fn face(&self, slot: usize, end: f64) -> Cell {
        let map = self.map.clone();
        let jac = self.jacobian.clone();
        let face_map: PointFn = Arc::new(move |s: &[f64]| {
            let mut full = Vec::with_capacity(s.len() + 1);
            full.extend_from_slice(&s[..slot]);
            full.push(end);
            full.extend_from_slice(&s[slot..]);
            map(&full)
        });
        let face_jac: JacobianFn = Arc::new(move |s: &[f64]| {
            let mut full = Vec::with_capacity(s.len() + 1);
            full.extend_from_slice(&s[..slot]);
            full.push(end);
            full.extend_from_slice(&s[slot..]);
            let mut cols = jac(&full);
            cols.remove(slot);
            cols
        });
        Cell {
            space: self.space,
            grade: self.grade - 1,
            orientation: self.orientation,
            map: face_map,
            jacobian: face_jac,
        }
    }
}

/// Riemann integral of a q-form over a q-cell by tensor-product
/// Gauss–Legendre quadrature of the given order per axis.
pub fn integrate_cell(form: &SmoothForm, cell: &Cell, order: usize) -> Result<f64> {
    form.space().same_space(&cell.space)?;
    if form.grade() != cell.grade {
        return Err(Error::GradeMismatch {
            left: form.grade(),
            right: cell.grade,
        });
    }
    if cell.grade == 0 {
        let x = cell.point(&[]);
        return Ok(form.eval(&x).reorient(cell.orientation).coeffs()[0]);
    }
    let m = form.space().dim();
    let tuples = index_tuples(m, cell.grade);
    integrate_unit_cube(cell.grade, order, |s| {
        let x = cell.point(s);
        let value = form.eval(&x).reorient(cell.orientation);
        let jac = (cell.jacobian)(s);
        let mut acc = 0.0;
        for (ti, t) in tuples.iter().enumerate() {
            let c = value.coeffs()[ti];
            if c == 0.0 {
                continue;
            }
            acc += c * minor(&jac, t);
        }
        acc
    })
}

/// Determinant of the rows `t` of the m×q column list (the coefficient of the
/// simple q-vector D₁χ ∧ … ∧ D_qχ on the basis tuple `t`).
fn minor(columns: &[Vec<f64>], t: &[usize]) -> f64 {
    let q = t.len();
    match q {
        0 => 1.0,
        1 => columns[0][t[0]],
        2 => {
            columns[0][t[0]] * columns[1][t[1]] - columns[0][t[1]] * columns[1][t[0]]
        }
        _ => {
            // Laplace expansion along the first column
            let mut acc = 0.0;
            for (row_idx, &row) in t.iter().enumerate() {
                let sub: Vec<usize> = t
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != row_idx)
                    .map(|(_, &r)| r)
                    .collect();
                let sign = if row_idx % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * columns[0][row] * minor(&columns[1..], &sub);
            }
            acc
        }
    }
}

/// A formal combination of q-cells of one grade, tagged with the parity of
/// the forms it is integrated against.
#[derive(Clone)]
pub struct Chain {
    space: SpaceDescriptor,
    grade: usize,
    parity: Parity,
    cells: Vec<(f64, Cell)>,
}

impl Chain {
    pub fn new(space: SpaceDescriptor, grade: usize, parity: Parity) -> Self {
        Self {
            space,
            grade,
            parity,
            cells: Vec::new(),
        }
    }

    pub fn single(cell: Cell, parity: Parity) -> Self {
        Self {
            space: cell.space,
            grade: cell.grade,
            parity,
            cells: vec![(1.0, cell)],
        }
    }

    pub fn push(&mut self, weight: f64, cell: Cell) {
        debug_assert_eq!(cell.grade, self.grade);
        self.cells.push((weight, cell));
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn cells(&self) -> &[(f64, Cell)] {
        &self.cells
    }

    /// Integral of a matching q-form, linear over the cell list.
    pub fn integrate(&self, form: &SmoothForm, order: usize) -> Result<f64> {
        form.space().same_space(&self.space)?;
        if form.grade() != self.grade {
            return Err(Error::GradeMismatch {
                left: form.grade(),
                right: self.grade,
            });
        }
        if form.parity() != self.parity {
            return Err(Error::ParityMismatch);
        }
        let mut acc = 0.0;
        for (w, cell) in &self.cells {
            acc += w * integrate_cell(form, cell, order)?;
        }
        Ok(acc)
    }

    /// Boundary chain: each cell contributes its 2q faces with alternating
    /// signs. The boundary of a grade-0 chain is the empty chain.
    pub fn boundary(&self) -> Chain {
        if self.grade == 0 {
            return Chain::new(self.space, 0, self.parity);
        }
        let mut out = Chain::new(self.space, self.grade - 1, self.parity);
        for (w, cell) in &self.cells {
            for slot in 0..self.grade {
                let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
                out.push(w * sign, cell.face(slot, 1.0));
                out.push(-w * sign, cell.face(slot, 0.0));
            }
        }
        out
    }
}

/// Boundary operator on chains (free-function form of [`Chain::boundary`]).
pub fn boundary_chain(chain: &Chain) -> Chain {
    chain.boundary()
}

/// `|∫_C dA − ∫_{∂C} A|` at the given quadrature order.
pub fn stokes_residual(form: &SmoothForm, chain: &Chain, order: usize) -> Result<f64> {
    if form.grade() + 1 != chain.grade() {
        return Err(Error::GradeMismatch {
            left: form.grade() + 1,
            right: chain.grade(),
        });
    }
    if form.parity() != chain.parity() {
        return Err(Error::ParityMismatch);
    }
    let d = form.exterior_derivative()?;
    let lhs = chain.integrate(&d, order)?;
    let rhs = chain.boundary().integrate(form, order)?;
    Ok((lhs - rhs).abs())
}

/// An odd de Rham current of dimension m with compact support.
#[derive(Clone)]
pub enum CurrentKind {
    /// Backed by a chain of m-cells.
    ChainBacked(Chain),
    /// Integration of odd m-forms over an axis-aligned box.
    CubeDomain { min: Vec<f64>, max: Vec<f64> },
    /// The Dirac current wδ(x): evaluation against an odd m-vector at x.
    Dirac { point: Vec<f64>, weight: GradedElement },
}

#[derive(Clone)]
pub struct Current {
    space: SpaceDescriptor,
    kind: CurrentKind,
    quad_order: usize,
}

impl Current {
    pub fn cube(space: SpaceDescriptor, min: Vec<f64>, max: Vec<f64>, quad_order: usize) -> Result<Self> {
        let m = space.dim();
        if min.len() != m || max.len() != m || min.iter().zip(&max).any(|(a, b)| a >= b) {
            return Err(Error::DegenerateCube);
        }
        Ok(Self {
            space,
            kind: CurrentKind::CubeDomain { min, max },
            quad_order,
        })
    }

    pub fn dirac(space: SpaceDescriptor, point: Vec<f64>, weight: GradedElement) -> Result<Self> {
        space.same_space(&weight.space())?;
        if weight.kind() != Kind::Vector
            || weight.parity() != Parity::Odd
            || weight.grade() != space.dim()
        {
            return Err(Error::KindMismatch {
                expected: "odd m-vector Dirac weight",
            });
        }
        if weight.is_zero(0.0) {
            return Err(Error::ZeroDiracWeight { dim: space.dim() });
        }
        Ok(Self {
            space,
            kind: CurrentKind::Dirac { point, weight },
            quad_order: 1,
        })
    }

    pub fn from_chain(chain: Chain, quad_order: usize) -> Result<Self> {
        if chain.grade() != chain.space.dim() {
            return Err(Error::CurrentDegreeMismatch {
                current: chain.space.dim(),
                form: chain.grade(),
            });
        }
        if chain.parity() != Parity::Odd {
            return Err(Error::ParityMismatch);
        }
        Ok(Self {
            space: chain.space,
            kind: CurrentKind::ChainBacked(chain),
            quad_order,
        })
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn kind(&self) -> &CurrentKind {
        &self.kind
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    pub fn with_quad_order(mut self, order: usize) -> Self {
        self.quad_order = order;
        self
    }

    /// The m-dimensional support box, when the variant exposes one.
    pub fn support_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            CurrentKind::CubeDomain { min, max } => Some((min.clone(), max.clone())),
            CurrentKind::Dirac { point, .. } => Some((point.clone(), point.clone())),
            CurrentKind::ChainBacked(_) => None,
        }
    }

    fn check_form(&self, form: &SmoothForm, grade: usize) -> Result<()> {
        form.space().same_space(&self.space)?;
        if form.grade() != grade {
            return Err(Error::CurrentDegreeMismatch {
                current: self.space.dim(),
                form: form.grade(),
            });
        }
        if form.parity() != Parity::Odd {
            return Err(Error::ParityMismatch);
        }
        Ok(())
    }

    /// `∫_c A` for an odd m-form A.
    pub fn integrate(&self, form: &SmoothForm) -> Result<f64> {
        self.check_form(form, self.space.dim())?;
        match &self.kind {
            CurrentKind::Dirac { point, weight } => form.eval(point).pair(weight),
            CurrentKind::CubeDomain { min, max } => {
                let cell = Cell::box_cell(self.space, min, max, Orientation::Reference)?;
                integrate_cell(form, &cell, self.quad_order)
            }
            CurrentKind::ChainBacked(chain) => chain.integrate(form, self.quad_order),
        }
    }

    /// `∫_{∂c} A` for an odd (m−1)-form A, with the boundary defined through
    /// Stokes: faces for integrable variants, `⟨dÃ(x), w⟩` for Dirac.
    pub fn integrate_boundary(&self, form: &SmoothForm) -> Result<f64> {
        self.check_form(form, self.space.dim() - 1)?;
        match &self.kind {
            CurrentKind::Dirac { point, weight } => {
                form.exterior_derivative()?.eval(point).pair(weight)
            }
            CurrentKind::CubeDomain { min, max } => {
                let cell = Cell::box_cell(self.space, min, max, Orientation::Reference)?;
                Chain::single(cell, Parity::Odd)
                    .boundary()
                    .integrate(form, self.quad_order)
            }
            CurrentKind::ChainBacked(chain) => chain.boundary().integrate(form, self.quad_order),
        }
    }
}

/// The open set a local form is defined on; used for support-containment
/// checks before integrating a current against field expressions.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    All,
    Box { min: Vec<f64>, max: Vec<f64> },
    /// Points whose spatial radius (axes 1..m) stays at or above a floor;
    /// the Coulomb family lives here.
    AwaySpatialOrigin { min_radius: f64 },
}

impl Domain {
    pub fn contains_point(&self, x: &[f64]) -> bool {
        match self {
            Domain::All => true,
            Domain::Box { min, max } => x
                .iter()
                .zip(min.iter().zip(max))
                .all(|(xi, (lo, hi))| *xi >= *lo && *xi <= *hi),
            Domain::AwaySpatialOrigin { min_radius } => {
                let r2: f64 = x.iter().skip(1).map(|v| v * v).sum();
                r2.sqrt() >= *min_radius
            }
        }
    }

    /// Whether the current's support is contained in the domain. Chain-backed
    /// currents do not expose their support and are accepted.
    pub fn contains_current(&self, current: &Current) -> bool {
        match (self, current.support_box()) {
            (Domain::All, _) => true,
            (_, None) => true,
            (Domain::Box { min, max }, Some((lo, hi))) => {
                lo.iter().zip(min).all(|(a, b)| a >= b) && hi.iter().zip(max).all(|(a, b)| a <= b)
            }
            (Domain::AwaySpatialOrigin { min_radius }, Some((lo, hi))) => {
                // nearest spatial point of the box to the origin
                let mut r2 = 0.0;
                for axis in 1..lo.len() {
                    let nearest = if lo[axis] > 0.0 {
                        lo[axis]
                    } else if hi[axis] < 0.0 {
                        hi[axis]
                    } else {
                        0.0
                    };
                    r2 += nearest * nearest;
                }
                r2.sqrt() >= *min_radius
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_field::Poly;

    fn std4() -> SpaceDescriptor {
        SpaceDescriptor::new(4).unwrap()
    }

    /// x_coordinate (0-based) as a polynomial scalar field.
    fn coord(m: usize, axis: usize) -> ScalarFn {
        Arc::new(Poly::coordinate(m, axis))
    }

    fn one_form_with_coeff(space: SpaceDescriptor, position: usize, f: ScalarFn) -> SmoothForm {
        let n = crate::space::binomial(space.dim(), 1);
        let mut fields: Vec<ScalarFn> = vec![Arc::new(Zero) as ScalarFn; n];
        fields[position] = f;
        SmoothForm::from_fields(space, Parity::Even, 1, fields).unwrap()
    }

    #[test]
    fn derivative_of_constant_form_vanishes() {
        let s = std4();
        let a = GradedElement::basis(s, Kind::Covector, Parity::Even, &[1, 3]).unwrap();
        let form = SmoothForm::constant(&a).unwrap();
        let d = form.exterior_derivative().unwrap();
        assert!(d.eval(&[0.3, -1.0, 2.0, 0.7]).is_zero(0.0));
    }

    #[test]
    fn derivative_of_x2_e1_is_minus_e1_wedge_e2() {
        // A(x) = x_2 e^1 in labels 1..4, so dA = e^2 ∧ e^1 = −e^1 ∧ e^2
        let s = std4();
        let form = one_form_with_coeff(s, 0, coord(4, 1));
        let d = form.exterior_derivative().unwrap();
        assert_eq!(d.grade(), 2);
        let value = d.eval(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(value.coeff_at(&[0, 1]), -1.0);
        assert_eq!(value.sup_norm(), 1.0);
    }

    #[test]
    fn second_derivative_is_exactly_zero_for_polynomials() {
        // A(x) = x_1 x_3 e^2
        let s = std4();
        let mut p = Poly::zero(4);
        p.add_term(vec![1, 0, 1, 0], 1.0);
        let form = one_form_with_coeff(s, 1, Arc::new(p));
        let dd = form
            .exterior_derivative()
            .unwrap()
            .exterior_derivative()
            .unwrap();
        for x in [[0.0, 0.0, 0.0, 0.0], [1.3, -0.4, 0.9, 2.2]] {
            assert_eq!(dd.eval(&x).sup_norm(), 0.0);
        }
    }

    #[test]
    fn derivative_rejected_at_top_grade() {
        let s = std4();
        let top = GradedElement::odd_top_covector(s);
        let form = SmoothForm::constant(&top).unwrap();
        assert!(matches!(
            form.exterior_derivative(),
            Err(Error::GradeOutOfRange { .. })
        ));
    }

    #[test]
    fn callback_fd_derivative_agrees_with_symbolic() {
        let s = std4();
        let mut p = Poly::zero(4);
        p.add_term(vec![2, 0, 1, 0], 0.75);
        p.add_term(vec![0, 1, 0, 0], -2.0);
        let symbolic = one_form_with_coeff(s, 2, Arc::new(p));
        let clone = symbolic.clone();
        let callback = SmoothForm::from_callback(
            s,
            Parity::Even,
            1,
            move |x| clone.eval(x),
            DEFAULT_FD_STEP,
        )
        .unwrap();
        let x = [0.4, 1.1, -0.6, 0.2];
        let exact = symbolic.exterior_derivative().unwrap().eval(&x);
        let fd = callback.exterior_derivative().unwrap().eval(&x);
        assert!(exact.try_sub(&fd).unwrap().sup_norm() < 1e-9);
    }

    #[test]
    fn unit_segment_integral_of_dual_covector() {
        // χ(s) = x0 + s e_1, A = e^1: ∫ = 1
        let s = std4();
        let a = GradedElement::basis(s, Kind::Covector, Parity::Even, &[1]).unwrap();
        let form = SmoothForm::constant(&a).unwrap();
        let cell = Cell::affine(
            s,
            vec![0.5, 0.0, 0.0, 0.0],
            vec![vec![1.0, 0.0, 0.0, 0.0]],
            Orientation::Reference,
        )
        .unwrap();
        let got = integrate_cell(&form, &cell, 4).unwrap();
        assert!((got - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_cell_integral_is_point_evaluation() {
        let s = std4();
        let f = SmoothForm::from_fields(s, Parity::Odd, 0, vec![coord(4, 0)]).unwrap();
        let cell = Cell::zero_cell(s, vec![2.5, 0.0, 0.0, 0.0], Orientation::Reference);
        assert_eq!(integrate_cell(&f, &cell, 1).unwrap(), 2.5);
        let flipped = Cell::zero_cell(s, vec![2.5, 0.0, 0.0, 0.0], Orientation::Opposite);
        assert_eq!(integrate_cell(&f, &flipped, 1).unwrap(), -2.5);
    }

    #[test]
    fn odd_form_integral_negates_under_reorientation() {
        let s = std4();
        let a = GradedElement::basis(s, Kind::Covector, Parity::Odd, &[2]).unwrap();
        let form = SmoothForm::constant(&a).unwrap();
        let mk = |o| {
            Cell::affine(
                s,
                vec![0.0; 4],
                vec![vec![0.0, 1.0, 0.0, 0.0]],
                o,
            )
            .unwrap()
        };
        let at_ref = integrate_cell(&form, &mk(Orientation::Reference), 4).unwrap();
        let at_opp = integrate_cell(&form, &mk(Orientation::Opposite), 4).unwrap();
        assert_eq!(at_ref, -at_opp);
        assert!((at_ref - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_of_segment_is_endpoint_difference() {
        let s = std4();
        let cell = Cell::affine(
            s,
            vec![0.0; 4],
            vec![vec![1.0, 0.0, 0.0, 0.0]],
            Orientation::Reference,
        )
        .unwrap();
        let chain = Chain::single(cell, Parity::Even);
        let boundary = chain.boundary();
        assert_eq!(boundary.grade(), 0);
        assert_eq!(boundary.cells().len(), 2);
        // integrate f(x) = x_1 over the boundary: f(end) − f(start) = 1
        let f = SmoothForm::from_fields(s, Parity::Even, 0, vec![coord(4, 0)]).unwrap();
        assert!((boundary.integrate(&f, 2).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stokes_on_unit_square_and_double_boundary() {
        let s = std4();
        // curved 2-cell in the (1,2)-plane
        let map: PointFn = Arc::new(|st: &[f64]| {
            vec![st[0], st[1] + 0.3 * st[0] * st[0], 0.0, 0.0]
        });
        let jac: JacobianFn = Arc::new(|st: &[f64]| {
            vec![
                vec![1.0, 0.6 * st[0], 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
            ]
        });
        let cell = Cell::new(s, 2, Orientation::Reference, map, jac).unwrap();
        let chain = Chain::single(cell, Parity::Even);
        // A = x_2^2 e^1 + x_1 x_2 e^2
        let mut p1 = Poly::zero(4);
        p1.add_term(vec![0, 2, 0, 0], 1.0);
        let mut p2 = Poly::zero(4);
        p2.add_term(vec![1, 1, 0, 0], 1.0);
        let fields: Vec<ScalarFn> = vec![
            Arc::new(p1),
            Arc::new(p2),
            Arc::new(Zero),
            Arc::new(Zero),
        ];
        let a = SmoothForm::from_fields(s, Parity::Even, 1, fields).unwrap();
        assert!(stokes_residual(&a, &chain, 8).unwrap() < 1e-10);

        // ∂∂ integrates to zero against 0-forms
        let dd = chain.boundary().boundary();
        let f = SmoothForm::from_fields(s, Parity::Even, 0, vec![coord(4, 1)]).unwrap();
        assert!(dd.integrate(&f, 4).unwrap().abs() < 1e-13);
    }

    #[test]
    fn stokes_residual_preconditions() {
        let s = std4();
        let cell = Cell::box_cell(s, &[0.0; 4], &[1.0; 4], Orientation::Reference).unwrap();
        let chain = Chain::single(cell, Parity::Odd);
        let even3 = SmoothForm::zero(s, Parity::Even, 3).unwrap();
        assert!(matches!(
            stokes_residual(&even3, &chain, 2),
            Err(Error::ParityMismatch)
        ));
        let odd1 = SmoothForm::zero(s, Parity::Odd, 1).unwrap();
        assert!(matches!(
            stokes_residual(&odd1, &chain, 2),
            Err(Error::GradeMismatch { .. })
        ));
    }

    #[test]
    fn dirac_current_evaluates_pointwise() {
        let s = std4();
        let w = GradedElement::odd_top_vector(s).scaled(2.0);
        let c = Current::dirac(s, vec![0.0; 4], w).unwrap();
        let a = SmoothForm::constant(&GradedElement::odd_top_covector(s).scaled(1.5)).unwrap();
        assert_eq!(c.integrate(&a).unwrap(), 3.0);
    }

    #[test]
    fn dirac_weight_must_be_nonzero() {
        let s = std4();
        let w = GradedElement::zero(s, Kind::Vector, Parity::Odd, 4).unwrap();
        assert!(matches!(
            Current::dirac(s, vec![0.0; 4], w),
            Err(Error::ZeroDiracWeight { dim: 4 })
        ));
    }

    #[test]
    fn unit_cube_has_unit_volume_integral() {
        let s = std4();
        let c = Current::cube(s, vec![0.0; 4], vec![1.0; 4], 4).unwrap();
        let vol = SmoothForm::constant(&GradedElement::odd_top_covector(s)).unwrap();
        assert!((c.integrate(&vol).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn even_top_form_is_rejected_by_currents() {
        let s = std4();
        let c = Current::cube(s, vec![0.0; 4], vec![1.0; 4], 4).unwrap();
        let mut even_top = GradedElement::zero(s, Kind::Covector, Parity::Even, 4).unwrap();
        even_top.coeffs_mut()[0] = 1.0;
        let form = SmoothForm::constant(&even_top).unwrap();
        assert!(matches!(c.integrate(&form), Err(Error::ParityMismatch)));
    }

    #[test]
    fn cube_current_matches_chain_backed_box() {
        let s = std4();
        let min = vec![0.0, -0.5, 0.2, 1.0];
        let max = vec![1.0, 0.5, 1.2, 2.0];
        let cube = Current::cube(s, min.clone(), max.clone(), 6).unwrap();
        let cell = Cell::box_cell(s, &min, &max, Orientation::Reference).unwrap();
        let chain = Current::from_chain(Chain::single(cell, Parity::Odd), 6).unwrap();
        let mut p = Poly::zero(4);
        p.add_term(vec![1, 0, 2, 0], 0.5);
        p.add_term(vec![0, 0, 0, 0], 1.0);
        let form =
            SmoothForm::from_fields(s, Parity::Odd, 4, vec![Arc::new(p) as ScalarFn]).unwrap();
        let a = cube.integrate(&form).unwrap();
        let b = chain.integrate(&form).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cube_boundary_matches_interior_derivative_integral() {
        // ∫_{∂K} A = ∫_K dA on a random polynomial odd 3-form
        let s = std4();
        let c = Current::cube(s, vec![0.0; 4], vec![1.0; 4], 8).unwrap();
        let n3 = crate::space::binomial(4, 3);
        let mut fields: Vec<ScalarFn> = Vec::new();
        for i in 0..n3 {
            let mut p = Poly::zero(4);
            p.add_term(vec![1, 1, 0, 0], 0.25 * (i as f64 + 1.0));
            p.add_term(vec![0, 0, 2, 1], -0.125 * (i as f64 - 2.0));
            fields.push(Arc::new(p));
        }
        let a = SmoothForm::from_fields(s, Parity::Odd, 3, fields).unwrap();
        let boundary = c.integrate_boundary(&a).unwrap();
        let interior = c.integrate(&a.exterior_derivative().unwrap()).unwrap();
        assert!((boundary - interior).abs() < 1e-6);
    }

    #[test]
    fn dirac_boundary_is_derivative_evaluation() {
        let s = std4();
        let x = vec![0.3, 0.1, -0.7, 0.9];
        let w = GradedElement::odd_top_vector(s).scaled(1.25);
        let c = Current::dirac(s, x.clone(), w.clone()).unwrap();
        let n3 = crate::space::binomial(4, 3);
        let mut fields: Vec<ScalarFn> = Vec::new();
        for i in 0..n3 {
            let mut p = Poly::zero(4);
            p.add_term(vec![0, 1, 1, 0], 0.5 + i as f64);
            fields.push(Arc::new(p));
        }
        let a = SmoothForm::from_fields(s, Parity::Odd, 3, fields).unwrap();
        let via_boundary = c.integrate_boundary(&a).unwrap();
        let direct = a.exterior_derivative().unwrap().eval(&x).pair(&w).unwrap();
        assert_eq!(via_boundary, direct);
    }

    #[test]
    fn stokes_residual_decreases_with_quadrature_order() {
        let s = std4();
        let map: PointFn = Arc::new(|st: &[f64]| vec![st[0], st[1], 0.2 * (3.0 * st[0]).sin(), 0.0]);
        let jac: JacobianFn = Arc::new(|st: &[f64]| {
            vec![
                vec![1.0, 0.0, 0.6 * (3.0 * st[0]).cos(), 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
            ]
        });
        let cell = Cell::new(s, 2, Orientation::Reference, map, jac).unwrap();
        let chain = Chain::single(cell, Parity::Even);
        let fields: Vec<ScalarFn> = vec![
            Arc::new(crate::scalar_field::Wave::cosine(1.0, vec![0.0, 3.0, 1.0, 0.0])),
            Arc::new(crate::scalar_field::Wave::cosine(0.5, vec![2.0, 0.0, 0.0, 1.0])),
            Arc::new(Zero),
            Arc::new(Zero),
        ];
        let a = SmoothForm::from_fields(s, Parity::Even, 1, fields).unwrap();
        let residuals: Vec<f64> = [2usize, 3, 4, 6, 8]
            .iter()
            .map(|&n| stokes_residual(&a, &chain, n).unwrap())
            .collect();
        for w in residuals.windows(2) {
            assert!(w[1] < w[0], "residuals not decreasing: {residuals:?}");
        }
        assert!(residuals[residuals.len() - 1] < 1e-6);
    }

    #[test]
    fn domain_containment_checks() {
        let s = std4();
        let domain = Domain::Box {
            min: vec![0.0; 4],
            max: vec![2.0; 4],
        };
        let inside = Current::cube(s, vec![0.5; 4], vec![1.5; 4], 2).unwrap();
        let outside = Current::cube(s, vec![0.5; 4], vec![2.5; 4], 2).unwrap();
        assert!(domain.contains_current(&inside));
        assert!(!domain.contains_current(&outside));
        let away = Domain::AwaySpatialOrigin { min_radius: 1.0 };
        let w = GradedElement::odd_top_vector(s);
        let near = Current::dirac(s, vec![5.0, 0.1, 0.0, 0.0], w.clone()).unwrap();
        let far = Current::dirac(s, vec![0.0, 2.0, 0.0, 0.0], w).unwrap();
        assert!(!away.contains_current(&near));
        assert!(away.contains_current(&far));
    }
}
