//! Killing vector fields of the split supermanifold built from the spinor
//! bundle. The odd field `X_s` is interior multiplication by `s* = g₁(s, ·)`;
//! its Lie derivative of the canonical superframe is assembled per grid point
//! and tested for membership in `g ⊗ A`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::GammaRep;
use crate::error::{Error, Result};
use crate::forms::AdmissibleForm;
use crate::geometry::{covariant_derivative, covariant_derivatives, FrameConnection, SpinorField};
use crate::graded::{interior_mul, ExteriorElement, SuperDim, SuperMatrix};
use crate::linalg::{re, CMatrix, CVector, LeastSquares, C64, ZERO};
use crate::poincare::{build_poincare, coadjoint_rep, g_membership_solve, matrix_realization, PoincareSuperAlgebra, StructureAlgebra};

/// Default verdict tolerance on flat space, where fields are closed form.
pub const FLAT_TOL: f64 = 1e-6;
/// Default verdict tolerance on the sphere.
pub const SPHERE_TOL: f64 = 1e-4;

pub fn default_tol(fc: &FrameConnection) -> f64 {
    if fc.space().is_flat() {
        FLAT_TOL
    } else {
        SPHERE_TOL
    }
}

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;

/// Superfunction of fiber degree at most one: `f + Σ_j t_j θ^j` where `t` is a
/// spinor field.
#[derive(Clone, Default)]
pub struct DegreeOneField {
    pub body: Option<ScalarFn>,
    pub odd: Option<SpinorField>,
}

impl DegreeOneField {
    pub fn from_spinor(t: SpinorField) -> Self {
        DegreeOneField { body: None, odd: Some(t) }
    }

    pub fn eval(&self, n: usize, x: &[f64]) -> ExteriorElement {
        let mut out = ExteriorElement::zero(n);
        if let Some(f) = &self.body {
            out.add_term(0, f(x));
        }
        if let Some(t) = &self.odd {
            for (j, c) in t.eval(x).iter().enumerate() {
                out.add_term(1 << j, *c);
            }
        }
        out
    }
}

/// `e_a(f)` of a scalar function by central differences along the frame.
fn frame_derivative(fc: &FrameConnection, f: &dyn Fn(&[f64]) -> C64, a: usize, x: &[f64]) -> Result<C64> {
    let space = fc.space();
    space.check_interior(x)?;
    let h = space.h();
    let local = fc.at(x);
    let mut out = ZERO;
    let mut y = x.to_vec();
    for mu in 0..space.dim() {
        let coeff = local.frame[(mu, a)];
        if coeff == 0.0 {
            continue;
        }
        y[mu] = x[mu] + h;
        let fp = f(&y);
        y[mu] = x[mu] - h;
        let fm = f(&y);
        y[mu] = x[mu];
        out += (fp - fm) / re(2.0 * h) * re(coeff);
    }
    Ok(out)
}

/// The superframe `E = (ι(e^i), ι(θ_j))` acting on sampled superfunctions.
#[derive(Debug, Clone)]
pub struct SuperFrame {
    fc: FrameConnection,
    rep: Arc<GammaRep>,
}

pub fn iota_frame(fc: &FrameConnection, rep: Arc<GammaRep>) -> Result<SuperFrame> {
    if fc.orthonormality_residual() > 1e-10 {
        return Err(Error::NonOrthonormalBasis(fc.orthonormality_residual()));
    }
    if rep.signature != fc.space().signature() {
        return Err(Error::DimensionMismatch("representation and space differ in signature".into()));
    }
    Ok(SuperFrame { fc: fc.clone(), rep })
}

impl SuperFrame {
    pub fn m(&self) -> usize {
        self.rep.m()
    }

    pub fn n(&self) -> usize {
        self.rep.n()
    }

    /// `ι(e^i) F = ε_i ∇_{e_i} F`.
    pub fn even_leg(&self, i: usize, field: &DegreeOneField, x: &[f64]) -> Result<ExteriorElement> {
        let n = self.n();
        let eps = re(self.rep.eps(i));
        let mut out = ExteriorElement::zero(n);
        if let Some(f) = &field.body {
            out.add_term(0, frame_derivative(&self.fc, f.as_ref(), i, x)? * eps);
        }
        if let Some(t) = &field.odd {
            for (j, c) in covariant_derivative(&self.fc, t, i, x)?.iter().enumerate() {
                out.add_term(1 << j, c * eps);
            }
        }
        Ok(out)
    }

    /// `ι(θ_j)`: contraction with the `j`-th dual generator.
    pub fn odd_leg(&self, j: usize, f: &ExteriorElement) -> Result<ExteriorElement> {
        let mut covector = vec![ZERO; self.n()];
        *covector.get_mut(j).ok_or(Error::IndexOutOfRange { index: j + 1, max: self.n() })? = re(1.0);
        interior_mul(&covector, f)
    }
}

/// `X_s = ι(s*)` with `s* = g₁(s, ·)`.
#[derive(Debug, Clone)]
pub struct OddVectorField {
    pub s: SpinorField,
    pub form: AdmissibleForm,
}

impl OddVectorField {
    pub fn new(s: SpinorField, form: AdmissibleForm) -> Result<Self> {
        if form.b.nrows() != s.rep().n() {
            return Err(Error::DimensionMismatch(format!(
                "form of size {} for spinors of length {}",
                form.b.nrows(),
                s.rep().n()
            )));
        }
        Ok(OddVectorField { s, form })
    }

    /// Components `s*(θ^j) = g₁(s, θ^j)`.
    pub fn dual(&self, x: &[f64]) -> Vec<C64> {
        let row = self.s.eval(x).transpose() * &self.form.b;
        row.iter().copied().collect()
    }

    pub fn apply(&self, x: &[f64], f: &ExteriorElement) -> Result<ExteriorElement> {
        interior_mul(&self.dual(x), f)
    }
}

/// `L_{X_s} E = E M` at one point: the columns of `M` for the even legs carry
/// `M[m+j][i] = −ε_i g₁(∇_{e_i} s, θ^j)`; the odd legs commute with `X_s`.
pub fn lie_derivative_frame(x_s: &OddVectorField, frame: &SuperFrame, x: &[f64]) -> Result<SuperMatrix> {
    let nabla = covariant_derivatives(&frame.fc, &x_s.s, x)?;
    lie_derivative_from(&nabla, &frame.rep, &x_s.form)
}

fn lie_derivative_from(nabla: &[CVector], rep: &GammaRep, form: &AdmissibleForm) -> Result<SuperMatrix> {
    let (m, n) = (rep.m(), rep.n());
    let mut mat = CMatrix::zeros(m + n, m + n);
    for (i, d) in nabla.iter().enumerate() {
        let pairing = d.transpose() * &form.b;
        for j in 0..n {
            mat[(m + j, i)] = -pairing[(0, j)] * rep.eps(i);
        }
    }
    let dims = SuperDim::new(m, n);
    SuperMatrix::from_complex(dims, dims, &mat, 0)
}

/// Maximum over grid points and test sections of
/// `|[X_s, ∇_{e_a}](t) + g₁(∇_{e_a} s, t)|`, the supercommutator evaluated by
/// applying both operators in both orders.
pub fn bracket_oracle(x_s: &OddVectorField, fc: &FrameConnection, a: usize, tests: &[SpinorField]) -> Result<f64> {
    let grid = fc.space().grid();
    let values = grid
        .par_iter()
        .map(|x| {
            let mut worst: f64 = 0.0;
            let ds = covariant_derivative(fc, &x_s.s, a, x)?;
            for t in tests {
                let lhs = commutator_on(x_s, fc, a, t, x)?;
                let rhs = -x_s.form.eval(&ds, &t.eval(x));
                worst = worst.max((lhs - rhs).norm());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// `X_s(∇_a t) − ∇_a(X_s t)`, the second term differentiating the scalar
/// `g₁(s, t)` directly.
fn commutator_on(x_s: &OddVectorField, fc: &FrameConnection, a: usize, t: &SpinorField, x: &[f64]) -> Result<C64> {
    let n = x_s.s.rep().n();
    let dt = DegreeOneField::from_spinor(t.clone());
    let mut nabla_t = ExteriorElement::zero(n);
    for (j, c) in covariant_derivative(fc, t, a, x)?.iter().enumerate() {
        nabla_t.add_term(1 << j, *c);
    }
    let first = x_s.apply(x, &nabla_t)?.body();
    let pairing = |y: &[f64]| x_s.apply(y, &dt.eval(n, y)).map(|e| e.body()).unwrap_or(ZERO);
    let second = frame_derivative(fc, &pairing, a, x)?;
    Ok(first - second)
}

/// For a twistor spinor, `[X_s, ∇_{e_a}](t) = −g₀(π(s̃ ∨ t), e_a)`; returns the
/// largest deviation over grid, directions and test sections.
pub fn pi_pairing_residual(x_s: &OddVectorField, fc: &FrameConnection, p: &PoincareSuperAlgebra, tests: &[SpinorField]) -> Result<f64> {
    let rep = x_s.s.rep();
    let grid = fc.space().grid();
    let values = grid
        .par_iter()
        .map(|x| {
            let st = crate::geometry::s_tilde(fc, &x_s.s, x)?;
            let mut worst: f64 = 0.0;
            for t in tests {
                let pi = p.pi.apply(&st, &t.eval(x));
                for (a, pa) in pi.iter().enumerate() {
                    let lhs = commutator_on(x_s, fc, a, t, x)?;
                    let rhs = -pa * rep.eps(a);
                    worst = worst.max((lhs - rhs).norm());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Poincaré algebra and its matrix realization for one suitable form.
#[derive(Debug, Clone)]
pub struct KillingContext {
    pub algebra: PoincareSuperAlgebra,
    pub structure: StructureAlgebra,
    system: LeastSquares,
}

impl KillingContext {
    pub fn new(rep: &GammaRep, form: &AdmissibleForm) -> Result<Self> {
        let algebra = build_poincare(rep, form)?;
        let coadjoint = coadjoint_rep(&algebra)?;
        let structure = matrix_realization(&algebra, &coadjoint, &CMatrix::identity(rep.m(), rep.m()))?;
        // rows (i, j): g₁(ρ(e_i) t, θ^j) = (Bᵀ ρ_i t)_j
        let (m, n) = (rep.m(), rep.n());
        let bt = form.b.transpose();
        let mut a = CMatrix::zeros(m * n, n);
        for i in 0..m {
            a.view_mut((i * n, 0), (n, n)).copy_from(&(&bt * rep.gamma(i)));
        }
        Ok(KillingContext {
            algebra,
            structure,
            system: LeastSquares::new(a),
        })
    }

    pub fn form(&self) -> &AdmissibleForm {
        &self.algebra.form
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingVerdict {
    /// Max over points of the least-squares residual of
    /// `g₁(∇_{e_i}s, θ^j) = −g₁(ρ(e_i)t, θ^j)`.
    pub membership_residual: f64,
    /// Max residual of `g_membership_solve` on the assembled `L_{X_s}E`.
    pub algebra_residual: f64,
    /// Max difference between `t` from the two paths.
    pub path_agreement: f64,
    pub twistor_residual: f64,
    /// Max `|t + s̃|`.
    pub sign_deviation: f64,
    pub tol: f64,
    pub verdict_killing: bool,
    pub verdict_twistor: bool,
    #[serde(skip)]
    pub recovered_t: Vec<CVector>,
}

impl KillingVerdict {
    /// Both sides of the biconditional agree.
    pub fn agree(&self) -> bool {
        self.verdict_killing == self.verdict_twistor
    }
}

struct PointResult {
    ls: f64,
    algebra: f64,
    paths: f64,
    twistor: f64,
    sign: f64,
    t: CVector,
}

pub fn killing_vector_test(s: &SpinorField, ctx: &KillingContext, fc: &FrameConnection, tol: f64) -> Result<KillingVerdict> {
    let rep = s.rep();
    if *rep != ctx.algebra.rep {
        return Err(Error::DimensionMismatch("field and algebra use different representations".into()));
    }
    let (m, n) = (rep.m(), rep.n());
    let bt = ctx.form().b.transpose();
    let points = fc
        .space()
        .grid()
        .par_iter()
        .map(|x| {
            let nabla = covariant_derivatives(fc, s, x)?;
            let mut b = CVector::zeros(m * n);
            for (i, d) in nabla.iter().enumerate() {
                b.rows_mut(i * n, n).copy_from(&(-(&bt * d)));
            }
            let (t, ls) = ctx.system.solve(&b);

            let lie = lie_derivative_from(&nabla, rep, ctx.form())?;
            let mem = g_membership_solve(&lie, &ctx.structure)?;
            let even = ctx.structure.even().len();
            let t_mem = CVector::from_iterator(n, mem.coeffs[even..].iter().map(|c| c.body()));

            let st = nabla
                .iter()
                .enumerate()
                .fold(CVector::zeros(n), |acc, (a, d)| acc + rep.gamma(a) * d * re(rep.eps(a)))
                / re(rep.c() * m as f64);
            let twistor = nabla
                .iter()
                .enumerate()
                .map(|(a, d)| (d - rep.gamma(a) * &st).norm())
                .fold(0.0, f64::max);
            Ok(PointResult {
                ls,
                algebra: mem.residual,
                paths: (&t - &t_mem).norm(),
                twistor,
                sign: (&t + &st).norm(),
                t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_of = |f: &dyn Fn(&PointResult) -> f64| points.iter().map(f).fold(0.0, f64::max);
    let membership_residual = max_of(&|p| p.ls);
    let twistor_residual = max_of(&|p| p.twistor);
    Ok(KillingVerdict {
        membership_residual,
        algebra_residual: max_of(&|p| p.algebra),
        path_agreement: max_of(&|p| p.paths),
        twistor_residual,
        sign_deviation: max_of(&|p| p.sign),
        tol,
        verdict_killing: membership_residual < tol,
        verdict_twistor: twistor_residual < tol,
        recovered_t: points.into_iter().map(|p| p.t).collect(),
    })
}
