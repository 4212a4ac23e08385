//! The Poincaré super Lie algebra `p(V) = spin(V₀) ⊕ V₀ ⊕ V₁`, its coadjoint
//! action on `V*` and the matrix algebra `g ⊂ gl(m|n)` it realises.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clifford::{so_basis, so_coordinates, so_pairs, spin_generator, GammaRep};
use crate::error::{Error, Result};
use crate::forms::{build_pi, AdmissibleForm, PiMap};
use crate::graded::{check_super_jacobi, ExteriorElement, Parity, SuperDim, SuperLieAlgebraSpec, SuperMatrix};
use crate::linalg::{
    matrix_vec_serde, max_abs, orthonormal_columns, rank, re, vec_of, CMatrix, CVector, LeastSquares, C64, RANK_TOL,
    ZERO,
};

#[derive(Debug, Clone)]
pub struct PoincareSuperAlgebra {
    pub rep: GammaRep,
    pub form: AdmissibleForm,
    pub pi: PiMap,
    pub spec: SuperLieAlgebraSpec,
    so: Vec<CMatrix>,
}

impl PoincareSuperAlgebra {
    pub fn m(&self) -> usize {
        self.rep.m()
    }

    pub fn n(&self) -> usize {
        self.rep.n()
    }

    pub fn spin_dim(&self) -> usize {
        self.so.len()
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Basis position of the rotation generator with index `p` in `so_pairs`.
    pub fn spin_index(&self, p: usize) -> usize {
        p
    }

    pub fn v0_index(&self, a: usize) -> usize {
        self.spin_dim() + a
    }

    pub fn v1_index(&self, j: usize) -> usize {
        self.spin_dim() + self.m() + j
    }

    pub fn so_generators(&self) -> &[CMatrix] {
        &self.so
    }

    /// `[s₁, s₂]` as a vector in `V₀`.
    pub fn odd_bracket(&self, s1: &CVector, s2: &CVector) -> Vec<C64> {
        let d = self.dim();
        let embed = |s: &CVector| {
            let mut x = vec![ZERO; d];
            for (j, v) in s.iter().enumerate() {
                x[self.v1_index(j)] = *v;
            }
            x
        };
        let b = self.spec.bracket(&embed(s1), &embed(s2));
        (0..self.m()).map(|a| b[self.v0_index(a)]).collect()
    }
}

fn sparse_from(values: impl IntoIterator<Item = (usize, C64)>) -> Vec<(usize, C64)> {
    values.into_iter().filter(|(_, c)| *c != ZERO).collect()
}

pub fn build_poincare(rep: &GammaRep, form: &AdmissibleForm) -> Result<PoincareSuperAlgebra> {
    if !form.is_suitable() {
        return Err(Error::NotSuitable { sigma: form.sigma, tau: form.tau });
    }
    if !form.nondegenerate {
        return Err(Error::Degenerate);
    }
    let pi = build_pi(rep, form)?;
    let (m, n) = (rep.m(), rep.n());
    let pairs = so_pairs(m);
    let so = so_basis(rep.signature, rep.profile.convention);
    let d_spin = so.len();
    let spin_images = pairs
        .iter()
        .map(|&(i, j)| spin_generator(rep, i, j))
        .collect::<Result<Vec<_>>>()?;

    let mut labels: Vec<String> = pairs.iter().map(|(i, j)| format!("E{}_{}", i + 1, j + 1)).collect();
    labels.extend((1..=m).map(|a| format!("e{a}")));
    labels.extend((1..=n).map(|j| format!("theta{j}")));
    let mut parities = vec![Parity::Even; d_spin + m];
    parities.extend(vec![Parity::Odd; n]);
    let mut spec = SuperLieAlgebraSpec::new(labels, parities)?;
    let v0 = |a: usize| d_spin + a;
    let v1 = |j: usize| d_spin + m + j;

    for p in 0..d_spin {
        for q in p + 1..d_spin {
            let c = &so[p] * &so[q] - &so[q] * &so[p];
            let coords = so_coordinates(rep.signature, rep.profile.convention, &c)?;
            spec.set_bracket(p, q, sparse_from(coords.into_iter().enumerate()));
        }
        for a in 0..m {
            spec.set_bracket(p, v0(a), sparse_from((0..m).map(|b| (v0(b), so[p][(b, a)]))));
        }
        for j in 0..n {
            spec.set_bracket(p, v1(j), sparse_from((0..n).map(|k| (v1(k), spin_images[p][(k, j)]))));
        }
    }
    for i in 0..n {
        for j in i..n {
            spec.set_bracket(v1(i), v1(j), sparse_from((0..m).map(|a| (v0(a), pi.entry(a, i, j)))));
        }
    }
    Ok(PoincareSuperAlgebra {
        rep: rep.clone(),
        form: form.clone(),
        pi,
        spec,
        so,
    })
}

/// Super Jacobi residual of the assembled algebra.
pub fn jacobi_residual(p: &PoincareSuperAlgebra) -> f64 {
    check_super_jacobi(&p.spec)
}

/// `ad*_x` on `p(V)*` in the dual basis: column `k` is the image of the
/// covector dual to basis element `k`.
pub fn coadjoint_matrix(spec: &SuperLieAlgebraSpec, x: usize) -> CMatrix {
    let d = spec.dim();
    let px = spec.parities()[x];
    let mut out = CMatrix::zeros(d, d);
    for l in 0..d {
        for (k, c) in spec.bracket_basis(x, l) {
            out[(l, *k)] -= c * px.koszul_sign(spec.parities()[*k]);
        }
    }
    out
}

/// The induced action on `V* ≅ p(V)*/V^⊥`, one matrix per basis element of
/// `p(V)`, in the basis `(e^1..e^m, θ_1..θ_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoadjointRep {
    pub m: usize,
    pub n: usize,
    pub parities: Vec<Parity>,
    #[serde(with = "matrix_vec_serde")]
    pub alpha: Vec<CMatrix>,
    /// Largest component of `ad*_x(V^⊥)` outside `V^⊥`.
    pub invariance_residual: f64,
}

impl CoadjointRep {
    /// `dim ker α` by rank of the stacked images.
    pub fn kernel_dim(&self) -> usize {
        let len = (self.m + self.n).pow(2);
        let cols = CMatrix::from_fn(len, self.alpha.len(), |r, c| {
            let a = &self.alpha[c];
            a[(r % a.nrows(), r / a.nrows())]
        });
        self.alpha.len() - rank(&cols, RANK_TOL)
    }

    /// `max |α([x,y]) − [α(x), α(y)]|` over basis pairs.
    pub fn homomorphism_residual(&self, spec: &SuperLieAlgebraSpec) -> f64 {
        let d = self.alpha.len();
        let mut worst: f64 = 0.0;
        for x in 0..d {
            for y in 0..d {
                let sign = self.parities[x].koszul_sign(self.parities[y]);
                let comm = &self.alpha[x] * &self.alpha[y] - &self.alpha[y] * &self.alpha[x] * re(sign);
                let mut lhs = CMatrix::zeros(self.m + self.n, self.m + self.n);
                for (k, c) in spec.bracket_basis(x, y) {
                    lhs += &self.alpha[*k] * *c;
                }
                worst = worst.max(max_abs(&(lhs - comm)));
            }
        }
        worst
    }
}

pub fn coadjoint_rep(p: &PoincareSuperAlgebra) -> Result<CoadjointRep> {
    let d = p.dim();
    let ds = p.spin_dim();
    let dv = d - ds;
    let mut alpha = Vec::with_capacity(d);
    let mut invariance: f64 = 0.0;
    for x in 0..d {
        let full = coadjoint_matrix(&p.spec, x);
        // V^⊥ is spanned by the spin covectors: their images must stay there
        for k in 0..ds {
            for l in ds..d {
                invariance = invariance.max(full[(l, k)].norm());
            }
        }
        alpha.push(full.view((ds, ds), (dv, dv)).into_owned());
    }
    if invariance > 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "annihilator of V is not coadjoint invariant (residual {invariance:.3e})"
        )));
    }
    Ok(CoadjointRep {
        m: p.m(),
        n: p.n(),
        parities: p.spec.parities().to_vec(),
        alpha,
        invariance_residual: invariance,
    })
}

/// Matrix algebra `g = g₀ ⊕ g₁ ⊂ gl(m|n)` with a least-squares projector
/// onto its span.
#[derive(Debug, Clone)]
pub struct StructureAlgebra {
    m: usize,
    n: usize,
    even: Vec<CMatrix>,
    odd: Vec<CMatrix>,
    solver: LeastSquares,
}

impl StructureAlgebra {
    pub fn new(m: usize, n: usize, even: Vec<CMatrix>, odd: Vec<CMatrix>) -> Self {
        let len = (m + n) * (m + n);
        let all: Vec<&CMatrix> = even.iter().chain(&odd).collect();
        let cols = CMatrix::from_fn(len, all.len(), |r, c| all[c][(r % (m + n), r / (m + n))]);
        StructureAlgebra {
            m,
            n,
            even,
            odd,
            solver: LeastSquares::new(cols),
        }
    }

    pub fn dims(&self) -> SuperDim {
        SuperDim::new(self.m, self.n)
    }

    pub fn even(&self) -> &[CMatrix] {
        &self.even
    }

    /// `C_s` for `s = θ_k`.
    pub fn odd(&self) -> &[CMatrix] {
        &self.odd
    }

    pub fn basis(&self) -> Vec<CMatrix> {
        self.even.iter().chain(&self.odd).cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `C_s = Σ s_k C_{θ_k}`.
    pub fn odd_element(&self, s: &CVector) -> CMatrix {
        self.odd
            .iter()
            .zip(s.iter())
            .fold(CMatrix::zeros(self.m + self.n, self.m + self.n), |acc, (c, x)| acc + c * *x)
    }

    /// Coordinates and residual of the projection of a scalar matrix.
    pub fn project(&self, x: &CMatrix) -> (CVector, f64) {
        self.solver.solve(&vec_of(x))
    }

    /// Largest entry of any basis matrix in the upper-right `m×n` block.
    pub fn upper_right_max(&self) -> f64 {
        self.even
            .iter()
            .chain(&self.odd)
            .map(|b| max_abs(&b.view((0, self.m), (self.m, self.n)).into_owned()))
            .fold(0.0, f64::max)
    }

    /// Residual of `[g₀, g₁] ⊆ g₁`, `[g₀, g₀] ⊆ g₀` and `[g₁, g₁] = 0`.
    pub fn closure_residual(&self) -> f64 {
        let odd_only = StructureAlgebra::new(self.m, self.n, Vec::new(), self.odd.clone());
        let even_only = StructureAlgebra::new(self.m, self.n, self.even.clone(), Vec::new());
        let mut worst: f64 = 0.0;
        for a in &self.even {
            for b in &self.even {
                worst = worst.max(even_only.project(&(a * b - b * a)).1);
            }
            for c in &self.odd {
                worst = worst.max(odd_only.project(&(a * c - c * a)).1);
            }
        }
        for c in &self.odd {
            for e in &self.odd {
                worst = worst.max(max_abs(&(c * e + e * c)));
            }
        }
        worst
    }
}

/// Basis of `V₀` used for the dual coordinates `e^i`; columns are the basis
/// vectors in standard coordinates.
pub fn check_orthonormal(rep: &GammaRep, basis: &CMatrix) -> Result<()> {
    let m = rep.m();
    if basis.nrows() != m || basis.ncols() != m {
        return Err(Error::DimensionMismatch(format!("{}x{} basis for m = {m}", basis.nrows(), basis.ncols())));
    }
    let eta = CMatrix::from_diagonal(&CVector::from_iterator(m, rep.signature.metric().into_iter().map(re)));
    let dev = max_abs(&(basis.transpose() * &eta * basis - &eta));
    if dev > 1e-10 {
        return Err(Error::NonOrthonormalBasis(dev));
    }
    Ok(())
}

/// `g = α(p(V))` written in the dual basis `(e^i, θ_j)` of the given
/// orthonormal frame of `V₀`. Even part: `α(E)` for the rotation
/// generators. Odd part: `C_{θ_k} = −α(θ_k)`, whose only nonzero block is
/// the lower-left one with `C^{ji} = e^i(π(θ_k ∨ θ_j))`.
pub fn matrix_realization(p: &PoincareSuperAlgebra, a: &CoadjointRep, frame: &CMatrix) -> Result<StructureAlgebra> {
    check_orthonormal(&p.rep, frame)?;
    let (m, n) = (p.m(), p.n());
    let mut t = CMatrix::identity(m + n, m + n);
    t.view_mut((0, 0), (m, m)).copy_from(&frame.transpose());
    let t_inv = t
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NonOrthonormalBasis(f64::INFINITY))?;
    let conj = |x: &CMatrix| &t * x * &t_inv;
    let even = (0..p.spin_dim()).map(|k| conj(&a.alpha[p.spin_index(k)])).collect();
    let odd = (0..n).map(|j| conj(&a.alpha[p.v1_index(j)]) * re(-1.0)).collect();
    Ok(StructureAlgebra::new(m, n, even, odd))
}

/// `exp(t Σ c_k g₀_k)`, an element of the connected group `Spin_σ`.
pub fn spin_sigma_element(sa: &StructureAlgebra, coeffs: &[f64], t: f64) -> Result<CMatrix> {
    if coeffs.len() != sa.even.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} generators",
            coeffs.len(),
            sa.even.len()
        )));
    }
    let x = sa
        .even
        .iter()
        .zip(coeffs)
        .fold(CMatrix::zeros(sa.m + sa.n, sa.m + sa.n), |acc, (e, c)| acc + e * re(*c * t));
    Ok(x.exp())
}

fn span_projector(basis: &[CMatrix]) -> CMatrix {
    let len = basis.first().map_or(0, |b| b.len());
    let cols = CMatrix::from_fn(len, basis.len(), |r, c| {
        let b = &basis[c];
        b[(r % b.nrows(), r / b.nrows())]
    });
    let q = orthonormal_columns(&cols, RANK_TOL);
    &q * q.adjoint()
}

/// Frobenius distance between the span of `g` and the span of `h⁻¹ g h`.
pub fn conjugation_distance(sa: &StructureAlgebra, h: &CMatrix) -> Result<f64> {
    let h_inv = h
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvariantViolation("conjugating matrix is singular".into()))?;
    let basis = sa.basis();
    let moved: Vec<CMatrix> = basis.iter().map(|b| &h_inv * b * h).collect();
    Ok((span_projector(&basis) - span_projector(&moved)).norm())
}

/// Whether conjugation by `h` maps `g` onto itself.
pub fn check_basis_invariance(sa: &StructureAlgebra, h: &CMatrix) -> Result<bool> {
    Ok(conjugation_distance(sa, h)? < 1e-8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    /// One exterior coefficient per basis element of `g` (even then odd).
    pub coeffs: Vec<ExteriorElement>,
    pub residual: f64,
}

/// Least-squares decomposition of `M ∈ gl(m|n) ⊗ ΛRᵍ` along `g ⊗ ΛRᵍ`,
/// monomial by monomial.
pub fn g_membership_solve(x: &SuperMatrix, sa: &StructureAlgebra) -> Result<Membership> {
    if x.rows() != sa.dims() || x.cols() != sa.dims() {
        return Err(Error::DimensionMismatch(format!(
            "supermatrix must be {}|{} square",
            sa.m, sa.n
        )));
    }
    let g = x.generators();
    let mut coeffs = vec![ExteriorElement::zero(g); sa.len()];
    let mut sq = 0.0;
    let components: BTreeMap<u32, CMatrix> = x.components();
    for (mask, comp) in components {
        let (c, r) = sa.project(&comp);
        sq += r * r;
        for (k, v) in c.iter().enumerate() {
            if v.norm() > 0.0 {
                coeffs[k].add_term(mask, *v);
            }
        }
    }
    Ok(Membership { coeffs, residual: sq.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_gamma_profile, Profile, Signature};
    use crate::forms::{default_form, find_admissible_forms, suitable_forms};
    use crate::linalg::{commutator, ONE};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn algebra(k: usize, l: usize) -> PoincareSuperAlgebra {
        let rep = build_gamma_profile(Signature::new(k, l).unwrap(), Profile::default()).unwrap();
        let form = default_form(&rep).unwrap();
        build_poincare(&rep, &form).unwrap()
    }

    fn realization(p: &PoincareSuperAlgebra) -> StructureAlgebra {
        let a = coadjoint_rep(p).unwrap();
        matrix_realization(p, &a, &CMatrix::identity(p.m(), p.m())).unwrap()
    }

    #[test]
    fn rejects_unsuitable_and_degenerate_forms() {
        let rep = build_gamma_profile(Signature::new(3, 1).unwrap(), Profile::default()).unwrap();
        let classes = find_admissible_forms(&rep);
        let unsuitable = classes.iter().find(|c| !c.is_suitable() && c.dim() > 0).unwrap();
        assert!(matches!(build_poincare(&rep, &unsuitable.basis[0]), Err(Error::NotSuitable { .. })));
        let mut degenerate = default_form(&rep).unwrap();
        degenerate.b *= re(0.0);
        degenerate.nondegenerate = false;
        assert_eq!(build_poincare(&rep, &degenerate).unwrap_err(), Error::Degenerate);
    }

    #[test]
    fn jacobi_and_axioms_small_signatures() {
        for (k, l) in [(1, 0), (1, 1), (2, 1), (3, 1), (4, 0), (2, 2)] {
            let p = algebra(k, l);
            assert!(p.spec.check_axioms() < 1e-12);
            assert!(jacobi_residual(&p) < 1e-10, "({k},{l})");
        }
    }

    #[test]
    fn translations_are_central_in_v() {
        let p = algebra(3, 1);
        for a in 0..p.m() {
            for j in p.spin_dim()..p.dim() {
                assert!(p.spec.bracket_basis(p.v0_index(a), j).is_empty());
            }
        }
    }

    #[test]
    fn odd_bracket_matches_pi() {
        let p = algebra(3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let s = CVector::from_fn(p.n(), |_, _| re(rng.gen_range(-1.0..1.0)));
            let via_spec = p.odd_bracket(&s, &s);
            let direct = p.pi.apply(&s, &s);
            for (x, y) in via_spec.iter().zip(&direct) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coadjoint_structure() {
        for (k, l) in [(1, 1), (3, 0), (3, 1), (2, 2)] {
            let p = algebra(k, l);
            let a = coadjoint_rep(&p).unwrap();
            assert!(a.invariance_residual < 1e-12);
            assert_eq!(a.kernel_dim(), p.m());
            for j in 0..p.m() {
                assert_eq!(max_abs(&a.alpha[p.v0_index(j)]), 0.0);
            }
            assert!(a.homomorphism_residual(&p.spec) < 1e-10, "({k},{l})");
        }
    }

    #[test]
    fn even_images_are_negative_transposes() {
        let p = algebra(3, 1);
        let a = coadjoint_rep(&p).unwrap();
        let (m, n) = (p.m(), p.n());
        for (idx, &(i, j)) in so_pairs(m).iter().enumerate() {
            let e = &p.so_generators()[idx];
            let s = spin_generator(&p.rep, i, j).unwrap();
            let mut expected = CMatrix::zeros(m + n, m + n);
            expected.view_mut((0, 0), (m, m)).copy_from(&(-e.transpose()));
            expected.view_mut((m, m), (n, n)).copy_from(&(-s.transpose()));
            assert!(max_abs(&(&a.alpha[idx] - expected)) < 1e-14);
        }
    }

    /// diag(η, B) carries the dual action back to diag(A, σ(A)).
    #[test]
    fn even_block_is_equivalent_to_module_action() {
        let p = algebra(3, 1);
        let sa = realization(&p);
        let (m, n) = (p.m(), p.n());
        let mut d = CMatrix::zeros(m + n, m + n);
        for i in 0..m {
            d[(i, i)] = re(p.rep.eps(i));
        }
        d.view_mut((m, m), (n, n)).copy_from(&p.form.b);
        let d_inv = d.clone().try_inverse().unwrap();
        for (idx, &(i, j)) in so_pairs(m).iter().enumerate() {
            let g = &d_inv * &sa.even()[idx] * &d;
            assert!(max_abs(&(g.view((0, 0), (m, m)).into_owned() - &p.so_generators()[idx])) < 1e-12);
            let s = spin_generator(&p.rep, i, j).unwrap();
            assert!(max_abs(&(g.view((m, m), (n, n)).into_owned() - s)) < 1e-12);
        }
    }

    #[test]
    fn odd_images_follow_pi() {
        let p = algebra(3, 1);
        let sa = realization(&p);
        let (m, n) = (p.m(), p.n());
        assert_eq!(sa.upper_right_max(), 0.0);
        for k in 0..n {
            let c = &sa.odd()[k];
            for j in 0..n {
                for i in 0..m {
                    assert!((c[(m + j, i)] - p.pi.entry(i, k, j)).norm() < 1e-13);
                }
            }
            assert_eq!(max_abs(&c.view((0, 0), (m, m + n)).into_owned()), 0.0);
            assert_eq!(max_abs(&c.view((m, m), (n, n)).into_owned()), 0.0);
        }
        assert!(sa.closure_residual() < 1e-10);
    }

    #[test]
    fn rotated_orthonormal_frame_is_accepted() {
        let p = algebra(3, 0);
        let a = coadjoint_rep(&p).unwrap();
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let q = CMatrix::from_row_slice(3, 3, &[re(c), re(-s), ZERO, re(s), re(c), ZERO, ZERO, ZERO, ONE]);
        let sa = matrix_realization(&p, &a, &q).unwrap();
        assert!(sa.closure_residual() < 1e-10);
        assert_eq!(sa.upper_right_max(), 0.0);
        let skewed = CMatrix::from_row_slice(3, 3, &[ONE, re(0.5), ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ONE]);
        assert!(matches!(matrix_realization(&p, &a, &skewed), Err(Error::NonOrthonormalBasis(_))));
    }

    #[test]
    fn basis_invariance_under_spin_sigma() {
        let p = algebra(3, 1);
        let sa = realization(&p);
        let dim = p.m() + p.n();
        assert!(check_basis_invariance(&sa, &CMatrix::identity(dim, dim)).unwrap());
        let mut coeffs = vec![0.0; sa.even().len()];
        coeffs[0] = 1.0;
        let g = spin_sigma_element(&sa, &coeffs, 0.3).unwrap();
        assert!(check_basis_invariance(&sa, &g).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut h = CMatrix::identity(dim, dim);
        for r in 0..p.m() {
            for c in 0..p.m() {
                h[(r, c)] += re(rng.gen_range(-0.5..0.5));
            }
        }
        for r in p.m()..dim {
            for c in p.m()..dim {
                h[(r, c)] += re(rng.gen_range(-0.5..0.5));
            }
        }
        assert!(!check_basis_invariance(&sa, &h).unwrap());
    }

    #[test]
    fn membership_of_zero_and_excluded_block() {
        let p = algebra(1, 1);
        let sa = realization(&p);
        let dims = sa.dims();
        let zero = SuperMatrix::zeros(dims, dims, 2);
        let r = g_membership_solve(&zero, &sa).unwrap();
        assert!(r.coeffs.iter().all(ExteriorElement::is_zero));
        assert_eq!(r.residual, 0.0);
        let mut bad = SuperMatrix::zeros(dims, dims, 2);
        bad.set(0, p.m(), ExteriorElement::generator(2, 0)).unwrap();
        assert!(g_membership_solve(&bad, &sa).unwrap().residual >= 1.0 - 1e-12);
        let wrong = SuperMatrix::zeros(SuperDim::new(1, 1), SuperDim::new(1, 1), 2);
        assert!(g_membership_solve(&wrong, &sa).is_err());
    }

    #[test]
    fn structure_closes_for_every_suitable_form() {
        let rep = build_gamma_profile(Signature::new(3, 1).unwrap(), Profile::default()).unwrap();
        for f in suitable_forms(&rep) {
            let p = build_poincare(&rep, &f).unwrap();
            assert!(jacobi_residual(&p) < 1e-10);
            let sa = realization(&p);
            assert!(sa.closure_residual() < 1e-10);
            // odd generators bracket into the odd span through commutators
            let x = &sa.even()[0];
            let y = sa.odd_element(&CVector::from_element(p.n(), ONE));
            assert!(sa.project(&commutator(x, &y)).1 < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn membership_round_trip(seed in any::<u64>()) {
            let p = algebra(1, 1);
            let sa = realization(&p);
            let dims = sa.dims();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = 2;
            let coeffs: Vec<ExteriorElement> = (0..sa.len())
                .map(|_| {
                    let mut e = ExteriorElement::zero(g);
                    for mask in 0..4u32 {
                        e.add_term(mask, re(rng.gen_range(-1.0..1.0)));
                    }
                    e
                })
                .collect();
            let mut x = SuperMatrix::zeros(dims, dims, g);
            for (b, c) in sa.basis().iter().zip(&coeffs) {
                let term = SuperMatrix::from_complex(dims, dims, b, g).unwrap();
                let scaled = {
                    let mut s = SuperMatrix::zeros(dims, dims, g);
                    for r in 0..dims.total() {
                        for col in 0..dims.total() {
                            s.set(r, col, term.get(r, col).mul(c).unwrap()).unwrap();
                        }
                    }
                    s
                };
                x = x.add(&scaled).unwrap();
            }
            let sol = g_membership_solve(&x, &sa).unwrap();
            prop_assert!(sol.residual < 1e-10);
            for (got, want) in sol.coeffs.iter().zip(&coeffs) {
                prop_assert!((got - want).max_abs() < 1e-10);
            }
        }
    }
}
