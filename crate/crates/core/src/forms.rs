//! Admissible bilinear forms on the spinor module and the symmetric map
//! `π: ∨²V₁ → V₀` they induce.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{build_gamma_profile, so_basis, so_pairs, spin_generator, GammaRep, Profile, Signature};
use crate::error::{Error, Result};
use crate::linalg::{
    inverse_condition, matrix_serde, matrix_vec_serde, max_abs, nullspace, rank, re, stacked_nullspace, CMatrix,
    CVector, C64, RANK_TOL, ZERO,
};

/// Smallest `σ_min/σ_max` accepted as non-degenerate.
pub const NONDEGENERACY_TOL: f64 = 1e-10;
const COMBINATION_TRIALS: usize = 20;

/// `(σ, τ)` in the fixed reporting order.
pub const CLASSES: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleForm {
    #[serde(with = "matrix_serde")]
    pub b: CMatrix,
    pub sigma: i8,
    pub tau: i8,
    pub nondegenerate: bool,
}

impl AdmissibleForm {
    pub fn new(b: CMatrix, sigma: i8, tau: i8) -> Self {
        let nondegenerate = is_nondegenerate(&b);
        AdmissibleForm { b, sigma, tau, nondegenerate }
    }

    pub fn is_suitable(&self) -> bool {
        self.sigma * self.tau == 1
    }

    /// `β(s₁, s₂) = s₁ᵀ B s₂`.
    pub fn eval(&self, s1: &CVector, s2: &CVector) -> C64 {
        (s1.transpose() * &self.b * s2)[(0, 0)]
    }

    /// Max violation of `Bᵀ = σB` and `Bρ_i = τρ_iᵀB`.
    pub fn residual(&self, rep: &GammaRep) -> f64 {
        let sym = max_abs(&(self.b.transpose() - &self.b * re(self.sigma as f64)));
        rep.gammas().iter().fold(sym, |acc, g| {
            acc.max(max_abs(&(&self.b * g - g.transpose() * &self.b * re(self.tau as f64))))
        })
    }
}

pub fn is_suitable(f: &AdmissibleForm) -> bool {
    f.is_suitable()
}

pub fn is_nondegenerate(b: &CMatrix) -> bool {
    b.nrows() > 0 && inverse_condition(b) > NONDEGENERACY_TOL
}

/// Solution space of one `(σ, τ)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormClass {
    pub sigma: i8,
    pub tau: i8,
    pub basis: Vec<AdmissibleForm>,
    /// A non-degenerate member if the search found one.
    pub nondegenerate_member: Option<AdmissibleForm>,
}

impl FormClass {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_suitable(&self) -> bool {
        self.sigma * self.tau == 1
    }
}

/// Basis of symmetric (`σ = 1`) or skew (`σ = −1`) `n×n` matrices.
fn symmetry_basis(n: usize, sigma: i8) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if i == j && sigma < 0 {
                continue;
            }
            let mut e = CMatrix::zeros(n, n);
            e[(i, j)] = re(1.0);
            e[(j, i)] = re(sigma as f64);
            out.push(e);
        }
    }
    out
}

fn solve_class(rep: &GammaRep, sigma: i8, tau: i8) -> Vec<CMatrix> {
    let n = rep.n();
    let sym = symmetry_basis(n, sigma);
    if sym.is_empty() {
        return Vec::new();
    }
    // column p holds vec(S_p ρ_i − τ ρ_iᵀ S_p), one block per gamma
    let blocks: Vec<CMatrix> = rep
        .gammas()
        .iter()
        .map(|g| {
            let gt = g.transpose() * re(tau as f64);
            let mut block = CMatrix::zeros(n * n, sym.len());
            for (p, s) in sym.iter().enumerate() {
                let r = s * g - &gt * s;
                block.column_mut(p).copy_from_slice(r.as_slice());
            }
            block
        })
        .collect();
    stacked_nullspace(&blocks, RANK_TOL)
        .into_iter()
        .map(|x| {
            sym.iter()
                .zip(x.iter())
                .fold(CMatrix::zeros(n, n), |acc, (s, c)| acc + s * *c)
        })
        .collect()
}

fn class_seed(rep: &GammaRep, sigma: i8, tau: i8) -> u64 {
    let s = rep.signature;
    ((s.k as u64) << 24) ^ ((s.l as u64) << 16) ^ (((sigma + 1) as u64) << 8) ^ ((tau + 1) as u64) ^ 0x5eed
}

/// Random combinations of the basis, real coefficients for real modules.
fn nondegenerate_combination(rep: &GammaRep, basis: &[AdmissibleForm], sigma: i8, tau: i8) -> Option<AdmissibleForm> {
    if let Some(f) = basis.iter().find(|f| f.nondegenerate) {
        return Some(f.clone());
    }
    if basis.len() < 2 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(class_seed(rep, sigma, tau));
    let real = rep.is_real();
    for _ in 0..COMBINATION_TRIALS {
        let b = basis.iter().fold(CMatrix::zeros(rep.n(), rep.n()), |acc, f| {
            let c = if real {
                re(rng.gen_range(-1.0..1.0))
            } else {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            };
            acc + &f.b * c
        });
        if is_nondegenerate(&b) {
            return Some(AdmissibleForm::new(b, sigma, tau));
        }
    }
    None
}

/// All four `(σ, τ)` classes in `CLASSES` order.
pub fn find_admissible_forms(rep: &GammaRep) -> Vec<FormClass> {
    CLASSES
        .iter()
        .map(|&(sigma, tau)| {
            let basis: Vec<AdmissibleForm> = solve_class(rep, sigma, tau)
                .into_iter()
                .map(|b| AdmissibleForm::new(b, sigma, tau))
                .collect();
            let nondegenerate_member = nondegenerate_combination(rep, &basis, sigma, tau);
            FormClass { sigma, tau, basis, nondegenerate_member }
        })
        .collect()
}

/// Dimension of `{B : Bρ_i = τρ_iᵀB ∀i}` with no symmetry imposed.
pub fn type_space_dim(rep: &GammaRep, tau: i8) -> usize {
    let n = rep.n();
    let id = CMatrix::identity(n, n);
    let mut rows = CMatrix::zeros(rep.m() * n * n, n * n);
    for (i, g) in rep.gammas().iter().enumerate() {
        let block = g.transpose().kronecker(&id) - id.kronecker(&g.transpose()) * re(tau as f64);
        rows.view_mut((i * n * n, 0), (n * n, n * n)).copy_from(&block);
    }
    n * n - rank(&rows, RANK_TOL)
}

/// Suitable non-degenerate forms: every non-degenerate basis element of a
/// suitable class, or one generic combination when no basis element is.
pub fn suitable_forms(rep: &GammaRep) -> Vec<AdmissibleForm> {
    let mut out = Vec::new();
    for class in find_admissible_forms(rep).into_iter().filter(FormClass::is_suitable) {
        let direct: Vec<_> = class.basis.iter().filter(|f| f.nondegenerate).cloned().collect();
        if direct.is_empty() {
            out.extend(class.nondegenerate_member);
        } else {
            out.extend(direct);
        }
    }
    out
}

/// Number of independent suitable forms: the summed dimensions of the
/// suitable classes.
pub fn suitable_form_count(rep: &GammaRep) -> usize {
    find_admissible_forms(rep)
        .iter()
        .filter(|c| c.is_suitable())
        .map(FormClass::dim)
        .sum()
}

/// The first suitable non-degenerate form in catalog order.
pub fn default_form(rep: &GammaRep) -> Result<AdmissibleForm> {
    suitable_forms(rep)
        .into_iter()
        .next()
        .ok_or(Error::NoSuitableForm { k: rep.signature.k, l: rep.signature.l })
}

/// `(m, s) mod (8, 8)` lies in the exceptional set.
pub fn expected_exception(m: usize, s: i64) -> bool {
    let key = ((m % 8) as i64, s.rem_euclid(8));
    matches!(key, (5, 7) | (6, 0) | (6, 6) | (7, 7))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub sigma: i8,
    pub tau: i8,
    pub space_dim: usize,
    pub has_nondegenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub signature: Signature,
    pub profile: Profile,
    pub n: usize,
    pub classes: Vec<ClassSummary>,
    pub nondegenerate_suitable_exists: bool,
}

impl ScanEntry {
    pub fn m(&self) -> usize {
        self.signature.m()
    }

    pub fn s(&self) -> i64 {
        self.signature.s()
    }
}

pub fn scan_signature(sig: Signature, profile: Profile) -> Result<ScanEntry> {
    let rep = build_gamma_profile(sig, profile)?;
    let classes: Vec<ClassSummary> = find_admissible_forms(&rep)
        .into_iter()
        .map(|c| ClassSummary {
            sigma: c.sigma,
            tau: c.tau,
            space_dim: c.dim(),
            has_nondegenerate: c.nondegenerate_member.is_some(),
        })
        .collect();
    let exists = classes.iter().any(|c| c.sigma * c.tau == 1 && c.has_nondegenerate);
    Ok(ScanEntry {
        signature: sig,
        profile,
        n: rep.n(),
        classes,
        nondegenerate_suitable_exists: exists,
    })
}

/// Every signature with `m ≤ m_max` under every requested profile, ordered
/// by profile, then `(m, s)`.
pub fn existence_scan(m_max: usize, profiles: &[Profile]) -> Result<Vec<ScanEntry>> {
    if m_max > 8 {
        return Err(Error::SolverTooLarge(format!("existence scan limited to m ≤ 8, got {m_max}")));
    }
    let jobs: Vec<(Profile, Signature)> = profiles
        .iter()
        .flat_map(|p| Signature::all_up_to(m_max).into_iter().map(move |s| (*p, s)))
        .collect();
    let mut out = jobs
        .par_iter()
        .map(|(p, s)| scan_signature(*s, *p))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|e| (e.profile, e.m(), e.s()));
    Ok(out)
}

/// Signatures flagged (no non-degenerate suitable form) under `profile`.
pub fn flagged(scan: &[ScanEntry], profile: Profile) -> Vec<Signature> {
    scan.iter()
        .filter(|e| e.profile == profile && !e.nondegenerate_suitable_exists)
        .map(|e| e.signature)
        .collect()
}

/// Profiles whose flags coincide with the mod-(8,8) exception rule.
pub fn matching_profiles(scan: &[ScanEntry]) -> Vec<Profile> {
    let mut profiles: Vec<Profile> = scan.iter().map(|e| e.profile).collect();
    profiles.dedup();
    profiles
        .into_iter()
        .filter(|p| {
            scan.iter()
                .filter(|e| e.profile == *p)
                .all(|e| e.nondegenerate_suitable_exists != expected_exception(e.m(), e.s()))
        })
        .collect()
}

/// `π^a(s₁, s₂) = s₁ᵀ P_a s₂` with `P_a = ε_a ρ_aᵀ B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiMap {
    #[serde(with = "matrix_vec_serde")]
    coeffs: Vec<CMatrix>,
}

impl PiMap {
    pub fn from_coeffs(coeffs: Vec<CMatrix>) -> Self {
        PiMap { coeffs }
    }

    pub fn m(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, a: usize) -> &CMatrix {
        &self.coeffs[a]
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// `π[a][j1][j2]`.
    pub fn entry(&self, a: usize, j1: usize, j2: usize) -> C64 {
        self.coeffs[a][(j1, j2)]
    }

    /// Components of `π(s₁ ∨ s₂)` on the orthonormal basis `e_a`.
    pub fn apply(&self, s1: &CVector, s2: &CVector) -> Vec<C64> {
        self.coeffs.iter().map(|p| (s1.transpose() * p * s2)[(0, 0)]).collect()
    }
}

pub fn build_pi(rep: &GammaRep, form: &AdmissibleForm) -> Result<PiMap> {
    if !form.is_suitable() {
        return Err(Error::NotSuitable { sigma: form.sigma, tau: form.tau });
    }
    if form.b.nrows() != rep.n() || form.b.ncols() != rep.n() {
        return Err(Error::DimensionMismatch(format!("form of size {} for n = {}", form.b.nrows(), rep.n())));
    }
    Ok(PiMap {
        coeffs: (0..rep.m())
            .map(|a| rep.gamma(a).transpose() * &form.b * re(rep.eps(a)))
            .collect(),
    })
}

/// `max |π(σ(E)s₁∨s₂) + π(s₁∨σ(E)s₂) − Eπ(s₁∨s₂)|` over `so(k,l)` basis
/// generators and basis spinors.
pub fn check_pi_equivariance(pi: &PiMap, rep: &GammaRep) -> f64 {
    let basis = so_basis(rep.signature, rep.profile.convention);
    let mut worst: f64 = 0.0;
    for ((i, j), e) in so_pairs(rep.m()).into_iter().zip(&basis) {
        let s = spin_generator(rep, i, j).expect("valid pair");
        for a in 0..rep.m() {
            let mut r = s.transpose() * pi.coeff(a) + pi.coeff(a) * &s;
            for b in 0..rep.m() {
                if e[(a, b)] != ZERO {
                    r -= pi.coeff(b) * e[(a, b)];
                }
            }
            worst = worst.max(max_abs(&r));
        }
    }
    worst
}

/// Position of the unordered pair `{a, b}` among `(a, b), a ≤ b`, row-major.
fn packed(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * n - a * a.saturating_sub(1) / 2 + b - a
}

/// Dimension of the space of `Spin(V₀)`-equivariant symmetric maps
/// `∨²V₁ → V₀`, over the scalar field of the module.
pub fn equivariant_hom_dim(rep: &GammaRep) -> Result<usize> {
    let (m, n) = (rep.m(), rep.n());
    if m > 6 {
        return Err(Error::SolverTooLarge(format!("equivariant solve limited to m ≤ 6, got m = {m}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let np = pairs.len();
    let idx = |a: usize, b: usize| packed(n, a, b);
    let unknowns = m * np;
    if m == 1 {
        return Ok(unknowns);
    }
    let basis = so_basis(rep.signature, rep.profile.convention);
    let all_pairs = so_pairs(m);
    let mut blocks = Vec::new();
    // adjacent rotations generate so(k,l)
    for g in 0..m - 1 {
        let pos = all_pairs.iter().position(|p| *p == (g, g + 1)).expect("adjacent pair");
        let e = &basis[pos];
        let s = spin_generator(rep, g, g + 1)?;
        let mut block = CMatrix::zeros(unknowns, unknowns);
        for a in 0..m {
            for (row_p, &(j1, j2)) in pairs.iter().enumerate() {
                let row = a * np + row_p;
                for k in 0..n {
                    block[(row, a * np + idx(k, j2))] += s[(k, j1)];
                    block[(row, a * np + idx(j1, k))] += s[(k, j2)];
                }
                for b in 0..m {
                    block[(row, b * np + row_p)] -= e[(a, b)];
                }
            }
        }
        blocks.push(block);
    }
    Ok(stacked_nullspace(&blocks, RANK_TOL).len())
}

/// Nullspace dimension cross-check helper shared with the tests.
pub fn solution_dim(a: &CMatrix) -> usize {
    nullspace(a, RANK_TOL).len()
}
