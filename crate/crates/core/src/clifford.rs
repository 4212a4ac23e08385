//! Clifford multiplication `ρ: V₀ → End(V₁)` for pseudo-Euclidean
//! signatures and the induced spin representation of `so(k,l)`.
//!
//! The relation is `ρ(v)² = c⟨v,v⟩` with a selectable sign `c`. Gammas are
//! Kronecker products of Pauli blocks, arranged so that they come out real
//! whenever the signature allows it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, kron, matrix_vec_serde, max_abs, re, realify, stacked_nullspace, CMatrix, CVector, C64, I, ONE, RANK_TOL, ZERO,
};

pub const MAX_DIMENSION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub k: usize,
    pub l: usize,
}

impl Signature {
    pub fn new(k: usize, l: usize) -> Result<Self> {
        if k + l == 0 {
            return Err(Error::UnsupportedSignature {
                k,
                l,
                reason: "dimension must be at least 1".into(),
            });
        }
        Ok(Signature { k, l })
    }

    pub fn m(&self) -> usize {
        self.k + self.l
    }

    pub fn s(&self) -> i64 {
        self.k as i64 - self.l as i64
    }

    /// `ε_i` for a zero-based index.
    pub fn eps(&self, i: usize) -> f64 {
        if i < self.k {
            1.0
        } else {
            -1.0
        }
    }

    pub fn metric(&self) -> Vec<f64> {
        (0..self.m()).map(|i| self.eps(i)).collect()
    }

    /// All signatures with `1 ≤ k + l ≤ m_max`, ordered by `m` then `k`.
    pub fn all_up_to(m_max: usize) -> Vec<Signature> {
        (1..=m_max)
            .flat_map(|m| (0..=m).map(move |k| Signature { k, l: m - k }))
            .collect()
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

/// The sign `c` in `ρ(v)² = c⟨v,v⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Convention {
    Minus,
    Plus,
}

impl Convention {
    pub fn sign(self) -> f64 {
        match self {
            Convention::Minus => -1.0,
            Convention::Plus => 1.0,
        }
    }

    pub fn all() -> [Convention; 2] {
        [Convention::Minus, Convention::Plus]
    }
}

impl From<Convention> for i8 {
    fn from(c: Convention) -> i8 {
        c.sign() as i8
    }
}

impl TryFrom<i8> for Convention {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Convention::Minus),
            1 => Ok(Convention::Plus),
            _ => Err(format!("convention must be -1 or 1, got {v}")),
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", i8::from(*self))
    }
}

/// Scalar field of the spinor module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleField {
    /// Complex module of dimension `2^⌊m/2⌋`, complex bilinear forms.
    Complex,
    /// Irreducible real Clifford module, real bilinear forms.
    Real,
}

/// Commutant type of the real irreducible module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleType {
    Real,
    Complex,
    Quaternionic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile {
    pub convention: Convention,
    pub field: ModuleField,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            convention: Convention::Minus,
            field: ModuleField::Real,
        }
    }
}

impl Profile {
    pub fn all() -> Vec<Profile> {
        let mut out = Vec::new();
        for convention in Convention::all() {
            for field in [ModuleField::Complex, ModuleField::Real] {
                out.push(Profile { convention, field });
            }
        }
        out
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let field = match self.field {
            ModuleField::Complex => "complex",
            ModuleField::Real => "real",
        };
        write!(f, "c={} {}", self.convention, field)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRep {
    pub signature: Signature,
    pub profile: Profile,
    /// `None` for the complex profile.
    pub module_type: Option<ModuleType>,
    #[serde(with = "matrix_vec_serde")]
    gammas: Vec<CMatrix>,
}

impl GammaRep {
    /// Wraps arbitrary matrices without checking the Clifford relations.
    pub fn from_parts(signature: Signature, profile: Profile, gammas: Vec<CMatrix>) -> Result<Self> {
        if gammas.len() != signature.m() {
            return Err(Error::DimensionMismatch(format!(
                "{} gammas for dimension {}",
                gammas.len(),
                signature.m()
            )));
        }
        let n = gammas[0].nrows();
        if gammas.iter().any(|g| g.nrows() != n || g.ncols() != n) {
            return Err(Error::DimensionMismatch("gammas must be square of equal size".into()));
        }
        Ok(GammaRep {
            signature,
            profile,
            module_type: None,
            gammas,
        })
    }

    pub fn m(&self) -> usize {
        self.signature.m()
    }

    /// Spinor dimension `dim V₁`.
    pub fn n(&self) -> usize {
        self.gammas[0].nrows()
    }

    pub fn c(&self) -> f64 {
        self.profile.convention.sign()
    }

    pub fn eps(&self, i: usize) -> f64 {
        self.signature.eps(i)
    }

    pub fn gamma(&self, i: usize) -> &CMatrix {
        &self.gammas[i]
    }

    pub fn gammas(&self) -> &[CMatrix] {
        &self.gammas
    }

    pub fn is_real(&self) -> bool {
        self.gammas.iter().all(|g| linalg::is_real(g, 0.0))
    }

    /// `ρ(v) = Σ v^i ρ(e_i)`.
    pub fn rho(&self, v: &[f64]) -> Result<CMatrix> {
        if v.len() != self.m() {
            return Err(Error::DimensionMismatch(format!("vector of length {} for m = {}", v.len(), self.m())));
        }
        let mut out = CMatrix::zeros(self.n(), self.n());
        for (g, vi) in self.gammas.iter().zip(v) {
            if *vi != 0.0 {
                out += g * re(*vi);
            }
        }
        Ok(out)
    }
}

fn pauli() -> (CMatrix, CMatrix, CMatrix, CMatrix) {
    let id = CMatrix::identity(2, 2);
    let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let y = CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    (id, x, y, z)
}

fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| kron(&acc, f))
}

/// Hermitian generators squaring to `+1`, split into real ones
/// (`Z..Z X I..I` and the odd-dimension chirality `Z..Z`) and purely
/// imaginary ones (`Z..Z Y I..I`).
fn euclidean_pools(m: usize) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let (id, x, y, z) = pauli();
    let h = m / 2;
    let mut real = Vec::new();
    let mut imag = Vec::new();
    for j in 0..h {
        let mut fx: Vec<&CMatrix> = vec![&z; j];
        let mut fy = fx.clone();
        fx.push(&x);
        fy.push(&y);
        for _ in j + 1..h {
            fx.push(&id);
            fy.push(&id);
        }
        real.push(kron_all(&fx));
        imag.push(kron_all(&fy));
    }
    if m % 2 == 1 {
        real.push(kron_all(&vec![&z; h]));
    }
    (real, imag)
}

fn complex_gammas(sig: Signature, c: f64) -> Vec<CMatrix> {
    let (mut real, mut imag) = euclidean_pools(sig.m());
    real.reverse();
    imag.reverse();
    (0..sig.m())
        .map(|i| {
            if c * sig.eps(i) < 0.0 {
                match imag.pop() {
                    Some(g) => g * I,
                    None => real.pop().expect("pool size equals m") * I,
                }
            } else {
                match real.pop() {
                    Some(g) => g,
                    None => imag.pop().expect("pool size equals m"),
                }
            }
        })
        .collect()
}

/// Complex-bilinear Clifford module of dimension `2^⌊m/2⌋`.
pub fn build_gamma(sig: Signature, convention: Convention) -> Result<GammaRep> {
    build_gamma_profile(
        sig,
        Profile {
            convention,
            field: ModuleField::Complex,
        },
    )
}

pub fn build_gamma_profile(sig: Signature, profile: Profile) -> Result<GammaRep> {
    if sig.m() == 0 || sig.m() > MAX_DIMENSION {
        return Err(Error::UnsupportedSignature {
            k: sig.k,
            l: sig.l,
            reason: format!("dimension must lie in 1..={MAX_DIMENSION}"),
        });
    }
    let gammas = complex_gammas(sig, profile.convention.sign());
    let (gammas, module_type) = match profile.field {
        ModuleField::Complex => (gammas, None),
        ModuleField::Real => {
            let (g, t) = real_irreducible(gammas)?;
            (g, Some(t))
        }
    };
    Ok(GammaRep {
        signature: sig,
        profile,
        module_type,
        gammas,
    })
}

/// Real irreducible module from an irreducible complex one.
///
/// An antilinear `J = C∘conj` commuting with all gammas exists iff the
/// complex module is self-conjugate; `C C̄ = λI` with the sign of `λ`
/// separating real from quaternionic type. In the real case the fixed
/// points of `J` carry the module; otherwise the realification is already
/// irreducible.
fn real_irreducible(gammas: Vec<CMatrix>) -> Result<(Vec<CMatrix>, ModuleType)> {
    if gammas.iter().all(|g| linalg::is_real(g, 0.0)) {
        return Ok((gammas.iter().map(|g| g.map(|z| re(z.re))).collect(), ModuleType::Real));
    }
    let n = gammas[0].nrows();
    let id = CMatrix::identity(n, n);
    let blocks: Vec<CMatrix> = gammas
        .iter()
        .map(|g| kron(&id, g) - kron(&g.map(|z| z.conj()).transpose(), &id))
        .collect();
    // vec(G C - C conj(G)) = 0 for every gamma
    let ns = stacked_nullspace(&blocks, RANK_TOL);
    let realified = || gammas.iter().map(realify).collect::<Vec<_>>();
    match ns.len() {
        0 => return Ok((realified(), ModuleType::Complex)),
        1 => {}
        d => {
            return Err(Error::InvariantViolation(format!(
                "complex module is reducible: {d}-dimensional space of conjugate intertwiners"
            )))
        }
    }
    let c = linalg::unvec(&ns[0], n, n);
    let cc = &c * c.map(|z| z.conj());
    let lambda = cc[(0, 0)];
    if max_abs(&(&cc - &id * lambda)) > 1e-8 * lambda.norm() || lambda.im.abs() > 1e-8 * lambda.norm() {
        return Err(Error::InvariantViolation("conjugate intertwiner is not a multiple of a structure".into()));
    }
    if lambda.re < 0.0 {
        return Ok((realified(), ModuleType::Quaternionic));
    }
    let c = c / re(lambda.re.sqrt());

    // Fixed points of J, orthonormalized for the real inner product Re<.,.>.
    let mut basis: Vec<CVector> = Vec::new();
    let candidates = (0..n).flat_map(|k| [(k, ONE), (k, I)]);
    for (k, unit) in candidates {
        if basis.len() == n {
            break;
        }
        let mut v = CVector::zeros(n);
        v[k] = unit;
        let mut w = (&v + &c * v.map(|z| z.conj())) * re(0.5);
        for u in &basis {
            let proj = u.dotc(&w).re;
            w -= u * re(proj);
        }
        let norm = w.norm();
        if norm > 1e-8 {
            basis.push(w / re(norm));
        }
    }
    let w = CMatrix::from_columns(&basis);
    let lu = w.clone().lu();
    let mut out = Vec::with_capacity(gammas.len());
    for g in &gammas {
        let r = lu
            .solve(&(g * &w))
            .ok_or_else(|| Error::InvariantViolation("real form basis is singular".into()))?;
        if !linalg::is_real(&r, 1e-9) {
            return Err(Error::InvariantViolation("restricted gamma is not real".into()));
        }
        out.push(r.map(|z| linalg::clean(re(z.re))));
    }
    Ok((out, ModuleType::Real))
}

/// `max_{i,j} |ρ_iρ_j + ρ_jρ_i − 2cε_iδ_ij I|`.
pub fn verify_clifford(rep: &GammaRep) -> f64 {
    let n = rep.n();
    let id = CMatrix::identity(n, n);
    let mut worst: f64 = 0.0;
    for i in 0..rep.m() {
        for j in i..rep.m() {
            let mut ac = rep.gamma(i) * rep.gamma(j) + rep.gamma(j) * rep.gamma(i);
            if i == j {
                ac -= &id * re(2.0 * rep.c() * rep.eps(i));
            }
            worst = worst.max(max_abs(&ac));
        }
    }
    worst
}

fn check_pair(m: usize, i: usize, j: usize) -> Result<()> {
    for idx in [i, j] {
        if idx >= m {
            return Err(Error::IndexOutOfRange { index: idx + 1, max: m });
        }
    }
    if i == j {
        return Err(Error::RepeatedIndex(i + 1));
    }
    Ok(())
}

/// Generator `E_ij` of `so(k,l)` normalised so that `[½ρ_iρ_j, ρ(v)] = ρ(E_ij v)`:
/// `E_ij e_j = cε_j e_i`, `E_ij e_i = −cε_i e_j`.
pub fn so_generator(sig: Signature, convention: Convention, i: usize, j: usize) -> Result<CMatrix> {
    check_pair(sig.m(), i, j)?;
    let c = convention.sign();
    let mut e = CMatrix::zeros(sig.m(), sig.m());
    e[(i, j)] = re(c * sig.eps(j));
    e[(j, i)] = re(-c * sig.eps(i));
    Ok(e)
}

/// Index pairs `i < j` in lexicographic order.
pub fn so_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
}

pub fn so_basis(sig: Signature, convention: Convention) -> Vec<CMatrix> {
    so_pairs(sig.m())
        .into_iter()
        .map(|(i, j)| so_generator(sig, convention, i, j).expect("valid pair"))
        .collect()
}

/// Coordinates of `A ∈ so(k,l)` on `so_basis`.
pub fn so_coordinates(sig: Signature, convention: Convention, a: &CMatrix) -> Result<Vec<C64>> {
    let m = sig.m();
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix for m = {m}", a.nrows(), a.ncols())));
    }
    let eta = CMatrix::from_diagonal(&CVector::from_iterator(m, sig.metric().into_iter().map(re)));
    let skew = &eta * a + a.transpose() * &eta;
    if max_abs(&skew) > 1e-10 * (1.0 + max_abs(a)) {
        return Err(Error::InvariantViolation("matrix is not in so(k,l)".into()));
    }
    let c = convention.sign();
    Ok(so_pairs(m)
        .into_iter()
        .map(|(i, j)| a[(i, j)] / re(c * sig.eps(j)))
        .collect())
}

/// `σ(E_ij) = ½ ρ(e_i)ρ(e_j)`.
pub fn spin_generator(rep: &GammaRep, i: usize, j: usize) -> Result<CMatrix> {
    check_pair(rep.m(), i, j)?;
    Ok(rep.gamma(i) * rep.gamma(j) * re(0.5))
}

/// `σ(A)` for an arbitrary `A ∈ so(k,l)`.
pub fn spin_lift(rep: &GammaRep, a: &CMatrix) -> Result<CMatrix> {
    let coords = so_coordinates(rep.signature, rep.profile.convention, a)?;
    let mut out = CMatrix::zeros(rep.n(), rep.n());
    for ((i, j), x) in so_pairs(rep.m()).into_iter().zip(coords) {
        if x != ZERO {
            out += spin_generator(rep, i, j)? * x;
        }
    }
    Ok(out)
}

/// `ρ(v) s`.
pub fn clifford_action(rep: &GammaRep, v: &[f64], s: &CVector) -> Result<CVector> {
    if s.len() != rep.n() {
        return Err(Error::DimensionMismatch(format!("spinor of length {} for n = {}", s.len(), rep.n())));
    }
    Ok(rep.rho(v)? * s)
}
