//! Model spin manifolds in a single chart: flat `R^{k,l}` and the round
//! sphere in conformally flat coordinates. Spinor fields are closed-form
//! functions of the chart point; derivatives use central differences.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{spin_lift, Convention, GammaRep, Signature};
use crate::error::{Error, Result};
use crate::linalg::{from_real, re, CMatrix, CVector, C64};

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    Flat { k: usize, l: usize },
    Sphere { dim: usize, radius: f64 },
}

/// Chart box `[-extent, extent]^m` sampled at `resolution` points per axis
/// (cell centres, so every point is interior) with difference step `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    pub extent: f64,
    pub resolution: usize,
    pub h: f64,
}

impl ModelSpec {
    pub fn flat(k: usize, l: usize) -> Self {
        ModelSpec {
            kind: ModelKind::Flat { k, l },
            extent: 1.0,
            resolution: 5,
            h: DEFAULT_STEP,
        }
    }

    pub fn sphere(dim: usize, radius: f64) -> Self {
        ModelSpec {
            kind: ModelKind::Sphere { dim, radius },
            extent: 0.8 * radius,
            resolution: 5,
            h: DEFAULT_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    spec: ModelSpec,
    signature: Signature,
}

impl ModelSpace {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn dim(&self) -> usize {
        self.signature.m()
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.spec.kind, ModelKind::Flat { .. })
    }

    pub fn radius(&self) -> Option<f64> {
        match self.spec.kind {
            ModelKind::Sphere { radius, .. } => Some(radius),
            ModelKind::Flat { .. } => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        if self.is_flat() {
            "flat"
        } else {
            "sphere"
        }
    }

    /// Cell-centred grid in lexicographic order.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let (m, r) = (self.dim(), self.spec.resolution);
        let step = 2.0 * self.spec.extent / r as f64;
        let coord = |i: usize| -self.spec.extent + (i as f64 + 0.5) * step;
        (0..r.pow(m as u32))
            .map(|mut idx| {
                let mut x = vec![0.0; m];
                for slot in x.iter_mut().rev() {
                    *slot = coord(idx % r);
                    idx /= r;
                }
                x
            })
            .collect()
    }

    /// Rejects points whose difference stencil leaves the chart box.
    pub fn check_interior(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("point of length {} for m = {}", x.len(), self.dim())));
        }
        if x.iter().any(|c| c.abs() + self.spec.h > self.spec.extent) {
            return Err(Error::BoundaryPoint(x.to_vec()));
        }
        Ok(())
    }

    /// Conformal factor `f` with `g = f² δ` (1 on flat space).
    pub fn conformal_factor(&self, x: &[f64]) -> f64 {
        match self.spec.kind {
            ModelKind::Flat { .. } => 1.0,
            ModelKind::Sphere { radius, .. } => {
                let q: f64 = x.iter().map(|c| c * c).sum();
                1.0 / (1.0 + q / (4.0 * radius * radius))
            }
        }
    }
}

/// Orthonormal frame and Levi-Civita connection of a model space.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConnection {
    space: ModelSpace,
}

/// Frame data at one point: `frame[(μ, a)] = e_a^μ` and `omega[a]` the
/// connection matrix of `∇_{e_a}` on the frame, `∇_{e_a} e_c = Σ_b omega[a][(b, c)] e_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrame {
    pub frame: DMatrix<f64>,
    pub omega: Vec<DMatrix<f64>>,
}

impl FrameConnection {
    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn at(&self, x: &[f64]) -> LocalFrame {
        let m = self.space.dim();
        match self.space.spec.kind {
            ModelKind::Flat { .. } => LocalFrame {
                frame: DMatrix::identity(m, m),
                omega: vec![DMatrix::zeros(m, m); m],
            },
            ModelKind::Sphere { radius, .. } => {
                let f = self.space.conformal_factor(x);
                // ∂_c log f
                let dphi: Vec<f64> = x.iter().map(|c| -f * c / (2.0 * radius * radius)).collect();
                let omega = (0..m)
                    .map(|a| {
                        DMatrix::from_fn(m, m, |b, c| {
                            let t1 = if a == b { dphi[c] } else { 0.0 };
                            let t2 = if a == c { dphi[b] } else { 0.0 };
                            (t1 - t2) / f
                        })
                    })
                    .collect();
                LocalFrame {
                    frame: DMatrix::identity(m, m) / f,
                    omega,
                }
            }
        }
    }

    /// Metric in chart coordinates.
    pub fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let f = self.space.conformal_factor(x);
        let eta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.space.signature.metric()));
        eta * (f * f)
    }

    /// `max |g(e_a, e_b) − ε_a δ_ab|` over the grid.
    pub fn orthonormality_residual(&self) -> f64 {
        let eta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.space.signature.metric()));
        self.space
            .grid()
            .iter()
            .map(|x| {
                let e = self.at(x).frame;
                (e.transpose() * self.metric(x) * e - &eta).amax()
            })
            .fold(0.0, f64::max)
    }
}

pub fn build_model_space(spec: ModelSpec) -> Result<(ModelSpace, FrameConnection)> {
    let bad = |msg: String| Err(Error::InvalidModel(msg));
    if !(spec.h > 0.0) || !(spec.extent > 0.0) || spec.resolution == 0 {
        return bad("extent, resolution and h must be positive".into());
    }
    if spec.h >= spec.extent / spec.resolution as f64 {
        return bad(format!("step {} too large for the grid spacing", spec.h));
    }
    let signature = match spec.kind {
        ModelKind::Flat { k, l } => Signature::new(k, l)?,
        ModelKind::Sphere { dim, radius } => {
            if !(2..=4).contains(&dim) {
                return bad(format!("sphere dimension must be 2, 3 or 4, got {dim}"));
            }
            if !(radius > 0.0) || !radius.is_finite() {
                return bad(format!("radius must be positive, got {radius}"));
            }
            Signature::new(dim, 0)?
        }
    };
    let space = ModelSpace { spec, signature };
    Ok((space.clone(), FrameConnection { space }))
}

/// Closed-form spinor fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldKind {
    /// Constant `s₀`.
    Parallel { s0: Vec<[f64; 2]> },
    /// `s₀ + ρ(x) s₁`.
    FlatTwistor { s0: Vec<[f64; 2]>, s1: Vec<[f64; 2]> },
    /// `f(x)^{1/2} (1 + sign ρ(x)/(2r)) s₀` on the sphere of radius `r`.
    SphereKilling { s0: Vec<[f64; 2]>, sign: f64 },
    /// `Σ_j a_j cos(k_j·x + φ_j)`, three modes from a seeded generator.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
struct Mode {
    wave: Vec<f64>,
    phase: f64,
    amplitude: CVector,
}

#[derive(Debug, Clone)]
pub struct SpinorField {
    rep: Arc<GammaRep>,
    kind: FieldKind,
    terms: Vec<(C64, FieldData)>,
}

#[derive(Debug, Clone)]
enum FieldData {
    Parallel(CVector),
    Twistor(CVector, CVector),
    Killing { s0: CVector, kappa: f64, radius: f64 },
    Random(Vec<Mode>),
}

const RANDOM_MODES: usize = 3;

fn to_cvector(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|z| C64::new(z[0], z[1])))
}

pub fn from_cvector(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Real spinor with entries uniform in `[-1, 1)`, reproducible from `seed`.
pub fn random_spinor(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.gen_range(-1.0..1.0), 0.0]).collect()
}

fn random_modes(rep: &GammaRep, seed: u64) -> Vec<Mode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..RANDOM_MODES)
        .map(|_| Mode {
            wave: (0..rep.m()).map(|_| rng.gen_range(-1.5..1.5)).collect(),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
            amplitude: CVector::from_fn(rep.n(), |_, _| re(rng.gen_range(-1.0..1.0))),
        })
        .collect()
}

pub fn make_field(space: &ModelSpace, rep: Arc<GammaRep>, kind: FieldKind) -> Result<SpinorField> {
    if rep.signature != space.signature() {
        return Err(Error::DimensionMismatch(format!(
            "representation for {} on a space of signature {}",
            rep.signature,
            space.signature()
        )));
    }
    let n = rep.n();
    let check_len = |v: &[[f64; 2]]| {
        if v.len() == n {
            Ok(to_cvector(v))
        } else {
            Err(Error::DimensionMismatch(format!("spinor of length {} for n = {n}", v.len())))
        }
    };
    let incompatible = |name: &str| Error::IncompatibleField {
        field: name.into(),
        space: space.kind_name().into(),
    };
    let data = match &kind {
        FieldKind::Parallel { s0 } => {
            if !space.is_flat() {
                return Err(incompatible("parallel"));
            }
            FieldData::Parallel(check_len(s0)?)
        }
        FieldKind::FlatTwistor { s0, s1 } => {
            if !space.is_flat() {
                return Err(incompatible("flat_twistor"));
            }
            FieldData::Twistor(check_len(s0)?, check_len(s1)?)
        }
        FieldKind::SphereKilling { s0, sign } => {
            let radius = space.radius().ok_or_else(|| incompatible("sphere_killing"))?;
            if rep.profile.convention != Convention::Minus {
                return Err(Error::IncompatibleField {
                    field: "sphere_killing with c = +1".into(),
                    space: "sphere".into(),
                });
            }
            if sign.abs() != 1.0 {
                return Err(Error::InvalidModel(format!("Killing sign must be +1 or -1, got {sign}")));
            }
            FieldData::Killing {
                s0: check_len(s0)?,
                kappa: sign / (2.0 * radius),
                radius,
            }
        }
        FieldKind::Random { seed } => FieldData::Random(random_modes(&rep, *seed)),
    };
    Ok(SpinorField {
        rep,
        kind,
        terms: vec![(re(1.0), data)],
    })
}

impl SpinorField {
    pub fn rep(&self) -> &GammaRep {
        &self.rep
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FieldKind::Parallel { .. } => "parallel",
            FieldKind::FlatTwistor { .. } => "flat_twistor",
            FieldKind::SphereKilling { .. } => "sphere_killing",
            FieldKind::Random { .. } => "random",
        }
    }

    /// `a·self + b·other`, keeping the kind of `self` as its label.
    pub fn combine(&self, a: C64, other: &SpinorField, b: C64) -> Result<SpinorField> {
        if self.rep != other.rep {
            return Err(Error::DimensionMismatch("fields over different representations".into()));
        }
        let mut terms: Vec<(C64, FieldData)> = self.terms.iter().map(|(c, d)| (c * a, d.clone())).collect();
        terms.extend(other.terms.iter().map(|(c, d)| (c * b, d.clone())));
        Ok(SpinorField {
            rep: self.rep.clone(),
            kind: self.kind.clone(),
            terms,
        })
    }

    pub fn scale(&self, a: C64) -> SpinorField {
        SpinorField {
            rep: self.rep.clone(),
            kind: self.kind.clone(),
            terms: self.terms.iter().map(|(c, d)| (c * a, d.clone())).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> CVector {
        let mut out = CVector::zeros(self.rep.n());
        for (c, data) in &self.terms {
            let v = match data {
                FieldData::Parallel(s0) => s0.clone(),
                FieldData::Twistor(s0, s1) => s0 + self.rho(x) * s1,
                FieldData::Killing { s0, kappa, radius } => {
                    let q: f64 = x.iter().map(|c| c * c).sum();
                    let f = 1.0 / (1.0 + q / (4.0 * radius * radius));
                    (s0 + self.rho(x) * s0 * re(*kappa)) * re(f.sqrt())
                }
                FieldData::Random(modes) => modes.iter().fold(CVector::zeros(self.rep.n()), |acc, md| {
                    let arg: f64 = md.wave.iter().zip(x).map(|(k, y)| k * y).sum::<f64>() + md.phase;
                    acc + &md.amplitude * re(arg.cos())
                }),
            };
            out += v * *c;
        }
        out
    }

    fn rho(&self, x: &[f64]) -> CMatrix {
        self.rep.rho(x).expect("point dimension checked by caller")
    }
}

fn coordinate_derivative(space: &ModelSpace, field: &SpinorField, x: &[f64], mu: usize) -> CVector {
    let h = space.h();
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[mu] += h;
    xm[mu] -= h;
    (field.eval(&xp) - field.eval(&xm)) / re(2.0 * h)
}

/// Spin lift `σ(ω(e_a))` of the connection matrix.
pub fn spin_connection(fc: &FrameConnection, rep: &GammaRep, x: &[f64], a: usize) -> Result<CMatrix> {
    let local = fc.at(x);
    spin_lift(rep, &from_real(&local.omega[a]))
}

/// `∇_{e_a} s = e_a(s) + σ(ω(e_a)) s`.
pub fn covariant_derivative(fc: &FrameConnection, field: &SpinorField, a: usize, x: &[f64]) -> Result<CVector> {
    let space = fc.space();
    space.check_interior(x)?;
    if a >= space.dim() {
        return Err(Error::IndexOutOfRange { index: a + 1, max: space.dim() });
    }
    let local = fc.at(x);
    let mut out = CVector::zeros(field.rep.n());
    for mu in 0..space.dim() {
        let coeff = local.frame[(mu, a)];
        if coeff != 0.0 {
            out += coordinate_derivative(space, field, x, mu) * re(coeff);
        }
    }
    if !space.is_flat() {
        out += spin_lift(&field.rep, &from_real(&local.omega[a]))? * field.eval(x);
    }
    Ok(out)
}

/// `(∇_{e_1} s, …, ∇_{e_m} s)` at one point.
pub fn covariant_derivatives(fc: &FrameConnection, field: &SpinorField, x: &[f64]) -> Result<Vec<CVector>> {
    (0..fc.space().dim()).map(|a| covariant_derivative(fc, field, a, x)).collect()
}

/// `D s = Σ_a ε_a ρ(e_a) ∇_{e_a} s`.
pub fn dirac(fc: &FrameConnection, field: &SpinorField, x: &[f64]) -> Result<CVector> {
    let rep = &field.rep;
    let nabla = covariant_derivatives(fc, field, x)?;
    Ok(nabla
        .iter()
        .enumerate()
        .fold(CVector::zeros(rep.n()), |acc, (a, d)| acc + rep.gamma(a) * d * re(rep.eps(a))))
}

/// `s̃` with `Ds = c·m·s̃`; for `c = −1` this is `−(1/m) D s`.
pub fn s_tilde(fc: &FrameConnection, field: &SpinorField, x: &[f64]) -> Result<CVector> {
    let rep = &field.rep;
    Ok(dirac(fc, field, x)? / re(rep.c() * rep.m() as f64))
}

fn grid_max(fc: &FrameConnection, per_point: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<f64> {
    let values = fc
        .space()
        .grid()
        .par_iter()
        .map(|x| per_point(x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Pointwise `max_a |∇_a s − ρ(e_a) s̃|`.
pub fn twistor_residual_at(fc: &FrameConnection, field: &SpinorField, x: &[f64]) -> Result<f64> {
    let rep = &field.rep;
    let nabla = covariant_derivatives(fc, field, x)?;
    let st = nabla
        .iter()
        .enumerate()
        .fold(CVector::zeros(rep.n()), |acc, (a, d)| acc + rep.gamma(a) * d * re(rep.eps(a)))
        / re(rep.c() * rep.m() as f64);
    Ok(nabla
        .iter()
        .enumerate()
        .map(|(a, d)| (d - rep.gamma(a) * &st).norm())
        .fold(0.0, f64::max))
}

pub fn twistor_residual(fc: &FrameConnection, field: &SpinorField) -> Result<f64> {
    grid_max(fc, |x| twistor_residual_at(fc, field, x))
}

/// `max_{x,a} |∇_a s − λ ρ(e_a) s|`.
pub fn killing_spinor_residual(fc: &FrameConnection, field: &SpinorField, lambda: f64) -> Result<f64> {
    let rep = &field.rep;
    grid_max(fc, |x| {
        let s = field.eval(x);
        Ok(covariant_derivatives(fc, field, x)?
            .iter()
            .enumerate()
            .map(|(a, d)| (d - rep.gamma(a) * &s * re(lambda)).norm())
            .fold(0.0, f64::max))
    })
}

/// Least-squares Killing number: the `λ` minimising `Σ_a |∇_a s − λρ_a s|²`
/// over the grid.
pub fn fit_killing_number(fc: &FrameConnection, field: &SpinorField) -> Result<C64> {
    let rep = &field.rep;
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for x in fc.space().grid() {
        let s = field.eval(&x);
        for (a, d) in covariant_derivatives(fc, field, &x)?.iter().enumerate() {
            let v = rep.gamma(a) * &s;
            num += v.dotc(d);
            den += v.norm_squared();
        }
    }
    Ok(if den > 0.0 { num / den } else { C64::new(0.0, 0.0) })
}
