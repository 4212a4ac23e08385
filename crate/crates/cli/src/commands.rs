use std::sync::Arc;

use anyhow::anyhow;
use serde::Serialize;
use serde_json::{json, Value};
use supergeom::clifford::{build_gamma_profile, verify_clifford, GammaRep, ModuleField, Profile, Signature};
use supergeom::forms::{
    check_pi_equivariance, default_form, equivariant_hom_dim, existence_scan, expected_exception, flagged,
    matching_profiles, suitable_form_count, suitable_forms, AdmissibleForm,
};
use supergeom::geometry::{
    build_model_space, fit_killing_number, killing_spinor_residual, make_field, random_spinor, FieldKind, ModelKind,
    ModelSpec,
};
use supergeom::killing::{default_tol, killing_vector_test, KillingContext};
use supergeom::linalg::{clean_matrix, to_rows, CMatrix};
use supergeom::poincare::{coadjoint_rep, jacobi_residual, matrix_realization};
use supergeom::Error;

use crate::config::{Format, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

const JACOBI_TOL: f64 = 1e-10;
const EQUIVARIANCE_TOL: f64 = 1e-10;
const INVARIANCE_TOL: f64 = 1e-12;

/// Why a run did not succeed; maps onto the exit code.
#[derive(Debug)]
pub enum Failure {
    /// A mathematical check failed (exit 1).
    Check(String),
    /// Bad input or I/O (exit 2).
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoSuitableForm { k, l } => Failure::Check(refusal(k, l)),
            Error::NotSuitable { .. } | Error::Degenerate | Error::InvariantViolation(_) => Failure::Check(e.to_string()),
            other => Failure::Usage(other.into()),
        }
    }
}

fn refusal(k: usize, l: usize) -> String {
    let sig = Signature { k, l };
    let (m, s) = (sig.m(), sig.s());
    if expected_exception(m, s) {
        format!(
            "signature ({k},{l}) has (m,s) = ({m},{s}), which is ≡ ({},{}) mod (8,8) and lies in the exception list \
             (5,7), (6,0), (6,6), (7,7): no non-degenerate suitable bilinear form exists",
            m % 8,
            s.rem_euclid(8)
        )
    } else {
        format!("signature ({k},{l}) admits no non-degenerate suitable bilinear form under the chosen profile")
    }
}

/// Text to write plus whether every check passed.
pub struct Report {
    pub body: String,
    pub pass: bool,
}

fn json_report(value: &Value, pass: bool) -> anyhow::Result<Report> {
    Ok(Report {
        body: serde_json::to_string_pretty(value)? + "\n",
        pass,
    })
}

fn rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    to_rows(&clean_matrix(m))
}

fn profile_json(p: Profile) -> Value {
    json!({
        "convention": i8::from(p.convention),
        "module": module_name(p.field),
    })
}

fn module_name(f: ModuleField) -> &'static str {
    match f {
        ModuleField::Real => "real",
        ModuleField::Complex => "complex",
    }
}

fn form_json(f: &AdmissibleForm) -> Value {
    json!({ "sigma": f.sigma, "tau": f.tau, "b": rows(&f.b) })
}

#[derive(Serialize)]
struct CatalogRow {
    m: usize,
    s: i64,
    k: usize,
    l: usize,
    convention: i8,
    sigma: i8,
    tau: i8,
    space_dim: usize,
    nondegenerate_suitable_exists: bool,
    module: &'static str,
}

pub fn catalog(cfg: &RunConfig) -> Result<Report, Failure> {
    let m_max = cfg.m_max.unwrap_or(7);
    let profiles = cfg.profiles()?;
    let format = cfg.format_or(Format::Csv)?;
    let scan = existence_scan(m_max, &profiles)?;
    let matching = matching_profiles(&scan);
    let catalog_rows: Vec<CatalogRow> = scan
        .iter()
        .flat_map(|e| {
            e.classes.iter().map(move |c| CatalogRow {
                m: e.m(),
                s: e.s(),
                k: e.signature.k,
                l: e.signature.l,
                convention: i8::from(e.profile.convention),
                sigma: c.sigma,
                tau: c.tau,
                space_dim: c.space_dim,
                nondegenerate_suitable_exists: e.nondegenerate_suitable_exists,
                module: module_name(e.profile.field),
            })
        })
        .collect();
    let pass = !matching.is_empty();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &catalog_rows {
                w.serialize(r).map_err(anyhow::Error::from)?;
            }
            let body = String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?).map_err(anyhow::Error::from)?;
            Ok(Report { body, pass })
        }
        Format::Json => {
            let forms: Vec<Value> = scan
                .iter()
                .filter(|e| e.nondegenerate_suitable_exists)
                .map(|e| -> Result<Value, Failure> {
                    let rep = build_gamma_profile(e.signature, e.profile)?;
                    let f = default_form(&rep)?;
                    Ok(json!({
                        "k": e.signature.k,
                        "l": e.signature.l,
                        "profile": profile_json(e.profile),
                        "form": form_json(&f),
                    }))
                })
                .collect::<Result<_, _>>()?;
            let flags: Vec<Value> = profiles
                .iter()
                .map(|p| {
                    json!({
                        "profile": profile_json(*p),
                        "flagged": flagged(&scan, *p).iter().map(|s| [s.k, s.l]).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let value = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "catalog",
                "m_max": m_max,
                "flagged": flags,
                "matching_profiles": matching.iter().map(|p| profile_json(*p)).collect::<Vec<_>>(),
                "rows": catalog_rows,
                "default_forms": forms,
                "pass": pass,
            });
            Ok(json_report(&value, pass)?)
        }
    }
}

fn chosen_form(rep: &GammaRep, index: Option<usize>) -> Result<(usize, AdmissibleForm), Failure> {
    let forms = suitable_forms(rep);
    if forms.is_empty() {
        return Err(Error::NoSuitableForm { k: rep.signature.k, l: rep.signature.l }.into());
    }
    let id = index.unwrap_or(0);
    let count = forms.len();
    let form = forms
        .into_iter()
        .nth(id)
        .ok_or_else(|| Failure::Usage(anyhow!("form {id} requested but only {count} suitable forms exist")))?;
    Ok((id, form))
}

pub fn algebra(cfg: &RunConfig) -> Result<Report, Failure> {
    let sig = cfg.signature_or((1, 1))?;
    let profile = cfg.profile()?;
    let rep = build_gamma_profile(sig, profile)?;
    let (form_id, form) = chosen_form(&rep, cfg.form)?;
    let p = supergeom::poincare::build_poincare(&rep, &form)?;
    let clifford = verify_clifford(&rep);
    let jacobi = jacobi_residual(&p);
    let equivariance = check_pi_equivariance(&p.pi, &rep);
    let coadjoint = coadjoint_rep(&p)?;
    let sa = matrix_realization(&p, &coadjoint, &CMatrix::identity(rep.m(), rep.m()))?;
    let kernel = coadjoint.kernel_dim();
    let pass = jacobi < JACOBI_TOL
        && equivariance < EQUIVARIANCE_TOL
        && coadjoint.invariance_residual < INVARIANCE_TOL
        && kernel == rep.m()
        && sa.upper_right_max() == 0.0;
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "algebra",
        "signature": { "k": sig.k, "l": sig.l, "m": sig.m(), "s": sig.s() },
        "profile": profile_json(profile),
        "module_type": rep.module_type,
        "n": rep.n(),
        "form_id": form_id,
        "gammas": rep.gammas().iter().map(rows).collect::<Vec<_>>(),
        "form": form_json(&form),
        "pi": p.pi.coeffs().iter().map(rows).collect::<Vec<_>>(),
        "structure_constants": p.spec,
        "g_basis": {
            "even": sa.even().iter().map(rows).collect::<Vec<_>>(),
            "odd": sa.odd().iter().map(rows).collect::<Vec<_>>(),
        },
        "checks": {
            "clifford_residual": clifford,
            "jacobi_residual": jacobi,
            "pi_equivariance_residual": equivariance,
            "coadjoint_kernel_dim": kernel,
            "coadjoint_invariance_residual": coadjoint.invariance_residual,
            "upper_right_max": sa.upper_right_max(),
        },
        "pass": pass,
    });
    Ok(json_report(&value, pass)?)
}

pub fn equivariant_dim(cfg: &RunConfig) -> Result<Report, Failure> {
    let sig = cfg.signature_or((1, 1))?;
    let profile = cfg.profile()?;
    let rep = build_gamma_profile(sig, profile)?;
    let dim = equivariant_hom_dim(&rep)?;
    let count = suitable_form_count(&rep);
    let pass = dim == count;
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "equivariant-dim",
        "signature": { "k": sig.k, "l": sig.l },
        "profile": profile_json(profile),
        "n": rep.n(),
        "equivariant_hom_dim": dim,
        "suitable_form_count": count,
        "pass": pass,
    });
    Ok(json_report(&value, pass)?)
}

pub fn verify(cfg: &RunConfig) -> Result<Report, Failure> {
    let space_name = cfg.space.as_deref().unwrap_or("flat");
    let mut spec = match space_name {
        "flat" => {
            let sig = cfg.signature_or((3, 1))?;
            ModelSpec::flat(sig.k, sig.l)
        }
        "sphere" => ModelSpec::sphere(cfg.dim.unwrap_or(3), cfg.radius.unwrap_or(1.0)),
        other => return Err(Failure::Usage(anyhow!("unknown space {other:?}; expected flat or sphere"))),
    };
    if let Some(r) = cfg.resolution {
        spec.resolution = r;
    }
    if let Some(e) = cfg.extent {
        spec.extent = e;
    }
    if let Some(h) = cfg.h {
        spec.h = h;
    }
    let (space, fc) = build_model_space(spec)?;
    let profile = cfg.profile()?;
    let rep = Arc::new(build_gamma_profile(space.signature(), profile)?);
    let n = rep.n();
    let seed = cfg.seed.unwrap_or(0);
    let default_field = if space.is_flat() { "parallel" } else { "sphere_killing" };
    let field_name = cfg.field.as_deref().unwrap_or(default_field);
    let sign = cfg.sign.unwrap_or(1.0);
    let kind = match field_name {
        "parallel" => FieldKind::Parallel { s0: random_spinor(n, seed) },
        "flat_twistor" => FieldKind::FlatTwistor {
            s0: random_spinor(n, seed),
            s1: random_spinor(n, seed.wrapping_add(1)),
        },
        "sphere_killing" => FieldKind::SphereKilling { s0: random_spinor(n, seed), sign },
        "random" => FieldKind::Random { seed },
        other => {
            return Err(Failure::Usage(anyhow!(
                "unknown field {other:?}; expected parallel, flat_twistor, sphere_killing or random"
            )))
        }
    };
    let field = make_field(&space, rep.clone(), kind)?;
    let (form_id, form) = chosen_form(&rep, cfg.form)?;
    let ctx = KillingContext::new(&rep, &form)?;
    let tol = cfg.tol.unwrap_or_else(|| default_tol(&fc));
    if !(tol > 0.0) {
        return Err(Failure::Usage(anyhow!("tolerance must be positive, got {tol}")));
    }
    let verdict = killing_vector_test(&field, &ctx, &fc, tol)?;
    let killing_number = match space.spec().kind {
        ModelKind::Sphere { radius, .. } if field_name == "sphere_killing" => {
            let lambda = sign / (2.0 * radius);
            let fitted = fit_killing_number(&fc, &field)?;
            Some(json!({
                "expected": lambda,
                "recovered_lambda": [fitted.re, fitted.im],
                "killing_spinor_residual": killing_spinor_residual(&fc, &field, lambda)?,
            }))
        }
        _ => None,
    };
    let pass = verdict.agree();
    let spec = space.spec();
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "space": space.kind_name(),
        "signature": { "k": space.signature().k, "l": space.signature().l },
        "radius": space.radius(),
        "profile": profile_json(profile),
        "form_id": form_id,
        "field": field_name,
        "seed": seed,
        "h": spec.h,
        "grid": { "extent": spec.extent, "resolution": spec.resolution, "points": space.grid().len() },
        "tol": tol,
        "membership_residual": verdict.membership_residual,
        "algebra_residual": verdict.algebra_residual,
        "path_agreement": verdict.path_agreement,
        "twistor_residual": verdict.twistor_residual,
        "sign_deviation": verdict.sign_deviation,
        "killing_number": killing_number,
        "verdicts": { "killing": verdict.verdict_killing, "twistor": verdict.verdict_twistor },
        "pass": pass,
    });
    Ok(json_report(&value, pass)?)
}
