use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use supergeom::clifford::{Convention, ModuleField, Profile, Signature};

/// Every setting a run can take. Unset fields fall back to per-command
/// defaults; a config file is overlaid by command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `"k,l"`.
    pub signature: Option<String>,
    /// `"-1"`, `"1"` or `"auto"`.
    pub convention: Option<String>,
    /// `"real"`, `"complex"` or `"auto"`.
    pub module: Option<String>,
    pub m_max: Option<usize>,
    /// `"flat"` or `"sphere"`.
    pub space: Option<String>,
    pub dim: Option<usize>,
    pub radius: Option<f64>,
    /// `parallel`, `flat_twistor`, `sphere_killing` or `random`.
    pub field: Option<String>,
    pub seed: Option<u64>,
    pub sign: Option<f64>,
    pub resolution: Option<usize>,
    pub extent: Option<f64>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub form: Option<usize>,
    pub output: Option<PathBuf>,
    /// `"json"` or `"csv"`.
    pub format: Option<String>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay_fields!(base, top; signature, convention, module, m_max, space, dim, radius, field,
            seed, sign, resolution, extent, h, tol, form, output, format)
    }

    pub fn signature_or(&self, default: (usize, usize)) -> anyhow::Result<Signature> {
        let (k, l) = match &self.signature {
            None => default,
            Some(s) => parse_pair(s)?,
        };
        Ok(Signature::new(k, l)?)
    }

    pub fn conventions(&self) -> anyhow::Result<Vec<Convention>> {
        match self.convention.as_deref().map(str::trim) {
            None | Some("auto") => Ok(Convention::all().to_vec()),
            Some("-1") => Ok(vec![Convention::Minus]),
            Some("1") | Some("+1") => Ok(vec![Convention::Plus]),
            Some(other) => bail!("convention must be -1, 1 or auto, got {other:?}"),
        }
    }

    pub fn modules(&self) -> anyhow::Result<Vec<ModuleField>> {
        match self.module.as_deref().map(str::trim) {
            None | Some("auto") => Ok(vec![ModuleField::Complex, ModuleField::Real]),
            Some("real") => Ok(vec![ModuleField::Real]),
            Some("complex") => Ok(vec![ModuleField::Complex]),
            Some(other) => bail!("module must be real, complex or auto, got {other:?}"),
        }
    }

    /// All requested profiles (catalog).
    pub fn profiles(&self) -> anyhow::Result<Vec<Profile>> {
        let mut out = Vec::new();
        for convention in self.conventions()? {
            for field in self.modules()? {
                out.push(Profile { convention, field });
            }
        }
        out.sort();
        Ok(out)
    }

    /// A single profile; `auto` picks the default one.
    pub fn profile(&self) -> anyhow::Result<Profile> {
        let d = Profile::default();
        let convention = match self.conventions()?.as_slice() {
            [c] => *c,
            _ => d.convention,
        };
        let field = match self.modules()?.as_slice() {
            [f] => *f,
            _ => d.field,
        };
        Ok(Profile { convention, field })
    }

    pub fn format_or(&self, default: Format) -> anyhow::Result<Format> {
        match self.format.as_deref() {
            None => Ok(default),
            Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => bail!("format must be json or csv, got {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

pub fn parse_pair(s: &str) -> anyhow::Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [k, l] => Ok((
            k.parse().with_context(|| format!("bad signature {s:?}"))?,
            l.parse().with_context(|| format!("bad signature {s:?}"))?,
        )),
        _ => bail!("signature must be written k,l, got {s:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = RunConfig {
            signature: Some("2,1".into()),
            h: Some(1e-2),
            ..Default::default()
        };
        let flags = RunConfig {
            signature: Some("3,1".into()),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.signature.as_deref(), Some("3,1"));
        assert_eq!(merged.h, Some(1e-2));
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig {
            signature: Some("3,1".into()),
            convention: Some("-1".into()),
            seed: Some(7),
            tol: Some(1e-6),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sigature": "3,1"}"#).is_err());
        assert!(parse_pair("3;1").is_err());
        assert!(parse_pair("a,1").is_err());
        let cfg = RunConfig {
            convention: Some("2".into()),
            ..Default::default()
        };
        assert!(cfg.conventions().is_err());
    }

    #[test]
    fn profile_selection() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.profiles().unwrap().len(), 4);
        assert_eq!(cfg.profile().unwrap(), Profile::default());
        let cfg = RunConfig {
            convention: Some("1".into()),
            module: Some("complex".into()),
            ..Default::default()
        };
        assert_eq!(
            cfg.profile().unwrap(),
            Profile {
                convention: Convention::Plus,
                field: ModuleField::Complex
            }
        );
    }
}
