//! Flat `key = value` study configuration.
//!
//! ```text
//! # Cartesian refinement study
//! family = cartesian
//! mesh_files = 4 8 16 32
//! k = 1
//! nu_list = 1e-2, 1e-6
//! dt = 1e-3
//! t_final = 0.2
//! out_dir = results
//! ```
//!
//! Mesh tokens that parse as integers select generated meshes of the family
//! (`cartesian`: cells per direction, `hexagonal`: refinement level); any
//! other token is the path of a `poly-text` mesh file.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::{generate_cartesian, generate_hexagonal, load_mesh, MeshFormat, PolyMesh};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshSource {
    Cartesian(usize),
    Hexagonal(usize),
    File(PathBuf),
}

impl MeshSource {
    pub fn load(&self) -> Result<PolyMesh> {
        match self {
            MeshSource::Cartesian(0) => Err(Error::Config("cartesian meshes need at least one cell".into())),
            MeshSource::Hexagonal(0) => Err(Error::Config("hexagonal levels start at 1".into())),
            MeshSource::Cartesian(n) => Ok(generate_cartesian(*n)),
            MeshSource::Hexagonal(l) => Ok(generate_hexagonal(*l)),
            MeshSource::File(p) => load_mesh(p, MeshFormat::PolyText),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub family: String,
    pub meshes: Vec<MeshSource>,
    pub k: usize,
    pub nu_list: Vec<f64>,
    pub dt: f64,
    pub t_final: f64,
    pub quad_bump: usize,
    pub condense: bool,
    pub out_dir: PathBuf,
    /// Record wall-clock times in the CSV; off gives byte-reproducible output.
    pub timing: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            family: "cartesian".into(),
            meshes: vec![],
            k: 1,
            nu_list: vec![1e-2],
            dt: 1e-3,
            t_final: 0.2,
            quad_bump: 0,
            condense: false,
            out_dir: PathBuf::from("."),
            timing: true,
        }
    }
}

fn config_err(line: usize, message: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {message}"))
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty())
}

fn parse_bool(line: usize, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(line, format!("expected a boolean, got `{value}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| config_err(line, format!("invalid value `{value}` for `{key}`")))
}

fn mesh_token(family: &str, token: &str, base: &Path) -> MeshSource {
    match (family, token.parse::<usize>()) {
        ("cartesian", Ok(n)) => MeshSource::Cartesian(n),
        ("hexagonal", Ok(l)) => MeshSource::Hexagonal(l),
        _ => MeshSource::File(base.join(token)),
    }
}

impl StudyConfig {
    /// Parses a configuration; relative mesh paths are resolved against
    /// `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = StudyConfig::default();
        let mut mesh_tokens: Option<(usize, Vec<String>)> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| config_err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "family" => cfg.family = value.to_string(),
                "mesh_files" => mesh_tokens = Some((line, list(value).map(String::from).collect())),
                "k" => cfg.k = parse_num(line, key, value)?,
                "nu_list" => {
                    cfg.nu_list = list(value).map(|v| parse_num(line, key, v)).collect::<Result<_>>()?;
                }
                "dt" => cfg.dt = parse_num(line, key, value)?,
                "t_final" => cfg.t_final = parse_num(line, key, value)?,
                "quad_bump" => cfg.quad_bump = parse_num(line, key, value)?,
                "condense" => cfg.condense = parse_bool(line, value)?,
                "out_dir" => cfg.out_dir = base.join(value),
                "timing" => cfg.timing = parse_bool(line, value)?,
                _ => return Err(config_err(line, format!("unknown key `{key}`"))),
            }
        }
        let (line, tokens) = mesh_tokens.ok_or_else(|| Error::Config("missing `mesh_files`".into()))?;
        if tokens.is_empty() {
            return Err(config_err(line, "empty mesh refinement list"));
        }
        cfg.meshes = tokens.iter().map(|t| mesh_token(&cfg.family, t, base)).collect();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.meshes.is_empty() {
            return Err(Error::Config("empty mesh refinement list".into()));
        }
        if self.nu_list.is_empty() {
            return Err(Error::Config("empty viscosity list".into()));
        }
        if self.nu_list.iter().any(|&nu| !(nu > 0.0 && nu.is_finite())) {
            return Err(Error::Config("viscosities must be positive".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config("time step must be positive".into()));
        }
        if self.t_final < 2.0 * self.dt {
            return Err(Error::Config("t_final must cover at least two time steps".into()));
        }
        if self.condense {
            return Err(Error::Config("static condensation is only available without convection".into()));
        }
        Ok(())
    }

    /// Number of time steps `N` with `N dt` closest to `t_final`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "# study\nfamily = cartesian\nmesh_files = 4, 8 meshes/a.txt\nk = 2\nnu_list = 1e-2 1e-6\n\
                    dt = 5e-4\nt_final = 0.1\nquad_bump = 2\ncondense = false\nout_dir = out\ntiming = no\n";
        let cfg = StudyConfig::parse(text, Path::new("/base")).unwrap();
        assert_eq!(
            cfg.meshes,
            vec![
                MeshSource::Cartesian(4),
                MeshSource::Cartesian(8),
                MeshSource::File(PathBuf::from("/base/meshes/a.txt"))
            ]
        );
        assert_eq!(cfg.k, 2);
        assert_eq!(cfg.nu_list, vec![1e-2, 1e-6]);
        assert_eq!(cfg.quad_bump, 2);
        assert_eq!(cfg.out_dir, PathBuf::from("/base/out"));
        assert!(!cfg.timing);
        assert_eq!(cfg.n_steps(), 200);
    }

    #[test]
    fn defaults() {
        let cfg = StudyConfig::parse("mesh_files = 2", Path::new(".")).unwrap();
        assert_eq!((cfg.k, cfg.dt, cfg.t_final, cfg.quad_bump), (1, 1e-3, 0.2, 0));
        assert_eq!(cfg.nu_list, vec![1e-2]);
    }

    #[test]
    fn rejects_bad_input() {
        let base = Path::new(".");
        assert!(matches!(StudyConfig::parse("mesh_files =", base), Err(Error::Config(_))));
        assert!(matches!(StudyConfig::parse("family = cartesian", base), Err(Error::Config(_))));
        assert!(matches!(StudyConfig::parse("mesh_files = 2\nspeed = 3", base), Err(Error::Config(_))));
        assert!(matches!(StudyConfig::parse("mesh_files = 2\nk = one", base), Err(Error::Config(_))));
        assert!(matches!(StudyConfig::parse("mesh_files = 2\ncondense = true", base), Err(Error::Config(_))));
        assert!(matches!(StudyConfig::parse("mesh_files 2", base), Err(Error::Config(_))));
        assert!(matches!(MeshSource::Hexagonal(0).load(), Err(Error::Config(_))));
        assert!(matches!(MeshSource::Cartesian(0).load(), Err(Error::Config(_))));
    }
}
