//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. [`RunConfig::serialize`] writes every key in a fixed order, so
//! `serialize(parse(text))` is the normal form of `text`.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{HdgError, Result};
use crate::global::SolverKind;
use crate::local::TraceVariant;
use crate::manufactured::ExactSolution;
use crate::material::ComplianceTensor;
use crate::mesh::MeshKind;
use crate::problem::{Discretization, DEFAULT_TAU_C};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaterialKind {
    PlaneStress,
    PlaneStrain,
    Deviatoric,
}

impl MaterialKind {
    pub fn name(&self) -> &'static str {
        match self {
            MaterialKind::PlaneStress => "plane-stress",
            MaterialKind::PlaneStrain => "plane-strain",
            MaterialKind::Deviatoric => "deviatoric",
        }
    }
}

impl FromStr for MaterialKind {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plane-stress" => Ok(MaterialKind::PlaneStress),
            "plane-strain" => Ok(MaterialKind::PlaneStrain),
            "deviatoric" => Ok(MaterialKind::Deviatoric),
            other => Err(HdgError::config(
                "material",
                format!("unknown material `{other}` (expected plane-stress, plane-strain or deviatoric)"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mesh: MeshKind,
    /// Mesh levels `n`.
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub tau_c: f64,
    pub material: MaterialKind,
    pub e: f64,
    pub nu: f64,
    pub p_d: f64,
    pub p_t: f64,
    /// Poisson ratios of the locking study.
    pub nu_list: Vec<f64>,
    pub solution: String,
    pub solver: SolverKind,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub vtk: Option<PathBuf>,
    pub trace_variant: TraceVariant,
    pub allow_k0: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: MeshKind::Tri,
            n: vec![4, 8, 16, 32],
            k: vec![1],
            tau_c: DEFAULT_TAU_C,
            material: MaterialKind::PlaneStress,
            e: 1.0,
            nu: 0.3,
            p_d: 1.0,
            p_t: 1.0,
            nu_list: vec![0.49, 0.4999, 0.49999],
            solution: "test1-planestress".into(),
            solver: SolverKind::Auto,
            tol: 1e-12,
            out: None,
            vtk: None,
            trace_variant: TraceVariant::Projected,
            allow_k0: false,
        }
    }
}

pub const KEYS: [&str; 17] = [
    "mesh",
    "n",
    "k",
    "tau-c",
    "material",
    "E",
    "nu",
    "P_D",
    "P_T",
    "nu-list",
    "solution",
    "solver",
    "tol",
    "out",
    "vtk",
    "trace-variant",
    "allow-k0",
];

fn parse_num<T: FromStr>(field: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| HdgError::config(field, format!("cannot parse `{v}`")))
}

fn parse_list<T: FromStr>(field: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(field, s))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_bool(field: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(HdgError::config(
            field,
            format!("expected true or false, got `{v}`"),
        )),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Applies every setting of `text` on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HdgError::config(
                    "config",
                    format!("line {}: expected `key = value`", lineno + 1),
                )
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HdgError::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies one setting; also used for command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mesh" => self.mesh = value.parse()?,
            "n" => self.n = parse_list(key, value)?,
            "k" => self.k = parse_list(key, value)?,
            "tau-c" => self.tau_c = parse_num(key, value)?,
            "material" => self.material = value.parse()?,
            "E" => self.e = parse_num(key, value)?,
            "nu" => self.nu = parse_num(key, value)?,
            "P_D" => self.p_d = parse_num(key, value)?,
            "P_T" => self.p_t = parse_num(key, value)?,
            "nu-list" => self.nu_list = parse_list(key, value)?,
            "solution" => self.solution = value.to_string(),
            "solver" => self.solver = value.parse()?,
            "tol" => self.tol = parse_num(key, value)?,
            "out" => self.out = (!value.is_empty()).then(|| PathBuf::from(value)),
            "vtk" => self.vtk = (!value.is_empty()).then(|| PathBuf::from(value)),
            "trace-variant" => self.trace_variant = value.parse()?,
            "allow-k0" => self.allow_k0 = parse_bool(key, value)?,
            other => {
                return Err(HdgError::config(
                    other,
                    format!("unknown key (known keys: {})", KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut lines = vec![
            format!("mesh = {}", self.mesh.name()),
            format!("n = {}", join(&self.n)),
            format!("k = {}", join(&self.k)),
            format!("tau-c = {}", self.tau_c),
            format!("material = {}", self.material.name()),
            format!("E = {}", self.e),
            format!("nu = {}", self.nu),
            format!("P_D = {}", self.p_d),
            format!("P_T = {}", self.p_t),
            format!("nu-list = {}", join(&self.nu_list)),
            format!("solution = {}", self.solution),
            format!("solver = {}", self.solver.name()),
            format!("tol = {}", self.tol),
        ];
        if let Some(p) = &self.out {
            lines.push(format!("out = {}", p.display()));
        }
        if let Some(p) = &self.vtk {
            lines.push(format!("vtk = {}", p.display()));
        }
        lines.push(format!("trace-variant = {}", self.trace_variant.name()));
        lines.push(format!("allow-k0 = {}", self.allow_k0));
        lines.join("\n") + "\n"
    }

    pub fn material_with_nu(&self, nu: f64) -> Result<ComplianceTensor> {
        let m = match self.material {
            MaterialKind::PlaneStress => ComplianceTensor::plane_stress(self.e, nu),
            MaterialKind::PlaneStrain => ComplianceTensor::plane_strain(self.e, nu),
            MaterialKind::Deviatoric => ComplianceTensor::deviatoric(self.p_d, self.p_t),
        };
        m.map_err(|e| {
            HdgError::config(
                if self.material == MaterialKind::Deviatoric {
                    "P_T"
                } else {
                    "nu"
                },
                e.to_string(),
            )
        })
    }

    pub fn compliance(&self) -> Result<ComplianceTensor> {
        self.material_with_nu(self.nu)
    }

    pub fn exact_solution(&self, k: usize) -> Result<ExactSolution> {
        ExactSolution::from_name(&self.solution, k)
    }

    pub fn discretization(&self, k: usize) -> Discretization {
        Discretization {
            k,
            tau_c: self.tau_c,
            variant: self.trace_variant,
            solver: self.solver,
            tol: self.tol,
            allow_k0: self.allow_k0,
            check_quadrature: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            return Err(HdgError::config("n", "at least one mesh level is required"));
        }
        let min_n = if self.mesh == MeshKind::Poly { 2 } else { 1 };
        if let Some(bad) = self.n.iter().find(|&&n| n < min_n) {
            return Err(HdgError::config(
                "n",
                format!("{} mesh needs n >= {min_n}, got {bad}", self.mesh.name()),
            ));
        }
        if self.k.is_empty() {
            return Err(HdgError::config("k", "at least one degree is required"));
        }
        for &k in &self.k {
            self.discretization(k).validate()?;
            self.exact_solution(k)?;
        }
        self.compliance()?;
        for &nu in &self.nu_list {
            if !(nu > 0.0 && nu < 0.5) {
                return Err(HdgError::config(
                    "nu-list",
                    format!("Poisson ratios must lie in (0, 0.5), got {nu}"),
                ));
            }
        }
        Ok(())
    }
}
