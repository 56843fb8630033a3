//! Plain-text `key = value` run configuration.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use hbaca::mesh::{generate_icosphere, load_off, refine_region, MAX_ICOSPHERE_LEVEL, MAX_REFINE_ROUNDS};
use hbaca::{BacaParams, QuadratureOrders, TriMesh64, Vec3};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Icosphere,
    /// Icosphere of `level` mapped onto `semiaxes`, then refined where
    /// `|x₃| < refine_band`.
    Ellipsoid,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    Aca,
    Baca,
    Dense,
}

impl Geometry {
    fn name(self) -> &'static str {
        match self {
            Geometry::Icosphere => "icosphere",
            Geometry::Ellipsoid => "ellipsoid",
            Geometry::Off => "off",
        }
    }
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Aca => "aca",
            Pipeline::Baca => "baca",
            Pipeline::Dense => "dense",
        }
    }
}

impl FromStr for Geometry {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "icosphere" => Ok(Geometry::Icosphere),
            "ellipsoid" => Ok(Geometry::Ellipsoid),
            "off" => Ok(Geometry::Off),
            _ => Err(format!("unknown geometry '{s}' (icosphere, ellipsoid, off)")),
        }
    }
}

impl FromStr for Pipeline {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "aca" => Ok(Pipeline::Aca),
            "baca" => Ok(Pipeline::Baca),
            "dense" => Ok(Pipeline::Dense),
            _ => Err(format!("unknown pipeline '{s}' (aca, baca, dense)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub level: usize,
    pub semiaxes: [f64; 3],
    pub refine_band: f64,
    pub refine_rounds: usize,
    pub off_path: String,
    pub source: [f64; 3],
    pub pipeline: Pipeline,
    pub leaf_size: usize,
    pub beta: f64,
    pub eps_aca: f64,
    pub eps_baca: f64,
    pub theta: f64,
    pub alpha: f64,
    pub n_ahead: usize,
    pub r0: usize,
    pub max_outer: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub slp_order: usize,
    pub dlp_order: usize,
    pub dlp_near_depth: usize,
    pub error_order: usize,
    pub output: PathBuf,
    pub threads: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = QuadratureOrders::default();
        Self {
            geometry: Geometry::Icosphere,
            level: 3,
            semiaxes: [1.0, 1.0, 3.0],
            refine_band: 1.5,
            refine_rounds: 1,
            off_path: String::new(),
            source: [1.1, 0.0, 0.0],
            pipeline: Pipeline::Baca,
            leaf_size: 15,
            beta: 0.8,
            eps_aca: 1e-6,
            eps_baca: 1e-4,
            theta: 0.9,
            alpha: 100.0,
            n_ahead: 2,
            r0: 3,
            max_outer: 200,
            cg_tol: 1e-8,
            cg_max_iter: 10_000,
            slp_order: q.slp_outer,
            dlp_order: q.dlp,
            dlp_near_depth: q.dlp_near_depth,
            error_order: q.error,
            output: PathBuf::from("out"),
            threads: 1,
            seed: 0,
        }
    }
}

/// Keys in the order they are serialized.
pub const KEYS: [&str; 26] = [
    "geometry",
    "level",
    "semiaxes",
    "refine_band",
    "refine_rounds",
    "off_path",
    "source",
    "pipeline",
    "leaf_size",
    "beta",
    "eps_aca",
    "eps_baca",
    "theta",
    "alpha",
    "n_ahead",
    "r0",
    "max_outer",
    "cg_tol",
    "cg_max_iter",
    "slp_order",
    "dlp_order",
    "dlp_near_depth",
    "error_order",
    "output",
    "threads",
    "seed",
];

fn parse<V: FromStr>(key: &str, value: &str) -> CliResult<V>
where
    V::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Validation(format!("{key}: cannot parse '{value}': {e}")))
}

fn parse_triple(key: &str, value: &str) -> CliResult<[f64; 3]> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Validation(format!("{key}: expected three comma-separated numbers, got '{value}'")));
    }
    Ok([parse(key, parts[0])?, parse(key, parts[1])?, parse(key, parts[2])?])
}

fn triple(v: [f64; 3]) -> String {
    format!("{},{},{}", v[0], v[1], v[2])
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let value = value.trim();
        match key {
            "geometry" => self.geometry = value.parse().map_err(CliError::Validation)?,
            "level" => self.level = parse(key, value)?,
            "semiaxes" => self.semiaxes = parse_triple(key, value)?,
            "refine_band" => self.refine_band = parse(key, value)?,
            "refine_rounds" => self.refine_rounds = parse(key, value)?,
            "off_path" => self.off_path = value.to_string(),
            "source" => self.source = parse_triple(key, value)?,
            "pipeline" => self.pipeline = value.parse().map_err(CliError::Validation)?,
            "leaf_size" => self.leaf_size = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "eps_aca" => self.eps_aca = parse(key, value)?,
            "eps_baca" => self.eps_baca = parse(key, value)?,
            "theta" => self.theta = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "n_ahead" => self.n_ahead = parse(key, value)?,
            "r0" => self.r0 = parse(key, value)?,
            "max_outer" => self.max_outer = parse(key, value)?,
            "cg_tol" => self.cg_tol = parse(key, value)?,
            "cg_max_iter" => self.cg_max_iter = parse(key, value)?,
            "slp_order" => self.slp_order = parse(key, value)?,
            "dlp_order" => self.dlp_order = parse(key, value)?,
            "dlp_near_depth" => self.dlp_near_depth = parse(key, value)?,
            "error_order" => self.error_order = parse(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "threads" => self.threads = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(CliError::Validation(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "geometry" => self.geometry.name().to_string(),
            "level" => self.level.to_string(),
            "semiaxes" => triple(self.semiaxes),
            "refine_band" => self.refine_band.to_string(),
            "refine_rounds" => self.refine_rounds.to_string(),
            "off_path" => self.off_path.clone(),
            "source" => triple(self.source),
            "pipeline" => self.pipeline.name().to_string(),
            "leaf_size" => self.leaf_size.to_string(),
            "beta" => self.beta.to_string(),
            "eps_aca" => self.eps_aca.to_string(),
            "eps_baca" => self.eps_baca.to_string(),
            "theta" => self.theta.to_string(),
            "alpha" => self.alpha.to_string(),
            "n_ahead" => self.n_ahead.to_string(),
            "r0" => self.r0.to_string(),
            "max_outer" => self.max_outer.to_string(),
            "cg_tol" => self.cg_tol.to_string(),
            "cg_max_iter" => self.cg_max_iter.to_string(),
            "slp_order" => self.slp_order.to_string(),
            "dlp_order" => self.dlp_order.to_string(),
            "dlp_near_depth" => self.dlp_near_depth.to_string(),
            "error_order" => self.error_order.to_string(),
            "output" => self.output.display().to_string(),
            "threads" => self.threads.to_string(),
            "seed" => self.seed.to_string(),
            _ => return None,
        })
    }

    /// Parses `key = value` lines on top of the defaults. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse_str(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key).unwrap());
        }
        s
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if self.level > MAX_ICOSPHERE_LEVEL {
            return bad(format!("level must be at most {MAX_ICOSPHERE_LEVEL}"));
        }
        if self.refine_rounds > MAX_REFINE_ROUNDS {
            return bad(format!("refine_rounds must be at most {MAX_REFINE_ROUNDS}"));
        }
        if self.semiaxes.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return bad("semiaxes must be positive".into());
        }
        if !self.refine_band.is_finite() {
            return bad("refine_band must be finite".into());
        }
        if self.geometry == Geometry::Off && self.off_path.is_empty() {
            return bad("geometry = off needs off_path".into());
        }
        if self.source.iter().any(|c| !c.is_finite()) {
            return bad("source must be finite".into());
        }
        if self.leaf_size == 0 {
            return bad("leaf_size must be positive".into());
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive".into());
        }
        if !(self.eps_aca > 0.0 && self.eps_aca < 1.0) {
            return bad("eps_aca must lie in (0, 1)".into());
        }
        if !(self.cg_tol > 0.0 && self.cg_tol.is_finite()) {
            return bad("cg_tol must be positive".into());
        }
        if self.cg_max_iter == 0 {
            return bad("cg_max_iter must be positive".into());
        }
        if self.threads == 0 {
            return bad("threads must be positive".into());
        }
        self.baca_params()
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        if self.pipeline == Pipeline::Baca && self.eps_baca <= 0.0 {
            return bad("eps_baca must be positive".into());
        }
        Ok(())
    }

    pub fn orders(&self) -> QuadratureOrders {
        QuadratureOrders {
            slp_outer: self.slp_order,
            dlp: self.dlp_order,
            dlp_near_depth: self.dlp_near_depth,
            error: self.error_order,
        }
    }

    pub fn baca_params(&self) -> BacaParams<f64> {
        BacaParams {
            theta: self.theta,
            eps_baca: self.eps_baca,
            alpha: self.alpha,
            n_ahead: self.n_ahead,
            r0: self.r0,
            max_outer: self.max_outer,
            cg_max_iter: self.cg_max_iter,
            record_history: false,
        }
    }

    pub fn source_point(&self) -> Vec3<f64> {
        Vec3::new(self.source[0], self.source[1], self.source[2])
    }

    /// Short geometry description used to match runs in `compare`.
    pub fn geometry_label(&self) -> String {
        match self.geometry {
            Geometry::Icosphere => format!("icosphere-{}", self.level),
            Geometry::Ellipsoid => format!(
                "ellipsoid-{}-{}x{}x{}-band{}-r{}",
                self.level, self.semiaxes[0], self.semiaxes[1], self.semiaxes[2], self.refine_band, self.refine_rounds
            ),
            Geometry::Off => format!("off-{}", self.off_path),
        }
    }

    pub fn build_mesh(&self) -> CliResult<TriMesh64> {
        Ok(match self.geometry {
            Geometry::Icosphere => generate_icosphere(self.level, 1.0)?,
            Geometry::Ellipsoid => {
                let base = generate_icosphere(self.level, 1.0)?.map_to_ellipsoid(self.semiaxes)?;
                let band = self.refine_band;
                refine_region(&base, |c: Vec3<f64>| c.z.abs() < band, self.refine_rounds)?
            }
            Geometry::Off => load_off(&self.off_path)?,
        })
    }
}
