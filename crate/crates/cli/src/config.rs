//! Run configuration: parsing, preset merging and up-front validation.

use std::path::{Path, PathBuf};

use hopfduet_core::dynamics::{BranchOptions, ClassifyOptions, IntegratorConfig, SweepAxis, SweepOptions};
use hopfduet_core::extract::ExtractOptions;
use hopfduet_core::nf::{CoefficientsRecord, NormalFormCoefficients, TabulatedSet, UnfoldingParams};
use hopfduet_core::wc::{forced_tau, ForcingParams, WilsonCowanParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nf: Option<NfBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wc: Option<WcBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<ForcingBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<CurvesBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<BranchBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extract: Option<ExtractOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

/// Normal-form block. Exactly one coefficient source.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NfBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientsRecord>,
    /// JSON file holding a coefficient record (relative to the config file).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Tabulated set: `negative-bsp`, `positive-bsp` or `zero-bsp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// `cartesian` (default) or `reduced`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
}

/// Wilson-Cowan block. With `preset` every missing field takes the preset
/// value; without it all nine parameters are required.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WcBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_sp: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingBlock {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub f: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default = "default_sharpness")]
    pub n: u32,
    /// Choose `tau` so the intrinsic period at the block's slope is `1/(2f)`.
    #[serde(default = "yes")]
    pub match_tau: bool,
}

fn default_sharpness() -> u32 {
    5
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvesBlock {
    pub eps_max: f64,
    pub n_eps: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n_lambda: usize,
}

impl Default for CurvesBlock {
    fn default() -> Self {
        Self {
            eps_max: 0.5,
            n_eps: 100,
            lambda_min: -0.05,
            lambda_max: 0.25,
            n_lambda: 301,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub p1: SweepAxis,
    pub p2: SweepAxis,
    #[serde(default)]
    pub options: SweepOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchBlock {
    /// Continuation parameter: `lambda`, `eps`, `b_sp` or (forced) `A`.
    pub param: String,
    pub start: f64,
    pub end: f64,
    /// Label of the orbit to seed from (`IP`, `AP`, `ASYM`, `LA`, `HA`).
    pub seed: String,
    #[serde(default)]
    pub options: BranchOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    pub t_end: f64,
    /// Resampled rows per trajectory.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Initial conditions; defaults to the symmetric and anti-phase ICs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ics: Option<Vec<Vec<f64>>>,
}

fn default_samples() -> usize {
    2001
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<Format>>,
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

/// Read a config file; `None` gives the empty config.
pub fn load(path: Option<&Path>) -> Result<(RunConfig, Option<PathBuf>), CliError> {
    let Some(path) = path else {
        return Ok((RunConfig::default(), None));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
    if let Some(v) = cfg.schema_version {
        if v != SCHEMA_VERSION {
            return Err(cfg_err("schema_version", format!("unsupported version {v}")));
        }
    }
    Ok((cfg, path.parent().map(Path::to_path_buf)))
}

impl RunConfig {
    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let c = self.integrator.unwrap_or_default();
        c.validate().map_err(|e| cfg_err("integrator", e))?;
        Ok(c)
    }

    pub fn classify_options(&self) -> Result<ClassifyOptions, CliError> {
        let c = self.classify.unwrap_or_default();
        c.validate().map_err(|e| cfg_err("classify", e))?;
        Ok(c)
    }

    pub fn formats(&self) -> Vec<Format> {
        self.output
            .as_ref()
            .and_then(|o| o.formats.clone())
            .unwrap_or_else(|| vec![Format::Csv, Format::Json, Format::Svg])
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output.as_ref().and_then(|o| o.dir.clone())
    }

    pub fn nf_block(&self) -> Result<&NfBlock, CliError> {
        self.nf.as_ref().ok_or_else(|| cfg_err("nf", "block is required"))
    }

    pub fn wc_block(&self) -> Result<&WcBlock, CliError> {
        self.wc.as_ref().ok_or_else(|| cfg_err("wc", "block is required (or pass --preset paperP)"))
    }

    /// Hash of everything that influences results: output placement and job
    /// count are excluded.
    pub fn hash(&self, command: &str) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.output = None;
        let body = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(format!("{command}\n{SCHEMA_VERSION}\n{body}").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl NfBlock {
    pub fn coefficients(&self, base: Option<&Path>) -> Result<NormalFormCoefficients, CliError> {
        let n = self.coefficients.is_some() as u8 + self.file.is_some() as u8 + self.table.is_some() as u8;
        if n != 1 {
            return Err(cfg_err("nf", "give exactly one of coefficients, file, table"));
        }
        let rec = if let Some(r) = self.coefficients {
            r
        } else if let Some(f) = &self.file {
            let path = match base {
                Some(b) if f.is_relative() => b.join(f),
                _ => f.clone(),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| cfg_err("nf.file", format!("{}: {e}", path.display())))?;
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| cfg_err("nf.file", e))?;
            // accept either a bare record or the `coefficients` member of an
            // extraction output
            let v = v.get("coefficients").cloned().unwrap_or(v);
            serde_json::from_value(v).map_err(|e| cfg_err("nf.file", e))?
        } else {
            let case = match self.table.as_deref() {
                Some("negative-bsp") => TabulatedSet::NegativeBsp,
                Some("positive-bsp") => TabulatedSet::PositiveBsp,
                Some("zero-bsp") => TabulatedSet::ZeroBsp,
                Some(other) => {
                    return Err(cfg_err(
                        "nf.table",
                        format!("unknown set '{other}' (negative-bsp, positive-bsp, zero-bsp)"),
                    ))
                }
                None => unreachable!(),
            };
            return Ok(NormalFormCoefficients::tabulated(case));
        };
        NormalFormCoefficients::try_from(rec).map_err(|e| cfg_err("nf.coefficients", e))
    }

    pub fn params(&self) -> Result<UnfoldingParams, CliError> {
        let lambda = self.lambda.ok_or_else(|| cfg_err("nf.lambda", "required"))?;
        let eps = self.eps.ok_or_else(|| cfg_err("nf.eps", "required"))?;
        UnfoldingParams::new(lambda, eps).map_err(|e| cfg_err("nf.lambda/nf.eps", e))
    }

    pub fn reduced(&self) -> Result<bool, CliError> {
        match self.chart.as_deref() {
            None | Some("cartesian") => Ok(false),
            Some("reduced") => Ok(true),
            Some(o) => Err(cfg_err("nf.chart", format!("unknown chart '{o}' (cartesian, reduced)"))),
        }
    }
}

impl WcBlock {
    pub fn params(&self) -> Result<WilsonCowanParams, CliError> {
        let base = match self.preset.as_deref() {
            Some("paperP") => Some(WilsonCowanParams::paper_p(3.05, 0.0, 0.0)),
            Some(o) => return Err(cfg_err("wc.preset", format!("unknown preset '{o}' (paperP)"))),
            None => None,
        };
        let pick = |name: &str, v: Option<f64>, d: Option<f64>| {
            v.or(d).ok_or_else(|| cfg_err(&format!("wc.{name}"), "required without a preset"))
        };
        let b = base.as_ref();
        let p = WilsonCowanParams {
            a: pick("a", self.a, b.map(|p| p.a))?,
            b: pick("b", self.b, b.map(|p| p.b))?,
            c: pick("c", self.c, b.map(|p| p.c))?,
            d: pick("d", self.d, b.map(|p| p.d))?,
            theta: pick("theta", self.theta, b.map(|p| p.theta))?,
            tau: pick("tau", self.tau, b.map(|p| p.tau))?,
            lambda: pick("lambda", self.lambda, b.map(|p| p.lambda))?,
            eps: pick("eps", self.eps, b.map(|p| p.eps))?,
            b_sp: pick("b_sp", self.b_sp, b.map(|p| p.b_sp))?,
        };
        p.validate().map_err(|e| cfg_err("wc", e))?;
        Ok(p)
    }
}

impl ForcingBlock {
    pub fn params(&self) -> Result<ForcingParams, CliError> {
        let f = ForcingParams {
            amplitude: self.amplitude,
            f: self.f,
            h: self.h,
            n: self.n,
        };
        f.validate().map_err(|e| cfg_err("forcing", e))?;
        Ok(f)
    }

    /// Apply the forcing frequency to `tau` when requested.
    pub fn adjust(&self, p: WilsonCowanParams, f: f64) -> hopfduet_core::Result<WilsonCowanParams> {
        if !self.match_tau {
            return Ok(p);
        }
        let tau = forced_tau(f, p.lambda, &p)?;
        Ok(WilsonCowanParams { tau, ..p })
    }
}

impl CurvesBlock {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.eps_max > 0.0 && self.eps_max.is_finite()) {
            return Err(cfg_err("curves.eps_max", "must be positive"));
        }
        if self.n_eps < 2 || self.n_eps > 100_000 {
            return Err(cfg_err("curves.n_eps", "must lie in [2, 100000]"));
        }
        if self.n_lambda < 2 || self.n_lambda > 100_000 {
            return Err(cfg_err("curves.n_lambda", "must lie in [2, 100000]"));
        }
        if !(self.lambda_max > self.lambda_min) || !self.lambda_min.is_finite() || !self.lambda_max.is_finite() {
            return Err(cfg_err("curves.lambda_max", "must exceed lambda_min"));
        }
        Ok(())
    }

    /// Positive ε samples up to `eps_max`.
    pub fn eps_samples(&self) -> Vec<f64> {
        (1..=self.n_eps).map(|k| self.eps_max * k as f64 / self.n_eps as f64).collect()
    }

    pub fn lambda_samples(&self) -> Vec<f64> {
        let n = self.n_lambda - 1;
        (0..=n)
            .map(|k| self.lambda_min + (self.lambda_max - self.lambda_min) * k as f64 / n as f64)
            .collect()
    }
}

impl SweepBlock {
    pub fn axes(&self, allowed: &[&str]) -> Result<[SweepAxis; 2], CliError> {
        for (field, ax) in [("sweep.p1", &self.p1), ("sweep.p2", &self.p2)] {
            if !allowed.contains(&ax.name.as_str()) {
                return Err(cfg_err(
                    &format!("{field}.name"),
                    format!("'{}' is not one of {}", ax.name, allowed.join(", ")),
                ));
            }
            ax.validate().map_err(|e| cfg_err(field, e))?;
        }
        if self.p1.name == self.p2.name {
            return Err(cfg_err("sweep.p2.name", "must differ from p1"));
        }
        Ok([self.p1.clone(), self.p2.clone()])
    }
}

impl BranchBlock {
    pub fn validate(&self, allowed: &[&str]) -> Result<(), CliError> {
        if !allowed.contains(&self.param.as_str()) {
            return Err(cfg_err(
                "branch.param",
                format!("'{}' is not one of {}", self.param, allowed.join(", ")),
            ));
        }
        if !self.start.is_finite() || !self.end.is_finite() || self.start == self.end {
            return Err(cfg_err("branch.end", "start and end must be finite and distinct"));
        }
        self.options.validate().map_err(|e| cfg_err("branch.options", e))
    }
}

impl SimBlock {
    pub fn validate(&self, dim: usize) -> Result<(), CliError> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(cfg_err("sim.t_end", "must be positive"));
        }
        if self.samples < 2 || self.samples > 1_000_000 {
            return Err(cfg_err("sim.samples", "must lie in [2, 1000000]"));
        }
        if let Some(ics) = &self.ics {
            if ics.is_empty() {
                return Err(cfg_err("sim.ics", "must not be empty"));
            }
            for (k, x) in ics.iter().enumerate() {
                if x.len() != dim || x.iter().any(|v| !v.is_finite()) {
                    return Err(cfg_err(&format!("sim.ics[{k}]"), format!("needs {dim} finite values")));
                }
            }
        }
        Ok(())
    }
}
