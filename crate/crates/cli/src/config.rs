//! TOML run configuration. One file describes one study.
//!
//! ```toml
//! mode = "h_uniform"        # h_uniform | hp_graded | adaptive | single_solve
//! test_case = 2
//! alpha = 0.55
//! p = 1
//! output_dir = "out"        # relative to the config file
//!
//! [mesh]
//! nx = 20
//! nt = 1
//! levels = 6
//!
//! [adaptive]
//! theta = 0.99
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use stvem::adaptivity::{AdaptiveConfig, EvalOptions, HpGrading};
use stvem::analysis::{test_case, ExactSolution};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    HUniform,
    HpGraded,
    Adaptive,
    SingleSolve,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshParams {
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub levels: Option<usize>,
    pub h_x: Option<f64>,
    pub sigma_x: Option<f64>,
    pub sigma_t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveParams {
    pub theta: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_max_dofs")]
    pub max_dofs: usize,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        Self {
            theta: None,
            max_steps: default_max_steps(),
            max_dofs: default_max_dofs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureParams {
    /// Extra points on top of the graded default rules.
    #[serde(default)]
    pub extra: usize,
    /// Extra points for the final-mesh check of E^Y.
    #[serde(default = "default_guard_extra")]
    pub guard_extra: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self {
            extra: 0,
            guard_extra: default_guard_extra(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub test_case: u32,
    pub alpha: Option<f64>,
    pub p: Option<u32>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub mesh: MeshParams,
    #[serde(default)]
    pub adaptive: AdaptiveParams,
    #[serde(default)]
    pub quadrature: QuadratureParams,
    #[serde(default = "yes")]
    pub compute_en: bool,
    #[serde(default = "yes")]
    pub cache_on: bool,
    /// Fill the `seconds` column; makes the CSV differ between runs.
    #[serde(default)]
    pub timing: bool,
}

fn default_max_steps() -> usize {
    25
}

fn default_max_dofs() -> usize {
    200_000
}

fn default_guard_extra() -> usize {
    4
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

fn need<T: Copy>(v: Option<T>, field: &str, mode: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::config(field, format!("required for mode {mode}")))
}

fn positive(v: usize, field: &str) -> Result<usize, CliError> {
    if v == 0 {
        Err(CliError::config(field, "must be at least 1"))
    } else {
        Ok(v)
    }
}

/// Fully checked study description.
#[derive(Clone, Debug)]
pub enum Study {
    Uniform { nx: usize, nt: usize, levels: usize, p: u32 },
    Hp { grading: HpGrading, levels: usize },
    Adaptive(AdaptiveConfig),
    Single { nx: usize, nt: usize, p: u32 },
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message();
            let quoted = msg.split('`').nth(1).map(str::to_string);
            // unknown and missing keys are quoted in the message; for bad
            // values the key is on the line the error points at
            let keyed_line = e.span().and_then(|s| {
                let start = text[..s.start].rfind('\n').map_or(0, |i| i + 1);
                let line = text[start..].lines().next()?;
                line.split_once('=').map(|(k, _)| k.trim().to_string())
            });
            let field = if msg.contains("field `") { quoted } else { keyed_line.or(quoted) };
            CliError::config(field.unwrap_or_else(|| "config".into()), e.to_string().trim_end())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if cfg.output_dir.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn exact(&self) -> Result<ExactSolution, CliError> {
        Ok(test_case(self.test_case, self.alpha)?)
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            compute_en: self.compute_en,
            use_cache: self.cache_on,
            quad_extra: self.quadrature.extra,
        }
    }

    /// Checks every parameter the mode needs before anything is solved.
    pub fn study(&self) -> Result<Study, CliError> {
        self.exact()?;
        if let Some(theta) = self.adaptive.theta {
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(CliError::config("theta", format!("{theta} is not in (0, 1]")));
            }
        }
        if self.p == Some(0) {
            return Err(CliError::config("p", "must be at least 1"));
        }
        let m = &self.mesh;
        Ok(match self.mode {
            Mode::HUniform => Study::Uniform {
                nx: positive(need(m.nx, "nx", "h_uniform")?, "nx")?,
                nt: positive(need(m.nt, "nt", "h_uniform")?, "nt")?,
                levels: positive(need(m.levels, "levels", "h_uniform")?, "levels")?,
                p: need(self.p, "p", "h_uniform")?,
            },
            Mode::SingleSolve => Study::Single {
                nx: positive(need(m.nx, "nx", "single_solve")?, "nx")?,
                nt: positive(need(m.nt, "nt", "single_solve")?, "nt")?,
                p: need(self.p, "p", "single_solve")?,
            },
            Mode::HpGraded => {
                let levels = positive(need(m.levels, "levels", "hp_graded")?, "levels")?;
                let check = |v: Option<f64>, field: &str, dflt: f64| -> Result<f64, CliError> {
                    let v = v.unwrap_or(dflt);
                    if v > 0.0 && v < 1.0 {
                        Ok(v)
                    } else {
                        Err(CliError::config(field, format!("{v} is not in (0, 1)")))
                    }
                };
                let grading = match HpGrading::for_test(self.test_case)? {
                    HpGrading::Time { h_x, sigma_t } => {
                        let h_x = m.h_x.unwrap_or(h_x);
                        if !(h_x > 0.0) {
                            return Err(CliError::config("h_x", "must be positive"));
                        }
                        HpGrading::Time {
                            h_x,
                            sigma_t: check(m.sigma_t, "sigma_t", sigma_t)?,
                        }
                    }
                    HpGrading::SpaceTime { sigma_x, sigma_t } => HpGrading::SpaceTime {
                        sigma_x: check(m.sigma_x, "sigma_x", sigma_x)?,
                        sigma_t: check(m.sigma_t, "sigma_t", sigma_t)?,
                    },
                };
                Study::Hp { grading, levels }
            }
            Mode::Adaptive => {
                let theta = need(self.adaptive.theta, "theta", "adaptive")?;
                let mut cfg = AdaptiveConfig::new(self.test_case, self.alpha, need(self.p, "p", "adaptive")?, theta);
                cfg.max_steps = positive(self.adaptive.max_steps, "max_steps")?;
                cfg.max_dofs = self.adaptive.max_dofs;
                cfg.eval = self.eval_options();
                Study::Adaptive(cfg)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(text: &str) -> String {
        match RunConfig::from_toml(text).and_then(|c| c.study().map(|_| ())) {
            Err(CliError::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn complete_configs_validate() {
        let c = RunConfig::from_toml("mode = \"h_uniform\"\ntest_case = 1\np = 1\n[mesh]\nnx = 2\nnt = 2\nlevels = 3\n").unwrap();
        assert!(matches!(c.study().unwrap(), Study::Uniform { levels: 3, .. }));
        assert!(c.compute_en && c.cache_on && !c.timing);
        let c = RunConfig::from_toml("mode = \"hp_graded\"\ntest_case = 3\n[mesh]\nlevels = 4\nsigma_x = 0.5\n").unwrap();
        match c.study().unwrap() {
            Study::Hp { grading, levels } => {
                assert_eq!(levels, 4);
                assert_eq!(grading, HpGrading::SpaceTime { sigma_x: 0.5, sigma_t: 0.25 });
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of("mode = \"adaptive\"\ntest_case = 1\np = 1\n[adaptive]\ntheta = 1.5\n"), "theta");
        assert_eq!(field_of("mode = \"adaptive\"\ntest_case = 1\np = 1\n"), "theta");
        assert_eq!(field_of("mode = \"h_uniform\"\ntest_case = 1\np = 1\n[mesh]\nnx = 2\nlevels = 1\n"), "nt");
        assert_eq!(field_of("mode = \"single_solve\"\ntest_case = 2\np = 1\n[mesh]\nnx = 2\nnt = 1\n"), "alpha");
        assert_eq!(field_of("mode = \"single_solve\"\ntest_case = 7\n"), "test_case");
        assert_eq!(field_of("mode = \"hp_graded\"\ntest_case = 1\n[mesh]\nlevels = 2\n"), "test_case");
        assert_eq!(field_of("mode = \"single_solve\"\ntest_case = 1\nbogus = 3\n"), "bogus");
        assert_eq!(field_of("mode = \"sometimes\"\ntest_case = 1\n"), "mode");
        assert_eq!(field_of("mode = \"h_uniform\"\ntest_case = 1\n[mesh]\nnx = \"two\"\n"), "nx");
        assert_eq!(field_of("mode = \"hp_graded\"\ntest_case = 3\n[mesh]\nlevels = 2\nsigma_t = 1.0\n"), "sigma_t");
    }
}
