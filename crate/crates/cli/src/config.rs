//! Optional TOML configuration. Command-line flags take precedence over the
//! file; `PLFLOW_THREADS` takes precedence over both for the thread count.

use crate::error::{CliError, Result};
use plflow_core::flowmetrics::{EvalStandard, SilogParams};
use plflow_core::geometry::CameraIntrinsics;
use plflow_core::hdfilter::{FilterParams, Preset};
use serde::Deserialize;
use std::path::Path;

pub const THREADS_ENV: &str = "PLFLOW_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntrinsicsConfig {
    pub f_u: f64,
    pub f_v: f64,
    pub c_u: f64,
    pub c_v: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolConfig {
    pub sigma_s: Option<f64>,
    pub sigma_c: Option<f64>,
    pub preset: Option<String>,
    /// Per-axis sigmas for placing 3D points on the lattice.
    pub lattice_sigmas: Option<[f64; 3]>,
    /// "image-based", "lidar-based" or "custom".
    pub standard: Option<String>,
    /// Custom thresholds: Acc3DS abs/rel, Acc3DR abs/rel, outlier abs/rel,
    /// Acc2D abs/rel.
    pub thresholds: Option<[f64; 8]>,
    pub silog_alpha: Option<f64>,
    pub silog_lambda: Option<f64>,
    pub intrinsics: Option<IntrinsicsConfig>,
    pub threads: Option<usize>,
}

impl ToolConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|m| CliError::format(path, m))
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn filter_params(&self, preset: Option<&str>, sigma_s: Option<f64>, sigma_c: Option<f64>) -> Result<FilterParams> {
        let name = preset
            .or(self.preset.as_deref())
            .ok_or_else(|| CliError::Param("no filter preset given (--preset or config)".into()))?;
        let preset = Preset::from_name(name)
            .filter(|p| *p != Preset::Generic)
            .ok_or_else(|| CliError::Param(format!("unknown preset {name:?}")))?;
        let sigma_s = sigma_s
            .or(self.sigma_s)
            .ok_or_else(|| CliError::Param("no spatial sigma given (--sigma-s or config)".into()))?;
        let params = FilterParams {
            sigma_s,
            sigma_c: sigma_c.or(self.sigma_c),
            preset,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn intrinsics(&self, flags: [Option<f64>; 4]) -> Result<CameraIntrinsics> {
        let file = self.intrinsics.map(|k| [k.f_u, k.f_v, k.c_u, k.c_v]);
        let names = ["--fu", "--fv", "--cu", "--cv"];
        let mut vals = [0.0; 4];
        for i in 0..4 {
            vals[i] = flags[i]
                .or(file.map(|f| f[i]))
                .ok_or_else(|| CliError::Param(format!("missing intrinsic {} (flag or config)", names[i])))?;
        }
        CameraIntrinsics::new(vals[0], vals[1], vals[2], vals[3]).map_err(|e| CliError::Param(e.to_string()))
    }

    pub fn standard(&self, name: Option<&str>, thresholds: Option<&[f64]>) -> Result<EvalStandard> {
        let name = name.or(self.standard.as_deref()).unwrap_or("image-based");
        let thresholds: Option<Vec<f64>> = thresholds.map(<[f64]>::to_vec).or(self.thresholds.map(|t| t.to_vec()));
        if name == "custom" {
            let t = thresholds.ok_or_else(|| CliError::Param("custom standard needs 8 thresholds".into()))?;
            let t: [f64; 8] = t
                .try_into()
                .map_err(|t: Vec<f64>| CliError::Param(format!("custom standard needs 8 thresholds, got {}", t.len())))?;
            return Ok(EvalStandard::custom(t)?);
        }
        EvalStandard::from_name(name).ok_or_else(|| CliError::Param(format!("unknown evaluation standard {name:?}")))
    }

    pub fn silog(&self, alpha: Option<f64>, lambda: Option<f64>) -> Result<SilogParams> {
        let d = SilogParams::default();
        Ok(SilogParams::new(
            alpha.or(self.silog_alpha).unwrap_or(d.alpha),
            lambda.or(self.silog_lambda).unwrap_or(d.lambda),
        )?)
    }

    pub fn lattice_sigmas(&self, flag: Option<&[f64]>) -> Result<[f64; 3]> {
        match flag {
            Some(s) => s
                .try_into()
                .map_err(|_| CliError::Param(format!("expected 3 lattice sigmas, got {}", s.len()))),
            None => Ok(self.lattice_sigmas.unwrap_or([1.0; 3])),
        }
    }

    /// Thread count from the environment, then the flag, then the file.
    /// `None` means the default (available parallelism).
    pub fn threads(&self, flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>> {
        let n = match env {
            Some(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Param(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
            ),
            None => flag.or(self.threads),
        };
        if n == Some(0) {
            return Err(CliError::Param("thread count must be at least 1".into()));
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_full_config() {
        let cfg = ToolConfig::parse(
            r#"
            sigma_s = 3.0
            sigma_c = 25.0
            preset = "bilateral-gray"
            lattice_sigmas = [0.5, 0.5, 1.0]
            standard = "lidar-based"
            silog_alpha = 10.0
            silog_lambda = 0.5
            threads = 2
            [intrinsics]
            f_u = 500.0
            f_v = 500.0
            c_u = 320.0
            c_v = 240.0
            "#,
        )
        .unwrap();
        let p = cfg.filter_params(None, None, None).unwrap();
        assert_eq!((p.sigma_s, p.sigma_c, p.preset), (3.0, Some(25.0), Preset::BilateralGray));
        assert_eq!(cfg.intrinsics([Some(600.0), None, None, None]).unwrap().f_u, 600.0);
        assert_eq!(cfg.standard(None, None).unwrap().label(), "lidar-based");
        assert_eq!(cfg.silog(None, None).unwrap().lambda, 0.5);
        assert_eq!(cfg.lattice_sigmas(None).unwrap(), [0.5, 0.5, 1.0]);
        assert_eq!(cfg.threads(Some(4), None).unwrap(), Some(4));
        assert_eq!(cfg.threads(None, None).unwrap(), Some(2));
        assert_eq!(cfg.threads(Some(4), Some("1")).unwrap(), Some(1));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ToolConfig::parse("sigma = 1.0").is_err());
        let cfg = ToolConfig::default();
        let code = |r: Result<()>| r.unwrap_err().exit_code();
        assert_eq!(code(cfg.filter_params(Some("bilateral-gray"), Some(2.0), None).map(drop)), 3);
        assert_eq!(code(cfg.filter_params(Some("median"), Some(2.0), None).map(drop)), 3);
        assert_eq!(code(cfg.filter_params(Some("gaussian"), None, None).map(drop)), 3);
        assert_eq!(code(cfg.standard(Some("kitti"), None).map(drop)), 3);
        assert_eq!(code(cfg.standard(Some("custom"), Some(&[1.0; 7])).map(drop)), 3);
        assert_eq!(code(cfg.intrinsics([Some(1.0), Some(1.0), Some(0.0), None]).map(drop)), 3);
        assert_eq!(code(cfg.threads(None, Some("many")).map(drop)), 3);
        assert_eq!(code(cfg.threads(Some(0), None).map(drop)), 3);
        assert_eq!(code(cfg.silog(Some(10.0), Some(2.0)).map(drop)), 3);
    }
}
