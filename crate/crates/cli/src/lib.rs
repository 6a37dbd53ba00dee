//! Command-line front end: file formats, configuration and the command
//! implementations behind the `plflow` binary.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;

use cli::{Cli, Command};
use config::{ToolConfig, THREADS_ENV};
use error::{CliError, Result};
use formats::{CloudFile, DepthRaster};
use plflow_core::flowmetrics::{self, FlowField};
use plflow_core::geometry::{self, PointCloud3D, PyramidDepth};
use plflow_core::hdfilter;
use plflow_core::lattice::BasisMatrix;
use std::fmt::Write as _;
use std::io::Write;

/// Runs one parsed invocation, writing command output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => ToolConfig::load(path)?,
        None => ToolConfig::default(),
    };
    let env = std::env::var(THREADS_ENV).ok();
    let threads = cfg.threads(cli.threads, env.as_deref())?;
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Param(e.to_string()))?;
            pool.install(|| dispatch(cli.command, &cfg))
        }
        None => dispatch(cli.command, &cfg),
    }
    .and_then(|text| emit(out, &text))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    if text.is_empty() {
        return Ok(());
    }
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| CliError::io("<stdout>".as_ref(), e))
}

/// Executes a command; returns what it prints on stdout.
fn dispatch(cmd: Command, cfg: &ToolConfig) -> Result<String> {
    match cmd {
        Command::Filter {
            input,
            output,
            preset,
            sigma_s,
            sigma_c,
            exact,
        } => {
            let params = cfg.filter_params(preset.as_deref(), sigma_s, sigma_c)?;
            let image = formats::read_image(&input)?;
            let filtered = hdfilter::filter_image(&image, &params, exact)?;
            formats::write_image(&output, &filtered)?;
            Ok(String::new())
        }
        Command::Backproject {
            depth,
            output,
            intrinsics,
            depth_scale,
            ply,
            lattice,
            lattice_dim,
            lattice_sigmas,
        } => {
            let k = cfg.intrinsics(intrinsics.flags())?;
            let sigmas = cfg.lattice_sigmas(lattice_sigmas.as_deref())?;
            let mut dm = formats::read_depth(&depth)?.to_depth_map()?;
            if let Some(lambda) = depth_scale {
                dm = geometry::scale_depth(&dm, lambda)?;
            }
            let cloud = geometry::backproject(&dm, &k)?;
            formats::write_cloud(&output, &CloudFile::from_points(&cloud.points))?;
            if let Some(path) = ply {
                formats::write_file(&path, formats::format_ply(&cloud.points).as_bytes())?;
            }
            if let Some(path) = lattice {
                let basis = BasisMatrix::new(lattice_dim)?;
                let coords = geometry::to_lattice_positions(&cloud, sigmas, &basis)?;
                let mut text = String::new();
                for c in &coords {
                    let line: Vec<String> = c.coords().iter().map(f64::to_string).collect();
                    writeln!(text, "{}", line.join(" ")).unwrap();
                }
                formats::write_file(&path, text.as_bytes())?;
            }
            Ok(String::new())
        }
        Command::EvalFlow {
            ground_truth,
            estimate,
            intrinsics,
            standard,
            thresholds,
            output,
        } => {
            let std = cfg.standard(standard.as_deref(), thresholds.as_deref())?;
            let k = cfg.intrinsics(intrinsics.flags())?;
            let gt_file = formats::read_cloud(&ground_truth)?;
            let gt = gt_file
                .flows()
                .ok_or_else(|| CliError::format(&ground_truth, "expected 6 columns: x y z dx dy dz"))?;
            let est_file = formats::read_cloud(&estimate)?;
            let est = match est_file.flows() {
                Some(flow) => {
                    if est_file.points() != gt_file.points() {
                        return Err(CliError::format(&estimate, "points differ from the ground-truth file"));
                    }
                    flow
                }
                None => est_file.points(),
            };
            if est.len() != gt.len() {
                return Err(CliError::format(
                    &estimate,
                    format!("{} records, ground truth has {}", est.len(), gt.len()),
                ));
            }
            let points = PointCloud3D::from_points(gt_file.points());
            let report = flowmetrics::evaluate_flow(&points, &FlowField::new(est)?, &FlowField::new(gt)?, &k, &std)?;
            let json = report.to_json(&std) + "\n";
            match output {
                Some(path) => formats::write_file(&path, json.as_bytes()).map(|()| String::new()),
                None => Ok(json),
            }
        }
        Command::Chamfer { first, second, fb } => {
            let a = formats::read_cloud(&first)?;
            let b = formats::read_cloud(&second)?;
            let value = if fb {
                let fa = a.flows().ok_or_else(|| CliError::format(&first, "--fb needs x y z dx dy dz records"))?;
                let fb = b.flows().ok_or_else(|| CliError::format(&second, "--fb needs x y z dx dy dz records"))?;
                flowmetrics::chamfer_fb(
                    &PointCloud3D::from_points(a.points()),
                    &PointCloud3D::from_points(b.points()),
                    &FlowField::new(fa)?,
                    &FlowField::new(fb)?,
                )?
            } else {
                flowmetrics::chamfer(&PointCloud3D::from_points(a.points()), &PointCloud3D::from_points(b.points()))?
            };
            Ok(format!("{value}\n"))
        }
        Command::ComposeDepth {
            level1,
            level2,
            level4,
            level8,
            output,
        } => {
            let rasters = [&level1, &level2, &level4, &level8].map(|p| formats::read_depth(p));
            let [r1, r2, r4, r8] = rasters;
            let (r1, r2, r4, r8) = (r1?, r2?, r4?, r8?);
            for (r, path) in [(&r2, &level2), (&r4, &level4), (&r8, &level8)] {
                if (r.width, r.height) != (r1.width, r1.height) {
                    return Err(CliError::format(
                        path,
                        format!("{}x{} level does not match {}x{}", r.width, r.height, r1.width, r1.height),
                    ));
                }
            }
            let widen = |r: &DepthRaster| r.data.iter().map(|&z| f64::from(z)).collect::<Vec<_>>();
            let mask = vec![true; r1.width * r1.height];
            let pyramid = PyramidDepth::with_mask(r1.width, r1.height, [widen(&r1), widen(&r2), widen(&r4), widen(&r8)], mask)?;
            let depth = geometry::compose_pyramid_depth(&pyramid)?;
            formats::write_depth(&output, &DepthRaster::from_depth_map(&depth))?;
            Ok(String::new())
        }
        Command::Silog {
            estimate,
            ground_truth,
            alpha,
            lambda,
        } => {
            let p = cfg.silog(alpha, lambda)?;
            let est = formats::read_depth(&estimate)?.to_depth_map()?;
            let gt = formats::read_depth(&ground_truth)?.to_depth_map()?;
            let value = flowmetrics::silog_loss(&est, &gt, &p)?;
            Ok(format!("{value}\n"))
        }
        Command::Bench { n, d, seed } => {
            let timing = bench::run(n, d, seed)?;
            Ok(timing.table(seed, rayon::current_num_threads()))
        }
    }
}
