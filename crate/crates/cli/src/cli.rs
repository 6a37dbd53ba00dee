use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "plflow", version, about = "Permutohedral-lattice filtering, back-projection and scene-flow metrics")]
pub struct Cli {
    /// TOML file with default parameters; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: available parallelism). PLFLOW_THREADS overrides this.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct IntrinsicsArgs {
    /// Focal length along u, in pixels.
    #[arg(long = "fu", allow_hyphen_values = true)]
    pub f_u: Option<f64>,
    /// Focal length along v, in pixels.
    #[arg(long = "fv", allow_hyphen_values = true)]
    pub f_v: Option<f64>,
    /// Principal point u.
    #[arg(long = "cu", allow_hyphen_values = true)]
    pub c_u: Option<f64>,
    /// Principal point v.
    #[arg(long = "cv", allow_hyphen_values = true)]
    pub c_v: Option<f64>,
}

impl IntrinsicsArgs {
    pub fn flags(&self) -> [Option<f64>; 4] {
        [self.f_u, self.f_v, self.c_u, self.c_v]
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Edge-aware filtering of a PGM/PPM image.
    Filter {
        input: PathBuf,
        output: PathBuf,
        /// gaussian, bilateral-gray or bilateral-color.
        #[arg(long)]
        preset: Option<String>,
        /// Spatial standard deviation in pixels.
        #[arg(long)]
        sigma_s: Option<f64>,
        /// Range standard deviation in intensity units (0-255).
        #[arg(long)]
        sigma_c: Option<f64>,
        /// Use the exact O(n^2) Gaussian sum instead of the lattice.
        #[arg(long)]
        exact: bool,
    },
    /// Back-project a PLFD1 depth raster to a point cloud.
    Backproject {
        depth: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        intrinsics: IntrinsicsArgs,
        /// Multiply every depth by this factor first.
        #[arg(long, value_name = "LAMBDA")]
        depth_scale: Option<f64>,
        /// Also write an ASCII PLY file.
        #[arg(long, value_name = "FILE")]
        ply: Option<PathBuf>,
        /// Also write elevated lattice coordinates, one point per line.
        #[arg(long, value_name = "FILE")]
        lattice: Option<PathBuf>,
        /// Lattice dimension for --lattice: 2 (direct) or 3 (zero-padded).
        #[arg(long, default_value_t = 2)]
        lattice_dim: usize,
        /// Per-axis sigmas applied before elevation, e.g. 1,1,2.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        lattice_sigmas: Option<Vec<f64>>,
    },
    /// Scene-flow metrics as a JSON report.
    EvalFlow {
        /// Points with ground-truth flow: `x y z dx dy dz` per line.
        ground_truth: PathBuf,
        /// Estimated flow: `dx dy dz` or `x y z dx dy dz` per line, same order.
        estimate: PathBuf,
        #[command(flatten)]
        intrinsics: IntrinsicsArgs,
        /// image-based, lidar-based or custom.
        #[arg(long)]
        standard: Option<String>,
        /// Eight thresholds for --standard custom, comma separated.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        /// Write the report here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Symmetric Chamfer distance between two clouds.
    Chamfer {
        first: PathBuf,
        second: PathBuf,
        /// Forward-backward mode: both files carry flow (6 columns); the
        /// first is warped onto the second and vice versa.
        #[arg(long)]
        fb: bool,
    },
    /// Recombine four pyramid levels (scales 1, 2, 4, 8) into real depth.
    ComposeDepth {
        level1: PathBuf,
        level2: PathBuf,
        level4: PathBuf,
        level8: PathBuf,
        output: PathBuf,
    },
    /// Scale-invariant log loss between two depth rasters.
    Silog {
        estimate: PathBuf,
        ground_truth: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Time lattice filtering against the exact sum on random points.
    Bench {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}
