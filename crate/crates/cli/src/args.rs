use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ltl",
    version,
    about = "Linked-twist maps on two overlapping annuli: iteration, certification and ergodic diagnostics"
)]
pub struct Cli {
    /// Inner radius of both annuli.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub r0: f64,
    /// Outer radius of both annuli.
    #[arg(long, global = true, default_value_t = 7f64.sqrt())]
    pub r1: f64,
    /// Run seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: one per core). Never changes the output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for output files and the run manifest.
    #[arg(long, global = true, env = "LTL_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Flat JSON object of option values; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Iterate a planar map (or H on the torus) from input points.
    Iterate(IterateArgs),
    /// Check the derivative, cone and condition-(W) claims.
    Verify {
        #[command(subcommand)]
        which: VerifyCmd,
    },
    /// Numerical evidence for hyperbolicity and mixing.
    Diagnose {
        #[command(subcommand)]
        which: DiagnoseCmd,
    },
    /// Rerun the command recorded in a run manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaneMap {
    Theta,
    ThetaInv,
    Phi,
    PhiInv,
    Gamma,
    GammaInv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Plane,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// Evenly spaced points on the horizontal diameter of the left annulus band.
    Segment,
    /// Cell centres of a square grid over the bounding box, kept if in A.
    Grid,
    /// Uniform points of A.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Initial segment, its image under Φ, and under Θ.
    PlanarTwist,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    #[arg(long, value_enum, default_value_t = PlaneMap::Theta)]
    pub map: PlaneMap,
    /// Number of iterates.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Output coordinates: plane (u, v) or torus (x, y). The torus frame
    /// iterates H and accepts only theta and theta-inv.
    #[arg(long, value_enum, default_value_t = FrameArg::Plane)]
    pub frame: FrameArg,
    /// Input points, CSV with header `u,v`. Overrides --generator.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Generator::Segment)]
    pub generator: Generator,
    #[arg(long, default_value_t = 1000)]
    pub n_points: usize,
    /// Emit the data of a figure instead (ignores --map, --n and --frame).
    #[arg(long, value_enum)]
    pub figure: Option<Figure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Threshold {
    Fixed,
    HalfTwistSlope,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Sample the seven derivative ranges against their claims.
    Bounds {
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Maximize cot α over I×I and compare with the threshold.
    ConditionW {
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = Threshold::Fixed)]
        threshold: Threshold,
    },
    /// Fuzz invariance of C under DH and C̃ under DH⁻¹, and the twist signs.
    Cones {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Condition (W) and the cone condition over a grid of (r0, r1) pairs.
    Sweep {
        #[arg(long, default_value_t = 32)]
        cells: usize,
        /// Per-pair sampling grid.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = Threshold::Fixed)]
        threshold: Threshold,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveMapArg {
    ThetaPlane,
    ThetaPlaneInverse,
    HTorus,
    HTorusInverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LengthMethod {
    /// Adaptively refined polyline.
    Polyline,
    /// Quadrature of the pushed tangent; no refinement, no point budget.
    Tangent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MixMap {
    Theta,
    Identity,
}

#[derive(Debug, Subcommand)]
pub enum DiagnoseCmd {
    /// Lyapunov exponents of random orbits.
    Lyapunov {
        #[arg(long, default_value_t = 1)]
        orbits: u64,
        /// Total iterates, burn-in included.
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long, value_enum, default_value_t = FrameArg::Torus)]
        frame: FrameArg,
    },
    /// Fraction of iterates at which a pushed tangent vector lies in C (or C̃).
    Alignment {
        #[arg(long, default_value_t = 1)]
        orbits: u64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        /// forward pushes by DH and tests C; inverse by DH⁻¹ and tests C̃.
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
    },
    /// Length of the images of a segment.
    Stretch {
        #[arg(long, value_enum, default_value_t = CurveMapArg::ThetaPlane)]
        map: CurveMapArg,
        #[arg(long, default_value_t = 5)]
        iters: usize,
        /// Largest gap between consecutive image points.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Segment start and end. Default: across the left annulus band
        /// (plane maps) or across I at y = 0.3 (torus maps).
        #[arg(long, allow_hyphen_values = true)]
        u0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        v0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        u1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        v1: Option<f64>,
        #[arg(long, value_enum, default_value_t = LengthMethod::Polyline)]
        method: LengthMethod,
        /// Quadrature nodes for --method tangent.
        #[arg(long, default_value_t = 100_000)]
        nodes: usize,
        /// Point cap for --method polyline.
        #[arg(long, default_value_t = 10_000_000)]
        budget: usize,
        /// Also write the final polyline.
        #[arg(long)]
        points: bool,
    },
    /// Grow unstable and stable segments until they meet in the covering lattice.
    Intersect {
        /// Seed pairs; pair k uses seeds seed+2k+1 and seed+2k+2.
        #[arg(long, default_value_t = 20)]
        pairs: u64,
        /// Largest m and n tried.
        #[arg(long, default_value_t = 60)]
        bound: usize,
        /// Test fixed iterate counts instead of searching.
        #[arg(long, requires = "n")]
        m: Option<usize>,
        #[arg(long, requires = "m")]
        n: Option<usize>,
    },
    /// Variance of cell-averaged colour of a two-coloured field under Θ.
    Mixing {
        #[arg(long, default_value_t = 64)]
        cells: usize,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = MixMap::Theta)]
        map: MixMap,
    },
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// A run manifest written by an earlier command.
    pub manifest: PathBuf,
    /// Compare the new outputs byte for byte with the recorded ones (which
    /// must sit next to the manifest); exit 1 on any difference.
    #[arg(long)]
    pub check: bool,
}
