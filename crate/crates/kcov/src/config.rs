//! Configuration: CLI flags, optional flat key=value config file, and the
//! resolution of both into a single run or a sweep plan. Flags override file
//! values; the file keys are spelled exactly like the long flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;

use kcoverage::geometry::{ConvexPolygon, DensityField, Point};
use kcoverage::simulator::{Mode, SimConfig};

use crate::sweep::SweepSpec;

#[derive(Parser, Debug, Clone, Default)]
#[command(
    name = "kcov",
    about = "Self-triggered k-order coverage control simulator",
    version
)]
pub struct Args {
    /// Flat key=value config file (same keys as the long flags).
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Number of agents n.
    #[arg(long)]
    pub agents: Option<usize>,

    /// Coverage order k (must be < n).
    #[arg(long)]
    pub k: Option<usize>,

    /// Domain rectangle as WxH in meters, e.g. 50x50.
    #[arg(long)]
    pub domain: Option<String>,

    /// Trigger threshold epsilon in meters (single run).
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Comma-separated epsilon list for a sweep; 0 maps to benchmark mode.
    #[arg(long = "sweep-eps")]
    pub sweep_eps: Option<String>,

    /// Seed count for a sweep (uses seeds 0..count-1).
    #[arg(long)]
    pub seeds: Option<u64>,

    /// Seed for a single run (falls back to env KCOV_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Timestep in seconds.
    #[arg(long)]
    pub dt: Option<f64>,

    /// Maximum agent speed in m/s.
    #[arg(long)]
    pub vmax: Option<f64>,

    /// Number of simulation steps.
    #[arg(long)]
    pub steps: Option<usize>,

    /// Neighbor-discovery radius increment in meters.
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Grid resolution for guaranteed/dual-guaranteed cells.
    #[arg(long = "grid-res")]
    pub grid_res: Option<usize>,

    /// Power model exponent coefficient (1/m).
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Power model medium constant.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Received power per link in dBm.
    #[arg(long = "precv-dbm")]
    pub precv_dbm: Option<f64>,

    /// Density: uniform | gaussian:cx,cy,sigma[,cx,cy,sigma...]
    #[arg(long)]
    pub density: Option<String>,

    /// Mode: benchmark | event | self.
    #[arg(long)]
    pub mode: Option<String>,

    /// Output directory for CSV/SVG files.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Also render an SVG of the trajectories per run.
    #[arg(long)]
    pub svg: bool,

    /// Parallel jobs for sweeps (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Force per-step invariant checks on (default: on in debug builds).
    #[arg(long = "assert-invariants")]
    pub assert_invariants: bool,

    /// Force per-step invariant checks off.
    #[arg(long = "no-assert-invariants")]
    pub no_assert_invariants: bool,
}

/// What the CLI should execute.
#[derive(Debug, Clone)]
pub enum RunPlan {
    Single(SimConfig),
    Sweep(SweepSpec),
}

/// Output-side options that ride along with the plan.
#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub out_dir: PathBuf,
    pub svg: bool,
    pub jobs: Option<usize>,
}

fn parse_kv_file(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| anyhow!("config key '{key}': {e}")),
    }
}

pub fn parse_domain(spec: &str) -> Result<ConvexPolygon> {
    let (w, h) = spec
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("--domain expects WxH, got '{spec}'"))?;
    let w: f64 = w
        .trim()
        .parse()
        .map_err(|_| anyhow!("--domain width '{w}' is not a number"))?;
    let h: f64 = h
        .trim()
        .parse()
        .map_err(|_| anyhow!("--domain height '{h}' is not a number"))?;
    if !(w > 0.0 && h > 0.0) {
        bail!("--domain dimensions must be positive");
    }
    ConvexPolygon::rect(0.0, 0.0, w, h).map_err(|e| anyhow!("--domain: {e}"))
}

pub fn parse_density(spec: &str) -> Result<DensityField> {
    if spec == "uniform" {
        return Ok(DensityField::Uniform(1.0));
    }
    if let Some(rest) = spec.strip_prefix("gaussian:") {
        let nums: Vec<f64> = rest
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| anyhow!("--density gaussian component '{s}' is not a number"))
            })
            .collect::<Result<_>>()?;
        if nums.is_empty() || !nums.len().is_multiple_of(3) {
            bail!("--density gaussian expects groups of cx,cy,sigma");
        }
        let comps = nums
            .chunks(3)
            .map(|c| kcoverage::geometry::GaussianComponent {
                mean: Point::new(c[0], c[1]),
                sigma: c[2],
                weight: 1.0,
            })
            .collect();
        return DensityField::gaussian_mixture(comps).map_err(|e| anyhow!("--density: {e}"));
    }
    bail!("--density expects 'uniform' or 'gaussian:cx,cy,sigma[,...]', got '{spec}'")
}

fn parse_eps_list(spec: &str) -> Result<Vec<f64>> {
    let eps: Vec<f64> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("--sweep-eps entry '{s}' is not a number"))
        })
        .collect::<Result<_>>()?;
    if eps.is_empty() {
        bail!("--sweep-eps must list at least one value");
    }
    if eps.iter().any(|e| *e < 0.0) {
        bail!("--sweep-eps entries must be >= 0");
    }
    Ok(eps)
}

/// Resolves flags, config file, environment and defaults into a run plan.
/// Precedence: flag > file > env (seed only) > default.
pub fn parse_config(args: &Args) -> Result<(RunPlan, OutputOptions)> {
    let file = match &args.config {
        Some(path) => parse_kv_file(path)?,
        None => BTreeMap::new(),
    };

    let defaults = SimConfig::default();
    let n = args
        .agents
        .or(parse_value(&file, "agents")?)
        .unwrap_or(defaults.n);
    let k = args.k.or(parse_value(&file, "k")?).unwrap_or(defaults.k);
    if k == 0 || k >= n {
        bail!("--k must satisfy 1 <= k < n (--agents); got k = {k}, n = {n}");
    }
    let domain = match args.domain.clone().or_else(|| file.get("domain").cloned()) {
        Some(spec) => parse_domain(&spec)?,
        None => defaults.domain.clone(),
    };
    let phi = match args
        .density
        .clone()
        .or_else(|| file.get("density").cloned())
    {
        Some(spec) => parse_density(&spec)?,
        None => defaults.phi.clone(),
    };
    let mode: Mode = match args.mode.clone().or_else(|| file.get("mode").cloned()) {
        Some(m) => m.parse().map_err(|e| anyhow!("--mode: {e}"))?,
        None => defaults.mode,
    };
    let seed = match args.seed.or(parse_value(&file, "seed")?) {
        Some(s) => s,
        None => match std::env::var("KCOV_SEED") {
            Ok(v) => v
                .parse::<u64>()
                .map_err(|_| anyhow!("env KCOV_SEED '{v}' is not a u64"))?,
            Err(_) => defaults.seed,
        },
    };
    let assert_invariants = if args.assert_invariants {
        true
    } else if args.no_assert_invariants {
        false
    } else {
        parse_value(&file, "assert-invariants")?.unwrap_or(defaults.assert_invariants)
    };

    let base = SimConfig {
        n,
        k,
        domain,
        phi,
        dt: args.dt.or(parse_value(&file, "dt")?).unwrap_or(defaults.dt),
        v_max: args
            .vmax
            .or(parse_value(&file, "vmax")?)
            .unwrap_or(defaults.v_max),
        epsilon: args
            .epsilon
            .or(parse_value(&file, "epsilon")?)
            .unwrap_or(defaults.epsilon),
        gamma: args
            .gamma
            .or(parse_value(&file, "gamma")?)
            .unwrap_or(defaults.gamma),
        grid_res: args
            .grid_res
            .or(parse_value(&file, "grid-res")?)
            .unwrap_or(defaults.grid_res),
        alpha: args
            .alpha
            .or(parse_value(&file, "alpha")?)
            .unwrap_or(defaults.alpha),
        beta: args
            .beta
            .or(parse_value(&file, "beta")?)
            .unwrap_or(defaults.beta),
        p_recv_dbm: args
            .precv_dbm
            .or(parse_value(&file, "precv-dbm")?)
            .unwrap_or(defaults.p_recv_dbm),
        steps: args
            .steps
            .or(parse_value(&file, "steps")?)
            .unwrap_or(defaults.steps),
        seed,
        mode,
        assert_invariants,
    };
    base.validate()
        .map_err(|e| anyhow!("invalid configuration: {e}"))?;

    let out = OutputOptions {
        out_dir: args
            .out
            .clone()
            .or_else(|| file.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out")),
        svg: args.svg || parse_value(&file, "svg")?.unwrap_or(false),
        jobs: args.jobs.or(parse_value(&file, "jobs")?),
    };

    let sweep_eps = args
        .sweep_eps
        .clone()
        .or_else(|| file.get("sweep-eps").cloned());
    let plan = match sweep_eps {
        Some(spec) => {
            let epsilons = parse_eps_list(&spec)?;
            let count = args.seeds.or(parse_value(&file, "seeds")?).unwrap_or(20);
            if count == 0 {
                bail!("--seeds must be >= 1");
            }
            RunPlan::Sweep(SweepSpec {
                epsilons,
                seeds: (0..count).collect(),
                base,
            })
        }
        None => RunPlan::Single(base),
    };
    Ok((plan, out))
}
