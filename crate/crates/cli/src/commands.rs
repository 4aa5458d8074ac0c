use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::anyhow;
use clap::{Args, ValueEnum};
use ibi_core::cluster::*;
use ibi_core::convolution::{build_ladder, check_banach_algebra, check_geometric_decay};
use ibi_core::forward::{cavity_lower_bound_check, rdf_expansion, Backend, ForwardResult};
use ibi_core::gcmc::*;
use ibi_core::ibi::*;
use ibi_core::potentials::*;
use ibi_core::spaces::{GridSpec, RadialFunction, RadialGrid};
use ibi_core::InequalityReport;
use log::{info, warn};
use serde_json::json;

use crate::output::{input_file, read_missing, write_radial, Manifest, OutDir};

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or unreadable input (exit 2).
    Usage(anyhow::Error),
    /// The request is outside the validity region of a bound or expansion (exit 1).
    Domain(anyhow::Error),
}

impl Failure {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Self::Usage(e.into())
    }
}

impl From<ibi_core::Error> for Failure {
    fn from(e: ibi_core::Error) -> Self {
        use ibi_core::Error::*;
        match e {
            Input(_) | Unsupported(_) | Checkpoint(_) | Io(_) | Csv(_) | Json(_) => Self::Usage(e.into()),
            _ => Self::Domain(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Domain(e)
    }
}

pub type CmdResult = std::result::Result<(), Failure>;

#[derive(Debug, Clone, Copy)]
pub enum ZArg {
    Auto,
    Value(f64),
}

impl FromStr for ZArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        s.parse().map(Self::Value).map_err(|_| format!("expected `auto` or a number, got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy)]
pub enum GammaArg {
    InverseBeta,
    Value(f64),
}

impl FromStr for GammaArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "1/beta" {
            return Ok(Self::InverseBeta);
        }
        s.parse().map(Self::Value).map_err(|_| format!("expected `1/beta` or a number, got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Expansion,
    Gcmc,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Expansion => Backend::Expansion,
            BackendArg::Gcmc => Backend::Gcmc,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory; written under a temporary name and renamed on success.
    #[arg(long)]
    pub out: PathBuf,
    /// Replace an existing output directory.
    #[arg(long)]
    pub overwrite: bool,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    /// Activity, or `auto` for a quarter of the gas-phase bound.
    #[arg(long, default_value = "auto")]
    pub z: ZArg,
    /// Stability constant B; estimated from compressed clusters when absent.
    #[arg(long = "stability-b")]
    pub b: Option<f64>,
    /// EnsembleParams JSON; replaces --beta, --z and --stability-b.
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
}

fn grid_for(u: &Potential) -> Result<Arc<RadialGrid>, Failure> {
    Ok(Arc::new(RadialGrid::hybrid(&GridSpec::for_core_radius(u.params.r0))?))
}

fn load_potential(path: &Path, manifest: &mut Manifest, role: &str) -> Result<Potential, Failure> {
    let u = Potential::load(path)?;
    manifest.inputs.push(input_file(role, path).map_err(Failure::usage)?);
    if path.extension().is_none_or(|e| e != "json") {
        let side = ibi_core::spaces::sidecar_path(path);
        manifest.inputs.push(input_file(&format!("{role}_sidecar"), &side).map_err(Failure::usage)?);
    }
    Ok(u)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, manifest: &mut Manifest, role: &str) -> Result<T, Failure> {
    let s = std::fs::read_to_string(path).map_err(|e| Failure::usage(anyhow!("{}: {e}", path.display())))?;
    let v = serde_json::from_str(&s).map_err(|e| Failure::usage(anyhow!("{}: {e}", path.display())))?;
    manifest.inputs.push(input_file(role, path).map_err(Failure::usage)?);
    Ok(v)
}

/// Resolves the ensemble for `u`: `c_beta` from its Mayer function, `B` from
/// the flag or the cluster estimate, and `z` from the flag.
fn resolve_ensemble(u: &Potential, grid: &Arc<RadialGrid>, args: &EnsembleArgs, seed: u64, manifest: &mut Manifest) -> Result<EnsembleParams, Failure> {
    if let Some(path) = &args.ensemble {
        let e: EnsembleParams = read_json(path, manifest, "ensemble")?;
        let e = EnsembleParams::new(e.beta, e.z, e.c_beta, e.b)?;
        let c = c_beta_bound(&mayer_function(u, e.beta, grid))?;
        if e.c_beta < c {
            warn!("ensemble c_beta = {:e} is below the Mayer bound {c:e} of the potential", e.c_beta);
        }
        return Ok(e);
    }
    let beta = args.beta.ok_or_else(|| Failure::usage(anyhow!("--beta or --ensemble is required")))?;
    if !(beta > 0.0) {
        return Err(Failure::usage(anyhow!("--beta must be positive, got {beta}")));
    }
    let c_beta = c_beta_bound(&mayer_function(u, beta, grid))?;
    let b = match args.b {
        Some(b) => b,
        None => {
            let est = estimate_stability_constant(u, &StabilityConfig { seed, ..StabilityConfig::default() });
            info!("stability constant estimate B = {}", est.b_hat);
            est.b_hat
        }
    };
    let base = EnsembleParams::new(beta, 0.0, c_beta, b)?;
    let z = match args.z {
        ZArg::Auto => 0.25 * base.z_max_gas,
        ZArg::Value(z) => z,
    };
    Ok(base.with_z(z)?)
}

fn ensemble_json(e: &EnsembleParams) -> serde_json::Value {
    serde_json::to_value(e).expect("plain numbers")
}

fn load_gcmc(path: Option<&Path>, manifest: &mut Manifest) -> Result<GCMCConfig, Failure> {
    match path {
        Some(p) => read_json(p, manifest, "gcmc_config"),
        None => Ok(GCMCConfig::default()),
    }
}

fn finish(out: OutDir, mut manifest: Manifest, files: &[&str]) -> CmdResult {
    manifest.outputs = files.iter().map(|s| s.to_string()).collect();
    out.write_json("manifest.json", &manifest)?;
    let dir = out.commit()?;
    info!("wrote {}", dir.display());
    Ok(())
}

fn write_forward(out: &OutDir, res: &ForwardResult, alpha: f64) -> anyhow::Result<()> {
    let missing = (res.backend == Backend::Gcmc).then_some(res.missing.as_slice());
    write_radial(&out.path("g.csv"), &res.g, res.g_stderr.as_ref(), missing, alpha)?;
    write_radial(&out.path("y.csv"), &res.y, res.y_stderr.as_ref(), missing, alpha)?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    /// Potential: JSON description or `r,u` CSV with sidecar.
    #[arg(long)]
    pub potential: PathBuf,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, value_enum, default_value = "expansion")]
    pub backend: BackendArg,
    /// Truncation order of the activity series (2, 3 or 4).
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// GCMCConfig JSON for the simulation backend; beta and z are overwritten.
    #[arg(long)]
    pub gcmc_config: Option<PathBuf>,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Evaluate the expansion outside the gas-phase window.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn forward(a: &ForwardArgs) -> CmdResult {
    let mut m = Manifest::new("forward", json!({}));
    let u = load_potential(&a.potential, &mut m, "potential")?;
    let grid = grid_for(&u)?;
    let ens = resolve_ensemble(&u, &grid, &a.ensemble, a.seed, &mut m)?;
    let mut gcmc = None;
    if let BackendArg::Gcmc = a.backend {
        let mut cfg = load_gcmc(a.gcmc_config.as_deref(), &mut m)?;
        cfg.beta = ens.beta;
        cfg.z = ens.z;
        cfg.seed = a.seed;
        gcmc = Some(cfg);
    }
    m.seed = Some(a.seed);
    m.config = json!({
        "potential": u,
        "ensemble": ensemble_json(&ens),
        "backend": Backend::from(a.backend),
        "order": a.order,
        "gcmc": gcmc,
        "force": a.force,
    });
    let out = OutDir::create(&a.out.out, a.out.overwrite).map_err(Failure::usage)?;
    info!("forward model at beta = {}, z = {:e}", ens.beta, ens.z);
    let (res, sim) = match &gcmc {
        None => {
            let mc = McConfig { seed: a.seed, ..McConfig::default() };
            let c = ClusterCoefficients::new(&u, ens.beta, &grid)?.with_mc(mc);
            (rdf_expansion(&c, &ens, a.order, a.force)?, None)
        }
        Some(cfg) => {
            let r = run_gcmc(&u, cfg)?;
            (to_forward_result(&r, &u), Some(r.diagnostics()))
        }
    };
    write_forward(&out, &res, u.params.alpha)?;
    out.write_json(
        "diagnostics.json",
        &json!({
            "backend": res.backend,
            "rho0": res.rho0,
            "ensemble": ensemble_json(&ens),
            "forward": res.diagnostics,
            "simulation": sim,
            "missing_nodes": res.missing.iter().filter(|x| **x).count(),
        }),
    )?;
    finish(out, m, &["g.csv", "y.csv", "diagnostics.json"])
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub potential: PathBuf,
    /// GCMCConfig JSON; defaults apply to missing fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured inverse temperature.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Overrides the configured activity; `auto` is a quarter of the gas-phase bound.
    #[arg(long)]
    pub z: Option<ZArg>,
    #[arg(long = "stability-b")]
    pub b: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Continue from a checkpoint; its configuration is used.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Where to write intermediate checkpoints.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Moves per chain between intermediate checkpoints (0: none).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn simulate(a: &SimulateArgs) -> CmdResult {
    let mut m = Manifest::new("simulate", json!({}));
    let u = load_potential(&a.potential, &mut m, "potential")?;
    let mut run = match &a.resume {
        Some(path) => {
            let run = read_checkpoint(path)?;
            m.inputs.push(input_file("resume", path).map_err(Failure::usage)?);
            if a.config.is_some() || a.beta.is_some() || a.z.is_some() || a.seed.is_some() {
                return Err(Failure::usage(anyhow!(
                    "--resume takes the configuration from the checkpoint; drop --config, --beta, --z and --seed"
                )));
            }
            run
        }
        None => {
            let mut cfg = load_gcmc(a.config.as_deref(), &mut m)?;
            if let Some(b) = a.beta {
                cfg.beta = b;
            }
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            match a.z {
                Some(ZArg::Value(z)) => cfg.z = z,
                Some(ZArg::Auto) => {
                    let args = EnsembleArgs {
                        beta: Some(cfg.beta),
                        z: ZArg::Auto,
                        b: a.b,
                        ensemble: None,
                    };
                    cfg.z = resolve_ensemble(&u, &grid_for(&u)?, &args, cfg.seed, &mut m)?.z;
                }
                None => {}
            }
            GcmcRun::new(cfg)?
        }
    };
    m.seed = Some(run.config.seed);
    m.config = json!({ "potential": u, "gcmc": run.config, "checkpoint_every": a.checkpoint_every });
    if a.checkpoint_every > 0 && a.checkpoint.is_none() {
        return Err(Failure::usage(anyhow!("--checkpoint-every needs --checkpoint")));
    }
    let out = OutDir::create(&a.out.out, a.out.overwrite).map_err(Failure::usage)?;
    let step = if a.checkpoint_every == 0 { u64::MAX } else { a.checkpoint_every };
    let mut until = step;
    while !run.is_done() {
        run.advance(&u, until);
        if let (Some(path), false) = (&a.checkpoint, run.is_done()) {
            write_checkpoint(path, &run)?;
            info!("checkpoint at {until} moves per chain");
        }
        until = until.saturating_add(step);
    }
    write_checkpoint(&out.path("checkpoint.bin"), &run)?;
    let res = run.finish()?;
    write_radial(&out.path("g.csv"), &res.g_hist, Some(&res.g_stderr), Some(&res.missing), u.params.alpha)?;
    let total: u64 = res.n_distribution.iter().sum();
    let mut w = csv::Writer::from_path(out.path("N_hist.csv")).map_err(anyhow::Error::from)?;
    w.write_record(["N", "count", "probability"]).map_err(anyhow::Error::from)?;
    for (n, &c) in res.n_distribution.iter().enumerate() {
        let p = c as f64 / total.max(1) as f64;
        w.write_record([n.to_string(), c.to_string(), format!("{p:.17e}")]).map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;
    out.write_json("diagnostics.json", &json!({ "config": res.config, "simulation": res.diagnostics() }))?;
    finish(out, m, &["g.csv", "N_hist.csv", "diagnostics.json", "checkpoint.bin"])
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Target g as an `r,value` CSV (an optional `missing` column masks bins).
    #[arg(long)]
    pub gdagger: PathBuf,
    /// Initial potential file, or `pmf` for the potential of mean force.
    #[arg(long, default_value = "pmf")]
    pub u0: String,
    /// LjTypeParams JSON for the class constants of the iterates.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Potential whose gas-phase window resolves `--z auto`; also the
    /// reference for error norms.
    #[arg(long)]
    pub u_true: Option<PathBuf>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Relaxation parameter, or `1/beta`.
    #[arg(long, default_value = "1/beta")]
    pub gamma: GammaArg,
    #[arg(long, value_enum, default_value = "expansion")]
    pub backend: BackendArg,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long)]
    pub gcmc_config: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Target bins below this g are left out of the update.
    #[arg(long, default_value_t = DEFAULT_G_FLOOR)]
    pub g_floor: f64,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn invert(a: &InvertArgs) -> CmdResult {
    let mut m = Manifest::new("invert", json!({}));
    let params: LjTypeParams = match &a.params {
        Some(p) => read_json(p, &mut m, "params")?,
        None => LjTypeParams::reference_lj(),
    };
    params.validate()?;
    let (g, _) = RadialFunction::read_csv(&a.gdagger, f64::INFINITY)?;
    m.inputs.push(input_file("gdagger", &a.gdagger).map_err(Failure::usage)?);
    let missing = read_missing(&a.gdagger).map_err(Failure::usage)?.unwrap_or_default();
    let u_true = match &a.u_true {
        Some(p) => Some(load_potential(p, &mut m, "u_true")?),
        None => None,
    };
    // Beta is needed before the ensemble to build the target.
    let beta = match (&a.ensemble.ensemble, a.ensemble.beta) {
        (Some(p), _) => {
            let e: EnsembleParams = serde_json::from_str(&std::fs::read_to_string(p).map_err(Failure::usage)?).map_err(Failure::usage)?;
            e.beta
        }
        (None, Some(b)) => b,
        (None, None) => return Err(Failure::usage(anyhow!("--beta or --ensemble is required"))),
    };
    let target = TargetRdf::from_g(&g, &missing, beta, a.g_floor)?;
    let u0 = if a.u0 == "pmf" {
        pmf_initial_guess(&target, &params)?
    } else {
        load_potential(Path::new(&a.u0), &mut m, "u0")?
    };
    let reference = u_true.as_ref().unwrap_or(&u0);
    let ens = resolve_ensemble(reference, &grid_for(reference)?, &a.ensemble, a.seed, &mut m)?;
    let gcmc = match a.backend {
        BackendArg::Gcmc => {
            let mut cfg = load_gcmc(a.gcmc_config.as_deref(), &mut m)?;
            cfg.seed = a.seed;
            Some(cfg)
        }
        BackendArg::Expansion => None,
    };
    let cfg = IBIConfig {
        gamma: match a.gamma {
            GammaArg::InverseBeta => None,
            GammaArg::Value(g) => Some(g),
        },
        max_iters: a.max_iters,
        residual_tol: a.tol,
        backend: a.backend.into(),
        order: a.order,
        gcmc,
        g_floor: a.g_floor,
    };
    m.seed = Some(a.seed);
    m.config = json!({
        "u0": if a.u0 == "pmf" { json!("pmf") } else { json!(u0) },
        "params": params,
        "ensemble": ensemble_json(&ens),
        "ibi": cfg,
    });
    let out = OutDir::create(&a.out.out, a.out.overwrite).map_err(Failure::usage)?;
    let trace = run_ibi(&u0, &target, &ens, &cfg, u_true.as_ref())?;
    let mut files = Vec::new();
    for (k, u) in trace.iterates.iter().enumerate() {
        let name = format!("u_{k}.csv");
        u.write_csv(&out.path(&name), target.grid())?;
        files.push(name);
    }
    out.write_json("trace.json", &json!({ "ensemble": ensemble_json(&ens), "trace": trace.summary() }))?;
    files.push("trace.json".into());
    let names: Vec<&str> = files.iter().map(String::as_str).collect();
    info!("stopped after {} iterates: {:?}", trace.iterates.len(), trace.stop);
    finish(out, m, &names)?;
    if !trace.certified {
        let why = trace.failure.map(|f| f.summary()).unwrap_or_default();
        return Err(Failure::Domain(anyhow!("an iterate left the Lennard-Jones class: {why}")));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub potential: PathBuf,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Truncation order of the Ursell series being checked.
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Ladder depth of the geometric decay check.
    #[arg(long, default_value_t = 10)]
    pub ladder: usize,
    /// Monte Carlo samples per chain for the tree-graph bound.
    #[arg(long, default_value_t = 20_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Also write report.json and a manifest into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub overwrite: bool,
}

pub fn verify_bounds(a: &VerifyArgs) -> CmdResult {
    let mut m = Manifest::new("verify-bounds", json!({}));
    let u = load_potential(&a.potential, &mut m, "potential")?;
    let grid = grid_for(&u)?;
    let ens = resolve_ensemble(&u, &grid, &a.ensemble, a.seed, &mut m)?;
    let p = u.params;
    let mut reports = Vec::new();

    let cert = certify_lj_type(&u, &p, &grid)?;
    reports.push(InequalityReport::with_pass("c0 <= min_{r <= r0} u(r) r^alpha", p.c0, cert.c_observed, cert.lower_pass));
    reports.push(InequalityReport::with_pass(
        "sup_{r >= r0} |u(r)| r^alpha <= C0",
        cert.big_c_observed,
        p.big_c0,
        cert.upper_pass,
    ));
    reports.push(InequalityReport::with_pass("z < z_max_gas", ens.z, ens.z_max_gas, ens.in_gas_phase()));

    let f = mayer_function(&u, ens.beta, &grid);
    let pr = perturbation_radius(&u, ens.beta, ens.c_beta, ens.b, &grid)?;
    reports.push(InequalityReport::le("||f||_L1 <= c_beta", pr.abs_f_integral, ens.c_beta, 0.0));
    let w = perturbation_weight(&f, ens.c_beta, pr.c_weight, pr.delta0, p.alpha);
    reports.push(check_banach_algebra(&w, &f, p.alpha)?);
    let ladder = build_ladder(&w, a.ladder, None, p.alpha)?;
    reports.push(InequalityReport::with_pass("int w < 1", ladder.q, 1.0, ladder.q < 1.0));
    let decay = check_geometric_decay(&ladder);
    reports.extend(decay.explicit);
    reports.extend(decay.geometric);
    reports.extend(decay.l1);

    let consts = BoundConstants::new(&u, ens.beta, ens.b, &grid, a.order.max(2))?;
    let mc = McConfig {
        samples_per_chain: a.mc_samples,
        seed: a.seed,
        ..McConfig::default()
    };
    let coeffs = ClusterCoefficients::new(&u, ens.beta, &grid)?.with_mc(mc);
    for n in 2..=a.order.min(4) {
        let mut r = check_tree_graph_bound(&coeffs, &consts, n, &[0.5, 1.0, 1.5, 2.5, 4.0], &mc)?.report;
        r.inequality = format!("tree-graph bound, N = {n}: {}", r.inequality);
        reports.push(r);
    }
    let expansion = ursell_truncated(&coeffs, &ens, a.order, false)?;
    let ursell = check_ursell_decay(&expansion, &consts, &ens)?;
    reports.push(ursell.envelope);
    if ens.z <= ens.z_max_strict {
        let res = rdf_expansion(&coeffs, &ens, a.order, false)?;
        reports.push(cavity_lower_bound_check(&res, &ens)?);
    } else {
        reports.push(InequalityReport::with_pass("z <= z_max_strict", ens.z, ens.z_max_strict, false));
    }

    println!("{}", serde_json::to_string_pretty(&reports).map_err(anyhow::Error::from)?);
    let failed = reports.iter().filter(|r| !r.pass).count();
    if let Some(dir) = &a.out {
        m.seed = Some(a.seed);
        m.config = json!({
            "potential": u,
            "ensemble": ensemble_json(&ens),
            "order": a.order,
            "ladder": a.ladder,
            "mc_samples": a.mc_samples,
        });
        let out = OutDir::create(dir, a.overwrite).map_err(Failure::usage)?;
        out.write_json("report.json", &reports)?;
        finish(out, m, &["report.json"])?;
    }
    if failed > 0 {
        return Err(Failure::Domain(anyhow!("{failed} of {} inequalities failed", reports.len())));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct GraphsArgs {
    /// Number of vertices.
    #[arg(long)]
    pub n: usize,
    /// Also print the adjacency list of every connected graph.
    #[arg(long)]
    pub list: bool,
}

pub fn graphs(a: &GraphsArgs) -> CmdResult {
    let connected = enumerate_connected_graphs(a.n)?;
    let trees = enumerate_trees(a.n)?;
    println!("connected: {}, trees: {}", connected.len(), trees.len());
    if a.list {
        for (k, g) in connected.iter().enumerate() {
            let adj: Vec<String> = g
                .adjacency()
                .iter()
                .enumerate()
                .map(|(v, nb)| format!("{v}: {}", nb.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")))
                .collect();
            println!("graph {k}: {}", adj.join("; "));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activity_and_gamma_arguments() {
        assert!(matches!("auto".parse::<ZArg>(), Ok(ZArg::Auto)));
        assert!(matches!("1e-3".parse::<ZArg>(), Ok(ZArg::Value(z)) if z == 1e-3));
        assert!("Auto".parse::<ZArg>().is_err());
        assert!(matches!("1/beta".parse::<GammaArg>(), Ok(GammaArg::InverseBeta)));
        assert!(matches!("0.5".parse::<GammaArg>(), Ok(GammaArg::Value(g)) if g == 0.5));
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        let usage: Failure = ibi_core::Error::Input("x".into()).into();
        assert!(matches!(usage, Failure::Usage(_)));
        let domain: Failure = ibi_core::Error::Precondition("x".into()).into();
        assert!(matches!(domain, Failure::Domain(_)));
        let cert: Failure = ibi_core::Error::Certification("x".into()).into();
        assert!(matches!(cert, Failure::Domain(_)));
    }
}
