//! Command-line front end.
//!
//! Exit status: 0 success, 1 a check or computation failed, 2 usage or parameter error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::algebra::{c, max_norm, reflection_residual, yang_baxter_residual, Reflection, C64};
use crate::bae::{
    classify_pattern, energy_from_roots, regime_of, solve_ground_state, Regime, RootPattern,
    SolverOptions,
};
use crate::config::{parse_list, Config};
use crate::error::{Error, Result};
use crate::io::fmt17;
use crate::model::{
    c2, crossing_residual, hamiltonian_direct, hamiltonian_from_transfer_with_c2,
    transfer_identity_residual, ModelParams,
};
use crate::spectrum::{
    diagonalize, diagonalize_transfer, extract_zero_roots, fit_lambda_polynomial,
    inversion_identity_check, lambda_at_zero, lambda_samples, FitOptions, ZeroRootSet,
};
use crate::thermo::{self, QuadratureSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "competing-chain", version, about = "Open spin chain with competing interactions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Key-value config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (directory for `ed`); stdout if omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Solver or quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "two-n", global = true)]
    pub two_n: Option<usize>,
    #[arg(long = "a-bar", global = true, allow_hyphen_values = true)]
    pub a_bar: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Right boundary as q / sqrt(1 + xi^2); overrides --q.
    #[arg(long = "q-bar", global = true, allow_hyphen_values = true)]
    pub q_bar: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub xi: Option<f64>,
    /// Inhomogeneities as "v1,v2,...".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    #[arg(long = "homotopy-steps", global = true)]
    pub homotopy_steps: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Algebraic and operator identity checks.
    Verify {
        /// Negative control: flip the sign of c2 in the transfer-matrix Hamiltonian.
        #[arg(long, hide = true)]
        break_c2: bool,
    },
    /// Exact diagonalization with zero roots of eigenstates.
    Ed {
        /// Number of lowest states whose roots are written.
        #[arg(long, default_value_t = 1)]
        states: usize,
    },
    /// Ground-state zero roots from the Bethe equations.
    Bae {
        /// Regime whose seed is used; defaults to the regime of (p, q_bar).
        #[arg(long)]
        regime: Option<String>,
    },
    /// Root-pattern classification of a root file or of the ED ground state.
    Classify {
        #[arg(long)]
        roots: Option<PathBuf>,
    },
    /// Surface energy and bulk energy per site.
    Thermo,
    /// Parameter sweeps of thermodynamic quantities.
    Scan {
        #[arg(long, value_enum)]
        quantity: Quantity,
        #[arg(long, value_enum)]
        sweep: Sweep,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
        /// String length for `string-excitation`.
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    SurfaceEnergy,
    BoundaryField,
    FreeBoundary,
    BulkExcitation,
    StringExcitation,
    BoundaryExcitation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    P,
    Q,
    Xi,
    ABar,
    ZBar,
}

impl Sweep {
    fn name(self) -> &'static str {
        match self {
            Sweep::P => "p",
            Sweep::Q => "q",
            Sweep::Xi => "xi",
            Sweep::ABar => "a_bar",
            Sweep::ZBar => "z_bar",
        }
    }
}

/// Runs the CLI on the given arguments and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parameter { .. } | Error::Config(_) | Error::Domain(_) | Error::Size { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn resolve_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(v) = common.two_n {
        cfg.two_n = v;
    }
    if let Some(v) = common.a_bar {
        cfg.a_bar = v;
    }
    if let Some(v) = common.p {
        cfg.p = v;
    }
    if let Some(v) = common.xi {
        cfg.xi = v;
    }
    if let Some(v) = common.q {
        cfg.q = v;
    }
    if let Some(v) = common.q_bar {
        cfg.q = v * (1.0 + cfg.xi * cfg.xi).sqrt();
    }
    if let Some(t) = &common.theta {
        cfg.theta_bar = parse_list("theta", t)?;
    }
    if common.tol.is_some() {
        cfg.tol = common.tol;
    }
    if common.max_iter.is_some() {
        cfg.max_iter = common.max_iter;
    }
    if common.homotopy_steps.is_some() {
        cfg.homotopy_steps = common.homotopy_steps;
    }
    Ok(cfg)
}

fn solver_options(cfg: &Config) -> SolverOptions {
    let d = SolverOptions::default();
    SolverOptions {
        tol: cfg.tol.unwrap_or(d.tol),
        max_iter: cfg.max_iter.unwrap_or(d.max_iter),
        homotopy_steps: cfg.homotopy_steps.unwrap_or(d.homotopy_steps),
        start_profile: None,
    }
}

fn quadrature_spec(cfg: &Config) -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: cfg.tol.unwrap_or(QuadratureSpec::default().abs_tol),
        ..QuadratureSpec::default()
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = resolve_config(&cli.common)?;
    let out = cli.common.out.as_deref();
    let format = cli.common.format;
    match &cli.command {
        Command::Verify { break_c2 } => cmd_verify(&cfg, *break_c2, out, format.unwrap_or(Format::Json)),
        Command::Ed { states } => cmd_ed(&cfg, *states, out, format.unwrap_or(Format::Csv)),
        Command::Bae { regime } => cmd_bae(&cfg, regime.as_deref(), out, format.unwrap_or(Format::Json)),
        Command::Classify { roots } => cmd_classify(&cfg, roots.as_deref(), out, format.unwrap_or(Format::Json)),
        Command::Thermo => cmd_thermo(&cfg, out, format.unwrap_or(Format::Json)),
        Command::Scan {
            quantity,
            sweep,
            from,
            to,
            points,
            n,
        } => cmd_scan(
            &cfg,
            &ScanSpec {
                quantity: *quantity,
                sweep: *sweep,
                from: *from,
                to: *to,
                points: *points,
                n: *n,
            },
            out,
            format.unwrap_or(Format::Csv),
        ),
    }
}

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            threshold,
            pass: residual <= threshold,
        }
    }
}

/// Largest chain for the operator-identity checks.
pub const VERIFY_TWO_N_CAP: usize = 8;

/// Residual checks of the algebra and of the model at the given parameters.
pub fn verify_checks(params: &ModelParams, break_c2: bool) -> Result<Vec<Check>> {
    if params.two_n > VERIFY_TWO_N_CAP {
        return Err(Error::param(
            "two_n",
            format!("verify supports at most {VERIFY_TWO_N_CAP} sites"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut point = || c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let mut checks = vec![];
    let (mut yb, mut re, mut dre) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        yb = yb.max(yang_baxter_residual(point(), point(), point()));
        re = re.max(reflection_residual(point(), point(), Reflection::Left { p: params.p }));
        dre = dre.max(reflection_residual(
            point(),
            point(),
            Reflection::Right {
                q: params.q,
                xi: params.xi,
            },
        ));
    }
    checks.push(Check::new("yang_baxter", yb, 1e-12));
    checks.push(Check::new("reflection_left", re, 1e-12));
    checks.push(Check::new("reflection_right", dre, 1e-12));

    let hom = params.homogeneous();
    let h = hamiltonian_direct(&hom)?;
    checks.push(Check::new("hamiltonian_hermitian", max_norm(&(h.adjoint() - &h)), 1e-12));
    let c2v = if break_c2 { -c2(&hom) } else { c2(&hom) };
    let ht = hamiltonian_from_transfer_with_c2(&hom, c2v)?;
    checks.push(Check::new("hamiltonian_equivalence", max_norm(&(&h - ht)), 1e-9));
    for j in 1..=params.two_n {
        checks.push(Check::new(
            format!("transfer_identity_{j}"),
            transfer_identity_residual(j, params)?,
            1e-8,
        ));
    }
    let u = c(0.3, 0.2);
    let t_scale = max_norm(&crate::model::transfer_matrix(u, params)?);
    checks.push(Check::new("crossing", crossing_residual(u, params)? / t_scale, 1e-12));

    let spectrum = diagonalize(&hom)?;
    let gs = &spectrum[0];
    let poly = fit_lambda_polynomial(&gs.state, &hom, &FitOptions::default())?;
    checks.push(Check::new("lambda_leading", (poly.leading() - 2.0).norm(), 1e-6));
    let l0 = lambda_samples(&gs.state, &hom, &[c(0., 0.)])?[0];
    let want = lambda_at_zero(&hom);
    checks.push(Check::new("lambda_at_zero", (l0 - want).norm() / want.norm(), 1e-8));
    checks.push(Check::new("lambda_crossing", poly.crossing_asymmetry(), 1e-8));
    let roots = extract_zero_roots(&poly, &hom)?;
    let inv = (1..=hom.two_n)
        .map(|j| inversion_identity_check(&roots, &hom, j))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::new("inversion_identity", inv, 1e-6));
    let e = energy_from_roots(&roots, &hom)?;
    checks.push(Check::new("energy_from_roots", (e - gs.energy).abs(), 1e-8));
    Ok(checks)
}

fn cmd_verify(cfg: &Config, break_c2: bool, out: Option<&Path>, format: Format) -> Result<bool> {
    let params = cfg.params()?;
    let checks = verify_checks(&params, break_c2)?;
    let pass = checks.iter().all(|c| c.pass);
    let text = match format {
        Format::Json => to_json(&json!({ "pass": pass, "checks": checks }))?,
        Format::Csv => {
            let mut s = String::from("name,residual,threshold,pass\n");
            for c in &checks {
                let _ = writeln!(s, "{},{},{},{}", c.name, fmt17(c.residual), fmt17(c.threshold), c.pass);
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(pass)
}

fn roots_text(roots: &ZeroRootSet, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => roots.to_json()? + "\n",
        Format::Csv => roots.to_csv(),
    })
}

/// Ground state of t at the given inhomogeneities that overlaps most with the
/// homogeneous ground state of H.
fn inhomogeneous_ground_roots(params: &ModelParams, h_ground: &[C64]) -> Result<ZeroRootSet> {
    let states = diagonalize_transfer(params, crate::spectrum::REFERENCE_POINT)?;
    let best = states
        .iter()
        .max_by(|a, b| {
            let oa: C64 = a.state.iter().zip(h_ground).map(|(x, y)| x.conj() * y).sum();
            let ob: C64 = b.state.iter().zip(h_ground).map(|(x, y)| x.conj() * y).sum();
            oa.norm().total_cmp(&ob.norm())
        })
        .ok_or_else(|| Error::Consistency("empty spectrum".into()))?;
    let poly = fit_lambda_polynomial(&best.state, params, &FitOptions::default())?;
    extract_zero_roots(&poly, params)
}

fn cmd_ed(cfg: &Config, states: usize, out: Option<&Path>, format: Format) -> Result<bool> {
    let params = cfg.params()?;
    let hom = params.homogeneous();
    let spectrum = diagonalize(&hom)?;
    let spectrum_text = match format {
        Format::Csv => {
            let mut s = String::from("index,energy\n");
            for (k, e) in spectrum.iter().enumerate() {
                let _ = writeln!(s, "{k},{}", fmt17(e.energy));
            }
            s
        }
        Format::Json => to_json(&json!({
            "two_n": hom.two_n,
            "params": hom,
            "energies": spectrum.iter().map(|e| e.energy).collect::<Vec<_>>(),
        }))?,
    };
    let Some(dir) = out else {
        print!("{spectrum_text}");
        return Ok(true);
    };
    std::fs::create_dir_all(dir)?;
    let ext = if format == Format::Csv { "csv" } else { "json" };
    std::fs::write(dir.join(format!("spectrum.{ext}")), spectrum_text)?;
    let mut ok = true;
    for (k, state) in spectrum.iter().take(states.max(1)).enumerate() {
        let roots = fit_lambda_polynomial(&state.state, &hom, &FitOptions::default())
            .and_then(|poly| extract_zero_roots(&poly, &hom));
        match roots {
            Ok(roots) => {
                std::fs::write(dir.join(format!("roots_{k}.json")), roots.to_json()? + "\n")?;
                if k == 0 {
                    std::fs::write(dir.join("ground_scatter.csv"), roots.to_csv())?;
                }
            }
            Err(e) => {
                eprintln!("state {k}: {e}");
                ok = false;
            }
        }
    }
    if !params.is_homogeneous() {
        let roots = inhomogeneous_ground_roots(&params, &spectrum[0].state)?;
        std::fs::write(dir.join("roots_inhomogeneous.json"), roots.to_json()? + "\n")?;
        std::fs::write(dir.join("inhomogeneous_scatter.csv"), roots.to_csv())?;
    }
    Ok(ok)
}

fn regime_for(cfg: &Config, params: &ModelParams, flag: Option<&str>) -> Result<Regime> {
    match flag.or(cfg.regime.as_deref()) {
        Some(r) => r.parse(),
        None => regime_of(params.p.abs(), params.q_bar()),
    }
}

fn cmd_bae(cfg: &Config, regime: Option<&str>, out: Option<&Path>, format: Format) -> Result<bool> {
    let params = cfg.params()?;
    let regime = regime_for(cfg, &params, regime)?;
    let sol = solve_ground_state(regime, &params, &solver_options(cfg))?;
    if params.is_homogeneous() {
        eprintln!("energy = {}", fmt17(energy_from_roots(&sol.roots, &params)?));
    }
    emit(out, &roots_text(&sol.roots, format)?)?;
    Ok(true)
}

fn pattern_csv(pattern: &RootPattern) -> String {
    let mut rows = String::from("category,value\n");
    for x in &pattern.pairs_n2 {
        let _ = writeln!(rows, "string_center,{}", fmt17(*x));
    }
    for x in &pattern.boundary_pairs {
        let _ = writeln!(rows, "boundary_pair,{}", fmt17(*x));
    }
    for x in &pattern.boundary_strings {
        let _ = writeln!(rows, "boundary_string,{}", fmt17(*x));
    }
    if let Some(a) = pattern.real_pair {
        let _ = writeln!(rows, "real_pair,{}", fmt17(a));
    }
    if let Some(b) = pattern.imaginary_pair {
        let _ = writeln!(rows, "imaginary_pair,{}", fmt17(b));
    }
    for (n, x) in &pattern.extra_strings {
        let _ = writeln!(rows, "string_{n},{}", fmt17(*x));
    }
    let _ = writeln!(rows, "regime,{}", pattern.regime);
    rows
}

fn cmd_classify(cfg: &Config, roots: Option<&Path>, out: Option<&Path>, format: Format) -> Result<bool> {
    let (roots, params) = match roots {
        Some(path) => {
            let r = ZeroRootSet::from_json(&std::fs::read_to_string(path)?)?;
            let p = r.params.clone();
            (r, p)
        }
        None => {
            let params = cfg.params()?.homogeneous();
            let (_, r) = crate::spectrum::ground_state_roots(&params, &FitOptions::default())?;
            (r, params)
        }
    };
    let pattern = classify_pattern(&roots, &params);
    let text = match format {
        Format::Json => to_json(&pattern)?,
        Format::Csv => pattern_csv(&pattern),
    };
    emit(out, &text)?;
    Ok(true)
}

fn cmd_thermo(cfg: &Config, out: Option<&Path>, format: Format) -> Result<bool> {
    let params = cfg.params()?;
    let spec = quadrature_spec(cfg);
    let surface = thermo::surface_energy(&params, &spec)?;
    let bulk = thermo::bulk_energy_per_site(params.a_bar, &spec)?;
    let text = match format {
        Format::Json => to_json(&json!({
            "params": params,
            "surface_energy": surface,
            "bulk_energy_per_site": bulk,
        }))?,
        Format::Csv => {
            let mut s = String::from("quantity,value,est_error\n");
            let _ = writeln!(s, "surface_energy,{},{}", fmt17(surface.value), fmt17(surface.est_error));
            for (k, v) in &surface.components {
                let _ = writeln!(s, "{k},{},", fmt17(*v));
            }
            let _ = writeln!(s, "bulk_energy_per_site,{},{}", fmt17(bulk.value), fmt17(bulk.est_error));
            s
        }
    };
    emit(out, &text)?;
    Ok(true)
}

#[derive(Clone, Copy, Debug)]
pub struct ScanSpec {
    pub quantity: Quantity,
    pub sweep: Sweep,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub x: f64,
    pub value: Option<f64>,
    pub components: Vec<(String, f64)>,
    pub est_error: Option<f64>,
    pub status: String,
}

fn scan_point(cfg: &Config, spec: &ScanSpec, x: f64, quad: &QuadratureSpec) -> Result<(f64, Vec<(String, f64)>, f64)> {
    let mut c = cfg.clone();
    let mut z_bar = 0.0;
    match spec.sweep {
        Sweep::P => c.p = x,
        Sweep::Q => c.q = x,
        Sweep::Xi => {
            // Keep q_bar fixed while the field direction changes.
            let q_bar = cfg.q / (1.0 + cfg.xi * cfg.xi).sqrt();
            c.xi = x;
            c.q = q_bar * (1.0 + x * x).sqrt();
        }
        Sweep::ABar => c.a_bar = x,
        Sweep::ZBar => z_bar = x,
    }
    // p = 0 or q = 0 is legal for the sweeps that never touch those boundaries.
    let params = ModelParams {
        two_n: c.two_n,
        a_bar: c.a_bar,
        p: c.p,
        q: c.q,
        xi: c.xi,
        theta_bar: vec![0.0; c.two_n],
    };
    let plain = |v: f64| (v, vec![], 0.0);
    Ok(match spec.quantity {
        Quantity::SurfaceEnergy => {
            let r = thermo::surface_energy(&params, quad)?;
            (r.value, r.components.into_iter().collect(), r.est_error)
        }
        Quantity::BoundaryField => {
            let (v, e) = thermo::boundary_field_energy(params.p, params.a_bar, quad)?;
            (v, vec![], e)
        }
        Quantity::FreeBoundary => {
            let (v, e) = thermo::free_boundary_energy(params.a_bar, quad)?;
            (v, vec![], e)
        }
        Quantity::BulkExcitation => plain(thermo::bulk_excitation_energy(z_bar, &params, quad)?),
        Quantity::StringExcitation => {
            plain(thermo::string_excitation_energy(spec.n, z_bar, &params, quad)?)
        }
        Quantity::BoundaryExcitation => {
            plain(thermo::boundary_excitation_energy(params.p, &params, quad)?)
        }
    })
}

/// Evaluates a sweep in parallel; rows come back in grid order.
pub fn scan_rows(cfg: &Config, spec: &ScanSpec) -> Result<Vec<ScanRow>> {
    if spec.points < 2 {
        return Err(Error::param("points", "need at least 2 grid points"));
    }
    let quad = quadrature_spec(cfg);
    let grid: Vec<f64> = (0..spec.points)
        .map(|i| spec.from + (spec.to - spec.from) * i as f64 / (spec.points - 1) as f64)
        .collect();
    Ok(grid
        .par_iter()
        .map(|&x| match scan_point(cfg, spec, x, &quad) {
            Ok((v, comps, err)) => ScanRow {
                x,
                value: Some(v),
                components: comps,
                est_error: Some(err),
                status: "ok".into(),
            },
            Err(e) => ScanRow {
                x,
                value: None,
                components: vec![],
                est_error: None,
                status: match e {
                    Error::Divergence(_) => "divergent".into(),
                    Error::Domain(_) | Error::Parameter { .. } => "out_of_domain".into(),
                    _ => "error".into(),
                },
            },
        })
        .collect())
}

fn cmd_scan(cfg: &Config, spec: &ScanSpec, out: Option<&Path>, format: Format) -> Result<bool> {
    let rows = scan_rows(cfg, spec)?;
    let text = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let names: Vec<String> = rows
                .iter()
                .find(|r| !r.components.is_empty())
                .map(|r| r.components.iter().map(|(k, _)| k.clone()).collect())
                .unwrap_or_default();
            let mut s = format!("{},value", spec.sweep.name());
            for n in &names {
                let _ = write!(s, ",{n}");
            }
            s.push_str(",est_error,status\n");
            for r in &rows {
                let cell = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
                let _ = write!(s, "{},{}", fmt17(r.x), cell(r.value));
                for n in &names {
                    let v = r.components.iter().find(|(k, _)| k == n).map(|(_, v)| *v);
                    let _ = write!(s, ",{}", cell(v));
                }
                let _ = writeln!(s, ",{},{}", cell(r.est_error), r.status);
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(true)
}
