use crate::config::{Assertion, ExperimentConfig, MarketConfig, Metric};
use crate::{Cli, CliError, Command, OUT_ENV};
use clap::{Args, ValueEnum};
use roughhedge::hedging::{
    convergence_study, run_classical_gamma_hedge, run_full_gamma_hedge, run_hedge, ConvergenceReport, HedgeMode,
    HedgeOutcome, HedgePlan, MarketQuote, MarketSignal, Quote,
};
use roughhedge::io::{fmt_num, read_path_csv, rough_path_to_csv, table_to_csv};
use roughhedge::models::{bs_pde_residual, vega_gamma_identity_defect, PayoffSpec};
use roughhedge::paths::{generate, GeneratorKind, GeneratorSpec};
use roughhedge::roughpath::{ito_lift_brownian, p_variation, LiftKind};
use roughhedge::signature::{iterated_integral, MultiIndex};
use roughhedge::{Instrument, InstrumentSpec, MarketState, RoughPath};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &cli.instruments {
        cfg.merge_catalog(p)?;
    }
    if let Some(p) = &cli.assert {
        cfg.merge_assertions(p)?;
    }
    match &cli.command {
        Command::Greeks(a) => greeks(a),
        Command::Hedge => hedge(cli, &cfg),
        Command::Converge => converge(cli, &cfg),
        Command::Pvar { csv, p } => pvar(csv, *p),
        Command::Signature { csv, alpha } => signature(cli, &cfg, csv, alpha),
        Command::Gen(a) => gen(cli, &cfg, a),
    }
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

// ------------------------------------------------------------------ greeks

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GreeksKind {
    Stock,
    Bscall,
    Bsput,
    BachelierCall,
    AsianCall,
    Notouch,
    SmoothedNotouch,
}

#[derive(Debug, Args)]
pub struct GreeksArgs {
    #[arg(long, value_enum)]
    kind: GreeksKind,
    /// Spot (default 100 for Black-Scholes kinds, 0 otherwise).
    #[arg(long = "S")]
    spot: Option<f64>,
    /// Strike (default 100 for Black-Scholes kinds, 0 otherwise).
    #[arg(long = "K")]
    strike: Option<f64>,
    /// Volatility (default 0.2 for Black-Scholes kinds, 1 otherwise).
    #[arg(long)]
    sigma: Option<f64>,
    /// Time to maturity.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Maturity; the valuation time is T - tau. Defaults to tau.
    #[arg(long = "T")]
    maturity: Option<f64>,
    /// Barrier level.
    #[arg(long = "B", default_value_t = 1.0)]
    barrier: f64,
    /// Mollifier half-width of the smoothed barrier.
    #[arg(long, default_value_t = 0.1)]
    width: f64,
    /// Running maximum (defaults to the spot).
    #[arg(long = "M")]
    running_max: Option<f64>,
    /// Running integral of the spot.
    #[arg(long = "I", default_value_t = 0.0)]
    running_integral: f64,
}

fn greeks(a: &GreeksArgs) -> Result<(), CliError> {
    let bs = matches!(a.kind, GreeksKind::Bscall | GreeksKind::Bsput | GreeksKind::Stock);
    let spot = a.spot.unwrap_or(if bs { 100.0 } else { 0.0 });
    let strike = a.strike.unwrap_or(if bs { 100.0 } else { 0.0 });
    let sigma = a.sigma.unwrap_or(if bs { 0.2 } else { 1.0 });
    let maturity = a.maturity.unwrap_or(a.tau);
    if !(a.tau >= 0.0) || a.tau > maturity {
        return Err(CliError::Usage(format!("need 0 <= tau <= T, got tau={} T={maturity}", a.tau)));
    }
    let inst = |maturity: f64| match a.kind {
        GreeksKind::Stock => InstrumentSpec::Stock,
        GreeksKind::Bscall => InstrumentSpec::BsCall { strike, maturity },
        GreeksKind::Bsput => InstrumentSpec::BsPut { strike, maturity },
        GreeksKind::BachelierCall => InstrumentSpec::Bachelier { payoff: PayoffSpec::Call { strike }, maturity },
        GreeksKind::AsianCall => InstrumentSpec::Asian { payoff: PayoffSpec::Call { strike }, maturity },
        GreeksKind::Notouch => InstrumentSpec::NoTouch { barrier: a.barrier, maturity },
        GreeksKind::SmoothedNotouch => InstrumentSpec::SmoothedNoTouch { barrier: a.barrier, width: a.width, maturity },
    };
    let state = MarketState {
        running_max: a.running_max.unwrap_or(spot),
        running_integral: a.running_integral,
        ..MarketState::new(maturity - a.tau, spot, sigma)
    };
    let instrument = inst(maturity);
    let g = instrument.greeks(&state)?;
    println!("instrument         {}", instrument.name());
    for (name, v) in [
        ("price", g.price),
        ("delta_s", g.delta_s),
        ("delta_sigma", g.delta_sigma),
        ("gamma_ss", g.gamma_ss),
        ("gamma_s_sigma", g.gamma_s_sigma),
        ("gamma_sigma_sigma", g.gamma_sigma_sigma),
        ("theta", g.theta),
    ] {
        println!("{name:<18} {}", fmt_num(v));
    }
    println!(
        "{:<18} gamma_undefined={} approximate={} knocked_out={}",
        "flags", g.flags.gamma_undefined, g.flags.approximate, g.flags.knocked_out
    );
    if matches!(a.kind, GreeksKind::Bscall | GreeksKind::Bsput) && a.tau > 0.0 {
        println!("{:<18} {}", "vega_gamma_defect", fmt_num(vega_gamma_identity_defect(&g, spot, sigma, a.tau)));
        // Black-Scholes prices depend on t only through tau, so shift the
        // clock to leave room for the central time difference
        let h = 1e-3 * a.tau.min(1.0);
        let shifted = inst(a.tau + 1.0);
        let st = MarketState { t: 1.0, ..state };
        println!("{:<18} {}", "pde_residual", fmt_num(bs_pde_residual(&shifted, &st, h)?));
    }
    Ok(())
}

// ------------------------------------------------------------------ hedging

fn quote(cfg: &ExperimentConfig, name: &str, signal: &Arc<MarketSignal>) -> Result<MarketQuote, CliError> {
    let spec = cfg.instrument(name)?;
    Ok(MarketQuote::new(Arc::new(spec) as Arc<dyn Instrument>, signal.clone()))
}

fn run_plan(cfg: &ExperimentConfig, mode: HedgeMode, signal: &Arc<MarketSignal>) -> Result<HedgeOutcome, CliError> {
    let p = cfg.plan()?;
    let target = quote(cfg, &p.target, signal)?;
    let hedgers = p.hedgers.iter().map(|h| quote(cfg, h, signal)).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&dyn Quote> = hedgers.iter().map(|q| q as &dyn Quote).collect();
    let plan = HedgePlan {
        mode,
        traded: Some(p.traded.unwrap_or(1)),
        tol: p.tol,
        weight_cap: p.weight_cap,
        horizon: p.horizon,
    };
    let out = match mode {
        HedgeMode::FullGamma => run_full_gamma_hedge(&plan, &target, &refs)?,
        HedgeMode::ClassicalGamma if refs.len() == 2 && p.target != p.hedgers[1] => {
            run_classical_gamma_hedge(&plan, &target, refs[0], refs[1])?
        }
        _ => run_hedge(&plan, &target, &refs)?,
    };
    Ok(out)
}

fn check_range(a: &Assertion, value: f64) -> bool {
    a.min.map_or(true, |m| value >= m) && a.max.map_or(true, |m| value <= m)
}

/// Prints one line per assertion; fails if any assertion fails.
fn report_assertions(results: Vec<(String, f64, bool)>) -> Result<(), CliError> {
    let mut failed = Vec::new();
    for (name, value, ok) in results {
        println!("assert {name}: {} value={}", if ok { "PASS" } else { "FAIL" }, fmt_num(value));
        if !ok {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(failed.join(", ")))
    }
}

fn hedge(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let market: &MarketConfig = cfg.market()?;
    let plan = cfg.plan()?;
    let seed = cli.seed.unwrap_or(market.seed);
    let signal = market.signal(seed, market.steps, market.steps)?;
    let out = run_plan(cfg, plan.mode, &signal)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }

    let l = &out.ledger;
    let mut header = vec!["time".to_string(), "wealth".into(), "target".into(), "error".into(), "cash".into()];
    header.extend(plan.hedgers.iter().map(|h| format!("q_{h}")));
    let rows: Vec<Vec<f64>> = (0..l.times.len())
        .map(|k| {
            let mut r = vec![l.times[k], l.wealth[k], l.target[k], l.wealth[k] - l.target[k], l.cash[k]];
            r.extend(&l.holdings[k]);
            r
        })
        .collect();
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    let dir = out_dir(cli, cfg)?;
    write(&dir.join("ledger.csv"), &table_to_csv(&hdr, &rows)?)?;
    println!("final_error={}", fmt_num(out.final_error));
    println!("max_residual={}", fmt_num(out.max_residual));

    let mut results = Vec::new();
    // study metrics are evaluated by `converge`
    for a in cfg.assertions.iter().filter(|a| a.metric == Metric::FinalError) {
        results.push((a.name.clone(), out.final_error, check_range(a, out.final_error)));
    }
    report_assertions(results)
}

fn converge(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let market = cfg.market()?;
    let plan = cfg.plan()?;
    let study = cfg.study.as_ref().ok_or_else(|| CliError::Usage("config has no [study] section".into()))?;
    let meshes = study.meshes()?;
    let seeds = study.seeds(cli.seed);
    let top = meshes[meshes.len() - 1];
    let mut modes = vec![plan.mode];
    modes.extend(plan.compare.iter().copied().filter(|m| *m != plan.mode));

    let mut reports: Vec<ConvergenceReport> = Vec::new();
    for &mode in &modes {
        let rep = convergence_study(mode, &meshes, &seeds, |seed, n| {
            let signal = market.signal(seed, n, top)?;
            run_plan(cfg, mode, &signal).map_err(|e| match e {
                CliError::Core(c) => c,
                other => roughhedge::Error::Config(other.to_string()),
            })
        })?;
        let medians: Vec<String> = rep.levels.iter().map(|l| format!("{}:{}", l.n, fmt_num(l.median))).collect();
        let slope = rep.slope.map_or("skipped".to_string(), fmt_num);
        println!("mode={mode} slope={slope} medians={}", medians.join(";"));
        reports.push(rep);
    }

    let dir = out_dir(cli, cfg)?;
    let mut csv = String::new();
    let mut summary = String::from("mode,N,median,valid_runs,invalid\n");
    for (i, r) in reports.iter().enumerate() {
        let body = r.to_csv();
        csv.push_str(if i == 0 { &body } else { body.split_once('\n').map_or("", |x| x.1) });
        for l in &r.levels {
            summary.push_str(&format!("{},{},{},{},{}\n", r.mode, l.n, fmt_num(l.median), l.valid_runs, l.invalid));
        }
    }
    write(&dir.join("convergence.csv"), &csv)?;
    write(&dir.join("convergence_summary.csv"), &summary)?;

    let mut results = Vec::new();
    for a in cfg.assertions.iter().filter(|a| a.metric != Metric::FinalError) {
        let mode = a.mode.unwrap_or(plan.mode);
        let rep = reports
            .iter()
            .find(|r| r.mode == mode)
            .ok_or_else(|| CliError::Usage(format!("assertion `{}`: mode {mode} was not run", a.name)))?;
        let value = match a.metric {
            Metric::Slope => rep.slope.unwrap_or(f64::NAN),
            Metric::FinalMedian => rep.medians().last().copied().unwrap_or(f64::NAN),
            Metric::Decreasing => f64::from(u8::from(rep.strictly_decreasing())),
            Metric::FinalError => unreachable!(),
        };
        let ok = !value.is_nan() && check_range(a, value);
        results.push((a.name.clone(), value, ok));
    }
    report_assertions(results)
}

// ------------------------------------------------------------------ paths

fn pvar(csv: &Path, p: f64) -> Result<(), CliError> {
    let table = read_path_csv(&std::fs::read_to_string(csv)?)?;
    let d = table.trace.dim();
    let rows: Vec<&[f64]> = table.trace.values().chunks(d).collect();
    println!("p_variation={}", fmt_num(p_variation(&rows, p)?));
    Ok(())
}

fn load_rough_path(csv: &Path) -> Result<RoughPath, CliError> {
    let table = read_path_csv(&std::fs::read_to_string(csv)?)?;
    if table.lift.is_some() {
        Ok(table.into_rough_path(LiftKind::Ito)?)
    } else if table.trace.dim() == 1 {
        Ok(ito_lift_brownian(&table.trace, None, 1)?)
    } else {
        Err(CliError::Usage(format!("{}: multi-dimensional paths need lift columns", csv.display())))
    }
}

fn signature(cli: &Cli, cfg: &ExperimentConfig, csv: &Path, alpha: &str) -> Result<(), CliError> {
    let alpha: MultiIndex = alpha.parse()?;
    let rp = load_rough_path(csv)?;
    let path = iterated_integral(&alpha, &rp)?;
    let rows: Vec<Vec<f64>> = rp.grid().times().iter().zip(&path.values).map(|(&t, &v)| vec![t, v]).collect();
    let dir = out_dir(cli, cfg)?;
    write(&dir.join("signature.csv"), &table_to_csv(&["time", "value"], &rows)?)?;
    println!("final={}", fmt_num(*path.values.last().expect("non-empty grid")));
    Ok(())
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator kind, e.g. brownian_ito or crossing_conditioned.
    #[arg(long)]
    kind: Option<String>,
    /// Grid intervals.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Barrier for crossing-conditioned paths.
    #[arg(long)]
    barrier: Option<f64>,
}

fn parse_kind(s: &str) -> Result<GeneratorKind, CliError> {
    use serde::de::IntoDeserializer;
    use serde::Deserialize;
    GeneratorKind::deserialize(IntoDeserializer::<serde::de::value::Error>::into_deserializer(s))
        .map_err(|e| CliError::Usage(format!("unknown generator kind `{s}`: {e}")))
}

fn gen(cli: &Cli, cfg: &ExperimentConfig, a: &GenArgs) -> Result<(), CliError> {
    let mut spec = cfg
        .generator
        .clone()
        .unwrap_or_else(|| GeneratorSpec::new(GeneratorKind::BrownianIto, 1, 1.0, 1024, 0));
    if let Some(k) = &a.kind {
        spec.kind = parse_kind(k)?;
    }
    if let Some(n) = a.n {
        spec.steps = n;
    }
    if let Some(d) = a.dim {
        spec.dim = d;
    }
    if let Some(b) = a.barrier {
        spec.barrier = Some(b);
    }
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    let rp = generate(&spec)?;
    let dir = out_dir(cli, cfg)?;
    write(&dir.join("path.csv"), &rough_path_to_csv(&rp))
}
