//! Request handling behind the `asianq` binary. Everything here is pure
//! apart from the worker threads of `xcheck`: a [`RunRequest`] maps to a
//! [`RunOutput`], so identical requests give byte-identical reports.

use asianq::error::Error as CoreError;
use asianq::hermite_price::price_hermite;
use asianq::inversion::{price_asian_laplace, InversionAlgorithm, InversionConfig};
use asianq::mc::{mc_price, McConfig};
use asianq::normalize::{denormalize_price, moment_A, normalize, price_nonpositive_q, MarketParams, NormalizedParams};
use asianq::result::{Method, PriceResult};
use asianq::tables::{Scientific, TABLE1, TABLE2, TABLE2_SCALING, TABLE2_TOL, TABLE3, TABLE3_TOL};
use asianq::transform::{abscissa_of_convergence, d_closed, d_weber, f_gy};
use asianq::yor::{c_const_log10, price_yor_triple};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Relative tolerance for the `c_{nu,h}` cells.
pub const TABLE1_TOL: f64 = 1e-3;
/// Threshold below which `|nu + 1|` counts as `nu = -1`.
pub const NU_MINUS_ONE_BAND: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Regression(String),
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Usage(_) => "usage",
            CliError::Regression(_) => "regression",
            CliError::Output(_) => "output",
        }
    }

    pub fn status(&self) -> i32 {
        match self {
            CliError::Core(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Regression(_) => 3,
            CliError::Output(_) => 4,
        }
    }

    pub fn to_json(&self) -> String {
        json!({"error": {"kind": self.kind(), "message": self.to_string()}}).to_string()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Price,
    Transform,
    Tables,
    Mc,
    Xcheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Laplace,
    Hermite,
    Yor,
    Mc,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TableChoice {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

impl TableChoice {
    fn includes(self, n: u8) -> bool {
        matches!(
            (self, n),
            (TableChoice::All, _) | (TableChoice::One, 1) | (TableChoice::Two, 2) | (TableChoice::Three, 3)
        )
    }
}

/// The route a price request ends up on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolved {
    Laplace,
    Hermite,
    Yor,
    MonteCarlo,
    ClosedForm,
}

/// A fully parsed invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub command: Command,
    pub market: Option<MarketParams>,
    pub route: Route,
    pub output_format: OutputFormat,
    pub inversion: InversionConfig,
    pub mc: McConfig,
    pub tables: TableChoice,
    /// Split point of the rectangular Hermite contour; `None` takes the diagonal path.
    pub rho: Option<f64>,
    /// Transform argument; defaults to one unit right of the abscissa.
    pub z: Option<(f64, f64)>,
}

impl RunRequest {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            market: None,
            route: Route::Auto,
            output_format: OutputFormat::Json,
            inversion: InversionConfig::default(),
            mc: McConfig::default(),
            tables: TableChoice::All,
            rho: None,
            z: None,
        }
    }

    pub fn with_market(mut self, m: MarketParams) -> Self {
        self.market = Some(m);
        self
    }

    fn market(&self) -> CliResult<MarketParams> {
        self.market
            .ok_or_else(|| CliError::Usage("this command needs --sigma, --T, --strike and --spot".into()))
    }
}

/// Exit status plus what goes to stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(req: &RunRequest) -> RunOutput {
    let outcome = match req.command {
        Command::Price => run_price(req),
        Command::Transform => run_transform(req),
        Command::Tables => run_tables(req),
        Command::Mc => run_mc(req),
        Command::Xcheck => run_xcheck(req),
    };
    match outcome {
        Ok(stdout) => RunOutput {
            status: 0,
            stdout,
            stderr: String::new(),
        },
        Err((stdout, e)) => RunOutput {
            status: e.status(),
            stdout: stdout.unwrap_or_default(),
            stderr: e.to_json(),
        },
    }
}

// a failed command may still have a report worth printing
type Outcome = std::result::Result<String, (Option<String>, CliError)>;

fn fail<E: Into<CliError>>(e: E) -> (Option<String>, CliError) {
    (None, e.into())
}

/// `auto`: Hermite when `q > 0` and `nu` is away from -1, Laplace near -1,
/// and the closed form whenever `q <= 0`. An explicit route is kept unless
/// `q <= 0`, where nothing needs inverting.
pub fn resolve_route(route: Route, n: &NormalizedParams) -> Resolved {
    if n.q <= 0.0 && route != Route::Mc {
        return Resolved::ClosedForm;
    }
    match route {
        Route::Laplace => Resolved::Laplace,
        Route::Hermite => Resolved::Hermite,
        Route::Yor => Resolved::Yor,
        Route::Mc => Resolved::MonteCarlo,
        Route::Auto if (n.nu + 1.0).abs() < NU_MINUS_ONE_BAND => Resolved::Laplace,
        Route::Auto => Resolved::Hermite,
    }
}

fn price_on(route: Resolved, n: &NormalizedParams, req: &RunRequest) -> Result<PriceResult, CoreError> {
    let (nu, h, q) = (n.nu, n.h, n.q);
    match route {
        Resolved::ClosedForm => Ok(
            PriceResult::new(price_nonpositive_q(nu, h, q)?, Method::ClosedForm, 0.0)
                .with("inversion_performed", false),
        ),
        Resolved::Laplace => price_asian_laplace(nu, h, q, &req.inversion),
        Resolved::Hermite => price_hermite(nu, h, q, req.rho),
        Resolved::Yor => {
            let r = price_yor_triple(nu, h, q)?;
            Ok(PriceResult::new(r.price, Method::Yor, r.price * r.estimated_rel_error)
                .with("c_log10", r.c_log10)
                .with("normaliser_log10", r.normaliser_log10)
                .with("integral_ln", r.integral_ln)
                .with("inner_psi_evals", r.inner_psi_evals)
                .with("a_lo", r.a_range.0)
                .with("a_max", r.a_range.1))
        }
        Resolved::MonteCarlo => {
            let e = mc_price(nu, h, q, &req.mc);
            let mut p = PriceResult::new(e.mean, Method::MonteCarlo, e.std_error)
                .with("paths", e.paths)
                .with("steps", req.mc.steps)
                .with("seed", req.mc.seed.to_string());
            for (i, w) in req.mc.warnings().into_iter().enumerate() {
                p = p.with(&format!("warning_{i}"), w);
            }
            Ok(p)
        }
    }
}

fn market_price(m: &MarketParams, c: f64) -> Option<f64> {
    denormalize_price(m, c.max(0.0)).ok()
}

fn result_json(p: &PriceResult) -> Value {
    json!({"value": p.value, "method": p.method, "error_estimate": p.error_estimate})
}

fn emit_csv(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let out = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(out)?;
    for r in rows {
        w.write_record(r).map_err(out)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports are plain JSON values");
    s.push('\n');
    s
}

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

fn run_price(req: &RunRequest) -> Outcome {
    let m = req.market().map_err(fail)?;
    let n = normalize(&m).map_err(fail)?;
    let route = resolve_route(req.route, &n);
    let p = price_on(route, &n, req).map_err(fail)?;
    let c0 = market_price(&m, p.value);
    match req.output_format {
        OutputFormat::Json => {
            let mut diag = serde_json::to_value(&p.diagnostics).map_err(|e| fail(CliError::Output(e.to_string())))?;
            diag["route"] = json!(route);
            diag["market_price"] = json!(c0);
            diag["table2_scaling"] = json!(TABLE2_SCALING);
            Ok(pretty(&json!({
                "request": req,
                "normalized": n,
                "result": result_json(&p),
                "diagnostics": diag,
            })))
        }
        OutputFormat::Csv => emit_csv(
            &["route", "nu", "h", "q", "value", "error_estimate", "market_price"],
            &[vec![
                p.method.as_str().to_string(),
                num(n.nu),
                num(n.h),
                num(n.q),
                num(p.value),
                num(p.error_estimate),
                c0.map(num).unwrap_or_default(),
            ]],
        )
        .map_err(fail),
    }
}

fn run_transform(req: &RunRequest) -> Outcome {
    let m = req.market().map_err(fail)?;
    let n = normalize(&m).map_err(fail)?;
    if n.q <= 0.0 {
        return Err(fail(CliError::Usage(format!(
            "the transform needs a = q > 0, got q = {}",
            n.q
        ))));
    }
    let abscissa = abscissa_of_convergence(asianq::complexfn::real(n.nu));
    let (re, im) = req.z.unwrap_or((abscissa + 1.0, 0.0));
    let z = asianq::complexfn::c(re, im);
    let closed = d_closed(n.nu, n.q, z).map_err(fail)?;
    let weber = d_weber(n.nu, n.q, z).map_err(fail)?;
    let f = f_gy(n.nu, n.q, z).map_err(fail)?;
    let rel = (closed - weber).norm() / closed.norm();
    match req.output_format {
        OutputFormat::Json => Ok(pretty(&json!({
            "request": req,
            "normalized": n,
            "result": {
                "z": [re, im],
                "abscissa": abscissa,
                "d_closed": [closed.re, closed.im],
                "d_weber": [weber.re, weber.im],
                "f_gy": [f.re, f.im],
            },
            "diagnostics": {"closed_vs_weber_rel": rel},
        }))),
        OutputFormat::Csv => emit_csv(
            &[
                "z_re",
                "z_im",
                "d_closed_re",
                "d_closed_im",
                "d_weber_re",
                "d_weber_im",
                "f_gy_re",
                "f_gy_im",
            ],
            &[[re, im, closed.re, closed.im, weber.re, weber.im, f.re, f.im]
                .map(num)
                .to_vec()],
        )
        .map_err(fail),
    }
}

fn run_mc(req: &RunRequest) -> Outcome {
    let m = req.market().map_err(fail)?;
    let n = normalize(&m).map_err(fail)?;
    let e = mc_price(n.nu, n.h, n.q, &req.mc);
    match req.output_format {
        OutputFormat::Json => Ok(pretty(&json!({
            "request": req,
            "normalized": n,
            "result": {"value": e.mean, "method": Method::MonteCarlo, "error_estimate": e.std_error},
            "diagnostics": {
                "paths": e.paths,
                "steps": req.mc.steps,
                "seed": req.mc.seed.to_string(),
                "moment_A": moment_A(n.nu, n.h),
                "market_price": market_price(&m, e.mean),
                "market_std_error": market_price(&m, e.std_error),
                "warnings": req.mc.warnings(),
                "table2_scaling": TABLE2_SCALING,
            },
        }))),
        OutputFormat::Csv => emit_csv(
            &["mean", "std_error", "paths", "steps", "seed"],
            &[vec![
                num(e.mean),
                num(e.std_error),
                e.paths.to_string(),
                req.mc.steps.to_string(),
                req.mc.seed.to_string(),
            ]],
        )
        .map_err(fail),
    }
}

fn run_xcheck(req: &RunRequest) -> Outcome {
    let m = req.market().map_err(fail)?;
    let n = normalize(&m).map_err(fail)?;
    let routes: Vec<Resolved> = if n.q <= 0.0 {
        vec![Resolved::ClosedForm, Resolved::MonteCarlo]
    } else {
        vec![
            Resolved::Laplace,
            Resolved::Hermite,
            Resolved::Yor,
            Resolved::MonteCarlo,
        ]
    };
    // one worker per route; results are collected in route order
    let results: Vec<(Resolved, Result<PriceResult, CoreError>)> = std::thread::scope(|s| {
        let handles: Vec<_> = routes
            .iter()
            .map(|&r| (r, s.spawn(move || price_on(r, &n, req))))
            .collect();
        handles
            .into_iter()
            .map(|(r, h)| {
                (
                    r,
                    h.join()
                        .unwrap_or_else(|_| Err(CoreError::InvalidInput("route worker panicked".into()))),
                )
            })
            .collect()
    });
    let ok: Vec<(Resolved, &PriceResult)> = results
        .iter()
        .filter_map(|(r, p)| p.as_ref().ok().map(|p| (*r, p)))
        .collect();
    let mut pairs = Vec::new();
    for (i, (ra, a)) in ok.iter().enumerate() {
        for (rb, b) in &ok[i + 1..] {
            let diff = a.value - b.value;
            let stochastic = *ra == Resolved::MonteCarlo || *rb == Resolved::MonteCarlo;
            let scale = a.error_estimate + b.error_estimate;
            let agree = if stochastic {
                diff.abs() <= 3.0 * scale
            } else {
                diff.abs() <= 1e-6_f64.max(10.0 * scale)
            };
            pairs.push((*ra, *rb, diff, scale, agree));
        }
    }
    let report = match req.output_format {
        OutputFormat::Json => pretty(&json!({
            "request": req,
            "normalized": n,
            "routes": results.iter().map(|(r, p)| match p {
                Ok(p) => json!({"route": r, "result": result_json(p), "market_price": market_price(&m, p.value)}),
                Err(e) => json!({"route": r, "error": {"kind": e.kind(), "message": e.to_string()}}),
            }).collect::<Vec<_>>(),
            "pairs": pairs.iter().map(|(a, b, d, s, ok)| json!({
                "a": a, "b": b, "difference": d, "combined_error_estimate": s, "agree": ok,
            })).collect::<Vec<_>>(),
            "diagnostics": {"table2_scaling": TABLE2_SCALING},
        })),
        OutputFormat::Csv => emit_csv(
            &["a", "b", "difference", "combined_error_estimate", "agree"],
            &pairs
                .iter()
                .map(|(a, b, d, s, ok)| vec![label(*a), label(*b), num(*d), num(*s), ok.to_string()])
                .collect::<Vec<_>>(),
        )
        .map_err(fail)?,
    };
    if ok.is_empty() {
        let first = results
            .into_iter()
            .find_map(|(_, p)| p.err())
            .expect("every route failed");
        return Err((Some(report), first.into()));
    }
    Ok(report)
}

fn label(r: Resolved) -> String {
    serde_json::to_value(r)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn maturity_label(t: f64) -> String {
    if t == 1.0 {
        "T=1 year".into()
    } else {
        format!("T={} months", (t * 12.0).round())
    }
}

fn run_tables(req: &RunRequest) -> Outcome {
    let which = req.tables;
    let mut json_out = serde_json::Map::new();
    let mut csv_out = Vec::new();
    let mut gate = Vec::new();

    if which.includes(1) {
        let mut rows = Vec::new();
        let mut cells = Vec::new();
        for cell in TABLE1 {
            let (nu, h) = cell.coordinates();
            let l = c_const_log10(nu, h);
            let computed = Scientific::from_log10(l);
            let rel = 10f64.powf(l - cell.printed.log10()) - 1.0;
            cells.push(json!({
                "sigma": cell.sigma, "T": cell.maturity, "nu": nu, "h": h,
                "computed": computed, "paper": cell.printed,
                "rel_deviation": rel, "within_tolerance": rel.abs() <= TABLE1_TOL,
            }));
            rows.push(vec![
                maturity_label(cell.maturity),
                format!("sigma={}%", (cell.sigma * 100.0).round()),
                computed.to_string(),
                cell.printed.to_string(),
                format!("{rel:.6e}"),
            ]);
        }
        json_out.insert("table1".into(), json!({"r": asianq::tables::TABLE1_R, "cells": cells}));
        csv_out.push(emit_csv(&["T", "sigma", "c_nu_h", "paper", "rel_deviation"], &rows).map_err(fail)?);
    }

    if which.includes(2) {
        let mut rows = Vec::new();
        let mut cases = Vec::new();
        for c in TABLE2 {
            let m = c.market();
            let n = normalize(&m).map_err(fail)?;
            let lap = price_asian_laplace(n.nu, n.h, n.q, &req.inversion).map_err(fail)?;
            let her = price_hermite(n.nu, n.h, n.q, req.rho).map_err(fail)?;
            let lap_m = denormalize_price(&m, lap.value).map_err(fail)?;
            let her_m = denormalize_price(&m, her.value).map_err(fail)?;
            cases.push(json!({
                "case": c.case, "r": c.r, "sigma": c.sigma, "T": c.maturity, "S0": c.spot,
                "normalized": n,
                "laplace": {"normalized": lap.value, "scaled": lap_m, "deviation": lap_m - c.printed},
                "hermite": {"normalized": her.value, "scaled": her_m, "deviation": her_m - c.printed},
                "paper": c.printed,
                "within_tolerance": (lap_m - c.printed).abs() <= TABLE2_TOL,
            }));
            rows.push(vec![
                c.case.to_string(),
                format!("{}%", c.r * 100.0),
                format!("{}%", c.sigma * 100.0),
                c.maturity.to_string(),
                c.spot.to_string(),
                format!("{:.4}", n.nu),
                format!("{:.3}", c.printed),
                format!("{lap_m:.7}"),
                format!("{her_m:.7}"),
                format!("{:.2e}", lap_m - c.printed),
                format!("{:.2e}", her_m - c.printed),
            ]);
        }
        json_out.insert(
            "table2".into(),
            json!({"strike": asianq::tables::TABLE2_STRIKE, "tolerance": TABLE2_TOL, "cases": cases}),
        );
        csv_out.push(
            emit_csv(
                &[
                    "Case",
                    "r",
                    "sigma",
                    "T",
                    "S_0",
                    "nu",
                    "2C^(nu)",
                    "laplace",
                    "hermite",
                    "deviation_laplace",
                    "deviation_hermite",
                ],
                &rows,
            )
            .map_err(fail)?,
        );
    }

    if which.includes(3) {
        let mut rows = Vec::new();
        let mut out = Vec::new();
        for row in TABLE3 {
            let n = normalize(&row.market()).map_err(fail)?;
            let p = price_hermite(n.nu, n.h, n.q, req.rho).map_err(fail)?;
            let dev = p.value - row.printed;
            let ok = dev.abs() <= TABLE3_TOL;
            if !ok {
                gate.push(format!("sigma={}: deviation {dev:e}", row.sigma));
            }
            out.push(json!({
                "sigma": row.sigma, "nu": n.nu, "h": n.h, "q": n.q,
                "hermite": p.value, "error_estimate": p.error_estimate,
                "paper": row.printed, "deviation": dev, "within_tolerance": ok,
            }));
            rows.push(vec![
                format!("{}%", row.sigma * 100.0),
                format!("{:.17}", row.printed),
                format!("{:.17}", p.value),
                format!("{dev:.3e}"),
            ]);
        }
        json_out.insert(
            "table3".into(),
            json!({"r": asianq::tables::TABLE3_R, "tolerance": TABLE3_TOL, "rows": out}),
        );
        csv_out.push(emit_csv(&["sigma", "C^(nu)(h,q)", "hermite", "deviation"], &rows).map_err(fail)?);
    }

    json_out.insert(
        "diagnostics".into(),
        json!({"table2_scaling": TABLE2_SCALING, "inversion": req.inversion, "hermite_rho": req.rho}),
    );
    let report = match req.output_format {
        OutputFormat::Json => pretty(&Value::Object(json_out)),
        OutputFormat::Csv => csv_out.join("\n"),
    };
    if !gate.is_empty() {
        return Err((
            Some(report),
            CliError::Regression(format!("Table 3 out of tolerance: {}", gate.join("; "))),
        ));
    }
    Ok(report)
}

/// Market flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Risk-free rate.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub r: f64,
    /// Dividend yield.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Start of the averaging window.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t0: f64,
    /// Valuation time.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    /// Maturity.
    #[arg(long = "T", allow_negative_numbers = true)]
    pub maturity: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub strike: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub spot: Option<f64>,
    /// Integral of the price already observed over [t0, t].
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub accrued: f64,
    #[arg(long, value_enum, default_value_t = Route::Auto)]
    pub route: Route,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, env = "ASIANQ_SEED")]
    pub seed: Option<u64>,
    /// Terms of the Euler inversion.
    #[arg(long)]
    pub terms: Option<usize>,
    /// Contour distance right of the abscissa for the inversion.
    #[arg(long)]
    pub shift: Option<f64>,
    #[arg(long, value_enum)]
    pub algorithm: Option<Algorithm>,
    /// Split point of the rectangular Hermite contour.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Which table to reproduce.
    #[arg(long, value_enum, default_value_t = TableChoice::All)]
    pub which: TableChoice,
    #[arg(long, allow_negative_numbers = true)]
    pub z_re: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub z_im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Euler,
    Talbot,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Cmd {
    /// Price one contract.
    Price(Opts),
    /// Evaluate the Laplace transform of the constant-strike value.
    Transform(Opts),
    /// Reproduce the published tables.
    Tables(Opts),
    /// Monte Carlo oracle.
    Mc(Opts),
    /// Run every applicable route and compare.
    Xcheck(Opts),
}

#[derive(Debug, Clone, Parser)]
#[command(name = "asianq", version, about = "Arithmetic-average Asian option prices")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

impl Cli {
    pub fn into_request(self) -> CliResult<RunRequest> {
        let (command, o) = match self.cmd {
            Cmd::Price(o) => (Command::Price, o),
            Cmd::Transform(o) => (Command::Transform, o),
            Cmd::Tables(o) => (Command::Tables, o),
            Cmd::Mc(o) => (Command::Mc, o),
            Cmd::Xcheck(o) => (Command::Xcheck, o),
        };
        let mut req = RunRequest::new(command);
        req.market = match (o.sigma, o.maturity, o.strike, o.spot) {
            (Some(sigma), Some(maturity), Some(strike), Some(spot)) => Some(MarketParams {
                r: o.r,
                delta: o.delta,
                sigma,
                t0: o.t0,
                t: o.t,
                maturity,
                strike,
                spot,
                accrued: o.accrued,
                carry_override: None,
            }),
            (None, None, None, None) => None,
            _ => return Err(CliError::Usage("--sigma, --T, --strike and --spot go together".into())),
        };
        req.route = o.route;
        req.output_format = o.format;
        if let Some(t) = o.terms {
            req.inversion.terms = t;
        }
        req.inversion.contour_shift = o.shift;
        if let Some(a) = o.algorithm {
            req.inversion.algorithm = match a {
                Algorithm::Euler => InversionAlgorithm::EulerSummation,
                Algorithm::Talbot => InversionAlgorithm::FixedTalbot,
            };
        }
        req.inversion.validate()?;
        if let Some(p) = o.paths {
            req.mc.paths = p;
        }
        if let Some(s) = o.steps {
            req.mc.steps = s;
        }
        if let Some(s) = o.seed {
            req.mc.seed = s;
        }
        if req.mc.paths == 0 || req.mc.steps == 0 {
            return Err(CliError::Usage("--paths and --steps must be positive".into()));
        }
        req.rho = o.rho;
        req.tables = o.which;
        req.z = o.z_re.map(|re| (re, o.z_im));
        Ok(req)
    }
}

/// Parse `args` (program name first) and run. Help and version requests
/// are reported on stdout with status 0.
pub fn run_args<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            return RunOutput {
                status: 0,
                stdout: e.to_string(),
                stderr: String::new(),
            };
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim().to_string());
            return RunOutput {
                status: err.status(),
                stdout: String::new(),
                stderr: err.to_json(),
            };
        }
    };
    match cli.into_request() {
        Ok(req) => run(&req),
        Err(e) => RunOutput {
            status: e.status(),
            stdout: String::new(),
            stderr: e.to_json(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np(nu: f64, q: f64) -> NormalizedParams {
        NormalizedParams {
            nu,
            h: 0.1,
            q,
            k: 1.0,
            q_star: 0.0,
        }
    }

    #[test]
    fn auto_routing() {
        assert_eq!(resolve_route(Route::Auto, &np(0.3, 0.1)), Resolved::Hermite);
        assert_eq!(resolve_route(Route::Auto, &np(-1.0 + 1e-7, 0.1)), Resolved::Laplace);
        assert_eq!(resolve_route(Route::Auto, &np(0.3, 0.0)), Resolved::ClosedForm);
        assert_eq!(resolve_route(Route::Laplace, &np(0.3, -0.2)), Resolved::ClosedForm);
        assert_eq!(resolve_route(Route::Mc, &np(0.3, -0.2)), Resolved::MonteCarlo);
        assert_eq!(resolve_route(Route::Yor, &np(0.3, 0.2)), Resolved::Yor);
    }

    #[test]
    fn flags_build_the_request() {
        let cli = Cli::try_parse_from([
            "asianq", "price", "--r", "0.05", "--sigma", "0.5", "--T", "1", "--strike", "2", "--spot", "2", "--terms",
            "60", "--seed", "9", "--route", "laplace",
        ])
        .unwrap();
        let req = cli.into_request().unwrap();
        assert_eq!(req.command, Command::Price);
        assert_eq!(req.route, Route::Laplace);
        assert_eq!(req.inversion.terms, 60);
        assert_eq!(req.mc.seed, 9);
        let m = req.market.unwrap();
        assert_eq!((m.r, m.sigma, m.maturity, m.strike, m.spot), (0.05, 0.5, 1.0, 2.0, 2.0));
    }

    #[test]
    fn partial_market_is_a_usage_error() {
        let cli = Cli::try_parse_from(["asianq", "price", "--sigma", "0.5"]).unwrap();
        assert!(matches!(cli.into_request(), Err(CliError::Usage(_))));
        let out = run(&RunRequest::new(Command::Price));
        assert_eq!(out.status, 2);
        assert!(out.stderr.contains("\"kind\":\"usage\""));
    }

    #[test]
    fn scientific_cells_in_table_one() {
        let mut req = RunRequest::new(Command::Tables);
        req.tables = TableChoice::One;
        let out = run(&req);
        assert_eq!(out.status, 0, "{}", out.stderr);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        let cell = &v["table1"]["cells"][0];
        assert_eq!(cell["paper"]["exp10"], 213);
        assert!(cell["computed"]["mantissa"].as_f64().unwrap() >= 1.0);
    }
}
