use std::io::Write;
use std::path::Path;

use permchan::approx::{approx_bec, approx_bsc, approx_general};
use permchan::bounds::{
    achievability_general_or_normal, bec_achievability, bsc_achievability, evaluate_bound, search_max_m,
};
use permchan::packing::{
    build_binary_message_set_by_size, build_dmc_message_set_with_grid, grid_resolution, kl_radius,
    packing_count_bounds_for_radius, packing_lower_bound_subspace_for_radius, tv_radius,
};
use permchan::sim::{run_trials, RNG_ALGORITHM};
use permchan::{BoundPoint, BoundPoint64, ChannelMatrix64, ChannelSpec64, Method, SimConfig, SimReport};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{ApproxArgs, BoundArgs, ChannelArgs, ChannelKind, CurveArgs, OutputArgs, PackArgs, SimulateArgs};
use crate::grid::parse_n_grid;
use crate::output::{g17, write_csv, write_rows, CurveRow, Sink};
use crate::CliError;

fn read_matrix(path: &Path) -> Result<ChannelMatrix64, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read matrix file {}: {e}", path.display())))?;
    ChannelMatrix64::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Channel named on the command line, with its parameters checked.
pub fn resolve_channel(a: &ChannelArgs) -> Result<ChannelSpec64, CliError> {
    let stray = |flag: &str, present: bool| {
        if present {
            Err(CliError::Usage(format!("{flag} does not apply to this channel")))
        } else {
            Ok(())
        }
    };
    let missing = |flag: &str| CliError::Usage(format!("this channel needs {flag}"));
    match a.channel {
        ChannelKind::Bsc => {
            stray("--eta", a.eta.is_some())?;
            stray("--matrix", a.matrix_file.is_some())?;
            let delta = a.delta.ok_or_else(|| missing("--delta"))?;
            if !(delta > 0.0 && delta < 0.5) {
                return Err(CliError::Usage(format!("--delta must lie in (0, 1/2), got {delta}")));
            }
            Ok(ChannelSpec64::Bsc { delta })
        }
        ChannelKind::Bec => {
            stray("--delta", a.delta.is_some())?;
            stray("--matrix", a.matrix_file.is_some())?;
            let eta = a.eta.ok_or_else(|| missing("--eta"))?;
            if !(eta > 0.0 && eta < 1.0) {
                return Err(CliError::Usage(format!("--eta must lie in (0, 1), got {eta}")));
            }
            Ok(ChannelSpec64::Bec { eta })
        }
        ChannelKind::Matrix => {
            stray("--delta", a.delta.is_some())?;
            stray("--eta", a.eta.is_some())?;
            let w = read_matrix(a.matrix_file.as_deref().ok_or_else(|| missing("--matrix"))?)?;
            if !w.strictly_positive() {
                return Err(CliError::Usage("channel matrix must be strictly positive".into()));
            }
            w.require_full_rank_square()?;
            Ok(ChannelSpec64::Matrix { w })
        }
    }
}

fn capacity(spec: &ChannelSpec64) -> Result<f64, CliError> {
    Ok(spec.matrix()?.capacity())
}

fn emit(out: &OutputArgs, rows: &[CurveRow]) -> Result<(), CliError> {
    let mut sink = Sink::open(out.output.as_deref())?;
    write_rows(&mut sink, rows, out.format)?;
    Ok(sink.finish()?)
}

pub fn bound(a: &BoundArgs) -> Result<(), CliError> {
    let spec = resolve_channel(&a.channel)?;
    let is_matrix = matches!(spec, ChannelSpec64::Matrix { .. });
    if is_matrix && a.m.is_some() {
        return Err(CliError::Usage("use --grid-n, not --m, with a matrix channel".into()));
    }
    if !is_matrix && a.grid_n.is_some() {
        return Err(CliError::Usage("use --m, not --grid-n, with a binary channel".into()));
    }
    let point = match (a.eps, a.m.or(a.grid_n)) {
        (Some(eps), _) => search_max_m(&spec, a.n, eps)?,
        (None, Some(size)) => evaluate_bound(&spec, a.n, size)?,
        (None, None) => unreachable!("clap requires one of --eps, --m, --grid-n"),
    };
    emit(&a.out, &[CurveRow::new(&point, capacity(&spec)?)])?;
    if a.eps.is_some() && point.is_infeasible() {
        return Err(CliError::Infeasible(format!(
            "no code with two or more messages meets eps = {} at n = {}",
            g17(a.eps.unwrap_or_default()),
            a.n
        )));
    }
    Ok(())
}

/// Methods that apply to a channel family, default choices first.
fn methods_for(spec: &ChannelSpec64) -> &'static [Method] {
    match spec {
        ChannelSpec64::Bsc { .. } => &[
            Method::Thm3Bsc,
            Method::ApproxBscCeil,
            Method::ApproxBsc,
            Method::Thm2Exact,
            Method::Thm2BerryEsseen,
            Method::ApproxGeneral,
        ],
        ChannelSpec64::Bec { .. } => &[Method::Thm4Bec, Method::ApproxBecCeil, Method::ApproxBec],
        ChannelSpec64::Matrix { .. } => &[Method::Thm2Exact, Method::ApproxGeneral, Method::Thm2BerryEsseen],
    }
}

/// One curve point. Both general-bound methods run the same search; the
/// row reports whether the exact or the normal-approximation bound was used.
pub fn curve_point(spec: &ChannelSpec64, method: Method, n: u64, eps: f64) -> permchan::Result<BoundPoint64> {
    let approx = |v: f64| BoundPoint::from_log2(n, Some(eps), v, method);
    match (method, spec) {
        (Method::Thm3Bsc, ChannelSpec64::Bsc { .. }) | (Method::Thm4Bec, ChannelSpec64::Bec { .. }) => {
            search_max_m(spec, n, eps)
        }
        (Method::Thm2Exact | Method::Thm2BerryEsseen, _) => {
            search_max_m(&ChannelSpec64::Matrix { w: spec.matrix()? }, n, eps)
        }
        (Method::ApproxBsc | Method::ApproxBscCeil, ChannelSpec64::Bsc { delta }) => {
            approx_bsc(*delta, n, eps, method == Method::ApproxBscCeil).map(approx)
        }
        (Method::ApproxBec | Method::ApproxBecCeil, ChannelSpec64::Bec { eta }) => {
            approx_bec(*eta, n, eps, method == Method::ApproxBecCeil).map(approx)
        }
        (Method::ApproxGeneral, _) => approx_general(&spec.matrix()?, n, eps).map(approx),
        _ => Err(permchan::Error::InvalidParameter(format!(
            "method {method} does not apply to this channel"
        ))),
    }
}

pub fn curve(a: &CurveArgs) -> Result<(), CliError> {
    let spec = resolve_channel(&a.channel)?;
    let grid = parse_n_grid(&a.n_grid)?;
    let allowed = methods_for(&spec);
    let methods: Vec<Method> = if a.methods.is_empty() {
        allowed[..2].to_vec()
    } else {
        let mut out = Vec::new();
        for s in &a.methods {
            let m: Method = s.parse().map_err(|e: permchan::Error| CliError::Usage(e.to_string()))?;
            if !allowed.contains(&m) {
                return Err(CliError::Usage(format!("method {m} does not apply to this channel")));
            }
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    };
    let cap = capacity(&spec)?;
    let jobs: Vec<(u64, Method)> = grid.iter().flat_map(|&n| methods.iter().map(move |&m| (n, m))).collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(n, m)| curve_point(&spec, m, n, a.eps))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&(n, m), r) in jobs.iter().zip(results) {
        match r {
            Ok(p) => rows.push(CurveRow::new(&p, cap)),
            Err(e) => failures.push(format!("n={n} {m}: {e}")),
        }
    }
    emit(&a.out, &rows)?;
    if failures.is_empty() {
        Ok(())
    } else {
        for f in &failures {
            eprintln!("permchan: {f}");
        }
        Err(CliError::Infeasible(format!("{} of {} curve points failed", failures.len(), jobs.len())))
    }
}

pub fn approx(a: &ApproxArgs) -> Result<(), CliError> {
    let spec = resolve_channel(&a.channel)?;
    let methods: &[Method] = match spec {
        ChannelSpec64::Bsc { .. } => &[Method::ApproxBsc, Method::ApproxBscCeil],
        ChannelSpec64::Bec { .. } => &[Method::ApproxBec, Method::ApproxBecCeil],
        ChannelSpec64::Matrix { .. } => &[Method::ApproxGeneral],
    };
    let cap = capacity(&spec)?;
    let rows = methods
        .iter()
        .map(|&m| curve_point(&spec, m, a.n, a.eps).map(|p| CurveRow::new(&p, cap)))
        .collect::<permchan::Result<Vec<_>>>()?;
    emit(&a.out, &rows)
}

const PACK_HEADER: [&str; 9] = [
    "k",
    "grid_n",
    "tv_radius",
    "r0",
    "exact_grid",
    "bracket_lower",
    "bracket_upper",
    "subspace_lower",
    "image_count",
];

#[derive(Serialize)]
struct PackRow {
    k: usize,
    grid_n: usize,
    tv_radius: f64,
    r0: f64,
    exact_grid: u128,
    bracket_lower: f64,
    bracket_upper: f64,
    subspace_lower: Option<f64>,
    image_count: Option<usize>,
}

pub fn pack(a: &PackArgs) -> Result<(), CliError> {
    let w = a.matrix_file.as_deref().map(read_matrix).transpose()?;
    let k = match (a.k, &w) {
        (Some(k), Some(w)) if k != w.output_size() => {
            return Err(CliError::Usage(format!("--k {k} disagrees with the {}-column matrix", w.output_size())))
        }
        (Some(k), _) => k,
        (None, Some(w)) => w.output_size(),
        (None, None) => return Err(CliError::Usage("--k is required without --matrix".into())),
    };
    if k < 2 {
        return Err(CliError::Usage(format!("--k must be at least 2, got {k}")));
    }
    let r = match (a.grid_n, a.r0) {
        (Some(0), _) => return Err(CliError::Usage("--grid-n must be at least 1".into())),
        (Some(g), _) => 1.0 / g as f64,
        (None, Some(r0)) if r0 > 0.0 && r0.is_finite() => tv_radius(r0),
        (None, Some(r0)) => return Err(CliError::Usage(format!("--r0 must be positive, got {r0}"))),
        (None, None) => unreachable!("clap requires --grid-n or --r0"),
    };
    let grid_n = grid_resolution(r)?;
    let counts = packing_count_bounds_for_radius(r, k)?;
    let lambda = match (&w, a.lambda) {
        (Some(w), _) => Some(w.require_full_rank_square()?),
        (None, Some(l)) => Some(l),
        (None, None) => None,
    };
    let subspace_lower = lambda
        .map(|l| packing_lower_bound_subspace_for_radius(r, k, l))
        .transpose()?;
    let image_count = match &w {
        Some(w) => Some(match build_dmc_message_set_with_grid(w, grid_n) {
            Ok(s) => s.len(),
            Err(permchan::Error::EmptyMessageSet { .. }) => 0,
            Err(e) => return Err(e.into()),
        }),
        None => None,
    };
    let row = PackRow {
        k,
        grid_n,
        tv_radius: r,
        r0: a.r0.unwrap_or_else(|| kl_radius(r)),
        exact_grid: counts.exact_grid,
        bracket_lower: counts.lower,
        bracket_upper: counts.upper,
        subspace_lower,
        image_count,
    };
    let mut sink = Sink::open(a.out.output.as_deref())?;
    match a.out.format {
        crate::args::Format::Csv => {
            let rec = vec![
                row.k.to_string(),
                row.grid_n.to_string(),
                g17(row.tv_radius),
                g17(row.r0),
                row.exact_grid.to_string(),
                g17(row.bracket_lower),
                g17(row.bracket_upper),
                row.subspace_lower.map(g17).unwrap_or_default(),
                row.image_count.map(|c| c.to_string()).unwrap_or_default(),
            ];
            write_csv(&mut sink, &PACK_HEADER, [rec])?;
        }
        crate::args::Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &row)?;
            sink.write_all(b"\n")?;
        }
    }
    Ok(sink.finish()?)
}

#[derive(Serialize)]
struct SimConfigEcho {
    channel: Value,
    n: u64,
    m: Option<usize>,
    grid_n: Option<usize>,
    code_size: usize,
    trials: u64,
    seed: u64,
    permute: bool,
    rng: &'static str,
    /// Matrix the transmissions actually pass through.
    simulated_channel: Vec<Vec<f64>>,
    bound_method: String,
}

#[derive(Serialize)]
struct SimOutput {
    config: SimConfigEcho,
    report: SimReport,
    analytic_bound: f64,
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let spec = resolve_channel(&a.channel)?;
    let is_matrix = matches!(spec, ChannelSpec64::Matrix { .. });
    if is_matrix && a.m.is_some() {
        return Err(CliError::Usage("use --grid-n, not --m, with a matrix channel".into()));
    }
    if !is_matrix && a.grid_n.is_some() {
        return Err(CliError::Usage("use --m, not --grid-n, with a binary channel".into()));
    }
    // An erasure resolved by a fair coin turns BEC(eta) into BSC(eta/2), and
    // both share the binary packing and its bound; the simulation runs the
    // resolved channel.
    let (channel, set, bound, method, echo) = match &spec {
        ChannelSpec64::Bsc { delta } => {
            let set = build_binary_message_set_by_size(*delta, *delta, a.m.unwrap_or(0))?;
            let bound = bsc_achievability(*delta, &set, a.n)?;
            (ChannelMatrix64::bsc(*delta)?, set, bound, Method::Thm3Bsc, json!({"kind": "bsc", "delta": delta}))
        }
        ChannelSpec64::Bec { eta } => {
            let m = a.m.unwrap_or(0);
            let d = eta / 2.0;
            let set = build_binary_message_set_by_size(d, d, m)?;
            let bound = if m < 2 { 0.0 } else { bec_achievability(*eta, m, a.n)? };
            (ChannelMatrix64::bsc(d)?, set, bound, Method::Thm4Bec, json!({"kind": "bec", "eta": eta}))
        }
        ChannelSpec64::Matrix { w } => {
            let set = build_dmc_message_set_with_grid(w, a.grid_n.unwrap_or(0))?;
            let (bound, exact) = achievability_general_or_normal(&set, a.n)?;
            let method = if exact { Method::Thm2Exact } else { Method::Thm2BerryEsseen };
            let file = a.channel.matrix_file.as_ref().map(|p| p.display().to_string());
            (w.clone(), set, bound, method, json!({"kind": "matrix", "file": file, "rows": w.to_dense()}))
        }
    };
    let cfg = SimConfig {
        channel,
        message_set: set,
        n: a.n,
        trials: a.trials,
        seed: a.seed,
        permute: !a.no_permute,
    };
    let report = run_trials(&cfg)?;
    let out = SimOutput {
        config: SimConfigEcho {
            channel: echo,
            n: a.n,
            m: a.m,
            grid_n: a.grid_n,
            code_size: cfg.message_set.len(),
            trials: a.trials,
            seed: a.seed,
            permute: cfg.permute,
            rng: RNG_ALGORITHM,
            simulated_channel: cfg.channel.to_dense(),
            bound_method: method.as_str().to_string(),
        },
        report,
        analytic_bound: bound,
    };
    let mut sink = Sink::open(a.output.as_deref())?;
    serde_json::to_writer_pretty(&mut sink, &out)?;
    sink.write_all(b"\n")?;
    Ok(sink.finish()?)
}
