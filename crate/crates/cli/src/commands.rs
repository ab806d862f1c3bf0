use std::fs;

use anyhow::{anyhow, bail, Context};
use henon_core::exact_poly::{parse_rational, rational_to_f64};
use henon_core::par;
use henon_core::resonance::{continue_argument, converge_resonance_with, ConvergeOptions, Resonance};
use henon_core::resummation::{
    borel_transform, default_orders, distributional_sum_pade, pade_fit, LeroyOrder, PadeApproximant, QuadConfig,
};
use henon_core::rspe::{growth_diagnostics, reindex_to_g, rspe_generate, SeriesFile};
use henon_core::verify::{run_suite, VerifyOptions};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Precision, ResonanceConfig, ResumConfig, RspeConfig, RunConfig, VerifyConfig};
use crate::output::Output;
use crate::Failure;

/// Whether every numerical step succeeded.
pub type Status = Result<bool, Failure>;

pub fn run(config: &RunConfig) -> Status {
    match config {
        RunConfig::Rspe(c) => rspe(config, c),
        RunConfig::Resonance(c) => resonance(config, c),
        RunConfig::Resum(c) => resum(config, c),
        RunConfig::Verify(c) => verify(config, c),
    }
}

#[derive(Serialize)]
struct CoeffRow {
    series: &'static str,
    n: usize,
    exact: String,
    value: f64,
}

fn rspe(config: &RunConfig, c: &RspeConfig) -> Status {
    let series = rspe_generate(c.orders).map_err(Failure::numerical)?;
    let file = SeriesFile::from_series(&series).map_err(Failure::numerical)?;
    let g = reindex_to_g(&series.a).map_err(Failure::numerical)?;
    let growth = growth_diagnostics(&g).ok();

    let mut rows = Vec::new();
    for (n, (s, a)) in file.beta_coeffs.iter().zip(&series.a).enumerate() {
        rows.push(CoeffRow { series: "beta", n, exact: s.clone(), value: rational_to_f64(a) });
    }
    for (n, (s, a)) in file.g_coeffs.iter().zip(&g.coeffs).enumerate() {
        rows.push(CoeffRow { series: "g", n, exact: s.clone(), value: rational_to_f64(a) });
    }

    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        series: &'a SeriesFile,
        growth: Option<henon_core::rspe::GrowthReport>,
    }
    let mut out = Output::new(config).map_err(Failure::usage)?;
    out.config_file("rspe").map_err(Failure::usage)?;
    out.json("rspe", &Doc { series: &file, growth }).map_err(Failure::usage)?;
    out.csv("rspe", &rows).map_err(Failure::usage)?;
    let shown = file.beta_coeffs.iter().take(5).cloned().collect::<Vec<_>>().join(", ");
    println!("beta orders 0..={}: {shown}{}", c.orders, if c.orders > 4 { ", ..." } else { "" });
    report_written(&out);
    Ok(true)
}

#[derive(Serialize)]
struct ResonanceRow {
    beta: f64,
    #[serde(rename = "re_E")]
    re_e: Option<f64>,
    #[serde(rename = "im_E")]
    im_e: Option<f64>,
    est_error: Option<f64>,
    n_max: Option<usize>,
    im_theta: Option<f64>,
    theta_sensitivity: Option<f64>,
    converged: bool,
    #[serde(rename = "re_E_mp")]
    re_mp: Option<String>,
    #[serde(rename = "im_E_mp")]
    im_mp: Option<String>,
    error: Option<String>,
}

fn resonance_row(beta: f64, c: &ResonanceConfig) -> ResonanceRow {
    let mut opts = match c.theta {
        Some(t) => ConvergeOptions::fixed_t(t),
        None => ConvergeOptions::default(),
    };
    opts.n_budget = c.n_max;
    opts.scan_n_max = opts.scan_n_max.min(c.n_max);
    opts.n_start = opts.n_start.min(c.n_max);
    let mut row = ResonanceRow {
        beta,
        re_e: None,
        im_e: None,
        est_error: None,
        n_max: None,
        im_theta: None,
        theta_sensitivity: None,
        converged: false,
        re_mp: None,
        im_mp: None,
        error: None,
    };
    let r: Resonance = match converge_resonance_with(Complex64::new(beta, 0.0), c.tol, &opts) {
        Ok(r) => r,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.re_e = Some(r.value.re);
    row.im_e = Some(r.value.im);
    row.est_error = Some(r.est_error);
    row.n_max = Some(r.n_max);
    row.im_theta = Some(r.theta.im);
    row.theta_sensitivity = Some(r.theta_sensitivity);
    row.converged = true;
    if c.precision == Precision::Mp && beta != 0.0 {
        match refine(&r) {
            Ok((re, im)) => {
                row.re_mp = Some(re);
                row.im_mp = Some(im);
            }
            Err(e) => {
                row.converged = false;
                row.error = Some(e);
            }
        }
    }
    row
}

#[cfg(feature = "multiprecision")]
fn refine(r: &Resonance) -> Result<(String, String), String> {
    use henon_core::resonance::precise::{refine_resonance, PreciseOptions};
    use henon_core::scaled_hamiltonian::ScalingParams;
    let params = ScalingParams::new(r.beta, r.theta).map_err(|e| e.to_string())?;
    refine_resonance(params, r.value, &PreciseOptions::default())
        .map(|p| (p.re, p.im))
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "multiprecision"))]
fn refine(_: &Resonance) -> Result<(String, String), String> {
    Err("built without the multiprecision feature".into())
}

fn resonance(config: &RunConfig, c: &ResonanceConfig) -> Status {
    let rows = par::map_slice(&c.beta, |&b| resonance_row(b, c));
    let mut ok = rows.iter().all(|r| r.converged);
    let mut out = Output::new(config).map_err(Failure::usage)?;
    out.config_file("resonance").map_err(Failure::usage)?;
    out.json("resonance", &serde_json::json!({ "rows": &rows })).map_err(Failure::usage)?;
    out.csv("resonance", &rows).map_err(Failure::usage)?;
    for r in &rows {
        match (r.re_e, r.im_e) {
            (Some(re), Some(im)) => println!(
                "beta {:>8}: E = {re:.15} {im:+.3e}i  (N_max {}, est {:.1e})",
                r.beta,
                r.n_max.unwrap_or(0),
                r.est_error.unwrap_or(0.0)
            ),
            _ => println!("beta {:>8}: FAILED {}", r.beta, r.error.as_deref().unwrap_or("")),
        }
        if let (Some(re), Some(im)) = (&r.re_mp, &r.im_mp) {
            println!("           multiprecision: {re} {im}i");
        }
    }
    if let Some(rho) = c.continuation_rho {
        match continue_argument(rho, c.continuation_steps) {
            Ok(track) => {
                println!(
                    "continuation rho {rho}: |E(pi) - conj E(0)| = {:.3e}, max chord deviation {:.3e}",
                    track.endpoint_error, track.max_chord_deviation
                );
                out.json("continuation", &track).map_err(Failure::usage)?;
                out.csv("continuation", &track.points).map_err(Failure::usage)?;
            }
            Err(e) => {
                println!("continuation rho {rho}: FAILED {e}");
                out.json("continuation", &serde_json::json!({ "rho": rho, "error": e.to_string() }))
                    .map_err(Failure::usage)?;
                ok = false;
            }
        }
    }
    report_written(&out);
    Ok(ok)
}

/// Accepts the document written by `rspe` or a bare JSON array of rationals.
fn read_coefficients(c: &ResumConfig) -> anyhow::Result<Vec<BigRational>> {
    let path = &c.coeffs;
    let text = fs::read_to_string(path).with_context(|| format!("reading coefficient file {}", path.display()))?;
    let doc: Value = serde_json::from_str(&text).with_context(|| format!("parsing coefficient file {}", path.display()))?;
    let list = match &doc {
        Value::Array(a) => a.clone(),
        Value::Object(o) => match o.get("beta_coeffs") {
            Some(Value::Array(a)) => a.clone(),
            _ => bail!("{} has no beta_coeffs array", path.display()),
        },
        _ => bail!("{} holds neither an array nor an object", path.display()),
    };
    if list.is_empty() {
        bail!("{} holds no coefficients", path.display());
    }
    list.iter()
        .enumerate()
        .map(|(i, v)| {
            let s = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) if n.is_i64() => n.to_string(),
                other => bail!("coefficient {i} in {} is not a rational: {other}", path.display()),
            };
            parse_rational(&s).map_err(|e| anyhow!("coefficient {i} in {}: {e}", path.display()))
        })
        .collect()
}

#[derive(Serialize)]
struct ResumRow {
    beta: f64,
    /// Point the Borel–Leroy integral is evaluated at: β for q = 1/2, β² for q = 1.
    variable: f64,
    f: Option<f64>,
    re_phi: Option<f64>,
    im_phi: Option<f64>,
    abs_d: Option<f64>,
    err_quad: Option<f64>,
    err_pade: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct PoleRow {
    re_t: f64,
    im_t: f64,
    re_residue: f64,
    im_residue: f64,
    modulus: f64,
    real: bool,
    on_path: bool,
}

fn resum(config: &RunConfig, c: &ResumConfig) -> Status {
    let beta_series = read_coefficients(c).map_err(Failure::usage)?;
    let (series, step) = match c.q {
        LeroyOrder::Half => (beta_series, 2),
        LeroyOrder::One => (
            reindex_to_g(&beta_series)
                .map_err(|e| Failure::usage(anyhow!("q = 1 needs an even series: {e}")))?
                .coeffs,
            1,
        ),
    };
    let default_terms = match c.q {
        LeroyOrder::Half => 39,
        LeroyOrder::One => 20,
    };
    let terms = c.terms.unwrap_or(default_terms).min(series.len());
    let coeffs = &series[..terms];
    // for q = 1/2 the defaults mirror the near-diagonal fit in g = β²
    let (l, m) = match (c.l, c.m, c.q) {
        (Some(l), Some(m), _) => (l, m),
        (_, _, LeroyOrder::Half) => {
            let (l, m) = default_orders(terms.div_ceil(2));
            (2 * l, 2 * m)
        }
        (_, _, LeroyOrder::One) => default_orders(terms),
    };
    let cfg = QuadConfig { tol: c.tol, ..QuadConfig::default() };
    let fit = |l, m| borel_transform(coeffs, c.q).and_then(|b| pade_fit(&b, l, m));
    let pade = fit(l, m);
    // Padé error: distance to the next-lower near-diagonal order
    let lower = (l >= step && m >= step).then(|| fit(l - step, m - step).ok()).flatten();

    let rows: Vec<ResumRow> = par::map_slice(&c.beta, |&beta| {
        let variable = match c.q {
            LeroyOrder::Half => beta,
            LeroyOrder::One => beta * beta,
        };
        let mut row = ResumRow {
            beta,
            variable,
            f: None,
            re_phi: None,
            im_phi: None,
            abs_d: None,
            err_quad: None,
            err_pade: None,
            error: None,
        };
        let p: &PadeApproximant = match &pade {
            Ok(p) => p,
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        };
        match distributional_sum_pade(p, variable, c.q, &cfg) {
            Ok(s) => {
                row.f = Some(s.f);
                row.re_phi = Some(s.phi_upper.re);
                row.im_phi = Some(s.phi_upper.im);
                row.abs_d = Some(s.d.norm());
                row.err_quad = Some(s.quad_error + s.tail_bound);
                row.err_pade = lower
                    .as_ref()
                    .and_then(|q| distributional_sum_pade(q, variable, c.q, &cfg).ok())
                    .map(|n| (n.f - s.f).abs());
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    });

    let poles: Vec<PoleRow> = match &pade {
        Ok(p) => p
            .poles
            .iter()
            .map(|pl| PoleRow {
                re_t: pl.t.re,
                im_t: pl.t.im,
                re_residue: pl.residue.re,
                im_residue: pl.residue.im,
                modulus: pl.t.norm(),
                real: pl.is_real(),
                on_path: pl.is_real() && pl.t.re > 0.0,
            })
            .collect(),
        Err(_) => Vec::new(),
    };

    let mut out = Output::new(config).map_err(Failure::usage)?;
    out.config_file("resum").map_err(Failure::usage)?;
    out.json(
        "resum",
        &serde_json::json!({ "l": l, "m": m, "terms": terms, "pade_error": pade.as_ref().err().map(|e| e.to_string()), "rows": &rows }),
    )
    .map_err(Failure::usage)?;
    out.csv("resum", &rows).map_err(Failure::usage)?;
    out.json("poles", &serde_json::json!({ "l": l, "m": m, "q": c.q, "poles": &poles })).map_err(Failure::usage)?;
    out.csv("poles", &poles).map_err(Failure::usage)?;

    println!("[{l}/{m}] Pade, q = {}, {terms} coefficients", c.q);
    for r in &rows {
        match (r.f, r.abs_d) {
            (Some(f), Some(d)) => println!("beta {:>8}: f = {f:.15}  |d| = {d:.4e}", r.beta),
            _ => println!("beta {:>8}: FAILED {}", r.beta, r.error.as_deref().unwrap_or("")),
        }
    }
    report_written(&out);
    Ok(rows.iter().all(|r| r.error.is_none()))
}

fn verify(config: &RunConfig, c: &VerifyConfig) -> Status {
    let report = run_suite(VerifyOptions {
        suite: c.suite,
        seed: c.seed,
        mutate_a2: c.mutate_a2,
    });
    let mut out = Output::new(config).map_err(Failure::usage)?;
    out.config_file("verify").map_err(Failure::usage)?;
    out.json("verify", &report).map_err(Failure::usage)?;
    out.csv("verify", &report.checks).map_err(Failure::usage)?;
    print!("{}", report.summary());
    report_written(&out);
    Ok(report.all_passed)
}

fn report_written(out: &Output) {
    for p in &out.written {
        eprintln!("wrote {}", p.display());
    }
}
