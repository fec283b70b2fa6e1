// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs::File;
use std::io::{BufReader, Write};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use cpwalk_core::fmt::sig9;
use cpwalk_core::ingest::{daily_w_series, orient_chronologically, read_minute_bars};
use cpwalk_core::simulation::{parametric_bootstrap_risk, scatter_cloud};
use cpwalk_core::{
    detect, monte_carlo_risk, DetectConfig, RiskReport, ScenarioConfig, ScoreKind, Series,
};
use serde_json::{json, Value};

use crate::args::{
    BootstrapArgs, Cli, Command, DetectArgs, Format, IngestArgs, MonteCarlo, ScatterArgs, Score,
    SimulateArgs, TableArgs, Which,
};
use crate::input::read_series;
use crate::output::{num, sink, write_csv, write_json};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Table(a) => cmd_table(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Scatter(a) => cmd_scatter(a),
        Command::Bootstrap(a) => cmd_bootstrap(a),
    }
}

fn cmd_detect(a: DetectArgs) -> Result<()> {
    let input = read_series(&a.input, a.year)?;
    let series = Series::new(input.values, a.sigma)?;
    let kind = ScoreKind::from(a.score);
    let det = detect(&series, &DetectConfig::with_score(kind))?;
    let e = &det.estimate;
    let u = e.u_hat.coords();
    let value = json!({
        "r_mle": e.r_mle,
        "r_hat": e.r_hat,
        "delta_mle": num(e.delta_mle),
        "delta_hat": num(e.delta_hat),
        "t_hat": num(e.t_hat),
        "theta_hat": num(e.theta_hat),
        "u_hat": [num(u[0]), num(u[1]), num(u[2])],
        "pi0": num(e.pi0),
        "sigma_used": num(det.sigma_used),
        "score_kind": det.score_kind.as_str(),
        "n": e.n,
        "config": {
            "command": "detect",
            "input": a.input.display().to_string(),
            "year": a.year,
            "span": input.span.map(|(a, b)| [a, b]),
            "sigma": a.sigma.map(num),
            "score": kind.as_str(),
        },
    });
    write_json(&mut *sink(a.output.as_deref())?, value)
}

fn scenario(
    n: usize,
    r: usize,
    delta: f64,
    baseline: Score,
    score: Score,
    mc: &MonteCarlo,
    known: bool,
) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::new(n, r, delta, mc.replicates, mc.seed)
        .with_scores(baseline.into(), score.into())
        .with_workers(mc.workers);
    cfg.sigma = mc.sigma;
    cfg.known_sigma = known;
    cfg.validate()?;
    Ok(cfg)
}

/// Resolved Monte Carlo settings; the worker count is left out because
/// results do not depend on it.
fn mc_config(mc: &MonteCarlo, known: bool) -> Value {
    json!({
        "replicates": mc.replicates,
        "seed": mc.seed,
        "sigma": mc.sigma,
        "known_sigma": known,
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

const REPORT_COLUMNS: [&str; 16] = [
    "n",
    "r",
    "delta",
    "sigma",
    "replicates",
    "seed",
    "baseline",
    "score",
    "known_sigma",
    "mean_loss_mle",
    "mean_loss_proposed",
    "se_loss_mle",
    "se_loss_proposed",
    "relative_efficiency",
    "zero_rate",
    "rejections",
];

fn report_row(cfg: &ScenarioConfig, rep: &RiskReport) -> Vec<String> {
    vec![
        cfg.n.to_string(),
        cfg.r.to_string(),
        sig9(cfg.delta),
        sig9(cfg.sigma),
        cfg.replicates.to_string(),
        cfg.seed.to_string(),
        cfg.baseline.as_str().to_string(),
        cfg.estimator.as_str().to_string(),
        cfg.known_sigma.to_string(),
        sig9(rep.mean_loss_mle),
        sig9(rep.mean_loss_proposed),
        sig9(rep.se_loss_mle),
        sig9(rep.se_loss_proposed),
        sig9(rep.relative_efficiency),
        sig9(rep.zero_rate),
        rep.rejections.to_string(),
    ]
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let baseline = a.baseline.unwrap_or(a.score);
    let known = a.mc.resolve_known(true);
    let mut runs = Vec::new();
    for &n in &a.n {
        for &r in &a.r {
            for &delta in &a.delta {
                let cfg = scenario(n, r, delta, baseline, a.score, &a.mc, known)?;
                let report = monte_carlo_risk(&cfg)?;
                runs.push((cfg, report));
            }
        }
    }
    let config = merge(
        json!({
            "command": "simulate",
            "n": a.n,
            "r": a.r,
            "delta": a.delta,
            "baseline": ScoreKind::from(baseline).as_str(),
            "score": ScoreKind::from(a.score).as_str(),
        }),
        mc_config(&a.mc, known),
    );
    let mut out = sink(a.output.as_deref())?;
    match a.format {
        Format::Csv => {
            let rows: Vec<_> = runs.iter().map(|(c, r)| report_row(c, r)).collect();
            write_csv(&mut *out, config, &REPORT_COLUMNS, &rows)
        }
        Format::Json => {
            let reports = runs
                .iter()
                .map(|(c, r)| {
                    let mut v = serde_json::to_value(r)?;
                    v["config"]["known_sigma"] = json!(c.known_sigma);
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            write_json(&mut *out, json!({ "config": config, "reports": reports }))
        }
    }
}

fn cmd_table(a: TableArgs) -> Result<()> {
    let (baseline, default_score, default_deltas) = match a.which {
        Which::Cusum => (Score::Cusum, Score::Cusum, vec![0.5, 0.9]),
        Which::SelfNormalized => (Score::Sn, Score::Likelihood, vec![0.25, 0.35]),
    };
    let score = a.score.unwrap_or(default_score);
    let known = a.mc.resolve_known(a.which == Which::Cusum);
    let deltas = if a.delta.is_empty() {
        default_deltas
    } else {
        a.delta.clone()
    };
    let points: Vec<usize> = if a.r.is_empty() {
        (1..=5).map(|k| k * a.n / 6).collect()
    } else {
        a.r.clone()
    };

    let mut rows = Vec::new();
    for &delta in &deltas {
        for &r in &points {
            let cfg = scenario(a.n, r, delta, baseline, score, &a.mc, known)?;
            let rep = monte_carlo_risk(&cfg)?;
            // ratio from the printed values so the columns agree exactly
            let b: f64 = sig9(rep.mean_loss_mle).parse()?;
            let p: f64 = sig9(rep.mean_loss_proposed).parse()?;
            let ratio = if b > 0.0 { p / b } else { f64::NAN };
            rows.push((delta, r, b, p, ratio, rep.se_loss_mle, rep.se_loss_proposed));
        }
    }

    let config = merge(
        json!({
            "command": "table",
            "which": match a.which { Which::Cusum => "cusum", Which::SelfNormalized => "self-normalized" },
            "n": a.n,
            "change_points": points,
            "delta": deltas,
            "baseline": ScoreKind::from(baseline).as_str(),
            "score": ScoreKind::from(score).as_str(),
        }),
        mc_config(&a.mc, known),
    );
    let mut out = sink(a.output.as_deref())?;
    match a.format {
        Format::Csv => {
            let header = [
                "delta",
                "change_point",
                "baseline_error",
                "proposed_error",
                "ratio",
                "se_baseline",
                "se_proposed",
            ];
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|&(d, r, b, p, q, sb, sp)| {
                    vec![
                        sig9(d),
                        r.to_string(),
                        sig9(b),
                        sig9(p),
                        sig9(q),
                        sig9(sb),
                        sig9(sp),
                    ]
                })
                .collect();
            write_csv(&mut *out, config, &header, &rows)
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|&(d, r, b, p, q, sb, sp)| {
                    json!({
                        "delta": d,
                        "change_point": r,
                        "baseline_error": b,
                        "proposed_error": p,
                        "ratio": q,
                        "se_baseline": sb,
                        "se_proposed": sp,
                    })
                })
                .collect();
            write_json(&mut *out, json!({ "config": config, "rows": rows }))
        }
    }
}

fn cmd_ingest(a: IngestArgs) -> Result<()> {
    let file = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let mut bars = read_minute_bars(BufReader::new(file))?;
    orient_chronologically(&mut bars);
    let range = match a.year {
        Some(y) => {
            let from = NaiveDate::from_ymd_opt(y, 1, 1).context("year out of range")?;
            let to = NaiveDate::from_ymd_opt(y, 12, 31).context("year out of range")?;
            Some((from, to))
        }
        None => None,
    };
    let series = daily_w_series(&bars, range)?;
    if series.days.is_empty() {
        bail!("empty slice");
    }
    eprintln!(
        "cpwalk: {} days written, {} dropped (flat), {} with open/close fallback",
        series.days.len(),
        series.dropped(),
        series.flagged()
    );
    if let Some(path) = &a.quality {
        let mut out = sink(Some(path))?;
        writeln!(out, "date,minutes,open_fallback,close_fallback,dropped")?;
        for q in &series.quality {
            writeln!(
                out,
                "{},{},{},{},{}",
                q.date, q.minutes, q.open_fallback, q.close_fallback, q.dropped
            )?;
        }
        out.flush()?;
    }
    series.write_csv(sink(a.output.as_deref())?)?;
    Ok(())
}

fn cmd_scatter(a: ScatterArgs) -> Result<()> {
    let baseline = a.baseline.unwrap_or(a.score);
    let known = a.mc.resolve_known(true);
    let cfg = scenario(a.n, a.r, a.delta, baseline, a.score, &a.mc, known)?;
    let cloud = scatter_cloud(&cfg)?;
    let mut rows = Vec::with_capacity(2 * cloud.len());
    for (mle, proposed) in &cloud {
        for (name, p) in [("mle", mle), ("proposed", proposed)] {
            let u = p.coords();
            rows.push(vec![name.to_string(), sig9(u[0]), sig9(u[1]), sig9(u[2])]);
        }
    }
    let config = merge(
        json!({
            "command": "scatter",
            "n": a.n,
            "r": a.r,
            "delta": a.delta,
            "baseline": ScoreKind::from(baseline).as_str(),
            "score": ScoreKind::from(a.score).as_str(),
        }),
        mc_config(&a.mc, known),
    );
    write_csv(
        &mut *sink(a.output.as_deref())?,
        config,
        &["estimator", "u1", "u2", "u3"],
        &rows,
    )
}

fn cmd_bootstrap(a: BootstrapArgs) -> Result<()> {
    let input = read_series(&a.input, a.year)?;
    let series = Series::unscaled(input.values)?;
    let det = detect(&series, &DetectConfig::default())?;
    let risk = parametric_bootstrap_risk(&series, a.replicates, a.seed, a.workers)?;
    let value = json!({
        "r_mle": det.estimate.r_mle,
        "r_hat": det.estimate.r_hat,
        "mle_fit": risk.mle_fit,
        "proposed_fit": risk.proposed_fit,
        "risk_mle": risk.risk_mle,
        "risk_proposed": risk.risk_proposed,
        "se_mle": risk.se_mle,
        "se_proposed": risk.se_proposed,
        "config": {
            "command": "bootstrap",
            "input": a.input.display().to_string(),
            "year": a.year,
            "span": input.span.map(|(a, b)| [a, b]),
            "replicates": a.replicates,
            "seed": a.seed,
        },
    });
    write_json(&mut *sink(a.output.as_deref())?, value)
}
