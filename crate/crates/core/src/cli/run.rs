use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::json;

use super::config::{ExperimentConfig, Format};
use super::manifest::OutputSet;
use super::selftest::{run_suite, Check};
use crate::bounds::front_bounds;
use crate::error::{Error, Result};
use crate::feynman_kac::{moment_estimate, small_ball_mc, CI_Z};
use crate::front_lab::{compare_bounds, estimate_front_bracket, front_scan, refine_front_bracket, FrontInterval, Sign};
use crate::special_fn::{small_ball_asymptotic, small_ball_exact_1d};

pub type Counters = BTreeMap<String, u64>;

pub const MOMENT_HEADER: &str = "t,x_radius,p,lambda,value,stderr,log_value,n_rep,n_steps,seed,clip_events";
pub const FRONT_HEADER: &str = "t,rho,scale_kind,scale,radius,s_value,ci_low,ci_high,n_rep,clip_events,zero_mass";
pub const SMALL_BALL_HEADER: &str = "d,eps,n_steps,n_rep,seed,monitoring,p_hat,stderr,n_inside,exact_1d,asymptotic";

/// Shortest round-trip form; `inf`, `-inf` and `NaN` spelled out.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn pretty(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s.into_bytes()
}

pub fn bounds(cfg: &ExperimentConfig, out: &mut OutputSet, _counters: &mut Counters) -> Result<()> {
    let fb = front_bounds(&cfg.model, &cfg.gamma, &cfg.lambda_kernel, cfg.front.delta)?;
    if cfg.output.wants(Format::Json) {
        let doc = json!({
            "input": {
                "model": cfg.model,
                "gamma": cfg.gamma,
                "lambda": cfg.lambda_kernel,
                "delta": cfg.front.delta,
            },
            "bounds": fb,
        });
        out.write("bounds.json", &pretty(&doc))?;
    }
    if cfg.output.wants(Format::Csv) {
        let mut csv = String::from("name,value\n");
        if let serde_json::Value::Object(map) = serde_json::to_value(&fb).expect("bounds serialize") {
            for (k, v) in map {
                let cell = v.as_f64().map(num).unwrap_or_default();
                writeln!(csv, "{k},{cell}").unwrap();
            }
        }
        out.write("bounds.csv", csv.as_bytes())?;
    }
    Ok(())
}

pub fn moment(cfg: &ExperimentConfig, out: &mut OutputSet, counters: &mut Counters) -> Result<()> {
    cfg.validate_for_moments()?;
    let mut x = vec![0.0; cfg.model.d];
    x[0] = cfg.moment.x;
    let est = moment_estimate(&cfg.model, &cfg.gamma, &cfg.lambda_kernel, cfg.moment.t, &x, &cfg.mc)?;
    counters.insert("clip_events".into(), est.clip_events);
    counters.insert("replicas".into(), if est.exact { 0 } else { est.n_rep });
    if cfg.output.wants(Format::Csv) {
        let row = [
            num(est.t),
            num(cfg.moment.x.abs()),
            est.p.to_string(),
            num(est.lambda),
            num(est.value),
            num(est.stderr),
            num(est.log_value),
            est.n_rep.to_string(),
            est.n_steps.to_string(),
            est.seed.to_string(),
            est.clip_events.to_string(),
        ]
        .join(",");
        out.write("moment.csv", format!("{MOMENT_HEADER}\n{row}\n").as_bytes())?;
    }
    if cfg.output.wants(Format::Json) {
        let (lo, hi) = est.log_ci(CI_Z);
        let doc = json!({ "estimate": est, "log_ci": [lo, hi], "ci_z": CI_Z });
        out.write("moment.json", &pretty(&doc))?;
    }
    Ok(())
}

pub fn front(cfg: &ExperimentConfig, out: &mut OutputSet, counters: &mut Counters) -> Result<()> {
    cfg.validate_for_moments()?;
    let fm = cfg.front_model();
    let kind = cfg.front.scale;
    let scan = front_scan(&fm, &cfg.front.rho_grid, &cfg.front.t_grid, kind, &cfg.mc)?;

    let (bracket, note) = match estimate_front_bracket(&scan) {
        Ok(b) => (Some(refine_front_bracket(&fm, &scan, b, cfg.front.refine_steps)?), None),
        Err(Error::NoBracket(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    let interval = bracket.map(FrontInterval::from).unwrap_or_else(|| FrontInterval::from_scan(&scan));
    let (fb, bounds_note) = match front_bounds(&cfg.model, &cfg.gamma, &cfg.lambda_kernel, cfg.front.delta) {
        Ok(fb) => (Some(fb), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let comparisons = fb
        .as_ref()
        .map(|fb| compare_bounds(interval, fb, kind, cfg.front.slack))
        .unwrap_or_default();

    let n_rho = scan.rho_grid.len();
    let clip: u64 = scan.rows.iter().step_by(n_rho).map(|r| r.clip_events).sum();
    counters.insert("clip_events".into(), clip);
    counters.insert("replicas".into(), scan.t_grid.len() as u64 * cfg.mc.n_rep);
    counters.insert("zero_mass_points".into(), scan.rows.iter().filter(|r| r.zero_mass).count() as u64);
    for (name, sign) in [("positive", Sign::Positive), ("negative", Sign::Negative), ("undecided", Sign::Undecided)] {
        counters.insert(name.into(), scan.verdicts.iter().filter(|v| v.sign == sign).count() as u64);
    }

    if cfg.output.wants(Format::Csv) {
        let mut csv = format!("{FRONT_HEADER}\n");
        for r in &scan.rows {
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{},{}",
                num(r.t),
                num(r.rho),
                r.scale_kind.as_str(),
                num(r.scale),
                num(r.radius),
                num(r.s_value),
                num(r.ci_low),
                num(r.ci_high),
                r.n_rep,
                r.clip_events,
                r.zero_mass
            )
            .unwrap();
        }
        out.write("front.csv", csv.as_bytes())?;
    }
    if cfg.output.wants(Format::Json) {
        let doc = json!({
            "scale": kind,
            "bracket": bracket,
            "bracket_note": note,
            "interval": { "lo": num(interval.lo), "hi": num(interval.hi) },
            "verdicts": scan.verdicts,
            "bounds": fb,
            "bounds_note": bounds_note,
            "comparisons": comparisons,
            "slack": cfg.front.slack,
        });
        out.write("front_summary.json", &pretty(&doc))?;
    }
    Ok(())
}

pub fn small_ball(cfg: &ExperimentConfig, out: &mut OutputSet, counters: &mut Counters) -> Result<()> {
    let sb = &cfg.small_ball;
    let r = small_ball_mc(sb.d, sb.eps, sb.n_steps, sb.n_rep, cfg.mc.seed, sb.monitoring)?;
    let exact = if sb.d == 1 { Some(small_ball_exact_1d(sb.eps)?) } else { None };
    let asym = small_ball_asymptotic((sb.d as f64 - 2.0) / 2.0, sb.eps)?;
    counters.insert("replicas".into(), sb.n_rep);
    counters.insert("inside".into(), r.n_inside);
    let monitoring = match sb.monitoring {
        crate::feynman_kac::Monitoring::Grid => "grid",
        crate::feynman_kac::Monitoring::BridgeKill => "bridge_kill",
    };
    if cfg.output.wants(Format::Csv) {
        let row = [
            sb.d.to_string(),
            num(sb.eps),
            sb.n_steps.to_string(),
            sb.n_rep.to_string(),
            cfg.mc.seed.to_string(),
            monitoring.to_string(),
            num(r.p_hat),
            num(r.stderr),
            r.n_inside.to_string(),
            exact.map(num).unwrap_or_default(),
            num(asym),
        ]
        .join(",");
        out.write("smallball.csv", format!("{SMALL_BALL_HEADER}\n{row}\n").as_bytes())?;
    }
    if cfg.output.wants(Format::Json) {
        let doc = json!({ "input": sb, "seed": cfg.mc.seed, "estimate": r, "exact_1d": exact, "asymptotic": asym });
        out.write("smallball.json", &pretty(&doc))?;
    }
    Ok(())
}

/// Writes the oracle report and returns whether every check passed.
pub fn selftest(cfg: &ExperimentConfig, out: &mut OutputSet, counters: &mut Counters) -> Result<bool> {
    let checks: Vec<Check> = run_suite(cfg.mc.seed);
    let failed = checks.iter().filter(|c| !c.pass).count() as u64;
    counters.insert("checks".into(), checks.len() as u64);
    counters.insert("failed".into(), failed);
    for c in &checks {
        let mark = if c.pass { "ok  " } else { "FAIL" };
        let note = c.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default();
        println!("{mark} {}: {} vs {} [{} {}]{note}", c.name, num(c.value), num(c.expected), c.kind, num(c.tolerance));
    }
    if cfg.output.wants(Format::Json) {
        out.write("selftest.json", &pretty(&json!({ "checks": checks, "failed": failed })))?;
    }
    if cfg.output.wants(Format::Csv) {
        let mut csv = String::from("name,value,expected,tolerance,kind,pass\n");
        for c in &checks {
            writeln!(
                csv,
                "\"{}\",{},{},{},{},{}",
                c.name.replace('"', "'"),
                num(c.value),
                num(c.expected),
                num(c.tolerance),
                c.kind,
                c.pass
            )
            .unwrap();
        }
        out.write("selftest.csv", csv.as_bytes())?;
    }
    Ok(failed == 0)
}
