//! Subcommand implementations. Each returns the rendered report; nothing
//! here prints to standard output.

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use ladder_core::genfun::{coeff_tables, coeff_tables_upto};
use ladder_core::kernel::{drift_report, oracle_residuals, KernelFamily};
use ladder_core::quadrature::Quadrature;
use ladder_core::recurrence::recur_tables_upto;
use ladder_core::report::{fmt_f64, json_f64, json_report};
use ladder_core::simulate::{chi_closed_form, clt_check, rate_check, stationary_moments};
use ladder_core::specfun::{check, standard_cases};
use ladder_core::variance::{sigma2_kernel, sigma2_simulation, KernelVarianceConfig};

use crate::{Cli, Command, Engine, Format, Outcome};

/// Evenly spaced points `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        (0..self.count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected lo:hi:count".into());
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("hi: {e}"))?;
    let count: usize = parts[2].parse().map_err(|e| format!("count: {e}"))?;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo || count == 0 || count > 100_000 {
        return Err("need finite lo <= hi and 1 <= count <= 100000".into());
    }
    Ok(Grid { lo, hi, count })
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn json_text(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn progress(msg: &str) {
    eprintln!("ladder: {msg}");
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let fmt = cli.common.format;
    let seed = cli.common.seed;
    match &cli.command {
        Command::Coeffs { n, engine } => coeffs(*n as usize, *engine, fmt),
        Command::VerifyEngines { n_max } => verify_engines(*n_max as usize, fmt),
        Command::Kernel {
            n,
            r_prev_grid,
            r_grid,
            oracles,
        } => {
            if *oracles {
                kernel_oracles(*n as usize, fmt)
            } else {
                kernel_grid(*n as usize, r_prev_grid, r_grid, fmt)
            }
        }
        Command::Identities { k } => identities(*k as usize, fmt),
        Command::Rate {
            n,
            replicates,
            stationary_samples,
        } => rate(*n as usize, *replicates as usize, *stationary_samples as usize, seed, fmt),
        Command::Clt { n, replicates } => clt(*n as usize, *replicates as usize, seed, fmt),
        Command::Variance {
            n_max,
            mc_outer,
            steps,
            burn_in,
            batch_size,
        } => variance(
            *n_max as usize,
            *mc_outer as usize,
            *steps as usize,
            *burn_in as usize,
            *batch_size as usize,
            seed,
            fmt,
        ),
        Command::Drift { half_width, step } => drift(*half_width, *step, fmt),
    }
}

fn coeffs(n: usize, engine: Engine, fmt: Format) -> Result<Outcome> {
    let t = match engine {
        Engine::Genfun => coeff_tables(n)?,
        Engine::Recurrence => recur_tables_upto(n)?.pop().context("no tables")?,
    };
    let text = match fmt {
        Format::Csv => {
            let mut buf = Vec::new();
            t.write_csv(&mut buf)?;
            String::from_utf8(buf)?
        }
        Format::Json => json_text(&t.to_json())?,
    };
    Ok(Outcome { text, passed: true })
}

fn verify_engines(n_max: usize, fmt: Format) -> Result<Outcome> {
    progress(&format!("building tables through n = {n_max} with both engines"));
    let gf = coeff_tables_upto(n_max)?;
    let rec = recur_tables_upto(n_max)?;
    let mut diffs = Vec::new();
    let mut d_mismatch = Vec::new();
    for (g, r) in gf.iter().zip(&rec) {
        diffs.extend(g.diff(r));
        if g.d != r.d {
            d_mismatch.push(g.n);
        }
    }
    let passed = diffs.is_empty() && d_mismatch.is_empty();
    let text = match fmt {
        Format::Csv => csv_text(
            &["n", "table", "p", "q", "genfun", "recurrence"],
            diffs.iter().map(|d| {
                vec![
                    d.n.to_string(),
                    d.table.as_str().into(),
                    d.p.to_string(),
                    d.q.to_string(),
                    d.left.clone(),
                    d.right.clone(),
                ]
            }),
        )?,
        Format::Json => json_text(&json_report([
            ("n_max", n_max.into()),
            ("equal", passed.into()),
            ("beta_assertion_fired", false.into()),
            ("mismatches", serde_json::to_value(&diffs)?),
            ("d_mismatch_levels", d_mismatch.into()),
        ]))?,
    };
    Ok(Outcome { text, passed })
}

fn kernel_grid(n: usize, rp: &Grid, r: &Grid, fmt: Format) -> Result<Outcome> {
    let family = KernelFamily::upto(n)?;
    let rows = family.density(n)?.grid(&rp.points(), &r.points());
    let text = match fmt {
        Format::Csv => csv_text(
            &["r_prev", "r", "value"],
            rows.iter().map(|(a, b, v)| vec![fmt_f64(*a), fmt_f64(*b), fmt_f64(*v)]),
        )?,
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(a, b, v)| json!({"r_prev": json_f64(*a), "r": json_f64(*b), "value": json_f64(*v)}))
                .collect();
            json_text(&json_report([("n", n.into()), ("density", rows.into())]))?
        }
    };
    Ok(Outcome { text, passed: true })
}

const NORMALIZATION_TOL: f64 = 1e-8;
const CK_TOL: f64 = 1e-6;
const STATIONARITY_TOL: f64 = 1e-7;
const SYMMETRY_TOL: f64 = 1e-12;

fn kernel_oracles(n_max: usize, fmt: Format) -> Result<Outcome> {
    progress(&format!("kernel oracles for n = 1..={n_max}"));
    let family = KernelFamily::upto(n_max)?;
    let quad = Quadrature::default();
    let mut all = Vec::new();
    for n in 1..=n_max {
        all.push(oracle_residuals(n, &family, &quad)?);
    }
    let ok = |r: &ladder_core::kernel::OracleResiduals| {
        r.normalization <= NORMALIZATION_TOL
            && r.chapman_kolmogorov.is_none_or(|c| c <= CK_TOL)
            && r.stationarity <= STATIONARITY_TOL
            && r.symmetry <= SYMMETRY_TOL
    };
    let passed = all.iter().all(ok);
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let text = match fmt {
        Format::Csv => csv_text(
            &["n", "normalization", "chapman_kolmogorov", "stationarity", "symmetry", "passed"],
            all.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    fmt_f64(r.normalization),
                    opt(r.chapman_kolmogorov),
                    fmt_f64(r.stationarity),
                    fmt_f64(r.symmetry),
                    ok(r).to_string(),
                ]
            }),
        )?,
        Format::Json => {
            let rows: Vec<Value> = all
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "normalization": json_f64(r.normalization),
                        "chapman_kolmogorov": r.chapman_kolmogorov.map(json_f64),
                        "stationarity": json_f64(r.stationarity),
                        "symmetry": json_f64(r.symmetry),
                        "passed": ok(r),
                    })
                })
                .collect();
            json_text(&json_report([("oracles", rows.into()), ("passed", passed.into())]))?
        }
    };
    Ok(Outcome { text, passed })
}

fn identities(k: usize, fmt: Format) -> Result<Outcome> {
    let checks = standard_cases(k).iter().map(check).collect::<ladder_core::Result<Vec<_>>>()?;
    let passed = checks.iter().all(|c| c.passed());
    let text = match fmt {
        Format::Csv => csv_text(
            &["name", "z", "zeta", "residual"],
            checks.iter().map(|c| {
                vec![c.name.to_string(), fmt_f64(c.z), fmt_f64(c.zeta), fmt_f64(c.residual)]
            }),
        )?,
        Format::Json => {
            let rows: Vec<Value> = checks
                .iter()
                .map(|c| {
                    json!({
                        "name": c.name.to_string(),
                        "z": json_f64(c.z),
                        "zeta": json_f64(c.zeta),
                        "nu": c.nu,
                        "raw": json_f64(c.raw),
                        "closed": json_f64(c.closed),
                        "residual": json_f64(c.residual),
                        "tolerance": json_f64(c.tolerance),
                        "passed": c.passed(),
                    })
                })
                .collect();
            json_text(&json_report([("k", k.into()), ("checks", rows.into()), ("passed", passed.into())]))?
        }
    };
    Ok(Outcome { text, passed })
}

fn rate(n: usize, replicates: usize, stationary: usize, seed: u64, fmt: Format) -> Result<Outcome> {
    let chi = chi_closed_form();
    let mut fields = vec![("chi_closed", json_f64(chi)), ("seed", seed.into())];
    let mut rows = vec![vec!["chi_closed".to_string(), fmt_f64(chi), String::new(), String::new()]];
    let mut passed = true;
    if replicates > 0 {
        if replicates < 2 {
            bail!(ladder_core::Error::InvalidParameter("replicates must be 0 or at least 2".into()));
        }
        progress(&format!("{replicates} ladders of length {n}"));
        let r = rate_check(n, replicates, seed)?;
        let ok = r.within(3.0);
        passed &= ok;
        fields.extend([
            ("n", n.into()),
            ("replicates", replicates.into()),
            ("chi_hat", json_f64(r.chi_hat)),
            ("stderr", json_f64(r.stderr)),
            ("z_score", json_f64(r.z_score)),
            ("within_3_stderr", ok.into()),
        ]);
        rows.push(vec!["chi_hat".into(), fmt_f64(r.chi_hat), fmt_f64(r.stderr), ok.to_string()]);
    }
    if stationary > 0 {
        progress(&format!("{stationary} stationary draws"));
        let m = stationary_moments(stationary, seed);
        let ok = (m.mean_f - chi).abs() <= 3.0 * m.stderr_f;
        passed &= ok;
        fields.extend([
            ("stationary_samples", stationary.into()),
            ("stationary_mean_f", json_f64(m.mean_f)),
            ("stationary_stderr_f", json_f64(m.stderr_f)),
            ("stationary_within_3_stderr", ok.into()),
        ]);
        rows.push(vec!["stationary_mean_f".into(), fmt_f64(m.mean_f), fmt_f64(m.stderr_f), ok.to_string()]);
    }
    let text = match fmt {
        Format::Csv => csv_text(&["quantity", "value", "stderr", "within_3_stderr"], rows)?,
        Format::Json => json_text(&json_report(fields))?,
    };
    Ok(Outcome { text, passed })
}

fn clt(n: usize, replicates: usize, seed: u64, fmt: Format) -> Result<Outcome> {
    progress(&format!("{replicates} ladders of length {n}"));
    let r = clt_check(n, replicates, seed)?;
    let passed = r.p_value >= 0.01;
    let text = match fmt {
        Format::Csv => csv_text(
            &["sample_id", "standardized_value"],
            r.standardized.iter().enumerate().map(|(i, v)| vec![i.to_string(), fmt_f64(*v)]),
        )?,
        Format::Json => json_text(&json_report([
            ("n", n.into()),
            ("replicates", replicates.into()),
            ("seed", seed.into()),
            ("chi_closed", json_f64(r.chi_closed)),
            ("chi_hat", json_f64(r.chi_hat)),
            ("sigma2_hat", json_f64(r.sigma2_hat)),
            ("sigma2_stderr", json_f64(r.sigma2_stderr)),
            ("mean", json_f64(r.moments.mean)),
            ("skewness", json_f64(r.moments.skewness)),
            ("excess_kurtosis", json_f64(r.moments.kurtosis)),
            ("ks_stat", json_f64(r.ks_stat)),
            ("p_value", json_f64(r.p_value)),
            ("ks_passed", passed.into()),
        ]))?,
    };
    Ok(Outcome { text, passed })
}

fn variance(
    n_max: usize,
    mc_outer: usize,
    steps: usize,
    burn_in: usize,
    batch_size: usize,
    seed: u64,
    fmt: Format,
) -> Result<Outcome> {
    progress(&format!("kernel expansion through n = {n_max}, {mc_outer} outer draws"));
    let k = sigma2_kernel(&KernelVarianceConfig::new(n_max, mc_outer, seed))?;
    for w in &k.warnings {
        eprintln!("warning: {w}");
    }
    progress(&format!("batch means over {steps} steps"));
    let s = sigma2_simulation(steps, burn_in, seed.wrapping_add(1), batch_size)?;
    let gap = (k.sigma2 - s.estimate()).abs();
    let tol = (0.05 * k.sigma2).max(3.0 * (k.stderr.powi(2) + s.stderr().powi(2)).sqrt());
    let passed = gap <= tol && k.sigma2 > 0.0 && s.estimate() > 0.0;
    let text = match fmt {
        Format::Csv => {
            let mut rows = vec![vec![
                "0".to_string(),
                fmt_f64(k.term0_quadrature),
                fmt_f64(0.0),
            ]];
            rows.extend(k.terms.iter().map(|t| vec![t.n.to_string(), fmt_f64(t.value), fmt_f64(t.stderr)]));
            csv_text(&["n", "covariance", "stderr"], rows)?
        }
        Format::Json => {
            let mut v = k.to_json();
            let obj = v.as_object_mut().context("report is an object")?;
            obj.insert("sigma2_sim".into(), json_f64(s.estimate()));
            obj.insert("sigma2_sim_stderr".into(), json_f64(s.stderr()));
            obj.insert("sigma2_sim_obm".into(), json_f64(s.overlapping.estimate));
            obj.insert("sigma2_sim_obm_stderr".into(), json_f64(s.overlapping.stderr));
            obj.insert("steps".into(), steps.into());
            obj.insert("batch_size".into(), batch_size.into());
            obj.insert("agreement_tolerance".into(), json_f64(tol));
            obj.insert("agree".into(), passed.into());
            json_text(&v)?
        }
    };
    Ok(Outcome { text, passed })
}

fn drift(half_width: f64, step: f64, fmt: Format) -> Result<Outcome> {
    if !(half_width > 0.0 && half_width <= 29.0) || !(step > 0.0 && step <= half_width) {
        bail!(ladder_core::Error::InvalidParameter("need 0 < step <= half_width <= 29".into()));
    }
    let rep = drift_report(half_width, step, &Quadrature::default());
    let passed = rep.passed();
    let text = match fmt {
        Format::Csv => csv_text(
            &["r", "psi_quadrature", "psi_closed", "lyapunov"],
            rep.rows.iter().map(|t| vec![fmt_f64(t.0), fmt_f64(t.1), fmt_f64(t.2), fmt_f64(t.3)]),
        )?,
        Format::Json => json_text(&json_report([
            ("half_width", json_f64(half_width)),
            ("step", json_f64(step)),
            ("max_closed_residual", json_f64(rep.max_closed_residual)),
            ("sup_psi", json_f64(rep.sup_psi)),
            ("lyapunov_margin", json_f64(rep.lyapunov_margin)),
            ("passed", passed.into()),
        ]))?,
    };
    Ok(Outcome { text, passed })
}
