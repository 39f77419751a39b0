//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each.
//!
//! The process exits nonzero only if a criterion fails for a reason other
//! than the two known misprinted reference cells of the step-four table
//! (see the README); those make criterion 1 fail by design.

use std::process::Command;
use std::time::{Duration, Instant};

use ladder_core::exact::Rational;
use ladder_core::genfun::coeff_tables_upto;
use ladder_core::kernel::{ck_oracle, drift_report, kn_mass, oracle_residuals, KernelDensity, KernelFamily};
use ladder_core::quadrature::Quadrature;
use ladder_core::recurrence::recur_tables_upto;
use ladder_core::rng::stream_rng;
use ladder_core::simulate::{
    chi_closed_form, chi_reverse_sum, clt_check, dijkstra_oracle, dp_first_passage, integral_f_squared,
    rate_check, stationary_moments, LadderSample,
};
use ladder_core::specfun::{check, standard_cases, IdentityName};
use ladder_core::variance::{sigma2_kernel, sigma2_simulation, KernelVarianceConfig};
use rand::Rng;

struct Verdict {
    id: u32,
    passed: bool,
    detail: String,
    /// A failure that is explained and expected.
    known: bool,
}

fn report(id: u32, title: &str, budget: Duration, f: impl FnOnce() -> (bool, String, bool)) -> Verdict {
    let start = Instant::now();
    let (ok, detail, known) = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let passed = ok && in_time;
    println!(
        "[{}] criterion {id}: {title}: {detail}; {:.2}s (budget {}s)",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    Verdict {
        id,
        passed,
        detail,
        known: known && in_time,
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn reference_cells() -> Vec<(String, usize, usize, Rational)> {
    let mut rd = csv::Reader::from_reader(include_str!("data/k4_reference.csv").as_bytes());
    rd.records()
        .map(|r| {
            let r = r.expect("reference row");
            (r[0].to_string(), r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect()
}

/// Cells the reference prints as `a_{1,1} = -1/36` and `a_{3,1} = 1/144`;
/// both engines give `-11/36` and `-1/144`, and the printed values break
/// normalization of the kernel.
const KNOWN_MISPRINTS: [(&str, usize, usize); 2] = [("a", 1, 1), ("a", 3, 1)];

fn criterion_1() -> Verdict {
    report(1, "step-four table matches the printed reference", secs(5), || {
        let out = Command::new(env!("CARGO_BIN_EXE_ladder"))
            .args(["coeffs", "--n", "4", "--format", "csv"])
            .output()
            .expect("binary runs");
        let mut rd = csv::Reader::from_reader(out.stdout.as_slice());
        let mut produced = std::collections::HashMap::new();
        for r in rd.records() {
            let r = r.expect("row");
            if &r[2] != "d" {
                produced.insert((r[2].to_string(), r[0].parse::<usize>().unwrap(), r[1].parse::<usize>().unwrap()), r[3].to_string());
            }
        }
        let cells = reference_cells();
        let mut mismatched = Vec::new();
        for (t, p, q, v) in &cells {
            let got = produced.get(&(t.clone(), *p, *q)).cloned().unwrap_or_default();
            if got != v.to_string() {
                mismatched.push((t.clone(), *p, *q, v.to_string(), got));
            }
        }
        let ok = mismatched.is_empty();
        let known = mismatched.len() == KNOWN_MISPRINTS.len()
            && mismatched
                .iter()
                .zip(KNOWN_MISPRINTS)
                .all(|((t, p, q, _, _), (kt, kp, kq))| t == kt && *p == kp && *q == kq);
        let mut detail = format!("{} of {} cells equal", cells.len() - mismatched.len(), cells.len());
        for (t, p, q, printed, got) in &mismatched {
            detail += &format!("; {t}_{{{p},{q}}} printed {printed}, computed {got}");
        }
        if known {
            detail += &format!("; {}", misprint_evidence());
        }
        (ok && out.status.success(), detail, known)
    })
}

/// Mass of `K^4(r', ·)` with the printed cells substituted in.
fn misprint_evidence() -> String {
    let mut t = coeff_tables_upto(4).expect("tables").pop().expect("n = 4");
    let q = Quadrature::default();
    let good = kn_mass(&KernelDensity::new(&t), -1.0, &q);
    t.a[1][1] = Rational::new((-1).into(), 36.into());
    t.a[3][1] = Rational::new(1.into(), 144.into());
    let bad = kn_mass(&KernelDensity::new(&t), -1.0, &q);
    format!("mass of K^4(-1, .) is {good:.12} with computed cells, {bad:.12} with printed cells")
}

fn criterion_2() -> Verdict {
    report(2, "generating-function and recurrence engines agree for n <= 12", secs(60), || {
        let gf = match coeff_tables_upto(12) {
            Ok(t) => t,
            Err(e) => return (false, format!("genfun error: {e}"), false),
        };
        let rec = match recur_tables_upto(12) {
            Ok(t) => t,
            Err(e) => return (false, format!("recurrence error (beta assertion): {e}"), false),
        };
        let diffs: usize = gf.iter().zip(&rec).map(|(a, b)| a.diff(b).len() + usize::from(a.d != b.d)).sum();
        (diffs == 0, format!("{diffs} differing cells over 12 levels; beta assertion silent"), false)
    })
}

fn criterion_3() -> Verdict {
    report(3, "summation identities and relation lemmas", secs(10), || {
        let cases = standard_cases(40);
        let mut worst = 0.0f64;
        let mut worst_fd = 0.0f64;
        let mut failures = 0;
        for c in &cases {
            match check(c) {
                Ok(r) => {
                    if matches!(r.name, IdentityName::HG1 | IdentityName::HG2) {
                        worst_fd = worst_fd.max(r.residual);
                    } else {
                        worst = worst.max(r.residual);
                    }
                    failures += usize::from(!r.passed());
                }
                Err(_) => failures += 1,
            }
        }
        (
            failures == 0,
            format!(
                "{} cases, {failures} failures, max residual {worst:.2e} (tol 1e-10), derivative lemma max {worst_fd:.2e} (tol 1e-7)",
                cases.len()
            ),
            false,
        )
    })
}

fn criterion_4() -> Verdict {
    report(4, "kernel quadrature oracles", secs(120), || {
        let family = KernelFamily::upto(6).expect("tables");
        let q = Quadrature::default();
        let (mut norm, mut ck, mut stat, mut sym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for n in 1..=6 {
            let r = oracle_residuals(n, &family, &q).expect("oracles");
            norm = norm.max(r.normalization);
            sym = sym.max(r.symmetry);
            if n <= 5 {
                ck = ck.max(r.chapman_kolmogorov.unwrap_or(0.0));
            }
            if n <= 3 {
                stat = stat.max(r.stationarity);
            }
        }
        let spot = (ck_oracle(2, 0.5, 0.25, &q, &family).unwrap()
            - family.density(2).unwrap().eval(0.5, 0.25))
        .abs();
        ck = ck.max(spot);
        let ok = norm <= 1e-8 && ck <= 1e-6 && stat <= 1e-7 && sym <= 1e-12;
        (
            ok,
            format!("normalization {norm:.2e}, Chapman-Kolmogorov {ck:.2e}, stationarity {stat:.2e}, symmetry {sym:.2e}"),
            false,
        )
    })
}

fn criterion_5() -> Verdict {
    report(5, "drift of the Lyapunov function", secs(5), || {
        let r = drift_report(10.0, 0.05, &Quadrature::default());
        (
            r.passed(),
            format!(
                "closed-form residual {:.2e}, |sup psi - 1/2| {:.2e}, min(V - 1/10 - psi) on |r| >= 1 is {:.4}",
                r.max_closed_residual,
                (r.sup_psi - 0.5).abs(),
                r.lyapunov_margin
            ),
            false,
        )
    })
}

fn criterion_6() -> Verdict {
    report(6, "percolation rate by Monte Carlo", secs(120), || {
        let chi = chi_closed_form();
        let dual = (chi - chi_reverse_sum()).abs();
        let r = rate_check(2000, 5000, 606).expect("rate");
        let m = stationary_moments(1_000_000, 607);
        let zs = (m.mean_f - chi) / m.stderr_f;
        let ok = r.within(3.0) && zs.abs() <= 3.0 && dual <= 1e-12;
        (
            ok,
            format!(
                "chi = {chi:.15}, l_n/n = {:.6} +- {:.6} (z = {:.2}), E f = {:.6} +- {:.6} (z = {zs:.2}), Bessel routes differ by {dual:.1e}",
                r.chi_hat, r.stderr, r.z_score, m.mean_f, m.stderr_f
            ),
            false,
        )
    })
}

fn criterion_7() -> Verdict {
    report(7, "central limit theorem", secs(300), || {
        let main = clt_check(2000, 5000, 707).expect("clt");
        let runs: Vec<_> = [1000, 2000, 4000]
            .iter()
            .enumerate()
            .map(|(i, &n)| clt_check(n, 5000, 710 + i as u64).expect("clt"))
            .collect();
        let mut worst = 0.0f64;
        for i in 0..runs.len() {
            for j in i + 1..runs.len() {
                let (a, b) = (&runs[i], &runs[j]);
                let z = (a.sigma2_hat - b.sigma2_hat).abs() / (a.sigma2_stderr.powi(2) + b.sigma2_stderr.powi(2)).sqrt();
                worst = worst.max(z);
            }
        }
        let ok = main.p_value >= 0.01 && worst <= 3.0;
        let s: Vec<String> = runs.iter().map(|r| format!("{:.4}", r.sigma2_hat)).collect();
        (
            ok,
            format!(
                "KS D = {:.4}, p = {:.3}; sigma2_hat at n = 1000, 2000, 4000: {} (max pairwise z {worst:.2})",
                main.ks_stat,
                main.p_value,
                s.join(", ")
            ),
            false,
        )
    })
}

fn criterion_8() -> Verdict {
    report(8, "variance cross-validation", secs(600), || {
        let k = sigma2_kernel(&KernelVarianceConfig::new(8, 2_000_000, 808)).expect("kernel variance");
        let s = sigma2_simulation(10_000_000, 1000, 809, 1000).expect("simulation variance");
        let tol = (0.05 * k.sigma2).max(3.0 * (k.stderr.powi(2) + s.stderr().powi(2)).sqrt());
        let gap = (k.sigma2 - s.estimate()).abs();
        let chi = chi_closed_form();
        let closed = integral_f_squared() - chi * chi;
        let term0 = (k.term0_quadrature - closed).abs();
        let ok = gap <= tol && term0 <= 1e-10;
        (
            ok,
            format!(
                "kernel {:.5} +- {:.5}, simulation {:.5} +- {:.5}, gap {gap:.5} (tol {tol:.5}); n = 0 term residual {term0:.1e}",
                k.sigma2,
                k.stderr,
                s.estimate(),
                s.stderr()
            ),
            false,
        )
    })
}

fn criterion_9() -> Verdict {
    report(9, "recursion equals Dijkstra", secs(10), || {
        let mut rng = stream_rng(909, 0);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let n = rng.random_range(0..=50);
            let s = LadderSample::random(n, &mut rng);
            worst = worst.max((dp_first_passage(&s).l_n() - dijkstra_oracle(&s)).abs());
        }
        (worst <= 1e-12, format!("1000 ladders, max difference {worst:.1e}"), false)
    })
}

fn main() {
    let verdicts = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    let passed = verdicts.iter().filter(|v| v.passed).count();
    let unexpected: Vec<u32> = verdicts.iter().filter(|v| !v.passed && !v.known).map(|v| v.id).collect();
    println!("acceptance: {passed}/{} passed", verdicts.len());
    for v in verdicts.iter().filter(|v| !v.passed && v.known) {
        println!("acceptance: criterion {} fails for a documented reason ({})", v.id, v.detail.split(';').next().unwrap_or(""));
    }
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
