use rayon::prelude::*;
use rug::Float;
use std::time::Instant;
use sumsq::certificate::{constant_premise_audits, dominance_check, sup_bound_premise, Mode};
use sumsq::hecke::{decompose, verify_trace_identity, DecomposeOptions};
use sumsq::repcount::{
    envelope_holds, meets_monotonicity_threshold, monotonicity_threshold, r_brute, r_closed_form,
    r_theta, ratio_step_nonincreasing, rep_polynomial, sweep_rep_coefficients, theta_power_coeffs,
    EnvelopeConstant,
};
use sumsq::singular::{check_theorem1, error_term, theorem1_constant};
use sumsq::special::float::pi;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    let mut cases = 0;
    for s in 0..=10u32 {
        for n in 0..=30u64 {
            let brute = r_brute(s, n).map_err(|e| e.to_string())?;
            let theta = r_theta(u64::from(s), n);
            let poly = rep_polynomial(n).evaluate(u64::from(s));
            ensure(brute == theta && theta == poly, || {
                format!("s = {s}, n = {n}: {brute} {theta} {poly}")
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (s, n) pairs"))
}

fn closed_forms() -> Outcome {
    for s in [4u32, 6, 8] {
        let r = theta_power_coeffs(u64::from(s), 1000);
        for n in 1..=1000u64 {
            let c = r_closed_form(s, n).map_err(|e| e.to_string())?;
            ensure(c == r[n as usize], || format!("s = {s}, n = {n}"))?;
        }
    }
    Ok("s = 4, 6, 8 up to n = 1000".into())
}

fn dichotomy() -> Outcome {
    for k in [2u32, 4] {
        for n in 1..=500u64 {
            ensure(error_term(k, n).map_err(|e| e.to_string())? == 0, || {
                format!("R nonzero at k = {k}, n = {n}")
            })?;
        }
    }
    for k in (6..=20u32).step_by(2) {
        let c = theorem1_constant(k).map_err(|e| e.to_string())?;
        let r1 = error_term(k, 1).map_err(|e| e.to_string())?;
        ensure(c != 0 && r1 == c, || {
            format!("k = {k}: R(1) = {r1}, constant {c}")
        })?;
    }
    Ok("zero for k = 2, 4; R(1) = constant for k = 6..20".into())
}

fn theorem1_sweep() -> Outcome {
    let results: Vec<_> = (2..=14u32)
        .step_by(2)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| (k, check_theorem1(k, 2000)))
        .collect();
    let mut applicable = 0;
    for (k, rep) in results {
        let rep = rep.map_err(|e| e.to_string())?;
        ensure(rep.failures.is_empty(), || {
            format!("k = {k}: failures {:?}", rep.failures)
        })?;
        ensure(rep.equality_at_1, || {
            format!("k = {k}: no equality at n = 1")
        })?;
        applicable += rep.applicable_count;
    }
    Ok(format!("{applicable} applicable (k, n), zero failures"))
}

fn decompositions() -> Outcome {
    let opts = DecomposeOptions::default();
    let ks: Vec<u32> = (6..=40).step_by(2).collect();
    let reports: Vec<_> = ks.par_iter().map(|&k| (k, decompose(k, &opts))).collect();
    let mut worst_residual = 0f64;
    let mut min_c = f64::INFINITY;
    for (k, rep) in reports {
        let rep = rep.map_err(|e| e.to_string())?;
        ensure(rep.reconstruction_ok(), || {
            format!("k = {k}: residual {}", rep.residual_norm.to_f64())
        })?;
        ensure(rep.positivity_ok(), || {
            format!(
                "k = {k}: min c {:?}",
                rep.min_c.as_ref().map(|m| m.to_f64())
            )
        })?;
        ensure(rep.sum_c_ok(), || {
            format!("k = {k}: sum c error {}", rep.sum_c_relative_error.to_f64())
        })?;
        ensure(rep.level4_vanishing_ok(), || {
            format!("k = {k}: level-4 c not zero")
        })?;
        worst_residual = worst_residual.max(rep.residual_norm.to_f64());
        if let Some(m) = &rep.min_c {
            min_c = min_c.min(m.to_f64());
        }
    }
    Ok(format!(
        "k = 6..40, max residual {worst_residual:.1e}, min c {min_c:.3e}"
    ))
}

fn trace_identity() -> Outcome {
    let opts = DecomposeOptions::default();
    let ks: Vec<u32> = (6..=38).step_by(4).collect();
    let reports: Vec<_> = ks
        .par_iter()
        .map(|&k| (k, verify_trace_identity(k, &opts)))
        .collect();
    let mut worst = 0f64;
    for (k, rep) in reports {
        let rep = rep.map_err(|e| e.to_string())?;
        ensure(rep.series_exact_match, || {
            format!("k = {k}: series side differs")
        })?;
        ensure(rep.passed, || {
            format!(
                "k = {k}: decomposition error {}",
                rep.decomposition_error.to_f64()
            )
        })?;
        worst = worst.max(rep.decomposition_error.to_f64());
    }
    Ok(format!(
        "k = 6, 10, ..., 38; worst decomposition error {worst:.1e}"
    ))
}

fn certificates() -> Outcome {
    let ks = [200u32, 300, 500, 1000, 2000, 5000];
    let certs: Vec<_> = ks
        .par_iter()
        .map(|&k| (k, dominance_check(k, Mode::Refined, 256)))
        .collect();
    let mut margins = Vec::new();
    for (k, c) in certs {
        let c = c.map_err(|e| e.to_string())?;
        ensure(c.passed && *c.margin.as_float() > 0, || {
            format!("k = {k}: margin {}", c.margin.to_f64())
        })?;
        margins.push(format!("{k}:{:.0}", c.normalized_margin.to_f64()));
    }
    Ok(format!("normalized ln margins {}", margins.join(" ")))
}

fn premise_audits() -> Outcome {
    let audits = constant_premise_audits(256).map_err(|e| e.to_string())?;
    for a in &audits {
        ensure(a.passed, || {
            format!(
                "{} at {}: {} vs {}",
                a.name,
                a.point,
                a.computed.to_f64(),
                a.constant.to_f64()
            )
        })?;
    }
    let opts = DecomposeOptions::default();
    let ks = [10u32, 16, 24, 32];
    let reports: Vec<_> = ks.par_iter().map(|&k| (k, decompose(k, &opts))).collect();
    let mut worst = (0f64, 0f64);
    for (k, rep) in reports {
        let d = rep.map_err(|e| e.to_string())?.deligne;
        ensure(d.passed, || {
            format!(
                "k = {k}: ratios {} {}",
                d.tilde_max_ratio.to_f64(),
                d.gamma6_max_ratio.to_f64()
            )
        })?;
        worst = (
            worst.0.max(d.tilde_max_ratio.to_f64()),
            worst.1.max(d.gamma6_max_ratio.to_f64()),
        );
    }
    Ok(format!(
        "{} constants; coefficient ratios {:.3} <= 17/3, {:.3} <= 14/3",
        audits.len(),
        worst.0,
        worst.1
    ))
}

fn lemmas() -> Outcome {
    let sweep = sweep_rep_coefficients(2500, &[]);
    ensure(sweep.negative_coefficients == 0, || {
        format!("{} negative coefficients", sweep.negative_coefficients)
    })?;

    for n in 2..=60u64 {
        let t = monotonicity_threshold(n, 128)
            .map_err(|e| e.to_string())?
            .to_f64();
        let start = t.ceil() as u64;
        let two_s0 = start + start % 2;
        ensure(meets_monotonicity_threshold(n, two_s0), || {
            format!("threshold test at n = {n}")
        })?;
        let mut prev = r_theta(two_s0, n);
        for two_s in (two_s0 + 2..=two_s0 + 40).step_by(2) {
            let next = r_theta(two_s, n);
            ensure(ratio_step_nonincreasing(n, &prev, &next), || {
                format!("n = {n}, 2s = {two_s}")
            })?;
            prev = next;
        }
    }

    for s in 6..=16u32 {
        let c = EnvelopeConstant::for_s(s).map_err(|e| e.to_string())?;
        let r = theta_power_coeffs(u64::from(s), 200);
        for n in 0..=200u64 {
            ensure(envelope_holds(&c, n, &r[n as usize]), || {
                format!("envelope s = {s}, n = {n}")
            })?;
        }
    }

    let prec = 256;
    let inv = Float::with_val(prec, 1) / (pi(prec) * 2u32);
    for (k, y) in [(11u32, Float::with_val(prec, 1)), (21, inv)] {
        let a = sup_bound_premise(k, &y, prec).map_err(|e| e.to_string())?;
        ensure(a.passed, || {
            format!(
                "sup bound at {}: {} vs {}",
                a.point,
                a.computed.to_f64(),
                a.constant.to_f64()
            )
        })?;
    }
    Ok(format!(
        "{} coefficients nonnegative; monotone 2 <= n <= 60; envelope s = 6..16; sup bound",
        sweep.coefficients_checked
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("closed forms", closed_forms),
        ("vanishing error for 4 and 8 squares", dichotomy),
        ("error bound, k <= 14, n <= 2000", theorem1_sweep),
        ("decomposition, k <= 40", decompositions),
        ("trace identity", trace_identity),
        ("refined dominance grid", certificates),
        ("bound premises", premise_audits),
        ("lemma suite", lemmas),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[{}] PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[{}] FAIL {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
