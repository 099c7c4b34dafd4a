//! Mode runners. Each returns the full output text so the caller decides
//! where it goes.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ConfigError, RunConfig};
use crate::bounds::{DecoyProtocol, ProtocolKind};
use crate::keyrate::{evaluate_point, optimize_intensities, pns_limit_distance, KeyRatePoint};
use crate::optics::{
    dfs_components, expected_final_state, fidelity, pair_factorization, run_full_attack, Code,
    Spatial,
};
use crate::source::PairIntensity;

pub const FIG1_HEADER: &str =
    "L_km,Q_signal,E_signal,S1_lower_nodecoy,e1_upper_nodecoy,R_nodecoy,S1_lower_3int,e1_upper_3int,R_3int";

const FIG1_DIAG_HEADER: &str = "S1_lower_nodecoy.diag,e1_upper_nodecoy.diag,R_nodecoy.diag,\
S1_lower_3int.diag,e1_upper_3int.diag,R_3int.diag";

/// `%.11e`: 12 significant digits and a signed exponent of at least two
/// digits.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.11e}");
    let (mantissa, exp) = s
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(",")
}

fn rows_in_order<T, F>(lengths: &[f64], f: F) -> Result<Vec<T>, ConfigError>
where
    T: Send,
    F: Fn(f64) -> Result<T, ConfigError> + Sync,
{
    lengths.par_iter().map(|&l| f(l)).collect()
}

fn point(
    cfg: &RunConfig,
    protocol: &DecoyProtocol,
    length: f64,
) -> Result<KeyRatePoint, ConfigError> {
    Ok(evaluate_point(
        protocol,
        &cfg.channel(length)?,
        &cfg.constants()?,
        &cfg.model(),
    )?)
}

pub fn run_fig1_sweep(cfg: &RunConfig) -> Result<String, ConfigError> {
    let no_decoy = DecoyProtocol::no_decoy(cfg.lambda)?;
    let three = DecoyProtocol::three_intensity(cfg.lambda, cfg.lambda_prime)?;
    let rows = rows_in_order(&cfg.lengths(), |l| {
        let nd = point(cfg, &no_decoy, l)?;
        let t = point(cfg, &three, l)?;
        let mut line = join(&[
            l,
            t.signal.q(),
            t.signal.e(),
            nd.bounds.s1_lower.value,
            nd.bounds.e1_upper.value,
            nd.rate.value,
            t.bounds.s1_lower.value,
            t.bounds.e1_upper.value,
            t.rate.value,
        ]);
        if cfg.diagnostics {
            line.push(',');
            line.push_str(&join(&[
                nd.bounds.s1_lower.raw,
                nd.bounds.e1_upper.raw,
                nd.rate.raw,
                t.bounds.s1_lower.raw,
                t.bounds.e1_upper.raw,
                t.rate.raw,
            ]));
        }
        Ok(line)
    })?;
    let mut out = String::from(FIG1_HEADER);
    if cfg.diagnostics {
        out.push(',');
        out.push_str(FIG1_DIAG_HEADER);
    }
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}

pub const BOUNDS_HEADER: &str = "L_km,protocol,Q_signal,E_signal,S0_used,S1_lower,S1_lower_raw,e1_upper,e1_upper_raw,R_lower,R_raw,e1_unavailable";

pub fn run_bounds_table(cfg: &RunConfig) -> Result<String, ConfigError> {
    let protocols: Vec<DecoyProtocol> = ProtocolKind::ALL
        .iter()
        .map(|k| k.with_intensities(cfg.lambda, cfg.lambda_prime))
        .collect::<Result<_, _>>()?;
    let rows = rows_in_order(&cfg.lengths(), |l| {
        let mut block = String::new();
        for p in &protocols {
            let pt = point(cfg, p, l)?;
            let b = &pt.bounds;
            writeln!(
                block,
                "{},{},{},{}",
                sci(l),
                p.name(),
                join(&[
                    pt.signal.q(),
                    pt.signal.e(),
                    b.s0_used,
                    b.s1_lower.value,
                    b.s1_lower.raw,
                    b.e1_upper.value,
                    b.e1_upper.raw,
                    pt.rate.value,
                    pt.rate.raw,
                ]),
                b.flags.e1_unavailable as u8
            )
            .expect("writing to a String");
        }
        Ok(block)
    })?;
    let mut out = format!("{BOUNDS_HEADER}\n");
    out.extend(rows);
    Ok(out)
}

pub fn run_pns_limit(cfg: &RunConfig) -> Result<String, ConfigError> {
    let lambda = PairIntensity::new(cfg.lambda)?;
    let limit = pns_limit_distance(lambda, cfg.k_db_per_km, cfg.attack_success)?;
    let mut out = String::new();
    let mut kv = |k: &str, v: f64| writeln!(out, "{k}={}", sci(v)).expect("writing to a String");
    kv("lambda", cfg.lambda);
    kv("k_db_per_km", cfg.k_db_per_km);
    kv("attack_success", cfg.attack_success);
    kv("P1", lambda.probability(1));
    kv("P2", lambda.probability(2));
    kv("pns_limit_km", limit);
    Ok(out)
}

pub const OPTIMIZE_HEADER: &str = "lambda,lambda_prime,L_km,S1_lower,e1_upper,R_lower,is_best";

pub fn run_optimize(cfg: &RunConfig) -> Result<String, ConfigError> {
    let grid: Vec<(f64, f64)> = cfg
        .opt_lambda_grid
        .iter()
        .flat_map(|&l| cfg.opt_lambda_prime_grid.iter().map(move |&lp| (l, lp)))
        .collect();
    let params = cfg.channel(cfg.opt_distance_km)?;
    let consts = cfg.constants()?;
    let model = cfg.model();
    let best = optimize_intensities(cfg.protocol, &params, &consts, &model, &grid)?;
    let mut feasible: Vec<(f64, f64, DecoyProtocol)> = grid
        .iter()
        .filter_map(|&(l, lp)| {
            cfg.protocol
                .with_intensities(l, lp)
                .ok()
                .map(|p| (l, lp, p))
        })
        .collect();
    feasible.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let points: Vec<KeyRatePoint> = feasible
        .par_iter()
        .map(|(_, _, p)| evaluate_point(p, &params, &consts, &model))
        .collect::<Result<_, _>>()?;
    let mut out = format!("{OPTIMIZE_HEADER}\n");
    for ((l, lp, _), pt) in feasible.iter().zip(&points) {
        let is_best = (*l, *lp) == (best.lambda, best.lambda_prime);
        writeln!(
            out,
            "{},{}",
            join(&[
                *l,
                *lp,
                cfg.opt_distance_km,
                pt.bounds.s1_lower.value,
                pt.bounds.e1_upper.value,
                pt.rate.value
            ]),
            is_best as u8
        )
        .expect("writing to a String");
    }
    Ok(out)
}

fn fmt_complex(z: Complex64) -> String {
    let round = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    format!("{:+.6}{:+.6}i", round(z.re), round(z.im))
}

/// Attack report and whether every check passed.
pub fn run_attack_verify(cfg: &RunConfig) -> Result<(String, bool), ConfigError> {
    let t = &cfg.verify;
    let mut out = String::new();
    let mut all_pass = true;
    let mut check = |out: &mut String, label: &str, got: f64, target: f64, ok: bool| {
        all_pass &= ok;
        writeln!(
            out,
            "  {label:<24} {got:.15}  target {target:.15}  {}",
            if ok { "PASS" } else { "FAIL" }
        )
        .expect("writing to a String");
    };
    writeln!(
        out,
        "tolerances: probability {:e}, fidelity {:e}, rank {:e}",
        t.tol_probability, t.tol_fidelity, t.tol_rank
    )
    .expect("writing to a String");
    for code in Code::ALL {
        let trace = run_full_attack(code)?;
        let p = trace.probabilities;
        writeln!(out, "code {}", code.name()).expect("writing to a String");
        let within = |got: f64, target: f64| (got - target).abs() <= t.tol_probability;
        check(
            &mut out,
            "P(post-selection)",
            p.postselection,
            t.postselection,
            within(p.postselection, t.postselection),
        );
        check(&mut out, "P(U1/P1)", p.u1, t.u1, within(p.u1, t.u1));
        check(&mut out, "P(U2/P2)", p.u2, t.u2, within(p.u2, t.u2));
        let overall = p.overall_conditional();
        check(
            &mut out,
            "P(U1/P1 and U2/P2)",
            overall,
            t.overall,
            within(overall, t.overall),
        );

        let f = fidelity(&trace.final_state, &expected_final_state(code));
        check(
            &mut out,
            "fidelity to product",
            f,
            1.0,
            f >= 1.0 - t.tol_fidelity,
        );
        let fact = pair_factorization(
            &trace.final_state,
            (Spatial::A1, Spatial::B2),
            (Spatial::A2, Spatial::B1),
        )?;
        let s2 = fact.second_singular_value();
        check(&mut out, "second singular value", s2, 0.0, s2 <= t.tol_rank);

        let d = dfs_components(&trace.after_u1);
        let r5 = 5f64.sqrt();
        writeln!(
            out,
            "  after U1: sqrt5 * (X, X', Y, Y') = ({}, {}, {}, {})",
            fmt_complex(d.x * r5),
            fmt_complex(d.x_prime * r5),
            fmt_complex(d.y * r5),
            fmt_complex(d.y_prime * r5)
        )
        .expect("writing to a String");
    }
    writeln!(out, "VERDICT: {}", if all_pass { "PASS" } else { "FAIL" })
        .expect("writing to a String");
    Ok((out, all_pass))
}
