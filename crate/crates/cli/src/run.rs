//! Dispatch of the ten subcommands.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use hebundle::contfrac::{
    convergents, gauss_digit_density, lagrange_estimate, periodic_lagrange, ContinuedFraction,
};
use hebundle::coulomb::{coulomb_experiment, CoulombConfig, CoulombError, CoulombRecord};
use hebundle::farey::{farey_triangles_up_to, is_farey_triangle, FareyTriangle};
use hebundle::stability::{
    build_sequence, euler_pairing, lattice_interior_count, select_subsequence, slope, well_approx_check,
    StabilityError, WellApproxParams,
};
use hebundle::torus::{
    build_model_bundle, chern_weil_check, donaldson_flow, he_residual, mean_curvature, random_metric,
    second_fundamental_form, theta_sections, threshold_probe, write_csv, EndoField, FlowConfig, TorusError,
    TorusGrid, DiffScheme,
};
use hebundle::Verdict;
use num_bigint::BigInt;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{Command, Params, RunConfig};
use crate::report::{write_report, Check, Clock, ReportRecord, SCHEMA_VERSION};
use crate::CliError;

/// What a subcommand produced, before the record is stamped.
struct Outcome {
    anchor: &'static str,
    outputs: Value,
    residuals: Value,
    verdicts: Vec<Check>,
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.to_string(),
        pass,
        detail: detail.into(),
    }
}

/// A numerical failure inside the library: recorded, not raised.
fn failed(anchor: &'static str, stage: &str, err: impl std::fmt::Display, extra: Value) -> Outcome {
    Outcome {
        anchor,
        outputs: extra,
        residuals: Value::Null,
        verdicts: vec![check(stage, false, err.to_string())],
    }
}

fn need<T: Clone>(v: &Option<T>, key: &'static str) -> Result<T, CliError> {
    v.clone().ok_or(CliError::Missing(key))
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Computes the record for `cfg` without touching the journal.
pub fn execute(cfg: &RunConfig) -> Result<ReportRecord, CliError> {
    let start = Instant::now();
    let p = &cfg.params;
    let out = match cfg.command {
        Command::Lagrange => lagrange(p)?,
        Command::Convergents => convergents_cmd(p)?,
        Command::Farey => farey(p)?,
        Command::Stability => stability(p)?,
        Command::Sequence => sequence(p)?,
        Command::TorusHe => torus_he(p, cfg.csv.as_deref())?,
        Command::ChernWeil => chern_weil(p, cfg.csv.as_deref())?,
        Command::Donaldson => donaldson(p, cfg.csv.as_deref())?,
        Command::Coulomb => coulomb(p)?,
        Command::Density => density(p)?,
    };
    let pass = !out.verdicts.is_empty() && out.verdicts.iter().all(|c| c.pass);
    Ok(ReportRecord {
        schema_version: SCHEMA_VERSION,
        clock: Clock {
            timestamp: chrono::Utc::now().to_rfc3339(),
            elapsed_s: start.elapsed().as_secs_f64(),
        },
        config_hash: cfg.hash(),
        op: cfg.command.name().to_string(),
        anchor: out.anchor.to_string(),
        inputs: cfg.resolved(),
        outputs: out.outputs,
        residuals: out.residuals,
        verdicts: out.verdicts,
        pass,
    })
}

/// Runs `cfg` and appends the record to `cfg.out` when set.
pub fn run(cfg: &RunConfig) -> Result<ReportRecord, CliError> {
    let rec = execute(cfg)?;
    if let Some(path) = &cfg.out {
        write_report(&rec, path)?;
    }
    Ok(rec)
}

fn theta_cf(p: &Params) -> Result<ContinuedFraction, CliError> {
    need(&p.theta, "theta")?.expand(need(&p.depth, "depth")?)
}

const LAGRANGE: &str = "L_par(θ) = limsup over n of the given parity of [a_{n+1}; a_{n+2}, …] + [0; a_n, …, a_1]";

fn lagrange(p: &Params) -> Result<Outcome, CliError> {
    let cf = theta_cf(p)?;
    let parity = need(&p.parity, "parity")?;
    let depth = need(&p.depth, "depth")?;
    let tol = need(&p.tol, "tol")?;
    let i_max = (depth / 2).saturating_sub(1).max(1);
    let est = lagrange_estimate(&cf, parity, i_max, depth).map_err(input)?;
    let values = est.values();
    let last_quarter = &values[values.len() - values.len().div_ceil(4)..];
    let late_sup = last_quarter.iter().map(|v| v.hi).fold(f64::NEG_INFINITY, f64::max);
    let mut outputs = json!({
        "estimate": est.estimate,
        "evaluated_to": est.depth,
        "partial": est.partial,
        "running_max": est.running_max.last(),
        "late_sup": late_sup,
    });
    let mut verdicts = vec![check(
        "enclosure",
        est.estimate.lo <= est.estimate.hi,
        format!("[{:e}, {:e}]", est.estimate.lo, est.estimate.hi),
    )];
    let mut residuals = Value::Null;
    if cf.is_periodic() {
        let exact = periodic_lagrange(&cf, parity);
        let v = exact.value.to_f64();
        let gap = (late_sup - v).abs();
        outputs["exact"] = json!(exact.value.to_string());
        outputs["exact_f64"] = json!(v);
        outputs["attainable"] = json!(exact.attainable);
        residuals = json!({ "late_sup_gap": gap });
        verdicts.push(check(
            "running values reach the exact limsup",
            gap <= tol,
            format!("|sup of late values − {}| = {gap:e}", exact.value),
        ));
    }
    Ok(Outcome {
        anchor: LAGRANGE,
        outputs,
        residuals,
        verdicts,
    })
}

fn convergents_cmd(p: &Params) -> Result<Outcome, CliError> {
    let cf = theta_cf(p)?;
    let count = need(&p.count, "count")?.max(1);
    let last = match cf.available_depth() {
        Some(a) => (count - 1).min(a),
        None => count - 1,
    };
    let conv = convergents(&cf, last).map_err(input)?;
    let mut bad = Vec::new();
    for n in 1..conv.len() {
        let d = &conv[n].p * &conv[n - 1].q - &conv[n - 1].p * &conv[n].q;
        let want = if n % 2 == 1 { BigInt::from(1) } else { BigInt::from(-1) };
        if d != want {
            bad.push(n);
        }
    }
    let list: Vec<String> = conv.iter().map(|c| format!("{}/{}", c.p, c.q)).collect();
    Ok(Outcome {
        anchor: "p_n q_{n−1} − p_{n−1} q_n = (−1)^{n−1}",
        outputs: json!({ "a0": cf.a0().to_string(), "convergents": list }),
        residuals: json!({ "determinant_failures": bad.len() }),
        verdicts: vec![check(
            "unimodular consecutive convergents",
            bad.is_empty(),
            format!("{} of {} pairs fail", bad.len(), conv.len().saturating_sub(1)),
        )],
    })
}

fn triangle_checks(t: &FareyTriangle) -> Result<(bool, bool, Value), CliError> {
    let c = is_farey_triangle(t);
    let lat = lattice_interior_count((t.left.p(), t.left.q()), (t.right.p(), t.right.q())).map_err(input)?;
    let empty = lat.enumerated == 0 && lat.pick == 0;
    Ok((
        c.farey,
        empty,
        json!({ "triangle": c.triangle, "violated": c.violated, "interior": lat }),
    ))
}

fn farey(p: &Params) -> Result<Outcome, CliError> {
    const ANCHOR: &str = "Farey triangle: v₂ = v₁ + v₃ with det(v₁, v₂) = det(v₂, v₃) = 1; the charge parallelogram has no interior lattice points";
    if let Some([a, b, c]) = p.triangle {
        let (farey, empty, detail) = triangle_checks(&FareyTriangle {
            left: a,
            middle: b,
            right: c,
        })?;
        return Ok(Outcome {
            anchor: ANCHOR,
            outputs: detail,
            residuals: Value::Null,
            verdicts: vec![
                check("farey triangle", farey, format!("{a},{b},{c}")),
                check("empty parallelogram", empty, "interior lattice count"),
            ],
        });
    }
    let qmax = need(&p.qmax, "qmax")?;
    let all = farey_triangles_up_to(qmax);
    let (mut not_farey, mut not_empty) = (0usize, 0usize);
    for t in &all {
        let (f, e, _) = triangle_checks(t)?;
        not_farey += usize::from(!f);
        not_empty += usize::from(!e);
    }
    Ok(Outcome {
        anchor: ANCHOR,
        outputs: json!({ "triangles": all.len(), "qmax": qmax }),
        residuals: json!({ "not_farey": not_farey, "nonempty_parallelogram": not_empty }),
        verdicts: vec![
            check("all farey", not_farey == 0, format!("{not_farey} of {} fail", all.len())),
            check("all parallelograms empty", not_empty == 0, format!("{not_empty} of {} fail", all.len())),
        ],
    })
}

fn stab(e: StabilityError) -> CliError {
    input(e)
}

fn stability(p: &Params) -> Result<Outcome, CliError> {
    let cf = theta_cf(p)?;
    let sub = need(&p.sub, "sub")?;
    let sub0 = need(&p.sub0, "sub0")?;
    let genus = need(&p.genus, "genus")?;
    let params = WellApproxParams::from_cf(need(&p.l, "L")?, &cf, genus).map_err(stab)?;
    let res = well_approx_check(sub, sub0, &params).map_err(stab)?;
    let chi = euler_pairing(sub0, sub, genus).map_err(stab)?;
    Ok(Outcome {
        anchor: "L(θ − μ(S))·rk S < rk S₀·(μ(S) − μ(S₀))",
        outputs: json!({
            "verdict": res.verdict,
            "lhs": res.lhs.floats(),
            "rhs": res.rhs.to_string(),
            "margin": res.margin.floats(),
            "slope_sub": slope(sub).map_err(stab)?.to_string(),
            "slope_sub0": slope(sub0).map_err(stab)?.to_string(),
            "euler_pairing": chi,
        }),
        residuals: Value::Null,
        verdicts: vec![check(
            "inequality holds",
            res.verdict == Verdict::True,
            format!("{:?}", res.verdict),
        )],
    })
}

fn sequence(p: &Params) -> Result<Outcome, CliError> {
    let cf = theta_cf(p)?;
    let count = need(&p.count, "count")?;
    let l = need(&p.l, "L")?;
    let classes = build_sequence(&cf, count).map_err(stab)?;
    let entries = select_subsequence(&cf, &l, count).map_err(stab)?;
    let passing = entries.iter().filter(|e| e.pass == Verdict::True).count();
    let undecided = entries.iter().filter(|e| e.pass == Verdict::Undecided).count();
    Ok(Outcome {
        anchor: "|θ − p_{2i}/q_{2i}|·q_{2i}²·L < 1 along even convergents",
        outputs: json!({ "classes": classes, "entries": entries }),
        residuals: json!({ "passing": passing, "undecided": undecided }),
        verdicts: vec![check(
            "every entry well approximated",
            passing == entries.len() && !entries.is_empty(),
            format!("{passing} of {} pass, {undecided} undecided", entries.len()),
        )],
    })
}

fn grid(p: &Params) -> Result<TorusGrid<f64>, CliError> {
    let [re, im] = need(&p.tau, "tau")?;
    let g = TorusGrid::new(need(&p.n, "N")?, Complex::new(re, im)).map_err(input)?;
    Ok(g.with_scheme(p.scheme.unwrap_or(DiffScheme::Fd4)))
}

fn dump(field: &EndoField<f64>, path: Option<&Path>) -> Result<(), CliError> {
    let Some(path) = path else { return Ok(()) };
    let io = |e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let f = File::create(path).map_err(io)?;
    write_csv(field, BufWriter::new(f)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Input errors exit with 1; the rest are numerical failures.
fn torus_input(e: &TorusError) -> bool {
    matches!(
        e,
        TorusError::BadModulus(_)
            | TorusError::BadGrid { .. }
            | TorusError::ZeroRank
            | TorusError::NotCoprime { .. }
            | TorusError::NoSections(_)
            | TorusError::BadCharacteristic { .. }
    )
}

macro_rules! torus_try {
    ($e:expr, $anchor:expr, $stage:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) if torus_input(&e) => return Err(input(e)),
            Err(e) => return Ok(failed($anchor, $stage, &e, Value::Null)),
        }
    };
}

fn torus_he(p: &Params, csv: Option<&Path>) -> Result<Outcome, CliError> {
    const ANCHOR: &str = "√−1ΛF_H = 2πμ·Id for the projectively flat model bundle";
    let g = grid(p)?;
    let m = torus_try!(build_model_bundle(need(&p.rank, "rank")?, need(&p.degree, "degree")?, &g), ANCHOR, "build");
    let res = torus_try!(he_residual(&m.connection, &m.metric, m.mu()), ANCHOR, "curvature");
    if csv.is_some() {
        let k = torus_try!(mean_curvature(&m.connection, &m.metric), ANCHOR, "curvature");
        dump(&k, csv)?;
    }
    let tol = need(&p.tol, "tol")?;
    Ok(Outcome {
        anchor: ANCHOR,
        outputs: json!({ "mu": m.mu(), "nodes": g.len() }),
        residuals: json!({ "he_residual": res }),
        verdicts: vec![check("he_residual < tol", res < tol, format!("{res:e} vs {tol:e}"))],
    })
}

fn chern_weil(p: &Params, csv: Option<&Path>) -> Result<Outcome, CliError> {
    const ANCHOR: &str = "∫|β|²_H = 2π(μ_E − μ_S)·rk S for the theta-section line subbundle";
    let g = grid(p)?;
    let m = torus_try!(build_model_bundle(need(&p.rank, "rank")?, need(&p.degree, "degree")?, &g), ANCHOR, "build");
    let secs = torus_try!(theta_sections(&m.twist, &g), ANCHOR, "sections");
    let floor = need(&p.floor, "floor")?;
    let f = torus_try!(
        second_fundamental_form(&m.connection, &secs[..1], &m.metric, floor),
        ANCHOR,
        "second fundamental form"
    );
    let cw = chern_weil_check(&f, m.mu(), 0.0, 1);
    let probe = threshold_probe(&f.norm_sq).ok();
    dump(&f.pi, csv)?;
    let tol = need(&p.tol, "tol")?;
    Ok(Outcome {
        anchor: ANCHOR,
        outputs: json!({
            "lhs": cw.lhs,
            "rhs": cw.rhs,
            "sup_over_mean": probe,
            "min_sigma": f.min_sigma,
        }),
        residuals: json!({ "rel_err": cw.rel_err }),
        verdicts: vec![check("rel_err < tol", cw.rel_err < tol, format!("{:e} vs {tol:e}", cw.rel_err))],
    })
}

fn donaldson(p: &Params, csv: Option<&Path>) -> Result<Outcome, CliError> {
    const ANCHOR: &str = "dH/dt = −H(√−1ΛF_H − 2πμ·Id) decreases M(K, H) to the Hermitian–Einstein metric";
    let g = grid(p)?;
    let m = torus_try!(build_model_bundle(need(&p.rank, "rank")?, need(&p.degree, "degree")?, &g), ANCHOR, "build");
    let mut rng = ChaCha8Rng::seed_from_u64(need(&p.seed, "seed")?);
    let k0 = random_metric(&m.metric, &mut rng, need(&p.modes, "modes")?, need(&p.bound, "bound")?);
    let tol = need(&p.tol, "tol")?;
    let cfg = FlowConfig {
        step: need(&p.step, "step")?,
        max_iter: need(&p.max_iter, "max_iter")?,
        tol,
        preconditioner: need(&p.precond, "precond")?,
        ..FlowConfig::default()
    };
    let out = match donaldson_flow(&m.connection, &k0, &cfg) {
        Ok(o) => o,
        Err(TorusError::Diverged {
            iterations,
            residual,
            history,
        }) => {
            return Ok(failed(
                ANCHOR,
                "flow",
                format!("diverged after {iterations} iterations, residual {residual:e}"),
                json!({ "history": history }),
            ))
        }
        Err(e) if torus_input(&e) => return Err(input(e)),
        Err(e) => return Ok(failed(ANCHOR, "flow", e, Value::Null)),
    };
    let monotone = out.monotone(1e-10);
    dump(out.metric.field(), csv)?;
    let last_m = out.history.last().map(|s| s.functional);
    Ok(Outcome {
        anchor: ANCHOR,
        outputs: json!({
            "iterations": out.iterations(),
            "functional": last_m,
            "history": out.history,
        }),
        residuals: json!({ "he_residual": out.residual }),
        verdicts: vec![
            check("he_residual < tol", out.converged && out.residual < tol, format!("{:e} vs {tol:e}", out.residual)),
            check("M non-increasing", monotone, "accepted steps"),
        ],
    })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn coulomb(p: &Params) -> Result<Outcome, CliError> {
    const ANCHOR: &str = "d*A = 0 in Q, ι_νA = 0 on ∂Q, and ‖A‖_{W^{1,2}} ≤ C‖F_A‖_{L²} for small curvature";
    let rank = need(&p.rank, "rank")?;
    let n = need(&p.n, "N")?;
    let seed = need(&p.seed, "seed")?;
    let samples = need(&p.samples, "samples")?;
    let tol = need(&p.tol, "tol")?;
    if samples == 0 {
        return Err(CliError::Value {
            key: "samples".into(),
            value: "0".into(),
            msg: "need at least one sample".into(),
        });
    }
    let cfg = CoulombConfig {
        tol: tol * 1e-2,
        max_iter: need(&p.max_iter, "max_iter")?,
        ..CoulombConfig::default()
    };
    let (eps, gauge) = (need(&p.eps, "eps")?, need(&p.gauge, "gauge")?);
    let mut records: Vec<CoulombRecord> = Vec::with_capacity(samples);
    for k in 0..samples as u64 {
        match coulomb_experiment(seed + k, rank, n, eps, gauge, &cfg) {
            Ok(r) => records.push(r),
            Err(e @ (CoulombError::BadGrid { .. } | CoulombError::ZeroRank)) => return Err(input(e)),
            Err(e) => {
                return Ok(failed(
                    ANCHOR,
                    "coulomb_fix",
                    format!("seed {}: {e}", seed + k),
                    json!({ "records": records }),
                ))
            }
        }
    }
    let ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    let med = median(&ratios);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let d_star = records.iter().map(|r| r.d_star_residual).fold(0.0, f64::max);
    let boundary = records.iter().map(|r| r.boundary_residual).fold(0.0, f64::max);
    Ok(Outcome {
        anchor: ANCHOR,
        outputs: json!({
            "records": records,
            "ratio_median": med,
            "ratio_max": max,
            "max_over_median": max / med,
        }),
        residuals: json!({ "d_star": d_star, "boundary": boundary }),
        verdicts: vec![
            check("d* residual < tol", d_star < tol, format!("{d_star:e} vs {tol:e}")),
            check("boundary residual < tol", boundary < tol, format!("{boundary:e} vs {tol:e}")),
            check("max/median ratio < 5", max / med < 5.0, format!("{:.4}", max / med)),
        ],
    })
}

fn density(p: &Params) -> Result<Outcome, CliError> {
    let digit = need(&p.digit, "digit")?;
    let est = gauss_digit_density(
        need(&p.samples, "samples")?,
        need(&p.depth, "depth")?,
        digit,
        need(&p.parity, "parity")?,
        need(&p.seed, "seed")?,
        need(&p.burn_in, "burn_in")?,
    );
    let k = need(&p.tol, "tol")?;
    let (pass, detail, z) = match (est.empirical, est.standard_error) {
        (Some(e), Some(se)) if se > 0.0 => {
            let z = (e - est.reference).abs() / se;
            (z <= k, format!("{z:.3} standard errors (limit {k})"), Some(z))
        }
        _ => (false, "no positions counted".to_string(), None),
    };
    Ok(Outcome {
        anchor: "Gauss measure of {a_n = k} is log₂((k+1)²/(k(k+2))), at positions of either parity",
        outputs: json!(est),
        residuals: json!({ "z": z }),
        verdicts: vec![check("within tolerance", pass, detail)],
    })
}
