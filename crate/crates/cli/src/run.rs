//! Subcommand execution.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use dcubic::arith::{is_prime, primes_up_to};
use dcubic::cubes::{
    cone_check, identity_verify, r3, sigma1_double_count, singular_series, variance_report,
};
use dcubic::delta::{
    delta_identity_eval, verify_decay, CuspidalNu, DecayConfig, IdentityConfig, SmoothWeight,
};
use dcubic::dual::dual_form_value;
use dcubic::expsum::{exp_sum_with, ExpSumOptions, Method};
use dcubic::form::{parse_int_list, DiagonalCubicForm};
use dcubic::lfactor::{frobenius_data, is_good_prime, phi_local_coeffs};
use dcubic::pointcount::count_points_q;
use dcubic::sieve::{
    b3_second_moment, default_squarefull_grid, squarefull_stats, zero_density_check, IntPoly,
    SampleMode, DEFAULT_B3_GRID,
};

use crate::record::ExperimentRecord;
use crate::{exit, suites, Command, CubesTask, DeltaTask, MethodArg, Params, SieveTask};

pub struct Outcome {
    pub records: Vec<ExperimentRecord>,
    pub status: u8,
    pub error: Option<String>,
}

/// Collects records for one subcommand invocation.
pub struct Recorder {
    command: &'static str,
    base: BTreeMap<String, Value>,
    seed: Option<u64>,
    pub records: Vec<ExperimentRecord>,
}

impl Recorder {
    fn new(command: &'static str, params: &Params, extra: &impl Serialize) -> Self {
        let mut base = BTreeMap::new();
        let mut add = |v: Value| {
            if let Value::Object(o) = v {
                for (k, v) in o {
                    let empty = v.is_null() || v.as_array().is_some_and(|a| a.is_empty());
                    if !empty {
                        base.insert(k, v);
                    }
                }
            }
        };
        add(serde_json::to_value(params).expect("params serialize"));
        add(serde_json::to_value(extra).expect("selector serializes"));
        Self {
            command,
            base,
            seed: params.seed,
            records: Vec::new(),
        }
    }

    /// Runs one experiment and stores its record. `local` holds the
    /// per-experiment parameters (a modulus, a prime, ...).
    pub fn record<T: Serialize>(
        &mut self,
        operation: &str,
        local: &[(&str, Value)],
        f: impl FnOnce() -> dcubic::Result<(T, Option<bool>)>,
    ) -> Result<()> {
        let start = Instant::now();
        let mut params = self.base.clone();
        for (k, v) in local {
            params.insert(k.to_string(), v.clone());
        }
        let id = format!("{}/{:04}", self.command, self.records.len());
        let (result, pass, partial, err) = match f() {
            Ok((value, pass)) => (serde_json::to_value(value)?, pass, false, None),
            Err(e) => (
                serde_json::json!({ "error": e.to_string() }),
                None,
                true,
                Some(e),
            ),
        };
        self.records.push(ExperimentRecord {
            id,
            operation: format!("{}.{operation}", self.command),
            params,
            result,
            runtime_seconds: start.elapsed().as_secs_f64(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            pass,
            partial,
        });
        match err {
            Some(e) => Err(e.into()),
            None => Ok(()),
        }
    }
}

pub fn form(params: &Params, default: &str) -> Result<DiagonalCubicForm> {
    let s = params.form.as_deref().unwrap_or(default);
    s.parse().map_err(|e| anyhow!("--form: {e}"))
}

fn tuple(params: &Params, f: &DiagonalCubicForm) -> Result<Option<Vec<i64>>> {
    let Some(s) = &params.c else { return Ok(None) };
    let c = parse_int_list(s).map_err(|e| anyhow!("--c: {e}"))?;
    if c.len() != f.m() {
        bail!(
            "--c has {} entries but the form has {} variables",
            c.len(),
            f.m()
        );
    }
    Ok(Some(c))
}

fn required_tuple(params: &Params, f: &DiagonalCubicForm) -> Result<Vec<i64>> {
    tuple(params, f)?.context("--c is required")
}

/// `--p`, or every prime up to `--pmax`.
fn primes(params: &Params, default_max: u64) -> Result<Vec<u64>> {
    if let Some(p) = params.p {
        if !is_prime(p) {
            bail!("--p {p} is not prime");
        }
        return Ok(vec![p]);
    }
    Ok(primes_up_to(params.pmax.unwrap_or(default_max)))
}

fn moduli(params: &Params) -> Result<Vec<u64>> {
    if !params.n.is_empty() {
        return Ok(params.n.clone());
    }
    if let Some(nmax) = params.nmax {
        return Ok((1..=nmax).collect());
    }
    if let Some(p) = params.p {
        let levels = match (params.l, params.lmax) {
            (Some(l), _) => l..=l,
            (None, Some(lmax)) => 1..=lmax,
            (None, None) => 1..=1,
        };
        return Ok(levels.map(|l| p.pow(l)).collect());
    }
    bail!("give --n, --nmax or --p with --l/--lmax")
}

fn scales(params: &Params, default: &[f64]) -> Vec<f64> {
    if params.x.is_empty() {
        default.to_vec()
    } else {
        params.x.clone()
    }
}

fn ok<T>(v: T) -> dcubic::Result<(T, Option<bool>)> {
    Ok((v, None))
}

fn checked<T>(v: T, pass: bool) -> dcubic::Result<(T, Option<bool>)> {
    Ok((v, Some(pass)))
}

fn execute(cmd: &Command, params: &Params, rec: &mut Recorder) -> Result<()> {
    match cmd {
        Command::Expsum { method } => {
            let f = form(params, "fermat4")?;
            let c = required_tuple(params, &f)?;
            let mut opts = ExpSumOptions {
                method: match method {
                    MethodArg::Brute => Method::Brute,
                    MethodArg::Multiplicative => Method::Multiplicative,
                    MethodArg::Structural => Method::Structural,
                },
                ..ExpSumOptions::default()
            };
            if let Some(b) = params.budget {
                opts.budget = b;
            }
            for n in moduli(params)? {
                rec.record("exp_sum", &[("n", n.into())], || {
                    ok(exp_sum_with(&f, &c, n, opts)?)
                })?;
            }
        }
        Command::Disc => {
            let f = form(params, "fermat4")?;
            let c = required_tuple(params, &f)?;
            rec.record("dual_form", &[], || {
                let v = dual_form_value(&f, &c, None);
                let valuations: BTreeMap<String, Option<i64>> =
                    primes_up_to(params.pmax.unwrap_or(13))
                        .into_iter()
                        .map(|p| (p.to_string(), dcubic::dual::rational_valuation(p, &v.value)))
                        .collect();
                ok(serde_json::json!({
                    "value": v.value.to_string(),
                    "factor_count": v.factor_count,
                    "vanished": v.vanished,
                    "valuations": valuations,
                }))
            })?;
        }
        Command::Count => {
            let f = form(params, "fermat4")?;
            let c = tuple(params, &f)?;
            let r = params.r.unwrap_or(1);
            for p in primes(params, 7)? {
                rec.record("count_points", &[("p", p.into()), ("r", r.into())], || {
                    ok(count_points_q(&f, c.as_deref(), p, r)?)
                })?;
            }
        }
        Command::Lfactor => {
            let f = form(params, "fermat4")?;
            let c = required_tuple(params, &f)?;
            let r = params.r.unwrap_or(3);
            for p in primes(params, 13)? {
                if !is_good_prime(&f, &c, p) {
                    continue;
                }
                rec.record("local_factor", &[("p", p.into()), ("r", r.into())], || {
                    let fd = frobenius_data(&f, &c, p, r)?;
                    let phi = if f.m() % 2 == 0 {
                        Some(phi_local_coeffs(&f, &c, p)?)
                    } else {
                        None
                    };
                    let pass = fd.e2_is_one()
                        && fd.square_identity_holds()
                        && fd.newton_round_trip_holds();
                    checked(serde_json::json!({ "frobenius": fd, "phi": phi }), pass)
                })?;
            }
        }
        Command::Delta { task } => match task {
            DeltaTask::Identity => {
                let f = form(params, "1,1,-2")?;
                let w = SmoothWeight::bumps(&vec![1.0; f.m()], params.radius.unwrap_or(0.4));
                for x in scales(params, &[2.0]) {
                    rec.record("identity", &[("X", x.into())], || {
                        let r = delta_identity_eval(&f, &w, x, &IdentityConfig::default())?;
                        let pass = r.pass();
                        checked(r, pass)
                    })?;
                }
            }
            DeltaTask::Decay => {
                let f = form(params, "fermat4")?;
                let signs: Vec<f64> = (0..f.m())
                    .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
                    .collect();
                let w = SmoothWeight::bumps(&signs, params.radius.unwrap_or(0.6));
                rec.record("decay", &[], || {
                    let r = verify_decay(&f, &w, &DecayConfig::standard(vec![1; f.m()]))?;
                    let pass = r.pass();
                    checked(r, pass)
                })?;
            }
        },
        Command::Cubes { task } => match task {
            CubesTask::Series => {
                let m = params.m_level.unwrap_or(30);
                let mref = params.mref.unwrap_or(1000);
                rec.record("singular_series", &[], || {
                    let r = singular_series(m, mref)?;
                    let pass = r.fit.in_window();
                    checked(r, pass)
                })?;
            }
            CubesTask::Cone => {
                let b = params.b.unwrap_or(1_000_000);
                rec.record("cone", &[("B", b.into())], || {
                    let r = cone_check(b)?;
                    let pass = r.pass(0.02);
                    checked(r, pass)
                })?;
            }
            CubesTask::DoubleCount => {
                let nu = SmoothWeight::Cuspidal(CuspidalNu::default());
                for x in scales(params, &[4.0]) {
                    rec.record("double_count", &[("X", x.into())], || {
                        let (levels, pairs) = sigma1_double_count(&nu, x)?;
                        checked(
                            serde_json::json!({ "by_levels": levels, "by_pairs": pairs }),
                            levels == pairs,
                        )
                    })?;
                }
            }
            CubesTask::Variance => {
                let nu = SmoothWeight::Cuspidal(CuspidalNu::default());
                let m = params.m_level.unwrap_or(4);
                for x in scales(params, &[3.0]) {
                    rec.record("variance", &[("X", x.into())], || {
                        let r = variance_report(x, m, &nu)?;
                        let pass = r.double_count_holds();
                        checked(r, pass)
                    })?;
                }
            }
            CubesTask::R3 => {
                let a = params.b.context("--B gives the integer a")?;
                rec.record("r3", &[], || {
                    ok(serde_json::json!({
                        "a": a,
                        "ordered": r3(a, true)?,
                        "unordered": r3(a, false)?,
                    }))
                })?;
            }
            CubesTask::Identities => {
                let seed = params.seed.unwrap_or(0);
                rec.record("identities", &[], || {
                    let r = identity_verify(seed);
                    let pass = r.pass();
                    checked(r, pass)
                })?;
            }
        },
        Command::Sieve { task } => match task {
            SieveTask::Squarefull => {
                let f = form(params, "fermat4")?;
                let z = params.z.unwrap_or(20);
                let qs = if params.q.is_empty() {
                    default_squarefull_grid()
                } else {
                    params.q.clone()
                };
                let mode = match params.samples {
                    Some(samples) => SampleMode::Sampled {
                        seed: params.seed.unwrap_or(0),
                        samples,
                    },
                    None => SampleMode::Exhaustive,
                };
                rec.record("squarefull", &[], || {
                    let r = squarefull_stats(&f, z, &qs, mode)?;
                    let pass = r.pass();
                    checked(r, pass)
                })?;
            }
            SieveTask::B3 => {
                let f = form(params, "fermat4")?;
                let z = params.z.unwrap_or(10);
                let ns = if params.n.is_empty() {
                    DEFAULT_B3_GRID.to_vec()
                } else {
                    params.n.clone()
                };
                rec.record("b3", &[], || {
                    let r = b3_second_moment(&f, z, &ns)?;
                    let pass = r.pass();
                    checked(r, pass)
                })?;
            }
            SieveTask::ZeroDensity => {
                let coeffs = params.poly.as_deref().context("--poly is required")?;
                let poly = IntPoly(parse_int_list(coeffs).map_err(|e| anyhow!("--poly: {e}"))?);
                let lmax = params.lmax.unwrap_or(6);
                for p in primes(params, 7)? {
                    rec.record("zero_density", &[("p", p.into())], || {
                        let rows = zero_density_check(&poly, p, lmax, 1_000_000)?;
                        let pass = rows
                            .iter()
                            .all(|r| r.brute.is_none_or(|b| b == r.hensel) && r.fan_out_ok);
                        let c_f = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
                        checked(serde_json::json!({ "rows": rows, "c_f": c_f }), pass)
                    })?;
                }
            }
        },
        Command::Verify { suites: selected } => suites::run(selected, params, rec)?,
    }
    Ok(())
}

pub fn run(cmd: &Command, params: &Params) -> Outcome {
    let selector: Value = match cmd {
        Command::Expsum { method } => serde_json::json!({ "method": method }),
        Command::Delta { task } => serde_json::json!({ "task": task }),
        Command::Cubes { task } => serde_json::json!({ "task": task }),
        Command::Sieve { task } => serde_json::json!({ "task": task }),
        Command::Verify { suites } => serde_json::json!({ "suites": suites }),
        _ => serde_json::json!({}),
    };
    let mut rec = Recorder::new(cmd.name(), params, &selector);
    let result = execute(cmd, params, &mut rec);
    let failed = rec.records.iter().any(|r| r.pass == Some(false));
    let (status, error) = match result {
        Ok(()) => (if failed { exit::FAILED } else { exit::PASS }, None),
        Err(e) => {
            let status = match e.downcast_ref::<dcubic::Error>() {
                Some(dcubic::Error::Budget { .. }) => exit::BUDGET,
                Some(dcubic::Error::Precondition(_)) | Some(dcubic::Error::NotPrime(_)) | None => {
                    exit::USAGE
                }
                Some(_) => exit::FAILED,
            };
            (status, Some(format!("{e:#}")))
        }
    };
    Outcome {
        records: rec.records,
        status,
        error,
    }
}
