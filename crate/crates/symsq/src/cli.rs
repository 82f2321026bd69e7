//! The `symsq` command line: argument parsing, run configuration, corpus
//! lookup and deterministic JSON reports.
//!
//! Exit codes: 0 on success, 1 on usage or data errors, 2 when a checked
//! identity fails.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::characters::{base_change_gauss_check, embed_cyclo_padic, DirichletCharacter};
use crate::eigendata::{fetch_remote, load_eigendata, NewformData};
use crate::exact::{q_frac, q_int, Cyclo, Scalar};
use crate::iwasawa::{
    a_char_series_int, bernoulli_chi, correction_residual, euler_series_crosscheck, euler_series_one_var,
    euler_series_two_var, is_zero_series, kubota_leopoldt, primitive_correction, EulerSeries, Sign,
};
use crate::lfun::{
    completed_l, functional_equation_residual, hecke_fe_residual, route_b, sym2_euler_factor, sym2_imprimitive_series,
};
use crate::padic::PrecisionBudget;
use crate::qexpansion::{eisenstein_coeffs, rankin_check, theta_coeffs, theta_shift_check};
use crate::trivial_zero::{
    base_change_order, derivative_prediction, l_invariant_report, trivial_zero_report, TwistPoint,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "symsq",
    version,
    about = "Symmetric-square L-functions: exact identities, Iwasawa series and trivial zeros"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct GlobalArgs {
    /// p-adic digits.
    #[arg(long, global = true)]
    pub digits: Option<u32>,
    /// Power-series terms.
    #[arg(long, global = true)]
    pub terms: Option<usize>,
    #[arg(long, global = true)]
    pub float_bits: Option<u32>,
    /// Corpus directory; defaults to $SYMSQ_CORPUS, then ./corpus.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// TOML file with the same fields as the embedded run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the inner parallel loops.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Print a flattened key/value table instead of JSON.
    #[arg(long, global = true)]
    pub table: bool,
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum QexpKind {
    Theta,
    Eisenstein,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an eigendata file and report its local types and checksum.
    Ingest {
        file: Option<PathBuf>,
        #[arg(long)]
        fetch: Option<String>,
    },
    /// Theta or holomorphic Eisenstein q-expansion.
    Qexp {
        kind: QexpKind,
        #[arg(long = "char", default_value = "trivial")]
        chi: String,
        #[arg(long, default_value_t = 100)]
        bound: u64,
        /// Weight parameter κ of the Eisenstein series (weight κ + 1/2).
        #[arg(long, default_value_t = 2)]
        kappa: u32,
        /// Level parameter c of the Eisenstein series.
        #[arg(long, default_value_t = 4)]
        level: u64,
    },
    /// Rankin identity D(θ(χ)) = 2𝓛/L_N to the given bound.
    RankinCheck {
        #[arg(long)]
        form: String,
        #[arg(long = "char", default_value = "trivial")]
        chi: String,
        #[arg(long, default_value_t = 200)]
        bound: u64,
    },
    /// Theta-shift identity for a character made imprimitive at p.
    ThetaShiftCheck {
        #[arg(long)]
        form: String,
        #[arg(long = "char", default_value = "trivial")]
        chi: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 200)]
        bound: u64,
    },
    /// Local Euler factors and the Euler-product/λ(T(n²)) route comparison.
    EulerFactors {
        #[arg(long)]
        form: String,
        #[arg(long = "char", default_value = "trivial")]
        chi: String,
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        bound: u64,
    },
    /// Completed L-value of Sym² f ⊗ χ by the smoothed functional equation.
    Lvalue {
        #[arg(long)]
        form: String,
        #[arg(long = "char", default_value = "trivial")]
        chi: String,
        #[arg(long, default_value = "2")]
        s: String,
        #[arg(long)]
        check_fe: bool,
    },
    /// Functional-equation residuals of a Dirichlet L-function.
    HeckeFe {
        #[arg(long = "char")]
        chi: String,
        #[arg(long, value_delimiter = ';')]
        s: Vec<String>,
    },
    /// Kubota–Leopoldt series on a branch.
    Kl {
        #[arg(long = "char", default_value = "trivial")]
        chi: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        branch: i64,
        /// Compare with generalized Bernoulli numbers at n = 0..4.
        #[arg(long)]
        check: bool,
    },
    /// Euler-factor series ℰ_q^± at a bad prime.
    EulerSeries {
        #[arg(long)]
        form: String,
        #[arg(long = "char", default_value = "trivial")]
        chi: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: String,
        /// Also build the two-variable series with this many Y terms.
        #[arg(long)]
        two_var: Option<usize>,
        #[arg(long)]
        check: bool,
    },
    /// F = G·∏ℰ_q⁺(X)^{−1} for the Kubota–Leopoldt series G.
    PrimitiveCorrection {
        #[arg(long)]
        form: String,
        #[arg(long = "char", default_value = "quad:-4")]
        chi: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        branch: i64,
        #[arg(long)]
        allow_poles: bool,
    },
    /// E₁ factors and the predicted order g at p.
    TrivialZero {
        #[arg(long)]
        form: String,
        #[arg(long)]
        p: u64,
        #[arg(long = "char", default_value = "trivial")]
        chi: String,
        #[arg(long)]
        s: Option<i64>,
    },
    /// Tate period and L-invariant of a curve with multiplicative reduction.
    Linvariant {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        p: u64,
    },
    /// Assembled derivative prediction at a Steinberg prime.
    PredictDerivative {
        #[arg(long)]
        form: String,
        #[arg(long)]
        p: u64,
        #[arg(long = "char", default_value = "trivial")]
        chi: String,
    },
    /// Order-g base-change product and the Gauss-sum discrepancy.
    BaseChange {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        f: u64,
        #[arg(long = "char")]
        chi: Option<String>,
        #[arg(long)]
        d: Option<i64>,
    },
    /// Exact-identity suite over the corpus.
    Selftest {
        #[arg(long)]
        quick: bool,
    },
}

/// Settings read from a TOML file; command-line flags take precedence.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub budget: Option<BudgetConfig>,
    pub corpus_dir: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub padic_digits: Option<u32>,
    pub series_terms: Option<usize>,
    pub float_bits: Option<u32>,
}

/// Embedded in every report. The thread count is deliberately absent so
/// that reports do not depend on it.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub budget: PrecisionBudget,
    pub corpus_dir: String,
    pub endpoint: Option<String>,
    pub output: Option<String>,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl<E: std::fmt::Display> From<E> for CliError
where
    E: std::error::Error,
{
    fn from(e: E) -> Self {
        CliError::Data(e.to_string())
    }
}

struct Ctx {
    budget: PrecisionBudget,
    corpus: PathBuf,
    endpoint: Option<String>,
}

impl Ctx {
    fn form(&self, name: &str) -> Result<NewformData, CliError> {
        let direct = PathBuf::from(name);
        let candidates = [
            direct.clone(),
            self.corpus.join(name),
            self.corpus.join(format!("{name}.json")),
        ];
        for c in &candidates {
            if c.is_file() {
                return Ok(load_eigendata(c)?);
            }
        }
        if let Some(ep) = &self.endpoint {
            return Ok(fetch_remote(name.trim_end_matches(".json"), ep)?);
        }
        Err(CliError::Data(format!(
            "eigendata '{name}' not found (corpus {})",
            self.corpus.display()
        )))
    }
}

fn character(spec: &str) -> Result<DirichletCharacter, CliError> {
    DirichletCharacter::parse_spec(spec).map_err(|e| CliError::Usage(e.to_string()))
}

/// Parses `a`, `a+bi`, `a-bi` or `bi`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Usage(format!("cannot parse complex number '{s}'"));
    if let Some(body) = t.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| (c == '+' || c == '-') && !body[..i].ends_with(['e', 'E']))
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        Ok(Complex64::new(
            re.parse().map_err(|_| bad())?,
            im.parse().map_err(|_| bad())?,
        ))
    } else {
        Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn params(cmd: &Command) -> (String, BTreeMap<String, Value>) {
    let dbg = format!("{cmd:?}");
    let name = dbg.split([' ', '{']).next().unwrap_or("").to_string();
    let mut out = BTreeMap::new();
    let v = match cmd {
        Command::Ingest { file, fetch } => {
            json!({"file": file.as_ref().map(|p| p.display().to_string()), "fetch": fetch})
        }
        Command::Qexp {
            kind,
            chi,
            bound,
            kappa,
            level,
        } => {
            json!({"kind": format!("{kind:?}").to_lowercase(), "char": chi, "bound": bound, "kappa": kappa, "level": level})
        }
        Command::RankinCheck { form, chi, bound } => json!({"form": form, "char": chi, "bound": bound}),
        Command::ThetaShiftCheck { form, chi, p, bound } => json!({"form": form, "char": chi, "p": p, "bound": bound}),
        Command::EulerFactors {
            form,
            chi,
            primes,
            bound,
        } => json!({"form": form, "char": chi, "primes": primes, "bound": bound}),
        Command::Lvalue { form, chi, s, check_fe } => json!({"form": form, "char": chi, "s": s, "check_fe": check_fe}),
        Command::HeckeFe { chi, s } => json!({"char": chi, "s": s}),
        Command::Kl { chi, p, branch, check } => json!({"char": chi, "p": p, "branch": branch, "check": check}),
        Command::EulerSeries {
            form,
            chi,
            q,
            p,
            sign,
            two_var,
            check,
        } => {
            json!({"form": form, "char": chi, "q": q, "p": p, "sign": sign, "two_var": two_var, "check": check})
        }
        Command::PrimitiveCorrection {
            form,
            chi,
            p,
            branch,
            allow_poles,
        } => {
            json!({"form": form, "char": chi, "p": p, "branch": branch, "allow_poles": allow_poles})
        }
        Command::TrivialZero { form, p, chi, s } => json!({"form": form, "p": p, "char": chi, "s": s}),
        Command::Linvariant { curve, p } => json!({"curve": curve, "p": p}),
        Command::PredictDerivative { form, p, chi } => json!({"form": form, "p": p, "char": chi}),
        Command::BaseChange { n, f, chi, d } => json!({"n": n, "f": f, "char": chi, "d": d}),
        Command::Selftest { quick } => json!({"quick": quick}),
    };
    if let Value::Object(m) = v {
        out.extend(m);
    }
    let kebab: String = name
        .chars()
        .enumerate()
        .flat_map(|(i, c)| {
            if c.is_uppercase() && i > 0 {
                vec!['-', c.to_ascii_lowercase()]
            } else {
                vec![c.to_ascii_lowercase()]
            }
        })
        .collect();
    (kebab, out)
}

/// Outcome of a subcommand: the result section and whether its checks passed.
struct Outcome {
    result: Value,
    provenance: &'static str,
    passed: bool,
    failure: Option<String>,
}

impl Outcome {
    fn ok(result: Value, provenance: &'static str) -> Self {
        Outcome {
            result,
            provenance,
            passed: true,
            failure: None,
        }
    }

    fn check(result: Value, provenance: &'static str, failure: Option<String>) -> Self {
        Outcome {
            result,
            provenance,
            passed: failure.is_none(),
            failure,
        }
    }
}

fn json_of<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn cyclo_json(c: &Cyclo) -> Value {
    Value::String(c.to_string())
}

fn run_command(cmd: &Command, ctx: &Ctx) -> Result<Outcome, CliError> {
    let budget = &ctx.budget;
    let digits = budget.padic_digits as i64;
    match cmd {
        Command::Ingest { file, fetch } => {
            let (f, source, bytes) = match (file, fetch) {
                (Some(path), None) => {
                    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                    (load_eigendata(path)?, path.display().to_string(), Some(bytes))
                }
                (None, Some(label)) => {
                    let ep = ctx
                        .endpoint
                        .as_ref()
                        .ok_or_else(|| CliError::Usage("--fetch requires --endpoint".into()))?;
                    (fetch_remote(label, ep)?, format!("{ep}/{label}"), None)
                }
                _ => return Err(CliError::Usage("give exactly one of <file> or --fetch".into())),
            };
            let mut local = BTreeMap::new();
            for q in f.bad_primes() {
                let lt = f.classify_local_type(q)?;
                local.insert(
                    q.to_string(),
                    json!({"kind": format!("{:?}", lt.kind), "subcase": format!("{:?}", lt.subcase), "a_q": lt.a_q.to_string()}),
                );
            }
            let mut checksum = json!(null);
            let mut failure = None;
            if let (Some(bytes), Some(path)) = (&bytes, file) {
                let digest = hex(&Sha256::digest(bytes));
                let sums = path.parent().unwrap_or(Path::new(".")).join("SHA256SUMS");
                let name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().to_string())
                    .unwrap_or_default();
                let listed = std::fs::read_to_string(&sums).ok().and_then(|t| {
                    t.lines()
                        .filter_map(|l| l.split_once("  "))
                        .find(|(_, n)| n.trim() == name)
                        .map(|(h, _)| h.to_string())
                });
                if let Some(h) = &listed {
                    if h != &digest {
                        failure = Some(format!("checksum mismatch for {name}"));
                    }
                }
                checksum = json!({"sha256": digest, "listed": listed});
            }
            Ok(Outcome::check(
                json!({
                    "source": source,
                    "label": f.label,
                    "level": f.level,
                    "weight": f.weight,
                    "nebentypus": f.psi.spec_string(),
                    "ap_bound": f.ap_bound,
                    "bad_primes": f.bad_primes(),
                    "local_types": local,
                    "curve": f.curve,
                    "checksum": checksum,
                }),
                "exact",
                failure,
            ))
        }
        Command::Qexp {
            kind,
            chi,
            bound,
            kappa,
            level,
        } => {
            let chi = character(chi)?;
            let q = match kind {
                QexpKind::Theta => theta_coeffs(&chi, chi.parity(), *bound)?,
                QexpKind::Eisenstein => eisenstein_coeffs(*kappa, &chi, *level, *bound)?,
            };
            Ok(Outcome::ok(q.to_json(), "exact"))
        }
        Command::RankinCheck { form, chi, bound } => {
            let f = ctx.form(form)?;
            let r = rankin_check(&f, &character(chi)?, *bound)?;
            let failure = r
                .first_discrepancy
                .map(|n| format!("Rankin identity fails first at index {n}"));
            Ok(Outcome::check(
                json!({"form": f.label, "bound": r.bound, "first_discrepancy": r.first_discrepancy, "discrepancies": usize::from(r.first_discrepancy.is_some())}),
                "exact",
                failure,
            ))
        }
        Command::ThetaShiftCheck { form, chi, p, bound } => {
            let f = ctx.form(form)?;
            let r = theta_shift_check(&f, &character(chi)?, *p, *bound)?;
            let failure = r
                .discrepancy
                .or(r.theta_decomposition_discrepancy)
                .map(|n| format!("theta-shift identity fails first at index {n}"));
            Ok(Outcome::check(
                json!({
                    "form": f.label,
                    "p": r.p,
                    "bound": r.bound,
                    "factor_present": r.factor_present,
                    "stabilized": r.stabilized,
                    "theta_decomposition_discrepancy": r.theta_decomposition_discrepancy,
                    "discrepancy": r.discrepancy,
                    "reversed_discrepancy": r.reversed_discrepancy,
                }),
                "exact",
                failure,
            ))
        }
        Command::EulerFactors {
            form,
            chi,
            primes,
            bound,
        } => {
            let f = ctx.form(form)?;
            let chi = character(chi)?;
            let primes = if primes.is_empty() {
                let mut v = f.bad_primes();
                v.extend(crate::arith::primes_up_to(20).into_iter().filter(|q| !f.is_bad(*q)));
                v.sort_unstable();
                v
            } else {
                primes.clone()
            };
            let factors: Vec<Value> = primes
                .iter()
                .map(|&q| {
                    let e = sym2_euler_factor(&f, q, &chi)?;
                    Ok(json!({
                        "q": q,
                        "tag": format!("{:?}", e.tag),
                        "coeffs": e.coeffs.iter().map(cyclo_json).collect::<Vec<_>>(),
                        "provenance": "exact",
                    }))
                })
                .collect::<Result<_, CliError>>()?;
            let a = sym2_imprimitive_series(&f, &chi, *bound)?;
            let b = route_b(&f, &chi, *bound)?;
            let diff = a.first_difference(&b);
            Ok(Outcome::check(
                json!({"form": f.label, "factors": factors, "route_bound": bound, "route_first_difference": diff}),
                "exact",
                diff.map(|n| format!("Euler-product and λ(T(n²)) routes differ first at index {n}")),
            ))
        }
        Command::Lvalue { form, chi, s, check_fe } => {
            let f = ctx.form(form)?;
            let chi = character(chi)?;
            let s = parse_complex(s)?;
            let v = completed_l(&f, &chi, s)?;
            let residual = if *check_fe {
                Some(functional_equation_residual(&f, &chi, s)?)
            } else {
                None
            };
            let float = format!("float({})", 53);
            Ok(Outcome::ok(
                json!({
                    "form": f.label,
                    "s": [v.s_re, v.s_im],
                    "value": [v.re, v.im],
                    "error_bound": v.error_bound,
                    "gamma": [v.gamma_re, v.gamma_im],
                    "epsilon": v.epsilon,
                    "conductor": v.conductor,
                    "terms": v.terms,
                    "residual": residual,
                    "number_provenance": float,
                }),
                "float(53)",
            ))
        }
        Command::HeckeFe { chi, s } => {
            let chi = character(chi)?;
            if !chi.is_primitive() {
                return Err(CliError::Usage("hecke-fe needs a primitive character".into()));
            }
            let points: Vec<Complex64> = if s.is_empty() {
                default_hecke_points()
            } else {
                s.iter().map(|x| parse_complex(x)).collect::<Result<_, _>>()?
            };
            let res: Vec<f64> = points
                .iter()
                .map(|&z| hecke_fe_residual(&chi, z))
                .collect::<Result<_, _>>()?;
            let worst = res.iter().cloned().fold(0.0f64, f64::max);
            let rows: Vec<Value> = points
                .iter()
                .zip(&res)
                .map(|(z, r)| json!({"s": [z.re, z.im], "residual": r}))
                .collect();
            Ok(Outcome::check(
                json!({"character": chi.spec_string(), "conductor": chi.conductor(), "points": rows, "max_residual": worst}),
                "float(53)",
                (worst >= 1e-10).then(|| format!("functional-equation residual {worst:e} exceeds 1e-10")),
            ))
        }
        Command::Kl { chi, p, branch, check } => {
            let chi = character(chi)?;
            let kl = kubota_leopoldt(&chi, *branch, *p, budget)?;
            let mut out = json_of(&kl.series.dump());
            out["c"] = json!(kl.c);
            let mut failure = None;
            if *check {
                let mut rows = Vec::new();
                for n in 0..=4i64 {
                    let got = kl.interpolated_value(n)?;
                    let theta = chi
                        .mul(&DirichletCharacter::teichmuller_power(*p, *branch - n - 1))
                        .primitive_part();
                    let b = bernoulli_chi(&theta, (n + 1) as usize).scale(&q_frac(-1, n + 1));
                    let e = Cyclo::int(1).minus(&theta.value(*p as i64).scale(&q_int(*p as i64).pow(n as i32)));
                    let want = embed_cyclo_padic(&e.times(&b), *p, digits + 4)
                        .ok_or_else(|| CliError::Data("Bernoulli value does not embed".into()))?;
                    let ok = kl.odd || got.agrees(&want, digits);
                    if !ok && failure.is_none() {
                        failure = Some(format!("interpolation fails at n = {n}"));
                    }
                    rows.push(json!({"n": n, "series": got.to_string(), "bernoulli": want.with_precision(digits).to_string(), "agrees": ok}));
                }
                out["interpolation"] = Value::Array(rows);
            }
            Ok(Outcome::check(out, "padic", failure))
        }
        Command::EulerSeries {
            form,
            chi,
            q,
            p,
            sign,
            two_var,
            check,
        } => {
            let f = ctx.form(form)?;
            let chi = character(chi)?;
            let sign = Sign::parse(sign).ok_or_else(|| CliError::Usage(format!("sign must be + or -, got {sign}")))?;
            let e = euler_series_one_var(&f, &chi, *q, sign, *p, budget)?;
            let mut out = json!({
                "form": f.label,
                "q": q,
                "sign": e.sign,
                "factors": e.factors,
                "series": e.series.dump(),
                "flags": e.flags,
            });
            let mut failure = None;
            if let Some(yt) = two_var {
                let t = euler_series_two_var(&f, &chi, *q, sign, *p, budget, *yt)?;
                let spec = t.specialize_y(f.m() as i64)?;
                let consistent = spec.agrees(&e.series, digits, e.series.terms());
                if !consistent {
                    failure = Some("two-variable series does not specialize to the one-variable series".into());
                }
                out["two_var"] = json!({
                    "x_terms": t.x_terms(),
                    "y_terms": t.y_terms(),
                    "factors": t.factors,
                    "delta_divisor": t.delta_divisor,
                    "excluded_points": t.excluded_points,
                    "specialization_consistent": consistent,
                });
            }
            if *check && sign == Sign::Plus {
                let mut rows = Vec::new();
                for n in 0..3 {
                    let c = euler_series_crosscheck(&f, &chi, *q, *p, n, budget)?;
                    if !c.matches && failure.is_none() {
                        failure = Some(format!("series and Euler-factor ratio differ at n = {n}"));
                    }
                    rows.push(json_of(&c));
                }
                out["crosscheck"] = Value::Array(rows);
            }
            Ok(Outcome::check(out, "padic", failure))
        }
        Command::PrimitiveCorrection {
            form,
            chi,
            p,
            branch,
            allow_poles,
        } => {
            let f = ctx.form(form)?;
            let chi = character(chi)?;
            let g = kubota_leopoldt(&chi, *branch, *p, budget)?.series;
            let factors: Vec<EulerSeries> = f
                .bad_primes()
                .into_iter()
                .filter(|q| q != p)
                .map(|q| euler_series_one_var(&f, &DirichletCharacter::trivial(1), q, Sign::Plus, *p, budget))
                .collect::<Result<_, _>>()?;
            let corrected = primitive_correction(&g, &factors, *allow_poles)?;
            let residual = correction_residual(&corrected, &factors, &g)?;
            let exact = is_zero_series(&residual);
            Ok(Outcome::check(
                json!({"form": f.label, "g": g.dump(), "f": corrected.dump(), "round_trip_exact": exact}),
                "padic",
                (!exact).then(|| "F·∏ℰ⁺ differs from G".to_string()),
            ))
        }
        Command::TrivialZero { form, p, chi, s } => {
            let f = ctx.form(form)?;
            let pt = TwistPoint::new(s.unwrap_or(f.m() as i64), character(chi)?);
            let r = trivial_zero_report(&f, &pt, *p, budget)?;
            let failure =
                (!r.routes_agree).then(|| "formula and classification disagree on the trivial zero".to_string());
            Ok(Outcome::check(json_of(&r), "padic", failure))
        }
        Command::Linvariant { curve, p } => {
            let f = ctx.form(curve)?;
            let r = l_invariant_report(&f, *p, budget)?;
            let stable = r.stable_digits >= digits.min(15);
            let failure = if !r.nonzero {
                Some("L-invariant vanishes at this precision".to_string())
            } else if !stable {
                Some(format!("L-invariant stable to only {} digits", r.stable_digits))
            } else {
                None
            };
            Ok(Outcome::check(json_of(&r), "padic", failure))
        }
        Command::PredictDerivative { form, p, chi } => {
            let f = ctx.form(form)?;
            let r = derivative_prediction(&f, *p, &character(chi)?, budget)?;
            Ok(Outcome::ok(json_of(&r), "padic"))
        }
        Command::BaseChange { n, f, chi, d } => {
            let r = base_change_order(*n, *f)?;
            let mut out = json!({"order": r});
            let mut failure =
                (!out["order"]["holds"].as_bool().unwrap_or(false)).then(|| "product differs from f^g".to_string());
            match (chi, d) {
                (Some(c), Some(d)) => {
                    let g = base_change_gauss_check(&character(c)?, *d)?;
                    if !g.root_order.is_some_and(|o| o <= 8) && failure.is_none() {
                        failure = Some("Gauss-sum discrepancy is not a root of unity of order at most 8".into());
                    }
                    out["gauss"] = json_of(&g);
                }
                (None, None) => {}
                _ => return Err(CliError::Usage("--char and --d go together".into())),
            }
            Ok(Outcome::check(out, "exact", failure))
        }
        Command::Selftest { quick } => selftest(ctx, *quick),
    }
}

pub fn default_hecke_points() -> Vec<Complex64> {
    vec![
        Complex64::new(0.5, 14.0),
        Complex64::new(0.3, 2.0),
        Complex64::new(2.0, 0.5),
        Complex64::new(-1.5, 0.7),
        Complex64::new(0.8, -5.0),
    ]
}

fn selftest(ctx: &Ctx, quick: bool) -> Result<Outcome, CliError> {
    let bound = if quick { 60 } else { 200 };
    let forms = ["11a", "14a", "15a"];
    let chars = ["trivial", "quad:-3", "quad:-4"];
    let cases: Vec<(&str, &str)> = forms.iter().flat_map(|f| chars.iter().map(move |c| (*f, *c))).collect();
    let loaded: BTreeMap<&str, NewformData> = forms
        .iter()
        .map(|f| Ok((*f, ctx.form(f)?)))
        .collect::<Result<_, CliError>>()?;
    let rows: Vec<Value> = cases
        .par_iter()
        .map(|(label, spec)| -> Result<Value, CliError> {
            let f = &loaded[label];
            let chi = character(spec)?;
            let a = sym2_imprimitive_series(f, &chi, bound)?;
            let b = route_b(f, &chi, bound)?;
            let r = rankin_check(f, &chi, bound)?;
            Ok(json!({
                "form": label,
                "char": spec,
                "routes_first_difference": a.first_difference(&b),
                "rankin_first_discrepancy": r.first_discrepancy,
            }))
        })
        .collect::<Result<_, _>>()?;
    let mut failure = rows
        .iter()
        .find(|r| !r["routes_first_difference"].is_null() || !r["rankin_first_discrepancy"].is_null())
        .map(|r| format!("identity fails for {} with {}", r["form"], r["char"]));
    let bc: Vec<Value> = (1..=12u64)
        .flat_map(|n| (1..=n).filter(move |f| n % f == 0).map(move |f| (n, f)))
        .map(|(n, f)| base_change_order(n, f).map(|r| json!([n, f, r.holds])))
        .collect::<Result<_, _>>()?;
    if failure.is_none() && bc.iter().any(|r| r[2] == json!(false)) {
        failure = Some("base-change product identity fails".into());
    }
    let small = PrecisionBudget::new(10, 10, 53);
    let mut hom = true;
    for p in [5u64, 7] {
        let lhs = a_char_series_int(2, p, &small)?.mul(&a_char_series_int(3, p, &small)?);
        hom &= lhs.agrees(&a_char_series_int(6, p, &small)?, 10, 10);
    }
    if failure.is_none() && !hom {
        failure = Some("A_z homomorphism fails".into());
    }
    Ok(Outcome::check(
        json!({"bound": bound, "identities": rows, "base_change": bc, "a_series_homomorphism": hom}),
        "exact",
        failure,
    ))
}

/// Flattens a JSON value into `path = value` lines.
pub fn table(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&p, x, out);
                }
            }
            Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, x)| format!("{k:<w$}  {x}\n")).collect()
}

fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn default_corpus() -> PathBuf {
    let local = PathBuf::from("corpus");
    if local.is_dir() {
        return local;
    }
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Runs the CLI on the given arguments, writing to the given streams.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "usage error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Data(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let g = &cli.global;
    let file = match &g.config {
        Some(p) => load_file_config(p)?,
        None => FileConfig::default(),
    };
    let fb = file.budget.clone().unwrap_or_default();
    let defaults = PrecisionBudget::default();
    let digits = g.digits.or(fb.padic_digits).unwrap_or(defaults.padic_digits);
    let terms = g.terms.or(fb.series_terms).unwrap_or(defaults.series_terms);
    let bits = g.float_bits.or(fb.float_bits).unwrap_or(defaults.float_bits);
    if digits == 0 || terms == 0 || bits == 0 {
        return Err(CliError::Usage("precision parameters must be positive".into()));
    }
    let corpus = g
        .corpus
        .clone()
        .or_else(|| std::env::var_os("SYMSQ_CORPUS").map(PathBuf::from))
        .or(file.corpus_dir.clone())
        .unwrap_or_else(default_corpus);
    let ctx = Ctx {
        budget: PrecisionBudget::new(digits, terms, bits),
        corpus: corpus.clone(),
        endpoint: g.endpoint.clone().or(file.endpoint.clone()),
    };
    let output = g.out.clone().or(file.output.clone());
    let (command, parameters) = params(&cli.command);
    let config = RunConfig {
        budget: ctx.budget,
        corpus_dir: corpus.display().to_string(),
        endpoint: ctx.endpoint.clone(),
        output: output.as_ref().map(|p| p.display().to_string()),
        command,
        parameters,
    };
    let jobs = g.jobs.or(file.jobs).unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let outcome = pool.install(|| run_command(&cli.command, &ctx))?;
    let report = json!({
        "config": config,
        "provenance": outcome.provenance,
        "status": if outcome.passed { "pass" } else { "fail" },
        "failure": outcome.failure,
        "result": outcome.result,
    });
    let text = if g.table {
        table(&report)
    } else {
        let mut s = serde_json::to_string_pretty(&report).expect("serializable");
        s.push('\n');
        s
    };
    match &output {
        Some(path) => std::fs::write(path, &text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(e.to_string()))?,
    }
    Ok(if outcome.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn run() -> i32 {
    let out = std::io::stdout();
    let err = std::io::stderr();
    run_with(std::env::args_os(), &mut out.lock(), &mut err.lock())
}
