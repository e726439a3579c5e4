//! The `fqh` command line: argument parsing, verification suites and report
//! writers.  Exit codes: 0 success, 1 a verification failed, 2 bad usage or a
//! violated precondition.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cft_ops::{verify_algebra, weighted_norm, Arithmetic};
use crate::entanglement::{block_split, entanglement_gap_check, schmidt_spectrum};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, to_json};
use crate::observables::{clustering_scan, occupation_moments, Family};
use crate::oracle::{compare, expand_with_cap};
use crate::partitions::{partitions_of, Partition, Root};
use crate::renewal::{
    big_tolerance, geometric_toy, laughlin_system, pressure, renewal_report, RenewalReport, RenewalSystem,
};
use crate::wavefunction::{
    build_expansion_with_cap, c_constant, coefficient_bound_margin, delta_gamma_check, irreducible_norm_bound,
    supermultiplicativity, Geometry, DEFAULT_MAX_PARTITIONS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Resource caps, overridable through the environment.
#[derive(Clone, Debug, Serialize)]
pub struct Caps {
    /// FQH_MAX_PARTITIONS
    pub max_partitions: usize,
    /// FQH_ORACLE_MAX_N
    pub oracle_max_n: usize,
    /// FQH_ORACLE_MAX_Q
    pub oracle_max_q: u32,
    /// FQH_RENEWAL_EXACT_MAX: longest irreducible segment computed exactly.
    pub renewal_exact_max: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_partitions: DEFAULT_MAX_PARTITIONS,
            oracle_max_n: crate::oracle::MAX_N,
            oracle_max_q: crate::oracle::MAX_Q,
            renewal_exact_max: 8,
        }
    }
}

fn env_override<T: FromStr>(key: &str, slot: &mut T) -> Result<()> {
    if let Ok(v) = std::env::var(key) {
        *slot = v
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("{key}={v:?} is not a valid number")))?;
    }
    Ok(())
}

impl Caps {
    pub fn from_env() -> Result<Self> {
        let mut c = Caps::default();
        env_override("FQH_MAX_PARTITIONS", &mut c.max_partitions)?;
        env_override("FQH_ORACLE_MAX_N", &mut c.oracle_max_n)?;
        env_override("FQH_ORACLE_MAX_Q", &mut c.oracle_max_q)?;
        env_override("FQH_RENEWAL_EXACT_MAX", &mut c.renewal_exact_max)?;
        Ok(c)
    }
}

/// `--b zeros` or a comma-separated, weakly increasing list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BSpec {
    Zeros,
    Explicit(Vec<u32>),
}

impl FromStr for BSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "zeros" {
            return Ok(BSpec::Zeros);
        }
        s.split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| format!("b: {x:?} is not a nonnegative integer")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(BSpec::Explicit)
    }
}

impl fmt::Display for BSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BSpec::Zeros => write!(f, "zeros"),
            BSpec::Explicit(v) => {
                let s: Vec<String> = v.iter().map(u32::to_string).collect();
                write!(f, "{}", s.join(","))
            }
        }
    }
}

impl Serialize for BSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl BSpec {
    pub fn resolve(&self, n: usize) -> Result<Partition> {
        match self {
            BSpec::Zeros => Ok(Partition::zeros(n)),
            BSpec::Explicit(v) => Partition::new(v.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Planar,
    Cylinder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Oracle,
    Algebra,
    Bounds,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Toy {
    Geometric,
    Unit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Density,
    Hopping,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Density => Family::Density,
            FamilyArg::Hopping => Family::Hopping,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fqh", version, about = "Laughlin-type quantum Hall states from their iMPS representation")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Occupation-basis expansion of Ψ_{b,N}.
    Expand(ExpandArgs),
    /// Run verification suites; exit 1 if any check fails.
    Verify(VerifyArgs),
    /// Schmidt spectrum across an orbital cut.
    Entangle(EntangleArgs),
    /// Connected correlators against distance.
    Correlate(CorrelateArgs),
    /// Renewal radius, Feller limit and pressure.
    Renewal(RenewalArgs),
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct RootArgs {
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Comma-separated b, or `zeros`.
    #[arg(long, default_value = "zeros")]
    pub b: BSpec,
}

impl RootArgs {
    pub fn root(&self) -> Result<Root> {
        Root::new(self.q, self.n, self.b.resolve(self.n)?)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ExpandArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub root: RootArgs,
    #[arg(long, value_enum, default_value = "cylinder")]
    pub geometry: GeometryKind,
    #[arg(long, default_value_t = 5.0)]
    pub gamma: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "oracle")]
    pub suite: Suite,
    /// Largest Fock grade for the algebra suite.
    #[arg(long, default_value_t = 8)]
    pub mmax: usize,
    /// Mode indices m, k range over [−range, range].
    #[arg(long, default_value_t = 6)]
    pub range: i64,
    #[arg(long, default_value_t = 5.0)]
    pub gamma: f64,
    /// Largest N for the bounds suite.
    #[arg(long, default_value_t = 6)]
    pub nmax: usize,
    /// Extra random oracle roots beyond the fixed grid.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct EntangleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub root: RootArgs,
    #[arg(long, default_value_t = 5.0)]
    pub gamma: f64,
    /// Orbital cut: left = orbitals < cut.
    #[arg(long, conflicts_with = "cut_block")]
    pub cut: Option<u32>,
    /// Cut after this many root blocks.
    #[arg(long)]
    pub cut_block: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct CorrelateArgs {
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value = "zeros")]
    pub b: BSpec,
    #[arg(long, default_value_t = 5.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "density")]
    pub family: FamilyArg,
    /// Comma-separated distances.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
    pub distances: Vec<u32>,
}

#[derive(Args, Debug, Serialize)]
pub struct RenewalArgs {
    /// Closed-form system instead of the Laughlin feed.
    #[arg(long, value_enum)]
    pub toy: Option<Toy>,
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, default_value_t = 5.0)]
    pub gamma: f64,
    /// Number of α_n computed (exactly up to the renewal cap).
    #[arg(long, default_value_t = 12)]
    pub horizon: usize,
    #[arg(long, default_value_t = 12)]
    pub nmax: usize,
    /// Also report ln C_N / N for b = (0,…,0, suffix).
    #[arg(long, value_delimiter = ',')]
    pub suffix: Option<Vec<u32>>,
    #[arg(long, default_value_t = 10)]
    pub pressure_nmax: usize,
}

/// One line of a verification report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

/// The oracle grid: q ∈ {1,2,3}, N ∈ {2,3,4}, b ∈ {0, (0,…,0,1), (0,…,1,1), (0,…,0,2)}.
pub fn oracle_grid() -> Vec<Root> {
    let mut out = Vec::new();
    for q in 1..=3 {
        for n in 2..=4usize {
            let z = vec![0u32; n];
            let mut last1 = z.clone();
            last1[n - 1] = 1;
            let mut two1 = last1.clone();
            two1[n - 2] = 1;
            let mut last2 = z.clone();
            last2[n - 1] = 2;
            for b in [z, last1, two1, last2] {
                out.push(Root::new(q, n, Partition::new(b).expect("sorted")).expect("valid"));
            }
        }
    }
    out
}

/// Weakly increasing b of length n with |b| ≤ max_weight.
pub fn b_grid(n: usize, max_weight: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    for w in 0..=max_weight {
        for p in partitions_of(w) {
            if p.len() <= n {
                let mut v = vec![0; n - p.len()];
                v.extend_from_slice(p.parts());
                out.push(Partition::new(v).expect("sorted"));
            }
        }
    }
    out
}

fn oracle_check(root: &Root, caps: &Caps) -> Result<Vec<Check>> {
    let poly = expand_with_cap(root.q, root.n, &root.b, caps.oracle_max_n, caps.oracle_max_q)?;
    let rep = compare(&poly, root)?;
    let exp = build_expansion_with_cap(root, &Geometry::cylinder(1.0)?, caps.max_partitions)?;
    let (n, m) = occupation_moments(&exp)?;
    let weight = root.partition().weight() as f64;
    let name = format!("q={} N={} b={}", root.q, root.n, root.b);
    Ok(vec![
        Check {
            suite: "oracle",
            name: name.clone(),
            passed: rep.passed(),
            detail: json!({
                "coefficients_checked": rep.coefficients_checked,
                "mismatches": rep.mismatches.len(),
                "route_disagreements": rep.route_disagreements.len(),
            }),
        },
        Check {
            suite: "oracle",
            name: format!("conservation {name}"),
            passed: (n - root.n as f64).abs() <= 1e-10 && (m - weight).abs() <= 1e-10,
            detail: json!({ "particles": n, "momentum": m, "root_weight": weight }),
        },
    ])
}

pub fn oracle_suite(caps: &Caps, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut roots = oracle_grid();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..samples {
        let q = rng.gen_range(1..=3u32.min(caps.oracle_max_q));
        let n = rng.gen_range(2..=5usize.min(caps.oracle_max_n));
        let mut b: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        b.sort_unstable();
        roots.push(Root::new(q, n, Partition::new(b)?)?);
    }
    use rayon::prelude::*;
    let nested: Result<Vec<Vec<Check>>> = roots.par_iter().map(|r| oracle_check(r, caps)).collect();
    Ok(nested?.into_iter().flatten().collect())
}

pub fn algebra_suite(m_max: usize, range: i64) -> Vec<Check> {
    let mut out = Vec::new();
    for q in 1..=3 {
        let rep = verify_algebra(q, m_max, (-range, range), Arithmetic::Modular);
        out.push(Check {
            suite: "algebra",
            name: format!("identities q={q} M<={m_max} |m|,|k|<={range}"),
            passed: rep.passed(),
            detail: json!({
                "checks": rep.checks,
                "violations": rep.violations.len(),
                "worst_certificate_bits": rep.worst_certificate_bits,
                "certified": rep.certified,
            }),
        });
        let norms: Vec<f64> = (-range..=range).map(|m| weighted_norm(m, q, m_max)).collect();
        let worst = norms.iter().cloned().fold(0.0, f64::max);
        out.push(Check {
            suite: "algebra",
            name: format!("weighted norm q={q} M<={m_max}"),
            passed: worst <= 1.0 + 1e-9,
            detail: json!({ "max": worst, "by_m": norms }),
        });
    }
    out
}

pub fn bounds_suite(gamma: f64, n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let geo = Geometry::cylinder(gamma)?;
    for q in 1..=3u32 {
        let mut partitions = 0usize;
        let mut failures = Vec::new();
        let mut worst_margin = f64::NEG_INFINITY;
        for n in 1..=n_max {
            for b in b_grid(n, 4) {
                let root = Root::new(q, n, b)?;
                let rep = delta_gamma_check(&root)?;
                partitions += rep.partitions;
                if !rep.passed() {
                    failures.push(format!("N={n} b={}", root.b));
                }
                worst_margin = worst_margin.max(coefficient_bound_margin(&root)?);
            }
        }
        out.push(Check {
            suite: "bounds",
            name: format!("gamma<=delta and delta>=D q={q} N<={n_max} |b|<=4"),
            passed: failures.is_empty(),
            detail: json!({ "partitions": partitions, "failures": failures }),
        });
        out.push(Check {
            suite: "bounds",
            name: format!("coefficient bound q={q} N<={n_max} |b|<=4"),
            passed: worst_margin <= 1e-12,
            detail: json!({ "worst_ln_margin": worst_margin }),
        });
    }
    let c = c_constant(2, gamma);
    out.push(Check {
        suite: "bounds",
        name: format!("C_2({gamma}) > 0"),
        passed: c > 0.0,
        detail: json!({ "c": c }),
    });
    if c > 0.0 {
        let mut rows = Vec::new();
        for n in 1..=n_max {
            rows.push(irreducible_norm_bound(&Root::laughlin(2, n), gamma)?);
        }
        out.push(Check {
            suite: "bounds",
            name: format!("irreducible norm bound q=2 N<={n_max}"),
            passed: rows.iter().all(|r| r.holds()),
            detail: serde_json::to_value(&rows).expect("serializable"),
        });
    }
    let mut rows = Vec::new();
    for n in 2..=n_max {
        rows.extend(supermultiplicativity(&Root::laughlin(2, n), &geo)?);
    }
    out.push(Check {
        suite: "bounds",
        name: format!("supermultiplicativity q=2 b=0 N<={n_max}"),
        passed: rows.iter().all(|r| r.holds()),
        detail: json!({ "splits": rows.len() }),
    });
    Ok(out)
}

fn configure_threads(threads: Option<usize>) -> Result<usize> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Invalid("threads must be positive".into()));
        }
        // a second call in one process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(rayon::current_num_threads())
}

/// Report text plus whether every asserted check passed.
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

fn csv_text(config: &Value, header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    format!("# config: {}\n{body}", to_json(config).expect("serializable"))
}

fn json_text(config: &Value, result: &impl Serialize) -> String {
    let mut s = to_json(&json!({ "config": config, "result": result })).expect("serializable");
    s.push('\n');
    s
}

fn parts_string(p: &Partition) -> String {
    p.parts().iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_expand(a: &ExpandArgs, format: Format, config: &mut Value, caps: &Caps) -> Result<Outcome> {
    let root = a.root.root()?;
    let geo = match a.geometry {
        GeometryKind::Planar => Geometry::Planar,
        GeometryKind::Cylinder => Geometry::cylinder(a.gamma)?,
    };
    config["b_resolved"] = json!(root.b);
    let exp = build_expansion_with_cap(&root, &geo, caps.max_partitions)?;
    let text = match format {
        Format::Json => json_text(config, &exp),
        Format::Csv => csv_text(
            config,
            &["lambda", "w", "delta", "m_factorial", "g", "h", "underflow"],
            exp.terms
                .iter()
                .map(|t| {
                    vec![
                        parts_string(&t.lambda),
                        crate::io::ratio_string(&t.w),
                        t.delta.to_string(),
                        t.m_factorial.to_string(),
                        fmt_f64(t.g),
                        fmt_f64(t.h),
                        t.underflow.to_string(),
                    ]
                })
                .collect(),
        ),
    };
    Ok(Outcome { text, passed: true })
}

fn cmd_verify(a: &VerifyArgs, format: Format, config: &Value, caps: &Caps) -> Result<Outcome> {
    let mut checks = Vec::new();
    if matches!(a.suite, Suite::Oracle | Suite::All) {
        checks.extend(oracle_suite(caps, a.samples, a.seed)?);
    }
    if matches!(a.suite, Suite::Algebra | Suite::All) {
        checks.extend(algebra_suite(a.mmax, a.range));
    }
    if matches!(a.suite, Suite::Bounds | Suite::All) {
        checks.extend(bounds_suite(a.gamma, a.nmax)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    let text = match format {
        Format::Json => json_text(config, &json!({ "passed": passed, "checks": checks })),
        Format::Csv => csv_text(
            config,
            &["suite", "check", "passed", "detail"],
            checks
                .iter()
                .map(|c| {
                    vec![
                        c.suite.to_string(),
                        c.name.clone(),
                        c.passed.to_string(),
                        to_json(&c.detail).expect("serializable"),
                    ]
                })
                .collect(),
        ),
    };
    Ok(Outcome { text, passed })
}

fn cmd_entangle(a: &EntangleArgs, format: Format, config: &mut Value, caps: &Caps) -> Result<Outcome> {
    let root = a.root.root()?;
    config["b_resolved"] = json!(root.b);
    let cut = match (a.cut, a.cut_block) {
        (Some(c), _) => c,
        (None, Some(k)) => root.split(k)?.0.span(),
        (None, None) => root.split(root.n / 2).map(|(l, _)| l.span()).unwrap_or(0),
    };
    config["cut_resolved"] = json!(cut);
    let geo = Geometry::cylinder(a.gamma)?;
    let (spectrum, gap) = if block_split(&root, cut).is_some() && c_constant(root.q, a.gamma) > 0.0 {
        let g = entanglement_gap_check(&root, a.gamma, cut)?;
        (g.spectrum.clone(), Some(g))
    } else {
        // cuts inside a block, or C_q(γ) ≤ 0: spectrum only, no bound asserted
        let exp = build_expansion_with_cap(&root, &geo, caps.max_partitions)?;
        (schmidt_spectrum(&exp, cut)?, None)
    };
    let passed = gap.as_ref().is_none_or(|g| g.passed());
    let result = json!({
        "cut": cut,
        "values": spectrum.values,
        "entanglement_spectrum": spectrum.entanglement_spectrum,
        "tail_count": spectrum.tail_count,
        "largest_eigenvalue": spectrum.largest_eigenvalue(),
        "gap_bound": gap.as_ref().map(|g| g.gap_bound),
        "factorization": gap.as_ref().map(|g| &g.factorization),
        "passed": passed,
    });
    let text = match format {
        Format::Json => json_text(config, &result),
        Format::Csv => csv_text(
            config,
            &["index", "value", "entanglement_energy"],
            spectrum
                .values
                .iter()
                .zip(&spectrum.entanglement_spectrum)
                .enumerate()
                .map(|(i, (v, e))| vec![i.to_string(), fmt_f64(*v), fmt_f64(*e)])
                .collect(),
        ),
    };
    Ok(Outcome { text, passed })
}

fn cmd_correlate(a: &CorrelateArgs, format: Format, config: &mut Value) -> Result<Outcome> {
    let root = Root::new(a.q, a.n, a.b.resolve(a.n)?)?;
    config["b_resolved"] = json!(root.b);
    let rep = clustering_scan(&root, a.gamma, a.family.into(), &a.distances)?;
    let text = match format {
        Format::Json => json_text(config, &rep),
        Format::Csv => csv_text(
            config,
            &["distance", "anchor", "value", "ln_abs", "bound"],
            rep.rows
                .iter()
                .map(|r| {
                    vec![
                        r.distance.to_string(),
                        r.anchor.to_string(),
                        fmt_f64(r.value),
                        fmt_f64(r.ln_abs),
                        fmt_f64(r.bound),
                    ]
                })
                .collect(),
        ),
    };
    Ok(Outcome { text, passed: true })
}

fn unit_toy() -> RenewalSystem<num_rational::BigRational> {
    let one = <num_rational::BigRational as num_traits::One>::one();
    RenewalSystem::new(vec![one.clone()], vec![one]).expect("nonnegative")
}

fn cmd_renewal(a: &RenewalArgs, format: Format, config: &Value, caps: &Caps) -> Result<Outcome> {
    let (report, suffix_pressure): (RenewalReport, Option<Value>) = match a.toy {
        Some(t) => {
            let sys = if t == Toy::Geometric { geometric_toy() } else { unit_toy() };
            let tol = num_rational::BigRational::new(1.into(), num_bigint::BigInt::from(2).pow(60));
            (renewal_report(&sys, &tol, a.nmax)?, None)
        }
        None => {
            let sys = laughlin_system(a.q, a.gamma, a.horizon, caps.renewal_exact_max)?;
            let rep = renewal_report(&sys, &big_tolerance(), a.nmax)?;
            let p = match &a.suffix {
                Some(s) => Some(serde_json::to_value(pressure(
                    a.q,
                    a.gamma,
                    s,
                    a.pressure_nmax,
                    caps.renewal_exact_max,
                )?)
                .expect("serializable")),
                None => None,
            };
            (rep, p)
        }
    };
    let text = match format {
        Format::Json => json_text(
            config,
            &json!({
                "r": report.r,
                "ln_inverse_r": report.ln_inverse_r,
                "mu": report.mu,
                "target": report.target,
                "residuals": report.residuals,
                "pressure": report.pressure,
                "c": report.c,
                "scaled": report.feller.scaled,
                "fitted_ln_rate": report.feller.ln_rate,
                "ln_rate_bound": report.feller.ln_rate_bound,
                "geometric": report.feller.geometric(),
                "exact_limit": report.feller.exact_limit(),
                "truncated_from": report.feller.truncated_from,
                "suffix_pressure": suffix_pressure,
            }),
        ),
        Format::Csv => csv_text(
            config,
            &["n", "c", "scaled", "ln_residual", "pressure"],
            (0..report.c.len())
                .map(|i| {
                    vec![
                        (i + 1).to_string(),
                        fmt_f64(report.c[i]),
                        fmt_f64(report.feller.scaled[i]),
                        report.residuals[i].map(fmt_f64).unwrap_or_default(),
                        fmt_f64(report.pressure[i]),
                    ]
                })
                .collect(),
        ),
    };
    Ok(Outcome { text, passed: true })
}

/// Run a parsed command line; returns the report or the error to print.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let caps = Caps::from_env()?;
    let threads = configure_threads(cli.threads)?;
    let (name, args) = match &cli.command {
        Command::Expand(a) => ("expand", serde_json::to_value(a)),
        Command::Verify(a) => ("verify", serde_json::to_value(a)),
        Command::Entangle(a) => ("entangle", serde_json::to_value(a)),
        Command::Correlate(a) => ("correlate", serde_json::to_value(a)),
        Command::Renewal(a) => ("renewal", serde_json::to_value(a)),
    };
    let mut config = json!({
        "command": name,
        "args": args.expect("serializable"),
        "threads": threads,
        "format": cli.format,
        "caps": caps,
    });
    match &cli.command {
        Command::Expand(a) => cmd_expand(a, cli.format, &mut config, &caps),
        Command::Verify(a) => cmd_verify(a, cli.format, &config, &caps),
        Command::Entangle(a) => cmd_entangle(a, cli.format, &mut config, &caps),
        Command::Correlate(a) => cmd_correlate(a, cli.format, &mut config),
        Command::Renewal(a) => cmd_renewal(a, cli.format, &config, &caps),
    }
}

/// Parse, run and write; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let out = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &out.text),
        None => std::io::stdout().write_all(out.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return EXIT_USAGE;
    }
    if out.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
