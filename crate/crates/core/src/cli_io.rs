//! Command-line front end: JSON ingestion, command execution and
//! deterministic JSON-lines output.

use std::collections::BTreeMap;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::{Field, FieldConfig, Matrix, PrimeField, Rationals};
use crate::sheaf::injective::minimal_model;
use crate::sheaf::{Complex, Sheaf, SheafMorphism};
use crate::space::{enumerate_posets, enumerate_spaces, SpaceModel};
use crate::support::{enumerate_data, Residuation, SupportDatum};
use crate::tstructure::{heart_cohomology, truncate, Evidence, MembershipCertificate, Side, TStructError};
use crate::verify::{self, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub const SIER_JSON: &str = r#"{"points": [{"id": "eta", "codim": 0}, {"id": "x", "codim": 1}], "specializations": [["eta", "x"]]}"#;

/// `j_!k` for the open point of the two-point space, in degree 0.
pub const J_SHRIEK_JSON: &str = r#"{"lo": 0, "terms": [{"stalks": {"eta": 1, "x": 0}}]}"#;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Parse(String),
    #[error("internal failure: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

fn parse_err(e: impl std::fmt::Display) -> CliError {
    CliError::Parse(e.to_string())
}

/// Raw JSON texts (or preset names) of the command inputs.
#[derive(Clone, Debug, Default)]
pub struct Inputs {
    pub space: String,
    pub datum: Option<String>,
    pub datum2: Option<String>,
    pub complex: Option<String>,
}

impl Inputs {
    pub fn inline(space: &str, datum: &str, complex: Option<&str>) -> Self {
        Inputs { space: space.into(), datum: Some(datum.into()), datum2: None, complex: complex.map(Into::into) }
    }
}

#[derive(Clone, Debug)]
pub enum Command {
    CheckDatum(Inputs),
    Convolve(Inputs),
    Dual(Inputs),
    Residuate(Inputs),
    Truncate { inputs: Inputs, field: FieldConfig },
    PhiCohomology { inputs: Inputs, field: FieldConfig, n: i64 },
    Verify { config: SuiteConfig, field: FieldConfig, suites: Vec<String>, mutate: Option<String> },
    Enumerate { max_points: usize, max_codim: u32 },
}

/// JSON lines to print and the exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub lines: Vec<Value>,
    pub code: i32,
}

impl Output {
    fn one(v: Value, code: i32) -> Self {
        Output { lines: vec![v], code }
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

const SPACE_PRESETS: &[&str] = &["POINT", "SIER", "CHAIN3", "V"];
const DATUM_PRESETS: &[&str] = &["T", "S", "SS"];

pub fn is_preset(name: &str) -> bool {
    SPACE_PRESETS.contains(&name) || DATUM_PRESETS.contains(&name)
}

pub fn parse_space(text: &str) -> Result<Arc<SpaceModel>, CliError> {
    let s = match text.trim() {
        "POINT" => SpaceModel::point(),
        "SIER" => SpaceModel::sierpinski(),
        "CHAIN3" => SpaceModel::chain3(),
        "V" => SpaceModel::v_space(),
        t => SpaceModel::from_json_str(t).map_err(parse_err)?,
    };
    Ok(Arc::new(s))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatumJson {
    p: Option<BTreeMap<String, i64>>,
    full_below: Option<i64>,
    levels: Option<Vec<Vec<String>>>,
}

/// A datum as a `p` map, or as `full_below` plus the level sets above it.
pub fn parse_datum(space: &Arc<SpaceModel>, text: &str) -> Result<SupportDatum, CliError> {
    match text.trim() {
        "T" => return Ok(SupportDatum::standard_t(space)),
        "S" => return Ok(SupportDatum::standard_s(space)),
        "SS" => {
            let s = SupportDatum::standard_s(space);
            return Ok(s.convolve(&s).expect("same space"));
        }
        _ => {}
    }
    let j: DatumJson = serde_json::from_str(text).map_err(parse_err)?;
    match j {
        DatumJson { p: Some(p), full_below: None, levels: None } => SupportDatum::from_map(space, &p).map_err(parse_err),
        DatumJson { p: None, full_below: Some(first), levels: Some(levels) } => {
            let mut sets = vec![space.all_points()];
            for l in &levels {
                sets.push(l.iter().map(|id| space.index_of(id)).collect::<Result<_, _>>().map_err(parse_err)?);
            }
            sets.push(Default::default());
            SupportDatum::from_level_sets(space, first, &sets).map_err(parse_err)
        }
        _ => Err(CliError::Parse("datum needs either `p` or both `full_below` and `levels`".into())),
    }
}

pub fn datum_json(d: &SupportDatum) -> Value {
    json!({"p": d.to_map()})
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexJson {
    lo: i64,
    terms: Vec<TermJson>,
    #[serde(default)]
    differentials: Vec<BTreeMap<String, Value>>,
    /// Emitted on output; ignored on input.
    #[serde(default, rename = "cohomology")]
    _cohomology: Option<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    stalks: BTreeMap<String, usize>,
    #[serde(default)]
    transitions: BTreeMap<String, Value>,
}

fn parse_matrix<F: Field>(field: &F, v: &Value, rows: usize, cols: usize, what: &str) -> Result<Matrix<F>, CliError> {
    let bad = || CliError::Parse(format!("{what}: expected a {rows}x{cols} matrix"));
    let rs = v.as_array().ok_or_else(bad)?;
    if rows == 0 || cols == 0 {
        let empty = rs.iter().all(|r| r.as_array().is_some_and(|a| a.is_empty()));
        return if empty && (rs.is_empty() || rs.len() == rows) { Ok(Matrix::zeros(field, rows, cols)) } else { Err(bad()) };
    }
    if rs.len() != rows {
        return Err(bad());
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in rs {
        let r = r.as_array().filter(|r| r.len() == cols).ok_or_else(bad)?;
        for e in r {
            data.push(field.from_json(e).ok_or_else(|| CliError::Parse(format!("{what}: bad entry {e}")))?);
        }
    }
    Ok(Matrix::from_rows(field, rows, cols, data))
}

fn parse_sheaf<F: Field>(space: &Arc<SpaceModel>, field: &F, t: &TermJson, k: usize) -> Result<Sheaf<F>, CliError> {
    let mut dims = vec![0; space.len()];
    for (id, &d) in &t.stalks {
        dims[space.index_of(id).map_err(parse_err)?] = d;
    }
    let mut given = BTreeMap::new();
    for (key, v) in &t.transitions {
        let (a, b) = key
            .split_once("->")
            .ok_or_else(|| CliError::Parse(format!("transition key `{key}` is not of the form `p->q`")))?;
        let s = space.index_of(a.trim()).map_err(parse_err)?;
        let g = space.index_of(b.trim()).map_err(parse_err)?;
        let m = parse_matrix(field, v, dims[g], dims[s], &format!("term {k} transition {key}"))?;
        given.insert((s, g), m);
    }
    Sheaf::from_covers(space, field, dims, given).map_err(parse_err)
}

/// A bounded complex: terms from degree `lo` with stalk dimensions and
/// `"special->generic"` restriction matrices, differentials per point.
pub fn parse_complex<F: Field>(space: &Arc<SpaceModel>, field: &F, text: &str) -> Result<Complex<F>, CliError> {
    let j: ComplexJson = serde_json::from_str(text).map_err(parse_err)?;
    let terms: Vec<Sheaf<F>> = j.terms.iter().enumerate().map(|(k, t)| parse_sheaf(space, field, t, k)).collect::<Result<_, _>>()?;
    let needed = terms.len().saturating_sub(1);
    if j.differentials.len() > needed {
        return Err(CliError::Parse(format!("{} differentials for {} terms", j.differentials.len(), terms.len())));
    }
    let mut d = Vec::with_capacity(needed);
    for k in 0..needed {
        let (a, b) = (&terms[k], &terms[k + 1]);
        let given = j.differentials.get(k);
        let mut comps = Vec::with_capacity(space.len());
        for x in 0..space.len() {
            let m = match given.and_then(|g| g.get(space.id(x))) {
                Some(v) => parse_matrix(field, v, b.dim(x), a.dim(x), &format!("differential {k} at {}", space.id(x)))?,
                None if a.dim(x) == 0 || b.dim(x) == 0 => Matrix::zeros(field, b.dim(x), a.dim(x)),
                None => return Err(CliError::Parse(format!("differential {k} is missing point {}", space.id(x)))),
            };
            comps.push(m);
        }
        if let Some(g) = given {
            for id in g.keys() {
                space.index_of(id).map_err(parse_err)?;
            }
        }
        let mor = SheafMorphism { comps };
        if !mor.is_natural(a, b) {
            return Err(CliError::Parse(format!("differential {k} does not commute with restrictions")));
        }
        d.push(mor);
    }
    Complex::new(space, field, j.lo, terms, d).map_err(parse_err)
}

fn point_map(space: &SpaceModel, dims: &[usize]) -> Value {
    json!((0..space.len()).map(|x| (space.id(x).to_string(), dims[x])).collect::<BTreeMap<_, _>>())
}

/// The complex in the input format, plus its cohomology table.
pub fn complex_json<F: Field>(c: &Complex<F>) -> Value {
    let space = c.space();
    let c = c.trimmed();
    let terms: Vec<Value> = c
        .degrees()
        .map(|k| {
            let t = c.term_or_zero(k);
            let transitions: BTreeMap<String, Value> = space
                .strict_pairs()
                .filter(|&(g, s)| space.is_cover(g, s) && t.dim(g) > 0 && t.dim(s) > 0)
                .map(|(g, s)| (format!("{}->{}", space.id(s), space.id(g)), t.res_ref(s, g).to_json()))
                .collect();
            json!({"stalks": point_map(space, t.dims()), "transitions": transitions})
        })
        .collect();
    let diffs: Vec<Value> = c
        .degrees()
        .take(c.degrees().count().saturating_sub(1))
        .map(|k| {
            let m: BTreeMap<String, Value> = (0..space.len())
                .filter(|&x| c.dim(k, x) > 0 && c.dim(k + 1, x) > 0)
                .map(|x| (space.id(x).to_string(), c.diff(k, x).to_json()))
                .collect();
            json!(m)
        })
        .collect();
    let cohomology: BTreeMap<String, Value> =
        c.cohomology_table().iter().map(|(k, dims)| (k.to_string(), point_map(space, dims))).collect();
    json!({"lo": c.lo(), "terms": terms, "differentials": diffs, "cohomology": cohomology})
}

pub fn certificate_json(c: &MembershipCertificate, space: &SpaceModel) -> Value {
    let evidence: Vec<Value> = c
        .evidence
        .iter()
        .map(|e| match *e {
            Evidence::Support { k, support, level } => {
                json!({"k": k, "support": support.iter().map(|x| space.id(x)).collect::<Vec<_>>(), "level": level})
            }
            Evidence::Vanishing { k, lowest } => json!({"k": k, "lowest_degree": lowest}),
        })
        .collect();
    let side = match c.side {
        Side::Leq => "leq",
        Side::Geq => "geq",
    };
    json!({"side": side, "n": c.n, "evidence": evidence})
}

fn tstruct_err(e: TStructError) -> CliError {
    CliError::Internal(e.to_string())
}

fn model<F: Field>(c: &Complex<F>) -> Result<Complex<F>, CliError> {
    minimal_model(c).map_err(|e| CliError::Internal(e.to_string()))
}

macro_rules! with_field {
    ($cfg:expr, $f:ident => $body:expr) => {
        match $cfg {
            FieldConfig::F2 => {
                let $f = PrimeField::f2();
                $body
            }
            FieldConfig::Fp(p) => {
                let $f = PrimeField::new(p).map_err(parse_err)?;
                $body
            }
            FieldConfig::Q => {
                let $f = Rationals;
                $body
            }
        }
    };
}

fn need<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
    v.as_deref().ok_or_else(|| CliError::Parse(format!("missing --{flag}")))
}

fn truncate_cmd<F: Field>(field: &F, inputs: &Inputs) -> Result<Output, CliError> {
    let space = parse_space(&inputs.space)?;
    let phi = parse_datum(&space, need(&inputs.datum, "datum")?)?;
    let m = parse_complex(&space, field, need(&inputs.complex, "complex")?)?;
    let t = truncate(&m, &phi).map_err(tstruct_err)?;
    Ok(Output::one(
        json!({
            "m_lt": complex_json(&model(&t.m_lt)?),
            "m_geq": complex_json(&model(&t.m_geq)?),
            "certificates": {"lt": certificate_json(&t.cert_lt, &space), "geq": certificate_json(&t.cert_geq, &space)},
            "iterations": t.iterations,
        }),
        EXIT_OK,
    ))
}

fn heart_cmd<F: Field>(field: &F, inputs: &Inputs, n: i64) -> Result<Output, CliError> {
    let space = parse_space(&inputs.space)?;
    let phi = parse_datum(&space, need(&inputs.datum, "datum")?)?;
    let m = parse_complex(&space, field, need(&inputs.complex, "complex")?)?;
    let (h, leq, geq) = heart_cohomology(&m, &phi, n).map_err(tstruct_err)?;
    Ok(Output::one(
        json!({
            "n": n,
            "heart": complex_json(&model(&h)?),
            "certificates": {"leq": certificate_json(&leq, &space), "geq": certificate_json(&geq, &space)},
        }),
        EXIT_OK,
    ))
}

fn verify_cmd<F: Field>(field: &F, config: &SuiteConfig, suites: &[String], mutate: Option<&str>) -> Result<Output, CliError> {
    let records = match mutate {
        None => {
            let names: Vec<&str> = if suites.is_empty() { verify::SUITES.to_vec() } else { suites.iter().map(String::as_str).collect() };
            if let Some(bad) = names.iter().find(|n| !verify::SUITES.contains(n)) {
                return Err(CliError::Parse(format!("unknown suite `{bad}`")));
            }
            verify::run_suites(field, &names, config)
        }
        Some(m) => run_mutation(field, config, m)?,
    };
    let mut per_suite: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in &records {
        let e = per_suite.entry(r.suite.as_str()).or_default();
        if r.verdict { e.0 += 1 } else { e.1 += 1 }
    }
    let failed = records.iter().filter(|r| !r.verdict).count();
    let summary = json!({"summary": {
        "checks": records.len(),
        "passed": records.len() - failed,
        "failed": failed,
        "seed": config.seed,
        "suites": per_suite.iter().map(|(k, (p, f))| (k.to_string(), json!({"passed": p, "failed": f}))).collect::<BTreeMap<_, _>>(),
    }});
    let mut lines: Vec<Value> = records.iter().map(|r| r.to_json()).collect();
    lines.push(summary);
    Ok(Output { lines, code: if failed == 0 { EXIT_OK } else { EXIT_FAIL } })
}

#[cfg(feature = "mutation")]
fn run_mutation<F: Field>(field: &F, config: &SuiteConfig, m: &str) -> Result<Vec<verify::CheckRecord>, CliError> {
    let m: verify::Mutation = m.parse().map_err(CliError::Parse)?;
    Ok(verify::run_mutation(field, m, config))
}

#[cfg(not(feature = "mutation"))]
fn run_mutation<F: Field>(_: &F, _: &SuiteConfig, _: &str) -> Result<Vec<verify::CheckRecord>, CliError> {
    Err(CliError::Parse("mutations are only available in test builds".into()))
}

fn enumerate_cmd(max_points: usize, max_codim: u32) -> Output {
    let spaces = enumerate_spaces(max_points, max_codim);
    let mut lines: Vec<Value> = spaces
        .par_iter()
        .enumerate()
        .map(|(i, sp)| {
            let s = Arc::new(sp.clone());
            let data = enumerate_data(&s, -2, 3);
            let good = data.iter().filter(|d| d.check_t_criterion().holds()).count();
            json!({"index": i, "space": verify::space_key(sp), "data": data.len(), "criterion_holds": good})
        })
        .collect();
    lines.push(json!({"summary": {"spaces": spaces.len(), "posets": enumerate_posets(max_points).len()}}));
    Output { lines, code: EXIT_OK }
}

pub fn execute(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::CheckDatum(i) => {
            let space = parse_space(&i.space)?;
            let phi = parse_datum(&space, need(&i.datum, "datum")?)?;
            let r = phi.check_t_criterion();
            Ok(Output::one(r.to_json(&space), if r.holds() { EXIT_OK } else { EXIT_FAIL }))
        }
        Command::Convolve(i) => {
            let space = parse_space(&i.space)?;
            let a = parse_datum(&space, need(&i.datum, "datum")?)?;
            let b = parse_datum(&space, need(&i.datum2, "datum2")?)?;
            Ok(Output::one(datum_json(&a.convolve(&b).map_err(parse_err)?), EXIT_OK))
        }
        Command::Dual(i) => {
            let space = parse_space(&i.space)?;
            let a = parse_datum(&space, need(&i.datum, "datum")?)?;
            Ok(Output::one(datum_json(&a.dual_star()), EXIT_OK))
        }
        Command::Residuate(i) => {
            let space = parse_space(&i.space)?;
            let phi = parse_datum(&space, need(&i.datum, "datum")?)?;
            let theta = parse_datum(&space, need(&i.datum2, "datum2")?)?;
            Ok(match phi.residuate(&theta).map_err(parse_err)? {
                Residuation::Solution(psi) => Output::one(datum_json(&psi), EXIT_OK),
                Residuation::NoSolution { generic, special } => Output::one(
                    json!({"no_solution": {"generic": space.id(generic), "special": space.id(special)}}),
                    EXIT_FAIL,
                ),
            })
        }
        Command::Truncate { inputs, field } => with_field!(*field, f => truncate_cmd(&f, inputs)),
        Command::PhiCohomology { inputs, field, n } => with_field!(*field, f => heart_cmd(&f, inputs, *n)),
        Command::Verify { config, field, suites, mutate } => {
            with_field!(*field, f => verify_cmd(&f, config, suites, mutate.as_deref()))
        }
        Command::Enumerate { max_points, max_codim } => Ok(enumerate_cmd(*max_points, *max_codim)),
    }
}

#[derive(Parser, Debug)]
#[command(name = "tstruct", version, about = "Support data and t-structures on finite spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    /// Space JSON file, or one of POINT, SIER, CHAIN3, V.
    #[arg(long, global = true)]
    pub space: Option<String>,
    /// Datum JSON file, or one of T, S, SS.
    #[arg(long, global = true)]
    pub datum: Option<String>,
    #[arg(long, global = true)]
    pub datum2: Option<String>,
    #[arg(long, global = true)]
    pub complex: Option<String>,
    #[arg(long, global = true, default_value_t = 0, allow_hyphen_values = true)]
    pub n: i64,
    /// F2, Fp:<p> or Q.
    #[arg(long, global = true, default_value = "F2")]
    pub field: FieldConfig,
    /// Overridden by TSTRUCT_SEED.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 4)]
    pub max_points: usize,
    #[arg(long, global = true, default_value_t = 3)]
    pub max_codim: u32,
    #[arg(long, global = true, default_value_t = 3)]
    pub max_stalk_dim: usize,
    #[arg(long, global = true, default_value_t = 50)]
    pub samples: usize,
    /// Suites to run (repeatable, comma separated); all by default.
    #[arg(long, global = true, value_delimiter = ',')]
    pub suite: Vec<String>,
    #[cfg(feature = "mutation")]
    #[arg(long, global = true)]
    pub mutate: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sub {
    CheckDatum,
    Convolve,
    Dual,
    Residuate,
    Truncate,
    PhiCohomology,
    Verify,
    Enumerate,
}

/// Reads a file argument unless it names a preset.
fn load(arg: &Option<String>) -> Result<Option<String>, CliError> {
    match arg {
        None => Ok(None),
        Some(a) if is_preset(a) => Ok(Some(a.clone())),
        Some(a) => std::fs::read_to_string(a).map(Some).map_err(|e| CliError::Parse(format!("{a}: {e}"))),
    }
}

impl Cli {
    pub fn into_command(self, env_seed: Option<String>) -> Result<Command, CliError> {
        let inputs = || -> Result<Inputs, CliError> {
            Ok(Inputs {
                space: load(&self.space)?.ok_or_else(|| CliError::Parse("missing --space".into()))?,
                datum: load(&self.datum)?,
                datum2: load(&self.datum2)?,
                complex: load(&self.complex)?,
            })
        };
        let seed = match env_seed {
            Some(s) => s.trim().parse().map_err(|_| CliError::Parse(format!("TSTRUCT_SEED `{s}` is not an integer")))?,
            None => self.seed,
        };
        #[cfg(feature = "mutation")]
        let mutate = self.mutate.clone();
        #[cfg(not(feature = "mutation"))]
        let mutate = None;
        Ok(match self.command {
            Sub::CheckDatum => Command::CheckDatum(inputs()?),
            Sub::Convolve => Command::Convolve(inputs()?),
            Sub::Dual => Command::Dual(inputs()?),
            Sub::Residuate => Command::Residuate(inputs()?),
            Sub::Truncate => Command::Truncate { inputs: inputs()?, field: self.field },
            Sub::PhiCohomology => Command::PhiCohomology { inputs: inputs()?, field: self.field, n: self.n },
            Sub::Verify => Command::Verify {
                config: SuiteConfig {
                    seed,
                    max_points: self.max_points,
                    max_stalk_dim: self.max_stalk_dim,
                    samples: self.samples,
                    max_codim: self.max_codim,
                    ..SuiteConfig::default()
                },
                field: self.field,
                suites: self.suite.clone(),
                mutate,
            },
            Sub::Enumerate => Command::Enumerate { max_points: self.max_points, max_codim: self.max_codim },
        })
    }
}

/// Parses arguments, runs, and returns `(stdout, stderr, exit code)`.
pub fn run<I, T>(args: I, env_seed: Option<String>) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            return (if code == 0 { e.to_string() } else { String::new() }, if code == 0 { String::new() } else { e.to_string() }, code);
        }
    };
    match cli.into_command(env_seed).and_then(|c| execute(&c)) {
        Ok(out) => (out.render(), String::new(), out.code),
        Err(e) => (String::new(), format!("error: {e}\n"), e.code()),
    }
}
