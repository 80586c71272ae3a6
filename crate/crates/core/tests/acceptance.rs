//! One line per acceptance criterion. Budgets are wall-clock seconds.

use std::sync::Arc;
use std::time::{Duration, Instant};

use tstruct_core::cli_io::{self, Command};
use tstruct_core::linalg::PrimeField;
use tstruct_core::space::SpaceModel;
use tstruct_core::support::{SigmaConvention, SupportDatum, Witness};
use tstruct_core::verify::{self, CheckRecord, Mutation, SuiteConfig};

struct Outcome {
    ok: bool,
    detail: String,
}

fn summarize(records: &[CheckRecord]) -> Outcome {
    let failed: Vec<&CheckRecord> = records.iter().filter(|r| !r.verdict).collect();
    let detail = match failed.first() {
        None => format!("{} checks", records.len()),
        Some(r) => format!("{} of {} checks failed, first {} {}", failed.len(), records.len(), r.case_id, r.to_json()),
    };
    Outcome { ok: failed.is_empty() && !records.is_empty(), detail }
}

fn run(n: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            out.ok = false;
            out.detail = format!("{}; over budget of {:?}", out.detail, b);
        }
    }
    println!(
        "criterion {n} {}: {name} ({:.2?}) {}",
        if out.ok { "PASS" } else { "FAIL" },
        elapsed,
        out.detail
    );
    out.ok
}

fn cfg() -> SuiteConfig {
    SuiteConfig::default()
}

fn table(v: &serde_json::Value) -> serde_json::Value {
    v["cohomology"].clone()
}

fn main() {
    let field = PrimeField::new(101).unwrap();
    let mut results = Vec::new();

    // the support-calculus suites share one budget
    let start = Instant::now();
    results.push(run(1, "criterion equivalence", None, || summarize(&verify::criterion_suite(&cfg(), SigmaConvention::Standard))));

    results.push(run(2, "two-point example", Some(Duration::from_secs(1)), || {
        let s = Arc::new(SpaceModel::sierpinski());
        let oco = SupportDatum::from_function(&s, vec![0, 2]).unwrap();
        let report = oco.check_t_criterion();
        let sd = SupportDatum::standard_s(&s);
        let mut ok = !report.holds()
            && report.agrees()
            && report.witness == Some(Witness::Pair { generic: 0, special: 1 })
            && sd.convolve(&sd).unwrap() == oco;
        let out = cli_io::execute(&Command::Truncate {
            inputs: cli_io::Inputs::inline(
                cli_io::SIER_JSON,
                r#"{"p": {"eta": 0, "x": 2}}"#,
                Some(cli_io::J_SHRIEK_JSON),
            ),
            field: "F2".parse().unwrap(),
        });
        let (lt, geq) = match &out {
            Ok(o) if o.code == 0 => (table(&o.lines[0]["m_lt"]), table(&o.lines[0]["m_geq"])),
            _ => (serde_json::Value::Null, serde_json::Value::Null),
        };
        ok &= lt == serde_json::json!({"1": {"eta": 0, "x": 1}});
        ok &= geq == serde_json::json!({"0": {"eta": 1, "x": 1}});
        Outcome { ok, detail: format!("witness {:?}, lt {lt}, geq {geq}", report.witness) }
    }));

    results.push(run(3, "convolution algebra", None, || summarize(&verify::algebra_suite(&cfg()))));
    let support_time = start.elapsed();
    println!("criteria 1 and 3 took {support_time:.2?} together (budget 60s)");
    results.push(support_time <= Duration::from_secs(60));

    results.push(run(4, "residuation and duals", None, || summarize(&verify::residuation_suite(&cfg()))));
    results.push(run(5, "t-structure axioms", Some(Duration::from_secs(120)), || {
        summarize(&verify::axioms_suite(&field, &cfg()))
    }));
    results.push(run(6, "local cohomology", Some(Duration::from_secs(60)), || {
        summarize(&verify::local_cohomology_suite(&field, &cfg()))
    }));
    results.push(run(7, "exactness of local cohomology", Some(Duration::from_secs(60)), || {
        summarize(&verify::exactness_suite(&field, &cfg()))
    }));
    results.push(run(8, "negative controls", None, || {
        let small = SuiteConfig { max_points: 3, ..cfg() };
        let mut detail = Vec::new();
        let mut ok = true;
        for m in [Mutation::DropMonotonicity, Mutation::BreakD2, Mutation::SigmaConvention] {
            let recs = verify::run_mutation(&field, m, &small);
            let caught = recs.iter().find(|r| !r.verdict && r.witness.is_some());
            ok &= caught.is_some();
            detail.push(format!("{m:?}: {}", caught.map_or("not caught".to_string(), |r| r.case_id.clone())));
        }
        Outcome { ok, detail: detail.join("; ") }
    }));

    if !results.iter().all(|&r| r) {
        eprintln!("some acceptance criteria failed");
        std::process::exit(1);
    }
}
