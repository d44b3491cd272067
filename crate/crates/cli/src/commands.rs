use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;

use flowcat_complexes::{cohomology_betti, induced_rank, nonzero_betti, Betti, ChainMap, GradedComplex, Report};
use flowcat_core::{
    assemble_differential_traced, assemble_homotopy_operator, assemble_morphism_map_traced, euler_bundle_over_sphere,
    gysin_complex, FlowCategoryModel, GysinBundle, TraceEntry,
};
use flowcat_hpl::{
    harmonic_data, perturbed_complex, seeded_family, verify_perturbation_data, FamilyConfig, HplSign, LevelData,
    PerturbationData,
};
use flowcat_linalg::{rank, Matrix};
use flowcat_morse::{build_morse_flow_category, morsebott_s2, sphere_continuation, EngineConfig, SurfaceModel};
use flowcat_oracles::CircleVariant;
use flowcat_spectral::{compute_page, e_infinity_vs_graded, spectral_sequence, FilteredComplex};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::schema::{self, BundleDoc, Loaded, ModelDoc};
use crate::{CliError, Command, JobConfig, Outcome};

const FAMILY_SIZE: usize = 100;
const CONTINUATION_TILT: f64 = 0.3;

fn compute(e: impl Display) -> CliError {
    CliError::Compute(e.to_string())
}

fn engine(e: impl Display) -> CliError {
    CliError::Engine(e.to_string())
}

struct Job<'a> {
    cfg: &'a JobConfig,
    log: Vec<String>,
    model: Option<String>,
}

impl Job<'_> {
    fn trace(&mut self, what: &str, entries: &[TraceEntry]) {
        if self.cfg.verbose_signs {
            self.log.extend(entries.iter().map(|t| format!("{what}: {t}")));
        }
    }

    fn engine_config(&self) -> EngineConfig {
        EngineConfig { quadrature_tol: self.cfg.tol, ..EngineConfig::default() }
    }

    fn input(&self) -> Result<&Path, CliError> {
        self.cfg.input.as_deref().ok_or_else(|| CliError::Usage("missing input file".into()))
    }

    fn read(&self) -> Result<String, CliError> {
        let path = self.input()?;
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), reason: e.to_string() })
    }

    fn load(&self) -> Result<Loaded, CliError> {
        schema::load(&schema::parse(&self.read()?)?, &self.engine_config())
    }

    fn differential(&mut self, fc: &FlowCategoryModel) -> Result<(GradedComplex, Vec<TraceEntry>), CliError> {
        let a = assemble_differential_traced(fc).map_err(compute)?;
        self.trace("d", &a.trace);
        Ok((a.value, a.trace))
    }
}

/// Run one job. `Err` covers unreadable input and computations that could not
/// finish; failed checks come back as an `Outcome` with `passed == false`.
pub fn run(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let mut job = Job { cfg, log: Vec::new(), model: None };
    let report = match cfg.command {
        Command::Verify => verify(&mut job)?,
        Command::Cohomology => cohomology(&mut job)?,
        Command::Ss => ss(&mut job)?,
        Command::Morphism => morphism(&mut job)?,
        Command::Gysin => gysin(&mut job)?,
        Command::Hpl => hpl(&mut job)?,
        Command::Demo => demo(&mut job)?,
    };
    let passed = report.get("passed").and_then(Value::as_bool).unwrap_or(true);
    let mut text = serde_json::to_string_pretty(&report).expect("reports always serialize");
    text.push('\n');
    Ok(Outcome { passed, report: text, log: job.log, model: job.model })
}

fn involved(t: &TraceEntry, s: i64, k: i64) -> bool {
    t.block.0 >= s && t.block.0 + t.block.1 <= s + k
}

fn check(r: &Report, trace: &[TraceEntry]) -> Value {
    let failures: Vec<Value> = r
        .failures
        .iter()
        .map(|f| {
            let trace: Vec<String> = trace.iter().filter(|t| involved(t, f.s, f.k)).map(ToString::to_string).collect();
            json!({"s": f.s, "k": f.k, "nonzero_entries": f.nonzero_entries, "trace": trace})
        })
        .collect();
    json!({"check": r.check, "ok": r.is_empty(), "failures": failures})
}

fn ok(checks: &[Value]) -> bool {
    checks.iter().all(|c| c["ok"] == json!(true))
}

fn quadrature(raw: &[(String, f64)], tol: f64) -> Value {
    let values: BTreeMap<&str, f64> = raw.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let good = raw.iter().all(|(_, v)| (v.abs() - 1.0).abs() < tol);
    json!({"check": "quadrature", "ok": good, "tol": tol, "values": values})
}

fn betti(c: &GradedComplex) -> Result<Betti, CliError> {
    Ok(nonzero_betti(&cohomology_betti(c).map_err(compute)?))
}

fn verify(job: &mut Job) -> Result<Value, CliError> {
    let l = job.load()?;
    let (c, trace) = job.differential(&l.model)?;
    let mut checks = vec![check(&c.verify_d_squared(), &trace)];
    if !l.raw.is_empty() {
        checks.push(quadrature(&l.raw, job.cfg.tol));
    }
    if let Some(m) = &l.morphism {
        let a = assemble_morphism_map_traced(m).map_err(compute)?;
        job.trace("φ", &a.trace);
        checks.push(check(&a.value.verify_chain_map(), &a.trace));
    }
    if let Some(h) = &l.homotopy {
        let op = assemble_homotopy_operator(h).map_err(compute)?;
        checks.push(check(&op.verify_chain_homotopy(), &[]));
    }
    Ok(json!({"passed": ok(&checks), "checks": checks}))
}

fn cohomology(job: &mut Job) -> Result<Value, CliError> {
    let l = job.load()?;
    let (c, trace) = job.differential(&l.model)?;
    let d2 = c.verify_d_squared();
    if !d2.is_empty() {
        return Ok(json!({"passed": false, "checks": [check(&d2, &trace)]}));
    }
    Ok(json!({"betti": betti(&c)?}))
}

fn ss(job: &mut Job) -> Result<Value, CliError> {
    let l = job.load()?;
    let (c, _) = job.differential(&l.model)?;
    let fc = FilteredComplex::new(c).map_err(compute)?;
    let mismatches = e_infinity_vs_graded(&fc).map_err(compute)?;
    let converges = mismatches.is_empty();
    let e_infinity = json!({"converges": converges, "mismatches": mismatches});
    match job.cfg.page {
        Some(r) if r < 1 => Err(CliError::Usage(format!("--page must be at least 1, got {r}"))),
        Some(r) => {
            let s = compute_page(&fc, r).map_err(compute)?.summary();
            Ok(json!({"passed": converges, "page": s.page, "dims": s.dims, "ranks": s.ranks, "e_infinity": e_infinity}))
        }
        None => {
            let pages: Vec<_> = spectral_sequence(&fc).map_err(compute)?.iter().map(|p| p.summary()).collect();
            Ok(json!({"passed": converges, "pages": pages, "e_infinity": e_infinity}))
        }
    }
}

fn induced(f: &ChainMap) -> Result<Value, CliError> {
    let (bs, bt) = (betti(&f.source)?, betti(&f.target)?);
    let degrees: BTreeSet<i64> = bs.keys().chain(bt.keys()).copied().collect();
    let mut ranks = BTreeMap::new();
    for n in degrees {
        ranks.insert(n, induced_rank(f, Some(n)).map_err(compute)?);
    }
    let iso = bs == bt && bs.iter().all(|(n, b)| ranks.get(n) == Some(b));
    Ok(json!({"betti_source": bs, "betti_target": bt, "induced_ranks": ranks, "iso": iso}))
}

fn morphism(job: &mut Job) -> Result<Value, CliError> {
    let l = job.load()?;
    let m = l.morphism.as_ref().ok_or_else(|| CliError::Usage("input has no morphism section".into()))?;
    let a = assemble_morphism_map_traced(m).map_err(compute)?;
    job.trace("φ", &a.trace);
    let f = a.value;
    let mut checks = vec![check(&f.verify_chain_map(), &a.trace)];
    if let Some(h) = &l.homotopy {
        checks.push(check(&assemble_homotopy_operator(h).map_err(compute)?.verify_chain_homotopy(), &[]));
    }
    let cohomology = if ok(&checks) { induced(&f)? } else { Value::Null };
    Ok(json!({
        "passed": ok(&checks),
        "checks": checks,
        "unitriangular": f.is_unitriangular(),
        "identity": f.is_identity(),
        "cohomology": cohomology,
    }))
}

fn gysin(job: &mut Job) -> Result<Value, CliError> {
    let l = job.load()?;
    let (base, bundle) = match (job.cfg.trivial, l.bundle) {
        (true, _) | (false, Some(BundleDoc::Trivial)) => (l.model, GysinBundle::Trivial),
        (false, Some(BundleDoc::EulerSphere { n })) => {
            let (base, bundle) = euler_bundle_over_sphere(n).map_err(compute)?;
            if !base.same_shape(&l.model) {
                return Err(CliError::Parse("euler-sphere bundle needs the single-level S² model".into()));
            }
            (base, bundle)
        }
        (false, None) => return Err(CliError::Usage("no bundle: pass --trivial or add a bundle section".into())),
    };
    let g = gysin_complex(&base, job.cfg.k, &bundle).map_err(compute)?;
    let les: Vec<Value> = g
        .les
        .iter()
        .map(|r| {
            json!({
                "degree": r.degree,
                "pull_rank": r.pull_rank,
                "push_rank": r.push_rank,
                "connecting_rank": r.connecting_rank,
                "exact": r.exact,
            })
        })
        .collect();
    Ok(json!({
        "passed": g.is_exact(),
        "exact": g.is_exact(),
        "short_exact": g.short_exact,
        "betti": nonzero_betti(&g.betti_total),
        "betti_base": nonzero_betti(&g.betti_base),
        "connecting": g.connecting,
        "connecting_rank": rank(&g.connecting),
        "les": les,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HplDoc {
    schema: u32,
    complex: GradedComplex,
    #[serde(default)]
    data: Option<BTreeMap<i64, LevelDoc>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    p: Matrix,
    h: Matrix,
}

struct Reduced {
    data: Report,
    d2: Report,
    before: Betti,
    after: Betti,
}

fn reduce(c: &GradedComplex, pd: Option<PerturbationData>) -> Result<Reduced, CliError> {
    let pd = match pd {
        Some(pd) => pd,
        None => harmonic_data(c).map_err(compute)?,
    };
    let data = verify_perturbation_data(c, &pd).map_err(compute)?;
    let small = perturbed_complex(c, &pd, HplSign::Signed).map_err(compute)?;
    let d2 = small.verify_d_squared();
    let after = if d2.is_empty() { betti(&small)? } else { Betti::new() };
    Ok(Reduced { data, d2, before: betti(c)?, after })
}

fn hpl(job: &mut Job) -> Result<Value, CliError> {
    if job.cfg.input.is_some() {
        let doc: HplDoc = serde_json::from_str(&job.read()?).map_err(|e| CliError::Parse(e.to_string()))?;
        if doc.schema != schema::SCHEMA {
            return Err(CliError::Parse(format!("unsupported schema {}", doc.schema)));
        }
        let d2 = doc.complex.verify_d_squared();
        if !d2.is_empty() {
            return Ok(json!({"passed": false, "checks": [check(&d2, &[])]}));
        }
        let pd = match doc.data {
            Some(levels) => Some(PerturbationData {
                levels: levels
                    .into_iter()
                    .map(|(s, l)| Ok((s, LevelData::new(l.p, l.h).map_err(compute)?)))
                    .collect::<Result<_, CliError>>()?,
            }),
            None => None,
        };
        let r = reduce(&doc.complex, pd)?;
        let checks = vec![check(&r.data, &[]), check(&r.d2, &[])];
        let preserved = r.before == r.after;
        return Ok(json!({
            "passed": ok(&checks) && preserved,
            "checks": checks,
            "betti_original": r.before,
            "betti_perturbed": r.after,
            "preserved": preserved,
        }));
    }
    let family = seeded_family(job.cfg.seed, FAMILY_SIZE, &FamilyConfig::default());
    let (mut d2_failures, mut data_failures, mut mismatches) = (Vec::new(), Vec::new(), Vec::new());
    for (i, c) in family.iter().enumerate() {
        if !c.verify_d_squared().is_empty() {
            d2_failures.push(i);
            continue;
        }
        let r = reduce(c, None)?;
        if !r.data.is_empty() {
            data_failures.push(i);
        }
        if !r.d2.is_empty() {
            d2_failures.push(i);
        }
        if r.before != r.after {
            mismatches.push(i);
        }
    }
    let passed = d2_failures.is_empty() && data_failures.is_empty() && mismatches.is_empty();
    Ok(json!({
        "passed": passed,
        "seed": job.cfg.seed,
        "count": family.len(),
        "d_squared_failures": d2_failures,
        "data_failures": data_failures,
        "betti_mismatches": mismatches,
    }))
}

fn expect(name: &str, got: &Betti, want: &[(i64, usize)]) -> Value {
    let want: Betti = want.iter().copied().collect();
    json!({"check": name, "ok": got == &want, "expected": want})
}

/// Reload the emitted document and run verify and cohomology on it.
fn pipeline(job: &mut Job, doc: &ModelDoc) -> Result<(GradedComplex, Vec<Value>, Betti), CliError> {
    let text = schema::to_json(doc);
    let back = schema::parse(&text)?;
    let l = schema::load(&back, &job.engine_config())?;
    job.model = Some(text + "\n");
    let (c, trace) = job.differential(&l.model)?;
    let d2 = c.verify_d_squared();
    let betti = if d2.is_empty() { betti(&c)? } else { Betti::new() };
    let round_trip = json!({"check": "round_trip", "ok": &back == doc});
    Ok((c, vec![round_trip, check(&d2, &trace)], betti))
}

fn demo(job: &mut Job) -> Result<Value, CliError> {
    let name = job.cfg.demo.clone().ok_or_else(|| CliError::Usage("missing demo name".into()))?;
    let ecfg = job.engine_config();
    let sphere = [(0, 1), (2, 1)];
    let mut report = serde_json::Map::new();
    let (doc, mut checks, betti) = match name.as_str() {
        "s2-height" | "t2-tilt" => {
            let (surface, want): (_, &[(i64, usize)]) = if name == "s2-height" {
                (SurfaceModel::sphere_height(), &sphere)
            } else {
                (SurfaceModel::torus_tilted(0.1), &[(0, 1), (1, 2), (2, 1)])
            };
            let mc = build_morse_flow_category(&surface, &ecfg).map_err(engine)?;
            report.insert("critical_points".into(), json!(mc.critical.len()));
            report.insert("flow_lines".into(), json!(mc.lines.len()));
            let doc = schema::morse_doc(&mc);
            let (_, mut checks, betti) = pipeline(job, &doc)?;
            checks.push(expect("betti", &betti, want));
            (doc, checks, betti)
        }
        "s2-bott" => {
            let ex = morsebott_s2(CircleVariant::A, &ecfg).map_err(engine)?;
            let raw: Vec<(String, f64)> = ex.raw.iter().map(|(k, v)| (k.to_string(), *v)).collect();
            let doc = schema::builtin_doc(&ex.model, "s2-bott", Some(CircleVariant::A));
            let (c, mut checks, betti) = pipeline(job, &doc)?;
            let d1 = c.block_or_zero(0, 1);
            let snapped = (0..d1.rows()).all(|i| (0..d1.cols()).all(|j| d1[(i, j)].abs().is_one() || d1[(i, j)].is_zero()))
                && rank(&d1) > 0;
            report.insert("pole_signs".into(), json!(ex.pole_signs));
            report.insert("d1".into(), json!(d1));
            checks.push(quadrature(&raw, job.cfg.tol));
            checks.push(json!({"check": "d1_snapped", "ok": snapped}));
            checks.push(expect("betti", &betti, &sphere));
            (doc, checks, betti)
        }
        "continuation" => {
            let ct = sphere_continuation(CONTINUATION_TILT, &ecfg).map_err(engine)?;
            let doc = schema::continuation_doc(&ct);
            let (_, mut checks, betti) = pipeline(job, &doc)?;
            let l = schema::load(&doc, &ecfg)?;
            let m = l.morphism.expect("continuation documents carry a morphism");
            let a = assemble_morphism_map_traced(&m).map_err(compute)?;
            job.trace("φ", &a.trace);
            checks.push(check(&a.value.verify_chain_map(), &a.trace));
            let cohomology = if ok(&checks) { induced(&a.value)? } else { Value::Null };
            checks.push(json!({"check": "induced_iso", "ok": cohomology["iso"] == json!(true)}));
            checks.push(expect("betti", &betti, &sphere));
            report.insert("tilt".into(), json!(CONTINUATION_TILT));
            report.insert("flow_lines".into(), json!(ct.lines.len()));
            report.insert("map".into(), json!(a.value.total_matrix()));
            report.insert("cohomology".into(), cohomology);
            (doc, checks, betti)
        }
        other => return Err(CliError::Usage(format!("unknown demo {other:?}"))),
    };
    checks.sort_by(|a, b| a["check"].as_str().cmp(&b["check"].as_str()));
    report.insert("passed".into(), json!(ok(&checks)));
    report.insert("demo".into(), json!(name));
    report.insert("betti".into(), json!(betti));
    report.insert("checks".into(), json!(checks));
    report.insert("model".into(), serde_json::to_value(&doc).expect("documents always serialize"));
    Ok(Value::Object(report))
}
