//! Jobs: a parsed input plus a command, executed into a deterministic report.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use jetlie::algebra::Rat;
use jetlie::determine::{determining_system, integrability_residues};
use jetlie::jet::{coords_up_to, SystemSpec};
use jetlie::manifold::{self, ManifoldSpec};
use jetlie::prolong::closed::{closed_form_check_with, supported_table, Reading};
use jetlie::prolong::{BaseSpace, Prolonger, VectorField};
use jetlie::solve::{ansatz_solve, theorem1_bound};
use jetlie::symfields::{
    closure_check, exp_flow, family_fields, finite_symmetry_check, generator_family,
    sample_solutions, Family,
};
use jetlie::Error;

use crate::dsl::{format_jetpoly, format_poly, print_document, Document};

/// What to do with the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Prolong { kappa: Option<usize> },
    Determine,
    Solve { degree: u32 },
    VerifyClosedForms { kappa: usize, n: Option<usize>, m: Option<usize>, reading: Reading },
    Closure { family: Family, n: usize, m: usize, kappa: usize },
    FiniteCheck { family: Family, n: usize, m: usize, kappa: usize, params: Vec<Rat> },
    ManifoldAnalyze { kmax: Option<usize> },
    Bound { n: u64, m: u64, p: u64, l0: u64, l0_star: u64, mu0: u64 },
    Theorem1 { n: usize, m: usize, kappa: usize },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Prolong { .. } => "prolong",
            Command::Determine => "determine",
            Command::Solve { .. } => "solve",
            Command::VerifyClosedForms { .. } => "verify-closed-forms",
            Command::Closure { .. } => "closure",
            Command::FiniteCheck { .. } => "finite-check",
            Command::ManifoldAnalyze { .. } => "manifold-analyze",
            Command::Bound { .. } | Command::Theorem1 { .. } => "bound",
        }
    }

    fn needs(&self) -> Option<&'static str> {
        match self {
            Command::Prolong { .. } | Command::Determine | Command::Solve { .. } => Some("system"),
            Command::ManifoldAnalyze { .. } => Some("manifold"),
            _ => None,
        }
    }
}

/// A validated unit of work.
#[derive(Clone, Debug)]
pub struct JobSpec {
    pub input: Option<Document>,
    /// Raw input bytes, hashed into the report.
    pub source: Option<String>,
    pub command: Command,
}

/// Errors that make a job unrunnable (exit code 2).
#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("{0}")]
    Input(#[from] crate::dsl::DslError),
    #[error("{0}")]
    Engine(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl JobSpec {
    pub fn new(source: Option<String>, command: Command) -> Result<JobSpec, JobError> {
        let input = match &source {
            Some(s) => Some(crate::dsl::parse_document(s)?),
            None => None,
        };
        match (command.needs(), &input) {
            (Some(kind), Some(doc)) if doc.kind() != kind => {
                return Err(JobError::Usage(format!(
                    "{} needs a {kind} block, the input holds a {} block",
                    command.name(),
                    doc.kind()
                )))
            }
            (Some(kind), None) => {
                return Err(JobError::Usage(format!("{} needs a {kind} input file", command.name())))
            }
            _ => {}
        }
        Ok(JobSpec {
            input,
            source,
            command,
        })
    }

    /// Canonical text of the input block, if any.
    pub fn input_text(&self) -> Option<String> {
        self.input.as_ref().map(print_document)
    }

    fn digest(&self) -> String {
        let mut h = Sha256::new();
        match &self.source {
            Some(s) => h.update(s.as_bytes()),
            None => h.update(format!("{:?}", self.command).as_bytes()),
        }
        hex::encode(h.finalize())
    }

    fn system(&self) -> &SystemSpec {
        match &self.input {
            Some(Document::System(s)) => s,
            _ => unreachable!("validated in JobSpec::new"),
        }
    }

    fn manifold(&self) -> &ManifoldSpec {
        match &self.input {
            Some(Document::Manifold(s)) => s,
            _ => unreachable!("validated in JobSpec::new"),
        }
    }
}

/// A finished report.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    /// 0 on success, 1 when a check failed.
    pub exit_code: i32,
    pub text: String,
    pub json: Value,
}

struct Report {
    lines: Vec<String>,
    results: Value,
    residuals: Value,
    dimensions: Value,
    generators: Value,
    ranks: Value,
    failed: bool,
}

impl Report {
    fn new() -> Report {
        Report {
            lines: Vec::new(),
            results: Value::Null,
            residuals: Value::Null,
            dimensions: Value::Null,
            generators: Value::Null,
            ranks: Value::Null,
            failed: false,
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

fn field_coeffs(f: &VectorField) -> Value {
    Value::Array(f.coeffs().iter().map(|p| Value::String(format_poly(p))).collect())
}

/// Runs a job.
pub fn run(job: &JobSpec) -> Result<Outcome, JobError> {
    let mut r = Report::new();
    match &job.command {
        Command::Prolong { kappa } => prolong(job.system(), *kappa, &mut r)?,
        Command::Determine => determine(job.system(), &mut r)?,
        Command::Solve { degree } => solve(job.system(), *degree, &mut r)?,
        Command::VerifyClosedForms { kappa, n, m, reading } => {
            verify(*kappa, *n, *m, *reading, &mut r)?
        }
        Command::Closure { family, n, m, kappa } => closure(*family, *n, *m, *kappa, &mut r)?,
        Command::FiniteCheck { family, n, m, kappa, params } => {
            finite(*family, *n, *m, *kappa, params, &mut r)?
        }
        Command::ManifoldAnalyze { kmax } => analyze(job.manifold(), *kmax, &mut r)?,
        Command::Bound { n, m, p, l0, l0_star, mu0 } => {
            let (k0, b) = manifold::jet_bound(*n, *m, *p, *l0, *l0_star, *mu0)?;
            r.line(format!("kappa0 = {k0}"));
            r.line(format!("bound = {b}"));
            r.dimensions = json!({"kappa0": k0, "bound": b.to_string()});
        }
        Command::Theorem1 { n, m, kappa } => {
            let b = theorem1_bound(*n, *m, *kappa)?;
            r.line(format!("dimension bound for (n, m, kappa) = ({n}, {m}, {kappa}): {b}"));
            r.dimensions = json!({"n": n, "m": m, "kappa": kappa, "bound": b.to_string()});
        }
    }
    let json = json!({
        "command": job.command.name(),
        "input_digest": job.digest(),
        "results": r.results,
        "residuals": r.residuals,
        "dimensions": r.dimensions,
        "generators": r.generators,
        "ranks": r.ranks,
    });
    let mut text = r.lines.join("\n");
    text.push('\n');
    Ok(Outcome {
        exit_code: i32::from(r.failed),
        text,
        json,
    })
}

fn prolong(spec: &SystemSpec, kappa: Option<usize>, r: &mut Report) -> Result<(), Error> {
    let kappa = kappa.unwrap_or(spec.kappa());
    let base = spec.base();
    let field = VectorField::symbolic(base);
    let mut pr = Prolonger::new(&field);
    let mut results = serde_json::Map::new();
    for c in coords_up_to(base.n, base.m, kappa) {
        if c.order() == 0 {
            continue;
        }
        let name = c.fmt_with(base.xnames(), base.unames());
        let e = pr.coeff(&c)?;
        r.line(format!("prolongation coefficient for {name}: {e}"));
        results.insert(name, Value::String(e.to_string()));
    }
    r.dimensions = json!({"n": base.n, "m": base.m, "kappa": kappa, "coefficients": results.len()});
    r.results = Value::Object(results);
    Ok(())
}

fn determine(spec: &SystemSpec, r: &mut Report) -> Result<(), Error> {
    let b = spec.base();
    let sys = determining_system(spec)?;
    let lines = sys.render();
    r.line(format!("{} determining equations", lines.len()));
    for l in &lines {
        r.line(format!("  {l}"));
    }
    let residues = integrability_residues(spec)?;
    let nonzero: Vec<Value> = residues
        .iter()
        .filter(|x| !x.value.is_zero())
        .map(|x| Value::String(format!(
                "{}: {}",
                x.parent.fmt_with(b.xnames(), b.unames()),
                format_jetpoly(&x.value)
            )))
        .collect();
    if nonzero.is_empty() {
        r.line("integrability residues vanish");
    } else {
        r.failed = true;
        r.line(format!("{} integrability residues do not vanish", nonzero.len()));
    }
    r.results = json!({"equations": lines});
    r.residuals = json!({"integrability": nonzero});
    r.dimensions = json!({"equations": lines.len()});
    Ok(())
}

fn solve(spec: &SystemSpec, degree: u32, r: &mut Report) -> Result<(), Error> {
    let sys = determining_system(spec)?;
    let rep = ansatz_solve(&sys, degree)?;
    r.line(format!(
        "dimension {} at ansatz degree {} ({})",
        rep.dimension,
        rep.ansatz_degree,
        if rep.stabilized { "stabilized" } else { "not yet stabilized" }
    ));
    let mut dims = json!({
        "dimension": rep.dimension,
        "ansatz_degree": rep.ansatz_degree,
        "stabilized": rep.stabilized,
    });
    if spec.is_homogeneous() {
        let b = theorem1_bound(spec.n(), spec.m(), spec.kappa())?;
        r.line(format!("dimension bound: {b}"));
        dims["theorem1_bound"] = json!(b.to_string());
    }
    for (i, g) in rep.generators.iter().enumerate() {
        r.line(format!("  X{} = {g}", i + 1));
    }
    r.generators = Value::Array(rep.generators.iter().map(field_coeffs).collect());
    r.results = json!({"generators": rep.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>()});
    r.dimensions = dims;
    Ok(())
}

fn verify(
    kappa: usize,
    n: Option<usize>,
    m: Option<usize>,
    reading: Reading,
    r: &mut Report,
) -> Result<(), Error> {
    let rows: Vec<_> = supported_table()
        .into_iter()
        .filter(|(tn, tm, f)| {
            f.order() == kappa && n.map_or(true, |v| v == *tn) && m.map_or(true, |v| v == *tm)
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::UnsupportedShape(format!(
            "no tabulated closed form of order {kappa} for the requested dimensions"
        )));
    }
    let mut results = Vec::new();
    for (tn, tm, f) in rows {
        let rep = closed_form_check_with(tn, tm, f, reading)?;
        let status = if rep.is_match() { "match" } else { "mismatch" };
        r.line(format!(
            "{f} (n={tn}, m={tm}): {status} ({} monomials compared, {} mismatches)",
            rep.compared,
            rep.mismatches.len()
        ));
        if !rep.is_match() {
            r.failed = true;
            for mm in rep.mismatches.iter().take(5) {
                r.line(format!(
                    "    {}: expected {}, found {}",
                    mm.monomial, mm.expected, mm.actual
                ));
            }
        }
        results.push(json!({
            "formula": f.to_string(),
            "n": tn,
            "m": tm,
            "match": rep.is_match(),
            "compared": rep.compared,
            "mismatches": rep.mismatches.len(),
        }));
    }
    r.results = Value::Array(results);
    Ok(())
}

fn closure(family: Family, n: usize, m: usize, kappa: usize, r: &mut Report) -> Result<(), Error> {
    let fields = family_fields(family, n, m, kappa)?;
    let rep = closure_check(&fields)?;
    r.line(format!(
        "family {family} (n={n}, m={m}, kappa={kappa}): {} generators, span dimension {}",
        fields.len(),
        rep.dimension
    ));
    if rep.closed {
        r.line("closed under brackets");
    } else {
        r.failed = true;
        if let Some((a, b, f)) = &rep.offending {
            r.line(format!("not closed: [X{}, X{}] = {f} leaves the span", a + 1, b + 1));
        } else {
            r.line("not closed");
        }
    }
    r.results = json!({"closed": rep.closed});
    r.dimensions = json!({"generators": fields.len(), "dimension": rep.dimension});
    r.generators = Value::Array(fields.iter().map(field_coeffs).collect());
    Ok(())
}

fn finite(
    family: Family,
    n: usize,
    m: usize,
    kappa: usize,
    params: &[Rat],
    r: &mut Report,
) -> Result<(), Error> {
    let b = BaseSpace::standard(n, m);
    let sols = sample_solutions(&b, kappa);
    let mut results = Vec::new();
    let mut passed = 0;
    for g in generator_family(family, n, m, kappa)? {
        for s in params {
            let h = exp_flow(&b, &g, s)?;
            let rep = finite_symmetry_check(&h, kappa, &sols)?;
            let ok = rep.passed && rep.exact;
            passed += usize::from(ok);
            if !ok {
                r.failed = true;
                r.line(format!("FAIL {g} at s = {s}: {}", rep.failures.join("; ")));
            }
            results.push(json!({"generator": g.to_string(), "s": s.to_string(), "passed": ok}));
        }
    }
    r.line(format!(
        "{passed} of {} flow checks passed on {} sample solutions",
        results.len(),
        sols.len()
    ));
    r.results = Value::Array(results);
    Ok(())
}

fn analyze(spec: &ManifoldSpec, kmax: Option<usize>, r: &mut Report) -> Result<(), Error> {
    let a = manifold::analyze(spec, kmax)?;
    let summary = a.summary();
    for l in &summary {
        r.line(l.clone());
    }
    r.line(format!(
        "dual equations (residual {} to degree {}):",
        if a.dual_residual_zero { "zero" } else { "NONZERO" },
        spec.truncation()
    ));
    for l in a.dual.to_string().lines() {
        r.line(format!("  {l}"));
    }
    if !a.dual_residual_zero {
        r.failed = true;
    }
    let mut pde = Value::Null;
    if a.parameters.solvable {
        if let Ok(sys) = manifold::pde_from_manifold(spec) {
            r.line(format!("associated system of order {}:", sys.kappa()));
            let b = sys.base();
            let mut eqs = Vec::new();
            for (c, f) in sys.equations() {
                let s = format!("{} = {}", c.fmt_with(b.xnames(), b.unames()), format_jetpoly(f));
                r.line(format!("  {s}"));
                eqs.push(s);
            }
            pde = json!(eqs);
        }
    }
    r.results = json!({
        "summary": summary,
        "dual": a.dual.outputs().iter().map(format_poly).collect::<Vec<_>>(),
        "degeneracy_witness": a.degeneracy.as_ref().map(field_coeffs),
        "covering": a.covering.covering,
        "k_min": a.covering.k_min,
        "pde": pde,
    });
    r.residuals = json!({"dual_functional_equation_zero": a.dual_residual_zero});
    r.dimensions = json!({
        "n": spec.n(), "m": spec.m(), "p": spec.p(),
        "dim": spec.dim(), "truncation": spec.truncation(),
        "l0": a.parameters.solvable.then_some(a.parameters.order),
        "l0_star": a.variables.solvable.then_some(a.variables.order),
    });
    r.ranks = json!({
        "parameters": a.parameters.rank,
        "variables": a.variables.rank,
        "chain_profile": a.covering.rank_profile,
    });
    Ok(())
}
