//! The `acc` command line. [`run_command`] does all the work and returns the exit code
//! with both output streams, so tests can call it in-process.
//!
//! Exit codes: 0 on success, 1 when the input is well formed but fails a mathematical
//! check (the error kind is printed), 2 for usage errors and unreadable documents.

use std::fmt::{self, Display};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::acc::{compute_degrees, Acc, AccError, ComponentId, PointId};
use crate::admissibility::{
    classify_divisors, family_from_pencil, is_admissible_family, transport_to_end,
    AdmissibilityError, VectorFamily,
};
use crate::blowup::{
    auto_resolve, check_normal_crossing, validate_resolution_script, BlowupError, NcWitness,
    ResolutionTrace,
};
use crate::io::{
    bind_acc, bind_family, bind_pencil, bind_script, parse_document, script_section, Document,
    DocumentError, Names, PencilSection,
};
use crate::linalg::Matrix;
use crate::pencil::{
    is_primitive, primitive_refinement, verify_pencil, BasePointReport, CombinatorialPencil,
    PencilError, PointStatus,
};
use crate::rational::format_rational;
use crate::spectra::{build_spectral_data, decompose_boxes, SpectraError};

pub const DEFAULT_BUDGET: usize = 32;

#[derive(Parser, Debug)]
#[command(
    name = "acc",
    version,
    about = "Combinatorial checks for plane curve arrangements"
)]
struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ResolutionArgs {
    /// Resolution script document (overrides a script inside FILE).
    #[arg(long, value_name = "SCRIPT", conflicts_with = "auto")]
    script: Option<PathBuf>,
    /// Search for a resolution instead of replaying a script.
    #[arg(long)]
    auto: bool,
    /// Maximum number of σ-processes tried by --auto.
    #[arg(long, env = "ACC_PENCIL_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the ACC axioms.
    Validate { file: PathBuf },
    /// Pairwise intersections and degrees.
    Degrees { file: PathBuf },
    /// Replay a resolution script or search for one.
    Resolve {
        file: PathBuf,
        #[command(flatten)]
        resolution: ResolutionArgs,
    },
    /// Verify a pencil, list its base points and, given a resolution, test primitivity.
    CheckPencil {
        file: PathBuf,
        #[arg(long, value_name = "PENCIL")]
        pencil: Option<PathBuf>,
        #[command(flatten)]
        resolution: ResolutionArgs,
    },
    /// J, D and Q of a resolved family, with boxes, Vinberg types and kernels.
    Classify {
        file: PathBuf,
        #[arg(long, value_name = "PENCIL")]
        pencil: Option<PathBuf>,
        /// Vector family on the original components (defaults to the pencil's family).
        #[arg(long, value_name = "FAMILY")]
        family: Option<PathBuf>,
        #[command(flatten)]
        resolution: ResolutionArgs,
    },
    /// Refine a pencil into a primitive one.
    Refine {
        file: PathBuf,
        #[arg(long, value_name = "PENCIL")]
        pencil: Option<PathBuf>,
        #[command(flatten)]
        resolution: ResolutionArgs,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input { path: PathBuf, message: String },
    Document { path: PathBuf, error: DocumentError },
    Domain { kind: &'static str, message: String },
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Domain { .. } => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Input { .. } => "InputError",
            CliError::Document { error, .. } => error.kind(),
            CliError::Domain { kind, .. } => kind,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Input { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Document { path, error } => write!(f, "{}: {error}", path.display()),
            CliError::Domain { message, .. } => f.write_str(message),
        }
    }
}

macro_rules! domain_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain { kind: e.kind(), message: e.to_string() }
            }
        }
    )*};
}

domain_errors!(
    AccError,
    BlowupError,
    AdmissibilityError,
    SpectraError,
    PencilError
);

struct Report {
    text: String,
    json: Value,
}

pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(&cli.command) {
        Ok(report) => Outcome {
            code: 0,
            stdout: if cli.json {
                pretty(&report.json)
            } else {
                report.text
            },
            stderr: String::new(),
        },
        Err(e) => {
            let line = format!("error: {}: {e}\n", e.kind());
            if cli.json {
                Outcome {
                    code: e.code(),
                    stdout: pretty(&json!({"error": {"kind": e.kind(), "message": e.to_string()}})),
                    stderr: line,
                }
            } else {
                Outcome {
                    code: e.code(),
                    stdout: String::new(),
                    stderr: line,
                }
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Validate { file } => validate(&Loaded::open(file)?),
        Command::Degrees { file } => degrees(&Loaded::open(file)?),
        Command::Resolve { file, resolution } => {
            let loaded = Loaded::open(file)?;
            let resolved = loaded.resolve(resolution)?.ok_or_else(|| {
                CliError::Usage("no resolution script; pass --script or --auto".into())
            })?;
            resolve(&resolved)
        }
        Command::CheckPencil {
            file,
            pencil,
            resolution,
        } => {
            let loaded = Loaded::open(file)?;
            let resolved = loaded.resolve(resolution)?;
            check_pencil(&loaded, pencil.as_deref(), resolved.as_ref())
        }
        Command::Classify {
            file,
            pencil,
            family,
            resolution,
        } => {
            let loaded = Loaded::open(file)?;
            let resolved = loaded.resolve(resolution)?.ok_or_else(|| {
                CliError::Usage("classify needs a resolution; pass --script or --auto".into())
            })?;
            classify(&loaded, pencil.as_deref(), family.as_deref(), &resolved)
        }
        Command::Refine {
            file,
            pencil,
            resolution,
        } => {
            let loaded = Loaded::open(file)?;
            let resolved = loaded.resolve(resolution)?.ok_or_else(|| {
                CliError::Usage("refine needs a resolution; pass --script or --auto".into())
            })?;
            refine(&loaded, pencil.as_deref(), &resolved)
        }
    }
}

fn read_document(path: &Path) -> Result<Document, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    parse_document(&bytes).map_err(|error| CliError::Document {
        path: path.to_owned(),
        error,
    })
}

struct Loaded {
    path: PathBuf,
    doc: Document,
    acc: Acc,
    names: Names,
}

struct Resolved {
    trace: ResolutionTrace,
    /// Names of every stage.
    names: Vec<Names>,
    source: &'static str,
}

impl Resolved {
    fn last_names(&self) -> &Names {
        self.names.last().expect("at least one stage")
    }
}

impl Loaded {
    fn open(path: &Path) -> Result<Self, CliError> {
        let doc = read_document(path)?;
        let (acc, names) = bind_acc(&doc).map_err(|error| CliError::Document {
            path: path.to_owned(),
            error,
        })??;
        Ok(Loaded {
            path: path.to_owned(),
            doc,
            acc,
            names,
        })
    }

    fn doc_error(&self, path: Option<&Path>, error: DocumentError) -> CliError {
        CliError::Document {
            path: path.unwrap_or(&self.path).to_owned(),
            error,
        }
    }

    fn resolve(&self, args: &ResolutionArgs) -> Result<Option<Resolved>, CliError> {
        if args.auto {
            let trace = auto_resolve(&self.acc, args.budget)?;
            let names = self.names.along_trace(&trace);
            return Ok(Some(Resolved {
                trace,
                names,
                source: "search",
            }));
        }
        let (steps, path) = match &args.script {
            Some(path) => {
                let doc = read_document(path)?;
                let steps = doc.script.ok_or_else(|| {
                    self.doc_error(Some(path), DocumentError::MissingSection("script"))
                })?;
                (steps, Some(path.as_path()))
            }
            None => match &self.doc.script {
                Some(steps) => (steps.clone(), None),
                None => return Ok(None),
            },
        };
        let (specs, names) =
            bind_script(&self.acc, &self.names, &steps).map_err(|e| self.doc_error(path, e))?;
        let trace = validate_resolution_script(&self.acc, &specs)?;
        Ok(Some(Resolved {
            trace,
            names,
            source: "script",
        }))
    }

    fn pencil_section(&self, path: Option<&Path>) -> Result<PencilSection, CliError> {
        match path {
            Some(p) => read_document(p)?
                .pencil
                .ok_or_else(|| self.doc_error(Some(p), DocumentError::MissingSection("pencil"))),
            None => self
                .doc
                .pencil
                .clone()
                .ok_or_else(|| CliError::Usage("no pencil; pass --pencil".into())),
        }
    }

    fn pencil(
        &self,
        path: Option<&Path>,
    ) -> Result<(CombinatorialPencil, BasePointReport), CliError> {
        let section = self.pencil_section(path)?;
        let (fibers, mult) =
            bind_pencil(&self.names, &section).map_err(|e| self.doc_error(path, e))?;
        let degrees = compute_degrees(&self.acc)?;
        Ok(verify_pencil(&self.acc, &degrees, &fibers, &mult)?)
    }
}

/// Left-aligned row labels, right-aligned cells of one common width.
fn table(header: &[String], rows: &[(String, Vec<String>)]) -> String {
    let label_width = rows
        .iter()
        .map(|(l, _)| l.chars().count())
        .max()
        .unwrap_or(0);
    let width = header
        .iter()
        .chain(rows.iter().flat_map(|(_, r)| r))
        .map(|c| c.chars().count())
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    let line = |label: &str, cells: &[String]| {
        let mut s = format!("{label:<label_width$}");
        for c in cells {
            s.push_str(&format!("  {c:>width$}"));
        }
        s.trim_end().to_owned() + "\n"
    };
    if !header.is_empty() {
        out.push_str(&line("", header));
    }
    for (label, cells) in rows {
        out.push_str(&line(label, cells));
    }
    out
}

fn matrix_rows(m: &Matrix, labels: &[String]) -> Vec<(String, Vec<String>)> {
    (0..m.rows())
        .map(|i| {
            (
                labels[i].clone(),
                m.row(i).iter().map(format_rational).collect(),
            )
        })
        .collect()
}

fn matrix_json(m: &Matrix) -> Value {
    json!((0..m.rows())
        .map(|i| m.row(i).iter().map(format_rational).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn component_names(names: &Names, cs: &[ComponentId]) -> Vec<String> {
    cs.iter().map(|&c| names.component(c).to_owned()).collect()
}

fn braces(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

fn validate(l: &Loaded) -> Result<Report, CliError> {
    let acc = &l.acc;
    let nc = check_normal_crossing(acc);
    let mut text = format!(
        "valid ACC: {} components, {} points, {} branches\n",
        acc.component_count(),
        acc.points().len(),
        acc.branch_count()
    );
    let witness = nc.err().map(|w| match w {
        NcWitness::BranchCount { point, count } => {
            format!("point {} carries {count} branches", l.names.point(point))
        }
        NcWitness::Multiplicity { a, b, mu } => format!(
            "branches {} and {} meet with multiplicity {mu}",
            l.names.branch(a),
            l.names.branch(b)
        ),
    });
    match &witness {
        None => text.push_str("normal crossing: yes\n"),
        Some(w) => text.push_str(&format!("normal crossing: no ({w})\n")),
    }
    for &p in acc.points() {
        let branches: Vec<String> = acc
            .branches_at(p)
            .iter()
            .map(|&b| {
                format!(
                    "{} [{}]",
                    l.names.branch(b),
                    l.names.component(acc.owner(b))
                )
            })
            .collect();
        text.push_str(&format!(
            "  {}: {}\n",
            l.names.point(p),
            branches.join(", ")
        ));
    }
    Ok(Report {
        text,
        json: json!({
            "valid": true,
            "components": acc.component_count(),
            "points": acc.points().len(),
            "branches": acc.branch_count(),
            "normal_crossing": witness.is_none(),
            "witness": witness,
        }),
    })
}

fn degrees(l: &Loaded) -> Result<Report, CliError> {
    let degrees = compute_degrees(&l.acc)?;
    let labels = l.names.components.clone();
    let rows: Vec<(String, Vec<String>)> = l
        .acc
        .components()
        .map(|i| {
            let cells = l
                .acc
                .components()
                .map(|j| {
                    if i == j {
                        "-".to_owned()
                    } else {
                        degrees.pairwise(i, j).to_string()
                    }
                })
                .collect();
            (labels[i.0].clone(), cells)
        })
        .collect();
    let mut text = String::from("pairwise intersections\n");
    text.push_str(&table(&labels, &rows));
    text.push_str("\ndegrees\n");
    let degree_rows: Vec<(String, Vec<String>)> = l
        .acc
        .components()
        .map(|c| {
            (
                labels[c.0].clone(),
                vec![format_rational(degrees.degree(c))],
            )
        })
        .collect();
    text.push_str(&table(&[], &degree_rows));
    let pairwise: Vec<Vec<u64>> = l
        .acc
        .components()
        .map(|i| {
            l.acc
                .components()
                .map(|j| if i == j { 0 } else { degrees.pairwise(i, j) })
                .collect()
        })
        .collect();
    Ok(Report {
        text,
        json: json!({
            "components": labels,
            "pairwise": pairwise,
            "degrees": degrees.degrees().iter().map(format_rational).collect::<Vec<_>>(),
        }),
    })
}

fn resolve(r: &Resolved) -> Result<Report, CliError> {
    let mut text = format!(
        "resolution ({}): {} steps\n",
        r.source,
        r.trace.steps().len()
    );
    let mut steps_json = Vec::new();
    for (i, step) in r.trace.steps().iter().enumerate() {
        let before = &r.names[i];
        let after = &r.names[i + 1];
        let clusters: Vec<Vec<String>> = step
            .spec
            .clusters
            .iter()
            .map(|c| c.iter().map(|&b| before.branch(b).to_owned()).collect())
            .collect();
        let new_points: Vec<String> = step
            .created
            .points
            .iter()
            .map(|&p| after.point(p).to_owned())
            .collect();
        let nu: Vec<(String, u64)> = step
            .component_nu
            .iter()
            .map(|(&c, &n)| (before.component(c).to_owned(), n))
            .collect();
        let exceptional = after.component(step.created.exceptional).to_owned();
        text.push_str(&format!(
            "step {}: blow up {} into {}\n  clusters: {}\n  new points: {}\n  nu: {}\n",
            i + 1,
            before.point(step.spec.point),
            exceptional,
            clusters
                .iter()
                .map(|c| braces(c))
                .collect::<Vec<_>>()
                .join(" "),
            new_points.join(", "),
            nu.iter()
                .map(|(c, n)| format!("{c}={n}"))
                .collect::<Vec<_>>()
                .join(", "),
        ));
        steps_json.push(json!({
            "point": before.point(step.spec.point),
            "exceptional": exceptional,
            "clusters": clusters,
            "new_points": new_points,
            "component_nu": nu.iter().map(|(c, n)| json!([c, n])).collect::<Vec<_>>(),
        }));
    }
    let last = r.trace.last();
    text.push_str(&format!(
        "final stage: {} components, {} points, {} branches, normal crossing\n",
        last.component_count(),
        last.points().len(),
        last.branch_count()
    ));
    let script = script_section(&r.trace, &r.names);
    Ok(Report {
        text,
        json: json!({
            "source": r.source,
            "steps": steps_json,
            "script": script,
            "final": {
                "components": last.component_count(),
                "points": last.points().len(),
                "branches": last.branch_count(),
            },
        }),
    })
}

fn pencil_text(p: &CombinatorialPencil, names: &Names) -> String {
    let mut text = format!(
        "pencil: {} fibers, fiber degree {}\n",
        p.fibers().len(),
        format_rational(p.fiber_degree())
    );
    for (j, fiber) in p.fibers().iter().enumerate() {
        let members: Vec<String> = fiber
            .iter()
            .map(|&c| match p.multiplicity(c) {
                1 => names.component(c).to_owned(),
                m => format!("{}^{m}", names.component(c)),
            })
            .collect();
        text.push_str(&format!("  F{j}: {}\n", members.join(" ")));
    }
    text
}

fn pencil_json(p: &CombinatorialPencil, names: &Names) -> Value {
    json!({
        "fibers": p.fibers().iter().map(|f| component_names(names, f)).collect::<Vec<_>>(),
        "multiplicities": p
            .multiplicities()
            .iter()
            .enumerate()
            .map(|(c, &m)| (names.components[c].clone(), json!(m)))
            .collect::<serde_json::Map<_, _>>(),
        "fiber_degree": format_rational(p.fiber_degree()),
    })
}

fn base_points_text(report: &BasePointReport, names: &Names) -> (String, Value) {
    let mut text = String::new();
    let mut out = Vec::new();
    for (p, status) in &report.points {
        let p: PointId = *p;
        match status {
            PointStatus::SingleFiber(j) => {
                text.push_str(&format!("  {}: inside F{j}\n", names.point(p)));
                out.push(json!({"point": names.point(p), "fiber": j}));
            }
            PointStatus::BasePoint(k) => {
                let entries: Vec<String> = k
                    .iter()
                    .map(|(&b, v)| format!("{}={v}", names.branch(b)))
                    .collect();
                text.push_str(&format!(
                    "  {}: base point, k: {}\n",
                    names.point(p),
                    entries.join(", ")
                ));
                out.push(json!({
                    "point": names.point(p),
                    "base_point": true,
                    "k": k.iter().map(|(&b, v)| json!([names.branch(b), v])).collect::<Vec<_>>(),
                }));
            }
        }
    }
    (text, Value::Array(out))
}

fn check_pencil(
    l: &Loaded,
    pencil_path: Option<&Path>,
    r: Option<&Resolved>,
) -> Result<Report, CliError> {
    let (pencil, base) = l.pencil(pencil_path)?;
    let mut text = pencil_text(&pencil, &l.names);
    text.push_str("points\n");
    let (base_text, base_json) = base_points_text(&base, &l.names);
    text.push_str(&base_text);
    let mut primitivity = Value::Null;
    match r {
        Some(r) => {
            let fam = transport_to_end(&r.trace, &family_from_pencil(&l.acc, &pencil)?)?;
            let report = is_primitive(&pencil, &r.trace, &fam)?;
            let witness = report.witness.as_ref().map(|w| w.to_string());
            match &witness {
                None => text.push_str("primitive: yes\n"),
                Some(w) => text.push_str(&format!("primitive: no ({w})\n")),
            }
            primitivity = json!({"primitive": report.primitive, "witness": witness});
        }
        None => text.push_str("primitive: not checked (no resolution)\n"),
    }
    Ok(Report {
        text,
        json: json!({
            "pencil": pencil_json(&pencil, &l.names),
            "points": base_json,
            "primitivity": primitivity,
        }),
    })
}

fn classify(
    l: &Loaded,
    pencil_path: Option<&Path>,
    family_path: Option<&Path>,
    r: &Resolved,
) -> Result<Report, CliError> {
    let degrees = compute_degrees(&l.acc)?;
    let (fam, origin): (VectorFamily, &str) = match (family_path, &l.doc.family) {
        (Some(p), _) => {
            let section = read_document(p)?
                .family
                .ok_or_else(|| l.doc_error(Some(p), DocumentError::MissingSection("family")))?;
            (
                bind_family(&l.names, &section).map_err(|e| l.doc_error(Some(p), e))?,
                "file",
            )
        }
        (None, Some(section)) if pencil_path.is_none() => (
            bind_family(&l.names, section).map_err(|e| l.doc_error(None, e))?,
            "file",
        ),
        _ => {
            let (pencil, _) = l.pencil(pencil_path)?;
            (family_from_pencil(&l.acc, &pencil)?, "pencil")
        }
    };
    let admissible = is_admissible_family(&l.acc, &fam)?;
    let last_fam = transport_to_end(&r.trace, &fam)?;
    let sd = build_spectral_data(&r.trace, &degrees, &last_fam)?;
    let mut boxes = decompose_boxes(&sd);
    boxes.classify()?;
    let classes = classify_divisors(&r.trace, &last_fam)?;
    let names = r.last_names();

    let kept = component_names(names, &sd.kept);
    let step_points: Vec<String> = sd
        .points
        .iter()
        .enumerate()
        .map(|(i, &p)| r.names[i].point(p).to_owned())
        .collect();
    let mut text = format!(
        "family: {} (dimension {}), admissible: {}\n",
        origin,
        fam.dim(),
        if admissible.admissible { "yes" } else { "no" }
    );
    text.push_str(&format!("kept: {}\n", kept.join(" ")));
    for (title, m, header) in [
        ("J", &sd.j, &step_points),
        ("D", &sd.d, &kept),
        ("Q", &sd.q, &kept),
    ] {
        text.push_str(&format!("\n{title} ({} x {})\n", m.rows(), m.cols()));
        text.push_str(&table(header, &matrix_rows(m, &kept)));
    }
    text.push_str("\nboxes\n");
    let mut boxes_json = Vec::new();
    for (i, b) in boxes.boxes.iter().enumerate() {
        let members = component_names(names, &b.members);
        let kind = b.vinberg.expect("classified").to_string();
        let kernel: Option<Vec<String>> = b
            .kernel
            .as_ref()
            .map(|k| k.iter().map(|x| x.to_string()).collect());
        text.push_str(&format!("  {}: {} {}", i + 1, braces(&members), kind));
        if let Some(k) = &kernel {
            text.push_str(&format!(" kernel ({})", k.join(", ")));
        }
        text.push('\n');
        boxes_json.push(json!({"members": members, "type": kind, "kernel": kernel}));
    }
    text.push_str("\nexceptional divisors\n");
    let mut divisors_json = Vec::new();
    let exceptional_rows: Vec<(String, Vec<String>)> = r
        .trace
        .last()
        .components()
        .filter(|&c| !r.trace.is_original(c))
        .map(|c| {
            let class = classes.class(c).to_string();
            divisors_json.push(json!({"name": names.component(c), "class": class}));
            (format!("  {}", names.component(c)), vec![class])
        })
        .collect();
    text.push_str(&table(&[], &exceptional_rows));
    Ok(Report {
        text,
        json: json!({
            "family": {"source": origin, "dim": fam.dim(), "admissible": admissible.admissible},
            "kept": kept,
            "steps": step_points,
            "J": matrix_json(&sd.j),
            "D": matrix_json(&sd.d),
            "Q": matrix_json(&sd.q),
            "boxes": boxes_json,
            "divisors": divisors_json,
        }),
    })
}

fn refine(l: &Loaded, pencil_path: Option<&Path>, r: &Resolved) -> Result<Report, CliError> {
    let degrees = compute_degrees(&l.acc)?;
    let (pencil, _) = l.pencil(pencil_path)?;
    let refinement = primitive_refinement(&l.acc, &degrees, &pencil, &r.trace)?;
    let names = r.last_names();
    let mut text = String::from("input ");
    text.push_str(&pencil_text(&pencil, &l.names));
    text.push_str("boxes\n");
    let mut boxes_json = Vec::new();
    for (i, (b, degree)) in refinement
        .boxes
        .boxes
        .iter()
        .zip(&refinement.box_degrees)
        .enumerate()
    {
        let members = component_names(names, &b.members);
        let kernel: Vec<String> = b
            .kernel
            .as_ref()
            .expect("affine boxes carry a kernel")
            .iter()
            .map(|x| x.to_string())
            .collect();
        text.push_str(&format!(
            "  {}: {} kernel ({}) degree {}\n",
            i + 1,
            braces(&members),
            kernel.join(", "),
            format_rational(degree)
        ));
        boxes_json
            .push(json!({"members": members, "kernel": kernel, "degree": format_rational(degree)}));
    }
    text.push_str("refined ");
    text.push_str(&pencil_text(&refinement.pencil, &l.names));
    let unchanged = refinement.pencil.fibers() == pencil.fibers()
        && refinement.pencil.multiplicities() == pencil.multiplicities();
    text.push_str(&format!(
        "unchanged: {}\n",
        if unchanged { "yes" } else { "no" }
    ));
    Ok(Report {
        text,
        json: json!({
            "input": pencil_json(&pencil, &l.names),
            "boxes": boxes_json,
            "refined": pencil_json(&refinement.pencil, &l.names),
            "unchanged": unchanged,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_alignment() {
        let rows = vec![("a".to_owned(), vec!["1".to_owned(), "-10".to_owned()])];
        assert_eq!(
            table(&["x".into(), "y".into()], &rows),
            "     x    y\na    1  -10\n"
        );
    }

    #[test]
    fn usage_errors_exit_with_two() {
        let out = run_command(["acc", "frobnicate"]);
        assert_eq!(out.code, 2);
        assert!(out.stdout.is_empty());
        let out = run_command(["acc", "--help"]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains("classify"));
    }
}
