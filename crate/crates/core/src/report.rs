//! Command implementations behind the `deriva` binary. Each command returns
//! the rendered output and an exit code; nothing here touches stdout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::algebra::GroupAlgebra;
use crate::derivation::{derivation_space, inner_derivation_space, innerness_witness, DerivationError, DerivationMatrix};
use crate::family::{verify_family, verify_inner_only, Dims, FamilyError, FamilySpec, Status, VerificationReport};
use crate::group::{Family, FiniteGroup, GroupError};
use crate::scalar::{make_field, Field, FieldSpec};
use crate::with_field;

/// Stable process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Mismatch = 1,
    Usage = 2,
    InvalidInput = 3,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: ExitCode::Usage,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: ExitCode::InvalidInput,
            message: message.into(),
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::ParameterTooSmall { .. } => CliError::usage(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::Group(g) => g.into(),
            other => CliError::usage(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(format!("unknown format {s:?}; expected json, csv or text")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSource {
    Family { family: Family, n: usize },
    Cayley(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub families: Vec<(Family, Vec<usize>)>,
    pub chars: Vec<u64>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            families: vec![
                (Family::Dihedral, (3..=10).collect()),
                (Family::Dicyclic, (2..=6).collect()),
                (Family::Semidihedral, (1..=4).collect()),
            ],
            chars: vec![0, 3, 5, 7],
        }
    }
}

/// `{"families": {"dihedral": [3, 4]}, "chars": [0, 3]}`; omitted keys keep
/// their defaults.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    families: Option<BTreeMap<String, Vec<usize>>>,
    chars: Option<Vec<u64>>,
}

impl Grid {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: GridDoc = serde_json::from_str(text).map_err(|e| CliError::usage(format!("bad grid document: {e}")))?;
        let mut grid = Grid::default();
        if let Some(map) = doc.families {
            let mut families = Vec::new();
            for (name, ns) in map {
                let family: Family = name.parse().map_err(CliError::usage)?;
                families.push((family, ns));
            }
            families.sort_by_key(|(f, _)| *f);
            grid.families = families;
        }
        if let Some(chars) = doc.chars {
            grid.chars = chars;
        }
        Ok(grid)
    }

    /// Keeps only the listed families and characteristics.
    pub fn restrict(&mut self, families: Option<&[Family]>, chars: Option<&[u64]>) {
        if let Some(keep) = families {
            self.families.retain(|(f, _)| keep.contains(f));
        }
        if let Some(keep) = chars {
            self.chars = keep.to_vec();
        }
    }

    /// Cells in report order: family, then n, then characteristic.
    pub fn cells(&self) -> Result<Vec<FamilySpec>, CliError> {
        let mut chars = self.chars.clone();
        chars.sort_unstable();
        chars.dedup();
        let fields = chars
            .iter()
            .map(|&c| make_field(c).map_err(|e| CliError::usage(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut cells = Vec::new();
        let mut families = self.families.clone();
        families.sort_by_key(|(f, _)| *f);
        for (family, ns) in families {
            let mut ns = ns.clone();
            ns.sort_unstable();
            ns.dedup();
            for n in ns {
                for field in &fields {
                    cells.push(FamilySpec::new(family, n, *field));
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classes,
    Dimensions,
    Verify,
    Sweep,
    Witness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub source: Option<GroupSource>,
    pub field: FieldSpec,
    pub format: Format,
    /// Worker threads for `sweep`; 0 lets rayon decide.
    pub parallel: usize,
    pub allow_degenerate: bool,
    pub inner_only: bool,
    pub derivation: Option<PathBuf>,
    pub grid: Grid,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            source: None,
            field: FieldSpec::RATIONALS,
            format: Format::default(),
            parallel: 0,
            allow_degenerate: false,
            inner_only: false,
            derivation: None,
            grid: Grid::default(),
        }
    }
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: ExitCode,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, code: ExitCode::Ok }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.command {
        Command::Classes => cmd_classes(cfg),
        Command::Dimensions => cmd_dimensions(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Witness => cmd_witness(cfg),
    }
}

fn load_group(cfg: &RunConfig) -> Result<FiniteGroup, CliError> {
    match &cfg.source {
        Some(GroupSource::Family { family, n }) => Ok(FiniteGroup::from_family(*family, *n, cfg.allow_degenerate)?),
        Some(GroupSource::Cayley(path)) => Ok(FiniteGroup::from_table_file(path)?),
        None => Err(CliError::usage("a group is required: --family F --n N or --cayley PATH")),
    }
}

fn family_spec(cfg: &RunConfig) -> Result<FamilySpec, CliError> {
    match &cfg.source {
        Some(GroupSource::Family { family, n }) => Ok(FamilySpec::new(*family, *n, cfg.field)),
        Some(GroupSource::Cayley(_)) => Err(CliError::usage("verify needs a family group, not a Cayley table")),
        None => Err(CliError::usage("verify needs --family F --n N")),
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json renders");
    s.push('\n');
    s
}

pub fn cmd_classes(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = load_group(cfg)?;
    let classes = g.conjugacy_classes();
    let names = |c: &[usize]| c.iter().map(|&x| g.name(x).to_string()).collect::<Vec<_>>();
    let text = match cfg.format {
        Format::Json => json_text(&json!({
            "group": g.label(),
            "order": g.order(),
            "class_count": classes.class_count,
            "central_count": classes.central_count,
            "classes": classes.classes.iter().map(|c| names(c)).collect::<Vec<_>>(),
            "representatives": classes.representatives.iter().map(|&r| g.name(r)).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = csv_line(&["class".into(), "size".into(), "representative".into(), "elements".into()]);
            for (i, c) in classes.classes.iter().enumerate() {
                out += &csv_line(&[
                    i.to_string(),
                    c.len().to_string(),
                    g.name(classes.representatives[i]).to_string(),
                    names(c).join(" "),
                ]);
            }
            out
        }
        Format::Text => {
            let mut out = format!(
                "{}: order {}, {} conjugacy classes ({} central)\n",
                g.label(),
                g.order(),
                classes.class_count,
                classes.central_count
            );
            for c in &classes.classes {
                let _ = writeln!(out, "  {}", g.format_element_list(c));
            }
            out
        }
    };
    Ok(Output::ok(text))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionRow {
    pub group: String,
    pub field: String,
    pub order: usize,
    pub class_count: usize,
    pub dims: Dims,
}

pub fn dimension_row<F: Field>(alg: &GroupAlgebra<F>) -> DimensionRow {
    let der = derivation_space(alg).dimension();
    let inner = inner_derivation_space(alg).space.dimension();
    DimensionRow {
        group: alg.group().label(),
        field: alg.field().spec().name(),
        order: alg.dim(),
        class_count: alg.group().conjugacy_classes().class_count,
        dims: Dims {
            der,
            inner,
            outer: der - inner,
        },
    }
}

pub fn cmd_dimensions(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = Arc::new(load_group(cfg)?);
    let row = with_field!(cfg.field, |f| dimension_row(&GroupAlgebra::new(g.clone(), f)));
    let text = match cfg.format {
        Format::Json => json_text(&serde_json::to_value(&row).expect("row serialises")),
        Format::Csv => {
            let header = ["group", "field", "order", "class_count", "der", "inner", "outer"].map(String::from);
            csv_line(&header)
                + &csv_line(&[
                    row.group.clone(),
                    row.field.clone(),
                    row.order.to_string(),
                    row.class_count.to_string(),
                    row.dims.der.to_string(),
                    row.dims.inner.to_string(),
                    row.dims.outer.to_string(),
                ])
        }
        Format::Text => format!(
            "{} over {}: der {}, inner {}, outer {} ({} classes)\n",
            row.group, row.field, row.dims.der, row.dims.inner, row.dims.outer, row.class_count
        ),
    };
    Ok(Output::ok(text))
}

fn run_report(spec: &FamilySpec, cfg: &RunConfig) -> Result<VerificationReport, CliError> {
    let report = if cfg.inner_only {
        verify_inner_only(spec, cfg.allow_degenerate)?
    } else {
        verify_family(spec, cfg.allow_degenerate)?
    };
    Ok(report)
}

fn report_text(r: &VerificationReport) -> String {
    let d = r.computed_dims;
    let e = r.expected_dims;
    let mut out = format!(
        "{} [{}]: {}\n  dims: der {} inner {} outer {} (expected {} {} {})\n  classes: {} (expected {})\n",
        r.spec,
        r.spec.regime(),
        r.status(),
        d.der,
        d.inner,
        d.outer,
        e.der,
        e.inner,
        e.outer,
        r.class_count.computed,
        r.class_count.expected
    );
    for c in &r.checks {
        let _ = writeln!(out, "  [{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    if !r.basis.is_empty() {
        out += "  claimed basis:\n";
        for (label, value) in &r.basis {
            let _ = writeln!(out, "    {label} = {value}");
        }
    }
    for n in &r.variant_notes {
        let _ = writeln!(out, "  note: {n}");
    }
    for n in &r.annotations {
        let _ = writeln!(out, "  note: {n}");
    }
    if let Some(c) = r.first_failure() {
        let _ = writeln!(out, "  first divergence: {}: {}", c.name, c.detail);
    }
    out
}

const SWEEP_HEADER: [&str; 12] = [
    "family",
    "n",
    "char",
    "group",
    "regime",
    "der",
    "inner",
    "outer",
    "expected_der",
    "expected_inner",
    "expected_outer",
    "status",
];

fn sweep_row(r: &VerificationReport) -> Vec<String> {
    let (d, e) = (r.computed_dims, r.expected_dims);
    let mut row = vec![
        r.spec.family.name().to_string(),
        r.spec.n.to_string(),
        r.spec.field.characteristic().to_string(),
        r.spec.family.group_label(r.spec.n),
        r.spec.regime().to_string(),
    ];
    row.extend([d.der, d.inner, d.outer, e.der, e.inner, e.outer].map(|x| x.to_string()));
    row.push(r.status().to_string());
    row.push(r.first_failure().map(|c| c.name.clone()).unwrap_or_default());
    row
}

fn status_code(reports: &[VerificationReport]) -> ExitCode {
    if reports.iter().all(|r| r.status() == Status::Pass) {
        ExitCode::Ok
    } else {
        ExitCode::Mismatch
    }
}

fn render_reports(reports: &[VerificationReport], format: Format, summary: bool) -> String {
    let passed = reports.iter().filter(|r| r.status() == Status::Pass).count();
    let failed = reports.len() - passed;
    match format {
        Format::Json => {
            let items: Vec<_> = reports.iter().map(|r| r.to_json()).collect();
            if summary {
                json_text(&json!({
                    "reports": items,
                    "summary": {"total": reports.len(), "pass": passed, "fail": failed},
                }))
            } else {
                json_text(&items[0])
            }
        }
        Format::Csv => {
            let mut header: Vec<String> = SWEEP_HEADER.iter().map(|s| s.to_string()).collect();
            header.push("first_failure".into());
            let mut out = csv_line(&header);
            for r in reports {
                out += &csv_line(&sweep_row(r));
            }
            if summary {
                let _ = writeln!(out, "# summary: {} cells, {} pass, {} fail", reports.len(), passed, failed);
            }
            out
        }
        Format::Text => {
            let mut out: String = reports.iter().map(report_text).collect();
            if summary {
                let _ = writeln!(out, "summary: {} cells, {} pass, {} fail", reports.len(), passed, failed);
            }
            out
        }
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = family_spec(cfg)?;
    let report = run_report(&spec, cfg)?;
    let reports = [report];
    Ok(Output {
        text: render_reports(&reports, cfg.format, false),
        code: status_code(&reports),
    })
}

/// Verifies every grid cell. Cells run in parallel; the output order is
/// fixed by the grid, so the bytes do not depend on the thread count.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<VerificationReport>, CliError> {
    let cells = cfg.grid.cells()?;
    if !cfg.inner_only && cells.iter().any(|c| c.field.characteristic() == 2) {
        return Err(FamilyError::CharTwoUnsupported.into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallel)
        .build()
        .map_err(|e| CliError::usage(e.to_string()))?;
    pool.install(|| cells.par_iter().map(|spec| run_report(spec, cfg)).collect())
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let reports = sweep(cfg)?;
    Ok(Output {
        text: render_reports(&reports, cfg.format, true),
        code: status_code(&reports),
    })
}

fn witness_in<F: Field>(alg: &GroupAlgebra<F>, doc: &serde_json::Value, format: Format) -> Result<String, CliError> {
    let d = DerivationMatrix::from_json(alg, doc).map_err(|e| CliError::input(e.to_string()))?;
    let beta = match innerness_witness(alg, &d) {
        Ok(beta) => beta,
        Err(DerivationError::NotADerivation) => {
            return Err(CliError::input("matrix does not satisfy the Leibniz rule"));
        }
        Err(e) => return Err(CliError::input(e.to_string())),
    };
    Ok(match (beta, format) {
        (None, Format::Json) => json_text(&json!("OUTER")),
        (None, _) => "OUTER\n".to_string(),
        (Some(b), Format::Json) => json_text(&alg.to_json(&b)),
        (Some(b), Format::Csv) => {
            let f = alg.field();
            csv_line(&b.coeffs.iter().map(|c| f.to_scalar(c).to_string()).collect::<Vec<_>>())
        }
        (Some(b), Format::Text) => format!("{}\n", alg.format(&b)),
    })
}

pub fn cmd_witness(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = Arc::new(load_group(cfg)?);
    let path = cfg
        .derivation
        .as_ref()
        .ok_or_else(|| CliError::usage("witness needs --derivation PATH"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::input(e.to_string()))?;
    let out = with_field!(cfg.field, |f| witness_in(&GroupAlgebra::new(g.clone(), f), &doc, cfg.format))?;
    Ok(Output::ok(out))
}
