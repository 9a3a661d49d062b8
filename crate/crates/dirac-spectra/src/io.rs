//! JSON documents for potentials, spectrum tables, and construction data.
//!
//! Every document carries a `schema_version` field. Readers accept a missing
//! field (treated as the current version) and reject a mismatched one, so old
//! files stay loadable exactly as long as the layout is untouched. Complex
//! numbers are `[re, im]` arrays; numbers travel as f64, which round-trips
//! bit-exactly through the shortest-representation formatter.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::construction::{ConstructionData, DiskWarning, VerificationReport};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::types::{BoundaryKind, PotentialGrid, SpectrumTable};

pub const SCHEMA_VERSION: u32 = 1;

fn current_version() -> u32 {
    SCHEMA_VERSION
}

fn check_version(found: u32, what: &str) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "{what} has schema_version {found}, this build reads {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().expect("scalar converts to f64")
}

fn c_out<T: Real>(z: Complex<T>) -> [f64; 2] {
    [to_f64(z.re), to_f64(z.im)]
}

fn c_in<T: Real>(v: [f64; 2]) -> Complex<T> {
    Complex::new(T::of(v[0]), T::of(v[1]))
}

fn parse<'a, D: Deserialize<'a>>(text: &'a str, what: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn render<S: Serialize>(doc: &S) -> String {
    serde_json::to_string_pretty(doc).expect("document serializes")
}

// ---------------------------------------------------------------------------
// Potential grids

#[derive(Serialize, Deserialize)]
struct PotentialFile {
    #[serde(default = "current_version")]
    schema_version: u32,
    #[serde(rename = "M")]
    cells: usize,
    p: Vec<[f64; 2]>,
    q: Vec<[f64; 2]>,
}

pub fn potential_to_json<T: Real>(grid: &PotentialGrid<T>) -> String {
    let (p, q) = grid.samples();
    let doc = PotentialFile {
        schema_version: SCHEMA_VERSION,
        cells: grid.len(),
        p: p.iter().map(|&z| c_out(z)).collect(),
        q: q.iter().map(|&z| c_out(z)).collect(),
    };
    render(&doc)
}

pub fn potential_from_json<T: Real>(text: &str) -> Result<PotentialGrid<T>> {
    let doc: PotentialFile = parse(text, "potential file")?;
    check_version(doc.schema_version, "potential file")?;
    if doc.p.len() != doc.cells || doc.q.len() != doc.cells {
        return Err(Error::Validation(format!(
            "potential file declares M = {} but carries {} p and {} q samples",
            doc.cells,
            doc.p.len(),
            doc.q.len()
        )));
    }
    PotentialGrid::new(
        doc.p.into_iter().map(c_in).collect(),
        doc.q.into_iter().map(c_in).collect(),
    )
}

pub fn save_potential<T: Real>(grid: &PotentialGrid<T>, path: &Path) -> Result<()> {
    fs::write(path, potential_to_json(grid))?;
    Ok(())
}

pub fn load_potential<T: Real>(path: &Path) -> Result<PotentialGrid<T>> {
    potential_from_json(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Spectrum tables

#[derive(Serialize, Deserialize)]
struct SpectrumEntry {
    n: i64,
    l1: [f64; 2],
    l2: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    #[serde(default = "current_version")]
    schema_version: u32,
    theta: i64,
    #[serde(rename = "N")]
    range: i64,
    entries: Vec<SpectrumEntry>,
}

pub fn spectrum_to_json<T: Real>(table: &SpectrumTable<T>) -> String {
    let r = table.range();
    let entries = (-r..=r)
        .map(|n| {
            let (a, b) = table.pair(n);
            SpectrumEntry { n, l1: c_out(a), l2: c_out(b) }
        })
        .collect();
    let doc = SpectrumFile {
        schema_version: SCHEMA_VERSION,
        theta: table.kind().theta(),
        range: r,
        entries,
    };
    render(&doc)
}

pub fn spectrum_from_json<T: Real>(text: &str) -> Result<SpectrumTable<T>> {
    let doc: SpectrumFile = parse(text, "spectrum file")?;
    check_version(doc.schema_version, "spectrum file")?;
    let kind = BoundaryKind::from_theta(doc.theta)?;
    if doc.range < 0 || doc.entries.len() as i64 != 2 * doc.range + 1 {
        return Err(Error::Validation(format!(
            "spectrum file declares N = {} but carries {} entries",
            doc.range,
            doc.entries.len()
        )));
    }
    let mut rows: Vec<Option<(Complex<T>, Complex<T>)>> =
        vec![None; doc.entries.len()];
    for entry in &doc.entries {
        if entry.n.abs() > doc.range {
            return Err(Error::Validation(format!(
                "spectrum entry index {} outside [-{}, {}]",
                entry.n, doc.range, doc.range
            )));
        }
        let slot = (entry.n + doc.range) as usize;
        if rows[slot].is_some() {
            return Err(Error::Validation(format!(
                "spectrum entry index {} appears twice",
                entry.n
            )));
        }
        rows[slot] = Some((c_in(entry.l1), c_in(entry.l2)));
    }
    let pairs = rows
        .into_iter()
        .map(|row| row.expect("every slot filled: counted above"))
        .collect();
    SpectrumTable::from_pairs(kind, pairs)
}

pub fn save_spectrum<T: Real>(table: &SpectrumTable<T>, path: &Path) -> Result<()> {
    fs::write(path, spectrum_to_json(table))?;
    Ok(())
}

pub fn load_spectrum<T: Real>(path: &Path) -> Result<SpectrumTable<T>> {
    spectrum_from_json(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Construction data

#[derive(Serialize, Deserialize)]
struct ConstructionRow {
    n: i64,
    lambda: f64,
    s_dot: f64,
    c: [f64; 2],
    z: [f64; 2],
    beta: [f64; 2],
}

/// Check results attached to a stored construction. Loading ignores the
/// block; it exists so a saved file documents how well its own rows verify.
#[derive(Serialize, Deserialize)]
struct VerificationBlock {
    signs_ok: bool,
    half_plane_margin: f64,
    min_multiplier_modulus: f64,
    interpolation_deviation: f64,
    half_trace_deviation: f64,
}

#[derive(Serialize, Deserialize)]
struct WarningRow {
    n: i64,
    c: [f64; 2],
    expected: [f64; 2],
    distance: f64,
}

#[derive(Serialize, Deserialize)]
struct ConstructionFile {
    #[serde(default = "current_version")]
    schema_version: u32,
    theta: i64,
    n0: usize,
    #[serde(rename = "N")]
    range: i64,
    rows: Vec<ConstructionRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    verification: Option<VerificationBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    disk_warnings: Vec<WarningRow>,
}

fn construction_doc<T: Real>(data: &ConstructionData<T>) -> ConstructionFile {
    let r = data.range();
    let rows = (-r..=r)
        .map(|n| ConstructionRow {
            n,
            lambda: to_f64(data.node(n)),
            s_dot: to_f64(data.s_dot(n)),
            c: c_out(data.multiplier(n)),
            z: c_out(data.weight(n)),
            beta: c_out(data.cosine_offset(n)),
        })
        .collect();
    ConstructionFile {
        schema_version: SCHEMA_VERSION,
        theta: data.kind().theta(),
        n0: data.n0(),
        range: r,
        rows,
        verification: None,
        disk_warnings: Vec::new(),
    }
}

pub fn construction_to_json<T: Real>(data: &ConstructionData<T>) -> String {
    render(&construction_doc(data))
}

/// Like [`construction_to_json`], with the verification summary and any
/// multiplier disk warnings embedded in the document.
pub fn construction_report_json<T: Real>(
    data: &ConstructionData<T>,
    report: &VerificationReport<T>,
    warnings: &[DiskWarning<T>],
) -> String {
    let mut doc = construction_doc(data);
    doc.verification = Some(VerificationBlock {
        signs_ok: report.signs_ok,
        half_plane_margin: to_f64(report.half_plane_margin),
        min_multiplier_modulus: to_f64(report.min_multiplier_modulus),
        interpolation_deviation: to_f64(report.interpolation_deviation),
        half_trace_deviation: to_f64(report.half_trace_deviation),
    });
    doc.disk_warnings = warnings
        .iter()
        .map(|w| WarningRow {
            n: w.index,
            c: c_out(w.multiplier),
            expected: c_out(w.expected),
            distance: to_f64(w.distance),
        })
        .collect();
    render(&doc)
}

pub fn construction_from_json<T: Real>(text: &str) -> Result<ConstructionData<T>> {
    let doc: ConstructionFile = parse(text, "construction file")?;
    check_version(doc.schema_version, "construction file")?;
    let kind = BoundaryKind::from_theta(doc.theta)?;
    if doc.range < 0 || doc.rows.len() as i64 != 2 * doc.range + 1 {
        return Err(Error::Validation(format!(
            "construction file declares N = {} but carries {} rows",
            doc.range,
            doc.rows.len()
        )));
    }
    let mut sorted: Vec<Option<&ConstructionRow>> = vec![None; doc.rows.len()];
    for row in &doc.rows {
        if row.n.abs() > doc.range {
            return Err(Error::Validation(format!(
                "construction row index {} outside [-{}, {}]",
                row.n, doc.range, doc.range
            )));
        }
        let slot = (row.n + doc.range) as usize;
        if sorted[slot].is_some() {
            return Err(Error::Validation(format!(
                "construction row index {} appears twice",
                row.n
            )));
        }
        sorted[slot] = Some(row);
    }
    let rows: Vec<&ConstructionRow> = sorted
        .into_iter()
        .map(|row| row.expect("every slot filled: counted above"))
        .collect();
    ConstructionData::from_rows(
        kind,
        doc.n0,
        rows.iter().map(|r| T::of(r.lambda)).collect(),
        rows.iter().map(|r| T::of(r.s_dot)).collect(),
        rows.iter().map(|r| c_in(r.c)).collect(),
        rows.iter().map(|r| c_in(r.z)).collect(),
        rows.iter().map(|r| c_in(r.beta)).collect(),
    )
}

pub fn save_construction<T: Real>(data: &ConstructionData<T>, path: &Path) -> Result<()> {
    fs::write(path, construction_to_json(data))?;
    Ok(())
}

pub fn load_construction<T: Real>(path: &Path) -> Result<ConstructionData<T>> {
    construction_from_json(&fs::read_to_string(path)?)
}
