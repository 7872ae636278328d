//! CSV output.
//!
//! Floats are written in scientific notation with four significant digits
//! (`1.874e-4`), so files are byte-for-byte reproducible whenever the
//! underlying numbers are.

use crate::bench::{HistoryRow, PhaseRow, Solver, TableRow};
use crate::error::Result;
use crate::generate::FieldKind;

pub const TABLE_HEADER: [&str; 10] =
    ["m", "p", "DIM", "CT", "IT", "NF", "NCG", "Res0", "Res", "failures"];
pub const HISTORY_HEADER: [&str; 6] = ["iter", "residual", "alpha", "sign", "backtracks", "phase"];
pub const PHASE_HEADER: [&str; 7] = ["phase", "CT", "IT", "NF", "NCG", "Res0", "Res"];

pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn emit_table(rows: &[TableRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            r.p.to_string(),
            r.dim.to_string(),
            sci(r.ct),
            sci(r.it),
            sci(r.nf),
            sci(r.ncg),
            sci(r.res0),
            sci(r.res),
            r.failures.to_string(),
        ])?;
    }
    finish(w)
}

pub fn emit_phases(rows: &[PhaseRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PHASE_HEADER)?;
    for r in rows {
        w.write_record([
            r.phase.name().to_string(),
            sci(r.ct),
            sci(r.it),
            sci(r.nf),
            sci(r.ncg),
            sci(r.res0),
            sci(r.res),
        ])?;
    }
    finish(w)
}

pub fn emit_history(rows: &[HistoryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HISTORY_HEADER)?;
    for h in rows {
        w.write_record([
            h.iter.to_string(),
            sci(h.residual),
            sci(h.alpha),
            h.sign.to_string(),
            h.backtracks.to_string(),
            h.phase.name().to_string(),
        ])?;
    }
    finish(w)
}

/// `<field>_<m>x<p>_<solver>.csv`
pub fn table_file_name(field: FieldKind, m: usize, p: usize, solver: Solver) -> String {
    format!("{}_{m}x{p}_{}.csv", field.name(), solver.name())
}

/// `<field>_<m>x<p>_<solver>_trial<i>_history.csv`
pub fn history_file_name(field: FieldKind, m: usize, p: usize, solver: Solver, trial: usize) -> String {
    format!("{}_{m}x{p}_{}_trial{trial}_history.csv", field.name(), solver.name())
}
