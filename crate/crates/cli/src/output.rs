//! CSV and JSON writers. Every float is printed with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use magorbits::chain::{ChainParams, ChainSpectrum};
use magorbits::model2::FermiContour;
use magorbits::oscillations::{FourierSpectrum, SpectrumTrace, TraceKind};
use magorbits::validation::Check;
use serde::Serialize;

use crate::Result;

pub const SCHEMA: &str = "# magorbits csv schema v1";

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

fn csv(header: &str) -> String {
    format!("{SCHEMA}\n{header}\n")
}

pub fn write_contours(path: &Path, contours: &[FermiContour]) -> Result<()> {
    let mut s = csv("sheet,segment,x,p");
    for (k, c) in contours.iter().enumerate() {
        for [x, p] in &c.line.points {
            writeln!(s, "{},{k},{x:.16e},{p:.16e}", c.sheet)?;
        }
    }
    write(path, &s)
}

pub fn write_trace(path: &Path, trace: &SpectrumTrace) -> Result<()> {
    let mut s = csv("inv_h,re_value,im_value");
    for (u, v) in trace.grid.iter().zip(&trace.values) {
        // the charge trace is real
        let im = if trace.kind == TraceKind::Charge { 0.0 } else { v.im };
        writeln!(s, "{u:.16e},{:.16e},{im:.16e}", v.re)?;
    }
    write(path, &s)
}

pub fn write_spectrum(path: &Path, spec: &FourierSpectrum) -> Result<()> {
    let mut s = csv("F,abs_A,re_A,im_A");
    for (f, a) in spec.frequencies.iter().zip(&spec.amplitudes) {
        writeln!(s, "{f:.16e},{:.16e},{:.16e},{:.16e}", a.norm(), a.re, a.im)?;
    }
    write(path, &s)
}

pub fn write_peaks(path: &Path, spec: &FourierSpectrum) -> Result<()> {
    let mut s = csv("F_peak,abs_A");
    for p in &spec.peaks {
        writeln!(s, "{:.16e},{:.16e}", p.frequency, p.amplitude)?;
    }
    write(path, &s)
}

#[derive(Serialize)]
struct ChainJson<'a> {
    #[serde(rename = "N")]
    n: usize,
    g: f64,
    x_c: f64,
    mu: &'a [f64],
    lambda: &'a [f64],
    vectors: &'a [Vec<f64>],
    #[serde(rename = "C")]
    c: &'a [f64],
}

pub fn write_chain(path: &Path, p: &ChainParams, spec: &ChainSpectrum, c: &[f64]) -> Result<()> {
    let doc = ChainJson {
        n: p.n,
        g: p.g,
        x_c: p.x_c,
        mu: &spec.mu,
        lambda: &spec.lambda,
        vectors: &spec.vectors,
        c,
    };
    let mut body = serde_json::to_string_pretty(&doc)?;
    body.push('\n');
    write(path, &body)
}

pub fn validation_report(checks: &[Check]) -> String {
    let mut s = csv("check_name,measured,threshold,pass");
    for c in checks {
        let _ = writeln!(s, "{},{:.16e},{:.16e},{}", c.name, c.measured, c.threshold, c.pass);
    }
    s
}
