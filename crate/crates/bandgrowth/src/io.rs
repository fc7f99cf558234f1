//! File formats: the JSON matrix format, CSV exports for profiles and
//! sampled grids, and minimal static SVG plots.
//!
//! Matrix files look like
//!
//! ```json
//! { "field": {"kind": "gfp", "p": 7}, "window": 4,
//!   "entries": [[1, 2, "3"], [2, 2, "5"]] }
//! ```
//!
//! with entry values rendered as strings so rational matrices round-trip
//! exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldConfig, Gfp, Rationals};
use crate::window::{BandProfile, WindowMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixFile {
    field: FieldConfig,
    window: u64,
    entries: Vec<(u64, u64, String)>,
}

/// A window over either supported field, for format-level dispatch.
pub enum AnyMatrix {
    Gfp(WindowMatrix<Gfp>),
    Rational(WindowMatrix<Rationals>),
}

impl AnyMatrix {
    pub fn field_config(&self) -> FieldConfig {
        match self {
            AnyMatrix::Gfp(w) => w.field().config(),
            AnyMatrix::Rational(w) => w.field().config(),
        }
    }

    pub fn band_profile(&self) -> BandProfile {
        match self {
            AnyMatrix::Gfp(w) => w.band_profile(),
            AnyMatrix::Rational(w) => w.band_profile(),
        }
    }

    pub fn size(&self) -> u64 {
        match self {
            AnyMatrix::Gfp(w) => w.size(),
            AnyMatrix::Rational(w) => w.size(),
        }
    }
}

/// Serializes a window to the JSON matrix format (entries sorted by
/// position, so equal windows give byte-identical files).
pub fn matrix_to_json<F: Field>(w: &WindowMatrix<F>) -> String {
    let field = w.field();
    let entries = w
        .entries()
        .map(|(i, j, v)| (i, j, field.render_elem(v)))
        .collect();
    let file = MatrixFile { field: field.config(), window: w.size(), entries };
    to_json_string(&file)
}

/// Parses the JSON matrix format.
pub fn matrix_from_json(text: &str) -> Result<AnyMatrix> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix file: {e}")))?;
    match file.field {
        FieldConfig::Gfp { p } => {
            let f = Gfp::new(p)?;
            let entries = file
                .entries
                .iter()
                .map(|(i, j, s)| Ok((*i, *j, f.parse_elem(s)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyMatrix::Gfp(WindowMatrix::from_entries(f, file.window, entries)?))
        }
        FieldConfig::Rationals => {
            let f = Rationals;
            let entries = file
                .entries
                .iter()
                .map(|(i, j, s)| Ok((*i, *j, f.parse_elem(s)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyMatrix::Rational(WindowMatrix::from_entries(f, file.window, entries)?))
        }
    }
}

pub fn save_matrix<F: Field>(w: &WindowMatrix<F>, path: &Path) -> Result<()> {
    fs::write(path, matrix_to_json(w))?;
    Ok(())
}

pub fn load_matrix(path: &Path) -> Result<AnyMatrix> {
    matrix_from_json(&fs::read_to_string(path)?)
}

/// Deterministic pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// `position,bandwidth` rows for a measured profile.
pub fn profile_csv(profile: &BandProfile) -> String {
    let mut out = String::from("position,bandwidth\n");
    for (i, g) in profile.values().iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, g));
    }
    out
}

/// `position,value` rows for any per-position series.
pub fn series_csv(header: &str, values: &[f64]) -> String {
    let mut out = format!("position,{header}\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, v));
    }
    out
}

/// `m,n,b` rows for a sampled power-growth grid.
pub fn grid_csv(grid: &[(u32, u64, f64)]) -> String {
    let mut out = String::from("m,n,b\n");
    for (m, n, b) in grid {
        out.push_str(&format!("{m},{n},{b}\n"));
    }
    out
}

/// A minimal static SVG polyline of `(x, y)` samples.
pub fn svg_polyline(points: &[(f64, f64)], title: &str) -> String {
    let (w, h) = (640.0f64, 360.0f64);
    let pad = 32.0f64;
    if points.is_empty() {
        return format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\"/>\n");
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in points {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let dx = (x1 - x0).max(1e-9);
    let dy = (y1 - y0).max(1e-9);
    let path: Vec<String> = points
        .iter()
        .map(|(x, y)| {
            let px = pad + (x - x0) / dx * (w - 2.0 * pad);
            let py = h - pad - (y - y0) / dy * (h - 2.0 * pad);
            format!("{px:.1},{py:.1}")
        })
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n\
         <title>{title}</title>\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"{}\"/>\n\
         </svg>\n",
        path.join(" ")
    )
}
