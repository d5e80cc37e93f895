//! Heatmap rendering: grayscale binary PGM for non-negative fields and a
//! zero-centered diverging SVG grid for signed fields. NaN cells mark walls
//! and render in a reserved color. Output bytes are deterministic.

use std::fmt::Write as _;

use srmap_core::Mat;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Palette {
    Gray,
    Diverging,
}

pub fn render_heatmap(field: &Mat, palette: Palette) -> Result<Vec<u8>> {
    if field.rows() == 0 || field.cols() == 0 {
        return Err(CliError::Render("field is empty".into()));
    }
    if !field.data().iter().any(|v| v.is_finite()) {
        return Err(CliError::Render("field has no finite values".into()));
    }
    match palette {
        Palette::Gray => render_gray_pgm(field),
        Palette::Diverging => render_diverging_svg(field),
    }
}

/// Min-max normalized 8-bit PGM. A constant field maps to mid-gray (128);
/// wall (NaN) cells render as black.
fn render_gray_pgm(field: &Mat) -> Result<Vec<u8>> {
    let finite: Vec<f64> = field
        .data()
        .iter()
        .cloned()
        .filter(|v| v.is_finite())
        .collect();
    let min = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut out = format!("P5\n{} {}\n255\n", field.cols(), field.rows()).into_bytes();
    for r in 0..field.rows() {
        for c in 0..field.cols() {
            let v = field[(r, c)];
            let byte = if !v.is_finite() {
                0u8
            } else if span == 0.0 {
                128
            } else {
                ((v - min) / span * 255.0).round() as u8
            };
            out.push(byte);
        }
    }
    Ok(out)
}

/// Diverging blue-white-red SVG rect grid, centered on zero. Wall (NaN)
/// cells render as a reserved dark gray.
fn render_diverging_svg(field: &Mat) -> Result<Vec<u8>> {
    const CELL: usize = 16;
    let scale = field
        .data()
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let (w, h) = (field.cols() * CELL, field.rows() * CELL);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    for r in 0..field.rows() {
        for c in 0..field.cols() {
            let v = field[(r, c)];
            let fill = if !v.is_finite() {
                "#555555".to_string()
            } else if scale == 0.0 {
                "#ffffff".to_string()
            } else {
                let t = (v / scale).clamp(-1.0, 1.0);
                let ramp = (255.0 * (1.0 - t.abs())).round() as u8;
                if t >= 0.0 {
                    format!("#ff{ramp:02x}{ramp:02x}")
                } else {
                    format!("#{ramp:02x}{ramp:02x}ff")
                }
            };
            let _ = writeln!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\"/>",
                c * CELL,
                r * CELL
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg.into_bytes())
}
