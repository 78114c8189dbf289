//! File formats for matrices and interference maps.
//!
//! * Complex CSV: one matrix row per line, cells `re+imj` (or `re-imj`) with
//!   shortest round-trip exponent notation.
//! * Complex binary: `rows: u64 LE`, `cols: u64 LE`, then row-major
//!   interleaved `re, im` as `f64 LE`.
//! * Map CSV: one victim subcarrier per line, linear power.
//! * Map JSON: values plus the campaign config and seed.
//! * Map SVG: frequency-ordered heatmap in dB relative to the global peak.

use std::fmt::Write as _;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::{CampaignConfig, InterferenceMap};

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:e}{sign}{:e}j", z.re, z.im.abs())
}

pub fn parse_complex(cell: &str) -> Result<Complex64> {
    let bad = || Error::Config(format!("malformed complex cell '{cell}'"));
    let body = cell.trim().strip_suffix('j').ok_or_else(bad)?;
    // the imaginary sign is the last +/- not following an exponent marker
    let split = body
        .char_indices()
        .rev()
        .find(|&(i, c)| (c == '+' || c == '-') && i > 0 && !body[..i].ends_with(['e', 'E']))
        .map(|(i, _)| i)
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

pub fn write_complex_csv<W: Write>(m: &DMatrix<Complex64>, mut w: W) -> Result<()> {
    let mut line = String::new();
    for r in 0..m.nrows() {
        line.clear();
        for c in 0..m.ncols() {
            if c > 0 {
                line.push(',');
            }
            line.push_str(&format_complex(m[(r, c)]));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_complex_csv(text: &str) -> Result<DMatrix<Complex64>> {
    let rows: Vec<Vec<Complex64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(parse_complex).collect())
        .collect::<Result<_>>()?;
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension("ragged CSV rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

pub fn write_complex_bin<W: Write>(m: &DMatrix<Complex64>, mut w: W) -> Result<()> {
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.ncols() * 16);
    for r in 0..m.nrows() {
        buf.clear();
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_complex_bin<R: Read>(mut r: R) -> Result<DMatrix<Complex64>> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != rows * cols * 16 {
        return Err(Error::Dimension(format!(
            "binary payload of {} bytes for a {rows}x{cols} matrix",
            bytes.len()
        )));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[i * 8..i * 8 + 8].try_into().expect("8 bytes"));
    Ok(DMatrix::from_fn(rows, cols, |rr, c| {
        let i = 2 * (rr * cols + c);
        Complex64::new(f(i), f(i + 1))
    }))
}

pub fn write_map_csv<W: Write>(map: &InterferenceMap, mut w: W) -> Result<()> {
    let mut line = String::new();
    for r in 0..map.rows() {
        line.clear();
        for c in 0..map.cols() {
            if c > 0 {
                line.push(',');
            }
            let _ = write!(line, "{:e}", map.values[(r, c)]);
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct MapJson<'a> {
    direction: String,
    victim: &'a str,
    aggressor: &'a str,
    n_draws: usize,
    seed: u64,
    config: &'a CampaignConfig,
    victim_bins: &'a [usize],
    aggressor_bins: &'a [usize],
    values: Vec<Vec<f64>>,
}

pub fn write_map_json<W: Write>(map: &InterferenceMap, w: W) -> Result<()> {
    let doc = MapJson {
        direction: map.config.direction.to_string(),
        victim: &map.victim_label,
        aggressor: &map.aggressor_label,
        n_draws: map.n_draws,
        seed: map.config.master_seed,
        config: &map.config,
        victim_bins: &map.victim_bins,
        aggressor_bins: &map.aggressor_bins,
        values: map
            .values
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
    };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

/// Dark-to-bright ramp (viridis control points).
const RAMP: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

fn ramp(x: f64) -> [u8; 3] {
    let x = x.clamp(0.0, 1.0);
    for w in RAMP.windows(2) {
        let (x0, c0) = w[0];
        let (x1, c1) = w[1];
        if x <= x1 {
            let t = (x - x0) / (x1 - x0);
            let mix = |a: u8, b: u8| (a as f64 + t * (b as f64 - a as f64)).round() as u8;
            return [mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2])];
        }
    }
    RAMP[RAMP.len() - 1].1
}

/// Heatmap options: dynamic range below the peak and canvas size in pixels.
#[derive(Debug, Clone, Copy)]
pub struct SvgOptions {
    pub floor_db: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            floor_db: -60.0,
            width: 900.0,
            height: 450.0,
        }
    }
}

fn order_by_freq(freqs: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..freqs.len()).collect();
    idx.sort_by(|&a, &b| freqs[a].total_cmp(&freqs[b]));
    idx
}

pub fn write_map_svg<W: Write>(map: &InterferenceMap, opts: SvgOptions, mut w: W) -> Result<()> {
    let (left, top, right, bottom) = (80.0, 40.0, 90.0, 60.0);
    let pw = opts.width - left - right;
    let ph = opts.height - top - bottom;
    let rows = order_by_freq(&map.victim_freqs);
    let cols = order_by_freq(&map.aggressor_freqs);
    let peak = map.values.iter().copied().fold(0.0, f64::max);
    let cw = pw / cols.len().max(1) as f64;
    let rh = ph / rows.len().max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        opts.width, opts.height, opts.width, opts.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{} into {} ({} draws, dB re peak)</text>"#,
        left + pw / 2.0,
        map.aggressor_label,
        map.victim_label,
        map.n_draws
    );
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for (i, &r) in rows.iter().enumerate() {
        // highest victim frequency at the top
        let y = top + (rows.len() - 1 - i) as f64 * rh;
        for (j, &c) in cols.iter().enumerate() {
            let v = map.values[(r, c)];
            let db = if peak > 0.0 && v > 0.0 {
                10.0 * (v / peak).log10()
            } else {
                opts.floor_db
            };
            let [cr, cg, cb] = ramp(1.0 - db / opts.floor_db);
            let _ = writeln!(
                s,
                r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#{cr:02x}{cg:02x}{cb:02x}"/>"##,
                left + j as f64 * cw,
                y,
                cw + 0.01,
                rh + 0.01
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let mhz = |f: f64| format!("{:.2}", f / 1e6);
    let (fx0, fx1) = (
        map.aggressor_freqs[cols[0]],
        map.aggressor_freqs[*cols.last().unwrap_or(&cols[0])],
    );
    let (fy0, fy1) = (
        map.victim_freqs[rows[0]],
        map.victim_freqs[*rows.last().unwrap_or(&rows[0])],
    );
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="{}" text-anchor="start">{}</text>"#,
        top + ph + 16.0,
        mhz(fx0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        left + pw,
        top + ph + 16.0,
        mhz(fx1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{} subcarrier frequency (MHz)</text>"#,
        left + pw / 2.0,
        top + ph + 40.0,
        map.aggressor_label
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        left - 6.0,
        top + ph,
        mhz(fy0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        left - 6.0,
        top + 12.0,
        mhz(fy1)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(20,{}) rotate(-90)" text-anchor="middle">{} subcarrier frequency (MHz)</text>"#,
        top + ph / 2.0,
        map.victim_label
    );

    // colour bar
    let bx = left + pw + 20.0;
    let steps = 32;
    for i in 0..steps {
        let x = i as f64 / (steps - 1) as f64;
        let [cr, cg, cb] = ramp(x);
        let y = top + ph * (1.0 - (i + 1) as f64 / steps as f64);
        let _ = writeln!(
            s,
            r##"<rect x="{bx}" y="{y:.3}" width="16" height="{:.3}" fill="#{cr:02x}{cg:02x}{cb:02x}"/>"##,
            ph / steps as f64 + 0.01
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">0 dB</text>"#,
        bx + 20.0,
        top + 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">{} dB</text>"#,
        bx + 20.0,
        top + ph,
        opts.floor_db
    );
    s.push_str("</svg>\n");
    w.write_all(s.as_bytes())?;
    Ok(())
}
