use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{ConditionCurve, CurveKind, SpectrumSummary};

use super::audit::{predicted_side_agreement, ConjectureAudit, SideAgreement, SoRegionReport};
use super::{curves_for, Code, Emit, RegimeMap, SweepConfig};

pub const CSV_HEADER: [&str; 6] = ["dx", "dt", "code", "min_re_lambda", "max_re_lambda", "rho"];

/// Pixels per cell edge in the image, at least.
const MIN_IMAGE_EDGE: usize = 400;

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvCell {
    pub dx: f64,
    pub dt: f64,
    pub code: Code,
    pub summary: Option<SpectrumSummary>,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

/// One row per cell, `Δx` outer and `Δt` inner. Missing spectra leave the
/// last three fields empty.
pub fn write_csv(map: &RegimeMap, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
    for (i, j, dx, dt) in map.positions() {
        let idx = map.index(i, j);
        let (a, b, c) = match map.summaries[idx] {
            Some(s) => (s.min_re.to_string(), s.max_re.to_string(), s.rho.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            dx.to_string(),
            dt.to_string(),
            map.cells[idx].label().to_string(),
            a,
            b,
            c,
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parses a file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<CsvCell>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!(
            "{}: expected header {}",
            path.display(),
            CSV_HEADER.join(",")
        )));
    }
    let num = |field: &str, line: usize| -> Result<f64> {
        field
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("{}:{line}: bad number `{field}`", path.display())))
    };
    let mut cells = Vec::new();
    for (k, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = k + 2;
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Parse(format!(
                "{}:{line}: expected {} fields",
                path.display(),
                CSV_HEADER.len()
            )));
        }
        let summary = if record[3].is_empty() {
            None
        } else {
            Some(SpectrumSummary {
                min_re: num(&record[3], line)?,
                max_re: num(&record[4], line)?,
                rho: num(&record[5], line)?,
            })
        };
        cells.push(CsvCell {
            dx: num(&record[0], line)?,
            dt: num(&record[1], line)?,
            code: record[2].parse()?,
            summary,
        });
    }
    Ok(cells)
}

impl RegimeMap {
    /// Rebuilds a map from CSV rows. Curves are recomputed from `cfg`;
    /// runtime flags are not stored in the CSV and stay absent.
    pub fn from_csv_cells(cells: &[CsvCell], cfg: &SweepConfig) -> Result<RegimeMap> {
        let mut dx_axis: Vec<f64> = Vec::new();
        for c in cells {
            if dx_axis.last() != Some(&c.dx) {
                dx_axis.push(c.dx);
            }
        }
        if dx_axis.is_empty() || !cells.len().is_multiple_of(dx_axis.len()) {
            return Err(Error::Parse("CSV rows do not form a complete grid".into()));
        }
        let nt = cells.len() / dx_axis.len();
        let dt_axis: Vec<f64> = cells[..nt].iter().map(|c| c.dt).collect();
        for (k, c) in cells.iter().enumerate() {
            if c.dx != dx_axis[k / nt] || c.dt != dt_axis[k % nt] {
                return Err(Error::Parse(format!(
                    "CSV row {} breaks the dx-major grid order",
                    k + 2
                )));
            }
        }
        let analysis = cfg.analysis()?;
        let dx_range = [dx_axis[0], dx_axis[dx_axis.len() - 1]];
        let curves = if dx_range[0] < dx_range[1] {
            curves_for(&analysis, dx_range, cfg.curve_samples, &cfg.curves, cfg.slack())
        } else {
            Vec::new()
        };
        Ok(RegimeMap {
            analysis,
            vn_slack: cfg.slack(),
            dx_axis,
            dt_axis,
            cells: cells.iter().map(|c| c.code).collect(),
            summaries: cells.iter().map(|c| c.summary).collect(),
            flags: None,
            curves,
        })
    }
}

/// Binary pixmap, `Δx` to the right and `Δt` upwards.
pub fn write_ppm(map: &RegimeMap, path: &Path) -> Result<()> {
    let nx = map.dx_axis.len();
    let nt = map.dt_axis.len();
    let scale = MIN_IMAGE_EDGE.div_ceil(nx.max(nt).max(1)).max(1);
    let (w, h) = (nx * scale, nt * scale);
    let mut bytes = format!("P6\n{w} {h}\n255\n").into_bytes();
    bytes.reserve(w * h * 3);
    for row in 0..h {
        let j = nt - 1 - row / scale;
        for col in 0..w {
            bytes.extend_from_slice(&map.code(col / scale, j).color());
        }
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

struct Frame {
    log: bool,
    x: [f64; 2],
    y: [f64; 2],
    left: f64,
    top: f64,
    size: f64,
}

impl Frame {
    fn t(&self, v: f64, [lo, hi]: [f64; 2]) -> f64 {
        if self.log {
            (v.ln() - lo.ln()) / (hi.ln() - lo.ln())
        } else {
            (v - lo) / (hi - lo)
        }
    }

    fn px(&self, dx: f64) -> f64 {
        self.left + self.size * self.t(dx, self.x)
    }

    fn py(&self, dt: f64) -> f64 {
        self.top + self.size * (1.0 - self.t(dt, self.y))
    }
}

fn curve_color(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::VnStability => "#000000",
        CurveKind::PositiveEig => "#ffffff",
        CurveKind::Dominance => "#ff00ff",
        CurveKind::Monotonicity => "#00c000",
    }
}

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Cells as coloured rectangles with the finite curve samples drawn on top.
pub fn write_svg(map: &RegimeMap, path: &Path, log_axes: bool) -> Result<()> {
    let nx = map.dx_axis.len();
    let nt = map.dt_axis.len();
    let half = |axis: &[f64]| {
        if axis.len() > 1 {
            0.5 * (axis[1] - axis[0])
        } else {
            0.5 * axis[0]
        }
    };
    let (hx, ht) = (half(&map.dx_axis), half(&map.dt_axis));
    let edge = |axis: &[f64], h: f64| -> [f64; 2] {
        let lo = axis[0] - h;
        let hi = axis[axis.len() - 1] + h;
        // Log axes cannot start at or below zero.
        [if log_axes && lo <= 0.0 { 0.5 * axis[0] } else { lo }, hi]
    };
    let frame = Frame {
        log: log_axes,
        x: edge(&map.dx_axis, hx),
        y: edge(&map.dt_axis, ht),
        left: 70.0,
        top: 20.0,
        size: 600.0,
    };
    let mut s = String::new();
    s.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\"700\" \
         font-family=\"sans-serif\" font-size=\"12\">\n",
    );
    // cells meet halfway between samples; the outer ones reach the frame
    let cell_edges = |axis: &[f64], k: usize, range: [f64; 2]| {
        let lo = if k == 0 {
            range[0]
        } else {
            0.5 * (axis[k - 1] + axis[k])
        };
        let hi = if k + 1 == axis.len() {
            range[1]
        } else {
            0.5 * (axis[k] + axis[k + 1])
        };
        (lo, hi)
    };
    for i in 0..nx {
        let (x0, x1) = cell_edges(&map.dx_axis, i, frame.x);
        for j in 0..nt {
            let (y0, y1) = cell_edges(&map.dt_axis, j, frame.y);
            let (px0, px1) = (frame.px(x0), frame.px(x1));
            let (py0, py1) = (frame.py(y1), frame.py(y0));
            s.push_str(&format!(
                "<rect x=\"{px0:.2}\" y=\"{py0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                px1 - px0,
                py1 - py0,
                hex(map.code(i, j).color())
            ));
        }
    }
    for curve in &map.curves {
        let points: Vec<String> = curve
            .finite_points()
            .filter(|&(dx, dt)| dx >= frame.x[0] && dx <= frame.x[1] && dt >= frame.y[0] && dt <= frame.y[1])
            .map(|(dx, dt)| format!("{:.2},{:.2}", frame.px(dx), frame.py(dt)))
            .collect();
        if points.len() > 1 {
            s.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                curve_color(curve.kind),
                points.join(" ")
            ));
        }
    }
    let (l, t, z) = (frame.left, frame.top, frame.size);
    s.push_str(&format!(
        "<rect x=\"{l}\" y=\"{t}\" width=\"{z}\" height=\"{z}\" fill=\"none\" stroke=\"#000\"/>\n"
    ));
    for (k, v) in [frame.x[0], frame.x[1]].into_iter().enumerate() {
        let x = l + z * k as f64;
        s.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{v:.3}</text>\n",
            t + z + 16.0
        ));
    }
    for (k, v) in [frame.y[0], frame.y[1]].into_iter().enumerate() {
        let y = t + z * (1.0 - k as f64);
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{y:.1}\" text-anchor=\"end\">{v:.3}</text>\n",
            l - 6.0
        ));
    }
    let scale = if log_axes { " (log)" } else { "" };
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">Δx{scale}</text>\n",
        l + z / 2.0,
        t + z + 34.0
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">Δt{scale}</text>\n",
        t + z / 2.0,
        t + z / 2.0
    ));
    let mut y = t + 10.0;
    for code in [Code::Ofs, Code::So, Code::Uo, Code::U, Code::Invalid] {
        s.push_str(&format!(
            "<rect x=\"690\" y=\"{:.1}\" width=\"14\" height=\"14\" fill=\"{}\" stroke=\"#000\"/>\
             <text x=\"710\" y=\"{:.1}\">{code}</text>\n",
            y - 11.0,
            hex(code.color()),
            y
        ));
        y += 22.0;
    }
    for curve in &map.curves {
        s.push_str(&format!(
            "<line x1=\"690\" y1=\"{:.1}\" x2=\"704\" y2=\"{:.1}\" stroke=\"{}\" stroke-width=\"3\"/>\
             <rect x=\"688\" y=\"{:.1}\" width=\"18\" height=\"8\" fill=\"none\" stroke=\"#888\"/>\
             <text x=\"710\" y=\"{:.1}\">{}</text>\n",
            y - 4.0,
            y - 4.0,
            curve_color(curve.kind),
            y - 8.0,
            y,
            curve.kind.name()
        ));
        y += 22.0;
    }
    s.push_str("</svg>\n");
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a SweepConfig,
    counts: Vec<(Code, usize)>,
    audits: &'a [ConjectureAudit],
    #[serde(skip_serializing_if = "Option::is_none")]
    side_agreement: Option<SideAgreement>,
    so_region: SoRegionReport,
    curves: &'a [ConditionCurve],
}

/// Structured report: configuration echo, code counts, audits, the
/// stable-oscillation region and the curve samples, as pretty JSON.
pub fn report_json(map: &RegimeMap, audits: &[ConjectureAudit], cfg: &SweepConfig) -> Result<String> {
    let has = |k| map.curves.iter().any(|c| c.kind == k);
    let report = Report {
        config: cfg,
        counts: map.counts().into_iter().collect(),
        audits,
        side_agreement: (has(CurveKind::VnStability) && has(CurveKind::PositiveEig))
            .then(|| predicted_side_agreement(map)),
        so_region: SoRegionReport::new(map),
        curves: &map.curves,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_report(map: &RegimeMap, audits: &[ConjectureAudit], cfg: &SweepConfig, path: &Path) -> Result<()> {
    let text = report_json(map, audits, cfg)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the requested artefacts into `cfg.output_dir`, named after the
/// equation, scheme and boundary kind. Returns the written paths.
pub fn write_outputs(map: &RegimeMap, audits: &[ConjectureAudit], cfg: &SweepConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = format!("{}-{}-{}", cfg.equation, cfg.scheme, cfg.bc);
    let mut written = Vec::new();
    for emit in &cfg.emit {
        let path = match emit {
            Emit::Csv => dir.join(format!("{stem}.csv")),
            Emit::Image => dir.join(format!("{stem}.ppm")),
            Emit::Svg => dir.join(format!("{stem}.svg")),
            Emit::Report => dir.join(format!("{stem}.json")),
        };
        match emit {
            Emit::Csv => write_csv(map, &path)?,
            Emit::Image => write_ppm(map, &path)?,
            Emit::Svg => write_svg(map, &path, cfg.log_axes)?,
            Emit::Report => write_report(map, audits, cfg, &path)?,
        }
        written.push(path);
    }
    Ok(written)
}
