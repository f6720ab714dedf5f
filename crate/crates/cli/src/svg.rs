//! Self-contained SVG rendering for curves and heatmaps.
//!
//! Documents are plain shapes and text, no scripts or external assets, so
//! any conformant viewer renders them. All numeric formatting is fixed
//! precision to keep output byte-stable across runs.

use lagdep_core::pca::DensityGrid;

use crate::error::{CliError, Result};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const NEGATIVE_END: (u8, u8, u8) = (33, 102, 172);
const POSITIVE_END: (u8, u8, u8) = (178, 24, 43);
const MASK_FILL: &str = "#cccccc";

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Diverging color for t in [-1, 1]: blue below zero, white at zero, red
/// above.
pub fn diverging_color(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (end, w) = if t < 0.0 {
        (NEGATIVE_END, -t)
    } else {
        (POSITIVE_END, t)
    };
    let mix = |c: u8| -> u8 { (255.0 + (c as f64 - 255.0) * w).round() as u8 };
    format!("#{:02x}{:02x}{:02x}", mix(end.0), mix(end.1), mix(end.2))
}

/// Divides by the peak magnitude; a flat zero curve stays zero.
pub fn peak_normalized(values: &[f64]) -> Vec<f64> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return values.to_vec();
    }
    values.iter().map(|v| v / peak).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (0.001..100_000.0).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

struct Frame {
    width: f64,
    height: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn plot_w(&self) -> f64 {
        self.width - self.left - self.right
    }
    fn plot_h(&self) -> f64 {
        self.height - self.top - self.bottom
    }
    fn x(&self, t: f64) -> f64 {
        self.left + t * self.plot_w()
    }
    fn y(&self, t: f64) -> f64 {
        self.height - self.bottom - t * self.plot_h()
    }
}

fn document_open(out: &mut String, f: &Frame, title: &str) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n",
        w = f.width,
        h = f.height
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        f.width, f.height
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        f.left + f.plot_w() / 2.0,
        xml_escape(title)
    ));
}

fn axis_labels(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        f.left + f.plot_w() / 2.0,
        f.height - 8.0,
        xml_escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.2})\">{}</text>\n",
        f.top + f.plot_h() / 2.0,
        f.top + f.plot_h() / 2.0,
        xml_escape(y_label)
    ));
}

fn frame_border(out: &mut String, f: &Frame) {
    out.push_str(&format!(
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
        f.left,
        f.top,
        f.plot_w(),
        f.plot_h()
    ));
}

/// Renders labeled curves over a shared x axis.
///
/// With `normalize` each curve is divided by its own peak magnitude before
/// plotting. Lag charts pass seconds on the x axis.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    series: &[(String, Vec<f64>)],
    normalize: bool,
) -> Result<String> {
    if xs.is_empty() || series.is_empty() {
        return Err(CliError::Config("empty chart input".into()));
    }
    for (label, ys) in series {
        if ys.len() != xs.len() {
            return Err(CliError::Config(format!(
                "series '{label}' has {} points on an axis of {}",
                ys.len(),
                xs.len()
            )));
        }
    }
    let plotted: Vec<(String, Vec<f64>)> = series
        .iter()
        .map(|(label, ys)| {
            let ys = if normalize { peak_normalized(ys) } else { ys.clone() };
            (label.clone(), ys)
        })
        .collect();

    let f = Frame {
        width: 840.0,
        height: 480.0,
        left: 70.0,
        right: 180.0,
        top: 40.0,
        bottom: 50.0,
    };
    let (x_min, x_max) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, ys) in &plotted {
        for &v in ys {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let pad = if y_max > y_min {
        0.05 * (y_max - y_min)
    } else {
        0.5 * y_max.abs().max(1.0)
    };
    let (y_lo, y_hi) = (y_min - pad, y_max + pad);
    let y_span = y_hi - y_lo;
    let to_x = |v: f64| f.x((v - x_min) / x_span);
    let to_y = |v: f64| f.y((v - y_lo) / y_span);

    let mut out = String::new();
    document_open(&mut out, &f, title);

    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let vx = x_min + t * x_span;
        let vy = y_lo + t * y_span;
        out.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"#000000\"/>\n",
            f.x(t),
            f.y(0.0),
            f.y(0.0) + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            f.x(t),
            f.y(0.0) + 18.0,
            fmt_tick(vx)
        ));
        out.push_str(&format!(
            "<line x1=\"{1:.2}\" y1=\"{0:.2}\" x2=\"{2:.2}\" y2=\"{0:.2}\" stroke=\"#000000\"/>\n",
            f.y(t),
            f.left - 5.0,
            f.left
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            f.left - 8.0,
            f.y(t) + 4.0,
            fmt_tick(vy)
        ));
    }
    if y_lo < 0.0 && y_hi > 0.0 {
        out.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{2:.2}\" y2=\"{1:.2}\" \
             stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n",
            f.left,
            to_y(0.0),
            f.left + f.plot_w()
        ));
    }
    if x_min < 0.0 && x_max > 0.0 {
        out.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" \
             stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n",
            to_x(0.0),
            f.top,
            f.top + f.plot_h()
        ));
    }

    for (i, (label, ys)) in plotted.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (x, y) in xs.iter().zip(ys) {
            points.push_str(&format!("{:.2},{:.2} ", to_x(*x), to_y(*y)));
        }
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            points.trim_end(),
            color
        ));
        let ly = f.top + 16.0 * i as f64 + 10.0;
        let lx = f.width - f.right + 12.0;
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
             stroke=\"{}\" stroke-width=\"2\"/>\n",
            lx,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0,
            color
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
            lx + 24.0,
            ly,
            xml_escape(label)
        ));
    }

    frame_border(&mut out, &f);
    axis_labels(&mut out, &f, x_label, y_label);
    out.push_str("</svg>\n");
    Ok(out)
}

fn color_scale(out: &mut String, f: &Frame, vmax: f64) {
    let bar_x = f.width - f.right + 24.0;
    let bar_w = 16.0;
    let steps = 64;
    let step_h = f.plot_h() / steps as f64;
    for i in 0..steps {
        let t = 1.0 - 2.0 * (i as f64 + 0.5) / steps as f64;
        out.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"{}\" shape-rendering=\"crispEdges\"/>\n",
            bar_x,
            f.top + i as f64 * step_h,
            bar_w,
            step_h + 0.5,
            diverging_color(t)
        ));
    }
    for (t, v) in [(0.0f64, vmax), (0.5, 0.0), (1.0, -vmax)] {
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>\n",
            bar_x + bar_w + 6.0,
            f.top + t * f.plot_h() + 4.0,
            fmt_tick(v)
        ));
    }
}

/// Renders a density or contribution grid as a heatmap over the unit
/// square, first axis upward, colored symmetrically about zero.
pub fn heatmap_svg(title: &str, x_label: &str, y_label: &str, grid: &DensityGrid) -> Result<String> {
    let res = grid.resolution;
    if res < 2 || grid.values.len() != res * res {
        return Err(CliError::Config("empty or malformed grid".into()));
    }
    let vmax = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let f = Frame {
        width: 640.0,
        height: 560.0,
        left: 70.0,
        right: 110.0,
        top: 40.0,
        bottom: 60.0,
    };
    let cell_w = f.plot_w() / res as f64;
    let cell_h = f.plot_h() / res as f64;

    let mut out = String::new();
    document_open(&mut out, &f, title);
    for iy in 0..res {
        for iz in 0..res {
            let v = grid.get(iy, iz);
            let t = if vmax > 0.0 { v / vmax } else { 0.0 };
            out.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"{}\" shape-rendering=\"crispEdges\"/>\n",
                f.left + iz as f64 * cell_w,
                f.top + (res - 1 - iy) as f64 * cell_h,
                cell_w + 0.5,
                cell_h + 0.5,
                diverging_color(t)
            ));
        }
    }
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            f.x(t),
            f.height - f.bottom + 16.0,
            fmt_tick(t)
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            f.left - 8.0,
            f.y(t) + 4.0,
            fmt_tick(t)
        ));
    }
    color_scale(&mut out, &f, vmax);
    frame_border(&mut out, &f);
    axis_labels(&mut out, &f, x_label, y_label);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Renders one delay panel of a causality map: rows are reason channels,
/// columns are result channels, missing cells (the diagonal) in gray.
pub fn matrix_heatmap_svg(
    title: &str,
    labels: &[String],
    cells: &[Vec<Option<f64>>],
) -> Result<String> {
    let n = labels.len();
    if n == 0 || cells.len() != n || cells.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("empty or malformed matrix".into()));
    }
    let vmax = cells
        .iter()
        .flatten()
        .filter_map(|c| *c)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let f = Frame {
        width: 640.0,
        height: 560.0,
        left: 110.0,
        right: 110.0,
        top: 40.0,
        bottom: 80.0,
    };
    let cell_w = f.plot_w() / n as f64;
    let cell_h = f.plot_h() / n as f64;

    let mut out = String::new();
    document_open(&mut out, &f, title);
    for (i, row) in cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let fill = match cell {
                Some(v) => {
                    let t = if vmax > 0.0 { v / vmax } else { 0.0 };
                    diverging_color(t)
                }
                None => MASK_FILL.to_string(),
            };
            out.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"1\"/>\n",
                f.left + j as f64 * cell_w,
                f.top + i as f64 * cell_h,
                cell_w,
                cell_h,
                fill
            ));
        }
    }
    for (i, label) in labels.iter().enumerate() {
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            f.left - 8.0,
            f.top + (i as f64 + 0.5) * cell_h + 4.0,
            xml_escape(label)
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            f.left + (i as f64 + 0.5) * cell_w,
            f.height - f.bottom + 18.0,
            xml_escape(label)
        ));
    }
    color_scale(&mut out, &f, vmax);
    frame_border(&mut out, &f);
    axis_labels(&mut out, &f, "result channel", "reason channel");
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_endpoints_and_center() {
        assert_eq!(diverging_color(0.0), "#ffffff");
        assert_eq!(diverging_color(1.0), "#b2182b");
        assert_eq!(diverging_color(-1.0), "#2166ac");
        assert_eq!(diverging_color(3.0), "#b2182b");
    }

    #[test]
    fn peak_normalization_hits_unit_magnitude() {
        let v = peak_normalized(&[0.5, -2.0, 1.0]);
        assert_eq!(v, vec![0.25, -1.0, 0.5]);
        assert_eq!(peak_normalized(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn flat_curve_renders() {
        let xs = vec![0.0, 1.0, 2.0];
        let series = vec![("flat".to_string(), vec![1.0, 1.0, 1.0])];
        let svg = line_chart("t", "x", "y", &xs, &series, false).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains(">flat<"));
    }

    #[test]
    fn labels_are_escaped() {
        let xs = vec![0.0, 1.0];
        let series = vec![("a&b<c>".to_string(), vec![0.0, 1.0])];
        let svg = line_chart("q\"t'", "x", "y", &xs, &series, false).unwrap();
        assert!(svg.contains("a&amp;b&lt;c&gt;"));
        assert!(svg.contains("q&quot;t&apos;"));
        assert!(!svg.contains("a&b<c>"));
    }

    #[test]
    fn rejects_empty_and_ragged_input() {
        assert!(line_chart("t", "x", "y", &[], &[], false).is_err());
        let xs = vec![0.0, 1.0];
        let bad = vec![("s".to_string(), vec![1.0])];
        assert!(line_chart("t", "x", "y", &xs, &bad, false).is_err());
        assert!(matrix_heatmap_svg("t", &[], &[]).is_err());
    }

    #[test]
    fn constant_grid_is_single_hue() {
        let grid = DensityGrid {
            resolution: 5,
            values: vec![1.0; 25],
        };
        let svg = heatmap_svg("t", "z", "y", &grid).unwrap();
        let cells = svg.matches("fill=\"#b2182b\"").count();
        assert!(cells >= 25, "cells at full red: {cells}");
        assert!(!svg.contains("fill=\"#2166ac\" shape-rendering"));
    }

    #[test]
    fn matrix_masks_diagonal() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let cells = vec![
            vec![None, Some(0.5)],
            vec![Some(1.0), None],
        ];
        let svg = matrix_heatmap_svg("t", &labels, &cells).unwrap();
        assert_eq!(svg.matches(MASK_FILL).count(), 2);
        assert!(svg.contains("#b2182b"));
    }

    #[test]
    fn tick_formatting_is_compact() {
        assert_eq!(fmt_tick(0.0), "0");
        assert_eq!(fmt_tick(1.5), "1.5");
        assert_eq!(fmt_tick(-0.25), "-0.25");
        assert_eq!(fmt_tick(2.0), "2");
        assert_eq!(fmt_tick(1e-7), "1.00e-7");
    }
}
