//! Figure emission: metric curves with interquartile bands, archive
//! profiles, and 2-D grid heatmaps. Pure functions from parsed experiment
//! outputs to SVG text; identical inputs give identical bytes.

use std::collections::BTreeMap;

use crate::archive::{Archive, Container};
use crate::config::parse_hex_color;
use crate::error::{Error, Result};
use crate::experiment::SummaryRow;
use crate::svg::{Anchor, SvgDoc};
use crate::types::FitnessBounds;

/// Dark2 qualitative palette; series colors are assigned by sorted label.
pub const PALETTE: [&str; 5] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 55.0;
const COLORBAR_SEGMENTS: usize = 32;

pub fn lerp_color(low: [u8; 3], high: [u8; 3], t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let ch = |i: usize| (low[i] as f64 + (high[i] as f64 - low[i] as f64) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Evaluations,
    WallTime,
}

impl XAxis {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "evaluations" => Ok(XAxis::Evaluations),
            "wall_time" => Ok(XAxis::WallTime),
            other => Err(Error::config(format!(
                "unknown x axis '{other}' (valid: evaluations, wall_time)"
            ))),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            XAxis::Evaluations => "evaluations",
            XAxis::WallTime => "wall time (s)",
        }
    }
}

struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        if self.d1 == self.d0 {
            return (self.p0 + self.p1) / 2.0;
        }
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if a >= 1000.0 {
        format!("{v:.0}")
    } else if a >= 10.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

/// White background, frame, 5 ticks per axis, axis titles, figure title.
fn draw_frame(doc: &mut SvgDoc, xs: &Scale, ys: &Scale, x_label: &str, y_label: &str, title: &str) {
    doc.rect(0.0, 0.0, WIDTH, HEIGHT, "#ffffff");
    let (left, right) = (xs.p0, xs.p1);
    let (bottom, top) = (ys.p0, ys.p1);
    doc.line(left, bottom, right, bottom, "#333333", 1.0);
    doc.line(left, bottom, left, top, "#333333", 1.0);
    for i in 0..5 {
        let f = i as f64 / 4.0;
        let xv = xs.d0 + f * (xs.d1 - xs.d0);
        let xp = xs.map(xv);
        doc.line(xp, bottom, xp, bottom + 4.0, "#333333", 1.0);
        doc.text(xp, bottom + 18.0, 11.0, Anchor::Middle, &tick_label(xv));
        let yv = ys.d0 + f * (ys.d1 - ys.d0);
        let yp = ys.map(yv);
        doc.line(left - 4.0, yp, left, yp, "#333333", 1.0);
        doc.text(left - 7.0, yp + 4.0, 11.0, Anchor::End, &tick_label(yv));
    }
    doc.text((left + right) / 2.0, HEIGHT - 12.0, 13.0, Anchor::Middle, x_label);
    doc.text(14.0, MARGIN_TOP - 14.0, 13.0, Anchor::Start, y_label);
    doc.text((left + right) / 2.0, 18.0, 14.0, Anchor::Middle, title);
}

fn series_color(sorted_labels: &[String], label: &str) -> &'static str {
    let idx = sorted_labels.iter().position(|l| l == label).unwrap_or(0);
    PALETTE[idx % PALETTE.len()]
}

fn metric_spread(row: &SummaryRow, metric: &str) -> Result<crate::experiment::Spread> {
    match metric {
        "coverage" => Ok(row.coverage),
        "qd_score" => Ok(row.qd_score),
        "max_fitness" => Ok(row.max_fitness),
        other => Err(Error::UnknownMetric { name: other.to_string() }),
    }
}

/// Median curve per algorithm with a shaded interquartile band. All rows
/// must come from one task; filter the summary before calling.
pub fn plot_metric_curves(rows: &[SummaryRow], metric: &str, x_axis: XAxis) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::config("summary has no rows to plot"));
    }
    metric_spread(&rows[0], metric)?;
    let task = &rows[0].task;
    if rows.iter().any(|r| &r.task != task) {
        return Err(Error::config(
            "summary spans multiple tasks; plot one task at a time",
        ));
    }

    let mut series: BTreeMap<String, Vec<&SummaryRow>> = BTreeMap::new();
    for row in rows {
        series.entry(row.algorithm.clone()).or_default().push(row);
    }
    for group in series.values_mut() {
        group.sort_by_key(|r| r.evaluations);
    }
    let labels: Vec<String> = series.keys().cloned().collect();

    let x_of = |r: &SummaryRow| match x_axis {
        XAxis::Evaluations => r.evaluations as f64,
        XAxis::WallTime => r.wall_time_s.median,
    };
    let mut x_max = f64::NEG_INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for row in rows {
        let sp = metric_spread(row, metric)?;
        x_max = x_max.max(x_of(row));
        y_max = y_max.max(sp.q3).max(sp.median);
    }
    let xs = Scale { d0: 0.0, d1: x_max.max(1.0), p0: MARGIN_LEFT, p1: WIDTH - MARGIN_RIGHT };
    let ys = Scale {
        d0: 0.0,
        d1: if y_max > 0.0 { y_max } else { 1.0 },
        p0: HEIGHT - MARGIN_BOTTOM,
        p1: MARGIN_TOP,
    };

    let mut doc = SvgDoc::new(WIDTH, HEIGHT);
    draw_frame(
        &mut doc,
        &xs,
        &ys,
        x_axis.label(),
        metric,
        &format!("{metric} on {task}"),
    );

    for (label, group) in &series {
        let color = series_color(&labels, label);
        let spreads: Vec<crate::experiment::Spread> = group
            .iter()
            .map(|r| metric_spread(r, metric))
            .collect::<Result<_>>()?;
        if spreads.iter().any(|s| s.q1 != s.q3) {
            let mut band: Vec<(f64, f64)> = group
                .iter()
                .zip(&spreads)
                .map(|(r, s)| (xs.map(x_of(r)), ys.map(s.q3)))
                .collect();
            band.extend(
                group
                    .iter()
                    .zip(&spreads)
                    .rev()
                    .map(|(r, s)| (xs.map(x_of(r)), ys.map(s.q1))),
            );
            doc.polygon(&band, color, 0.25);
        }
        let line: Vec<(f64, f64)> = group
            .iter()
            .zip(&spreads)
            .map(|(r, s)| (xs.map(x_of(r)), ys.map(s.median)))
            .collect();
        doc.polyline(&line, color, 1.8);
    }

    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 + 16.0 * i as f64;
        let color = series_color(&labels, label);
        doc.line(MARGIN_LEFT + 10.0, y - 4.0, MARGIN_LEFT + 34.0, y - 4.0, color, 2.5);
        doc.text(MARGIN_LEFT + 40.0, y, 12.0, Anchor::Start, label);
    }
    Ok(doc.finish())
}

/// One labeled archive profile, as exported to profile.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSeries {
    pub label: String,
    pub bounds: FitnessBounds,
    pub points: Vec<(f64, usize)>,
}

/// Step curves of occupant count against fitness threshold, one per
/// series, on shared axes. All series must share fitness bounds.
pub fn plot_archive_profile(series: &[ProfileSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::config("no profiles to plot"));
    }
    let b = series[0].bounds;
    for s in &series[1..] {
        if s.bounds != b {
            return Err(Error::MismatchedBounds(format!(
                "profile '{}' has bounds [{}, {}], expected [{}, {}]",
                s.label, s.bounds.min, s.bounds.max, b.min, b.max
            )));
        }
    }
    let mut ordered: Vec<&ProfileSeries> = series.iter().collect();
    ordered.sort_by(|a, z| a.label.cmp(&z.label));
    let labels: Vec<String> = ordered.iter().map(|s| s.label.clone()).collect();

    let y_max = ordered
        .iter()
        .flat_map(|s| s.points.iter().map(|(_, c)| *c))
        .max()
        .unwrap_or(0);
    let xs = Scale { d0: b.min, d1: b.max, p0: MARGIN_LEFT, p1: WIDTH - MARGIN_RIGHT };
    let ys = Scale {
        d0: 0.0,
        d1: y_max.max(1) as f64,
        p0: HEIGHT - MARGIN_BOTTOM,
        p1: MARGIN_TOP,
    };

    let mut doc = SvgDoc::new(WIDTH, HEIGHT);
    draw_frame(
        &mut doc,
        &xs,
        &ys,
        "fitness threshold",
        "occupants at or above threshold",
        "archive profile",
    );
    for s in &ordered {
        let color = series_color(&labels, &s.label);
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .map(|(t, c)| (xs.map(*t), ys.map(*c as f64)))
            .collect();
        doc.step_path(&pts, color, 1.8);
    }
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 + 16.0 * i as f64;
        let color = series_color(&labels, label);
        doc.line(WIDTH - 180.0, y - 4.0, WIDTH - 156.0, y - 4.0, color, 2.5);
        doc.text(WIDTH - 150.0, y, 12.0, Anchor::Start, label);
    }
    Ok(doc.finish())
}

/// One colored rectangle per occupied cell of a 2-D grid archive, fitness
/// mapped linearly from `color_low` to `color_high` over the bounds.
pub fn plot_archive_heatmap(
    a: &Archive,
    b: FitnessBounds,
    color_low: &str,
    color_high: &str,
) -> Result<String> {
    let grid = match a.container() {
        Container::Grid(g) if g.subdivisions.len() == 2 => g.clone(),
        Container::Grid(g) => {
            return Err(Error::config(format!(
                "heatmap needs a 2-D grid archive, this one has {} dimensions",
                g.subdivisions.len()
            )))
        }
        Container::Cvt(_) => {
            return Err(Error::config("heatmap needs a grid archive, not CVT"))
        }
    };
    let low = parse_hex_color(color_low)?;
    let high = parse_hex_color(color_high)?;
    let (n0, n1) = (grid.subdivisions[0], grid.subdivisions[1]);
    let [x_lo, x_hi] = grid.bd_bounds[0];
    let [y_lo, y_hi] = grid.bd_bounds[1];

    let width = WIDTH + 70.0;
    let xs = Scale { d0: x_lo, d1: x_hi, p0: MARGIN_LEFT, p1: WIDTH - MARGIN_RIGHT };
    let ys = Scale { d0: y_lo, d1: y_hi, p0: HEIGHT - MARGIN_BOTTOM, p1: MARGIN_TOP };

    let mut doc = SvgDoc::new(width, HEIGHT);
    doc.rect(0.0, 0.0, width, HEIGHT, "#ffffff");
    draw_frame(&mut doc, &xs, &ys, "descriptor 0", "descriptor 1", "archive heatmap");

    let span = b.span();
    for (&cell, ind) in a.cells() {
        let (i0, i1) = (cell / n1, cell % n1);
        let cx = x_lo + (x_hi - x_lo) * i0 as f64 / n0 as f64;
        let cy = y_lo + (y_hi - y_lo) * i1 as f64 / n1 as f64;
        let cw = (x_hi - x_lo) / n0 as f64;
        let ch = (y_hi - y_lo) / n1 as f64;
        let t = if span > 0.0 { ((ind.fitness - b.min) / span).clamp(0.0, 1.0) } else { 1.0 };
        doc.rect(
            xs.map(cx),
            ys.map(cy + ch),
            xs.map(cx + cw) - xs.map(cx),
            ys.map(cy) - ys.map(cy + ch),
            &lerp_color(low, high, t),
        );
    }

    let bar_x = WIDTH + 10.0;
    let bar_top = MARGIN_TOP;
    let bar_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let seg_h = bar_h / COLORBAR_SEGMENTS as f64;
    for i in 0..COLORBAR_SEGMENTS {
        let t = (COLORBAR_SEGMENTS - 1 - i) as f64 / (COLORBAR_SEGMENTS - 1) as f64;
        doc.rect(bar_x, bar_top + i as f64 * seg_h, 16.0, seg_h, &lerp_color(low, high, t));
    }
    doc.text(bar_x + 20.0, bar_top + 10.0, 11.0, Anchor::Start, &tick_label(b.max));
    doc.text(bar_x + 20.0, bar_top + bar_h, 11.0, Anchor::Start, &tick_label(b.min));
    Ok(doc.finish())
}
