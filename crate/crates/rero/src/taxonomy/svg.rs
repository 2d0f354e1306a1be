//! Parallel-coordinates rendering of attack specs to standalone SVG 1.1.
//!
//! One vertical axis per taxonomy dimension in table order, grouped under
//! role headers; canonical options tick top-to-bottom from strongest to
//! weakest, extension values are appended below in first-use order. Each
//! attack is one polyline crossing every axis, colored by its group tag
//! (falling back to its name). Output bytes are deterministic for a fixed
//! registry and selection.

use super::{validate, AttackRegistry, AttackSpec, Finding, DIMENSIONS, RECOGNIZED_METRICS};
use crate::error::{Error, Result};

const WIDTH: f64 = 1260.0;
const HEIGHT: f64 = 680.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 230.0;
const AXIS_TOP: f64 = 110.0;
const AXIS_BOTTOM: f64 = 600.0;

const PALETTE: [&str; 10] = [
    "#4477aa", "#228833", "#aa3377", "#ee6677", "#ccbb44", "#66ccee", "#777777", "#aa4499",
    "#117733", "#882255",
];

fn xml_escape(s: &str) -> String {
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

/// Tick labels of one axis: canonical options first (strongest to weakest),
/// then values observed in the selection, in first-use order.
fn axis_ticks(dim_index: usize, entries: &[&AttackSpec]) -> Vec<String> {
    let dim = &DIMENSIONS[dim_index];
    let mut ticks: Vec<String> = match dim.name {
        "success_metric" => RECOGNIZED_METRICS.iter().map(|m| m.to_string()).collect(),
        _ => dim.canonical.iter().map(|o| o.to_string()).collect(),
    };
    for e in entries {
        let value = e
            .dimension_value(dim.name)
            .expect("dimension names are static");
        if !ticks.contains(&value) {
            ticks.push(value);
        }
    }
    ticks
}

fn axis_x(dim_index: usize) -> f64 {
    let span = WIDTH - LEFT - RIGHT;
    LEFT + span * dim_index as f64 / (DIMENSIONS.len() - 1) as f64
}

fn tick_y(index: usize, count: usize) -> f64 {
    if count <= 1 {
        return (AXIS_TOP + AXIS_BOTTOM) / 2.0;
    }
    AXIS_TOP + (AXIS_BOTTOM - AXIS_TOP) * index as f64 / (count - 1) as f64
}

/// Render the selected entries (names or group tags) as a parallel
/// coordinates chart. Entries must validate without errors; an unknown
/// selector or a failing entry is an error. An empty selection renders the
/// bare axes.
pub fn render_parallel_coordinates(
    registry: &AttackRegistry,
    selection: &[String],
) -> Result<String> {
    let entries = registry.select(selection)?;
    for e in &entries {
        let errors: Vec<Finding> = validate(e).into_iter().filter(Finding::is_error).collect();
        if !errors.is_empty() {
            return Err(Error::config(format!(
                "entry {:?} fails validation: {}",
                e.name, errors[0]
            )));
        }
    }

    let ticks: Vec<Vec<String>> = (0..DIMENSIONS.len())
        .map(|i| axis_ticks(i, &entries))
        .collect();

    // Color keys: group tag when present, the entry name otherwise.
    let mut color_keys: Vec<String> = Vec::new();
    for e in &entries {
        let key = e.group.clone().unwrap_or_else(|| e.name.clone());
        if !color_keys.contains(&key) {
            color_keys.push(key);
        }
    }
    let color_of = |e: &AttackSpec| -> &str {
        let key = e.group.as_deref().unwrap_or(e.name.as_str());
        let idx = color_keys.iter().position(|k| k == key).unwrap_or(0);
        PALETTE[idx % PALETTE.len()]
    };

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH:.1}\" \
         height=\"{HEIGHT:.1}\" viewBox=\"0 0 {WIDTH:.1} {HEIGHT:.1}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH:.1}\" height=\"{HEIGHT:.1}\" fill=\"#ffffff\"/>\n"
    ));
    svg.push_str(
        "  <text x=\"20.0\" y=\"30.0\" font-family=\"sans-serif\" font-size=\"16\" \
         fill=\"#222222\">Privacy attack taxonomy</text>\n",
    );

    // Role headers span their dimensions.
    let mut role_start = 0usize;
    while role_start < DIMENSIONS.len() {
        let role = DIMENSIONS[role_start].role;
        let mut role_end = role_start;
        while role_end + 1 < DIMENSIONS.len() && DIMENSIONS[role_end + 1].role == role {
            role_end += 1;
        }
        let mid = (axis_x(role_start) + axis_x(role_end)) / 2.0;
        svg.push_str(&format!(
            "  <text x=\"{mid:.1}\" y=\"60.0\" font-family=\"sans-serif\" font-size=\"13\" \
             font-weight=\"bold\" fill=\"#555555\" text-anchor=\"middle\">{}</text>\n",
            role.label()
        ));
        role_start = role_end + 1;
    }

    // Axes with tick marks and labels.
    for (i, dim) in DIMENSIONS.iter().enumerate() {
        let x = axis_x(i);
        svg.push_str(&format!(
            "  <line x1=\"{x:.1}\" y1=\"{AXIS_TOP:.1}\" x2=\"{x:.1}\" y2=\"{AXIS_BOTTOM:.1}\" \
             stroke=\"#333333\" stroke-width=\"1.5\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             fill=\"#222222\" text-anchor=\"middle\">{}</text>\n",
            AXIS_BOTTOM + 28.0,
            xml_escape(dim.label)
        ));
        let count = ticks[i].len();
        for (t, label) in ticks[i].iter().enumerate() {
            let y = tick_y(t, count);
            svg.push_str(&format!(
                "  <line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
                 stroke=\"#333333\" stroke-width=\"1\"/>\n",
                x - 4.0,
                x + 4.0
            ));
            svg.push_str(&format!(
                "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"8\" \
                 fill=\"#666666\">{}</text>\n",
                x + 6.0,
                y - 3.0,
                xml_escape(label)
            ));
        }
    }

    // One polyline per selected entry, crossing every axis.
    for e in &entries {
        let mut points = Vec::with_capacity(DIMENSIONS.len());
        for (i, dim) in DIMENSIONS.iter().enumerate() {
            let value = e
                .dimension_value(dim.name)
                .expect("dimension names are static");
            let t = ticks[i]
                .iter()
                .position(|v| *v == value)
                .expect("tick exists");
            points.push(format!("{:.1},{:.1}", axis_x(i), tick_y(t, ticks[i].len())));
        }
        svg.push_str(&format!(
            "  <polyline data-name=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" \
             stroke-width=\"2\" stroke-opacity=\"0.85\"/>\n",
            xml_escape(&e.name),
            points.join(" "),
            color_of(e)
        ));
    }

    // Legend of color keys.
    for (i, key) in color_keys.iter().enumerate() {
        let y = 90.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT + 40.0;
        svg.push_str(&format!(
            "  <line x1=\"{x:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{}\" \
             stroke-width=\"3\"/>\n",
            x + 24.0,
            PALETTE[i % PALETTE.len()]
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             fill=\"#222222\">{}</text>\n",
            x + 30.0,
            y + 4.0,
            xml_escape(key)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
