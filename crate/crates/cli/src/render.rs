//! Static SVG and binary PPM renders of grid fields. Output depends only on
//! the field values: no timestamps, fixed color map.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use torusmix_core::geometry::ScalarField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Style {
    /// Black where the value exceeds 1/2, white elsewhere.
    Indicator,
    /// Min-max normalised sequential color map.
    Heatmap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Svg,
    Ppm,
}

type Rgb = [u8; 3];

const STOPS: [Rgb; 5] = [[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]];

fn heat(t: f64) -> Rgb {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 1.0 };
    let x = t * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let mut c = [0u8; 3];
    for k in 0..3 {
        let a = STOPS[i][k] as f64;
        let b = STOPS[i + 1][k] as f64;
        c[k] = (a + (b - a) * f).round() as u8;
    }
    c
}

/// Pixel colors in image order: top row first, so `x2` increases upward.
pub fn pixels(field: &ScalarField<f64>, style: Style) -> Vec<Rgb> {
    let (n1, n2) = (field.n1(), field.n2());
    let color: Box<dyn Fn(f64) -> Rgb> = match style {
        Style::Indicator => Box::new(|v| if v > 0.5 { [0, 0, 0] } else { [255, 255, 255] }),
        Style::Heatmap => {
            let finite = field.samples().iter().copied().filter(|v| v.is_finite());
            let lo = finite.clone().fold(f64::INFINITY, f64::min);
            let hi = finite.fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            Box::new(move |v| heat(if span > 0.0 { (v - lo) / span } else { 0.0 }))
        }
    };
    (0..n2)
        .rev()
        .flat_map(|j| (0..n1).map(move |i| (i, j)))
        .map(|(i, j)| color(field.get(i, j)))
        .collect()
}

pub fn to_ppm(field: &ScalarField<f64>, style: Style) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", field.n1(), field.n2()).into_bytes();
    for px in pixels(field, style) {
        out.extend_from_slice(&px);
    }
    out
}

/// One `<rect>` per horizontal run of equal color, one unit per cell.
pub fn to_svg(field: &ScalarField<f64>, style: Style) -> String {
    let (n1, n2) = (field.n1(), field.n2());
    let px = pixels(field, style);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{n1}\" height=\"{n2}\" viewBox=\"0 0 {n1} {n2}\" shape-rendering=\"crispEdges\">"
    );
    for (r, row) in px.chunks(n1).enumerate() {
        let mut start = 0;
        while start < n1 {
            let mut end = start + 1;
            while end < n1 && row[end] == row[start] {
                end += 1;
            }
            let [cr, cg, cb] = row[start];
            if style != Style::Indicator || row[start] != [255, 255, 255] {
                let _ = writeln!(
                    out,
                    "<rect x=\"{start}\" y=\"{r}\" width=\"{}\" height=\"1\" fill=\"#{cr:02x}{cg:02x}{cb:02x}\"/>",
                    end - start
                );
            }
            start = end;
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn render(field: &ScalarField<f64>, style: Style, format: Format) -> Vec<u8> {
    match format {
        Format::Svg => to_svg(field, style).into_bytes(),
        Format::Ppm => to_ppm(field, style),
    }
}
