//! SVG line charts of a sweep: depth and the three multipole ratios against w.

use plotters::prelude::*;
use trenchfield::report::TrapReport;
use trenchfield::sweep::{SweepRow, SweepSpec};

type Pick = fn(&TrapReport) -> Option<f64>;

const PANELS: [(&str, Pick); 4] = [
    ("depth (eV)", |r| r.depth.clone().ok()),
    ("C2", |r| r.c2.clone().ok()),
    ("C3'", |r| r.c3_prime.clone().ok()),
    ("C4'", |r| r.c4_prime.clone().ok()),
];

fn range(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1e-3) };
    (lo - pad, hi + pad)
}

pub fn sweep_svg(spec: &SweepSpec, rows: &[SweepRow]) -> Result<String, String> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (1000, 760)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| e.to_string())?;
        let title = format!("{} sweep over {}", spec.base.family(), spec.swept);
        let root = root.titled(&title, ("sans-serif", 22)).map_err(|e| e.to_string())?;
        let (wx0, wx1) = range(spec.values.iter().copied());
        for (area, (label, pick)) in root.split_evenly((2, 2)).iter().zip(PANELS) {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| r.report.as_ref().ok().and_then(pick).map(|v| (r.w, v)))
                .collect();
            let (y0, y1) = range(points.iter().map(|p| p.1));
            let mut chart = ChartBuilder::on(area)
                .margin(12)
                .x_label_area_size(36)
                .y_label_area_size(56)
                .build_cartesian_2d(wx0..wx1, y0..y1)
                .map_err(|e| e.to_string())?;
            chart
                .configure_mesh()
                .x_desc(format!("{} (µm)", spec.swept))
                .y_desc(label)
                .draw()
                .map_err(|e| e.to_string())?;
            chart
                .draw_series(LineSeries::new(points.iter().copied(), &BLUE))
                .map_err(|e| e.to_string())?;
            chart
                .draw_series(points.iter().map(|&p| Circle::new(p, 3, BLUE.filled())))
                .map_err(|e| e.to_string())?;
        }
        root.present().map_err(|e| e.to_string())?;
    }
    Ok(svg)
}
