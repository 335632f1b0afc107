//! Flat SVG scatter plots for MDS embeddings: points colored by label, with
//! a legend. No timestamps or other run-varying content.

use shapesig::analysis::MdsEmbedding;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub fn scatter_svg(embedding: &MdsEmbedding, labels: Option<&[String]>) -> String {
    let (w, h, margin) = (640.0, 640.0, 50.0);
    let points: Vec<(f64, f64)> = embedding
        .points
        .iter()
        .map(|p| (p[0], *p.get(1).unwrap_or(&0.0)))
        .collect();

    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &points {
        lo_x = lo_x.min(x);
        hi_x = hi_x.max(x);
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    let span_x = (hi_x - lo_x).max(1e-12);
    let span_y = (hi_y - lo_y).max(1e-12);
    let sx = |x: f64| margin + (x - lo_x) / span_x * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - lo_y) / span_y * (h - 2.0 * margin);

    let mut classes: Vec<&str> = labels
        .map(|ls| ls.iter().map(|s| s.as_str()).collect())
        .unwrap_or_default();
    classes.sort_unstable();
    classes.dedup();
    let color_of = |label: Option<&str>| -> &str {
        match label {
            None => PALETTE[0],
            Some(l) => {
                let idx = classes.iter().position(|c| *c == l).unwrap_or(0);
                PALETTE[idx % PALETTE.len()]
            }
        }
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{margin}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999\"/>\n",
        h - margin,
        w - margin,
        h - margin
    ));
    svg.push_str(&format!(
        "  <line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{}\" stroke=\"#999\"/>\n",
        h - margin
    ));
    for (i, &(x, y)) in points.iter().enumerate() {
        let color = color_of(labels.map(|ls| ls[i].as_str()));
        svg.push_str(&format!(
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"{color}\" fill-opacity=\"0.8\"/>\n",
            sx(x),
            sy(y)
        ));
    }
    for (k, class) in classes.iter().enumerate() {
        let y = margin + 18.0 * k as f64;
        svg.push_str(&format!(
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"{}\"/>\n",
            w - margin - 110.0,
            y,
            PALETTE[k % PALETTE.len()]
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
            w - margin - 98.0,
            y + 4.5,
            class
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
