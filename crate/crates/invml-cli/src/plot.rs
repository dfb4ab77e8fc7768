//! Output images: SVG 1.1 scatter plots of 2-D embeddings and binary PGM
//! (P5) strips of image-valued reconstructions.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use invml_core::Matrix;

/// Categorical fill colors, reused cyclically past 12 classes.
const PALETTE: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#ad494a",
];

const PLOT_SIZE: f64 = 640.0;
const MARGIN: f64 = 32.0;

/// Renders the first two columns of `points` as an SVG scatter plot,
/// colored by label when labels are present.
pub fn scatter_svg(points: &Matrix, labels: Option<&[usize]>) -> String {
    assert!(points.cols() >= 2, "scatter needs at least 2 columns");
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..points.rows() {
        let (x, y) = (points.get(i, 0), points.get(i, 1));
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let x_span = (x_max - x_min).max(1e-12);
    let y_span = (y_max - y_min).max(1e-12);
    let inner = PLOT_SIZE - 2.0 * MARGIN;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{PLOT_SIZE}\" height=\"{PLOT_SIZE}\" viewBox=\"0 0 {PLOT_SIZE} {PLOT_SIZE}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{PLOT_SIZE}\" height=\"{PLOT_SIZE}\" fill=\"white\"/>"
    );
    for i in 0..points.rows() {
        let cx = MARGIN + (points.get(i, 0) - x_min) / x_span * inner;
        // SVG y grows downward; flip so larger values plot higher.
        let cy = PLOT_SIZE - MARGIN - (points.get(i, 1) - y_min) / y_span * inner;
        let color = match labels {
            Some(l) => PALETTE[l[i] % PALETTE.len()],
            None => PALETTE[0],
        };
        let _ = writeln!(
            svg,
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"2\" fill=\"{color}\" fill-opacity=\"0.7\"/>"
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_scatter_svg(
    path: &Path,
    points: &Matrix,
    labels: Option<&[usize]>,
) -> std::io::Result<()> {
    fs::write(path, scatter_svg(points, labels))
}

/// Writes each row of `rows` as a `side x side` grayscale tile, laid out
/// left to right in one binary PGM (P5) image. Values are clamped to
/// `[0, 1]` before quantization.
pub fn write_pgm_strip(path: &Path, rows: &Matrix, side: usize) -> std::io::Result<()> {
    assert_eq!(rows.cols(), side * side, "rows are not {side}x{side} images");
    let n = rows.rows();
    let width = side * n;
    let mut f = fs::File::create(path)?;
    write!(f, "P5\n{width} {side}\n255\n")?;
    let mut raster = vec![0u8; width * side];
    for (tile, _) in (0..n).zip(0..) {
        let row = rows.row(tile);
        for y in 0..side {
            for x in 0..side {
                let v = row[y * side + x].clamp(0.0, 1.0);
                raster[y * width + tile * side + x] = (v * 255.0).round() as u8;
            }
        }
    }
    f.write_all(&raster)?;
    Ok(())
}

/// Side length when the feature dimension is a perfect square and large
/// enough to plausibly be an image; `None` otherwise.
pub fn image_side(dim: usize) -> Option<usize> {
    let side = (dim as f64).sqrt().round() as usize;
    if side >= 4 && side * side == dim {
        Some(side)
    } else {
        None
    }
}
