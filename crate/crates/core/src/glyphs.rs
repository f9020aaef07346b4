//! Seven generated 50x50 binary glyphs used as a default training set.
//!
//! Glyphs 1-3 share a bars-on-a-vertical skeleton, 4-5 are boxes, 6-7 are
//! two-stroke diagonals.

use crate::image::Image;

pub const GLYPH_SIZE: usize = 50;
pub const GLYPH_COUNT: usize = 7;

/// Similarity group of each glyph label (1-based labels).
pub const GLYPH_GROUPS: [usize; GLYPH_COUNT] = [0, 0, 0, 1, 1, 2, 2];

type Stroke = ((f64, f64), (f64, f64));

// Strokes in unit-square coordinates, (x right, y down).
const STROKES: [&[Stroke]; GLYPH_COUNT] = [
    // three bars and a vertical
    &[
        ((0.25, 0.30), (0.75, 0.30)),
        ((0.18, 0.72), (0.82, 0.72)),
        ((0.50, 0.18), (0.50, 0.72)),
        ((0.32, 0.50), (0.68, 0.50)),
    ],
    // three bars, a vertical and a dot
    &[
        ((0.22, 0.26), (0.78, 0.26)),
        ((0.28, 0.50), (0.72, 0.50)),
        ((0.18, 0.76), (0.82, 0.76)),
        ((0.50, 0.26), (0.50, 0.76)),
        ((0.62, 0.58), (0.70, 0.68)),
    ],
    // vertical runs past the lower bar
    &[
        ((0.22, 0.26), (0.78, 0.26)),
        ((0.26, 0.56), (0.74, 0.56)),
        ((0.50, 0.26), (0.50, 0.84)),
    ],
    // box
    &[
        ((0.26, 0.26), (0.74, 0.26)),
        ((0.26, 0.74), (0.74, 0.74)),
        ((0.26, 0.26), (0.26, 0.74)),
        ((0.74, 0.26), (0.74, 0.74)),
    ],
    // tall box with a middle bar
    &[
        ((0.32, 0.20), (0.68, 0.20)),
        ((0.32, 0.80), (0.68, 0.80)),
        ((0.32, 0.20), (0.32, 0.80)),
        ((0.68, 0.20), (0.68, 0.80)),
        ((0.32, 0.50), (0.68, 0.50)),
    ],
    // left stroke long
    &[((0.50, 0.18), (0.20, 0.80)), ((0.48, 0.40), (0.80, 0.80))],
    // right stroke long
    &[((0.44, 0.22), (0.76, 0.80)), ((0.50, 0.42), (0.24, 0.70))],
];

const HALF_WIDTH: f64 = 0.045;

/// Glyph `label` (1-based).
pub fn glyph(label: usize) -> Option<Image> {
    let strokes = STROKES.get(label.checked_sub(1)?)?;
    let m = GLYPH_SIZE;
    let mut img = Image::blank(m);
    for r in 0..m {
        for c in 0..m {
            let p = ((c as f64 + 0.5) / m as f64, (r as f64 + 0.5) / m as f64);
            if strokes
                .iter()
                .any(|&(a, b)| segment_distance(p, a, b) <= HALF_WIDTH)
            {
                img.set(r, c, 1.0);
            }
        }
    }
    Some(img)
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (qx * qx + qy * qy).sqrt()
}
