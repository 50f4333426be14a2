//! Ideal gesture shapes as polylines in unit coordinates (y grows downward,
//! extent roughly [-1, 1]²). The first vertex is where the stroke starts.

use std::f64::consts::{PI, TAU};

use crate::synth::label::GestureLabel;
use crate::synth::trajectory::Point;

/// Half-extent of a template on the canvas, in pixels.
pub const TEMPLATE_SCALE: f64 = 120.0;

/// Canvas point that template coordinates are centered on.
pub const TEMPLATE_CENTER: Point = Point { x: 320.0, y: 240.0 };

const CIRCLE_SEGMENTS: usize = 720;

pub fn template(label: GestureLabel) -> Option<Vec<Point>> {
    let p = Point::new;
    let shape = match label {
        GestureLabel::Up => vec![p(0.0, 1.0), p(0.0, -1.0)],
        GestureLabel::Down => vec![p(0.0, -1.0), p(0.0, 1.0)],
        GestureLabel::Left => vec![p(1.0, 0.0), p(-1.0, 0.0)],
        GestureLabel::Right => vec![p(-1.0, 0.0), p(1.0, 0.0)],
        // Clockwise from the top-left corner.
        GestureLabel::Rectangle => vec![
            p(-1.0, -0.7),
            p(1.0, -0.7),
            p(1.0, 0.7),
            p(-1.0, 0.7),
            p(-1.0, -0.7),
        ],
        // Counter-clockwise on screen, starting at the top.
        GestureLabel::Circle => (0..=CIRCLE_SEGMENTS)
            .map(|k| {
                let a = -PI / 2.0 - TAU * k as f64 / CIRCLE_SEGMENTS as f64;
                p(a.cos(), a.sin())
            })
            .collect(),
        // Short down-right stroke, then a long rise to the right: the same
        // left-to-right sweep a Right swipe has.
        GestureLabel::CheckMark => vec![p(-1.0, 0.0), p(-0.4, 0.6), p(1.0, -0.9)],
        GestureLabel::Caret => vec![p(-1.0, 0.7), p(0.0, -0.7), p(1.0, 0.7)],
        // Both diagonals drawn in one stroke, joined along the right edge.
        GestureLabel::X => vec![p(-1.0, -1.0), p(1.0, 1.0), p(1.0, -1.0), p(-1.0, 1.0)],
        // Unicursal five-point star: every second vertex of a pentagon.
        GestureLabel::Star => (0..=5)
            .map(|k| {
                let a = -PI / 2.0 + 2.0 * TAU * k as f64 / 5.0;
                p(a.cos(), a.sin())
            })
            .collect(),
        GestureLabel::Unclassified => return None,
    };
    Some(shape)
}

/// `n ≥ 2` points equally spaced by arc length along `polyline`, endpoints
/// included.
pub fn sample_by_arc_length(polyline: &[Point], n: usize) -> Vec<Point> {
    assert!(polyline.len() >= 2 && n >= 2);
    let mut cumulative = Vec::with_capacity(polyline.len());
    let mut total = 0.0;
    cumulative.push(0.0);
    for w in polyline.windows(2) {
        total += w[0].distance(w[1]);
        cumulative.push(total);
    }
    let mut seg = 0;
    (0..n)
        .map(|k| {
            if k == n - 1 {
                return *polyline.last().unwrap();
            }
            let target = total * k as f64 / (n - 1) as f64;
            while seg + 1 < cumulative.len() - 1 && cumulative[seg + 1] < target {
                seg += 1;
            }
            let len = cumulative[seg + 1] - cumulative[seg];
            let frac = if len > 0.0 {
                (target - cumulative[seg]) / len
            } else {
                0.0
            };
            let (a, b) = (polyline[seg], polyline[seg + 1]);
            Point::new(a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y))
        })
        .collect()
}
