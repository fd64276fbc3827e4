//! Local-maximum detection for fringe analysis.
//!
//! Scan curves are sampled on a grid; fringe positions are recovered by
//! finding strict local maxima and refining each with the vertex of the
//! parabola through the three surrounding samples.

/// One detected maximum, with the sub-grid refined position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Refined abscissa of the maximum.
    pub x: f64,
    /// Curve value at the grid sample (not the refined vertex value).
    pub y: f64,
    /// Grid index of the sample the peak was detected at.
    pub index: usize,
}

/// Strict interior local maxima of `ys` over `xs`, parabola-refined.
///
/// `xs` must be strictly increasing and the slices equal length.
pub fn find_local_maxima(xs: &[f64], ys: &[f64]) -> Vec<Peak> {
    assert_eq!(xs.len(), ys.len());
    let mut peaks = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        if ys[i] > ys[i - 1] && ys[i] > ys[i + 1] {
            peaks.push(Peak {
                x: parabolic_vertex(xs[i - 1], ys[i - 1], xs[i], ys[i], xs[i + 1], ys[i + 1]),
                y: ys[i],
                index: i,
            });
        }
    }
    peaks
}

/// Vertex abscissa of the parabola through three points. Falls back to the
/// middle point when the three are collinear.
fn parabolic_vertex(x0: f64, y0: f64, x1: f64, y1: f64, x2: f64, y2: f64) -> f64 {
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let curv = (d1 - d0) / (x2 - x0);
    if curv == 0.0 {
        return x1;
    }
    // derivative of the Newton-form quadratic is zero here
    0.5 * (x0 + x1) - 0.5 * d0 / curv
}

/// True when the merged sequence of `a` and `b` alternates strictly between
/// the two sources over the interval where both are present.
///
/// Both inputs must be sorted ascending. Elements outside the overlap of the
/// two ranges are ignored, so edge fringes cut off by one curve's coverage do
/// not count against the other.
pub fn alternates(a: &[f64], b: &[f64]) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    let lo = a[0].max(b[0]);
    let hi = a[a.len() - 1].min(b[b.len() - 1]);
    let mut merged: Vec<(f64, u8)> = a
        .iter()
        .filter(|&&x| (lo..=hi).contains(&x))
        .map(|&x| (x, 0u8))
        .chain(b.iter().filter(|&&x| (lo..=hi).contains(&x)).map(|&x| (x, 1u8)))
        .collect();
    merged.sort_by(|p, q| p.0.total_cmp(&q.0));
    merged.windows(2).all(|w| w[0].1 != w[1].1)
}
