//! Peak extraction on sampled line shapes.

/// Peaks lower than this fraction of the global maximum are ignored.
pub const PEAK_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub frequency: f64,
    pub height: f64,
}

/// Local maxima of `values`, refined by a three-point parabola through each
/// maximum and its neighbours. Sorted by frequency.
pub fn find_peaks(frequencies: &[f64], values: &[f64]) -> Vec<Peak> {
    let n = frequencies.len().min(values.len());
    if n < 3 {
        return Vec::new();
    }
    let global = values[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(global > 0.0) {
        return Vec::new();
    }
    let floor = PEAK_THRESHOLD * global;
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        // ties to the right count once, on their left edge
        if !(c > l && c >= r) || c < floor {
            continue;
        }
        peaks.push(refine(
            [frequencies[i - 1], frequencies[i], frequencies[i + 1]],
            [l, c, r],
        ));
    }
    peaks
}

fn refine(x: [f64; 3], y: [f64; 3]) -> Peak {
    // Lagrange parabola in coordinates centred on the middle sample.
    let (h0, h1) = (x[0] - x[1], x[2] - x[1]);
    let a = (y[0] - y[1]) / (h0 * (h0 - h1)) + (y[2] - y[1]) / (h1 * (h1 - h0));
    let b = -(y[0] - y[1]) * h1 / (h0 * (h0 - h1)) - (y[2] - y[1]) * h0 / (h1 * (h1 - h0));
    if !(a < 0.0) {
        return Peak { frequency: x[1], height: y[1] };
    }
    let t = (-b / (2.0 * a)).clamp(h0, h1);
    Peak {
        frequency: x[1] + t,
        height: y[1] + b * t + a * t * t,
    }
}

/// The two highest peaks in frequency order, if at least two exist.
pub fn two_highest(peaks: &[Peak]) -> Option<(Peak, Peak)> {
    if peaks.len() < 2 {
        return None;
    }
    let mut by_height = peaks.to_vec();
    by_height.sort_by(|a, b| b.height.total_cmp(&a.height));
    let (a, b) = (by_height[0], by_height[1]);
    Some(if a.frequency < b.frequency { (a, b) } else { (b, a) })
}
