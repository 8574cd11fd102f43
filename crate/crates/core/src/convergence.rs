//! Observed order of accuracy from refinement studies.

/// Order implied by errors `coarse` at step `h` and `fine` at step `h / ratio`.
pub fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// Richardson estimate from three solutions at steps h, h/r, h/r² where no
/// exact answer is available. Inputs are the successive differences
/// ‖f(h) − f(h/r)‖ and ‖f(h/r) − f(h/r²)‖.
pub fn richardson_order(diff_coarse: f64, diff_fine: f64, ratio: f64) -> f64 {
    observed_order(diff_coarse, diff_fine, ratio)
}

/// Richardson estimate for three steps `h[0] > h[1] > h[2]` that need not
/// share a ratio: the p solving (h₀ᵖ − h₁ᵖ)/(h₁ᵖ − h₂ᵖ) = diff_coarse/diff_fine.
/// `None` when no order in (0, 16] fits, e.g. once differences hit round-off.
pub fn richardson_order_steps(h: [f64; 3], diff_coarse: f64, diff_fine: f64) -> Option<f64> {
    if !(h[0] > h[1] && h[1] > h[2] && h[2] > 0.0 && diff_coarse > 0.0 && diff_fine > 0.0) {
        return None;
    }
    let target = (diff_coarse / diff_fine).ln();
    // in units of h[2] so the powers stay representable
    let (a, b) = (h[0] / h[2], h[1] / h[2]);
    let g = |p: f64| ((a.powf(p) - b.powf(p)) / (b.powf(p) - 1.0)).ln() - target;
    let (mut lo, mut hi) = (1e-3, 16.0);
    if g(lo) > 0.0 || g(hi) < 0.0 {
        return None;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// max_k |a_k − b_k| over the common prefix.
pub fn sup_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Least-squares slope of log(error) against log(step); the observed order
/// over a whole refinement ladder.
pub fn fitted_order(steps: &[f64], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(errors)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recovers_synthetic_orders() {
        let steps = [0.1, 0.05, 0.025, 0.0125];
        for p in [1.0, 2.0, 4.0] {
            let errs: Vec<f64> = steps.iter().map(|h: &f64| 3.0 * h.powf(p)).collect();
            assert_abs_diff_eq!(observed_order(errs[0], errs[1], 2.0), p, epsilon = 1e-12);
            assert_abs_diff_eq!(fitted_order(&steps, &errs), p, epsilon = 1e-12);
            // f(h) = 1 + c h^p
            let f: Vec<f64> = errs.iter().map(|e| 1.0 + e).collect();
            assert_abs_diff_eq!(
                richardson_order((f[0] - f[1]).abs(), (f[1] - f[2]).abs(), 2.0),
                p,
                epsilon = 1e-9
            );
        }
        // uneven ladder
        let h = [0.1, 0.047, 0.026];
        for p in [2.0, 4.0] {
            let f: Vec<f64> = h.iter().map(|h: &f64| 1.0 + 0.7 * h.powf(p)).collect();
            let est = richardson_order_steps(h, (f[0] - f[1]).abs(), (f[1] - f[2]).abs()).unwrap();
            assert_abs_diff_eq!(est, p, epsilon = 1e-9);
        }
        assert_eq!(richardson_order_steps(h, 1.0, 0.0), None);
        assert_eq!(sup_difference(&[1.0, 2.0, 3.0], &[1.0, 2.5, 2.0]), 1.0);
    }
}
