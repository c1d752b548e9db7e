/// Least-squares slope of `y` against `x` with its standard error.
///
/// Fewer than two points, or a degenerate abscissa, give `(0, 0)`. With
/// exactly two points the standard error is zero.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len().min(y.len());
    if n < 2 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    if n == 2 {
        return (slope, 0.0);
    }
    let intercept = my - slope * mx;
    let sse: f64 = (0..n)
        .map(|i| {
            let e = y[i] - intercept - slope * x[i];
            e * e
        })
        .sum();
    (slope, (sse / (nf - 2.0) / sxx).sqrt())
}

/// `max − min`, zero for an empty series.
pub fn peak_to_peak(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}
