//! Helpers for reading features off sampled time series.

/// Times where `v` changes sign, with hysteresis: a change is counted only
/// once the series has moved beyond `+-threshold` on the new side. The
/// reported time is the linear zero crossing preceding that excursion.
pub fn sign_changes(t: &[f64], v: &[f64], threshold: f64) -> Vec<f64> {
    level_crossings(t, v, 0.0, threshold, true, true)
}

/// Crossings of `level` with hysteresis `threshold`, in the chosen
/// directions.
pub fn level_crossings(t: &[f64], v: &[f64], level: f64, threshold: f64, rising: bool, falling: bool) -> Vec<f64> {
    let mut out = Vec::new();
    let mut side = 0i8;
    let mut last_cross = None;
    for i in 0..v.len() {
        let x = v[i] - level;
        if i > 0 {
            let y = v[i - 1] - level;
            if (y < 0.0) != (x < 0.0) {
                let f = y / (y - x);
                last_cross = Some(t[i - 1] + f * (t[i] - t[i - 1]));
            }
        }
        let new_side = if x > threshold {
            1
        } else if x < -threshold {
            -1
        } else {
            0
        };
        if new_side != 0 && new_side != side {
            if side != 0 {
                let wanted = (new_side > 0 && rising) || (new_side < 0 && falling);
                if wanted {
                    if let Some(tc) = last_cross {
                        out.push(tc);
                    }
                }
            }
            side = new_side;
        }
    }
    out
}

/// Mean of `v` over `|t - c| < half_width` for each centre `c`; centres
/// whose window holds no samples are skipped.
pub fn plateau_means(t: &[f64], v: &[f64], centers: &[f64], half_width: f64) -> Vec<f64> {
    centers
        .iter()
        .filter_map(|&c| {
            let (sum, n) = t
                .iter()
                .zip(v)
                .filter(|(ti, _)| (**ti - c).abs() < half_width)
                .fold((0.0, 0usize), |(s, n), (_, x)| (s + x, n + 1));
            (n > 0).then(|| sum / n as f64)
        })
        .collect()
}

/// Number of sign changes between consecutive values.
pub fn sign_flips(values: &[f64]) -> usize {
    values.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
}

/// Mean spacing of consecutive event times.
pub fn mean_spacing(events: &[f64]) -> Option<f64> {
    if events.len() < 2 {
        return None;
    }
    Some((events[events.len() - 1] - events[0]) / (events.len() - 1) as f64)
}

/// Times of local maxima of a series, found on a window of `half` samples
/// on each side.
pub fn local_maxima(t: &[f64], v: &[f64], half: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in half..v.len().saturating_sub(half) {
        let w = &v[i - half..=i + half];
        if w.iter().all(|&x| x <= v[i]) && w.iter().any(|&x| x < v[i]) {
            out.push(t[i]);
        }
    }
    out
}

/// Mean of `v` over `[a, b]`.
pub fn window_mean(t: &[f64], v: &[f64], a: f64, b: f64) -> Option<f64> {
    let sel: Vec<f64> = t.iter().zip(v).filter(|(&x, _)| x >= a && x <= b).map(|(_, &y)| y).collect();
    if sel.is_empty() {
        None
    } else {
        Some(sel.iter().sum::<f64>() / sel.len() as f64)
    }
}

/// Running maximum of `|v|` over the trailing window of length `width`.
pub fn envelope(t: &[f64], v: &[f64], width: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut start = 0;
    for i in 0..v.len() {
        while t[i] - t[start] > width {
            start += 1;
        }
        out.push(v[start..=i].iter().fold(0.0_f64, |m, x| m.max(x.abs())));
    }
    out
}

/// First time at which `v` falls to or below `threshold`.
pub fn first_below(t: &[f64], v: &[f64], threshold: f64) -> Option<f64> {
    t.iter().zip(v).find(|(_, &x)| x <= threshold).map(|(&s, _)| s)
}
