//! Numeric layout helpers: quantiles, kernel density, swarm offsets, tick
//! positions, force-directed and word-cloud placement.

use alloc::vec;
use alloc::vec::Vec;

use crate::util::sort_f64;

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
}

/// Quartiles and Tukey whiskers (1.5 IQR, clipped to the data).
pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    sort_f64(&mut v);
    let q1 = quantile(&v, 0.25);
    let q3 = quantile(&v, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    Some(BoxStats {
        q1,
        median: quantile(&v, 0.5),
        q3,
        whisker_lo: v.iter().copied().find(|x| *x >= lo_fence).unwrap_or(v[0]),
        whisker_hi: v.iter().rev().copied().find(|x| *x <= hi_fence).unwrap_or(v[v.len() - 1]),
    })
}

/// Silverman's rule-of-thumb bandwidth, `0.9 · min(sd, IQR/1.34) · n^(-1/5)`,
/// falling back to whichever spread is nonzero, then to 1.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0));
    let mut sorted = values.to_vec();
    sort_f64(&mut sorted);
    let iqr = (quantile(&sorted, 0.75) - quantile(&sorted, 0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => return 1.0,
    };
    0.9 * spread * libm::pow(n, -0.2)
}

/// Gaussian kernel density evaluated at `points` evenly spaced positions over
/// `[lo, hi]`.
pub fn kde(values: &[f64], lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
    let h = silverman_bandwidth(values);
    let n = values.len() as f64;
    let norm = 1.0 / (n * h * libm::sqrt(2.0 * core::f64::consts::PI));
    (0..points)
        .map(|i| {
            let x = if points == 1 { lo } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
            let density = values
                .iter()
                .map(|v| {
                    let u = (x - v) / h;
                    libm::exp(-0.5 * u * u)
                })
                .sum::<f64>()
                * norm;
            (x, density)
        })
        .collect()
}

/// Greedy beeswarm: points (already in pixel positions along the value axis)
/// get the smallest side offset that keeps them `diameter` apart from every
/// placed point; offsets are clamped to `±max_offset`.
pub fn swarm_offsets(positions: &[f64], diameter: f64, max_offset: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|a, b| {
        positions[*a]
            .partial_cmp(&positions[*b])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(b))
    });
    let mut placed: Vec<(f64, f64)> = Vec::new();
    let mut offsets = vec![0.0; positions.len()];
    for i in order {
        let p = positions[i];
        let mut chosen = 0.0f64;
        for step in 0usize..1000 {
            let candidate = if step == 0 {
                0.0
            } else if step % 2 == 1 {
                diameter * step.div_ceil(2) as f64 / 2.0
            } else {
                -diameter * (step / 2) as f64 / 2.0
            };
            if candidate.abs() > max_offset {
                chosen = chosen.clamp(-max_offset, max_offset);
                break;
            }
            let clear = placed.iter().all(|(q, o)| {
                let dx = p - q;
                let dy = candidate - o;
                dx * dx + dy * dy >= diameter * diameter - 1e-9
            });
            chosen = candidate;
            if clear {
                break;
            }
        }
        offsets[i] = chosen;
        placed.push((p, chosen));
    }
    offsets
}

/// About five round-valued ticks covering `[lo, hi]`.
pub fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / 5.0;
    let magnitude = libm::pow(10.0, libm::floor(libm::log10(raw)));
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let first = libm::ceil(lo / step - 1e-9) * step;
    let mut ticks = Vec::new();
    let mut i = 0;
    loop {
        let t = first + step * i as f64;
        if t > hi + step * 1e-9 {
            break;
        }
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        i += 1;
    }
    ticks
}

/// Powers of ten covering `[lo, hi]` (both positive).
pub fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let a = libm::floor(libm::log10(lo)) as i32;
    let b = libm::ceil(libm::log10(hi)) as i32;
    (a..=b.max(a)).map(|e| libm::pow(10.0, e as f64)).collect()
}

/// Deterministic Fruchterman-Reingold layout in the unit square, starting
/// from nodes evenly spaced on a circle.
pub fn force_layout(n: usize, edges: &[(usize, usize, f64)], iterations: usize) -> Vec<(f64, f64)> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![(0.5, 0.5)];
    }
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let a = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
            (0.5 + 0.4 * libm::cos(a), 0.5 + 0.4 * libm::sin(a))
        })
        .collect();
    let k = libm::sqrt(1.0 / n as f64);
    let mut temperature = 0.1;
    let cooling = temperature / (iterations as f64 + 1.0);
    for _ in 0..iterations {
        let mut disp = vec![(0.0f64, 0.0f64); n];
        for i in 0..n {
            for j in i + 1..n {
                let dx = pos[i].0 - pos[j].0;
                let dy = pos[i].1 - pos[j].1;
                let d = libm::sqrt(dx * dx + dy * dy).max(1e-6);
                let f = k * k / d;
                disp[i].0 += dx / d * f;
                disp[i].1 += dy / d * f;
                disp[j].0 -= dx / d * f;
                disp[j].1 -= dy / d * f;
            }
        }
        for &(u, v, w) in edges {
            let dx = pos[u].0 - pos[v].0;
            let dy = pos[u].1 - pos[v].1;
            let d = libm::sqrt(dx * dx + dy * dy).max(1e-6);
            let f = d * d / k * (1.0 + libm::log(w.max(1.0)));
            disp[u].0 -= dx / d * f;
            disp[u].1 -= dy / d * f;
            disp[v].0 += dx / d * f;
            disp[v].1 += dy / d * f;
        }
        for i in 0..n {
            let len = libm::sqrt(disp[i].0 * disp[i].0 + disp[i].1 * disp[i].1);
            if len > 0.0 {
                let step = len.min(temperature);
                pos[i].0 = (pos[i].0 + disp[i].0 / len * step).clamp(0.0, 1.0);
                pos[i].1 = (pos[i].1 + disp[i].1 / len * step).clamp(0.0, 1.0);
            }
        }
        temperature -= cooling;
    }
    // rescale to fill the unit square
    let (min_x, max_x, min_y, max_y) = pos.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), p| (a.min(p.0), b.max(p.0), c.min(p.1), d.max(p.1)),
    );
    let sx = (max_x - min_x).max(1e-9);
    let sy = (max_y - min_y).max(1e-9);
    pos.iter().map(|p| ((p.0 - min_x) / sx, (p.1 - min_y) / sy)).collect()
}

/// Word boxes `(width, height)` placed along an Archimedean spiral from the
/// center, first fit wins. Returns box centers, or `None` for words that do
/// not fit inside `width × height`.
pub fn place_words(boxes: &[(f64, f64)], width: f64, height: f64) -> Vec<Option<(f64, f64)>> {
    let mut placed: Vec<(f64, f64, f64, f64)> = Vec::new();
    boxes
        .iter()
        .map(|&(w, h)| {
            let mut t = 0.0f64;
            while t < 400.0 {
                let r = 4.0 * t;
                let x = width / 2.0 + r * libm::cos(t);
                let y = height / 2.0 + r * libm::sin(t) * height / width;
                let rect = (x - w / 2.0, y - h / 2.0, x + w / 2.0, y + h / 2.0);
                let inside = rect.0 >= 0.0 && rect.1 >= 0.0 && rect.2 <= width && rect.3 <= height;
                if inside
                    && placed
                        .iter()
                        .all(|p| rect.2 <= p.0 || rect.0 >= p.2 || rect.3 <= p.1 || rect.1 >= p.3)
                {
                    placed.push(rect);
                    return Some((x, y));
                }
                t += 0.05;
            }
            None
        })
        .collect()
}
