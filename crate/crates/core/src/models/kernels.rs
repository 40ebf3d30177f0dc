//! Per-triple score and gradient kernels.
//!
//! Rows are plain slices so the same code runs on `f32` tables and on the
//! `f64` rows used by finite-difference checks. Complex rows store the real
//! parts in the first half and the imaginary parts in the second half.
//! RotatE relation rows hold one phase per complex coordinate.

use super::ModelKind;

/// Added under the square root of the TransE/RotatE gradient so it stays
/// finite at zero distance.
pub const NORM_EPS: f64 = 1e-12;

#[inline(always)]
fn at<T: Copy + Into<f64>>(xs: &[T], i: usize) -> f64 {
    xs[i].into()
}

/// Plausibility score; higher is more plausible.
pub fn score<T: Copy + Into<f64>>(kind: ModelKind, s: &[T], r: &[T], o: &[T]) -> f64 {
    match kind {
        ModelKind::TransE => {
            let mut acc = 0.0;
            for i in 0..s.len() {
                let d = at(s, i) + at(r, i) - at(o, i);
                acc += d * d;
            }
            -libm::sqrt(acc)
        }
        ModelKind::DistMult => {
            let mut acc = 0.0;
            for i in 0..s.len() {
                acc += at(s, i) * at(r, i) * at(o, i);
            }
            acc
        }
        ModelKind::ComplEx => {
            let k = s.len() / 2;
            let mut acc = 0.0;
            for i in 0..k {
                let (a, b) = (at(s, i), at(s, k + i));
                let (c, d) = (at(r, i), at(r, k + i));
                let (e, f) = (at(o, i), at(o, k + i));
                acc += (a * c - b * d) * e + (a * d + b * c) * f;
            }
            acc
        }
        ModelKind::RotatE => {
            let k = r.len();
            let mut acc = 0.0;
            for i in 0..k {
                let (sin, cos) = libm::sincos(at(r, i));
                let (a, b) = (at(s, i), at(s, k + i));
                let u = a * cos - b * sin - at(o, i);
                let v = a * sin + b * cos - at(o, k + i);
                acc += u * u + v * v;
            }
            -libm::sqrt(acc)
        }
    }
}

/// Adds `upstream * d score / d row` into `gs`, `gr`, `go`.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_grad<T: Copy + Into<f64>>(
    kind: ModelKind,
    s: &[T],
    r: &[T],
    o: &[T],
    upstream: f64,
    gs: &mut [f64],
    gr: &mut [f64],
    go: &mut [f64],
) {
    match kind {
        ModelKind::TransE => {
            let mut acc = 0.0;
            for i in 0..s.len() {
                let d = at(s, i) + at(r, i) - at(o, i);
                acc += d * d;
            }
            let coef = -upstream / libm::sqrt(acc + NORM_EPS);
            for i in 0..s.len() {
                let g = coef * (at(s, i) + at(r, i) - at(o, i));
                gs[i] += g;
                gr[i] += g;
                go[i] -= g;
            }
        }
        ModelKind::DistMult => {
            for i in 0..s.len() {
                let (a, b, c) = (at(s, i), at(r, i), at(o, i));
                gs[i] += upstream * b * c;
                gr[i] += upstream * a * c;
                go[i] += upstream * a * b;
            }
        }
        ModelKind::ComplEx => {
            let k = s.len() / 2;
            for i in 0..k {
                let (a, b) = (at(s, i), at(s, k + i));
                let (c, d) = (at(r, i), at(r, k + i));
                let (e, f) = (at(o, i), at(o, k + i));
                gs[i] += upstream * (c * e + d * f);
                gs[k + i] += upstream * (c * f - d * e);
                gr[i] += upstream * (a * e + b * f);
                gr[k + i] += upstream * (a * f - b * e);
                go[i] += upstream * (a * c - b * d);
                go[k + i] += upstream * (a * d + b * c);
            }
        }
        ModelKind::RotatE => {
            let k = r.len();
            let mut acc = 0.0;
            for i in 0..k {
                let (sin, cos) = libm::sincos(at(r, i));
                let (a, b) = (at(s, i), at(s, k + i));
                let u = a * cos - b * sin - at(o, i);
                let v = a * sin + b * cos - at(o, k + i);
                acc += u * u + v * v;
            }
            let coef = -upstream / libm::sqrt(acc + NORM_EPS);
            for i in 0..k {
                let (sin, cos) = libm::sincos(at(r, i));
                let (a, b) = (at(s, i), at(s, k + i));
                let du = coef * (a * cos - b * sin - at(o, i));
                let dv = coef * (a * sin + b * cos - at(o, k + i));
                gs[i] += du * cos + dv * sin;
                gs[k + i] += dv * cos - du * sin;
                gr[i] += du * (-a * sin - b * cos) + dv * (a * cos - b * sin);
                go[i] -= du;
                go[k + i] -= dv;
            }
        }
    }
}

/// `sum_i |v_i|^p` where `|.|` is the complex modulus for complex rows.
pub fn row_penalty<T: Copy + Into<f64>>(row: &[T], complex: bool, p: u32) -> f64 {
    let pow = |m: f64| if p == 2 { m * m } else { m * m * m };
    if complex {
        let k = row.len() / 2;
        (0..k)
            .map(|i| pow(libm::hypot(at(row, i), at(row, k + i))))
            .sum()
    } else {
        row.iter().map(|&x| pow(libm::fabs(x.into()))).sum()
    }
}

/// Adds `scale * d row_penalty / d row` into `out`.
pub fn accumulate_penalty_grad<T: Copy + Into<f64>>(row: &[T], complex: bool, p: u32, scale: f64, out: &mut [f64]) {
    if complex {
        let k = row.len() / 2;
        for i in 0..k {
            let (a, b) = (at(row, i), at(row, k + i));
            // d/da m^p = p m^(p-2) a
            let factor = if p == 2 { 2.0 } else { 3.0 * libm::hypot(a, b) };
            out[i] += scale * factor * a;
            out[k + i] += scale * factor * b;
        }
    } else {
        for (g, &x) in out.iter_mut().zip(row) {
            let x: f64 = x.into();
            let d = if p == 2 { 2.0 * x } else { 3.0 * x * libm::fabs(x) };
            *g += scale * d;
        }
    }
}
