//! Real roots of polynomials up to degree three in closed form.

use std::f64::consts::PI;

/// Real roots of `c[0] x³ + c[1] x² + c[2] x + c[3]`, ascending.
///
/// Three real roots use the trigonometric form, a single real root the
/// Cardano form. A vanishing leading coefficient (relative to the others)
/// drops to the quadratic or linear case. Every root gets one Newton step,
/// kept only when it lowers the residual.
pub fn real_roots(c: [f64; 4]) -> Vec<f64> {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut roots = if c[0].abs() <= 1e-14 * scale {
        quadratic_roots(c[1], c[2], c[3])
    } else {
        depressed_cubic_roots(c)
    };
    for r in roots.iter_mut() {
        *r = polish(c, *r);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

pub fn eval(c: [f64; 4], x: f64) -> f64 {
    ((c[0] * x + c[1]) * x + c[2]) * x + c[3]
}

fn polish(c: [f64; 4], x: f64) -> f64 {
    let d = (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
    if d == 0.0 {
        return x;
    }
    let stepped = x - eval(c, x) / d;
    if stepped.is_finite() && eval(c, stepped).abs() < eval(c, x).abs() {
        stepped
    } else {
        x
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if a.abs() <= 1e-14 * scale {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    // Avoids cancellation between -b and √disc.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0, 0.0];
    }
    vec![q / a, c / q]
}

fn depressed_cubic_roots(c: [f64; 4]) -> Vec<f64> {
    let a = c[1] / c[0];
    let b = c[2] / c[0];
    let d = c[3] / c[0];
    let shift = a / 3.0;

    // t³ + p t + q with x = t − a/3.
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    if p == 0.0 && q == 0.0 {
        return vec![-shift; 3];
    }
    if disc < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .collect()
    } else if disc == 0.0 {
        let simple = 3.0 * q / p;
        let double = -1.5 * q / p;
        vec![simple - shift, double - shift, double - shift]
    } else {
        let u = (-q / 2.0 - q.signum() * disc.sqrt()).cbrt();
        let t = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        vec![t - shift]
    }
}
