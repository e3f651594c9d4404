//! Real-root isolation for low-degree polynomials on a closed interval.
//!
//! Roots are isolated through the critical points of the polynomial: the
//! roots of the derivative split `[lo, hi]` into monotone pieces, and each
//! piece contains at most one root, found by safeguarded Newton iteration
//! inside a sign-change bracket. Recursing on the derivative bottoms out
//! at the linear case, so no complex arithmetic is involved and the sign
//! pattern of the result is always consistent with direct evaluation.

/// Roots closer than this are merged into one.
pub const ROOT_MERGE_TOL: f64 = 1e-12;

const MAX_ITER: usize = 200;

/// Horner evaluation; coefficients in increasing degree order.
#[inline]
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn eval_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1] == 0.0 {
        n -= 1;
    }
    &coeffs[..n]
}

/// Sorted real roots of the polynomial within `[lo, hi]`.
///
/// Roots of even multiplicity that touch zero without a sign change are
/// reported only when the polynomial evaluates to exactly zero at a
/// critical point; near-tangencies resolve into either two nearby roots
/// or none, depending on the sign at the critical point.
pub fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(4);
    roots_into(trimmed(coeffs), lo, hi, &mut out);
    out
}

fn roots_into(p: &[f64], lo: f64, hi: f64, out: &mut Vec<f64>) {
    let start = out.len();
    match p.len() {
        0 | 1 => return,
        2 => {
            let r = -p[0] / p[1];
            if r >= lo && r <= hi {
                out.push(r);
            }
            return;
        }
        _ => {}
    }

    let derivative: Vec<f64> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect();
    let mut knots = Vec::with_capacity(p.len() + 1);
    knots.push(lo);
    roots_into(trimmed(&derivative), lo, hi, &mut knots);
    knots.push(hi);

    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let fa = eval(p, a);
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if b <= a {
            continue;
        }
        let fb = eval(p, b);
        if fb != 0.0 && fa.is_sign_negative() != fb.is_sign_negative() {
            out.push(bracketed_root(p, a, b, fa));
        }
    }
    if eval(p, hi) == 0.0 {
        out.push(hi);
    }

    let tail = &mut out[start..];
    tail.sort_by(|a, b| a.total_cmp(b));
    let mut kept = start;
    for i in start..out.len() {
        if kept == start || out[i] - out[kept - 1] > ROOT_MERGE_TOL {
            out[kept] = out[i];
            kept += 1;
        }
    }
    out.truncate(kept);
}

/// Safeguarded Newton inside a bracket `[a, b]` with `p(a)` and `p(b)` of opposite sign.
fn bracketed_root(p: &[f64], mut a: f64, mut b: f64, fa: f64) -> f64 {
    let a_negative = fa < 0.0;
    let mut x = 0.5 * (a + b);
    for _ in 0..MAX_ITER {
        let (fx, dfx) = eval_with_derivative(p, x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == a_negative {
            a = x;
        } else {
            b = x;
        }
        let width = b - a;
        if width <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) || width <= f64::MIN_POSITIVE {
            break;
        }
        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    // final polish, kept only if it stays in the bracket
    let (fx, dfx) = eval_with_derivative(p, x);
    let polished = x - fx / dfx;
    if dfx != 0.0 && polished >= a && polished <= b {
        polished
    } else {
        x
    }
}

/// Closed sub-intervals of `[lo, hi]` on which the polynomial is nonnegative.
///
/// Isolated touching points (a root with negative values on both sides)
/// are dropped; they carry no length. Adjacent pieces separated only by a
/// tangency from above are merged.
pub fn nonnegative_set(coeffs: &[f64], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let roots = real_roots_in(coeffs, lo, hi);
    let mut breaks = Vec::with_capacity(roots.len() + 2);
    breaks.push(lo);
    breaks.extend(roots.iter().copied().filter(|&r| r > lo && r < hi));
    breaks.push(hi);

    let mut out: Vec<(f64, f64)> = Vec::with_capacity(3);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        if eval(coeffs, 0.5 * (a + b)) >= 0.0 {
            match out.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                _ => out.push((a, b)),
            }
        }
    }
    if out.is_empty() && lo == hi && eval(coeffs, lo) >= 0.0 {
        out.push((lo, hi));
    }
    out
}
