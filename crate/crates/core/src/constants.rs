//! The schedule constants α and β.
//!
//! α is the root of `∫_0^1 α^(1-1/u)/u du = 1` and `β = α / ln α`. The same
//! pair satisfies `h(α, β) = 1` where `h(a, b) = ∫_0^b (a/z) e^(-a/z) dz`.
//! Both integrals are evaluated with adaptive Simpson quadrature; α is found
//! by bisection, which always converges because the defining integral is
//! strictly decreasing in α.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Left-endpoint sliver excluded from every quadrature. Both integrands are
/// bounded by `a/(e·ln a)` resp. `1/e` there and decay superexponentially,
/// so its contribution is far below any requested tolerance.
const SLIVER: f64 = 1e-12;

const MAX_DEPTH: u32 = 60;
const MAX_EVALS: usize = 20_000_000;

/// α, β and the absolute tolerance they were solved to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleConstants {
    pub alpha: f64,
    pub beta: f64,
    pub tolerance: f64,
}

/// `a^(1-1/u)/u`, with the limit value 0 at `u = 0`.
pub fn schedule_integrand(u: f64, a: f64) -> Result<f64> {
    if a.is_nan() || a <= 1.0 {
        return invalid(format!("schedule integrand needs a > 1, got {a}"));
    }
    if !(0.0..=1.0).contains(&u) {
        return invalid(format!("schedule integrand needs 0 <= u <= 1, got {u}"));
    }
    Ok(schedule_integrand_raw(u, a.ln()))
}

#[inline]
fn schedule_integrand_raw(u: f64, ln_a: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    ((1.0 - 1.0 / u) * ln_a).exp() / u
}

/// `∫_0^1 a^(1-1/u)/u du` to absolute error `tol`.
pub fn schedule_integral(a: f64, tol: f64) -> Result<f64> {
    if a.is_nan() || a <= 1.0 {
        return invalid(format!("schedule integral diverges for a <= 1 (a = {a})"));
    }
    check_tol(tol)?;
    let ln_a = a.ln();
    adaptive_simpson(|u| schedule_integrand_raw(u, ln_a), SLIVER, 1.0, tol)
}

/// Solves for α by bisection on `[1 + 1e-6, 10]` until both the bracket width
/// and the residual `|∫ - 1|` are at most `tol`.
pub fn solve_alpha(tol: f64) -> Result<ScheduleConstants> {
    check_tol(tol)?;
    let quad_tol = tol / 16.0;
    let residual = |a: f64| schedule_integral(a, quad_tol).map(|v| v - 1.0);
    let (mut lo, mut hi) = (1.0 + 1e-6, 10.0);
    let (r_lo, r_hi) = (residual(lo)?, residual(hi)?);
    if !(r_lo > 0.0 && r_hi < 0.0) {
        return Err(Error::NumericFailure(format!(
            "bracket does not straddle the root: residuals {r_lo} and {r_hi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid)?;
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol && r.abs() <= tol {
            let alpha = mid;
            return Ok(ScheduleConstants {
                alpha,
                beta: alpha / alpha.ln(),
                tolerance: tol,
            });
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(Error::NumericFailure(format!(
        "bisection did not reach tolerance {tol}"
    )))
}

/// `h(a, b) = ∫_0^b (a/z) e^(-a/z) dz` to absolute error `tol`.
pub fn h(a: f64, b: f64, tol: f64) -> Result<f64> {
    if a.is_nan() || a <= 0.0 {
        return invalid(format!("h needs a > 0, got {a}"));
    }
    if b.is_nan() || b < 0.0 {
        return invalid(format!("h needs b >= 0, got {b}"));
    }
    check_tol(tol)?;
    if b <= SLIVER {
        return Ok(0.0);
    }
    let integrand = |z: f64| {
        if z <= 0.0 {
            0.0
        } else {
            let y = a / z;
            y * (-y).exp()
        }
    };
    adaptive_simpson(integrand, SLIVER, b, tol)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        invalid(format!("tolerance must be positive, got {tol}"))
    }
}

/// Adaptive Simpson with interval bisection and Richardson correction.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    struct State<F> {
        f: F,
        evals: usize,
        failed: bool,
    }

    fn recurse<F: Fn(f64) -> f64>(
        st: &mut State<F>,
        [a, m, b]: [f64; 3],
        [fa, fm, fb]: [f64; 3],
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = ((st.f)(lm), (st.f)(rm));
        st.evals += 2;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        if depth == 0 || st.evals > MAX_EVALS {
            st.failed = true;
            return left + right + diff / 15.0;
        }
        recurse(st, [a, lm, m], [fa, flm, fm], left, 0.5 * tol, depth - 1)
            + recurse(st, [m, rm, b], [fm, frm, fb], right, 0.5 * tol, depth - 1)
    }

    let mut st = State {
        f,
        evals: 3,
        failed: false,
    };
    // Start from a fixed split so narrow features near the left end are not
    // missed by a single coarse Simpson estimate.
    const PIECES: usize = 64;
    let width = (b - a) / PIECES as f64;
    let mut total = 0.0;
    for k in 0..PIECES {
        let lo = a + width * k as f64;
        let hi = if k + 1 == PIECES { b } else { lo + width };
        let mid = 0.5 * (lo + hi);
        let fs = [(st.f)(lo), (st.f)(mid), (st.f)(hi)];
        let whole = (hi - lo) / 6.0 * (fs[0] + 4.0 * fs[1] + fs[2]);
        total += recurse(
            &mut st,
            [lo, mid, hi],
            fs,
            whole,
            tol / PIECES as f64,
            MAX_DEPTH,
        );
    }
    if st.failed || !total.is_finite() {
        return Err(Error::NumericFailure(format!(
            "adaptive Simpson did not converge on [{a}, {b}]"
        )));
    }
    Ok(total)
}
