//! Adaptive Gauss-Kronrod quadrature.
//!
//! Globally adaptive bisection driven by the G7/K15 embedded pair, plus a
//! tail-truncation rule for integrals over the whole line: the domain is
//! expanded outward until the integrand drops below `TAIL_CUTOFF` of its
//! observed peak.

use crate::error::{Error, Result};

/// Relative level at which integrand tails are truncated.
pub const TAIL_CUTOFF: f64 = 1e-16;

// QUADPACK G7/K15 nodes and weights on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 evaluation on `[a, b]`: returns (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut resabs = WGK[7] * fc.abs();

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let value = kronrod * half;
    let raw_err = ((kronrod - gauss) * half).abs();
    // QUADPACK-style rescaling of the raw error against the magnitude.
    let scale = resabs * half.abs();
    let err = if scale > 0.0 && raw_err > 0.0 {
        let r = (200.0 * raw_err / scale).powf(1.5);
        if r < 1.0 {
            scale * r
        } else {
            raw_err.min(scale)
        }
    } else {
        raw_err
    };
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Integrates `f` over `[a, b]` to the requested tolerances.
///
/// The result is accepted once the summed error estimate is below
/// `max(abs_tol, rel_tol * |integral|)`. Non-convergence within the interval
/// budget is a numerical error carrying diagnostics.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("quadrature bounds must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }

    // Start from several panels so narrow features away from the first
    // node set still register in the error estimates.
    const INITIAL_PANELS: usize = 16;
    const MAX_INTERVALS: usize = 4000;
    let mut intervals = Vec::with_capacity(MAX_INTERVALS);
    for k in 0..INITIAL_PANELS {
        let pa = a + (b - a) * k as f64 / INITIAL_PANELS as f64;
        let pb = a + (b - a) * (k + 1) as f64 / INITIAL_PANELS as f64;
        let (v, e) = gk15(&f, pa, pb);
        intervals.push(Interval { a: pa, b: pb, value: v, err: e });
    }

    loop {
        let total: f64 = intervals.iter().map(|i| i.value).sum();
        let err: f64 = intervals.iter().map(|i| i.err).sum();
        if !total.is_finite() {
            return Err(Error::numerical(format!(
                "quadrature produced non-finite value on [{a}, {b}]"
            )));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::numerical(format!(
                "quadrature did not converge on [{a}, {b}]: {} intervals, value {total:.6e}, error {err:.3e}",
                intervals.len()
            )));
        }
        // Split the interval with the largest error estimate.
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("nonempty");
        let iv = intervals.swap_remove(worst);
        let mid = 0.5 * (iv.a + iv.b);
        if mid <= iv.a || mid >= iv.b {
            // Interval at floating-point resolution; keep its estimate.
            intervals.push(iv);
            let total: f64 = intervals.iter().map(|i| i.value).sum();
            return Ok(total);
        }
        let (v1, e1) = gk15(&f, iv.a, mid);
        let (v2, e2) = gk15(&f, mid, iv.b);
        intervals.push(Interval { a: iv.a, b: mid, value: v1, err: e1 });
        intervals.push(Interval { a: mid, b: iv.b, value: v2, err: e2 });
    }
}

/// Truncation bounds for a line integral: expands outward from
/// `[center - scale, center + scale]` until `|f|` at the boundary falls below
/// `TAIL_CUTOFF` times the observed peak. Fails if the integrand does not
/// decay within the expansion budget (a diverging exponential moment, say).
pub fn truncation_bounds<F: Fn(f64) -> f64>(f: &F, center: f64, scale: f64) -> Result<(f64, f64)> {
    let scale = scale.abs().max(1e-12);
    let mut peak: f64 = 0.0;
    for k in 0..=16 {
        let x = center + scale * (k as f64 / 8.0 - 1.0);
        peak = peak.max(f(x).abs());
    }
    if peak == 0.0 {
        peak = f64::MIN_POSITIVE;
    }

    let expand = |dir: f64| -> Result<f64> {
        let mut step = scale;
        let mut x = center + dir * scale;
        let mut local_peak = peak;
        for _ in 0..220 {
            let v = f(x).abs();
            if !v.is_finite() {
                return Err(Error::numerical(format!(
                    "integrand is non-finite at {x:.6e} while locating truncation bounds"
                )));
            }
            local_peak = local_peak.max(v);
            let thr = TAIL_CUTOFF * local_peak;
            if v <= thr && f(x + dir * step).abs() <= thr {
                return Ok(x + dir * step);
            }
            step *= 1.6;
            x += dir * step;
        }
        Err(Error::numerical(format!(
            "integrand does not decay in direction {dir:+} from {center} (last probe {x:.3e})"
        )))
    };

    let hi = expand(1.0)?;
    let lo = expand(-1.0)?;
    Ok((lo, hi))
}

/// Integral of `f` over the whole line via tail truncation plus adaptive
/// quadrature. `center`/`scale` locate the bulk of the integrand.
pub fn integrate_line<F: Fn(f64) -> f64>(
    f: F,
    center: f64,
    scale: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let (lo, hi) = truncation_bounds(&f, center, scale)?;
    integrate(f, lo, hi, rel_tol, abs_tol)
}

/// Iterated 2D integral over a finite box.
pub fn integrate_box<F: Fn(f64, f64) -> f64>(
    f: F,
    lo: [f64; 2],
    hi: [f64; 2],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    // Inner integrals get a tighter tolerance so the outer estimate stays honest.
    let inner_rel = rel_tol * 0.1;
    let inner_abs = abs_tol * 0.1;
    let v = integrate(
        |x| integrate(|y| f(x, y), lo[1], hi[1], inner_rel, inner_abs).unwrap_or(f64::NAN),
        lo[0],
        hi[0],
        rel_tol,
        abs_tol,
    )?;
    if !v.is_finite() {
        return Err(Error::numerical("inner quadrature of box integral failed"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        // K15 is exact for polynomials up to degree 22.
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12, 1e-14).unwrap();
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mass_on_line() {
        let sigma = 0.7;
        let v = integrate_line(
            |x| (-0.5 * x * x / (sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()),
            0.0,
            sigma,
            1e-12,
            1e-14,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-11, "mass = {v}");
    }

    #[test]
    fn peaked_integrand_adapts() {
        // A narrow spike away from the interval center.
        let v = integrate(|x: f64| (-((x - 0.9) / 1e-3).powi(2)).exp(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        let exact = 1e-3 * std::f64::consts::PI.sqrt();
        assert!((v - exact).abs() / exact < 1e-8, "v = {v}, exact = {exact}");
    }

    #[test]
    fn divergent_tail_detected() {
        let r = truncation_bounds(&|x: f64| x.exp(), 0.0, 1.0);
        assert!(r.is_err());
    }

    #[test]
    fn box_integral() {
        // mass of an isotropic 2D gaussian over a generous box
        let s = 1.0;
        let f = |x: f64, y: f64| {
            (-(x * x + y * y) / (2.0 * s * s)).exp() / (2.0 * std::f64::consts::PI * s * s)
        };
        let v = integrate_box(f, [-10.0, -10.0], [10.0, 10.0], 1e-10, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }
}
