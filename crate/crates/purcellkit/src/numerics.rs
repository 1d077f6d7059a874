//! Small numerical routines: complete elliptic integrals via the AGM,
//! adaptive Simpson quadrature, and bracketed bisection.

use crate::error::{Error, Result};

/// Complete elliptic integral of the first kind K(k), modulus convention
/// (argument is k, not m = k^2).
///
/// Evaluated with the arithmetic-geometric mean: K(k) = pi / (2 AGM(1, k')),
/// k' = sqrt(1 - k^2). Converges quadratically; the loop exits below 1e-15
/// relative, well inside the 1e-12 target.
pub fn elliptic_k(k: f64) -> f64 {
    assert!((0.0..1.0).contains(&k), "elliptic_k: modulus out of [0,1)");
    let mut a = 1.0_f64;
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..40 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() < 1e-15 * an {
            return std::f64::consts::PI / (2.0 * an);
        }
        a = an;
        b = bn;
    }
    std::f64::consts::PI / (2.0 * a)
}

/// Ratio K(k) / K(k') used by conformal-mapping formulas.
pub fn elliptic_k_ratio(k: f64) -> f64 {
    let kp = (1.0 - k * k).sqrt();
    elliptic_k(k) / elliptic_k(kp)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance
/// `rel_tol` (tolerance is applied against the running whole-interval
/// estimate, so integrable spikes do not stall the subdivision).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::Numerics(format!("bad integration interval [{a}, {b}]")));
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    let mut evals = 0usize;
    let scale = whole.abs().max(1e-300);
    let value = adapt(&f, a, b, fa, fm, fb, whole, rel_tol * scale, 0, &mut evals)?;
    Ok(value)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    evals: &mut usize,
) -> Result<f64> {
    *evals += 2;
    if *evals > 2_000_000 {
        return Err(Error::Numerics("quadrature evaluation budget exceeded".into()));
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= 60 {
        return Err(Error::Numerics("quadrature recursion depth exceeded".into()));
    }
    if delta.abs() <= 15.0 * tol || (b - a) < 1e-14 * (b.abs() + a.abs()) {
        // Richardson extrapolation term
        return Ok(left + right + delta / 15.0);
    }
    let l = adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, evals)?;
    let r = adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, evals)?;
    Ok(l + r)
}

/// Bisection for a root of `f` on `[lo, hi]` to relative tolerance
/// `rel_tol` on the abscissa. Errors if the endpoints do not bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerics(format!(
            "no sign change on bracket [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 || (hi - lo).abs() <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Evenly spaced grid over `[start, stop]`, endpoints included.
pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::Numerics("grid needs at least one point".into()));
    }
    if points == 1 {
        if (stop - start).abs() > 1e-9 * start.abs().max(stop.abs()) {
            return Err(Error::Numerics(
                "single-point grid requires start == stop".into(),
            ));
        }
        return Ok(vec![start]);
    }
    if stop <= start {
        return Err(Error::Numerics("grid stop must exceed start".into()));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points).map(|i| start + step * i as f64).collect())
}
