use crate::error::{Error, Result};

/// Halley iteration for a root of `f`, given `f`, `f'` and `f''` at each step
/// through `eval`. Stops when the step is below `x_tol * max(1, |x|)`.
pub fn halley<F: Fn(f64) -> (f64, f64, f64)>(eval: F, start: f64, x_tol: f64, max_iters: usize) -> Result<f64> {
    let mut x = start;
    for it in 0..max_iters {
        let (f, d1, d2) = eval(x);
        if f == 0.0 {
            return Ok(x);
        }
        let denom = 2.0 * d1 * d1 - f * d2;
        if !denom.is_finite() || denom == 0.0 {
            return Err(Error::NotConverged {
                iterations: it,
                diameter: f.abs(),
            });
        }
        let step = 2.0 * f * d1 / denom;
        x -= step;
        if !x.is_finite() {
            return Err(Error::NotConverged {
                iterations: it,
                diameter: f64::INFINITY,
            });
        }
        if step.abs() <= x_tol * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::NotConverged {
        iterations: max_iters,
        diameter: f64::NAN,
    })
}

/// Bisection on a sign-changing bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidSpec(format!("[{lo}, {hi}] does not bracket a root")));
    }
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halley_square_root() {
        let r = halley(|x| (x * x - 2.0, 2.0 * x, 2.0), 1.0, 1e-15, 50).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bisect_cubic() {
        let r = bisect(|x| x * x * x - x - 1.0, 1.0, 2.0, 1e-14).unwrap();
        assert!((r * r * r - r - 1.0).abs() < 1e-12);
    }
}
