//! Scalar root finding: geometric bracket expansion and a damped Newton
//! iteration that falls back to bisection inside the bracket.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Grows `[start - step, start + step]` by doubling `step` until `f` changes
/// sign or both ends sit on `bounds`. When no sign change is seen the
/// searched interval comes back as the error. Non-finite values of `f` never
/// count as a sign change.
pub fn expand_bracket<F>(
    f: F,
    start: f64,
    initial_step: f64,
    bounds: (f64, f64),
) -> std::result::Result<Bracket, (f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let (lower, upper) = bounds;
    let start = start.clamp(lower, upper);
    let f_start = f(start);
    if f_start == 0.0 {
        return Ok(Bracket {
            lo: start,
            hi: start,
            f_lo: 0.0,
            f_hi: 0.0,
        });
    }
    let mut step = initial_step;
    loop {
        let a = (start - step).max(lower);
        let b = (start + step).min(upper);
        let (fa, fb) = (f(a), f(b));
        if fa.is_finite() && fa.signum() != f_start.signum() {
            return Ok(Bracket {
                lo: a,
                hi: start,
                f_lo: fa,
                f_hi: f_start,
            });
        }
        if fb.is_finite() && fb.signum() != f_start.signum() {
            return Ok(Bracket {
                lo: start,
                hi: b,
                f_lo: f_start,
                f_hi: fb,
            });
        }
        if a == lower && b == upper {
            return Err((lower, upper));
        }
        step *= 2.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Stop once `|f(x)|` falls below this.
    pub tol_f: f64,
    /// Stop once the bracket is narrower than this.
    pub tol_x: f64,
    pub max_iter: usize,
    /// Step halvings tried before falling back to bisection.
    pub max_damping: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol_f: 1e-12,
            tol_x: 1e-14,
            max_iter: 200,
            max_damping: 8,
        }
    }
}

fn derivative<F: Fn(f64) -> f64>(f: &F, x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Damped Newton iteration kept inside `bracket`.
///
/// Each Newton step is halved until it stays inside the bracket and reduces
/// `|f|`; when damping fails the iteration bisects instead. The bracket is
/// tightened every iteration so convergence is guaranteed for continuous `f`.
pub fn damped_newton<F>(f: F, bracket: Bracket, opts: RootOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut br = bracket;
    if br.f_lo == 0.0 {
        return Ok(br.lo);
    }
    if br.f_hi == 0.0 {
        return Ok(br.hi);
    }
    if br.f_lo.signum() == br.f_hi.signum() {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: br.f_lo.abs().min(br.f_hi.abs()),
        });
    }

    let mut x = 0.5 * (br.lo + br.hi);
    let mut fx = f(x);
    for _ in 0..opts.max_iter {
        if fx.abs() < opts.tol_f || br.width() < opts.tol_x {
            return Ok(x);
        }
        if fx.signum() == br.f_lo.signum() {
            br.lo = x;
            br.f_lo = fx;
        } else {
            br.hi = x;
            br.f_hi = fx;
        }

        let slope = derivative(&f, x);
        let mut next = None;
        if slope != 0.0 && slope.is_finite() {
            let mut step = -fx / slope;
            for _ in 0..=opts.max_damping {
                let cand = x + step;
                if cand > br.lo && cand < br.hi {
                    let fc = f(cand);
                    if fc.abs() < fx.abs() {
                        next = Some((cand, fc));
                        break;
                    }
                }
                step *= 0.5;
            }
        }
        let (nx, nfx) = next.unwrap_or_else(|| {
            let mid = 0.5 * (br.lo + br.hi);
            (mid, f(mid))
        });
        if nx == x {
            return Ok(x);
        }
        x = nx;
        fx = nfx;
    }
    if fx.abs() < opts.tol_f {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            iterations: opts.max_iter,
            residual: fx.abs(),
        })
    }
}
