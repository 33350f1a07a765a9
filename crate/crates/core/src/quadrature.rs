//! Adaptive Simpson quadrature with a Richardson-corrected error estimate.

use crate::error::{Error, Result};

/// Maximum number of accepted subintervals before giving up.
pub const DEFAULT_BUDGET: usize = 1 << 20;
const MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// Each panel is halved until the two-halves Simpson estimate agrees with the
/// whole-panel estimate within `15 * tol`; the tolerance is split between the
/// halves on every split so the sum respects the global target.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64, budget: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);

    // Coarse magnitude from a 4-panel composite so an accidental zero at the
    // first midpoint does not collapse the tolerance.
    let scale = {
        let (l, r) = (0.5 * (a + m), 0.5 * (m + b));
        let (fl, fr) = (f(l), f(r));
        (simpson(a, m, fa, fl, fm) + simpson(m, b, fm, fr, fb)).abs()
    };
    if scale == 0.0 && whole == 0.0 {
        return Ok(0.0);
    }
    let tol = rel_tol * scale.max(whole.abs());

    let mut state = State {
        f: &f,
        accepted: 0,
        budget,
    };
    state.refine(a, b, fa, fm, fb, whole, tol, 0)
}

struct State<'a, F> {
    f: &'a F,
    accepted: usize,
    budget: usize,
}

impl<F: Fn(f64) -> f64> State<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && delta.abs() > 15.0 * tol {
                return Err(Error::Quadrature { budget: self.budget });
            }
            self.accepted += 1;
            if self.accepted > self.budget {
                return Err(Error::Quadrature { budget: self.budget });
            }
            return Ok(left + right + delta / 15.0);
        }
        if self.accepted >= self.budget {
            return Err(Error::Quadrature { budget: self.budget });
        }
        let l = self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}
