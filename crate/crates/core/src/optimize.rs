//! One-dimensional search primitives shared by the solvers and case studies.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Point and value of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub x: f64,
    pub value: f64,
}

fn better(candidate: Optimum, best: Optimum) -> bool {
    candidate.value > best.value || (candidate.value == best.value && candidate.x < best.x)
}

/// Uniform grid of `points` nodes on `[lo, hi]`; the last node is `hi` exactly.
pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || lo == hi {
        return vec![lo];
    }
    let h = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|k| if k == points - 1 { hi } else { lo + h * k as f64 })
        .collect()
}

/// Leftmost maximizer over the grid, with its index.
pub fn grid_argmax<F>(f: &mut F, nodes: &[f64]) -> Result<(usize, Optimum)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut best = (0, Optimum { x: nodes[0], value: f(nodes[0])? });
    for (k, &x) in nodes.iter().enumerate().skip(1) {
        let value = f(x)?;
        if value > best.1.value {
            best = (k, Optimum { x, value });
        }
    }
    Ok(best)
}

/// Golden-section search for a maximum on `[a, b]`, keeping the left part on
/// ties. Returns the best point evaluated.
pub fn golden_max<F>(f: &mut F, mut a: f64, mut b: f64, tol: f64) -> Result<Optimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut best = Optimum { x: c, value: fc };
    let d_opt = Optimum { x: d, value: fd };
    if better(d_opt, best) {
        best = d_opt;
    }
    for _ in 0..300 {
        if b - a <= tol * (1.0 + 0.5 * (a.abs() + b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            let o = Optimum { x: c, value: fc };
            if better(o, best) {
                best = o;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            let o = Optimum { x: d, value: fd };
            if better(o, best) {
                best = o;
            }
        }
    }
    Ok(best)
}

/// Grid scan followed by golden-section polish around the best node.
///
/// The polished point replaces the grid node only when its value is strictly
/// larger, so flat stretches resolve to the leftmost grid node.
pub fn maximize_1d<F>(mut f: F, lo: f64, hi: f64, points: usize, tol: f64) -> Result<Optimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) {
        return Err(Error::InvalidConfig(format!("empty interval [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(Optimum { x: lo, value: f(lo)? });
    }
    let nodes = grid(lo, hi, points.max(3));
    let (k, best) = grid_argmax(&mut f, &nodes)?;
    let a = nodes[k.saturating_sub(1)];
    let b = nodes[(k + 1).min(nodes.len() - 1)];
    let polished = golden_max(&mut f, a, b, tol)?;
    Ok(if polished.value > best.value { polished } else { best })
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::InvalidParams(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Central finite difference with step `h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_peak() {
        let o = maximize_1d(|x| Ok(-(x - 0.3).powi(2)), 0.0, 1.0, 129, 1e-10).unwrap();
        assert!((o.x - 0.3).abs() < 1e-7);
    }

    #[test]
    fn flat_function_goes_left() {
        let o = maximize_1d(|_| Ok(2.0), -1.0, 1.0, 129, 1e-8).unwrap();
        assert_eq!(o.x, -1.0);
    }

    #[test]
    fn monotone_functions_hit_the_ends() {
        assert_eq!(maximize_1d(|x| Ok(x), 0.0, 1.0, 129, 1e-8).unwrap().x, 1.0);
        assert_eq!(maximize_1d(|x| Ok(-x), 0.0, 1.0, 129, 1e-8).unwrap().x, 0.0);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-12).is_err());
    }

    #[test]
    fn grid_ends_exactly() {
        let g = grid(0.0, 3.0, 129);
        assert_eq!(g.len(), 129);
        assert_eq!(g[128], 3.0);
        assert_eq!(g[64], 1.5);
    }
}
