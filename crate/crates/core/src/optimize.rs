//! Scalar maximizers used by the exponent engine.

use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping when the bracket is narrower than `tol`.
pub fn golden_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Maximum> {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evals = 2;
    let mut it = 0;
    while (b - a).abs() > tol {
        if it == max_iter {
            return Err(Error::NotConverged { what: "golden-section search", iterations: it });
        }
        it += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(Maximum { x, value, evaluations: evals })
}

/// Coarse grid of `points` samples on `[lo, hi]` followed by golden-section
/// refinement around the best grid point. Endpoints are candidates too.
pub fn grid_golden_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Maximum> {
    assert!(points >= 3);
    let step = (hi - lo) / (points - 1) as f64;
    let values: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let x = if i == points - 1 { hi } else { lo + step * i as f64 };
            (x, f(x))
        })
        .collect();
    let (best, &(bx, bv)) = values
        .iter()
        .enumerate()
        .fold(None::<(usize, &(f64, f64))>, |acc, (i, p)| match acc {
            Some((_, q)) if q.1 >= p.1 => acc,
            _ => Some((i, p)),
        })
        .expect("non-empty grid");
    let a = values[best.saturating_sub(1)].0;
    let b = values[(best + 1).min(points - 1)].0;
    let refined = golden_max(&mut f, a, b, tol, max_iter)?;
    let evaluations = points + refined.evaluations;
    if refined.value >= bv {
        Ok(Maximum { evaluations, ..refined })
    } else {
        Ok(Maximum { x: bx, value: bv, evaluations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let m = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-9, 200).unwrap();
        assert!((m.x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn grid_golden_handles_boundary_maximum() {
        let m = grid_golden_max(|x| x, 0.0, 1.0, 21, 1e-6, 200).unwrap();
        assert!((m.x - 1.0).abs() < 1e-6);
        let m = grid_golden_max(|x| -x, 0.0, 1.0, 21, 1e-6, 200).unwrap();
        assert!(m.x.abs() < 1e-6);
    }

    #[test]
    fn reports_non_convergence() {
        let e = golden_max(|x| -x * x, -1.0, 1.0, 1e-12, 5).unwrap_err();
        assert!(matches!(e, Error::NotConverged { .. }));
    }
}
