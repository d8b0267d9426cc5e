use super::SampledFunction;
use crate::error::{Error, Result};

/// Cubic through `v[0..4]` at abscissae `0, 1, 2, 3`, evaluated at `t`.
pub(crate) fn lagrange_local(v: &[f64], t: f64) -> f64 {
    let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
    -v[0] * b * c * d / 6.0 + v[1] * a * c * d / 2.0 - v[2] * a * b * d / 2.0 + v[3] * a * b * c / 6.0
}

/// Local four-point cubic interpolation of a sampled function at `s`.
///
/// Uses the two samples on each side of `s` (shifted inward at the ends).
/// Returns `None` when any of the four samples is invalid.
pub fn lagrange_cubic(f: &SampledFunction, s: f64) -> Option<f64> {
    let g = f.grid();
    let n = f.len();
    if n < 4 {
        return None;
    }
    let x = (s - g.start()) / g.step();
    let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let v = &f.values()[base..base + 4];
    if !f.mask()[base..base + 4].iter().all(|&m| m) {
        return None;
    }
    Some(lagrange_local(v, x - base as f64))
}

fn locate(x: &[f64], t: f64) -> usize {
    let n = x.len();
    match x.binary_search_by(|p| p.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    }
}

fn check_abscissae(x: &[f64], y: &[f64], needed: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            grid: x.len(),
            data: y.len(),
        });
    }
    if x.len() < needed {
        return Err(Error::TooFewSamples { needed, got: x.len() });
    }
    for (i, w) in x.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NonIncreasingGrid { index: i + 1 });
        }
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    Ok(())
}

/// Interpolating cubic spline with not-a-knot end conditions.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(x: &[f64], y: &[f64]) -> Result<Self> {
        check_abscissae(x, y, 4)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        // unknowns m[1..n-1]; m[0] and m[n-1] eliminated with the not-a-knot rows
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for r in 0..k {
            let i = r + 1;
            sub[r] = h[i - 1];
            diag[r] = 2.0 * (h[i - 1] + h[i]);
            sup[r] = h[i];
            rhs[r] = 6.0 * (d[i] - d[i - 1]);
        }
        // m0 = ((h0 + h1) m1 - h0 m2) / h1
        let (h0, h1) = (h[0], h[1]);
        diag[0] += h0 * (h0 + h1) / h1;
        if k > 1 {
            sup[0] -= h0 * h0 / h1;
        }
        // m_{n-1} = ((ha + hb) m_{n-2} - hb m_{n-3}) / ha  with ha = h[n-3], hb = h[n-2]
        let (ha, hb) = (h[n - 3], h[n - 2]);
        diag[k - 1] += hb * (ha + hb) / ha;
        if k > 1 {
            sub[k - 1] -= hb * hb / ha;
        }
        let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&inner);
        m[0] = if k > 1 {
            ((h0 + h1) * m[1] - h0 * m[2]) / h1
        } else {
            m[1]
        };
        m[n - 1] = if k > 1 {
            ((ha + hb) * m[n - 2] - hb * m[n - 3]) / ha
        } else {
            m[n - 2]
        };
        Ok(CubicSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    fn segment(&self, t: f64) -> (usize, f64, f64, f64) {
        let i = locate(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (i, h, a, b)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (i, h, a, b) = self.segment(t);
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (i, h, a, b) = self.segment(t);
        (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    out
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        check_abscissae(x, y, 2)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slope = vec![0.0; n];
        if n == 2 {
            slope[0] = delta[0];
            slope[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                let (d0, d1) = (delta[i - 1], delta[i]);
                if d0 * d1 > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slope[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slope[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slope[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(MonotoneCubic {
            x: x.to_vec(),
            y: y.to_vec(),
            slope,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = locate(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1]
    }
}

// three-point one-sided slope, limited to keep monotonicity
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;

    #[test]
    fn lagrange_reproduces_cubics() {
        let g = Grid::linspace(0.0, 1.0, 11).unwrap();
        let f = SampledFunction::from_fn(g, |s| 2.0 * s * s * s - s + 0.5);
        for &s in &[0.0, 0.013, 0.5, 0.77, 0.999, 1.0] {
            let v = lagrange_cubic(&f, s).unwrap();
            assert!((v - (2.0 * s * s * s - s + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn not_a_knot_is_exact_for_cubics() {
        let x: Vec<f64> = (0..9).map(|i| (i as f64).powf(1.3)).collect();
        let p = |t: f64| 0.3 * t * t * t - 1.2 * t * t + t - 4.0;
        let y: Vec<f64> = x.iter().map(|&t| p(t)).collect();
        let s = CubicSpline::not_a_knot(&x, &y).unwrap();
        for k in 0..80 {
            let t = x[8] * k as f64 / 79.0;
            assert!((s.eval(t) - p(t)).abs() < 1e-9);
            let dp = 0.9 * t * t - 2.4 * t + 1.0;
            assert!((s.derivative(t) - dp).abs() < 1e-9);
        }
    }

    #[test]
    fn not_a_knot_converges_at_fourth_order() {
        let err = |n: usize| {
            let x: Vec<f64> = (0..n).map(|i| 3.0 * i as f64 / (n - 1) as f64).collect();
            let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
            let s = CubicSpline::not_a_knot(&x, &y).unwrap();
            (0..1000)
                .map(|k| 3.0 * (k as f64 + 0.5) / 1000.0)
                .map(|t| (s.eval(t) - t.sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn monotone_cubic_preserves_monotone_data() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.0, 0.1, 0.1, 2.0, 2.05, 5.0];
        let p = MonotoneCubic::new(&x, &y).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=500 {
            let v = p.eval(5.0 * k as f64 / 500.0);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert!((p.eval(3.0) - 2.0).abs() < 1e-15);
    }
}
