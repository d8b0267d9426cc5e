use super::{valid_runs, SampledFunction, SampledVectorField};
use crate::error::{Error, Result};

const MIN_STENCIL: usize = 5;

/// Fourth-order first derivative at offset `j` of a run of valid samples.
///
/// Central five-point formula in the interior, five-point one-sided
/// formulas at the two samples nearest each end of the run.
fn d1(v: &[f64], j: usize, h: f64) -> f64 {
    let m = v.len();
    let num = if j >= 2 && j + 2 < m {
        v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]
    } else if j == 0 {
        -25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]
    } else if j == 1 {
        -3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]
    } else if j == m - 1 {
        25.0 * v[m - 1] - 48.0 * v[m - 2] + 36.0 * v[m - 3] - 16.0 * v[m - 4] + 3.0 * v[m - 5]
    } else {
        3.0 * v[m - 1] + 10.0 * v[m - 2] - 18.0 * v[m - 3] + 6.0 * v[m - 4] - v[m - 5]
    };
    num / (12.0 * h)
}

/// d/ds of a sampled function.
///
/// Each maximal run of valid samples is differentiated on its own; runs
/// shorter than the five-point stencil come back invalid.
pub fn derivative(f: &SampledFunction) -> Result<SampledFunction> {
    let n = f.len();
    if n < MIN_STENCIL {
        return Err(Error::TooFewSamples {
            needed: MIN_STENCIL,
            got: n,
        });
    }
    let h = f.grid().step();
    let mut values = vec![f64::NAN; n];
    let mut mask = vec![false; n];
    for run in valid_runs(f.mask()) {
        if run.len() < MIN_STENCIL {
            continue;
        }
        let v = &f.values()[run.clone()];
        for j in 0..v.len() {
            values[run.start + j] = d1(v, j, h);
            mask[run.start + j] = true;
        }
    }
    SampledFunction::with_mask(*f.grid(), values, mask)
}

/// Componentwise derivative of a vector field.
pub fn derivative_field(field: &SampledVectorField) -> Result<SampledVectorField> {
    let x = derivative(&field.component(0))?;
    let y = derivative(&field.component(1))?;
    let z = derivative(&field.component(2))?;
    Ok(SampledVectorField::from_components(&x, &y, &z))
}

/// Integral over one grid interval `[i, i+1]` from the cubic through four
/// neighbouring samples of `v` (one-sided at the ends).
fn interval_cubic(v: &[f64], i: usize, h: f64) -> f64 {
    let m = v.len();
    if i == 0 {
        h / 24.0 * (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3])
    } else if i + 2 >= m {
        h / 24.0 * (9.0 * v[m - 1] + 19.0 * v[m - 2] - 5.0 * v[m - 3] + v[m - 4])
    } else {
        h / 24.0 * (-v[i - 1] + 13.0 * v[i] + 13.0 * v[i + 1] - v[i + 2])
    }
}

/// Integral of the local cubic over `[a, b]`, both given in fractional index units
/// within one or two adjacent intervals.
fn partial_cubic(v: &[f64], a: f64, b: f64, h: f64) -> f64 {
    // three-point Gauss-Legendre, exact for the cubic interpolant
    const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let base = (mid.floor() as isize - 1).clamp(0, v.len() as isize - 4) as usize;
    NODES
        .iter()
        .zip(WEIGHTS)
        .map(|(&x, w)| w * super::interp::lagrange_local(&v[base..base + 4], mid + half * x - base as f64))
        .sum::<f64>()
        * half
        * h
}

fn check_valid(f: &SampledFunction, range: std::ops::RangeInclusive<usize>) -> Result<()> {
    for i in range {
        if !f.is_valid(i) {
            return Err(Error::MaskedRegion { index: i });
        }
    }
    Ok(())
}

/// Definite integral `int_from^to f ds`.
///
/// Composite Simpson over whole grid intervals (3/8 rule on a trailing odd
/// triple, interval cubic rule when only one interval remains), and the local
/// cubic interpolant on fractional end intervals.
pub fn integrate(f: &SampledFunction, from: f64, to: f64) -> Result<f64> {
    if from == to {
        return Ok(0.0);
    }
    if from > to {
        return integrate(f, to, from).map(|v| -v);
    }
    let n = f.len();
    if n < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: n });
    }
    let g = f.grid();
    let h = g.step();
    let slack = 1e-12 * g.span().max(1.0);
    if from < g.start() - slack || to > g.end() + slack {
        return Err(Error::RangeOutOfGrid {
            from,
            to,
            start: g.start(),
            end: g.end(),
        });
    }
    let x = ((from - g.start()) / h).clamp(0.0, (n - 1) as f64);
    let y = ((to - g.start()) / h).clamp(0.0, (n - 1) as f64);
    let snap = 1e-9;
    let i0 = ((x - snap).ceil().max(0.0)) as usize;
    let i1 = ((y + snap).floor() as usize).min(n - 1);

    let lo = (x.floor() as usize).saturating_sub(1);
    let hi = ((y.ceil() as usize) + 1).min(n - 1);
    check_valid(f, lo..=hi)?;
    let v = f.values();

    if i0 > i1 {
        return Ok(partial_cubic(v, x, y, h));
    }
    let mut total = 0.0;
    if (i0 as f64 - x) > snap {
        total += partial_cubic(v, x, i0 as f64, h);
    }
    if (y - i1 as f64) > snap {
        total += partial_cubic(v, i1 as f64, y, h);
    }
    let intervals = i1 - i0;
    if intervals == 1 {
        total += interval_cubic(v, i0, h);
    } else if intervals >= 2 {
        let simpson_end = if intervals.is_multiple_of(2) { i1 } else { i1 - 3 };
        let mut acc = 0.0;
        let mut i = i0;
        while i < simpson_end {
            acc += v[i] + 4.0 * v[i + 1] + v[i + 2];
            i += 2;
        }
        total += acc * h / 3.0;
        if intervals % 2 == 1 {
            let j = simpson_end;
            total += 3.0 * h / 8.0 * (v[j] + 3.0 * v[j + 1] + 3.0 * v[j + 2] + v[j + 3]);
        }
    }
    Ok(total)
}

fn cumulate_run(v: &[f64], h: f64, offset: f64, out: &mut [f64]) {
    out[0] = offset;
    for i in 0..v.len() - 1 {
        out[i + 1] = out[i] + interval_cubic(v, i, h);
    }
}

/// `g(s) = int_{s_0}^{s} f`, fourth order at every sample.
pub fn cumulative_integral(f: &SampledFunction) -> Result<SampledFunction> {
    let n = f.len();
    if n < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: n });
    }
    check_valid(f, 0..=n - 1)?;
    let mut out = vec![0.0; n];
    cumulate_run(f.values(), f.grid().step(), 0.0, &mut out);
    SampledFunction::new(*f.grid(), out)
}

/// Mask-aware cumulative integral: each valid run is integrated on its own and
/// continues from the value reached at the end of the previous run, so gaps
/// contribute nothing. Runs shorter than four samples stay invalid.
pub fn cumulative_integral_runs(f: &SampledFunction) -> Result<SampledFunction> {
    let n = f.len();
    if n < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: n });
    }
    let h = f.grid().step();
    let mut values = vec![f64::NAN; n];
    let mut mask = vec![false; n];
    let mut carry = 0.0;
    for run in valid_runs(f.mask()) {
        if run.len() < 4 {
            continue;
        }
        cumulate_run(&f.values()[run.clone()], h, carry, &mut values[run.clone()]);
        carry = values[run.end - 1];
        mask[run].iter_mut().for_each(|m| *m = true);
    }
    SampledFunction::with_mask(*f.grid(), values, mask)
}
