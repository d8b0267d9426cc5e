/// One classical fourth-order Runge-Kutta step for `y' = rhs(s, y)`.
pub fn rk4_step<const N: usize>(
    s: f64,
    y: &[f64; N],
    h: f64,
    mut rhs: impl FnMut(f64, &[f64; N]) -> [f64; N],
) -> [f64; N] {
    let axpy = |a: &[f64; N], k: &[f64; N], c: f64| -> [f64; N] {
        let mut out = *a;
        for (o, kk) in out.iter_mut().zip(k) {
            *o += c * kk;
        }
        out
    };
    let k1 = rhs(s, y);
    let k2 = rhs(s + 0.5 * h, &axpy(y, &k1, 0.5 * h));
    let k3 = rhs(s + 0.5 * h, &axpy(y, &k2, 0.5 * h));
    let k4 = rhs(s + h, &axpy(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}
